from sqlalchemy import Column, Integer, String, DateTime, Boolean, Text
from sqlalchemy.orm import declarative_base
from sqlalchemy.ext.asyncio import AsyncSession, create_async_engine, async_sessionmaker
from datetime import datetime, timedelta
from typing import List, Optional
import json

Base = declarative_base()


class RunManifestRecord(Base):
    __tablename__ = "run_manifests"

    id = Column(Integer, primary_key=True)
    timestamp = Column(DateTime, default=datetime.utcnow, index=True)
    command = Column(String, nullable=False, index=True)
    artifact_version = Column(String, nullable=False)
    catalog_checksum = Column(String, nullable=False)
    exit_code = Column(Integer, default=0)
    passed = Column(Boolean, default=True)
    config_json = Column(Text, nullable=False)
    verdicts_json = Column(Text, nullable=False)


class Database:
    def __init__(self, database_url: str = "sqlite+aiosqlite:///sporadic_runs.db"):
        self.database_url = database_url
        self.engine = create_async_engine(database_url, echo=False)
        self.async_session = async_sessionmaker(
            self.engine, class_=AsyncSession, expire_on_commit=False
        )

    async def init_db(self):
        async with self.engine.begin() as conn:
            await conn.run_sync(Base.metadata.create_all)

    async def close(self):
        await self.engine.dispose()

    async def log_manifest(self, manifest: dict) -> int:
        async with self.async_session() as session:
            record = RunManifestRecord(
                timestamp=datetime.utcnow(),
                command=manifest["command"],
                artifact_version=manifest["versions"]["artifact"],
                catalog_checksum=manifest["versions"]["catalog_checksum"],
                exit_code=manifest["exit_code"],
                passed=manifest["exit_code"] == 0,
                config_json=json.dumps(manifest["config"], sort_keys=True),
                verdicts_json=json.dumps(manifest["outcome"], sort_keys=True),
            )
            session.add(record)
            await session.commit()
            return record.id

    async def get_manifests(
        self,
        limit: int = 100,
        offset: int = 0,
        command_filter: Optional[str] = None,
        failures_only: bool = False
    ) -> List[dict]:
        async with self.async_session() as session:
            from sqlalchemy import select

            query = select(RunManifestRecord)
            if command_filter:
                query = query.where(RunManifestRecord.command == command_filter)
            if failures_only:
                query = query.where(RunManifestRecord.passed == False)

            query = query.order_by(RunManifestRecord.id.desc()).limit(limit).offset(offset)
            result = await session.execute(query)
            records = result.scalars().all()

            return [
                {
                    "id": record.id,
                    "timestamp": record.timestamp.isoformat(),
                    "command": record.command,
                    "artifact_version": record.artifact_version,
                    "catalog_checksum": record.catalog_checksum,
                    "exit_code": record.exit_code,
                    "passed": record.passed,
                    "config": json.loads(record.config_json),
                    "outcome": json.loads(record.verdicts_json),
                }
                for record in records
            ]

    async def get_statistics(self) -> dict:
        async with self.async_session() as session:
            from sqlalchemy import select, func

            totals = await session.execute(
                select(
                    func.count(RunManifestRecord.id).label("total_runs"),
                    func.sum(RunManifestRecord.passed).label("passed_runs"),
                )
            )
            stats = totals.one()

            command_query = select(
                RunManifestRecord.command,
                func.count(RunManifestRecord.id).label("count")
            ).group_by(RunManifestRecord.command)
            command_result = await session.execute(command_query)
            command_counts = {row.command: row.count for row in command_result}

            total = stats.total_runs or 0
            passed = int(stats.passed_runs or 0)
            return {
                "total_runs": total,
                "passed_runs": passed,
                "failed_runs": total - passed,
                "command_counts": command_counts,
            }

    async def cleanup_old_manifests(self, days_to_keep: int = 30) -> int:
        async with self.async_session() as session:
            from sqlalchemy import delete

            cutoff_date = datetime.utcnow() - timedelta(days=days_to_keep)
            result = await session.execute(
                delete(RunManifestRecord).where(RunManifestRecord.timestamp < cutoff_date)
            )
            await session.commit()
            return result.rowcount
