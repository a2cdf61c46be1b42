from datetime import datetime
from typing import Any, Dict, List, Optional
import json
import sys
import aiofiles
from pathlib import Path

from .database import Database


def _say(tag: str, message: str, verbose: bool):
    if verbose:
        print(f"[{tag}] {message}", file=sys.stderr)


class ManifestSink:
    def __init__(self, name: str, verbose: bool = False):
        self.name = name
        self.enabled = True
        self.verbose = verbose
        self.last_written: Optional[datetime] = None

    async def record(self, manifest: Dict[str, Any]) -> bool:
        if not self.enabled:
            _say("MANIFEST", f"{self.name} is disabled, skipping", self.verbose)
            return False
        self.last_written = datetime.now()
        return await self._execute(manifest)

    async def _execute(self, manifest: Dict[str, Any]) -> bool:
        raise NotImplementedError


class ManifestFileLogger(ManifestSink):
    """Appends each manifest to a daily JSON-lines file."""

    def __init__(self, log_dir: str = "manifests", verbose: bool = False):
        super().__init__("manifest_file", verbose)
        self.log_dir = Path(log_dir)

    async def _execute(self, manifest: Dict[str, Any]) -> bool:
        try:
            self.log_dir.mkdir(parents=True, exist_ok=True)
            log_file = self.log_dir / f"runs_{datetime.now().strftime('%Y%m%d')}.jsonl"
            entry = dict(manifest, timestamp=datetime.now().isoformat())
            async with aiofiles.open(log_file, mode='a') as f:
                await f.write(json.dumps(entry, sort_keys=True) + "\n")
            _say("MANIFEST", f"✓ Manifest appended to {log_file}", self.verbose)
            return True
        except Exception as e:
            _say("MANIFEST", f"✗ File logging failed: {e}", True)
            return False


class DatabaseRecorder(ManifestSink):
    def __init__(self, database: Database, verbose: bool = False):
        super().__init__("database", verbose)
        self.database = database
        self._initialized = False

    async def _execute(self, manifest: Dict[str, Any]) -> bool:
        try:
            if not self._initialized:
                await self.database.init_db()
                self._initialized = True
            row_id = await self.database.log_manifest(manifest)
            _say("DB", f"✓ Manifest stored as row {row_id}", self.verbose)
            return True
        except Exception as e:
            _say("DB", f"✗ Database write failed: {e}", True)
            return False


class ManifestDispatcher:
    def __init__(self, verbose: bool = False):
        self.sinks: Dict[str, ManifestSink] = {}
        self.verbose = verbose

    def add_sink(self, sink: ManifestSink):
        self.sinks[sink.name] = sink

    def remove_sink(self, name: str):
        self.sinks.pop(name, None)

    def disable_sink(self, name: str):
        if name in self.sinks:
            self.sinks[name].enabled = False

    async def dispatch(self, manifest: Dict[str, Any]) -> List[str]:
        """Send the manifest to every sink; a failing sink never aborts the run."""
        _say("MANIFEST", f"Dispatching {manifest.get('command')} manifest to {', '.join(self.sinks) or 'no sinks'}",
             self.verbose)
        written = []
        for name, sink in self.sinks.items():
            try:
                if await sink.record(manifest):
                    written.append(name)
                    _say("MANIFEST", f"{name}: ✓", self.verbose)
                else:
                    _say("MANIFEST", f"{name}: ✗", self.verbose)
            except Exception as e:
                _say("MANIFEST", f"{name}: ✗ EXCEPTION - {e}", True)
        return written

    def get_status(self) -> Dict[str, Any]:
        return {
            name: {
                "enabled": sink.enabled,
                "last_written": sink.last_written.isoformat() if sink.last_written else None,
            }
            for name, sink in self.sinks.items()
        }
