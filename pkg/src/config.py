from functools import lru_cache
from pydantic_settings import BaseSettings
from pydantic import Field
from typing import Optional
from pathlib import Path
import json
import os
import sys


class Settings(BaseSettings):
    # Polynomial kernel
    term_cap: int = Field(10_000_000, description="Maximum number of terms in any product or power")
    max_exponent: int = Field(2**15 - 1, description="Largest exponent magnitude accepted by the parser")
    prune_unreachable: bool = Field(False, description="Drop terms that cannot return to the origin in ct_sequence")

    # Cross-validation depths
    depth_2var: int = Field(12, description="Agreement depth for 2-variable CT polynomials")
    depth_3var: int = Field(10, description="Agreement depth for 3-variable CT polynomials")
    diagonal_depth: int = Field(5, description="Diagonal equivalence depth used by verify")
    ct_source_max_index: int = Field(60, description="Largest index a constant-term sequence source will compute")

    # Search settings
    prefix_2var: int = Field(8, description="Default match depth for 2-variable searches")
    prefix_3var: int = Field(6, description="Default match depth for 3-variable searches")
    search_max_candidates: int = Field(2_000_000, description="Refuse search spaces estimated above this size")
    search_shard_size: int = Field(256, description="Candidates per search shard")
    search_workers: int = Field(1, description="Worker processes for search shards")
    search_max_evaluations: Optional[int] = Field(None, description="Stop after this many candidate evaluations")

    # Run manifests
    database_url: str = Field("sqlite+aiosqlite:///sporadic_runs.db", description="Manifest database URL")
    enable_database: bool = Field(True, description="Record run manifests in the database")
    manifest_directory: str = Field("manifests", description="Directory for JSON-lines manifest logs")
    enable_manifest_file: bool = Field(True, description="Append run manifests to a daily JSON-lines file")
    cleanup_days: int = Field(30, description="Days to keep manifests in the database")

    # Diagnostics
    verbose: bool = Field(False, description="Print tagged diagnostics to stderr")
    progress: bool = Field(False, description="Show search progress bars on stderr")

    model_config = {
        'env_prefix': 'SPORADIC_',
        'env_file': '.env',
        'env_file_encoding': 'utf-8',
        'extra': 'ignore',
    }


def load_config(config_file: Optional[str] = None) -> Settings:
    if config_file and Path(config_file).exists():
        return Settings(_env_file=config_file)
    return Settings()


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    return load_config(os.environ.get("SPORADIC_CONFIG_FILE"))


def save_config(settings: Settings, config_file: str = "config.json"):
    with open(config_file, 'w') as f:
        json.dump(settings.model_dump(), f, indent=2, sort_keys=True)
    if settings.verbose:
        print(f"[CONFIG] Configuration saved to {config_file}", file=sys.stderr)
