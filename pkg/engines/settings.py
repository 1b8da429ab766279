"""
Run configuration.

Values come from CLI flags, then from the environment (a .env file is honoured
through python-dotenv), then from defaults.
"""

import hashlib
import os
import random
from dataclasses import dataclass, field, replace

from dotenv import load_dotenv

load_dotenv()

ENGINE_VERSION = "1.0.0"
SCHEMA_VERSION = 1

BOUND_POLICIES = ("certified", "grh")
OUTPUT_FORMATS = ("json", "csv", "md")


@dataclass(frozen=True)
class RunConfig:
    command: str = ""
    tower: dict = field(default_factory=dict)
    bound_policy: str = "certified"
    precision: int = None
    jobs: int = 1
    cache_dir: str = "data/cache"
    output_format: str = "json"
    seed: int = 0

    def __post_init__(self):
        if self.bound_policy not in BOUND_POLICIES:
            raise ValueError(f"Unknown bound policy: {self.bound_policy}")
        if self.output_format not in OUTPUT_FORMATS:
            raise ValueError(f"Unknown output format: {self.output_format}")
        if self.jobs < 1:
            raise ValueError(f"Worker count must be positive: {self.jobs}")

    def rng(self, tag):
        """Independent, reproducible random stream for one stage of a run."""
        digest = hashlib.sha256(f"{self.seed}:{tag}".encode()).digest()
        return random.Random(int.from_bytes(digest[:8], "big"))

    def with_overrides(self, **overrides):
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})


def load_config(**overrides):
    """Build a RunConfig from the environment, then apply explicit overrides."""
    precision = os.getenv("DIHEDRALIS_PRECISION")
    config = RunConfig(
        bound_policy=os.getenv("DIHEDRALIS_BOUND_POLICY", "certified"),
        precision=int(precision) if precision else None,
        jobs=int(os.getenv("DIHEDRALIS_JOBS", "1")),
        cache_dir=os.getenv("DIHEDRALIS_CACHE", "data/cache"),
        seed=int(os.getenv("DIHEDRALIS_SEED", "0")),
    )
    return config.with_overrides(**overrides)


DEFAULT_CONFIG = RunConfig()
