import hashlib
import json
import os
import tempfile
from dataclasses import asdict, dataclass
from datetime import datetime

from engines.logging_config import get_logger
from engines.settings import ENGINE_VERSION, SCHEMA_VERSION

logger = get_logger(__name__)

CACHE_KINDS = ("classpoly", "classgroup", "rayclass")


@dataclass(frozen=True)
class CacheEntry:
    kind: str
    key: str
    payload: dict
    certification: str = ""
    schema: int = SCHEMA_VERSION
    engine_version: str = ENGINE_VERSION

    @property
    def current(self):
        return self.schema == SCHEMA_VERSION and self.engine_version == ENGINE_VERSION

    def to_dict(self):
        return asdict(self)


def classpoly_key(d, q=None):
    return str(d) if q is None else f"{d}-q{q}"


def classgroup_key(poly):
    normalized = ",".join(str(int(c)) for c in poly)
    return hashlib.sha256(normalized.encode()).hexdigest()


def rayclass_key(d, S, p):
    S_hash = hashlib.sha256(",".join(str(ell) for ell in sorted(set(S))).encode()).hexdigest()[:16]
    return f"{d}-{S_hash}-{p}"


def write_json(path, data):
    """Write through a temporary file in the same directory, then rename."""
    directory = os.path.dirname(path) or "."
    os.makedirs(directory, exist_ok=True)
    fd, tmp_path = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as f:
            json.dump(data, f, indent=2, sort_keys=True)
            f.write("\n")
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.remove(tmp_path)
        raise


class ResultCache:
    def __init__(self, root="data/cache"):
        self.root = root
        for kind in CACHE_KINDS:
            os.makedirs(os.path.join(self.root, kind), exist_ok=True)

    def path(self, kind, key):
        if kind not in CACHE_KINDS:
            raise ValueError(f"Unknown cache kind: {kind}")
        return os.path.join(self.root, kind, f"{key}.json")

    def load(self, kind, key):
        path = self.path(kind, key)
        if not os.path.exists(path):
            return None
        try:
            with open(path) as f:
                data = json.load(f)
            entry = CacheEntry(**data)
        except (OSError, ValueError, TypeError) as e:
            logger.warning(f"Unreadable cache entry {path}: {e}")
            return None
        if not entry.current:
            logger.warning(f"Ignoring cache entry {path} from engine {entry.engine_version}, schema {entry.schema}")
            return None
        logger.debug(f"Cache hit {kind}/{key}")
        return entry

    def store(self, entry):
        write_json(self.path(entry.kind, entry.key), entry.to_dict())
        logger.debug(f"Cached {entry.kind}/{entry.key}")
        return entry

    def fetch(self, kind, key, compute, accept=None):
        """
        Payload for (kind, key), computed on a miss.

        compute() returns (payload, certification); accept(certification)
        rejects cached entries computed under a weaker policy.
        """
        entry = self.load(kind, key)
        if entry is not None and accept is not None and not accept(entry.certification):
            logger.info(f"Cached {kind}/{key} has certification {entry.certification!r}; recomputing")
            entry = None
        if entry is None:
            payload, certification = compute()
            entry = self.store(CacheEntry(kind, key, payload, certification))
        return entry.payload


def save_report(report, reports_dir="data/reports", prefix="report"):
    """Write a report under a timestamped name and return its path."""
    timestamp = datetime.now().strftime("%Y%m%d_%H%M%S_%f")
    path = os.path.join(reports_dir, f"{prefix}_{timestamp}.json")
    write_json(path, report)
    logger.info(f"Saved report: {path}")
    return path
