import json
import os

from engines.result_cache import (
    CacheEntry,
    ResultCache,
    classgroup_key,
    classpoly_key,
    rayclass_key,
    save_report,
)


def test_keys():
    assert classpoly_key(-23) == "-23"
    assert classpoly_key(-23, 3) == "-23-q3"
    assert classgroup_key([1, 0, 23]) == classgroup_key((1, 0, 23))
    assert classgroup_key([1, 0, 23]) != classgroup_key([1, 0, 24])
    assert rayclass_key(-23, (11, 2), 5) == rayclass_key(-23, [2, 11, 11], 5)
    assert rayclass_key(-23, (), 5).endswith("-5")


def test_fetch_computes_once(tmp_path):
    cache = ResultCache(str(tmp_path))
    calls = []

    def compute():
        calls.append(1)
        return {"h": "3"}, "minkowski-certified"

    assert cache.fetch("classgroup", "k", compute) == {"h": "3"}
    assert cache.fetch("classgroup", "k", compute) == {"h": "3"}
    assert len(calls) == 1
    assert cache.load("classgroup", "k").certification == "minkowski-certified"


def test_weaker_certification_is_recomputed(tmp_path):
    cache = ResultCache(str(tmp_path))
    cache.store(CacheEntry("classgroup", "k", {"h": "3"}, "grh-conditional"))
    payload = cache.fetch("classgroup", "k", lambda: ({"h": "3", "fresh": True}, "minkowski-certified"),
                          accept=lambda c: c == "minkowski-certified")
    assert payload["fresh"] is True


def test_stale_and_corrupt_entries_are_ignored(tmp_path):
    cache = ResultCache(str(tmp_path))
    stale = CacheEntry("rayclass", "old", {}, engine_version="0.0.1")
    cache.store(stale)
    assert cache.load("rayclass", "old") is None
    with open(cache.path("rayclass", "bad"), "w") as f:
        f.write("{not json")
    assert cache.load("rayclass", "bad") is None
    assert cache.load("rayclass", "missing") is None


def test_unknown_kind(tmp_path):
    cache = ResultCache(str(tmp_path))
    try:
        cache.path("reports", "x")
    except ValueError as e:
        assert "reports" in str(e)
    else:
        raise AssertionError("expected ValueError")


def test_save_report(tmp_path):
    path = save_report({"schema": 1}, reports_dir=str(tmp_path), prefix="decide")
    assert os.path.basename(path).startswith("decide_")
    with open(path) as f:
        assert json.load(f) == {"schema": 1}
    assert [p for p in os.listdir(tmp_path) if p.endswith(".tmp")] == []
