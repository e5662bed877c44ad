"""Tests for the config memo and the on-disk result cache"""

from performance import (
    ResultCache,
    cache_config,
    clear_config_cache,
    get_cached_config,
)


def test_config_cache_round_trip():
    """Stored configs come back until cleared"""
    marker = object()
    assert cache_config("settings.yaml", marker) is marker
    assert get_cached_config("settings.yaml") is marker
    clear_config_cache()
    assert get_cached_config("settings.yaml") is None


def test_make_key_is_deterministic():
    """Flag order does not change the key; inputs do"""
    a = ResultCache.make_key("count", '{"n": 1, "eqs": []}', {"box": 3, "format": "text"})
    b = ResultCache.make_key("count", '{"n": 1, "eqs": []}', {"format": "text", "box": 3})
    c = ResultCache.make_key("count", '{"n": 1, "eqs": []}', {"box": 4, "format": "text"})
    assert a == b
    assert a != c
    assert len(a) == 64


def test_result_cache_get_put(tmp_path):
    """Documents are stored verbatim under their key"""
    cache = ResultCache(str(tmp_path / "cache"))
    key = ResultCache.make_key("probe", "", {"values": [5]})
    assert cache.get(key) is None
    path = cache.put(key, "WitnessFound (6,)\n")
    assert path.exists()
    assert cache.get(key) == "WitnessFound (6,)\n"
    assert not list((tmp_path / "cache").glob("*.tmp"))
