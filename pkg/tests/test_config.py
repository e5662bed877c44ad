"""Tests for configuration parsing"""

import pytest

from config import (
    DEFAULTS,
    SearchConfig,
    ToolkitConfig,
    parse_int,
)
from performance import clear_config_cache, get_cached_config


@pytest.fixture(autouse=True)
def fresh_cache():
    """Each test starts from an empty config cache"""
    clear_config_cache()
    yield
    clear_config_cache()


def test_parse_int_plain():
    """Integers and underscores"""
    assert parse_int(10000) == 10000
    assert parse_int("10_000") == 10000
    assert parse_int(" 42 ") == 42


def test_parse_int_power_spellings():
    """'10**6' and '1<<20' are accepted"""
    assert parse_int("10**6") == 1000000
    assert parse_int("1<<20") == 1048576


def test_parse_int_rejects_garbage():
    """Non-integers and booleans raise"""
    with pytest.raises(ValueError):
        parse_int("ten")
    with pytest.raises(ValueError):
        parse_int(True)


def test_load_settings_yaml():
    """The shipped settings.yaml matches the in-code defaults"""
    config = ToolkitConfig.load_from_yaml('settings.yaml')
    assert config.lowering.canonical_cap == 10_000
    assert config.bounds.materialize_bits == 1 << 20
    assert config.bounds.log_precision_bits == 256
    assert config.search.default_limit == 10 ** 6
    assert config.search.node_budget == 2_000_000
    assert config.survey.n3_samples == 50
    assert config.survey.n3_density == 0.1
    assert config.survey.growth_box == 10 ** 4
    assert config.witnesses.lemma6_scan_limit == 10 ** 6
    assert config.cache_dir == ".cache"
    assert config == ToolkitConfig()


def test_missing_sections_keep_defaults(tmp_path):
    """Every key is optional"""
    path = tmp_path / "settings.yaml"
    path.write_text("search:\n  threads: 4\n", encoding="utf-8")
    config = ToolkitConfig.load_from_yaml(str(path))
    assert config.search.threads == 4
    assert config.search.default_limit == SearchConfig().default_limit
    assert config.lowering.canonical_cap == 10_000


def test_cache_directory_setting(tmp_path):
    """cache.directory is read into cache_dir"""
    path = tmp_path / "settings.yaml"
    path.write_text("cache:\n  directory: results/cache\n", encoding="utf-8")
    config = ToolkitConfig.load_from_yaml(str(path))
    assert config.cache_dir == "results/cache"
    assert config.search == SearchConfig()


def test_empty_file_is_defaults(tmp_path):
    """An empty file loads as all defaults"""
    path = tmp_path / "settings.yaml"
    path.write_text("", encoding="utf-8")
    assert ToolkitConfig.load_from_yaml(str(path)) == ToolkitConfig()


def test_unknown_key_rejected(tmp_path):
    """Typos in a section are reported"""
    path = tmp_path / "settings.yaml"
    path.write_text("bounds:\n  fold_bit: 3\n", encoding="utf-8")
    with pytest.raises(ValueError, match="fold_bit"):
        ToolkitConfig.load_from_yaml(str(path))


def test_non_mapping_rejected(tmp_path):
    """Top level and sections must be mappings"""
    path = tmp_path / "settings.yaml"
    path.write_text("- 1\n- 2\n", encoding="utf-8")
    with pytest.raises(ValueError):
        ToolkitConfig.load_from_yaml(str(path))
    path.write_text("search: 5\n", encoding="utf-8")
    with pytest.raises(ValueError):
        ToolkitConfig.load_from_yaml(str(path), use_cache=False)


def test_missing_file():
    """FileNotFoundError for absent paths"""
    with pytest.raises(FileNotFoundError):
        ToolkitConfig.load_from_yaml('no_such_settings.yaml')


def test_load_is_cached(tmp_path):
    """A second load returns the cached object"""
    path = tmp_path / "settings.yaml"
    path.write_text("search:\n  threads: 2\n", encoding="utf-8")
    first = ToolkitConfig.load_from_yaml(str(path))
    assert get_cached_config(str(path)) is first
    path.write_text("search:\n  threads: 8\n", encoding="utf-8")
    assert ToolkitConfig.load_from_yaml(str(path)).search.threads == 2
    assert ToolkitConfig.load_from_yaml(str(path), use_cache=False).search.threads == 8


def test_worker_count():
    """0 means all cores, explicit requests win"""
    assert SearchConfig(threads=3).worker_count() == 3
    assert SearchConfig(threads=3).worker_count(1) == 1
    assert SearchConfig(threads=0).worker_count() >= 1


def test_defaults_instance():
    """Library defaults start from the in-code values"""
    assert isinstance(DEFAULTS, ToolkitConfig)
    assert DEFAULTS.lowering.canonical_cap > 0
