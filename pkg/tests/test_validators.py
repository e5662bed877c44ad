"""Tests for input validation"""

from pathlib import Path

from validators import validate_equation_text, validate_system_file, validate_yaml_config

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def test_system_file_ok():
    """Shipped fixtures validate"""
    assert validate_system_file(str(FIXTURES / "chain_n4.json")) == (True, "")


def test_system_file_problems(tmp_path):
    """Missing, wrong suffix, bad JSON and bad indices"""
    ok, msg = validate_system_file(str(tmp_path / "none.json"))
    assert not ok and "File not found" in msg

    txt = tmp_path / "system.txt"
    txt.write_text('{"n": 1, "eqs": []}', encoding="utf-8")
    ok, msg = validate_system_file(str(txt))
    assert not ok and "expected .json" in msg

    broken = tmp_path / "broken.json"
    broken.write_text('{"n": 1, "eqs": [', encoding="utf-8")
    ok, msg = validate_system_file(str(broken))
    assert not ok and "Invalid JSON" in msg

    wide = tmp_path / "wide.json"
    wide.write_text('{"n": 1, "eqs": [["add", 1, 1, 2]]}', encoding="utf-8")
    ok, msg = validate_system_file(str(wide))
    assert not ok and "Invalid system file" in msg


def test_equation_text():
    """Parse errors are reported with their message"""
    assert validate_equation_text("x1 = 1") == (True, "")
    ok, msg = validate_equation_text("x1 + 1")
    assert not ok
    assert msg.startswith("Invalid equation:")


def test_yaml_config(tmp_path):
    """settings.yaml validates, unknown keys do not"""
    assert validate_yaml_config("settings.yaml") == (True, "")
    bad = tmp_path / "settings.yaml"
    bad.write_text("survey:\n  sample: 3\n", encoding="utf-8")
    ok, msg = validate_yaml_config(str(bad))
    assert not ok and "Invalid settings.yaml" in msg
    ok, msg = validate_yaml_config(str(tmp_path / "missing.yaml"))
    assert not ok and "not found" in msg
