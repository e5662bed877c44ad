"""Tests for JSON encoding, output renaming and table export"""

import json
from fractions import Fraction

import pandas as pd
import pytest
from openpyxl import load_workbook

from bounds import conjecture_bound
from utils import SAFE_INT, auto_rename_output, dumps, export_table, to_jsonable


def test_to_jsonable_integers():
    """Machine-safe integers stay numbers, larger ones become strings"""
    assert to_jsonable(SAFE_INT) == SAFE_INT
    assert to_jsonable(SAFE_INT + 1) == str(SAFE_INT + 1)
    assert to_jsonable(-(2 ** 64)) == "-18446744073709551616"
    assert to_jsonable(True) is True


def test_to_jsonable_fractions_and_towers():
    """Fractions print as y/z, towers as their canonical string"""
    assert to_jsonable(Fraction(-3, 6)) == "-1/2"
    assert to_jsonable(conjecture_bound(7)) == "2^(2^6)"


def test_to_jsonable_containers():
    """Tuples become lists and dict keys become strings"""
    assert to_jsonable({1: (2, 3)}) == {"1": [2, 3]}
    assert to_jsonable({3, 1, 2}) == [1, 2, 3]
    with pytest.raises(TypeError):
        to_jsonable(object())


def test_dumps_is_stable():
    """Sorted keys, two-space indent and a trailing newline"""
    text = dumps({"b": 1, "a": [1, 2]})
    assert text == '{\n  "a": [\n    1,\n    2\n  ],\n  "b": 1\n}\n'
    assert json.loads(text) == {"a": [1, 2], "b": 1}


def test_auto_rename_output(tmp_path):
    """Free paths are kept, taken ones get a suffix"""
    target = tmp_path / "survey.xlsx"
    assert auto_rename_output(str(target)) == str(target)
    target.write_text("x", encoding="utf-8")
    renamed = auto_rename_output(str(target))
    assert renamed != str(target)
    assert renamed.endswith(".xlsx")
    assert renamed.startswith(str(tmp_path / "survey_"))


def test_export_table_keeps_big_integers(tmp_path):
    """Values past 2^53 are written as exact text"""
    big = 2 ** 100
    df = pd.DataFrame({'x': [1, 2], 'y': [3, big], 'point': [(1, 2), (3, 4)]})
    path = export_table(df, str(tmp_path / "out.xlsx"))
    rows = list(load_workbook(path).active.iter_rows(values_only=True))
    assert rows[0] == ('x', 'y', 'point')
    assert rows[1] == (1, '3', '[1, 2]')
    assert rows[2] == (2, str(big), '[3, 4]')
