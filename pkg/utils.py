"""Utility helper functions"""

import json
import logging
from datetime import datetime
from fractions import Fraction
from pathlib import Path

import pandas as pd

logger = logging.getLogger(__name__)

# Largest magnitude a JSON consumer can hold in a double without loss
SAFE_INT = 2**53


def auto_rename_output(path: str) -> str:
    """
    If path exists, rename with timestamp or number suffix

    Examples:
        survey.xlsx -> survey_20251104_093015.xlsx
        survey.xlsx -> survey_2.xlsx (if timestamp version exists)

    Args:
        path: Desired output file path

    Returns:
        Available file path (original or renamed)
    """
    p = Path(path)
    if not p.exists():
        return path

    # Try timestamp suffix
    timestamp = datetime.now().strftime('%Y%m%d_%H%M%S')
    new_path = p.parent / f"{p.stem}_{timestamp}{p.suffix}"

    if not new_path.exists():
        logger.info(f"ℹ Output file exists, renamed to: {new_path.name}")
        return str(new_path)

    # Try numeric suffix
    counter = 1
    while True:
        new_path = p.parent / f"{p.stem}_{counter}{p.suffix}"
        if not new_path.exists():
            logger.info(f"ℹ Output file exists, renamed to: {new_path.name}")
            return str(new_path)
        counter += 1


def to_jsonable(value):
    """Convert results into exact JSON-safe values

    Integers beyond +-2^53 become decimal strings, Fractions become "y/z",
    objects with a ``to_jsonable`` or ``to_string`` method use it.
    """
    if isinstance(value, bool) or value is None or isinstance(value, str):
        return value
    if isinstance(value, int):
        return str(value) if abs(value) > SAFE_INT else value
    if isinstance(value, float):
        return value
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    if hasattr(value, 'to_jsonable'):
        return to_jsonable(value.to_jsonable())
    if hasattr(value, 'to_string'):
        return value.to_string()
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, set, frozenset)):
        items = sorted(value) if isinstance(value, (set, frozenset)) else value
        return [to_jsonable(v) for v in items]
    raise TypeError(f"Cannot encode {type(value).__name__} as JSON")


def dumps(value) -> str:
    """Stable JSON text: sorted keys, two-space indent, trailing newline"""
    return json.dumps(to_jsonable(value), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def export_table(df: pd.DataFrame, output_path: str, sheet_name: str = 'Results') -> str:
    """Write a DataFrame to Excel with header formatting

    Integer columns holding values past 2^53 are written as text so the
    spreadsheet keeps every digit.

    Returns:
        The path actually written (auto-renamed if the target existed)
    """
    output_path = auto_rename_output(output_path)
    out = df.copy()
    for col in out.columns:
        if out[col].map(lambda v: isinstance(v, int) and abs(v) > SAFE_INT).any():
            out[col] = out[col].map(lambda v: str(v) if isinstance(v, int) else v)
        elif out[col].map(lambda v: isinstance(v, (tuple, list, Fraction))).any():
            out[col] = out[col].map(lambda v: json.dumps(to_jsonable(v)) if isinstance(v, (tuple, list)) else
                                    (str(v) if isinstance(v, Fraction) else v))

    with pd.ExcelWriter(output_path, engine='xlsxwriter') as writer:
        out.to_excel(writer, sheet_name=sheet_name, index=False)

        workbook = writer.book
        worksheet = writer.sheets[sheet_name]

        header_fmt = workbook.add_format({
            'bold': True,
            'bg_color': '#4472C4',
            'font_color': 'white',
            'align': 'center',
            'valign': 'vcenter'
        })

        for col_num, col_name in enumerate(out.columns):
            worksheet.write(0, col_num, col_name, header_fmt)
            width = max(12, min(60, len(str(col_name)) + 4))
            worksheet.set_column(col_num, col_num, width)

    logger.info(f"💾 Table written: {output_path} ({len(out)} rows)")
    return output_path
