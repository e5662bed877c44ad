"""Input validation functions"""

import json
from pathlib import Path
from typing import Tuple


def validate_system_file(path: str) -> Tuple[bool, str]:
    """Validate a system JSON file exists and describes an E_n system

    Returns:
        (is_valid, error_message)
    """
    from ensys import load_system

    p = Path(path)

    if not p.exists():
        return False, f"File not found: {path}"

    if p.suffix.lower() != '.json':
        return False, f"Invalid file type (expected .json): {path}"

    try:
        load_system(path)
        return True, ""
    except json.JSONDecodeError as e:
        return False, f"Invalid JSON in {path}: {e}"
    except (KeyError, TypeError, ValueError) as e:
        return False, f"Invalid system file {path}: {e}"


def validate_equation_text(text: str) -> Tuple[bool, str]:
    """Check an equation string parses

    Returns:
        (is_valid, error_message)
    """
    from poly import parse_equation

    try:
        parse_equation(text)
        return True, ""
    except ValueError as e:
        return False, f"Invalid equation: {e}"


def validate_yaml_config(config_path: str) -> Tuple[bool, str]:
    """Validate settings.yaml exists and can be loaded

    Returns:
        (is_valid, error_message)
    """
    from config import ToolkitConfig

    p = Path(config_path)
    if not p.exists():
        return False, f"Configuration file not found: {config_path}"

    try:
        ToolkitConfig.load_from_yaml(config_path)
        return True, ""
    except Exception as e:
        return False, f"Invalid settings.yaml: {str(e)}"
