"""Configuration parser for settings.yaml"""

from dataclasses import dataclass, field, fields
from typing import Optional
import os

import yaml


@dataclass
class LoweringConfig:
    """Limits for the polynomial-to-E_n lowerings"""
    canonical_cap: int = 10_000  # largest card(T) lower_canonical will materialize


@dataclass
class BoundsConfig:
    """Tower arithmetic settings"""
    materialize_bits: int = 1 << 20  # values wider than this stay symbolic
    fold_bits: int = 16  # towers narrower than this print as literals
    log_precision_bits: int = 256


@dataclass
class SearchConfig:
    """Bounded search settings"""
    default_limit: int = 10**6
    threads: int = 0  # 0 = os.cpu_count()
    node_budget: int = 2_000_000

    def worker_count(self, requested: Optional[int] = None) -> int:
        """Resolve the number of workers for sharded searches"""
        wanted = self.threads if requested is None else requested
        if wanted and wanted > 0:
            return wanted
        return os.cpu_count() or 1


@dataclass
class SurveyConfig:
    """System-space survey settings"""
    n3_samples: int = 50
    n3_density: float = 0.1
    seed: int = 20240101
    growth_box: int = 10**4


@dataclass
class WitnessConfig:
    """Witness finder settings"""
    lemma6_scan_limit: int = 10**6  # |x| above this uses the CRT construction
    four_square_limit: int = 10**6


@dataclass
class ToolkitConfig:
    """Complete configuration from settings.yaml"""
    lowering: LoweringConfig = field(default_factory=LoweringConfig)
    bounds: BoundsConfig = field(default_factory=BoundsConfig)
    search: SearchConfig = field(default_factory=SearchConfig)
    survey: SurveyConfig = field(default_factory=SurveyConfig)
    witnesses: WitnessConfig = field(default_factory=WitnessConfig)
    cache_dir: str = ".cache"  # used by a bare --cache-dir

    @classmethod
    def load_from_yaml(cls, path: str, use_cache: bool = True) -> 'ToolkitConfig':
        """Parse settings.yaml into config objects with optional caching

        Args:
            path: Path to settings.yaml file
            use_cache: If True, return cached config if available (default: True)

        Returns:
            ToolkitConfig object

        Raises:
            FileNotFoundError: If the file does not exist
            ValueError: If a section has unknown keys or wrong value types
        """
        if use_cache:
            from performance import get_cached_config
            cached = get_cached_config(path)
            if cached:
                return cached

        with open(path, 'r') as f:
            data = yaml.safe_load(f) or {}

        if not isinstance(data, dict):
            raise ValueError(f"Invalid settings file (expected a mapping): {path}")

        config = cls(
            lowering=_parse_section(LoweringConfig, data.get('lowering')),
            bounds=_parse_section(BoundsConfig, data.get('bounds')),
            search=_parse_section(SearchConfig, data.get('search')),
            survey=_parse_section(SurveyConfig, data.get('survey')),
            witnesses=_parse_section(WitnessConfig, data.get('witnesses')),
            cache_dir=str((data.get('cache') or {}).get('directory', '.cache')),
        )

        if use_cache:
            from performance import cache_config
            cache_config(path, config)

        return config


def _parse_section(section_cls, raw):
    """Build one section dataclass, keeping defaults for missing keys"""
    if raw is None:
        return section_cls()
    if not isinstance(raw, dict):
        raise ValueError(f"Section for {section_cls.__name__} must be a mapping")

    known = {f.name: f for f in fields(section_cls)}
    unknown = set(raw) - set(known)
    if unknown:
        raise ValueError(f"Unknown keys in {section_cls.__name__}: {', '.join(sorted(unknown))}")

    values = {}
    for key, value in raw.items():
        default = known[key].default
        if isinstance(default, bool) or not isinstance(default, (int, float)):
            values[key] = value
        elif isinstance(default, int):
            values[key] = parse_int(value)
        else:
            values[key] = float(value)
    return section_cls(**values)


def parse_int(value) -> int:
    """Convert an integer setting, accepting '10**6' and '1<<20' spellings

    Handles formats:
    - 10000 -> 10000
    - "10_000" -> 10000
    - "10**6" -> 1000000
    - "1<<20" -> 1048576
    """
    if isinstance(value, bool):
        raise ValueError(f"Invalid integer setting: {value}")
    if isinstance(value, int):
        return value
    s = str(value).strip().replace('_', '')
    if '**' in s:
        base, exp = s.split('**', 1)
        return int(base) ** int(exp)
    if '<<' in s:
        base, shift = s.split('<<', 1)
        return int(base) << int(shift)
    try:
        return int(s)
    except ValueError:
        raise ValueError(f"Invalid integer setting: {value}")


DEFAULTS = ToolkitConfig()


def use_config(config: ToolkitConfig):
    """Install config as the process-wide defaults read by library functions"""
    for f in fields(ToolkitConfig):
        setattr(DEFAULTS, f.name, getattr(config, f.name))
