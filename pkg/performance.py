"""Caching utilities

Memoises parsed settings and stores finished command results on disk so
long surveys can be resumed.
"""

import hashlib
import json
import logging
from pathlib import Path
from typing import Optional

logger = logging.getLogger(__name__)

# Configuration caching
_config_cache = {}


def cache_config(path: str, config):
    """Cache parsed config to avoid re-parsing YAML

    Args:
        path: Path to config file
        config: Parsed configuration object

    Returns:
        The config object (for convenience)
    """
    _config_cache[path] = config
    return config


def get_cached_config(path: str):
    """Get cached config or None"""
    return _config_cache.get(path)


def clear_config_cache():
    """Clear configuration cache"""
    _config_cache.clear()


class ResultCache:
    """One JSON document per (subcommand, input, flags) key

    Keys are sha256 digests of a canonical JSON rendering, so the same
    command line on the same input always maps to the same file.
    """

    def __init__(self, directory: str):
        self.directory = Path(directory)

    @staticmethod
    def make_key(subcommand: str, canonical_input: str, flags: dict) -> str:
        """Digest of the command identity"""
        payload = json.dumps(
            {'subcommand': subcommand, 'input': canonical_input, 'flags': flags},
            sort_keys=True,
            separators=(',', ':'),
        )
        return hashlib.sha256(payload.encode('utf-8')).hexdigest()

    def _path(self, key: str) -> Path:
        return self.directory / f"{key}.json"

    def get(self, key: str) -> Optional[str]:
        """Return the cached document text, or None"""
        path = self._path(key)
        if not path.exists():
            return None
        logger.debug(f"♻ Cache hit: {path.name}")
        return path.read_text(encoding='utf-8')

    def put(self, key: str, document: str) -> Path:
        """Store a document, creating the directory on first use"""
        self.directory.mkdir(parents=True, exist_ok=True)
        path = self._path(key)
        tmp = path.with_suffix('.tmp')
        tmp.write_text(document, encoding='utf-8')
        tmp.replace(path)
        logger.debug(f"💾 Cached result: {path.name}")
        return path
