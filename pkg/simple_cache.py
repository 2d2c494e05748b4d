"""
Simple in-memory cache for reduced forms of factorizations
"""
from collections import OrderedDict
from datetime import datetime
from typing import Dict, Optional, Tuple

from config import get_settings


class SimpleCache:
    """In-memory cache keyed by the canonical text of a factorization.

    Entries expire after `cache_ttl` seconds and are dropped when looked up
    after that; beyond `max_entries` the oldest entry is evicted.
    """

    def __init__(self, cache_ttl: Optional[int] = None, max_entries: Optional[int] = None):
        settings = get_settings()
        self.cache = OrderedDict()
        self.cache_timestamps = {}
        self.cache_ttl = cache_ttl if cache_ttl is not None else settings.cache_ttl
        self.max_entries = max_entries if max_entries is not None else settings.cache_entries
        self.hits = 0
        self.misses = 0
        self.evictions = 0

    def is_cache_valid(self, key: str) -> bool:
        """Check if cache entry is still valid"""
        if key not in self.cache_timestamps:
            return False

        age = (datetime.now() - self.cache_timestamps[key]).total_seconds()
        return age < self.cache_ttl

    def _drop(self, key: str):
        self.cache.pop(key, None)
        self.cache_timestamps.pop(key, None)
        self.evictions += 1

    def get_reduction(self, key: str) -> Optional[Tuple]:
        """Get a cached (reduced form, trace) pair"""
        if key in self.cache:
            if self.is_cache_valid(key):
                self.hits += 1
                self.cache.move_to_end(key)
                return self.cache[key]
            self._drop(key)

        self.misses += 1
        return None

    def store_reduction(self, key: str, value: Tuple):
        """Store a (reduced form, trace) pair"""
        self.cache[key] = value
        self.cache.move_to_end(key)
        self.cache_timestamps[key] = datetime.now()
        while len(self.cache) > max(self.max_entries, 0):
            oldest = next(iter(self.cache))
            self._drop(oldest)

    def purge_expired(self) -> int:
        """Drop every expired entry; returns how many were removed"""
        expired = [key for key in self.cache if not self.is_cache_valid(key)]
        for key in expired:
            self._drop(key)
        return len(expired)

    def clear_cache(self):
        """Clear all cached data"""
        self.cache.clear()
        self.cache_timestamps.clear()
        self.hits = self.misses = self.evictions = 0

    def get_cache_stats(self) -> Dict:
        """Get cache statistics"""
        total_entries = len(self.cache)
        valid_entries = sum(1 for key in self.cache.keys() if self.is_cache_valid(key))

        return {
            'total_entries': total_entries,
            'valid_entries': valid_entries,
            'expired_entries': total_entries - valid_entries,
            'hits': self.hits,
            'misses': self.misses,
            'evictions': self.evictions,
        }


_CACHE_MANAGER: Optional[SimpleCache] = None


def get_cache_manager() -> SimpleCache:
    """Get or create cache manager instance"""
    global _CACHE_MANAGER
    if _CACHE_MANAGER is None:
        _CACHE_MANAGER = SimpleCache()
    return _CACHE_MANAGER
