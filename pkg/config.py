"""
Process-wide settings for the factorization calculus: seeds, search bounds,
corpus sizes and logging setup.
"""
import logging
import os
from dataclasses import dataclass, replace
from typing import Optional

DEFAULT_SEED = 20240611
DEFAULT_WEIGHT_BOUND = 6
ORACLE_WEIGHT_BOUND = 6

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"

ENV_PREFIX = "MFCALC_"


@dataclass(frozen=True)
class Settings:
    """Tunable knobs; every random corpus is derived from `seed`."""
    seed: int = DEFAULT_SEED
    weight_bound: int = DEFAULT_WEIGHT_BOUND
    oracle_bound: int = ORACLE_WEIGHT_BOUND
    log_level: str = "WARNING"
    cache_ttl: int = 3600  # seconds
    cache_entries: int = 256
    max_unknowns: int = 6000  # per linear system in the equivalence search
    iso_attempts: int = 3

    # acceptance corpus sizes
    hom_samples: int = 100
    max_rank: int = 4
    koszul_dims: tuple = (1, 2, 3)
    scenario_samples: int = 20
    associativity_triples: int = 10
    pullback_pairs: int = 50
    pullback_tensor_pairs: int = 20
    pushforward_objects: int = 5


_SETTINGS: Optional[Settings] = None


def _env_int(name: str, default: int) -> int:
    raw = os.environ.get(ENV_PREFIX + name)
    if raw is None or raw.strip() == "":
        return default
    try:
        return int(raw)
    except ValueError:
        logging.getLogger(__name__).warning("ignoring non-integer %s%s=%r", ENV_PREFIX, name, raw)
        return default


def get_settings() -> Settings:
    """Get or create the settings instance, honouring MFCALC_* overrides."""
    global _SETTINGS
    if _SETTINGS is None:
        base = Settings()
        _SETTINGS = replace(
            base,
            seed=_env_int("SEED", base.seed),
            weight_bound=_env_int("WEIGHT_BOUND", base.weight_bound),
            oracle_bound=_env_int("ORACLE_BOUND", base.oracle_bound),
            cache_ttl=_env_int("CACHE_TTL", base.cache_ttl),
            cache_entries=_env_int("CACHE_ENTRIES", base.cache_entries),
            log_level=os.environ.get(ENV_PREFIX + "LOG_LEVEL", base.log_level).upper(),
        )
    return _SETTINGS


def override_settings(**changes) -> Settings:
    """Replace selected fields for the rest of the process (CLI flags)."""
    global _SETTINGS
    _SETTINGS = replace(get_settings(), **changes)
    return _SETTINGS


def configure_logging(level: Optional[str] = None):
    """Install the root handler once; output goes to stderr."""
    level_name = (level or get_settings().log_level).upper()
    logging.basicConfig(level=getattr(logging, level_name, logging.WARNING), format=LOG_FORMAT)
    logging.getLogger().setLevel(getattr(logging, level_name, logging.WARNING))
