"""
Runtime configuration loaded from the environment (.env supported)
"""

import os
import logging
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Optional

from dotenv import load_dotenv

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Settings:
    """Defaults for every computation; CLI flags override them"""

    prime: int = 5
    prec: int = 60
    terms: int = 200
    alpha: Fraction = Fraction(1, 16)         # −log_p α of the working annulus
    log_level: str = "INFO"
    max_frobenius_depth: int = 3
    alpha_retries: int = 8
    cyclic_attempts: int = 64
    seed: int = 0

    def with_overrides(self, **kwargs) -> "Settings":
        """Copy with the non-None keyword values applied"""
        return replace(self, **{k: v for k, v in kwargs.items() if v is not None})


_settings: Optional[Settings] = None


def _env_int(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        return int(raw)
    except ValueError:
        logger.warning(f"Ignoring non-integer {name}={raw!r}, using {default}")
        return default


def load_settings() -> Settings:
    """Read PADIC_* variables, falling back to defaults"""
    load_dotenv()
    alpha_raw = os.getenv("PADIC_ALPHA", "1/16")
    try:
        alpha = Fraction(alpha_raw)
    except (ValueError, ZeroDivisionError):
        logger.warning(f"Ignoring malformed PADIC_ALPHA={alpha_raw!r}")
        alpha = Fraction(1, 16)
    return Settings(
        prime=_env_int("PADIC_PRIME", 5),
        prec=_env_int("PADIC_PREC", 60),
        terms=_env_int("PADIC_TERMS", 200),
        alpha=alpha,
        log_level=os.getenv("PADIC_LOG_LEVEL", "INFO").upper(),
        max_frobenius_depth=_env_int("PADIC_MAX_FROBENIUS_DEPTH", 3),
        alpha_retries=_env_int("PADIC_ALPHA_RETRIES", 8),
        cyclic_attempts=_env_int("PADIC_CYCLIC_ATTEMPTS", 64),
        seed=_env_int("PADIC_SEED", 0),
    )


def get_settings() -> Settings:
    """Cached settings"""
    global _settings
    if _settings is None:
        _settings = load_settings()
    return _settings


def reset_settings() -> None:
    global _settings
    _settings = None
