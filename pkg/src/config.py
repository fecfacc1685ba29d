# ------------------------------------------------------------- #
# Runtime configuration and numerical tolerances
# ------------------------------------------------------------- #
import logging
import math
import os
from dataclasses import dataclass

from src.errors import ConfigError

logger = logging.getLogger(__name__)

# Tolerances shared by every module
HERMITIAN_TOL = 1e-12
GAP_TOL = 1e-8
PROJECTOR_TOL = 1e-10
TRACE_TOL = 1e-8
UNITARY_TOL = 1e-10
FLAT_TOL = 1e-10
LINK_TOL = 1e-8
ACCEPT_RESIDUAL = 0.05
COARSE_PHASE = 0.9 * math.pi

# Points handled per validation block
VALIDATION_BLOCK = 8192


@dataclass(frozen=True)
class RuntimeConfig:
    """Worker settings, read from BOTT_THREADS / BOTT_CHUNK."""
    threads: int = 1
    chunk: int = 1

    @classmethod
    def from_env(cls, environ=None) -> "RuntimeConfig":
        environ = os.environ if environ is None else environ
        threads = _positive_int(environ, "BOTT_THREADS", default=os.cpu_count() or 1)
        chunk = _positive_int(environ, "BOTT_CHUNK", default=1)
        logger.debug("runtime config: threads=%d chunk=%d", threads, chunk)
        return cls(threads=threads, chunk=chunk)


def _positive_int(environ, name: str, default: int) -> int:
    raw = environ.get(name)
    if raw is None or raw == "":
        return default
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError(f"{name} must be a positive integer, got {raw!r}") from None
    if value < 1:
        raise ConfigError(f"{name} must be a positive integer, got {value}")
    return value
