# Numba is used when importable, unless IPDP_DISABLE_NUMBA is set to a truthy
# value. Everything else in the package works on the pure-numpy path.

import logging
import os

logger = logging.getLogger(__name__)

_disabled = os.environ.get("IPDP_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}

try:
    if _disabled:
        raise ImportError("disabled by IPDP_DISABLE_NUMBA")
    import numba

    njit = numba.njit
    NUMBA_ENABLED = True
except ImportError as exc:  # pragma: no cover - exercised via subprocess test
    logger.debug("numba unavailable, using numpy kernels: %s", exc)
    numba = None
    NUMBA_ENABLED = False

    def njit(pyfunc=None, **kwargs):
        def wrap(func):
            return func

        return wrap if pyfunc is None else wrap(pyfunc)


BACKEND = "numba" if NUMBA_ENABLED else "numpy"
