"""Backend selection for the compiled kernels.

Numba is used when it can be imported, unless the environment variable
``DIRINFO_DISABLE_NUMBA`` is set to a truthy value, in which case every
kernel dispatches to its pure-numpy counterpart.
"""
import os
import warnings

ENV_FLAG = "DIRINFO_DISABLE_NUMBA"

# an outdated system TBB only disables that threading layer; numba falls back
warnings.filterwarnings("ignore", message="The TBB threading layer requires")

try:
    import numba  # noqa: F401
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False


def _flag_set(value):
    return value.strip().lower() not in ("", "0", "false", "no", "off")


USE_NUMBA = HAVE_NUMBA and not _flag_set(os.environ.get(ENV_FLAG, ""))


def backend_name():
    return "numba" if USE_NUMBA else "numpy"
