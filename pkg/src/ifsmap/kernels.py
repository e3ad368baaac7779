"""Kernel dispatch: compiled core when importable, numpy fallback otherwise.

Set ``IFSMAP_PURE_PYTHON=1`` to force the fallback.  ``BACKEND`` names the
active implementation; :func:`use_backend` switches at runtime (tests and the
benchmark exercise both).
"""
import os

from . import _kernels_py

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

_IMPLS = {"python": _kernels_py}
if _compiled is not None:
    _IMPLS["compiled"] = _compiled


def available_backends():
    return sorted(_IMPLS)


def use_backend(name):
    global BACKEND, herglotz_sum, annulus_reduce
    if name not in _IMPLS:
        raise ValueError(f"unknown kernel backend {name!r}; available: {available_backends()}")
    impl = _IMPLS[name]
    BACKEND = name
    herglotz_sum = impl.herglotz_sum
    annulus_reduce = impl.annulus_reduce


BACKEND = None
herglotz_sum = annulus_reduce = None
if _compiled is not None and os.environ.get("IFSMAP_PURE_PYTHON", "") not in ("1", "true", "yes"):
    use_backend("compiled")
else:
    use_backend("python")
