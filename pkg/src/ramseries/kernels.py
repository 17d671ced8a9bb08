"""Backend selection for the modular kernels: compiled if importable, else pure Python."""
try:
    from . import _ckernels as _impl
except ImportError:  # extension not built
    from . import _pykernels as _impl

from . import _pykernels as python_backend

BACKEND = _impl.BACKEND
convolve_mod = _impl.convolve_mod
monomial_matrix_mod = _impl.monomial_matrix_mod
row_reduce_mod = _impl.row_reduce_mod


def available_backends():
    """Importable kernel modules keyed by backend name."""
    out = {"python": python_backend}
    try:
        from . import _ckernels
    except ImportError:
        pass
    else:
        out["cython"] = _ckernels
    return out
