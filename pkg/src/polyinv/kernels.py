"""Backend selection for the hot inner loops.

The compiled extension ``polyinv._ckernels`` is used when it has been built;
otherwise the pure-Python module is imported.  Setting the environment
variable ``POLYINV_PURE_PYTHON=1`` forces the fallback.
"""

import os

_NAMES = ("BACKEND", "ModEchelon", "addmul_terms", "monomial_row_mod", "mul_terms", "nf_reduce")


def _load(pure: bool):
    if not pure:
        try:
            from . import _ckernels
            return _ckernels
        except ImportError:  # extension not built
            pass
    from . import _kernels_py
    return _kernels_py


_mod = _load(os.environ.get("POLYINV_PURE_PYTHON", "") not in ("", "0"))
BACKEND = _mod.BACKEND
ModEchelon = _mod.ModEchelon
addmul_terms = _mod.addmul_terms
monomial_row_mod = _mod.monomial_row_mod
mul_terms = _mod.mul_terms
nf_reduce = _mod.nf_reduce

__all__ = list(_NAMES)
