"""Fixed spacetime conventions.

Signature (+,-,-,-), fully contravariant Levi-Civita tensor with
eps^{0123} = +1, natural units c = 1.  Because the metric is diagonal,
raising or lowering an index multiplies the component by the entry of
``SIGNS`` for that index.
"""

from __future__ import annotations

import itertools

import numpy as np

__all__ = ["SIGNS", "METRIC", "EPS_UPPER", "lower", "raise_", "minkowski_dot"]

SIGNS = np.array([1.0, -1.0, -1.0, -1.0])
METRIC = np.diag(SIGNS)


def _levi_civita() -> np.ndarray:
    eps = np.zeros((4, 4, 4, 4))
    for perm in itertools.permutations(range(4)):
        sign = 1
        p = list(perm)
        for i in range(4):
            for j in range(i + 1, 4):
                if p[i] > p[j]:
                    sign = -sign
        eps[perm] = sign
    return eps


# eps^{mu nu rho sigma}; the all-lower version is -EPS_UPPER for this signature.
EPS_UPPER = _levi_civita()


def lower(vec: np.ndarray, axis: int = 0) -> np.ndarray:
    """v_mu from v^mu (sign flip of spatial components along ``axis``)."""
    vec = np.asarray(vec)
    shape = [1] * vec.ndim
    shape[axis] = 4
    return vec * SIGNS.reshape(shape)


raise_ = lower  # the diagonal (+,-,-,-) metric is an involution


def minkowski_dot(a: np.ndarray, b: np.ndarray, axis: int = -1) -> np.ndarray:
    """a^mu b_mu for real 4-vectors."""
    a = np.asarray(a)
    shape = [1] * a.ndim
    shape[axis] = 4
    return np.sum(a * np.asarray(b) * SIGNS.reshape(shape), axis=axis)
