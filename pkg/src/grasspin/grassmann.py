"""Exact arithmetic in a real Grassmann (exterior) algebra with N anticommuting
generators.

An element is stored as a dense vector of 2**N real coefficients, one per
subset of generators.  Subsets are encoded as N-bit masks with bit ``i`` set
when generator ``theta_{i+1}`` occurs; the monomial is the product of the
generators in ascending index order.  The product of two basis monomials is

    theta_S * theta_T = sign(S, T) * theta_{S | T}     if S & T == 0
                      = 0                              otherwise,

where sign(S, T) is the parity of the permutation that merges the two
ascending index lists.

Coefficients are double precision; all operations are plain numpy arithmetic
and safe to share between threads (algebras are immutable after construction).
"""

from __future__ import annotations

import enum
import functools
from typing import Iterable, Mapping

import numpy as np

__all__ = [
    "COEFF_ATOL",
    "PRUNE_TOL",
    "AlgebraMismatchError",
    "NotInvertibleError",
    "ZeroLowestTermError",
    "Parity",
    "GrassmannAlgebra",
    "GrassmannNumber",
    "algebra",
]

# Per-coefficient absolute tolerance for equality tests.
COEFF_ATOL = 1e-12
# Coefficients at or below this magnitude are ignored when locating the
# lowest-degree term or classifying parity (roundoff residue, not content).
PRUNE_TOL = 1e-14

# Largest N for which the dense multiplication table (3**N rows) is built.
_MAX_TABLE_N = 8

MAX_GENERATORS = 16


class AlgebraMismatchError(ValueError):
    """Operands belong to algebras with different generator counts."""


class NotInvertibleError(ValueError):
    """Element has no inverse (zero body or odd/mixed parity)."""


class ZeroLowestTermError(ValueError):
    """The zero element has no lowest-degree term."""


class Parity(enum.Enum):
    EVEN = "even"
    ODD = "odd"
    MIXED = "mixed"
    ZERO = "zero"


def _popcount(x: np.ndarray) -> np.ndarray:
    # np.bitwise_count requires numpy >= 2.0; keep a small fallback.
    if hasattr(np, "bitwise_count"):
        return np.bitwise_count(x)
    v = x.copy()
    out = np.zeros_like(v)
    while np.any(v):
        out += v & 1
        v >>= 1
    return out


def _merge_sign(i: int, j: int) -> int:
    """Permutation sign for merging ascending subsets i and j (disjoint)."""
    inv = 0
    t = j
    while t:
        b = (t & -t).bit_length() - 1
        inv += bin(i >> (b + 1)).count("1")
        t &= t - 1
    return -1 if inv & 1 else 1


class GrassmannAlgebra:
    """A Grassmann algebra with a fixed number of generators.

    Holds the precomputed multiplication table and exposes batched kernels
    operating on raw coefficient arrays of shape ``(..., 2**n)``.  User-facing
    scalar arithmetic goes through :class:`GrassmannNumber`.

    Use the module-level :func:`algebra` factory, which caches instances so
    that numbers created independently for the same N share tables.
    """

    def __init__(self, n_generators: int):
        if not 1 <= n_generators <= MAX_GENERATORS:
            raise ValueError(
                f"n_generators must be in [1, {MAX_GENERATORS}], got {n_generators}"
            )
        self.n = int(n_generators)
        self.dim = 1 << self.n
        masks = np.arange(self.dim, dtype=np.int64)
        self.degree = _popcount(masks).astype(np.int64)  # monomial degree per mask
        self.even_mask = self.degree % 2 == 0
        self.odd_mask = ~self.even_mask

        if self.n <= _MAX_TABLE_N:
            self._build_table()
        else:
            self._idx_a = None
            # bit matrix used by the generic kernel: bits[j, b] = b-th bit of j
            self._bits = ((masks[:, None] >> np.arange(self.n)[None, :]) & 1).astype(
                np.int8
            )

    def _build_table(self) -> None:
        dim = self.dim
        idx_a, idx_b, idx_out, signs = [], [], [], []
        for i in range(dim):
            free = ~i & (dim - 1)
            j = free
            while True:
                idx_a.append(i)
                idx_b.append(j)
                idx_out.append(i | j)
                signs.append(_merge_sign(i, j))
                if j == 0:
                    break
                j = (j - 1) & free
        self._idx_a = np.asarray(idx_a, dtype=np.int64)
        self._idx_b = np.asarray(idx_b, dtype=np.int64)
        # Scatter-with-sign as a single matmul: out = prod @ scatter.
        scatter = np.zeros((len(idx_a), dim))
        scatter[np.arange(len(idx_a)), idx_out] = signs
        self._scatter = scatter

    # ------------------------------------------------------------------
    # Raw-coefficient kernels (batched over leading axes)
    # ------------------------------------------------------------------

    def mul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Grassmann product of coefficient arrays, broadcasting leading axes."""
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        if self._idx_a is not None:
            prod = a[..., self._idx_a] * b[..., self._idx_b]
            return prod @ self._scatter
        return self._mul_generic(a, b)

    def _mul_generic(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        if a.ndim > 1 or b.ndim > 1:
            a, b = np.broadcast_arrays(a, b)
            out = np.empty_like(a)
            for idx in np.ndindex(a.shape[:-1]):
                out[idx] = self._mul_generic(a[idx], b[idx])
            return out
        out = np.zeros(self.dim)
        masks = np.arange(self.dim)
        for i in np.nonzero(a)[0]:
            i = int(i)
            ok = (masks & i) == 0
            # inversion count of merging i with each mask, vectorized over masks
            shifts = np.array(
                [bin(i >> (b + 1)).count("1") for b in range(self.n)], dtype=np.int64
            )
            inv = self._bits @ shifts
            sign = 1.0 - 2.0 * (inv & 1)
            out[masks[ok] + i] += sign[ok] * a[i] * b[ok]
        return out

    def power(self, a: np.ndarray, k: int) -> np.ndarray:
        if k < 0:
            raise ValueError("negative powers not supported at kernel level")
        out = self.scalar_coeffs(1.0)
        for _ in range(k):
            out = self.mul(out, a)
        return out

    def body(self, a: np.ndarray) -> np.ndarray:
        return np.asarray(a)[..., 0]

    def soul(self, a: np.ndarray) -> np.ndarray:
        s = np.array(a, dtype=float, copy=True)
        s[..., 0] = 0.0
        return s

    def invert_even(self, a: np.ndarray) -> np.ndarray:
        """Inverse of even elements with nonzero body, batched.

        The nilpotent part has degree >= 2, so the geometric series
        1/(body + n) = (1/body) * sum_k (-n/body)**k terminates after
        floor(N/2) terms and the result is exact.
        """
        a = np.asarray(a, dtype=float)
        bad = ~self.even_mask & (np.abs(a) > PRUNE_TOL)
        if np.any(bad):
            raise NotInvertibleError("element is not Grassmann-even")
        b = a[..., 0]
        if np.any(np.abs(b) == 0.0):
            raise NotInvertibleError("zero body, element not invertible")
        t = -a / b[..., None]
        t[..., 0] = 0.0  # t = -soul/body
        out = self.scalar_coeffs(1.0) + np.zeros_like(a)
        acc = out.copy()
        for _ in range(self.n // 2):
            acc = self.mul(acc, t)
            if not np.any(acc):
                break
            out = out + acc
        return out / b[..., None]

    def parity_of(self, a: np.ndarray, tol: float = PRUNE_TOL) -> Parity:
        a = np.asarray(a)
        nz = np.abs(a) > tol
        has_even = bool(np.any(nz & self.even_mask))
        has_odd = bool(np.any(nz & self.odd_mask))
        if has_even and has_odd:
            return Parity.MIXED
        if has_even:
            return Parity.EVEN
        if has_odd:
            return Parity.ODD
        return Parity.ZERO

    def lowest_term(self, a: np.ndarray, tol: float = PRUNE_TOL) -> tuple[int, np.ndarray]:
        """Smallest degree carrying a coefficient above ``tol``, and that part."""
        a = np.asarray(a, dtype=float)
        nz = np.nonzero(np.abs(a) > tol)[0]
        if nz.size == 0:
            raise ZeroLowestTermError("zero element has no lowest-degree term")
        k = int(self.degree[nz].min())
        return k, self.grade(a, k)

    def grade(self, a: np.ndarray, k: int) -> np.ndarray:
        out = np.zeros_like(np.asarray(a, dtype=float))
        sel = self.degree == k
        out[..., sel] = np.asarray(a, dtype=float)[..., sel]
        return out

    def scalar_coeffs(self, value: float) -> np.ndarray:
        c = np.zeros(self.dim)
        c[0] = float(value)
        return c

    def embed(self, a: np.ndarray, target: "GrassmannAlgebra") -> np.ndarray:
        """Zero-pad coefficients into a larger algebra (same leading masks)."""
        if target.n < self.n:
            raise AlgebraMismatchError("target algebra has fewer generators")
        a = np.asarray(a, dtype=float)
        out = np.zeros(a.shape[:-1] + (target.dim,))
        out[..., : self.dim] = a
        return out

    # ------------------------------------------------------------------
    # Factories for wrapped numbers
    # ------------------------------------------------------------------

    def scalar(self, value: float) -> "GrassmannNumber":
        return GrassmannNumber(self, self.scalar_coeffs(value))

    def generator(self, index: int) -> "GrassmannNumber":
        """The generator theta_{index} (1-based, matching display names)."""
        if not 1 <= index <= self.n:
            raise ValueError(f"generator index must be in [1, {self.n}]")
        c = np.zeros(self.dim)
        c[1 << (index - 1)] = 1.0
        return GrassmannNumber(self, c)

    def zero(self) -> "GrassmannNumber":
        return GrassmannNumber(self, np.zeros(self.dim))

    def from_terms(
        self, terms: Mapping[int | tuple[int, ...], float]
    ) -> "GrassmannNumber":
        """Build a number from {mask-or-index-tuple: coefficient}.

        Tuples list 1-based generator indices in ascending order, e.g.
        ``{(): 2.0, (1, 2): -1.0}`` is ``2 - theta1 theta2``.
        """
        c = np.zeros(self.dim)
        for key, val in terms.items():
            if isinstance(key, tuple):
                mask = 0
                prev = 0
                for g in key:
                    if not 1 <= g <= self.n:
                        raise ValueError(f"generator index {g} out of range")
                    if g <= prev:
                        raise ValueError("generator indices must be strictly ascending")
                    mask |= 1 << (g - 1)
                    prev = g
            else:
                mask = int(key)
                if not 0 <= mask < self.dim:
                    raise ValueError(f"mask {mask} out of range")
            c[mask] += float(val)
        return GrassmannNumber(self, c)

    def __repr__(self) -> str:  # pragma: no cover
        return f"GrassmannAlgebra(n={self.n})"


@functools.lru_cache(maxsize=None)
def algebra(n_generators: int) -> GrassmannAlgebra:
    """Cached algebra factory; numbers with equal N share one table."""
    return GrassmannAlgebra(n_generators)


def _coerce(other, alg: GrassmannAlgebra):
    if isinstance(other, GrassmannNumber):
        if other.alg.n != alg.n:
            raise AlgebraMismatchError(
                f"mixing algebras with {alg.n} and {other.alg.n} generators"
            )
        return other.coeffs
    if isinstance(other, (int, float, np.integer, np.floating)):
        return alg.scalar_coeffs(float(other))
    return None


class GrassmannNumber:
    """One element of a Grassmann algebra; immutable value semantics."""

    __slots__ = ("alg", "coeffs")

    def __init__(self, alg: GrassmannAlgebra, coeffs: np.ndarray):
        self.alg = alg
        c = np.asarray(coeffs, dtype=float)
        if c.shape != (alg.dim,):
            raise ValueError(f"expected {alg.dim} coefficients, got shape {c.shape}")
        self.coeffs = c

    # -- arithmetic ----------------------------------------------------

    def __add__(self, other):
        oc = _coerce(other, self.alg)
        if oc is None:
            return NotImplemented
        return GrassmannNumber(self.alg, self.coeffs + oc)

    __radd__ = __add__

    def __sub__(self, other):
        oc = _coerce(other, self.alg)
        if oc is None:
            return NotImplemented
        return GrassmannNumber(self.alg, self.coeffs - oc)

    def __rsub__(self, other):
        oc = _coerce(other, self.alg)
        if oc is None:
            return NotImplemented
        return GrassmannNumber(self.alg, oc - self.coeffs)

    def __mul__(self, other):
        if isinstance(other, (int, float, np.integer, np.floating)):
            return GrassmannNumber(self.alg, self.coeffs * float(other))
        oc = _coerce(other, self.alg)
        if oc is None:
            return NotImplemented
        return GrassmannNumber(self.alg, self.alg.mul(self.coeffs, oc))

    def __rmul__(self, other):
        if isinstance(other, (int, float, np.integer, np.floating)):
            return GrassmannNumber(self.alg, self.coeffs * float(other))
        oc = _coerce(other, self.alg)
        if oc is None:
            return NotImplemented
        return GrassmannNumber(self.alg, self.alg.mul(oc, self.coeffs))

    def __neg__(self):
        return GrassmannNumber(self.alg, -self.coeffs)

    def __truediv__(self, other):
        if isinstance(other, (int, float, np.integer, np.floating)):
            return GrassmannNumber(self.alg, self.coeffs / float(other))
        if isinstance(other, GrassmannNumber):
            return self * other.inv()
        return NotImplemented

    def __pow__(self, k: int):
        if not isinstance(k, (int, np.integer)) or k < 0:
            return NotImplemented
        return GrassmannNumber(self.alg, self.alg.power(self.coeffs, int(k)))

    def __eq__(self, other) -> bool:
        oc = _coerce(other, self.alg)
        if oc is None:
            return NotImplemented
        return bool(np.all(np.abs(self.coeffs - oc) <= COEFF_ATOL))

    __hash__ = None  # mutable-tolerance equality

    # -- structure -----------------------------------------------------

    @property
    def body(self) -> float:
        return float(self.coeffs[0])

    @property
    def soul(self) -> "GrassmannNumber":
        return GrassmannNumber(self.alg, self.alg.soul(self.coeffs))

    def grade(self, k: int) -> "GrassmannNumber":
        """Projection onto monomials of degree exactly k."""
        if not 0 <= k <= self.alg.n:
            raise ValueError(f"grade must be in [0, {self.alg.n}]")
        return GrassmannNumber(self.alg, self.alg.grade(self.coeffs, k))

    def lowest_term(self) -> tuple[int, "GrassmannNumber"]:
        """(degree, part) of the nonzero component of smallest degree."""
        k, part = self.alg.lowest_term(self.coeffs)
        return k, GrassmannNumber(self.alg, part)

    def parity(self) -> Parity:
        return self.alg.parity_of(self.coeffs)

    def inv(self) -> "GrassmannNumber":
        """Inverse of an even element with nonzero body; exact."""
        return GrassmannNumber(self.alg, self.alg.invert_even(self.coeffs))

    def is_zero(self, tol: float = PRUNE_TOL) -> bool:
        return bool(np.all(np.abs(self.coeffs) <= tol))

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.coeffs)))

    def terms(self, tol: float = PRUNE_TOL) -> dict[int, float]:
        """Nonzero coefficients keyed by generator-subset mask."""
        return {
            int(m): float(self.coeffs[m])
            for m in np.nonzero(np.abs(self.coeffs) > tol)[0]
        }

    def __repr__(self) -> str:
        pieces = []
        for mask, val in self.terms().items():
            if mask == 0:
                pieces.append(f"{val:g}")
            else:
                name = "".join(
                    f"θ{b + 1}" for b in range(self.alg.n) if mask >> b & 1
                )
                pieces.append(f"{val:g}·{name}")
        return " + ".join(pieces).replace("+ -", "- ") if pieces else "0"
