"""Electromagnetic backgrounds from polynomial 4-potentials.

A background is specified by the four covariant components A_mu as real
polynomials in the coordinates x^mu.  The field tensor F_{mu nu} and all of
its derivatives are exact polynomials, so evaluation at real or
Grassmann-even points carries no differentiation error and the homogeneous
Maxwell identity eps^{mu nu rho sigma} d_nu F_{rho sigma} = 0 holds to
roundoff by construction.

A second entry point (:class:`DirectField`) takes the F_{mu nu} components
directly, bypassing any potential; it exists to feed non-closed tensors to
the Maxwell residual check and has no action/potential support.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .grassmann import GrassmannAlgebra, GrassmannNumber, Parity, algebra
from .minkowski import EPS_UPPER, SIGNS
from .polynomials import Polynomial, PolyVectorEvaluator

__all__ = [
    "NonEvenPointError",
    "FieldConfig",
    "DirectField",
    "constant_field",
    "constant_f_lower",
    "maxwell_residual",
]

# Independent index pairs of an antisymmetric 4x4 tensor, in storage order.
PAIRS = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]


class NonEvenPointError(ValueError):
    """An evaluation point component is not Grassmann-even."""


def _parse_even_point(x, alg: GrassmannAlgebra | None):
    """Split an even 4-vector into (bodies, souls, algebra).

    Accepts a sequence of 4 GrassmannNumber or a real 4-sequence; souls is
    None for purely real input.
    """
    if len(x) != 4:
        raise ValueError("evaluation point must have 4 components")
    if any(isinstance(c, GrassmannNumber) for c in x):
        algs = {c.alg.n for c in x if isinstance(c, GrassmannNumber)}
        if len(algs) > 1:
            raise ValueError("point components from different algebras")
        alg = algebra(algs.pop())
        coeffs = np.zeros((4, alg.dim))
        for mu, c in enumerate(x):
            if isinstance(c, GrassmannNumber):
                coeffs[mu] = c.coeffs
            else:
                coeffs[mu, 0] = float(c)
        for mu in range(4):
            if alg.parity_of(coeffs[mu]) not in (Parity.EVEN, Parity.ZERO):
                raise NonEvenPointError(f"component {mu} is not Grassmann-even")
        bodies = coeffs[:, 0].copy()
        souls = coeffs.copy()
        souls[:, 0] = 0.0
        if not np.any(souls):
            souls = None
        return bodies, souls, alg
    bodies = np.asarray([float(c) for c in x])
    return bodies, None, alg


def _wrap_tensor(coeffs: np.ndarray, alg: GrassmannAlgebra) -> np.ndarray:
    """Coefficient array (..., dim) -> object array of GrassmannNumber."""
    shape = coeffs.shape[:-1]
    out = np.empty(shape, dtype=object)
    for idx in np.ndindex(shape):
        out[idx] = GrassmannNumber(alg, coeffs[idx])
    return out


class _FieldBase:
    """Shared evaluation machinery over the six independent F components."""

    # subclasses set: _f_polys (4x4 list of Polynomial, antisymmetric)

    def _init_evaluators(self) -> None:
        self._f_eval = PolyVectorEvaluator([self._f_polys[m][n] for m, n in PAIRS])
        self._df_eval = PolyVectorEvaluator(
            [self._f_polys[m][n].diff(k) for k in range(4) for m, n in PAIRS]
        )
        self.field_degree = self._f_eval.max_degree
        self.constant = all(
            self._f_polys[m][n].diff(k).is_zero()
            for k in range(4)
            for m, n in PAIRS
        )
        self._f_const = self.f_lower_real(np.zeros(4)) if self.constant else None

    # -- real-point evaluation (reduced dynamics path) -------------------

    def f_lower_real(self, points: np.ndarray) -> np.ndarray:
        """F_{mu nu} at real points (..., 4) -> (..., 4, 4)."""
        vals = self._f_eval.eval_real(points)
        out = np.zeros(vals.shape[:-1] + (4, 4))
        for a, (m, n) in enumerate(PAIRS):
            out[..., m, n] = vals[..., a]
            out[..., n, m] = -vals[..., a]
        return out

    def df_lower_real(self, points: np.ndarray) -> np.ndarray:
        """d_kappa F_{mu nu} at real points -> (..., 4, 4, 4)."""
        vals = self._df_eval.eval_real(points)
        out = np.zeros(vals.shape[:-1] + (4, 4, 4))
        for k in range(4):
            for a, (m, n) in enumerate(PAIRS):
                out[..., k, m, n] = vals[..., 6 * k + a]
                out[..., k, n, m] = -vals[..., 6 * k + a]
        return out

    # -- Grassmann-even evaluation (full dynamics path) -------------------

    def f_lower_coeffs(
        self, bodies: np.ndarray, souls: np.ndarray | None, alg: GrassmannAlgebra
    ) -> np.ndarray:
        """F_{mu nu} coefficient arrays, shape (..., 4, 4, dim)."""
        if self.constant:
            out = np.zeros(np.shape(bodies)[:-1] + (4, 4, alg.dim))
            out[..., 0] = self._f_const
            return out
        vals = self._f_eval.eval_even(bodies, souls, alg)
        out = np.zeros(vals.shape[:-2] + (4, 4, alg.dim))
        for a, (m, n) in enumerate(PAIRS):
            out[..., m, n, :] = vals[..., a, :]
            out[..., n, m, :] = -vals[..., a, :]
        return out

    def df_lower_coeffs(
        self, bodies: np.ndarray, souls: np.ndarray | None, alg: GrassmannAlgebra
    ) -> np.ndarray:
        """d_kappa F_{mu nu} coefficient arrays, shape (..., 4, 4, 4, dim)."""
        vals = self._df_eval.eval_even(bodies, souls, alg)
        out = np.zeros(vals.shape[:-2] + (4, 4, 4, alg.dim))
        for k in range(4):
            for a, (m, n) in enumerate(PAIRS):
                out[..., k, m, n, :] = vals[..., 6 * k + a, :]
                out[..., k, n, m, :] = -vals[..., 6 * k + a, :]
        return out

    # -- public tensor API -------------------------------------------------

    def field_tensor(self, x, alg: GrassmannAlgebra | None = None) -> np.ndarray:
        """F_{mu nu}(x) as a 4x4 object array of GrassmannNumber.

        x may be four GrassmannNumber (all even) or four reals; the series
        about the body terminates by nilpotency, so the value is exact.
        """
        bodies, souls, alg = _parse_even_point(x, alg)
        if alg is None:
            alg = algebra(2)
        return _wrap_tensor(self.f_lower_coeffs(bodies, souls, alg), alg)

    def field_derivative(self, x, alg: GrassmannAlgebra | None = None) -> np.ndarray:
        """d_kappa F^{rho sigma}(x) (rho, sigma raised) as object array (4,4,4)."""
        bodies, souls, alg = _parse_even_point(x, alg)
        if alg is None:
            alg = algebra(2)
        df = self.df_lower_coeffs(bodies, souls, alg)
        up = df * SIGNS[None, :, None, None] * SIGNS[None, None, :, None]
        return _wrap_tensor(up, alg)


class FieldConfig(_FieldBase):
    """Background given by a polynomial potential A_mu (covariant components)."""

    def __init__(self, potential: Sequence[Polynomial]):
        if len(potential) != 4:
            raise ValueError("potential needs 4 components")
        self.potential = [p if isinstance(p, Polynomial) else Polynomial(p) for p in potential]
        self._f_polys = [
            [
                self.potential[n].diff(m) - self.potential[m].diff(n)
                for n in range(4)
            ]
            for m in range(4)
        ]
        self._init_evaluators()
        self._a_eval = PolyVectorEvaluator(self.potential)

    def potential_coeffs(
        self, bodies: np.ndarray, souls: np.ndarray | None, alg: GrassmannAlgebra
    ) -> np.ndarray:
        """A_mu at even points, coefficient arrays (..., 4, dim)."""
        return self._a_eval.eval_even(bodies, souls, alg)

    @classmethod
    def from_entries(cls, entries) -> "FieldConfig":
        """Build from (component mu, exponent 4-tuple, coefficient) triples."""
        comps = [Polynomial.zero() for _ in range(4)]
        for mu, exps, coef in entries:
            comps[int(mu)] = comps[int(mu)] + Polynomial.from_entries([(exps, coef)])
        return cls(comps)


class DirectField(_FieldBase):
    """Field tensor given directly as six independent polynomial components.

    ``components`` maps pair index (m, n) with m < n to a Polynomial for
    F_{mn}.  No potential exists, so this mode supports tensor evaluation
    and the Maxwell residual only.
    """

    def __init__(self, components: dict[tuple[int, int], Polynomial]):
        polys = [[Polynomial.zero() for _ in range(4)] for _ in range(4)]
        for (m, n), poly in components.items():
            if not (0 <= m < n <= 3):
                raise ValueError(f"component pair {(m, n)} must have m < n")
            polys[m][n] = poly if isinstance(poly, Polynomial) else Polynomial(poly)
            polys[n][m] = -polys[m][n]
        self._f_polys = polys
        self._init_evaluators()


def constant_f_lower(e_field: Sequence[float], b_field: Sequence[float]) -> np.ndarray:
    """Constant F_{mu nu} from lab-frame E and B three-vectors.

    Conventions: F_{0i} = E^i and F_{ij} = -eps_{ijk} B^k, which reproduce
    du/ds = (e/m)(gamma E + u x B) in three-vector form.
    """
    e1, e2, e3 = (float(v) for v in e_field)
    b1, b2, b3 = (float(v) for v in b_field)
    f = np.zeros((4, 4))
    f[0, 1], f[0, 2], f[0, 3] = e1, e2, e3
    f[1, 2], f[1, 3], f[2, 3] = -b3, b2, -b1
    return f - f.T


def constant_field(e_field: Sequence[float], b_field: Sequence[float]) -> FieldConfig:
    """Potential A_nu = -1/2 F_{nu rho} x^rho for a uniform E, B background."""
    f = constant_f_lower(e_field, b_field)
    potential = []
    for nu in range(4):
        terms = {}
        for rho in range(4):
            if f[nu, rho] != 0.0:
                exps = [0, 0, 0, 0]
                exps[rho] = 1
                terms[tuple(exps)] = -0.5 * f[nu, rho]
        potential.append(Polynomial(terms))
    return FieldConfig(potential)


def maxwell_residual(field: _FieldBase, x, alg: GrassmannAlgebra | None = None):
    """The four components of eps^{mu nu rho sigma} d_nu F_{rho sigma} at x.

    Zero (to roundoff) for any potential-derived field; nonzero input marks a
    tensor that cannot come from a potential.
    """
    bodies, souls, alg = _parse_even_point(x, alg)
    if alg is None:
        alg = algebra(2)
    df = field.df_lower_coeffs(bodies, souls, alg)
    res = np.einsum("mnrs,...nrsd->...md", EPS_UPPER, df)
    return [GrassmannNumber(alg, res[mu]) for mu in range(4)]
