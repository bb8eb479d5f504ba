"""Discrete action and stationarity checks for Grassmann-valued paths.

The action of a path is

    S = integral ds [ (m/2) v^mu v_mu - (1/4) xi^mu dxi_mu/ds
                      + e A_mu v^mu + (mu'/2m) F^{mu nu} S_{mu nu}
                      + lam xi_mu v^mu ]

discretized at interval midpoints: derivatives by central differences across
each interval, the Lagrangian at midpoint values, summed times the step.
The multiplier lam is recomputed pointwise from the consistency condition
(it is determined on-shell, not varied independently).

Stationarity is probed directionally: even directions perturb x by a real
profile and use a two-sided difference quotient in the perturbation
amplitude; odd directions perturb xi by a real profile times a fresh
generator appended to the algebra, so the derivative is read off exactly as
the coefficient block of that generator.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grassmann import GrassmannAlgebra, GrassmannNumber, algebra
from .minkowski import SIGNS
from .super_dynamics import ModelParams, SuperTrajectory, _freal, _multiplier, _rhs

__all__ = [
    "DiscretePath",
    "PathVariation",
    "ELResidual",
    "action",
    "stationarity_residual",
    "even_directional_quotient",
    "euler_lagrange_residual",
]

_CHUNK = 256


@dataclass
class DiscretePath:
    """Uniform-grid path: even x and odd xi at nodes s_i (endpoints fixed)."""

    alg: GrassmannAlgebra
    s: np.ndarray    # (M+1,)
    x: np.ndarray    # (M+1, 4, dim)
    xi: np.ndarray   # (M+1, 4, dim)

    def __post_init__(self):
        self.s = np.asarray(self.s, dtype=float)
        hs = np.diff(self.s)
        if self.s.size < 2 or np.any(hs <= 0):
            raise ValueError("path grid must be strictly increasing")
        if np.max(np.abs(hs - hs[0])) > 1e-9 * hs[0]:
            raise ValueError("path grid must be uniform")

    @property
    def h(self) -> float:
        return float(self.s[1] - self.s[0])

    @property
    def n_intervals(self) -> int:
        return self.s.size - 1

    @classmethod
    def from_trajectory(cls, traj: SuperTrajectory) -> "DiscretePath":
        strides = np.diff(traj.steps_recorded)
        if traj.s.size < 2 or np.any(strides != strides[0]):
            raise ValueError("trajectory must be recorded at a uniform stride")
        return cls(alg=traj.alg, s=traj.s.copy(), x=traj.x.copy(), xi=traj.xi.copy())

    def embedded(self, target: GrassmannAlgebra) -> "DiscretePath":
        return DiscretePath(
            alg=target,
            s=self.s.copy(),
            x=self.alg.embed(self.x, target),
            xi=self.alg.embed(self.xi, target),
        )


@dataclass
class PathVariation:
    """Real node profiles; endpoints must vanish.

    ``dx`` perturbs the even coordinates directly; ``dxi`` multiplies a
    fresh odd generator.  Exactly one of the two is set.
    """

    dx: np.ndarray | None = None
    dxi: np.ndarray | None = None

    def __post_init__(self):
        if (self.dx is None) == (self.dxi is None):
            raise ValueError("set exactly one of dx, dxi")
        arr = self.dx if self.dx is not None else self.dxi
        arr = np.asarray(arr, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != 4:
            raise ValueError("variation profile must have shape (M+1, 4)")
        if np.any(arr[0] != 0.0) or np.any(arr[-1] != 0.0):
            raise ValueError("variation must vanish at the path endpoints")
        if self.dx is not None:
            self.dx = arr
        else:
            self.dxi = arr

    @property
    def profile(self) -> np.ndarray:
        return self.dx if self.dx is not None else self.dxi


@dataclass
class ELResidual:
    """Max-abs coefficient of the equation-of-motion defect per interior node."""

    s: np.ndarray
    x_residual: np.ndarray
    xi_residual: np.ndarray


def _action_coeffs(alg, fld, par, s, x, xi) -> np.ndarray:
    if s.size - 1 < 4:
        raise ValueError("path grid too coarse: need at least 4 intervals")
    if not hasattr(fld, "potential_coeffs"):
        raise TypeError("action needs a potential-derived field configuration")
    h = float(s[1] - s[0])
    m = par.mass
    total = np.zeros(alg.dim)
    n_mid = s.size - 1
    for lo in range(0, n_mid, _CHUNK):
        hi = min(lo + _CHUNK, n_mid)
        xm = 0.5 * (x[lo:hi] + x[lo + 1 : hi + 1])
        xim = 0.5 * (xi[lo:hi] + xi[lo + 1 : hi + 1])
        vm = (x[lo + 1 : hi + 1] - x[lo:hi]) / h
        xidot = (xi[lo + 1 : hi + 1] - xi[lo:hi]) / h

        bodies = xm[..., 0]
        souls = xm.copy()
        souls[..., 0] = 0.0
        if not np.any(souls):
            souls = None
        f_lo = fld.f_lower_coeffs(bodies, souls, alg)
        f_real = _freal(f_lo)
        pot = fld.potential_coeffs(bodies, souls, alg)

        vv, _, _, lam = _multiplier(alg, f_lo, f_real, vm, xim, par)
        kin = 0.5 * m * vv
        spin_kin = -0.25 * np.einsum(
            "m,...md->...d", SIGNS, alg.mul(xim, xidot)
        )
        coupling = par.charge * alg.mul(pot, vm).sum(axis=-2)
        pair = alg.mul(xim[..., :, None, :], xim[..., None, :, :])
        if f_real is not None:
            mag = np.einsum("...mn,...mnd->...d", f_real, pair)
        else:
            mag = alg.mul(f_lo, pair).sum(axis=(-3, -2))
        mag = (par.mu_prime / (4.0 * m)) * mag
        con = np.einsum("m,...md->...d", SIGNS, alg.mul(xim, vm))
        l_mid = kin + spin_kin + coupling + mag + alg.mul(lam, con)
        total += h * l_mid.sum(axis=0)
    return total


def action(path: DiscretePath, fld, par: ModelParams) -> GrassmannNumber:
    """Midpoint-discretized action of the path (an even Grassmann number)."""
    return GrassmannNumber(
        path.alg, _action_coeffs(path.alg, fld, par, path.s, path.x, path.xi)
    )


def even_directional_quotient(
    path: DiscretePath, fld, par: ModelParams, variation: PathVariation, h_dir: float
) -> GrassmannNumber:
    """Two-sided difference quotient of the action along an even direction."""
    if variation.dx is None:
        raise ValueError("even quotient needs an x-variation")
    bump = np.zeros_like(path.x)
    bump[..., 0] = variation.dx
    plus = _action_coeffs(path.alg, fld, par, path.s, path.x + h_dir * bump, path.xi)
    minus = _action_coeffs(path.alg, fld, par, path.s, path.x - h_dir * bump, path.xi)
    return GrassmannNumber(path.alg, (plus - minus) / (2.0 * h_dir))


def stationarity_residual(
    path: DiscretePath,
    fld,
    par: ModelParams,
    variation: PathVariation,
    h_dir: float = 1e-4,
) -> float:
    """Magnitude of the first directional derivative of the action.

    Even directions: two-sided quotients at h_dir and h_dir/2, Richardson
    extrapolated.  Odd directions: exact coefficient of the fresh generator
    (h_dir is not used).
    """
    if variation.dx is not None:
        q1 = even_directional_quotient(path, fld, par, variation, h_dir).coeffs
        q2 = even_directional_quotient(path, fld, par, variation, 0.5 * h_dir).coeffs
        return float(np.max(np.abs((4.0 * q2 - q1) / 3.0)))

    ext = algebra(path.alg.n + 1)
    epath = path.embedded(ext)
    xi = epath.xi.copy()
    xi[..., 1 << path.alg.n] += variation.dxi
    act = _action_coeffs(ext, fld, par, epath.s, epath.x, xi)
    # monomials containing the fresh (highest) generator sit in the upper half
    return float(np.max(np.abs(act[path.alg.dim :])))


def euler_lagrange_residual(path: DiscretePath, fld, par: ModelParams) -> ELResidual:
    """Finite-difference defect of the equations of motion at interior nodes.

    Central second differences for the acceleration, central first
    differences for the velocities, analytic right-hand side at the node;
    large values flag a non-solution path (diagnostic, never an error).
    """
    h = path.h
    alg = path.alg
    x, xi = path.x, path.xi
    n_int = path.s.size - 2
    res_x = np.empty(n_int)
    res_xi = np.empty(n_int)
    for lo in range(0, n_int, _CHUNK):
        hi = min(lo + _CHUNK, n_int)
        sl = slice(lo + 1, hi + 1)
        xdd = (x[lo + 2 : hi + 2] - 2.0 * x[sl] + x[lo:hi]) / h**2
        v_c = (x[lo + 2 : hi + 2] - x[lo:hi]) / (2.0 * h)
        xid = (xi[lo + 2 : hi + 2] - xi[lo:hi]) / (2.0 * h)
        dv, dxi, _, _ = _rhs(alg, fld, par, x[sl], v_c, xi[sl])
        res_x[lo:hi] = par.mass * np.max(np.abs(xdd - dv), axis=(-2, -1))
        res_xi[lo:hi] = np.max(np.abs(xid - dxi), axis=(-2, -1))
    return ELResidual(s=path.s[1:-1].copy(), x_residual=res_x, xi_residual=res_xi)
