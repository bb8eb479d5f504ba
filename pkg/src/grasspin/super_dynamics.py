"""Grassmann-valued equations of motion for the spinning charged particle.

State: even position x^mu and velocity v^mu = dx/ds, odd spin variables
xi^mu, all valued in one Grassmann algebra.  The dynamics is

    m dv^mu/ds = e F^{mu nu} v_nu
                 + (mu'/2m) eta^{mu kappa} (d_kappa F^{rho sigma}) S_{rho sigma}
                 - (dlam/ds) xi^mu
    dxi^mu/ds  = (mu'/m) F^{mu nu} xi_nu - 2 lam v^mu

with S_{mu nu} = (1/2) xi_mu xi_nu and the multiplier fixed by consistency
of the constraint xi_mu v^mu = 0:

    lam = (v.v)^{-1} (mu'-e)/(2m) F^{mu nu} v_mu xi_nu .

lam is Grassmann-odd (it multiplies an odd constraint).  Its proper-time
derivative is obtained by differentiating the multiplier equation along the
flow and substituting the equations of motion; the dv-dependence of dlam/ds
enters dv only multiplied by xi, raising Grassmann degree each pass, so a
fixed-point iteration starting from dlam/ds = 0 terminates exactly after
ceil(N/2) passes.

All kernels below operate on raw coefficient arrays of shape (..., 4, dim)
and broadcast over leading axes, so a whole grid of states can be evaluated
in one call.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .grassmann import GrassmannAlgebra, GrassmannNumber, Parity
from .minkowski import SIGNS

__all__ = [
    "LightlikeVelocityError",
    "ModelParams",
    "SuperState",
    "SuperTrajectory",
    "ReducedTrajectory",
    "lambda_solve",
    "eom_rhs",
    "constraint_value",
    "multiplier_rate",
    "integrate_super",
    "leading_order",
]


class LightlikeVelocityError(ValueError):
    """v.v has zero body; the multiplier equation cannot be solved."""


@dataclass(frozen=True)
class ModelParams:
    """Particle parameters: mass, charge, and the moment parameter mu'.

    The magnetic moment is mu'/(2m); mu' = e is the no-anomaly case.
    """

    mass: float
    charge: float
    mu_prime: float

    def __post_init__(self):
        if self.mass <= 0:
            raise ValueError("mass must be positive")

    @property
    def magnetic_moment(self) -> float:
        return self.mu_prime / (2.0 * self.mass)

    @property
    def anomaly(self) -> float:
        return self.mu_prime - self.charge


# ----------------------------------------------------------------------
# Batched Grassmann 4-vector helpers (raw coefficient arrays)
# ----------------------------------------------------------------------


def _gdot(alg: GrassmannAlgebra, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """a_mu b^mu for Grassmann 4-vectors (..., 4, dim), factors in this order."""
    prod = alg.mul(a, b)
    return np.einsum("m,...md->...d", SIGNS, prod)


def _split_even(x: np.ndarray):
    bodies = x[..., 0]
    souls = None
    if np.any(x[..., 1:]):
        souls = x.copy()
        souls[..., 0] = 0.0
    return bodies, souls


def _freal(f_lo: np.ndarray) -> np.ndarray | None:
    """Real 4x4 (batched) if the tensor has body only, else None."""
    if np.any(f_lo[..., 1:]):
        return None
    return f_lo[..., 0]


def _f_right(alg, f_lo, f_real, w):
    """F^{mu nu} w_nu = SIGNS[mu] * sum_nu F_{mu nu} w^nu, shape (..., 4, dim)."""
    if f_real is not None:
        out = np.einsum("...mn,...nd->...md", f_real, w)
    else:
        out = alg.mul(f_lo, w[..., None, :, :]).sum(axis=-2)
    return SIGNS[:, None] * out


def _f_left(alg, f_lo, f_real, w):
    """Q_nu = sum_mu F_{mu nu} w^mu (all metric signs cancel in its uses)."""
    if f_real is not None:
        return np.einsum("...mn,...md->...nd", f_real, w)
    return alg.mul(f_lo, w[..., :, None, :]).sum(axis=-3)


def _odd_contract(alg, q, xi):
    """sum_nu q^nu * xi^nu with q the left factor, shape (..., dim)."""
    return alg.mul(q, xi).sum(axis=-2)


def _multiplier(alg, f_lo, f_real, v, xi, par):
    """Multiplier lam plus reusable contractions.

    Returns (vv, inv_vv, q, lam) with q_nu = F_{mu nu} v^mu; the first
    stacked product also yields the constraint contraction
    a = F^{mu nu} v_mu xi_nu (metric signs cancel pairwise there).
    """
    q = _f_left(alg, f_lo, f_real, v)
    left = np.stack([SIGNS[:, None] * v, q], axis=-3)
    right = np.stack([v, xi], axis=-3)
    both = alg.mul(left, right).sum(axis=-2)
    vv = both[..., 0, :]
    a_con = both[..., 1, :]
    if np.any(np.abs(vv[..., 0]) == 0.0):
        raise LightlikeVelocityError("v.v has zero body")
    inv_vv = alg.invert_even(vv)
    c_lam = (par.mu_prime - par.charge) / (2.0 * par.mass)
    lam = c_lam * alg.mul(inv_vv, a_con)
    return vv, inv_vv, q, lam


# ----------------------------------------------------------------------
# States and trajectories
# ----------------------------------------------------------------------


@dataclass
class SuperState:
    """Even x, v and odd xi as coefficient arrays (4, dim), at proper time s."""

    alg: GrassmannAlgebra
    x: np.ndarray
    v: np.ndarray
    xi: np.ndarray
    s: float = 0.0

    @classmethod
    def from_real(
        cls,
        x0,
        u0,
        xi_coeffs,
        alg: GrassmannAlgebra,
        s: float = 0.0,
    ) -> "SuperState":
        """Real initial data; xi_coeffs[a, mu] loads generator a+1 with c_a^mu."""
        x = np.zeros((4, alg.dim))
        v = np.zeros((4, alg.dim))
        x[:, 0] = np.asarray(x0, dtype=float)
        v[:, 0] = np.asarray(u0, dtype=float)
        xi = np.zeros((4, alg.dim))
        c = np.atleast_2d(np.asarray(xi_coeffs, dtype=float))
        if c.shape[1] != 4 or c.shape[0] > alg.n:
            raise ValueError(
                f"xi coefficients must be (k, 4) with k <= {alg.n}, got {c.shape}"
            )
        for a in range(c.shape[0]):
            xi[:, 1 << a] = c[a]
        return cls(alg, x, v, xi, s)

    @classmethod
    def from_numbers(cls, x, v, xi, s: float = 0.0) -> "SuperState":
        comps = list(x) + list(v) + list(xi)
        algs = {c.alg.n for c in comps if isinstance(c, GrassmannNumber)}
        if len(algs) != 1:
            raise ValueError("components must share one algebra")
        alg = next(c.alg for c in comps if isinstance(c, GrassmannNumber))

        def pack(seq):
            out = np.zeros((4, alg.dim))
            for mu, val in enumerate(seq):
                if isinstance(val, GrassmannNumber):
                    out[mu] = val.coeffs
                else:
                    out[mu, 0] = float(val)
            return out

        return cls(alg, pack(x), pack(v), pack(xi), s)

    def validate(self) -> None:
        for mu in range(4):
            if self.alg.parity_of(self.x[mu]) not in (Parity.EVEN, Parity.ZERO):
                raise ValueError(f"x^{mu} is not Grassmann-even")
            if self.alg.parity_of(self.v[mu]) not in (Parity.EVEN, Parity.ZERO):
                raise ValueError(f"v^{mu} is not Grassmann-even")
            if self.alg.parity_of(self.xi[mu]) not in (Parity.ODD, Parity.ZERO):
                raise ValueError(f"xi^{mu} is not Grassmann-odd")

    @property
    def x_gn(self):
        return [GrassmannNumber(self.alg, self.x[mu]) for mu in range(4)]

    @property
    def v_gn(self):
        return [GrassmannNumber(self.alg, self.v[mu]) for mu in range(4)]

    @property
    def xi_gn(self):
        return [GrassmannNumber(self.alg, self.xi[mu]) for mu in range(4)]

    def spin_tensor(self) -> np.ndarray:
        """S_{mu nu} = (1/2) xi_mu xi_nu as coefficient arrays (4, 4, dim)."""
        xi_lo = SIGNS[:, None] * self.xi
        return 0.5 * self.alg.mul(xi_lo[:, None, :], xi_lo[None, :, :])


@dataclass
class SuperTrajectory:
    """Recorded states plus per-step monitor series (length steps + 1)."""

    alg: GrassmannAlgebra
    h: float
    s: np.ndarray           # (R,) proper times of recorded states
    x: np.ndarray           # (R, 4, dim)
    v: np.ndarray           # (R, 4, dim)
    xi: np.ndarray          # (R, 4, dim)
    steps_recorded: np.ndarray
    constraint_max: np.ndarray
    lambda_max: np.ndarray
    vv_body: np.ndarray

    def __len__(self) -> int:
        return self.s.shape[0]

    def state(self, i: int) -> SuperState:
        return SuperState(self.alg, self.x[i], self.v[i], self.xi[i], float(self.s[i]))


@dataclass
class ReducedTrajectory:
    """Lowest-degree projection: bodies of x, v and the theta1 theta2 spin block."""

    s: np.ndarray      # (R,)
    x: np.ndarray      # (R, 4)
    u: np.ndarray      # (R, 4)
    spin: np.ndarray   # (R, 4, 4), S_{mu nu} (covariant components)


# ----------------------------------------------------------------------
# Right-hand side
# ----------------------------------------------------------------------


def _rhs(alg, fld, par, x, v, xi, *, need_lambda_dot=True):
    """Batched right-hand side; returns (dv, dxi, lam, lam_dot).

    Inputs are coefficient arrays (..., 4, dim).  dx/ds = v is implicit.
    Independent products are stacked into shared kernel calls; the comments
    name the slices.
    """
    m = par.mass
    e = par.charge
    mup = par.mu_prime
    c_lam = (mup - e) / (2.0 * m)

    if fld.constant:
        f_lo = None
        f_real = fld._f_const
    else:
        bodies, souls = _split_even(x)
        f_lo = fld.f_lower_coeffs(bodies, souls, alg)
        f_real = _freal(f_lo)

    vv, inv_vv, q, lam = _multiplier(alg, f_lo, f_real, v, xi, par)

    # Lorentz force piece
    w_lor = _f_right(alg, f_lo, f_real, v)

    # gradient (Stern-Gerlach) piece; vanishes for homogeneous fields
    if fld.constant:
        grad = 0.0
    else:
        df_lo = fld.df_lower_coeffs(bodies, souls, alg)
        df_real = _freal(df_lo)
        pair = alg.mul(xi[..., :, None, :], xi[..., None, :, :])
        if df_real is not None:
            grad = np.einsum("...mrs,...rsd->...md", df_real, pair)
        else:
            grad = alg.mul(df_lo, pair[..., None, :, :, :]).sum(axis=(-3, -2))
        grad = 0.5 * SIGNS[:, None] * grad

    # dxi (depends on lam only)
    x_mag = _f_right(alg, f_lo, f_real, xi)
    dxi = (mup / m) * x_mag - 2.0 * alg.mul(lam[..., None, :], v)

    dv_base = (e / m) * w_lor + (mup / (2.0 * m * m)) * grad
    if not need_lambda_dot:
        return dv_base, dxi, lam, np.zeros_like(lam)

    # d lam/ds by differentiating the multiplier equation along the flow and
    # substituting the equations of motion.  The dependence on dv enters dv
    # again only multiplied by xi, raising the Grassmann degree by two per
    # pass, so the fixed point is exact after ceil(N/2) passes.
    if fld.constant:
        a_dot_field = 0.0
    else:
        if df_real is not None:
            f_dot = np.einsum("...kmn,...kd->...mnd", df_real, v)
        else:
            f_dot = alg.mul(v[..., :, None, None, :], df_lo).sum(axis=-4)
        r_dot = alg.mul(f_dot, v[..., :, None, :]).sum(axis=-3)
        a_dot_field = _odd_contract(alg, r_dot, xi)
    a_dot_xi = _odd_contract(alg, q, dxi)    # F^{mu nu} v_mu dxi_nu

    lam_dot = np.zeros_like(lam)
    dv = dv_base
    for _ in range((alg.n + 1) // 2):
        q_dv = _f_left(alg, f_lo, f_real, dv)
        # [0]: F^{mu nu} dv_mu xi_nu ; [1]: v.dv
        left = np.stack([q_dv, SIGNS[:, None] * v], axis=-3)
        right = np.stack([xi, dv], axis=-3)
        both = alg.mul(left, right).sum(axis=-2)
        a_dot_v = both[..., 0, :]
        vv_dot = 2.0 * both[..., 1, :]
        lam_dot = alg.mul(
            inv_vv,
            c_lam * (a_dot_field + a_dot_v + a_dot_xi) - alg.mul(lam, vv_dot),
        )
        dv = dv_base - (1.0 / m) * alg.mul(lam_dot[..., None, :], xi)
    return dv, dxi, lam, lam_dot


# ----------------------------------------------------------------------
# Public operations
# ----------------------------------------------------------------------


def lambda_solve(state: SuperState, fld, par: ModelParams) -> GrassmannNumber:
    """Constraint multiplier at a state (Grassmann-odd for odd xi)."""
    alg = state.alg
    bodies, souls = _split_even(state.x)
    f_lo = fld.f_lower_coeffs(bodies, souls, alg)
    f_real = _freal(f_lo)
    _, _, _, lam = _multiplier(alg, f_lo, f_real, state.v, state.xi, par)
    return GrassmannNumber(alg, lam)


def eom_rhs(state: SuperState, fld, par: ModelParams):
    """(dx, dv, dxi) at a state, as lists of GrassmannNumber."""
    dv, dxi, _, _ = _rhs(state.alg, fld, par, state.x, state.v, state.xi)
    wrap = lambda arr: [GrassmannNumber(state.alg, arr[mu]) for mu in range(4)]
    return wrap(state.v), wrap(dv), wrap(dxi)


def constraint_value(state: SuperState) -> GrassmannNumber:
    """xi_mu v^mu; zero (to roundoff) along consistent trajectories."""
    return GrassmannNumber(state.alg, _gdot(state.alg, state.xi, state.v))


def multiplier_rate(state: SuperState, fld, par: ModelParams):
    """(lam, dlam/ds) at a state, the rate from the exact fixed point."""
    _, _, lam, lam_dot = _rhs(state.alg, fld, par, state.x, state.v, state.xi)
    return GrassmannNumber(state.alg, lam), GrassmannNumber(state.alg, lam_dot)


def integrate_super(
    state0: SuperState,
    fld,
    par: ModelParams,
    h: float,
    steps: int,
    record_every: int = 1,
) -> SuperTrajectory:
    """Classical fixed-step RK4 on all Grassmann coefficients.

    Monitors (constraint magnitude, multiplier magnitude, body of v.v) are
    evaluated at every accepted step regardless of the recording stride.
    """
    if h <= 0:
        raise ValueError("step size must be positive")
    if steps < 1:
        raise ValueError("steps must be >= 1")
    state0.validate()
    alg = state0.alg
    x = state0.x.copy()
    v = state0.v.copy()
    xi = state0.xi.copy()
    s0 = float(state0.s)

    n_mon = steps + 1
    constraint_max = np.empty(n_mon)
    lambda_max = np.empty(n_mon)
    vv_body = np.empty(n_mon)
    rec_s, rec_x, rec_v, rec_xi, rec_steps = [], [], [], [], []

    def record(i):
        rec_s.append(s0 + i * h)
        rec_x.append(x.copy())
        rec_v.append(v.copy())
        rec_xi.append(xi.copy())
        rec_steps.append(i)

    half = 0.5 * h
    for i in range(steps + 1):
        try:
            dv1, dxi1, lam, _ = _rhs(
                alg, fld, par, x, v, xi, need_lambda_dot=(i < steps)
            )
        except LightlikeVelocityError as err:
            raise LightlikeVelocityError(f"{err} at step {i}") from err
        constraint_max[i] = np.max(np.abs(_gdot(alg, xi, v)))
        lambda_max[i] = np.max(np.abs(lam))
        vv_body[i] = _gdot(alg, v, v)[0]
        if i % record_every == 0 or i == steps:
            record(i)
        if i == steps:
            break

        k1 = (v, dv1, dxi1)
        x2, v2, xi2 = x + half * k1[0], v + half * k1[1], xi + half * k1[2]
        dv2, dxi2, _, _ = _rhs(alg, fld, par, x2, v2, xi2)
        k2 = (v2, dv2, dxi2)
        x3, v3, xi3 = x + half * k2[0], v + half * k2[1], xi + half * k2[2]
        dv3, dxi3, _, _ = _rhs(alg, fld, par, x3, v3, xi3)
        k3 = (v3, dv3, dxi3)
        x4, v4, xi4 = x + h * k3[0], v + h * k3[1], xi + h * k3[2]
        dv4, dxi4, _, _ = _rhs(alg, fld, par, x4, v4, xi4)
        k4 = (v4, dv4, dxi4)

        x = x + (h / 6.0) * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0])
        v = v + (h / 6.0) * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])
        xi = xi + (h / 6.0) * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2])

    return SuperTrajectory(
        alg=alg,
        h=h,
        s=np.asarray(rec_s),
        x=np.stack(rec_x),
        v=np.stack(rec_v),
        xi=np.stack(rec_xi),
        steps_recorded=np.asarray(rec_steps),
        constraint_max=constraint_max,
        lambda_max=lambda_max,
        vv_body=vv_body,
    )


def leading_order(traj: SuperTrajectory, on_zero: str = "warn") -> ReducedTrajectory:
    """Project a trajectory to its lowest Grassmann degrees.

    Returns bodies of x and v, and the theta1 theta2 coefficient of the spin
    tensor S_{mu nu} = (1/2) xi_mu xi_nu, which is the block loaded by
    two-generator initial data.  Components of the initial xi without a
    degree-1 part are reported according to ``on_zero`` ("warn", "raise",
    or "ignore").
    """
    alg = traj.alg
    if alg.n < 2:
        raise ValueError("projection needs an algebra with at least 2 generators")
    deg1 = np.array([1 << a for a in range(alg.n)])
    missing = [
        mu
        for mu in range(4)
        if not np.any(np.abs(traj.xi[0, mu, deg1]) > 0.0)
    ]
    if missing and on_zero != "ignore":
        msg = f"xi components {missing} have no degree-1 part; their spin block is zero"
        if on_zero == "raise":
            raise ValueError(msg)
        warnings.warn(msg, stacklevel=2)

    x_body = traj.x[..., 0]
    u_body = traj.v[..., 0]
    c1 = SIGNS[None, :] * traj.xi[..., :, 1]   # coefficient of theta1, lowered
    c2 = SIGNS[None, :] * traj.xi[..., :, 2]   # coefficient of theta2, lowered
    spin = 0.5 * (c1[:, :, None] * c2[:, None, :] - c2[:, :, None] * c1[:, None, :])
    return ReducedTrajectory(s=traj.s.copy(), x=x_body, u=u_body, spin=spin)
