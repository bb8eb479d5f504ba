"""Reduced real-valued spin-precession dynamics.

The lowest Grassmann order of the full system closes on (x, u, S):

    m du^mu/ds = e F^{mu nu}(x) u_nu
    m dS^{mu nu}/ds = mu' F^{rho [nu} S_rho^{ mu]}
                      + (mu' - e) F^{rho sigma} u_rho S_sigma^{ [mu} u^{nu]}

with S the antisymmetric spin tensor and the bracket A^{[mu nu]} =
A^{mu nu} - A^{nu mu} (no 1/2); the bracket normalization is pinned against
the anticommuting-variable derivation by a dedicated cross-check test.
States store covariant components S_{mu nu}.

For a homogeneous field the velocity has the closed form
u(s) = exp((e/m) Fhat s) u(0); position follows by exact quadrature, and the
spin transport is a linear ODE with coefficients built from the exact u(s),
integrated here on a much finer grid (default 100x) to serve as an oracle
for the fixed-step integrator.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg

from .minkowski import EPS_UPPER, SIGNS, minkowski_dot
from .super_dynamics import ModelParams

__all__ = [
    "BMTState",
    "BMTTrajectory",
    "bmt_rhs",
    "integrate_bmt",
    "ConstantFieldOracle",
    "analytic_constant_field",
    "spin_vector",
    "spin_velocity_angle",
    "anomalous_precession",
]

PAIRS = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]


@dataclass
class BMTState:
    """Real reduced state: position, 4-velocity, covariant spin tensor."""

    x: np.ndarray
    u: np.ndarray
    spin: np.ndarray
    s: float = 0.0

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float).reshape(4)
        self.u = np.asarray(self.u, dtype=float).reshape(4)
        self.spin = np.asarray(self.spin, dtype=float).reshape(4, 4)
        if np.max(np.abs(self.spin + self.spin.T)) > 1e-12:
            raise ValueError("spin tensor must be antisymmetric")

    @classmethod
    def from_pairs(cls, x, u, spin_pairs: Sequence[float], s: float = 0.0):
        """spin_pairs lists S_{01}, S_{02}, S_{03}, S_{12}, S_{13}, S_{23}."""
        spin = np.zeros((4, 4))
        for val, (m, n) in zip(spin_pairs, PAIRS):
            spin[m, n] = val
            spin[n, m] = -val
        return cls(x, u, spin, s)

    def invariants(self) -> tuple[float, float, float]:
        """(u.u, max |u^mu S_{mu nu}|, S_{mu nu} S^{mu nu})."""
        uu = float(minkowski_dot(self.u, self.u))
        us = float(np.max(np.abs(self.u @ self.spin)))
        ss = float(np.sum(self.spin**2 * np.outer(SIGNS, SIGNS)))
        return uu, us, ss


@dataclass
class BMTTrajectory:
    s: np.ndarray      # (R,)
    x: np.ndarray      # (R, 4)
    u: np.ndarray      # (R, 4)
    spin: np.ndarray   # (R, 4, 4)
    uu: np.ndarray
    us_max: np.ndarray
    ss: np.ndarray

    def __len__(self) -> int:
        return self.s.shape[0]

    def state(self, i: int) -> BMTState:
        return BMTState(self.x[i], self.u[i], self.spin[i], float(self.s[i]))


def _du(f_lo: np.ndarray, u: np.ndarray, par: ModelParams) -> np.ndarray:
    return (par.charge / par.mass) * SIGNS * (f_lo @ u)


def _dspin(f_lo: np.ndarray, u: np.ndarray, spin: np.ndarray, par: ModelParams) -> np.ndarray:
    """Covariant-component spin transport; f_lo and the state at one point."""
    fmix = f_lo * SIGNS[None, :]          # F_mu^{ rho}
    t1 = fmix @ spin
    t1 = par.mu_prime * (t1 - t1.T)
    q = SIGNS * (u @ f_lo)                # q^sigma = F^{rho sigma} u_rho
    p = q @ spin                          # p_mu = q^sigma S_{sigma mu}
    u_lo = SIGNS * u
    t2 = par.anomaly * (np.outer(p, u_lo) - np.outer(u_lo, p))
    return (t1 + t2) / par.mass


def bmt_rhs(state: BMTState, fld, par: ModelParams):
    """(dx, du, dspin) of the reduced system at a state."""
    f_lo = fld.f_lower_real(state.x)
    return state.u.copy(), _du(f_lo, state.u, par), _dspin(f_lo, state.u, state.spin, par)


def integrate_bmt(
    state0: BMTState,
    fld,
    par: ModelParams,
    h: float,
    steps: int,
    record_every: int = 1,
    renormalize: bool = False,
) -> BMTTrajectory:
    """Fixed-step RK4; optionally rescale u to u.u = 1 after each step."""
    if h <= 0:
        raise ValueError("step size must be positive")
    x = state0.x.copy()
    u = state0.u.copy()
    spin = state0.spin.copy()
    s0 = float(state0.s)

    rows = []

    def rhs(x_, u_, s_):
        f_lo = fld.f_lower_real(x_)
        return u_, _du(f_lo, u_, par), _dspin(f_lo, u_, s_, par)

    for i in range(steps + 1):
        if i % record_every == 0 or i == steps:
            st = BMTState(x, u, spin, s0 + i * h)
            rows.append((st.s, x.copy(), u.copy(), spin.copy(), *st.invariants()))
        if i == steps:
            break
        k1 = rhs(x, u, spin)
        k2 = rhs(x + 0.5 * h * k1[0], u + 0.5 * h * k1[1], spin + 0.5 * h * k1[2])
        k3 = rhs(x + 0.5 * h * k2[0], u + 0.5 * h * k2[1], spin + 0.5 * h * k2[2])
        k4 = rhs(x + h * k3[0], u + h * k3[1], spin + h * k3[2])
        x = x + (h / 6.0) * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        u = u + (h / 6.0) * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        spin = spin + (h / 6.0) * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])
        if renormalize:
            uu = minkowski_dot(u, u)
            if uu <= 0:
                raise ValueError(f"u.u = {uu} not positive at step {i}; cannot renormalize")
            u = u / np.sqrt(uu)

    s_arr, x_arr, u_arr, sp_arr, uu, us, ss = map(np.array, zip(*rows))
    return BMTTrajectory(s=s_arr, x=x_arr, u=u_arr, spin=sp_arr, uu=uu, us_max=us, ss=ss)


# ----------------------------------------------------------------------
# Constant-field oracle
# ----------------------------------------------------------------------


def _phi1(z: np.ndarray) -> np.ndarray:
    """(exp(z) - 1)/z with a series branch near zero (complex-safe)."""
    z = np.asarray(z, dtype=complex)
    small = np.abs(z) < 1e-2
    zs = np.where(small, 0.0, z)
    out = np.where(small, 0.0j, (np.exp(zs) - 1.0) / np.where(zs == 0, 1.0, zs))
    t = z[small]
    series = 1 + t / 2 + t**2 / 6 + t**3 / 24 + t**4 / 120 + t**5 / 720
    out[small] = series
    return out


class ConstantFieldOracle:
    """Closed-form u and x plus refined spin transport for constant F_{mu nu}.

    u uses the true matrix exponential (eigendecomposition when sound, exact
    nilpotent series for null fields, scipy expm otherwise); x integrates the
    exponential exactly.  The spin tensor solves a linear ODE with
    coefficients from the exact u(s); it is advanced by RK4 on a grid
    ``refine`` times finer than ``h_ref``, assembled from per-step
    propagator matrices so long spans stay cheap.
    """

    def __init__(self, state0: BMTState, f_lower: np.ndarray, par: ModelParams,
                 refine: int = 100):
        self.state0 = state0
        self.f_lo = np.asarray(f_lower, dtype=float).reshape(4, 4)
        if np.max(np.abs(self.f_lo + self.f_lo.T)) > 1e-12:
            raise ValueError("constant field tensor must be antisymmetric")
        self.par = par
        self.refine = int(refine)
        self.a_mat = (par.charge / par.mass) * (SIGNS[:, None] * self.f_lo)

        scale = max(1.0, np.max(np.abs(self.a_mat)))
        w, vecs = np.linalg.eig(self.a_mat)
        self._mode = "expm"
        try:
            vinv = np.linalg.inv(vecs)
            resid = np.max(np.abs((vecs * w) @ vinv - self.a_mat))
            if resid < 1e-12 * scale:
                self._mode = "eig"
                self._w = w
                self._v = vecs
                self._y0 = vinv @ state0.u.astype(complex)
        except np.linalg.LinAlgError:
            pass
        if self._mode != "eig":
            a4 = np.linalg.matrix_power(self.a_mat, 4)
            if np.max(np.abs(a4)) < 1e-12 * scale**4:
                self._mode = "nilpotent"

        # constant part of the spin-transport generator (6x6 on index pairs)
        basis = []
        for m, n in PAIRS:
            b = np.zeros((4, 4))
            b[m, n] = 1.0
            b[n, m] = -1.0
            basis.append(b)
        self._basis = np.array(basis)
        fmix = self.f_lo * SIGNS[None, :]
        cols = []
        for b in self._basis:
            t1 = fmix @ b
            cols.append(self._pack(par.mu_prime * (t1 - t1.T) / par.mass))
        self._gen_const = np.array(cols).T  # (6, 6)

    @staticmethod
    def _pack(mat: np.ndarray) -> np.ndarray:
        return np.array([mat[m, n] for m, n in PAIRS])

    @staticmethod
    def _unpack(vec: np.ndarray) -> np.ndarray:
        out = np.zeros(vec.shape[:-1] + (4, 4))
        for a, (m, n) in enumerate(PAIRS):
            out[..., m, n] = vec[..., a]
            out[..., n, m] = -vec[..., a]
        return out

    # -- closed-form velocity and position -----------------------------

    def u_at(self, times: np.ndarray) -> np.ndarray:
        times = np.atleast_1d(np.asarray(times, dtype=float))
        if self._mode == "eig":
            phases = np.exp(np.outer(times, self._w))
            return np.real(phases * self._y0 @ self._v.T)
        if self._mode == "nilpotent":
            out = np.empty((times.size, 4))
            a1 = self.a_mat
            a2 = a1 @ a1
            a3 = a2 @ a1
            for k, t in enumerate(times):
                e = np.eye(4) + a1 * t + a2 * (t**2 / 2) + a3 * (t**3 / 6)
                out[k] = e @ self.state0.u
            return out
        return np.stack(
            [scipy.linalg.expm(self.a_mat * t) @ self.state0.u for t in times]
        )

    def x_at(self, times: np.ndarray) -> np.ndarray:
        times = np.atleast_1d(np.asarray(times, dtype=float))
        if self._mode == "eig":
            ints = times[:, None] * _phi1(np.outer(times, self._w))
            return self.state0.x + np.real(ints * self._y0 @ self._v.T)
        if self._mode == "nilpotent":
            out = np.empty((times.size, 4))
            a1 = self.a_mat
            a2 = a1 @ a1
            a3 = a2 @ a1
            for k, t in enumerate(times):
                q = (
                    np.eye(4) * t
                    + a1 * (t**2 / 2)
                    + a2 * (t**3 / 6)
                    + a3 * (t**4 / 24)
                )
                out[k] = self.state0.x + q @ self.state0.u
            return out
        out = np.empty((times.size, 4))
        aug = np.zeros((8, 8))
        aug[:4, :4] = self.a_mat
        aug[:4, 4:] = np.eye(4)
        for k, t in enumerate(times):
            e = scipy.linalg.expm(aug * t)
            out[k] = self.state0.x + e[:4, 4:] @ self.state0.u
        return out

    # -- refined spin transport -----------------------------------------

    def _gen_at(self, times: np.ndarray) -> np.ndarray:
        """Spin-transport generator (T, 6, 6) at the given times."""
        u = self.u_at(times)                       # (T, 4)
        q = SIGNS * (u @ self.f_lo)                # (T, 4)
        u_lo = u * SIGNS
        p = np.einsum("ts,bsm->tbm", q, self._basis)
        t2 = np.einsum("tbm,tn->tbmn", p, u_lo)
        t2 = t2 - np.swapaxes(t2, -1, -2)
        cols = np.array([t2[..., m, n] for m, n in PAIRS])   # (6, T, 6_basis)
        gen_t = (self.par.anomaly / self.par.mass) * np.moveaxis(cols, 0, 1)
        return self._gen_const[None, :, :] + gen_t

    @staticmethod
    def _chain(mats: np.ndarray) -> np.ndarray:
        """Ordered product mats[-1] @ ... @ mats[0] by pairwise reduction."""
        while mats.shape[0] > 1:
            n = mats.shape[0]
            paired = np.einsum("kij,kjl->kil", mats[1 : n - n % 2 : 2], mats[0 : n - n % 2 : 2])
            if n % 2:
                paired = np.concatenate([paired, mats[-1:]], axis=0)
            mats = paired
        return mats[0]

    def _segment_propagator(self, t0: float, t1: float, h_fine: float) -> np.ndarray:
        n = max(1, int(np.ceil((t1 - t0) / h_fine - 1e-12)))
        hh = (t1 - t0) / n
        stage_times = t0 + hh * np.arange(2 * n + 1) / 2.0
        gen = self._gen_at(stage_times)
        a1 = gen[0:-1:2]
        a2 = gen[1::2]
        a3 = gen[2::2]
        eye = np.eye(6)
        k1 = a1
        k2 = a2 @ (eye + 0.5 * hh * k1)
        k3 = a2 @ (eye + 0.5 * hh * k2)
        k4 = a3 @ (eye + hh * k3)
        phi = eye + (hh / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        return self._chain(phi)

    def sample(self, times: np.ndarray, h_ref: float) -> BMTTrajectory:
        """Oracle states at increasing times >= state0.s."""
        times = np.asarray(times, dtype=float)
        if np.any(np.diff(times) <= 0):
            raise ValueError("sample times must be strictly increasing")
        if times[0] < self.state0.s - 1e-15:
            raise ValueError("sample times must not precede the initial state")
        h_fine = float(h_ref) / self.refine
        rel = times - self.state0.s
        xs = self.x_at(rel)
        us = self.u_at(rel)
        spins = np.empty((times.size, 4, 4))
        s6 = self._pack(self.state0.spin)
        t_prev = 0.0
        for k, t in enumerate(rel):
            if t > t_prev:
                s6 = self._segment_propagator(t_prev, t, h_fine) @ s6
                t_prev = t
            spins[k] = self._unpack(s6)
        uu = minkowski_dot(us, us, axis=-1)
        us_max = np.max(np.abs(np.einsum("tm,tmn->tn", us, spins)), axis=-1)
        ss = np.einsum("tmn,tmn->t", spins**2, np.outer(SIGNS, SIGNS)[None])
        return BMTTrajectory(
            s=times.copy(), x=xs, u=us, spin=spins, uu=uu, us_max=us_max, ss=ss
        )

    def state_at(self, s: float, h_ref: float | None = None) -> BMTState:
        if s == self.state0.s:
            return BMTState(
                self.state0.x.copy(), self.state0.u.copy(), self.state0.spin.copy(), s
            )
        if h_ref is None:
            h_ref = (s - self.state0.s) / 10.0
        traj = self.sample(np.array([s]), h_ref)
        return traj.state(0)


def analytic_constant_field(
    state0: BMTState,
    f_lower: np.ndarray,
    par: ModelParams,
    s: float,
    h_ref: float | None = None,
    refine: int = 100,
) -> BMTState:
    """Closed-form/refined reference state for a constant field at time s."""
    return ConstantFieldOracle(state0, f_lower, par, refine=refine).state_at(s, h_ref)


# ----------------------------------------------------------------------
# Spin diagnostics
# ----------------------------------------------------------------------


def spin_vector(state: BMTState) -> np.ndarray:
    """Polarization 4-vector s^mu = -1/2 eps^{mu nu rho sigma} u_nu S_{rho sigma}."""
    u_lo = SIGNS * state.u
    return -0.5 * np.einsum("mnrs,n,rs->m", EPS_UPPER, u_lo, state.spin)


def spin_velocity_angle(traj: BMTTrajectory, axis: int = 3) -> tuple[np.ndarray, np.ndarray]:
    """Unwrapped in-plane angle of the spin vector relative to the velocity.

    The gyration plane is spanned by the two spatial axes other than
    ``axis``.  Raises if the motion leaves the plane or the spin vector has
    no in-plane component to track.
    """
    if axis not in (1, 2, 3):
        raise ValueError("axis must be a spatial index 1..3")
    i, j = [k for k in (1, 2, 3) if k != axis]
    u_plane = traj.u[:, [i, j]]
    if np.max(np.abs(traj.u[:, axis])) > 1e-9 * max(1.0, np.max(np.abs(u_plane))):
        raise ValueError("trajectory is not planar: velocity leaves the gyration plane")
    u_lo = traj.u * SIGNS
    sv = -0.5 * np.einsum("mnrs,tn,trs->tm", EPS_UPPER, u_lo, traj.spin)
    s_plane = sv[:, [i, j]]
    if np.min(np.hypot(s_plane[:, 0], s_plane[:, 1])) < 1e-12:
        raise ValueError("spin vector has no in-plane component to track")
    phi_v = np.unwrap(np.arctan2(u_plane[:, 1], u_plane[:, 0]))
    phi_s = np.unwrap(np.arctan2(s_plane[:, 1], s_plane[:, 0]))
    return traj.s.copy(), phi_s - phi_v


def anomalous_precession(traj: BMTTrajectory, axis: int = 3, full: bool = False):
    """Mean proper-time rate of the spin-vs-velocity in-plane angle.

    Linear fit of the unwrapped relative angle against proper time; with
    ``full=True`` also returns the fit R^2 and the angle series.
    """
    s, rel = spin_velocity_angle(traj, axis)
    design = np.stack([s - s[0], np.ones_like(s)], axis=1)
    coef, *_ = np.linalg.lstsq(design, rel, rcond=None)
    rate = float(coef[0])
    if not full:
        return rate
    fit = design @ coef
    ss_res = float(np.sum((rel - fit) ** 2))
    ss_tot = float(np.sum((rel - np.mean(rel)) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return rate, r2, s, rel
