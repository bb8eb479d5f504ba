"""Exact real polynomials in the four spacetime coordinates.

Potentials and field components are polynomials with real coefficients, so
every derivative is again an exact polynomial and evaluation at a
Grassmann-even point reduces to a finite Taylor expansion about the body:
the nilpotent part has degree >= 2, hence soul monomials of combined order
above N/2 vanish identically.
"""

from __future__ import annotations

import itertools
import math
from typing import Iterable, Sequence

import numpy as np

from .grassmann import GrassmannAlgebra

__all__ = ["Polynomial", "PolyVectorEvaluator"]

Exponents = tuple[int, int, int, int]


class Polynomial:
    """Polynomial in (x0, x1, x2, x3) as {exponent 4-tuple: coefficient}."""

    __slots__ = ("terms",)

    def __init__(self, terms: dict[Exponents, float] | None = None):
        clean: dict[Exponents, float] = {}
        for exps, coef in (terms or {}).items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != 4 or any(e < 0 for e in exps):
                raise ValueError(f"bad exponent tuple {exps}")
            if coef != 0.0:
                clean[exps] = clean.get(exps, 0.0) + float(coef)
        self.terms = {e: c for e, c in clean.items() if c != 0.0}

    @classmethod
    def zero(cls) -> "Polynomial":
        return cls({})

    @classmethod
    def constant(cls, value: float) -> "Polynomial":
        return cls({(0, 0, 0, 0): value})

    @classmethod
    def coordinate(cls, axis: int) -> "Polynomial":
        exps = [0, 0, 0, 0]
        exps[axis] = 1
        return cls({tuple(exps): 1.0})

    @classmethod
    def from_entries(cls, entries: Iterable[tuple[Sequence[int], float]]) -> "Polynomial":
        terms: dict[Exponents, float] = {}
        for exps, coef in entries:
            key = tuple(int(e) for e in exps)
            terms[key] = terms.get(key, 0.0) + float(coef)
        return cls(terms)

    @property
    def degree(self) -> int:
        """Total degree; zero polynomial reports 0."""
        if not self.terms:
            return 0
        return max(sum(e) for e in self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def diff(self, axis: int) -> "Polynomial":
        out: dict[Exponents, float] = {}
        for exps, coef in self.terms.items():
            k = exps[axis]
            if k == 0:
                continue
            new = list(exps)
            new[axis] = k - 1
            key = tuple(new)
            out[key] = out.get(key, 0.0) + coef * k
        return Polynomial(out)

    def scale(self, factor: float) -> "Polynomial":
        return Polynomial({e: c * factor for e, c in self.terms.items()})

    def __add__(self, other: "Polynomial") -> "Polynomial":
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, 0.0) + c
        return Polynomial(out)

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return self + other.scale(-1.0)

    def __neg__(self) -> "Polynomial":
        return self.scale(-1.0)

    def eval(self, points: np.ndarray) -> np.ndarray:
        """Evaluate at real points of shape (..., 4)."""
        points = np.asarray(points, dtype=float)
        out = np.zeros(points.shape[:-1])
        for exps, coef in self.terms.items():
            out = out + coef * np.prod(points ** np.asarray(exps), axis=-1)
        return out

    def __repr__(self) -> str:  # pragma: no cover
        if not self.terms:
            return "Polynomial(0)"
        bits = [
            f"{c:g}·x0^{e[0]}x1^{e[1]}x2^{e[2]}x3^{e[3]}" for e, c in self.terms.items()
        ]
        return "Polynomial(" + " + ".join(bits) + ")"


def _multi_indices(order: int) -> list[tuple[Exponents, Exponents | None, int]]:
    """(alpha, parent alpha, appended axis) for all |alpha| == order."""
    out = []
    for combo in itertools.combinations_with_replacement(range(4), order):
        alpha = [0, 0, 0, 0]
        for ax in combo:
            alpha[ax] += 1
        if order == 0:
            out.append((tuple(alpha), None, -1))
        else:
            parent = list(alpha)
            parent[combo[-1]] -= 1
            out.append((tuple(alpha), tuple(parent), combo[-1]))
    return out


class PolyVectorEvaluator:
    """Batch evaluator for a fixed tuple of polynomials.

    Precomputes the full derivative closure and flattens every
    (derivative-order, component) slot into one vectorized monomial program,
    so a single call yields all values needed for the Taylor expansion at a
    Grassmann-even point.  The 1/alpha! Taylor weights are folded into the
    program coefficients.
    """

    def __init__(self, polys: Sequence[Polynomial]):
        self.polys = list(polys)
        self.n_polys = len(self.polys)
        self.max_degree = max((p.degree for p in self.polys), default=0)

        # Derivative closure grouped by order; trailing all-zero orders are
        # dropped (derivatives of zero stay zero, so the cut is monotone).
        self._orders: list[dict] = []
        per_alpha_polys: dict[Exponents, list[Polynomial]] = {}
        slot_polys: list[Polynomial] = []
        for order in range(self.max_degree + 1):
            infos = _multi_indices(order)
            prev_pos = (
                {a: i for i, (a, _, _) in enumerate(_multi_indices(order - 1))}
                if order > 0
                else {}
            )
            group = {
                "alphas": [a for a, _, _ in infos],
                "parent": np.array(
                    [0 if p is None else prev_pos[p] for _, p, _ in infos],
                    dtype=np.int64,
                ),
                "axis": np.array([ax for _, _, ax in infos], dtype=np.int64),
                "slot0": len(slot_polys),
            }
            any_nonzero = False
            for alpha, parent, ax in infos:
                if order == 0:
                    derivs = list(self.polys)
                else:
                    derivs = [p.diff(ax) for p in per_alpha_polys[parent]]
                per_alpha_polys[alpha] = derivs
                weight = 1.0 / math.prod(math.factorial(a) for a in alpha)
                slot_polys.extend(p.scale(weight) for p in derivs)
                any_nonzero = any_nonzero or any(not p.is_zero() for p in derivs)
            if order > 0 and not any_nonzero:
                break
            self._orders.append(group)
        slot_count = self._orders[-1]["slot0"] + len(self._orders[-1]["alphas"]) * self.n_polys
        slot_polys = slot_polys[:slot_count]

        self.n_orders = len(self._orders)
        self._build_program(slot_polys)

    def _build_program(self, slot_polys: list[Polynomial]) -> None:
        self.n_slots = len(slot_polys)
        exps, weights = [], []
        for slot, poly in enumerate(slot_polys):
            for e, c in poly.terms.items():
                exps.append(e)
                weights.append((slot, c))
        self._exps = np.array(exps, dtype=np.int64).reshape(-1, 4)
        gather = np.zeros((len(weights), self.n_slots))
        for row, (slot, c) in enumerate(weights):
            gather[row, slot] = c
        self._gather = gather

    def _eval_slots(self, points: np.ndarray) -> np.ndarray:
        """All slot values at real points (..., 4) -> (..., n_slots)."""
        points = np.asarray(points, dtype=float)
        if self._exps.shape[0] == 0:
            return np.zeros(points.shape[:-1] + (self.n_slots,))
        mono = np.prod(points[..., None, :] ** self._exps, axis=-1)
        return mono @ self._gather

    def eval_real(self, points: np.ndarray) -> np.ndarray:
        """Component values at real points (..., 4) -> (..., n_polys)."""
        return self._eval_slots(points)[..., : self.n_polys]

    def eval_even(
        self,
        bodies: np.ndarray,
        souls: np.ndarray | None,
        alg: GrassmannAlgebra,
    ) -> np.ndarray:
        """Values at Grassmann-even points as coefficient arrays.

        ``bodies`` has shape (..., 4); ``souls`` is None for purely real
        points or the matching (..., 4, dim) nilpotent parts.  Returns
        (..., n_polys, dim).
        """
        bodies = np.asarray(bodies, dtype=float)
        batch = bodies.shape[:-1]
        out = np.zeros(batch + (self.n_polys, alg.dim))
        slots = self._eval_slots(bodies)
        out[..., 0] = slots[..., : self.n_polys]
        if souls is None or not np.any(souls):
            return out

        max_order = min(self.n_orders - 1, alg.n // 2)
        mon_prev = None
        for order in range(1, max_order + 1):
            g = self._orders[order]
            n_alphas = len(g["alphas"])
            lo = g["slot0"]
            vals = slots[..., lo : lo + n_alphas * self.n_polys].reshape(
                batch + (n_alphas, self.n_polys)
            )
            if order == 1:
                mon = souls
            else:
                mon = alg.mul(
                    mon_prev[..., g["parent"], :], souls[..., g["axis"], :]
                )
            if np.any(vals):
                out += np.einsum("...ap,...ad->...pd", vals, mon)
            mon_prev = mon
        return out
