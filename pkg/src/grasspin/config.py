"""Run configuration: a single YAML document describing one simulation.

See ``configs/constant_b.yaml`` for an annotated example.  Validation
errors name the offending field; the command-line front end maps them to
exit code 2.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Any

import numpy as np
import yaml

from .fields import DirectField, FieldConfig, constant_field
from .grassmann import MAX_GENERATORS, algebra
from .minkowski import SIGNS, minkowski_dot
from .polynomials import Polynomial
from .super_dynamics import ModelParams, SuperState

__all__ = ["ConfigError", "RunConfig", "load_config"]


class ConfigError(ValueError):
    """Configuration file is invalid; message names the field."""


def _need(mapping: dict, key: str, context: str) -> Any:
    if key not in mapping:
        raise ConfigError(f"missing field {context}.{key}" if context else f"missing field {key}")
    return mapping[key]


def _vec4(value, name: str) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if arr.shape != (4,):
        raise ConfigError(f"{name} must be a 4-vector")
    return arr


@dataclass
class FieldSpec:
    kind: str
    e_field: np.ndarray | None = None
    b_field: np.ndarray | None = None
    terms: list | None = None
    f_terms: list | None = None

    def build(self):
        if self.kind == "constant":
            return constant_field(self.e_field, self.b_field)
        if self.kind == "polynomial":
            entries = []
            for t in self.terms:
                entries.append((t["component"], tuple(t["exponents"]), t["coefficient"]))
            return FieldConfig.from_entries(entries)
        comps: dict[tuple[int, int], Polynomial] = {}
        for t in self.f_terms:
            m, n = (int(v) for v in t["pair"])
            poly = comps.get((m, n), Polynomial.zero())
            comps[(m, n)] = poly + Polynomial.from_entries(
                [(tuple(t["exponents"]), t["coefficient"])]
            )
        return DirectField(comps)


@dataclass
class RunConfig:
    params: ModelParams
    field: FieldSpec
    x0: np.ndarray
    u0: np.ndarray
    spin_tensor: np.ndarray | None    # six covariant pair components
    xi_coeffs: np.ndarray | None      # (2, 4) generator loadings
    h: float
    steps: int
    record_every: int
    n_generators: int
    seed: int
    coefficient_masks: list[int] = field(default_factory=list)
    thresholds: dict = field(default_factory=dict)
    compare_threshold: float = 1e-6
    compare_enforce: bool = True
    verify: dict = field(default_factory=dict)

    def build_field(self):
        return self.field.build()

    def build_params(self) -> ModelParams:
        return self.params

    def build_super_state(self) -> SuperState:
        if self.xi_coeffs is None:
            raise ConfigError("initial.spin.xi is required for the full dynamics")
        return SuperState.from_real(self.x0, self.u0, self.xi_coeffs, algebra(self.n_generators))

    def spin_tensor_matrix(self) -> np.ndarray:
        """Covariant S_{mu nu} from whichever spin specification is present."""
        from .bmt import PAIRS

        if self.spin_tensor is not None:
            spin = np.zeros((4, 4))
            for val, (m, n) in zip(self.spin_tensor, PAIRS):
                spin[m, n] = val
                spin[n, m] = -val
            return spin
        c1 = SIGNS * self.xi_coeffs[0]
        c2 = SIGNS * self.xi_coeffs[1]
        return 0.5 * (np.outer(c1, c2) - np.outer(c2, c1))

    def threshold(self, name: str, default: float) -> float:
        return float(self.thresholds.get(name, default))


def _parse_field(raw: dict) -> FieldSpec:
    kind = _need(raw, "kind", "field")
    if kind == "constant":
        e = np.asarray(raw.get("E", [0.0, 0.0, 0.0]), dtype=float)
        b = np.asarray(raw.get("B", [0.0, 0.0, 0.0]), dtype=float)
        if e.shape != (3,) or b.shape != (3,):
            raise ConfigError("field.E and field.B must be 3-vectors")
        return FieldSpec(kind="constant", e_field=e, b_field=b)
    if kind == "polynomial":
        terms = _need(raw, "terms", "field")
        for i, t in enumerate(terms):
            if not {"component", "exponents", "coefficient"} <= set(t):
                raise ConfigError(
                    f"field.terms[{i}] needs component, exponents, coefficient"
                )
            if not 0 <= int(t["component"]) <= 3:
                raise ConfigError(f"field.terms[{i}].component must be 0..3")
            if len(t["exponents"]) != 4:
                raise ConfigError(f"field.terms[{i}].exponents must have 4 entries")
        return FieldSpec(kind="polynomial", terms=terms)
    if kind == "direct":
        f_terms = _need(raw, "f_terms", "field")
        for i, t in enumerate(f_terms):
            if not {"pair", "exponents", "coefficient"} <= set(t):
                raise ConfigError(f"field.f_terms[{i}] needs pair, exponents, coefficient")
            m, n = (int(v) for v in t["pair"])
            if not 0 <= m < n <= 3:
                raise ConfigError(f"field.f_terms[{i}].pair must satisfy 0 <= m < n <= 3")
        return FieldSpec(kind="direct", f_terms=f_terms)
    raise ConfigError(f"field.kind must be constant, polynomial or direct, got {kind!r}")


def parse_config(raw: dict) -> RunConfig:
    if not isinstance(raw, dict):
        raise ConfigError("configuration document must be a mapping")

    p = _need(raw, "params", "")
    try:
        params = ModelParams(
            mass=float(_need(p, "mass", "params")),
            charge=float(_need(p, "charge", "params")),
            mu_prime=float(_need(p, "mu_prime", "params")),
        )
    except ValueError as err:
        raise ConfigError(f"params: {err}") from err

    fieldspec = _parse_field(_need(raw, "field", ""))

    init = _need(raw, "initial", "")
    x0 = _vec4(_need(init, "x0", "initial"), "initial.x0")
    u0 = _vec4(_need(init, "u0", "initial"), "initial.u0")
    uu = float(minkowski_dot(u0, u0))
    if abs(uu - 1.0) >= 1e-6:
        raise ConfigError(
            f"initial.u0 is not normalized: u.u = {uu!r} (|u.u - 1| must be < 1e-6)"
        )
    if uu != 1.0:
        if uu <= 0:
            raise ConfigError(f"initial.u0 must be timelike, got u.u = {uu!r}")
        if abs(uu - 1.0) > 1e-13:  # silent below roundoff scale
            warnings.warn(f"initial.u0 rescaled: u.u = {uu!r}", stacklevel=2)
        u0 = u0 / np.sqrt(uu)

    spin = _need(init, "spin", "initial")
    s_tensor = spin.get("s_tensor")
    xi = spin.get("xi")
    if (s_tensor is None) == (xi is None):
        raise ConfigError("initial.spin must give exactly one of s_tensor, xi")
    if s_tensor is not None:
        s_tensor = np.asarray(s_tensor, dtype=float)
        if s_tensor.shape != (6,):
            raise ConfigError("initial.spin.s_tensor must list 6 components")
    if xi is not None:
        xi = np.asarray(xi, dtype=float)
        if xi.shape != (2, 4):
            raise ConfigError("initial.spin.xi must be a (2, 4) coefficient array")

    integ = _need(raw, "integrator", "")
    h = float(_need(integ, "h", "integrator"))
    steps = int(_need(integ, "steps", "integrator"))
    record_every = int(integ.get("record_every", 1))
    if h <= 0:
        raise ConfigError("integrator.h must be positive")
    if steps < 1:
        raise ConfigError("integrator.steps must be >= 1")
    if record_every < 1:
        raise ConfigError("integrator.record_every must be >= 1")

    alg_raw = raw.get("algebra", {})
    n_gen = int(alg_raw.get("n_generators", 4))
    if not 2 <= n_gen <= MAX_GENERATORS:
        raise ConfigError(f"algebra.n_generators must be in [2, {MAX_GENERATORS}]")

    out_raw = raw.get("output", {})
    masks = [int(m) for m in out_raw.get("coefficient_masks", [])]
    if any(not 0 <= m < (1 << n_gen) for m in masks):
        raise ConfigError("output.coefficient_masks entries must be valid subset masks")

    cmp_raw = raw.get("compare", {})
    return RunConfig(
        params=params,
        field=fieldspec,
        x0=x0,
        u0=u0,
        spin_tensor=s_tensor,
        xi_coeffs=xi,
        h=h,
        steps=steps,
        record_every=record_every,
        n_generators=n_gen,
        seed=int(raw.get("seed", 0)),
        coefficient_masks=masks,
        thresholds=dict(raw.get("thresholds", {})),
        compare_threshold=float(cmp_raw.get("threshold", 1e-6)),
        compare_enforce=bool(cmp_raw.get("enforce", True)),
        verify=dict(raw.get("verify", {})),
    )


def load_config(path: str) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = yaml.safe_load(fh)
    except OSError as err:
        raise ConfigError(f"cannot read config: {err}") from err
    except yaml.YAMLError as err:
        raise ConfigError(f"cannot parse config: {err}") from err
    return parse_config(raw)
