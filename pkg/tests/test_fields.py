"""Field tensor evaluation, exact derivatives, and the Maxwell identity."""

import numpy as np
import pytest
import sympy

from grasspin.fields import (
    DirectField,
    FieldConfig,
    NonEvenPointError,
    constant_f_lower,
    constant_field,
    maxwell_residual,
)
from grasspin.grassmann import GrassmannNumber, algebra
from grasspin.polynomials import Polynomial

from conftest import field_corpus


def substitute(poly: Polynomial, point):
    """Direct evaluation of a polynomial at Grassmann arguments (oracle)."""
    alg = point[0].alg
    total = alg.zero()
    for exps, coef in poly.terms.items():
        term = alg.scalar(coef)
        for axis, e in enumerate(exps):
            for _ in range(e):
                term = term * point[axis]
        total = total + term
    return total


def random_even_point(alg, rng):
    comps = []
    even_masks = [m for m in range(1, alg.dim) if alg.degree[m] % 2 == 0]
    for _ in range(4):
        coeffs = np.zeros(alg.dim)
        coeffs[0] = rng.uniform(-2, 2)
        for m in rng.choice(even_masks, size=2, replace=False):
            coeffs[m] = rng.uniform(-0.5, 0.5)
        comps.append(GrassmannNumber(alg, coeffs))
    return comps


class TestFieldTensor:
    def test_zero_potential(self, alg4):
        fld = FieldConfig([Polynomial.zero()] * 4)
        f = fld.field_tensor([0.2, -1.0, 3.0, 0.5])
        assert all(f[m, n].is_zero() for m in range(4) for n in range(4))

    def test_symmetric_gauge_constant_b(self):
        # A^mu = (0, -B x2 / 2, B x1 / 2, 0): covariant A_1 = B x2 / 2, A_2 = -B x1 / 2
        b = 1.7
        fld = FieldConfig(
            [
                Polynomial.zero(),
                Polynomial({(0, 0, 1, 0): b / 2}),
                Polynomial({(0, 1, 0, 0): -b / 2}),
                Polynomial.zero(),
            ]
        )
        f = fld.f_lower_real(np.array([0.4, 1.0, -2.0, 0.7]))
        expected = np.zeros((4, 4))
        expected[1, 2] = -b
        expected[2, 1] = b
        assert np.allclose(f, expected, atol=1e-14)
        assert abs(f[1, 2]) == pytest.approx(b)
        # agrees with the E/B constructor for B along axis 3
        assert np.allclose(f, constant_f_lower([0, 0, 0], [0, 0, b]))

    def test_grassmann_point_matches_substitution(self, alg4):
        rng = np.random.default_rng(3)
        for name, fld in field_corpus():
            point = random_even_point(alg4, rng)
            f = fld.field_tensor(point)
            for m in range(4):
                for n in range(4):
                    want = substitute(fld._f_polys[m][n], point)
                    diff = (f[m, n] - want).max_abs()
                    assert diff < 1e-12, f"{name}[{m}{n}]: {diff}"

    def test_real_point_equals_real_evaluation(self):
        rng = np.random.default_rng(4)
        for name, fld in field_corpus():
            pts = rng.normal(size=(10, 4))
            via_poly = np.array(
                [[[fld._f_polys[m][n].eval(p) for n in range(4)] for m in range(4)]
                 for p in pts]
            )
            assert np.allclose(fld.f_lower_real(pts), via_poly, atol=1e-13), name

    def test_antisymmetry(self, alg4):
        rng = np.random.default_rng(5)
        for name, fld in field_corpus():
            point = random_even_point(alg4, rng)
            f = fld.field_tensor(point)
            for m in range(4):
                for n in range(4):
                    assert (f[m, n] + f[n, m]).is_zero(), name

    def test_linearity_in_potential(self):
        rng = np.random.default_rng(6)
        a_comp = [Polynomial({(1, 0, 1, 0): 0.7, (0, 0, 0, 2): -0.3})] + [Polynomial.zero()] * 3
        b_comp = [Polynomial.zero()] * 2 + [Polynomial({(0, 1, 0, 0): 1.1})] * 2
        c1, c2 = 2.5, -1.25
        combo = FieldConfig(
            [p.scale(c1) + q.scale(c2) for p, q in zip(a_comp, b_comp)]
        )
        fa, fb = FieldConfig(a_comp), FieldConfig(b_comp)
        pts = rng.normal(size=(7, 4))
        assert np.allclose(
            combo.f_lower_real(pts),
            c1 * fa.f_lower_real(pts) + c2 * fb.f_lower_real(pts),
            atol=1e-13,
        )

    def test_non_even_point_rejected(self, alg4):
        fld = constant_field([0, 0, 0], [0, 0, 1.0])
        bad = [alg4.generator(1), alg4.scalar(0), alg4.scalar(0), alg4.scalar(0)]
        with pytest.raises(NonEvenPointError):
            fld.field_tensor(bad)


class TestFieldDerivative:
    def test_constant_field_zero_derivative(self, alg4):
        fld = constant_field([0.4, 0, 0], [0, 0, 2.0])
        df = fld.field_derivative([0.1, 0.2, 0.3, 0.4])
        assert all(df[k, m, n].is_zero() for k in range(4) for m in range(4) for n in range(4))

    def test_linear_potential_zero_derivative(self, alg4):
        fld = FieldConfig(
            [Polynomial({(0, 1, 0, 0): 2.0}), Polynomial({(1, 0, 0, 0): -1.0})]
            + [Polynomial.zero()] * 2
        )
        df = fld.field_derivative([1.0, -2.0, 0.5, 3.0])
        assert all(df[k, m, n].is_zero() for k in range(4) for m in range(4) for n in range(4))

    def test_quadratic_potential_vs_sympy(self):
        """Constant rank-3 derivative of a linear field against sympy."""
        coords = sympy.symbols("y0 y1 y2 y3")
        a_terms = [
            {(0, 0, 1, 0): 0.5, (0, 1, 1, 0): 0.2},
            {(2, 0, 0, 0): -0.4},
            {(0, 1, 0, 0): -0.5, (0, 0, 0, 2): 0.15},
            {},
        ]
        fld = FieldConfig([Polynomial(t) for t in a_terms])
        a_sym = [
            sum(c * sympy.prod([coords[i] ** e[i] for i in range(4)]) for e, c in t.items())
            for t in a_terms
        ]
        signs = [1, -1, -1, -1]
        pt = {coords[i]: v for i, v in enumerate([0.3, -0.7, 1.2, 0.4])}
        df = fld.field_derivative([0.3, -0.7, 1.2, 0.4])
        for k in range(4):
            for m in range(4):
                for n in range(4):
                    f_mn = sympy.diff(a_sym[n], coords[m]) - sympy.diff(a_sym[m], coords[n])
                    want = signs[m] * signs[n] * float(sympy.diff(f_mn, coords[k]).subs(pt))
                    assert df[k, m, n].body == pytest.approx(want, abs=1e-12)
                    assert df[k, m, n].soul.is_zero()


class TestMaxwellResidual:
    def test_potential_fields_closed(self, alg4):
        rng = np.random.default_rng(7)
        for name, fld in field_corpus():
            for _ in range(5):
                point = random_even_point(alg4, rng)
                res = maxwell_residual(fld, point)
                assert max(r.max_abs() for r in res) < 1e-12, name

    def test_constant_direct_tensor_closed(self):
        direct = DirectField({(0, 1): Polynomial.constant(0.8), (1, 2): Polynomial.constant(-1.1)})
        res = maxwell_residual(direct, [0.5, 1.0, -2.0, 3.0])
        assert max(r.max_abs() for r in res) == 0.0

    def test_nonclosed_tensor_detected(self):
        # F_12 = x3 admits no potential: residual (2, 0, 0, 0) by expanding
        # eps^{mu nu 1 2} d_nu F_12 + eps^{mu nu 2 1} d_nu F_21 = 2 eps^{mu 3 1 2}
        direct = DirectField({(1, 2): Polynomial.coordinate(3)})
        res = maxwell_residual(direct, [0.0, 0.0, 0.0, 0.0])
        values = [r.body for r in res]
        assert values == pytest.approx([2.0, 0.0, 0.0, 0.0])
        assert max(abs(v) for v in values) > 0.1
