"""Algebra arithmetic against an independent dict-based reference product."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from grasspin.grassmann import (
    AlgebraMismatchError,
    GrassmannNumber,
    NotInvertibleError,
    Parity,
    ZeroLowestTermError,
    algebra,
)


# ----------------------------------------------------------------------
# Reference implementation: subsets as sorted index tuples, signs by
# explicit transposition count while merging.
# ----------------------------------------------------------------------


def ref_mul(a: dict, b: dict) -> dict:
    out: dict[tuple, float] = {}
    for sa, ca in a.items():
        for sb, cb in b.items():
            if set(sa) & set(sb):
                continue
            merged = list(sa) + list(sb)
            sign = 1
            # bubble sort, counting swaps
            for i in range(len(merged)):
                for j in range(len(merged) - 1 - i):
                    if merged[j] > merged[j + 1]:
                        merged[j], merged[j + 1] = merged[j + 1], merged[j]
                        sign = -sign
            key = tuple(merged)
            out[key] = out.get(key, 0.0) + sign * ca * cb
    return {k: v for k, v in out.items() if v != 0.0}


def to_dict(x: GrassmannNumber) -> dict:
    out = {}
    for mask, val in x.terms(tol=0.0).items():
        subset = tuple(i + 1 for i in range(x.alg.n) if mask >> i & 1)
        out[subset] = val
    return out


def from_dict(alg, d: dict) -> GrassmannNumber:
    return alg.from_terms({k: v for k, v in d.items()})


def random_number(alg, rng, parity=None):
    coeffs = rng.normal(size=alg.dim)
    if parity == "even":
        coeffs[~alg.even_mask] = 0.0
    elif parity == "odd":
        coeffs[alg.even_mask] = 0.0
    return GrassmannNumber(alg, coeffs)


# ----------------------------------------------------------------------
# Stated examples
# ----------------------------------------------------------------------


class TestExamples:
    def test_add_cancellation(self, alg4):
        t1 = alg4.generator(1)
        assert (1 + t1) + (2 - t1) == 3.0

    def test_add_identity(self, alg4):
        a = alg4.from_terms({(): 1.5, (1, 3): -2.0})
        assert a + alg4.zero() == a

    def test_add_doubling(self, alg4):
        t12 = alg4.generator(1) * alg4.generator(2)
        assert t12 + t12 == 2.0 * t12

    def test_anticommutation(self, alg4):
        t1, t2 = alg4.generator(1), alg4.generator(2)
        assert t1 * t2 == -(t2 * t1)

    def test_nilpotency(self, alg4):
        t1 = alg4.generator(1)
        assert (t1 * t1).is_zero()

    def test_product_expansion(self, alg4):
        # (2 + t1 t2)(3 + t3 t4), expected value from the reference product
        a = alg4.from_terms({(): 2.0, (1, 2): 1.0})
        b = alg4.from_terms({(): 3.0, (3, 4): 1.0})
        expected = from_dict(alg4, ref_mul(to_dict(a), to_dict(b)))
        got = a * b
        assert got == expected
        assert got == alg4.from_terms({(): 6.0, (1, 2): 3.0, (3, 4): 2.0, (1, 2, 3, 4): 1.0})

    def test_lowest_term_scalar(self, alg4):
        a = 3 + alg4.generator(1) * alg4.generator(2)
        k, part = a.lowest_term()
        assert k == 0 and part == 3.0

    def test_lowest_term_odd(self, alg4):
        t1, t2, t3 = (alg4.generator(i) for i in (1, 2, 3))
        k, part = (t1 + t1 * t2 * t3).lowest_term()
        assert k == 1 and part == t1

    def test_lowest_term_zero_errors(self, alg4):
        with pytest.raises(ZeroLowestTermError):
            alg4.zero().lowest_term()

    def test_grade_projection(self, alg4):
        t1, t2 = alg4.generator(1), alg4.generator(2)
        a = 1 + t1 + t1 * t2
        assert a.grade(1) == t1
        assert a.grade(0) == 1.0
        assert (t1 * t2).grade(0) == alg4.zero()

    def test_grade_completeness(self, alg4):
        rng = np.random.default_rng(5)
        a = random_number(alg4, rng)
        total = alg4.zero()
        for k in range(alg4.n + 1):
            total = total + a.grade(k)
        assert total == a

    def test_invert_scalar(self, alg4):
        assert alg4.scalar(2.0).inv() == 0.5

    def test_invert_even(self, alg4):
        t1, t2 = alg4.generator(1), alg4.generator(2)
        a = 1 + t1 * t2
        assert a.inv() == 1 - t1 * t2
        assert a * a.inv() == 1.0

    def test_invert_zero_body(self, alg4):
        t12 = alg4.generator(1) * alg4.generator(2)
        with pytest.raises(NotInvertibleError):
            t12.inv()

    def test_invert_odd_rejected(self, alg4):
        with pytest.raises(NotInvertibleError):
            (1 + alg4.generator(1)).inv()

    def test_parity_classification(self, alg4):
        t = [alg4.generator(i) for i in (1, 2, 3, 4)]
        assert (1 + t[0] * t[1]).parity() is Parity.EVEN
        assert (t[0] + t[1] * t[2] * t[3]).parity() is Parity.ODD
        assert (1 + t[0]).parity() is Parity.MIXED
        assert alg4.zero().parity() is Parity.ZERO

    def test_mismatched_algebras(self, alg4, alg6):
        with pytest.raises(AlgebraMismatchError):
            alg4.generator(1) + alg6.generator(1)
        with pytest.raises(AlgebraMismatchError):
            alg4.generator(1) * alg6.generator(1)


# ----------------------------------------------------------------------
# Laws on random elements
# ----------------------------------------------------------------------


coeff_lists = st.lists(
    st.floats(min_value=-10, max_value=10, allow_nan=False), min_size=16, max_size=16
)


@settings(max_examples=60, deadline=None)
@given(coeff_lists, coeff_lists)
def test_mul_matches_reference(ca, cb):
    alg = algebra(4)
    a = GrassmannNumber(alg, np.array(ca))
    b = GrassmannNumber(alg, np.array(cb))
    expected = from_dict(alg, ref_mul(to_dict(a), to_dict(b)))
    assert np.max(np.abs((a * b).coeffs - expected.coeffs)) < 1e-9


@settings(max_examples=40, deadline=None)
@given(coeff_lists, coeff_lists, coeff_lists)
def test_associativity_and_distributivity(ca, cb, cc):
    alg = algebra(4)
    a, b, c = (GrassmannNumber(alg, np.array(v)) for v in (ca, cb, cc))
    scale = max(1.0, a.max_abs() * b.max_abs() * c.max_abs())
    assert ((a * b) * c - a * (b * c)).max_abs() <= 1e-12 * scale
    assert ((a + b) * c - (a * c + b * c)).max_abs() <= 1e-12 * scale


@pytest.mark.parametrize("n", [4, 6])
@pytest.mark.parametrize("pa,pb", [("even", "even"), ("even", "odd"), ("odd", "odd")])
def test_supercommutativity(n, pa, pb):
    alg = algebra(n)
    rng = np.random.default_rng(n * 17 + len(pa))
    sign = -1.0 if (pa == "odd" and pb == "odd") else 1.0
    for _ in range(50):
        a = random_number(alg, rng, pa)
        b = random_number(alg, rng, pb)
        scale = max(1.0, a.max_abs() * b.max_abs())
        assert (a * b - sign * (b * a)).max_abs() <= 1e-14 * scale


@pytest.mark.parametrize("n", [2, 4, 6])
def test_soul_nilpotency_exact(n):
    alg = algebra(n)
    rng = np.random.default_rng(n)
    for _ in range(20):
        a = random_number(alg, rng)
        soul = a.soul
        power = alg.scalar(1.0)
        for _ in range(n + 1):
            power = power * soul
        assert np.all(power.coeffs == 0.0)


def test_invert_even_roundtrip(alg4, alg6):
    for alg in (alg4, alg6):
        rng = np.random.default_rng(alg.n)
        for _ in range(100):
            a = random_number(alg, rng, "even")
            while abs(a.body) <= 0.1:
                a = random_number(alg, rng, "even")
            assert (a * a.inv() - 1.0).max_abs() < 1e-12


def test_lowest_term_degree_inequality(alg4):
    rng = np.random.default_rng(11)
    for _ in range(200):
        a = random_number(alg4, rng)
        b = random_number(alg4, rng)
        # random sparsification to vary the lowest degrees
        a = GrassmannNumber(alg4, np.where(rng.random(alg4.dim) < 0.5, 0.0, a.coeffs))
        b = GrassmannNumber(alg4, np.where(rng.random(alg4.dim) < 0.5, 0.0, b.coeffs))
        if a.is_zero() or b.is_zero():
            continue
        ka, pa = a.lowest_term()
        kb, pb = b.lowest_term()
        prod = a * b
        if prod.is_zero():
            continue
        kp, _ = prod.lowest_term()
        assert kp >= ka + kb
        if not (pa * pb).is_zero():
            assert kp == ka + kb


def test_pretty_repr(alg4):
    a = alg4.from_terms({(): 3.0, (1, 2): 2.0})
    assert "θ1θ2" in repr(a)
