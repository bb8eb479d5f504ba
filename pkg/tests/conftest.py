import numpy as np
import pytest

from grasspin import FieldConfig, ModelParams, Polynomial, SuperState, algebra, constant_field


@pytest.fixture(scope="session")
def alg4():
    return algebra(4)


@pytest.fixture(scope="session")
def alg6():
    return algebra(6)


@pytest.fixture
def params():
    return ModelParams(mass=1.0, charge=1.0, mu_prime=1.2)


@pytest.fixture
def params_no_anomaly():
    return ModelParams(mass=1.0, charge=1.0, mu_prime=1.0)


@pytest.fixture
def b_field():
    """Uniform magnetic field of unit strength along axis 3."""
    return constant_field([0.0, 0.0, 0.0], [0.0, 0.0, 1.0])


def gradient_b_field(strength: float = 0.05) -> FieldConfig:
    """B3(x) = 1 + strength * x2 from a quadratic potential."""
    g = strength
    return FieldConfig(
        [
            Polynomial.zero(),
            Polynomial({(0, 0, 1, 0): 0.5, (0, 0, 2, 0): g / 4.0}),
            Polynomial({(0, 1, 0, 0): -0.5, (0, 1, 1, 0): -g / 2.0}),
            Polynomial.zero(),
        ]
    )


@pytest.fixture
def linear_field():
    return gradient_b_field()


def field_corpus() -> list[tuple[str, FieldConfig]]:
    """Potential-derived backgrounds used by randomized identities."""
    rng = np.random.default_rng(2024)
    cubic = []
    for _ in range(4):
        terms = {}
        for _ in range(5):
            exps = tuple(int(e) for e in rng.integers(0, 2, size=4))
            if sum(exps) > 3:
                continue
            terms[exps] = terms.get(exps, 0.0) + float(rng.normal())
        cubic.append(Polynomial(terms))
    return [
        ("zero", FieldConfig([Polynomial.zero()] * 4)),
        ("constant_b", constant_field([0, 0, 0], [0, 0, 1.0])),
        ("constant_eb", constant_field([0.3, -0.1, 0.2], [0.5, 0.2, 1.0])),
        ("gradient_b", gradient_b_field()),
        ("random_cubic", FieldConfig(cubic)),
    ]


def boosted_velocity(gamma: float = 2.0) -> np.ndarray:
    return np.array([gamma, np.sqrt(gamma * gamma - 1.0), 0.0, 0.0])


def standard_state(alg, gamma: float = 2.0) -> SuperState:
    """gamma-boost along axis 1, spin generators along axes 2 and 3."""
    c = np.array([[0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0]])
    return SuperState.from_real(np.zeros(4), boosted_velocity(gamma), c, alg)
