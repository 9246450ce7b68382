import numpy as np
import pytest

from ouirrev.model import LinearModel, build_model


def rotational_model(omega: float) -> LinearModel:
    """Irreversible family B = [[1, w], [-w, 1]], Gamma = I; epr = 2 w^2."""
    return build_model([[1.0, omega], [-omega, 1.0]], np.eye(2))


def random_reversible_model(rng: np.random.Generator, n: int) -> LinearModel:
    """B = A K with K random SPD and Gamma random nonsingular, so A^{-1} B = K.

    Redraws until Gamma is comfortably conditioned, keeping the acceptance
    corpus away from accidental near-singularity.
    """
    while True:
        gamma = rng.standard_normal((n, n))
        if np.linalg.cond(gamma) < 20.0:
            break
    q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    k = q @ np.diag(rng.uniform(0.3, 3.0, size=n)) @ q.T
    k = 0.5 * (k + k.T)
    a = gamma @ gamma.T
    return build_model(a @ k, gamma)


@pytest.fixture
def rot1() -> LinearModel:
    return rotational_model(1.0)


@pytest.fixture
def reversible_2d() -> LinearModel:
    return build_model([[2.0, 1.0], [1.0, 2.0]], np.eye(2))


@pytest.fixture
def reversible_diag() -> LinearModel:
    return build_model(np.diag([1.0, 3.0]), np.diag([1.0, 1.3]))


@pytest.fixture
def sweeping_model() -> LinearModel:
    return build_model(np.diag([-1.0, 1.0]), np.eye(2))


@pytest.fixture
def scalar_model() -> LinearModel:
    return build_model([[1.0]], [[1.0]])


def thermo_corpus() -> list[tuple[LinearModel, np.ndarray]]:
    """Non-sweeping models with start points for the transient balance checks."""
    return [
        (build_model([[2.0, 1.0], [1.0, 2.0]], np.eye(2)), np.array([2.0, 0.0])),
        (rotational_model(1.0), np.array([2.0, 0.0])),
        (build_model([[3.0, 1.0], [0.0, 2.0]], np.diag([1.0, 0.8])), np.array([1.0, 1.0])),
        (build_model([[1.5]], [[1.0]]), np.array([2.0])),
    ]
