import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parents[1]))

from src.measurement.linear_model import make_model, momentum_conserving, ozawa, von_neumann  # noqa: E402
from src.measurement.packets import MomentSummary, PacketSpec  # noqa: E402

SIGMA_X0 = 1.0
SIGMA_X0_PROBE = 0.5


@pytest.fixture
def obj():
    """Minimal Gaussian object, σ(x₀) = 1, zero means."""
    return MomentSummary.minimal(0.0, SIGMA_X0)


@pytest.fixture
def probe():
    """Minimal Gaussian probe, σ(X₀) = 0.5, zero means."""
    return MomentSummary.minimal(0.0, SIGMA_X0_PROBE)


@pytest.fixture
def obj_packet():
    return PacketSpec.gaussian(0.0, SIGMA_X0)


@pytest.fixture
def probe_packet():
    return PacketSpec.gaussian(0.0, SIGMA_X0_PROBE)


@pytest.fixture
def identity():
    return make_model(1.0, 0.0, 0.0, 1.0, name="identity")


@pytest.fixture
def catalog_models():
    return [von_neumann(), ozawa(), momentum_conserving(0.5), momentum_conserving(1.0), momentum_conserving(-1.0)]


def random_model(rng: np.random.Generator, conserving: bool):
    b1 = rng.choice((-1.0, 1.0)) * rng.uniform(0.1, 3.0)
    s = rng.choice((-1.0, 1.0))
    if conserving:
        return make_model(b1 + s, 1.0 - b1 - s, b1, 1.0 - b1)
    b2, a1 = rng.uniform(-3.0, 3.0, size=2)
    return make_model(a1, (a1 * b2 - s) / b1, b1, b2)


@pytest.fixture
def random_models():
    rng = np.random.default_rng(2024)
    return [random_model(rng, conserving=k % 2 == 0) for k in range(1000)]
