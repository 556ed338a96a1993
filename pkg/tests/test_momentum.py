import math

import numpy as np
import pytest

from src.errors import AliasingDetected
from src.measurement import gaussian
from src.measurement.linear_model import momentum_conserving, von_neumann
from src.measurement.packets import MomentSummary, PacketSpec
from src.oracle.grid import GridSpec, prepare
from src.oracle.momentum import (
    disturbance_from_state, dp_dis_from_packets, momentum_amplitude, momentum_density, momentum_moments,
)

X = GridSpec.symmetric(12.0, 512).x


def test_gaussian_momentum_width():
    psi = PacketSpec.gaussian(0.0, 0.5).amplitude(X)
    mean, second = momentum_moments(X, psi)
    assert mean == pytest.approx(0.0, abs=1e-12)
    assert second == pytest.approx(1.0, abs=1e-8)


def test_momentum_offset_and_hbar():
    psi = PacketSpec.gaussian(1.0, 0.5, mean_p=1.5, hbar=0.5).amplitude(X)
    mean, second = momentum_moments(X, psi, hbar=0.5)
    assert mean == pytest.approx(1.5, abs=1e-8)
    assert second == pytest.approx(0.25 + 2.25, abs=1e-8)


def test_parseval():
    psi = PacketSpec.gaussian(0.3, 0.8, mean_p=-0.7).amplitude(X)
    p, rho, dp = momentum_density(X, psi)
    assert np.all(np.diff(p) > 0)
    assert np.sum(rho) * dp == pytest.approx(np.sum(np.abs(psi) ** 2) * (X[1] - X[0]), rel=1e-12)


def test_amplitude_matches_closed_form():
    # φ̃ of a centred minimal Gaussian is a real Gaussian of width ħ/(2σ)
    psi = PacketSpec.gaussian(0.0, 1.0).amplitude(X)
    p, phi = momentum_amplitude(X, psi)
    expected = PacketSpec.gaussian(0.0, 0.5).amplitude(p)
    np.testing.assert_allclose(phi, expected, atol=1e-10)


def test_undersampled_packet_raises():
    coarse = GridSpec.symmetric(12.0, 64).x
    with pytest.raises(AliasingDetected):
        momentum_density(coarse, PacketSpec.gaussian(0.0, 0.05).amplitude(coarse))


@pytest.mark.parametrize("model, expected", [
    (momentum_conserving(1.0), math.sqrt(1.25)),
    (von_neumann(), 1.0),
])
def test_disturbance_on_the_grid(model, expected, obj_packet, probe_packet):
    state0 = prepare(obj_packet, probe_packet, GridSpec.symmetric(12.0, 512))
    assert dp_dis_from_packets(state0, model) == pytest.approx(expected, rel=1e-8)
    assert disturbance_from_state(state0, model) == pytest.approx(expected, rel=1e-8)


def test_disturbance_with_mean_momenta():
    obj = PacketSpec.gaussian(0.0, 1.0, mean_p=0.3)
    probe = PacketSpec.gaussian(0.0, 0.5, mean_p=-0.4)
    state0 = prepare(obj, probe, GridSpec.symmetric(12.0, 512))
    model = momentum_conserving(0.5)
    analytic = gaussian.dp_dis(model, MomentSummary.minimal(0.0, 1.0, 0.3), MomentSummary.minimal(0.0, 0.5, -0.4))
    assert dp_dis_from_packets(state0, model) == pytest.approx(analytic, rel=1e-8)
    assert disturbance_from_state(state0, model) == pytest.approx(analytic, rel=1e-8)
