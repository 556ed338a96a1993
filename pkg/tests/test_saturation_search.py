import pytest

from src.errors import ConfigError
from src.verification.saturation_search import (
    HIGHS, LOWS, PENALTY, evaluate_individual, model_from_vector, search_min_slack, states_from_vector,
)


def test_decoded_models_are_valid():
    vec = [0.8, 1.5, -0.4, -0.3, 0.0, -0.7]
    conserving = model_from_vector(vec, "conserving")
    assert conserving.conserves_momentum
    assert conserving.gamma == pytest.approx(-1.0)
    general = model_from_vector(vec, "general")
    assert (general.beta1, general.beta2, general.alpha1) == (0.8, 1.5, -0.4)
    assert abs(general.gamma) == pytest.approx(1.0)
    with pytest.raises(ConfigError):
        model_from_vector(vec, "harmonic")


def test_states_are_minimal_gaussians():
    obj, probe = states_from_vector([1.0, 0.0, 0.0, 0.0, 0.0, -0.5])
    assert obj.sigma_x == pytest.approx(1.0)
    assert probe.is_physical()


def test_out_of_box_genes_are_penalised():
    inside = [0.5 * (lo + hi) for lo, hi in zip(LOWS, HIGHS)]
    assert evaluate_individual(inside, "64", "conserving")[0] < PENALTY
    outside = list(inside)
    outside[0] = 5.0
    assert evaluate_individual(outside, "64", "conserving") == (PENALTY,)


def test_search_does_not_beat_relation_64():
    result = search_min_slack("64", "conserving", seed=1, pop_size=20, generations=10)
    assert result.slack >= -1e-12
    assert result.model is not None
    d = result.to_dict()
    assert d["relation"] == "64" and not d["violates"]
    assert len(d["coefficients"]) == 4
    assert len(result.logbook) == 11


def test_search_finds_ozawa_products_below_the_bound():
    result = search_min_slack("ozawa", "general", seed=0, pop_size=30, generations=15)
    assert result.slack < 0.0
    assert result.to_dict()["violates"]


def test_unknown_relation():
    with pytest.raises(ConfigError):
        search_min_slack("70")
