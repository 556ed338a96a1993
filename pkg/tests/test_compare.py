import math

import pytest

from src.errors import DomainTooSmall, Unmeasurable
from src.measurement.linear_model import make_model, momentum_conserving, ozawa, von_neumann
from src.measurement.packets import PacketSpec
from src.oracle.compare import ORACLE_RTOL, compare, relative_gap
from src.oracle.grid import GridSpec

MODELS = [momentum_conserving(g) for g in (-1.0, -0.5, 0.5, 1.0)] + [von_neumann(), ozawa(),
                                                                      make_model(1.0, 0.5, 2.0, 2.0)]
WIDTHS = [(1.0, 0.5), (0.7, 0.7), (0.5, 1.0)]


@pytest.mark.parametrize("sigmas", WIDTHS, ids=lambda s: f"{s[0]}-{s[1]}")
@pytest.mark.parametrize("model", MODELS, ids=lambda m: m.name)
def test_oracle_agrees_with_closed_forms(model, sigmas):
    obj = PacketSpec.gaussian(0.0, sigmas[0])
    probe = PacketSpec.gaussian(0.0, sigmas[1])
    result = compare(model, obj, probe, n=512)
    assert result.passed(), result.to_frame().to_string()
    assert result.max_gap <= ORACLE_RTOL


def test_oracle_with_offset_states():
    obj = PacketSpec.gaussian(0.5, 1.0, mean_p=0.3)
    probe = PacketSpec.gaussian(-0.2, 0.5, mean_p=0.1)
    result = compare(momentum_conserving(1.0), obj, probe, n=512)
    assert result.passed(), result.to_frame().to_string()
    assert abs(result.value("estimate_bias")) < 1e-9


def test_comparison_accessors(obj_packet, probe_packet, capsys):
    result = compare(ozawa(), obj_packet, probe_packet, grid=GridSpec.symmetric(12.0, 512))
    assert result.value("eps_xt", side="analytic") == 0.5
    assert result.value("dp_dis") == pytest.approx(math.sqrt(1.25), rel=1e-8)
    with pytest.raises(KeyError):
        result.value("nothing")
    frame = result.to_frame()
    assert list(frame.columns) == ["quantity", "analytic", "oracle", "gap"]
    assert "eps_ozawa_x0" in set(frame["quantity"])
    result.print_report()
    assert "PASS" in capsys.readouterr().out


def test_narrow_domain_fails(obj_packet, probe_packet):
    with pytest.raises(DomainTooSmall):
        compare(von_neumann(), obj_packet, probe_packet, grid=GridSpec.symmetric(3.0, 512))


def test_unmeasurable_model(obj_packet, probe_packet, identity):
    with pytest.raises(Unmeasurable):
        compare(identity, obj_packet, probe_packet, n=512)


def test_relative_gap():
    assert relative_gap(1.1, 1.0) == pytest.approx(0.1)
    assert relative_gap(1e-14, 0.0) == 1e-14
