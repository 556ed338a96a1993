import logging

import numpy as np
import pytest

from src.errors import PartitionGap, Unmeasurable
from src.measurement.linear_model import momentum_conserving, ozawa, von_neumann
from src.measurement.packets import PacketSpec
from src.oracle.grid import GridSpec
from src.oracle.povm import make_bins, povm, povm_report, readout_interval


@pytest.fixture
def vn_grid(obj_packet, probe_packet):
    return GridSpec.covering(von_neumann(), obj_packet, probe_packet, n_obj=128, n_probe=128)


def test_make_bins():
    bins = make_bins(-3.0, 3.0, 16)
    assert len(bins) == 16
    assert bins[0] == (-np.inf, -3.0)
    assert bins[-1] == (3.0, np.inf)
    assert make_bins(0.0, 1.0, 1) == [(-np.inf, np.inf)]
    with pytest.raises(ValueError):
        make_bins(0.0, 1.0, 0)


def test_von_neumann_povm(obj_packet, probe_packet, vn_grid, caplog):
    with caplog.at_level(logging.INFO):
        report = povm_report(von_neumann(), obj_packet, probe_packet, make_bins(-3.0, 3.0, 16), vn_grid)
    assert report.completeness_residual < 1e-12
    assert report.min_eigenvalue >= -1e-15
    assert report.hermitian_error == 0.0
    assert report.probability_residual < 1e-7
    assert sum(report.probabilities) == pytest.approx(1.0, abs=1e-10)
    assert "completeness" in caplog.text
    d = report.to_dict()
    assert len(d["bins"]) == 16 and d["probability_residual"] == report.probability_residual


def test_single_bin_is_identity(probe_packet, vn_grid):
    (element,) = povm(von_neumann(), probe_packet, make_bins(0.0, 0.0, 1), vn_grid)
    np.testing.assert_allclose(element.operator, np.eye(vn_grid.n_obj), atol=1e-15)


def test_sharp_readout_gives_projectors(obj_packet, probe_packet):
    grid = GridSpec.covering(ozawa(), obj_packet, probe_packet, n_obj=128, n_probe=128)
    elements = povm(ozawa(), probe_packet, make_bins(-2.0, 2.0, 5), grid)
    for e in elements:
        assert set(np.unique(e.weights)) <= {0.0, 1.0}
        np.testing.assert_allclose(e.operator @ e.operator, e.operator)
    np.testing.assert_allclose(sum(e.operator for e in elements), np.eye(grid.n_obj))


def test_momentum_conserving_povm(obj_packet, probe_packet):
    model = momentum_conserving(1.0)
    grid = GridSpec.covering(model, obj_packet, probe_packet, n_obj=128, n_probe=512)
    report = povm_report(model, obj_packet, probe_packet, make_bins(-3.0, 3.0, 8), grid)
    assert report.completeness_residual < 1e-12
    assert report.probability_residual < 1e-7


def test_tabulated_probe(obj_packet, vn_grid):
    x = np.linspace(-8.0, 8.0, 2048)
    probe = PacketSpec.tabulated(x, PacketSpec.gaussian(0.0, 0.5).amplitude(x))
    report = povm_report(von_neumann(), obj_packet, probe, make_bins(-3.0, 3.0, 16), vn_grid)
    assert report.completeness_residual < 1e-9
    assert report.min_eigenvalue >= -1e-12
    assert report.probability_residual < 1e-4


def test_partition_must_cover_the_line(probe_packet, vn_grid):
    with pytest.raises(PartitionGap):
        povm(von_neumann(), probe_packet, [(-np.inf, 0.0), (0.1, np.inf)], vn_grid)
    with pytest.raises(PartitionGap):
        povm(von_neumann(), probe_packet, [(-5.0, 0.0), (0.0, np.inf)], vn_grid)
    with pytest.raises(PartitionGap):
        povm(von_neumann(), probe_packet, [], vn_grid)


def test_unmeasurable_model_has_no_povm(probe_packet, vn_grid, identity):
    with pytest.raises(Unmeasurable):
        povm(identity, probe_packet, make_bins(-1.0, 1.0, 4), vn_grid)


def test_readout_interval_orders_endpoints():
    assert readout_interval(von_neumann(), -1.0, 2.0, 0.5) == (-0.5, 2.5)
    assert readout_interval(momentum_conserving(1.0), -1.0, 2.0, 0.0) == (-2.0, 1.0)
