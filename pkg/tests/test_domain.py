import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from boxwall.domain import (BoxConfig, ValidationError, WaveSample, check_quantum_number,
                            load_box_config, make_box_config, make_momentum_grid,
                            make_position_grid, make_uniform_position_grid)


def test_unit_config_scales():
    cfg = make_box_config(1, 1, 1)
    assert cfg.e0 == pytest.approx(math.pi**2 / 2, rel=1e-15)
    assert cfg.e0 == pytest.approx(4.9348022, abs=1e-7)
    assert cfg.p0 == pytest.approx(math.pi)


def test_length_two_scales_energy_by_quarter():
    assert make_box_config(1, 1, 2).e0 == pytest.approx(1.2337006, abs=1e-7)


@pytest.mark.parametrize("field,args", [("m", (0, 1, 1)), ("hbar", (1, -1, 1)),
                                        ("L", (1, 1, math.inf)), ("m", (math.nan, 1, 1))])
def test_rejects_bad_constants(field, args):
    with pytest.raises(ValidationError) as info:
        make_box_config(*args)
    assert info.value.field == field


def test_config_is_immutable(cfg):
    with pytest.raises(AttributeError):
        cfg.m = 2.0


@pytest.mark.parametrize("n", [0, -1, 1.5, True])
def test_quantum_number_rejects(n):
    with pytest.raises(ValidationError):
        check_quantum_number(n)


def test_config_file_with_override(tmp_path):
    path = tmp_path / "box.cfg"
    path.write_text("# constants\nm = 2.0\nhbar: 0.5\n\nL = 3  # metres-ish\n")
    cfg = load_box_config(path, L=4.0)
    assert (cfg.m, cfg.hbar, cfg.L) == (2.0, 0.5, 4.0)
    path.write_text("mass = 1\n")
    with pytest.raises(ValidationError):
        load_box_config(path)


def test_small_momentum_grid(cfg):
    grid = make_momentum_grid(cfg, 10, 2, 4)
    assert len(grid) == 8
    assert grid.weights.sum() == pytest.approx(20, rel=1e-12)
    assert np.array_equal(np.sort(-grid.nodes), grid.nodes)
    assert grid.is_symmetric


def test_odd_panels_rejected(cfg):
    with pytest.raises(ValidationError, match="even"):
        make_momentum_grid(cfg, 10, 1, 4)
    with pytest.raises(ValidationError):
        make_momentum_grid(cfg, 0, 2, 4)


def test_grid_arrays_are_read_only(cfg):
    grid = make_momentum_grid(cfg, 10, 2, 4)
    with pytest.raises(ValueError):
        grid.nodes[0] = 0.0


@settings(max_examples=40, deadline=None)
@given(order=st.integers(2, 12), half_panels=st.integers(1, 6),
       degree_frac=st.floats(0, 1), P=st.floats(0.1, 50))
def test_gauss_exact_on_polynomials(order, half_panels, degree_frac, P):
    cfg = BoxConfig()
    grid = make_momentum_grid(cfg, P, 2 * half_panels, order)
    degree = int(degree_frac * (2 * order - 1))
    # integrate (p/P)^d exactly: zero for odd d, 2P/(d+1) for even d
    exact = 0.0 if degree % 2 else 2 * P / (degree + 1)
    got = np.sum(grid.weights * (grid.nodes / P) ** degree)
    assert abs(got - exact) <= 1e-12 * 2 * P


@settings(max_examples=30, deadline=None)
@given(P=st.floats(0.01, 1e3), half_panels=st.integers(1, 40), order=st.integers(2, 10))
def test_grid_symmetry_and_total_weight(P, half_panels, order):
    grid = make_momentum_grid(BoxConfig(), P, 2 * half_panels, order)
    assert grid.is_symmetric
    assert np.all(np.diff(grid.nodes) > 0)
    assert np.all(np.abs(grid.nodes) <= P)
    assert abs(grid.weights.sum() - 2 * P) <= 1e-12 * 2 * P


def test_trapezoid_momentum_grid(cfg):
    grid = make_momentum_grid(cfg, 3.0, 4, 5, rule="trapezoid")
    assert len(grid) == 21  # 11 per half, sharing the node at zero
    assert grid.is_symmetric
    assert grid.weights.sum() == pytest.approx(6.0, rel=1e-14)
    assert 0.0 in grid.nodes


def test_position_grid_has_walls_on_panel_edges(cfg):
    grid = make_position_grid(cfg, 10, 4, lower=-0.5, upper=1.5)
    assert grid.covers(0.0, cfg.L)
    assert grid.weights.sum() == pytest.approx(2.0, rel=1e-13)
    # a function with a kink at each wall integrates to machine precision
    f = np.abs(grid.nodes) + np.abs(grid.nodes - 1)
    exact = (0.5**2 / 2 + 1.5**2 / 2) * 2  # each of |x| and |x - 1| gives 5/4
    assert np.sum(grid.weights * f) == pytest.approx(exact, rel=1e-13)


def test_position_grid_bounds(cfg):
    with pytest.raises(ValidationError):
        make_position_grid(cfg, 4, 4, lower=0.1)
    with pytest.raises(ValidationError):
        make_position_grid(cfg, 4, 4, upper=0.5)


def test_uniform_grid_spacing():
    grid = make_uniform_position_grid(-0.5, 1.5, 0.01)
    assert len(grid) == 201
    assert np.allclose(np.diff(grid.nodes), 0.01)


def test_wave_sample_length_checked(cfg):
    grid = make_momentum_grid(cfg, 1, 2, 2)
    with pytest.raises(ValidationError):
        WaveSample(grid, np.zeros(3))
    s = WaveSample(grid, np.ones(4))
    assert s.kind == "momentum"
    assert s.norm == pytest.approx(math.sqrt(2))
    assert s.normalized().norm == pytest.approx(1.0)
