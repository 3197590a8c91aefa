"""Acceptance suite: one test per criterion, at the stated tolerances.

Run with ``pytest tests/test_acceptance.py -v``; the terminal summary lists
PASS/FAIL per criterion.  Units are hbar = m = L = 1 throughout.
"""

import math

import numpy as np
import pytest

from boxwall import analytic, cli, moments, momsolver, transform
from boxwall import mollifier as mol
from boxwall.analytic import PhiForm
from boxwall.domain import BoxConfig, make_momentum_grid, make_position_grid

CFG = BoxConfig(1.0, 1.0, 1.0)


def test_criterion_1_analytic_spectrum():
    for n in range(1, 11):
        exact = math.pi**2 * n**2 / 2
        assert abs(analytic.energy(n, CFG) - exact) <= 1e-12 * exact


def test_criterion_2_form_equivalence():
    p = np.linspace(-40 * CFG.p0, 40 * CFG.p0, 20_001)
    for n in range(1, 9):
        outside = ~analytic.near_removable_point(p, n, CFG)
        a = analytic.phi(p[outside], n, CFG, form=PhiForm.CLOSED_RATIONAL)
        b = analytic.phi(p[outside], n, CFG, form=PhiForm.SINC_PRODUCT)
        assert np.max(np.abs(a - b)) <= 1e-12
        for q in (n * CFG.p0, -n * CFG.p0):
            assert abs(analytic.mom_density(q, n, CFG) - 1 / (4 * math.pi)) <= 1e-9


def test_criterion_3_transform_oracle():
    xg = make_position_grid(CFG, 250, 8)
    assert len(xg) == 2000
    target = make_momentum_grid(CFG, 20 * CFG.p0, 40, 8)
    for n in range(1, 6):
        got = transform.fourier_forward(analytic.sample("u_box", xg, n, CFG), target, CFG)
        exact = analytic.phi(target.nodes, n, CFG)
        assert transform.rms_difference(got.values, exact, target) <= 1e-8


def test_criterion_4_integral_equation_residual():
    def residual(cutoff_p0, panels, n):
        op = momsolver.build_operator(make_momentum_grid(CFG, cutoff_p0 * CFG.p0, panels, 8), CFG)
        return momsolver.oracle_residual(op, n)

    base = {n: residual(60, 100, n) for n in (1, 2, 3)}
    more_p = {n: residual(120, 200, n) for n in (1, 2, 3)}
    more_n = {n: residual(60, 150, n) for n in (1, 2, 3)}
    print("residual at P=60p0, N=800:", base)
    assert all(more_p[n] < base[n] for n in base), "residual must fall when P grows"
    assert all(more_n[n] <= base[n] * (1 + 1e-4) for n in base), "residual must not grow with N"
    assert all(base[n] <= 5e-3 for n in base), f"residual bound 5e-3 missed: {base}"


def test_criterion_5_eigensolve_and_matching(reference_solve):
    _, _, matched = reference_solve
    for n in range(1, 6):
        mode = matched[n]
        assert abs(mode.eigenvalue.real - mode.energy) / mode.energy <= 1e-3
        assert abs(mode.eigenvalue.imag) <= 1e-4 * mode.energy
        assert mode.overlap >= 0.999


def test_criterion_6_moments():
    m2 = moments.truncated_moment(1, 1, 200 * CFG.p0, CFG)
    assert abs(m2 - math.pi**2) <= 5e-3 * math.pi**2
    report = moments.classify_moment(1, 2, [c * CFG.p0 for c in (50, 100, 200, 400)], CFG)
    assert report.verdict == "diverges"
    assert abs(report.fit.coefficient - 4 * math.pi) <= 0.02 * 4 * math.pi
    assert abs(moments.momentum_moment(1, 1, 200 * CFG.p0, CFG)) <= 1e-13


def test_criterion_7_orthonormality():
    gram = analytic.gram_matrix(8, CFG, make_position_grid(CFG, 16, 16))
    off = gram - np.diag(np.diag(gram))
    assert np.max(np.abs(off)) <= 1e-10
    assert np.max(np.abs(np.diag(gram) - 1)) <= 1e-10


EPS = [CFG.L / 50, CFG.L / 100, CFG.L / 200]


def test_criterion_8a_interior_weak_residuals_decrease():
    report = mol.run_verification(CFG, [1, 2], EPS)
    for n in (1, 2):
        for variant in ("HM", "HMprime"):
            assert report.interior_strictly_decreasing(n, variant), (n, variant)


def test_criterion_8b_wall_difference_decreases():
    report = mol.run_equivalence(CFG, [1, 2], EPS)
    for n in (1, 2):
        for tid in ("wall_left", "wall_right"):
            print(f"n={n} {tid}:", report.series(n, tid))
    assert report.decreasing(1, "wall") and report.decreasing(2, "wall")


def test_criterion_9_under_resolution_detected(tmp_path, capsys):
    assert len(make_momentum_grid(CFG, 4 * CFG.p0, 4, 4)) == 16
    with pytest.raises(momsolver.ModeNotResolved, match="mode not resolved"):
        momsolver.solve_box_modes(CFG, 5, cutoff_p0=4, panels=4, order=4)
    code = cli.main(["spectrum", "--n-max", "5", "--cutoff-p0", "4", "--panels", "4",
                     "--order", "4", "--out-dir", str(tmp_path)])
    assert code == cli.EXIT_NUMERICAL
    assert "mode not resolved" in capsys.readouterr().err
