"""Gaussian-mollified position-space form of the wall-corrected Hamiltonian.

The step and delta functions at the walls are replaced by an erf step and a
Gaussian of width eps; the operator

    H v = -hbar^2/(2m) v'' + hbar^2/(2m) c(x) v'

is discretized with second-order central differences on a uniform grid.  For
variant HM the wall coefficient is [delta(x) - delta(x-L)] / [Theta(x) - Theta(x-L)],
for HM_PRIME the denominator is dropped.  Pointwise products of distributions
have no meaning at the walls, so every check here pairs the operator with a
smooth test function.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse
from scipy.special import erfc

from . import analytic
from .domain import (BoxConfig, PositionGrid, ValidationError, check_quantum_number,
                     make_uniform_position_grid)

DENOMINATOR_FLOOR = 1e-12
MAX_STEP_RATIO = 1.0 / 8.0
MASS_TOLERANCE = 1e-10
FWHM_TO_SIGMA = 1.0 / (2.0 * math.sqrt(2.0 * math.log(2.0)))


def theta_eps(x, eps: float):
    """Smoothed step 0.5 (1 + erf(x / (eps sqrt 2)))."""
    return 0.5 * erfc(-np.asarray(x, dtype=float) / (eps * math.sqrt(2.0)))


def delta_eps(x, eps: float):
    """Unit-mass Gaussian of standard deviation eps; the derivative of theta_eps."""
    x = np.asarray(x, dtype=float)
    return np.exp(-0.5 * (x / eps) ** 2) / (eps * math.sqrt(2.0 * math.pi))


def window_eps(x, eps: float, L: float):
    """theta_eps(x) - theta_eps(x - L) without cancellation far from the box."""
    x = np.asarray(x, dtype=float)
    s = eps * math.sqrt(2.0)
    left = 0.5 * (erfc(-x / s) - erfc(-(x - L) / s))
    right = 0.5 * (erfc((x - L) / s) - erfc(x / s))
    return np.where(x < 0.5 * L, left, right)


class OperatorVariant(enum.Enum):
    HM = "HM"
    HM_PRIME = "HMprime"


@dataclass(frozen=True)
class MollifierParams:
    eps: float
    h: float
    lower: float
    upper: float

    @property
    def grid(self) -> PositionGrid:
        return make_uniform_position_grid(self.lower, self.upper, self.h)


def make_mollifier_params(cfg: BoxConfig, eps: float, h: float | None = None,
                          lower: float | None = None, upper: float | None = None) -> MollifierParams:
    """Validated parameters; by default h = eps/8 on [-L/2, 3L/2]."""
    if not eps > 0:
        raise ValidationError("eps", f"must be > 0, got {eps!r}")
    h = eps * MAX_STEP_RATIO if h is None else float(h)
    if not h > 0:
        raise ValidationError("h", f"must be > 0, got {h!r}")
    if h > eps * MAX_STEP_RATIO * (1 + 1e-12):
        raise ValidationError("h", f"grid too coarse: h = {h:g} > eps/8 = {eps / 8:g}")
    lower = -0.5 * cfg.L if lower is None else float(lower)
    upper = 1.5 * cfg.L if upper is None else float(upper)
    if lower > -4 * eps or upper < cfg.L + 4 * eps:
        raise ValidationError("grid", "grid must cover [-4 eps, L + 4 eps]")
    params = MollifierParams(float(eps), h, lower, upper)
    grid = params.grid
    for wall in (0.0, cfg.L):
        mass = float(np.sum(grid.weights * delta_eps(grid.nodes - wall, eps)))
        if abs(mass - 1.0) > MASS_TOLERANCE:
            raise ValidationError("grid", f"mollifier mass at wall {wall} is {mass!r}, not 1")
    return params


@dataclass(frozen=True, eq=False)
class MollifiedOperator:
    params: MollifierParams
    variant: OperatorVariant
    grid: PositionGrid
    coefficient: np.ndarray
    matrix: scipy.sparse.csr_matrix
    clamped: int  # nodes where the HM denominator hit the floor

    def __matmul__(self, values):
        return self.matrix @ values


def wall_coefficient(x, eps: float, cfg: BoxConfig, variant: OperatorVariant):
    """Coefficient of d/dx; returns (values, number of clamped nodes)."""
    num = delta_eps(x, eps) - delta_eps(np.asarray(x) - cfg.L, eps)
    if OperatorVariant(variant) is OperatorVariant.HM_PRIME:
        return num, 0
    den = window_eps(x, eps, cfg.L)
    clamped = den < DENOMINATOR_FLOOR
    return num / np.where(clamped, DENOMINATOR_FLOOR, den), int(clamped.sum())


def build_operator(params: MollifierParams, variant: OperatorVariant, cfg: BoxConfig) -> MollifiedOperator:
    """Tridiagonal finite-difference matrix of the mollified operator.

    Values beyond the grid ends are taken as zero.
    """
    if params.h > params.eps * MAX_STEP_RATIO * (1 + 1e-12):
        raise ValidationError("h", "grid too coarse to resolve the mollifier (need h <= eps/8)")
    variant = OperatorVariant(variant)
    grid = params.grid
    x = grid.nodes
    h = x[1] - x[0]
    scale = cfg.hbar**2 / (2.0 * cfg.m)
    coef, clamped = wall_coefficient(x, params.eps, cfg, variant)
    main = np.full(x.size, 2.0 * scale / h**2)
    upper = -scale / h**2 + scale * coef[:-1] / (2.0 * h)
    lower = -scale / h**2 - scale * coef[1:] / (2.0 * h)
    mat = scipy.sparse.diags([lower, main, upper], [-1, 0, 1], format="csr")
    return MollifiedOperator(params, variant, grid, coef, mat, clamped)


def v_eps(x, n: int, eps: float, cfg: BoxConfig):
    """Mollified eigenfunction: smoothed window times the sine continued to all x."""
    n = check_quantum_number(n)
    x = np.asarray(x, dtype=float)
    return window_eps(x, eps, cfg.L) * math.sqrt(2.0 / cfg.L) * np.sin(n * math.pi * x / cfg.L)


@dataclass(frozen=True)
class TestFunction:
    """Gaussian bump given by centre and full width at half maximum."""

    __test__ = False  # not a pytest class

    id: str
    center: float
    fwhm: float
    kind: str  # "interior" or "wall"
    amplitude: float = 1.0

    @property
    def sigma(self) -> float:
        return self.fwhm * FWHM_TO_SIGMA

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return self.amplitude * np.exp(-0.5 * ((x - self.center) / self.sigma) ** 2)

    def fits(self, grid: PositionGrid, reach: float = 12.0) -> bool:
        return grid.covers(self.center - reach * self.sigma, self.center + reach * self.sigma)


def default_test_functions(cfg: BoxConfig) -> list[TestFunction]:
    L = cfg.L
    w = L / 20.0
    return [
        TestFunction("interior_q1", 0.25 * L, w, "interior"),
        TestFunction("interior_mid", 0.5 * L, w, "interior"),
        TestFunction("interior_q3", 0.75 * L, w, "interior"),
        TestFunction("wall_left", 0.0, w, "wall"),
        TestFunction("wall_right", L, w, "wall"),
    ]


def _pairings(op: MollifiedOperator, n: int, testfns: Sequence[TestFunction], cfg: BoxConfig):
    grid = op.grid
    v = v_eps(grid.nodes, n, op.params.eps, cfg)
    hv = op @ v
    out = []
    for chi in testfns:
        if not chi.fits(grid):
            raise ValidationError("testfn", f"test function {chi.id} reaches outside the grid")
        c = chi(grid.nodes) * grid.weights
        out.append((chi, float(c @ hv), float(c @ v)))
    return out


@dataclass(frozen=True)
class WeakResidual:
    n: int
    eps: float
    variant: str
    testfn_id: str
    kind: str
    residual: float


@dataclass(frozen=True)
class WeakResidualReport:
    rows: tuple[WeakResidual, ...]
    clamped: dict = field(default_factory=dict)  # (variant, eps) -> clamped node count

    def series(self, n: int, variant, testfn_id: str) -> list[float]:
        variant = OperatorVariant(variant).value
        rows = [r for r in self.rows if r.n == n and r.variant == variant and r.testfn_id == testfn_id]
        return [r.residual for r in sorted(rows, key=lambda r: -r.eps)]

    def interior_strictly_decreasing(self, n: int, variant, floor: float = 1e-12) -> bool:
        """Every interior residual falls strictly as eps shrinks.

        A series lying entirely below ``floor`` is rounding noise (for example
        an odd mode against a bump centred on its node) and counts as passing.
        """
        ids = {r.testfn_id for r in self.rows if r.kind == "interior" and r.n == n}
        for tid in sorted(ids):
            s = self.series(n, variant, tid)
            if max(s) <= floor:
                continue
            if not all(b < a for a, b in zip(s, s[1:])):
                return False
        return True


def weak_residual(n: int, params: MollifierParams, variant: OperatorVariant, cfg: BoxConfig,
                  testfns: Sequence[TestFunction] | None = None) -> list[WeakResidual]:
    """|<chi, H v_eps> - E_n <chi, v_eps>| for each test function chi."""
    testfns = default_test_functions(cfg) if testfns is None else testfns
    op = build_operator(params, variant, cfg)
    e_n = analytic.energy(n, cfg)
    return [WeakResidual(n, params.eps, op.variant.value, chi.id, chi.kind, abs(a - e_n * b))
            for chi, a, b in _pairings(op, n, testfns, cfg)]


@dataclass(frozen=True)
class EquivalenceRow:
    n: int
    eps: float
    testfn_id: str
    kind: str
    difference: float


def equivalence_check(n: int, params: MollifierParams, cfg: BoxConfig,
                      testfns: Sequence[TestFunction] | None = None) -> list[EquivalenceRow]:
    """|<chi, (H_M - H_M') v_eps>| for each test function."""
    testfns = default_test_functions(cfg) if testfns is None else testfns
    hm = _pairings(build_operator(params, OperatorVariant.HM, cfg), n, testfns, cfg)
    hp = _pairings(build_operator(params, OperatorVariant.HM_PRIME, cfg), n, testfns, cfg)
    return [EquivalenceRow(n, params.eps, chi.id, chi.kind, abs(a - b))
            for (chi, a, _), (_, b, _) in zip(hm, hp)]


@dataclass(frozen=True)
class EquivalenceReport:
    rows: tuple[EquivalenceRow, ...]

    def series(self, n: int, testfn_id: str) -> list[float]:
        rows = [r for r in self.rows if r.n == n and r.testfn_id == testfn_id]
        return [r.difference for r in sorted(rows, key=lambda r: -r.eps)]

    def decreasing(self, n: int, kind: str = "wall") -> bool:
        ids = {r.testfn_id for r in self.rows if r.kind == kind and r.n == n}
        return all(all(b < a for a, b in zip(s, s[1:]))
                   for s in (self.series(n, tid) for tid in sorted(ids)))


def _eps_sequence(eps_list: Iterable[float]) -> list[float]:
    eps = sorted({float(e) for e in eps_list}, reverse=True)
    if not eps:
        raise ValueError("need at least one mollifier width")
    return eps


def run_verification(cfg: BoxConfig, n_values: Iterable[int], eps_list: Iterable[float],
                     variants: Iterable = tuple(OperatorVariant),
                     testfns: Sequence[TestFunction] | None = None) -> WeakResidualReport:
    """Weak residuals over every (n, eps, variant, test function)."""
    rows, clamped = [], {}
    for eps in _eps_sequence(eps_list):
        params = make_mollifier_params(cfg, eps)
        for variant in variants:
            variant = OperatorVariant(variant)
            clamped[(variant.value, eps)] = build_operator(params, variant, cfg).clamped
            for n in n_values:
                rows.extend(weak_residual(n, params, variant, cfg, testfns))
    return WeakResidualReport(tuple(rows), clamped)


def run_equivalence(cfg: BoxConfig, n_values: Iterable[int], eps_list: Iterable[float],
                    testfns: Sequence[TestFunction] | None = None) -> EquivalenceReport:
    rows = []
    for eps in _eps_sequence(eps_list):
        params = make_mollifier_params(cfg, eps)
        for n in n_values:
            rows.extend(equivalence_check(n, params, cfg, testfns))
    return EquivalenceReport(tuple(rows))
