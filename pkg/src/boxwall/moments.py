"""Truncated momentum moments of the box states and their cutoff behaviour."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import analytic
from .domain import BoxConfig, check_quantum_number, make_momentum_grid, make_position_grid

PANELS_PER_P0 = 1
ORDER = 8
FIT_POINTS = 3
MAX_FIT_RESIDUAL = 0.05
MAX_EXPONENT_DEVIATION = 0.25


class MomentClassificationError(RuntimeError):
    def __init__(self, message: str, diagnostics: dict):
        super().__init__(message)
        self.diagnostics = diagnostics


def moment_grid(P: float, cfg: BoxConfig, panels_per_p0: int = PANELS_PER_P0, order: int = ORDER):
    """Gauss grid on [-P, P] with panels of width p0 / panels_per_p0.

    The density oscillates with period 2 p0, so panel edges fall on whole
    fractions of the period whenever P is a multiple of p0.
    """
    panels = 2 * max(1, math.ceil(P / cfg.p0 * panels_per_p0 - 1e-9))
    return make_momentum_grid(cfg, P, panels, order)


def momentum_moment(n: int, power: int, P: float, cfg: BoxConfig, **grid_kw) -> float:
    """int_{-P}^{P} p^power |phi_n(p)|^2 dp."""
    grid = moment_grid(P, cfg, **grid_kw)
    p = grid.nodes
    return float(np.sum(grid.weights * p**power * analytic.mom_density(p, n, cfg)))


def truncated_moment(n: int, k: int, P: float, cfg: BoxConfig, **grid_kw) -> float:
    """Truncated <p^(2k)> for the n-th state."""
    n = check_quantum_number(n)
    if int(k) != k or k < 0:
        raise ValueError(f"k must be a non-negative integer, got {k!r}")
    return momentum_moment(n, 2 * int(k), P, cfg, **grid_kw)


def position_p2(n: int, cfg: BoxConfig, panels: int = 16, order: int = 16) -> float:
    """<p^2> from the position side: hbar^2 int_0^L |u_n'(x)|^2 dx."""
    grid = make_position_grid(cfg, panels, order)
    du = analytic.u_box_derivative(grid.nodes, n, cfg)
    return cfg.hbar**2 * float(np.sum(grid.weights * du**2))


@dataclass(frozen=True)
class GrowthFit:
    exponent: float
    coefficient: float
    residual: float

    def as_dict(self) -> dict:
        return {"exponent": self.exponent, "coefficient": self.coefficient, "residual": self.residual}


@dataclass(frozen=True)
class MomentReport:
    n: int
    k: int
    cutoffs: tuple[float, ...]
    values: tuple[float, ...]
    verdict: str  # "converged" or "diverges"
    value: float | None = None
    tail_estimate: float | None = None
    fit: GrowthFit | None = None
    diagnostics: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "k": self.k,
            "cutoffs": list(self.cutoffs),
            "values": list(self.values),
            "verdict": self.verdict,
            "value": self.value,
            "tail_estimate": self.tail_estimate,
            "fit": None if self.fit is None else self.fit.as_dict(),
        }


def _check_geometric(cutoffs: Sequence[float]) -> float:
    if len(cutoffs) < 4:
        raise ValueError("classification needs at least 4 cutoffs")
    c = np.asarray(cutoffs, dtype=float)
    if np.any(c <= 0) or np.any(np.diff(c) <= 0):
        raise ValueError("cutoffs must be positive and increasing")
    ratios = c[1:] / c[:-1]
    if np.ptp(ratios) > 1e-6 * ratios.mean():
        raise ValueError("cutoffs must be geometrically spaced")
    return float(ratios.mean())


def fit_growth(cutoffs: Sequence[float], values: Sequence[float], exponent: float) -> GrowthFit:
    """Least-squares growth law over the given points.

    The exponent comes from a straight-line fit of log M against log P; the
    coefficient is the slope of M against P^exponent (with an intercept, which
    absorbs the convergent part of the integral); the residual is the largest
    relative misfit of the log-log line.
    """
    logp, logm = np.log(cutoffs), np.log(values)
    slope, icept = np.polyfit(logp, logm, 1)
    residual = float(np.max(np.abs(np.expm1(logm - (slope * logp + icept)))))
    coeff, _ = np.polyfit(np.asarray(cutoffs) ** exponent, values, 1)
    return GrowthFit(float(slope), float(coeff), residual)


def classify_moment(n: int, k: int, cutoffs: Sequence[float], cfg: BoxConfig, **grid_kw) -> MomentReport:
    """Decide whether the truncated <p^(2k)> converges or grows with the cutoff.

    The tail of the integrand decays like p^(2k-4), so the truncated moment
    behaves like M_inf - C P^(2k-3) for k <= 1 and like c P^(2k-3) for k >= 2.
    Convergent cases get a Richardson estimate of the missing tail; divergent
    ones get a growth-law fit over the last three cutoffs.
    """
    n = check_quantum_number(n)
    ratio = _check_geometric(cutoffs)
    values = [truncated_moment(n, k, P, cfg, **grid_kw) for P in cutoffs]
    alpha = 2 * k - 3
    common = dict(n=n, k=int(k), cutoffs=tuple(float(c) for c in cutoffs), values=tuple(values))

    if alpha < 0:
        steps = np.diff(values)
        scale = max(abs(values[-1]), 1e-300)
        shrink = ratio**alpha
        noise = 1e-12 * scale
        if abs(steps[-1]) > noise and abs(steps[-1]) > abs(steps[-2]):
            raise MomentClassificationError(
                f"<p^{2 * k}> increments do not shrink with the cutoff",
                {"values": values, "increments": steps.tolist()})
        tail = float(steps[-1] * shrink / (1.0 - shrink))
        return MomentReport(**common, verdict="converged", value=values[-1] + tail,
                            tail_estimate=abs(tail))

    pts = slice(-FIT_POINTS, None)
    fit = fit_growth(np.asarray(cutoffs)[pts], np.asarray(values)[pts], alpha)
    if abs(fit.exponent - alpha) > MAX_EXPONENT_DEVIATION or fit.residual > MAX_FIT_RESIDUAL:
        raise MomentClassificationError(
            f"<p^{2 * k}> neither converges nor follows P^{alpha}",
            {"values": values, "fit": fit.as_dict()})
    return MomentReport(**common, verdict="diverges", fit=fit)
