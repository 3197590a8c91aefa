"""Direct quadrature Fourier transforms between position and momentum samples.

Convention: phi(p) = (2 pi hbar)^(-1/2) * int v(x) exp(-i x p / hbar) dx and
the inverse with exp(+i x p / hbar).  The transforms are evaluated as dense
matrix products; grids here are at most a few thousand nodes.
"""

from __future__ import annotations

import math
from typing import Callable, Union

import numpy as np

from .domain import (BoxConfig, Grid, MomentumGrid, PositionGrid, ValidationError,
                     WaveSample)


def _kernel(x: np.ndarray, p: np.ndarray, cfg: BoxConfig, sign: float) -> np.ndarray:
    return np.exp(sign * 1j * np.outer(x, p) / cfg.hbar) / math.sqrt(2.0 * math.pi * cfg.hbar)


def fourier_forward(v: WaveSample, target: MomentumGrid, cfg: BoxConfig) -> WaveSample:
    """Position samples -> momentum amplitudes on ``target``."""
    grid = v.grid
    if not isinstance(grid, PositionGrid):
        raise ValidationError("grid", "forward transform needs samples on a PositionGrid")
    if not grid.covers(0.0, cfg.L):
        raise ValidationError("grid", f"position grid [{grid.lower}, {grid.upper}] must cover [0, L]")
    k = _kernel(target.nodes, grid.nodes, cfg, -1.0)
    return WaveSample(target, k @ (grid.weights * v.values))


def fourier_inverse(phi: WaveSample, target: PositionGrid, cfg: BoxConfig) -> WaveSample:
    """Momentum amplitudes -> position samples on ``target``.

    Requires a symmetric momentum grid so that conjugate-symmetric input gives
    a real reconstruction up to rounding.
    """
    grid = phi.grid
    if not isinstance(grid, MomentumGrid):
        raise ValidationError("grid", "inverse transform needs samples on a MomentumGrid")
    if not grid.is_symmetric:
        raise ValidationError("grid", "inverse transform needs a grid symmetric under p -> -p")
    k = _kernel(target.nodes, grid.nodes, cfg, +1.0)
    return WaveSample(target, k @ (grid.weights * phi.values))


def integrate(f: Union[WaveSample, Callable, np.ndarray], grid: Grid) -> complex:
    """Quadrature sum of ``f`` over ``grid``.

    ``f`` may be a sample on the same grid, a callable evaluated at the nodes,
    or an array with one value per node.
    """
    if isinstance(f, WaveSample):
        if not f.grid.same_as(grid):
            raise ValidationError("grid", "sample lives on a different grid")
        values = f.values
    elif callable(f):
        values = np.asarray(f(grid.nodes))
    else:
        values = np.asarray(f)
    if values.shape != grid.nodes.shape:
        raise ValidationError("f", f"expected {grid.nodes.size} values, got {values.shape}")
    return complex(np.sum(grid.weights * values))


def rms_difference(a, b, grid: Grid) -> float:
    """Quadrature root-mean-square of a - b over the span of ``grid``."""
    err = np.abs(np.asarray(a) - np.asarray(b))
    return math.sqrt(float(np.sum(grid.weights * err**2) / np.sum(grid.weights)))


def reconstruction_errors(numeric: WaveSample, exact, cfg: BoxConfig, skip: int = 2) -> dict:
    """RMS error over the whole grid and sup error away from the walls.

    The sup norm skips the ``skip`` nodes nearest each wall on either side,
    where truncation ringing at the derivative jump concentrates.
    """
    grid = numeric.grid
    err = np.abs(numeric.values - np.asarray(exact))
    rms = rms_difference(numeric.values, exact, grid)
    keep = np.ones(grid.nodes.size, dtype=bool)
    for wall in (0.0, cfg.L):
        nearest = np.argsort(np.abs(grid.nodes - wall))[: 2 * skip]
        keep[nearest] = False
    return {"rms": rms, "sup": float(err[keep].max()), "max_imag": float(np.abs(numeric.values.imag).max())}
