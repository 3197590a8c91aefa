"""Closed forms for the box: energies, position eigenfunctions, momentum amplitudes."""

from __future__ import annotations

import enum
import math

import numpy as np

from .domain import (BoxConfig, Grid, MomentumGrid, PositionGrid, ValidationError,
                     WaveSample, check_quantum_number)

#: half-width, in units of p0, of the window around p = +-n*pi*hbar/L in which
#: the rational form is abandoned for the sinc form
ETA = 1e-3


class DomainError(ValueError):
    pass


class PhiForm(enum.Enum):
    CLOSED_RATIONAL = "rational"
    SINC_PRODUCT = "sinc"
    AUTO = "auto"


def energy(n: int, cfg: BoxConfig) -> float:
    """E_n = pi^2 hbar^2 n^2 / (2 m L^2)."""
    n = check_quantum_number(n)
    return (n * math.pi * cfg.hbar / cfg.L) ** 2 / (2.0 * cfg.m)


def u_box(x, n: int, cfg: BoxConfig):
    """Normalized box eigenfunction sqrt(2/L) sin(n pi x / L), defined on [0, L] only."""
    n = check_quantum_number(n)
    x = np.asarray(x, dtype=float)
    if np.any((x < 0.0) | (x > cfg.L)):
        raise DomainError(f"u_box is defined on [0, L] = [0, {cfg.L}]; use v_window outside")
    return math.sqrt(2.0 / cfg.L) * np.sin(n * math.pi * x / cfg.L)


def window(x, cfg: BoxConfig):
    """Theta(x) - Theta(x - L) with Theta(0) = 1: one on [0, L), zero elsewhere."""
    x = np.asarray(x, dtype=float)
    return ((x >= 0.0) & (x < cfg.L)).astype(float)


def v_window(x, n: int, cfg: BoxConfig):
    """Box eigenfunction extended by zero to the whole line."""
    n = check_quantum_number(n)
    x = np.asarray(x, dtype=float)
    return window(x, cfg) * math.sqrt(2.0 / cfg.L) * np.sin(n * math.pi * x / cfg.L)


def u_box_derivative(x, n: int, cfg: BoxConfig):
    n = check_quantum_number(n)
    k = n * math.pi / cfg.L
    return math.sqrt(2.0 / cfg.L) * k * np.cos(k * np.asarray(x, dtype=float))


def _removable_points(n: int, cfg: BoxConfig) -> float:
    return n * math.pi * cfg.hbar / cfg.L


def _phi_rational(p, n: int, cfg: BoxConfig):
    L, hbar = cfg.L, cfg.hbar
    denom = (n * math.pi / L) ** 2 - (p / hbar) ** 2
    if np.any(denom == 0.0):
        raise ZeroDivisionError(
            "closed rational form is 0/0 at p = +-n*pi*hbar/L; use PhiForm.SINC_PRODUCT or AUTO")
    sign = -1.0 if n % 2 else 1.0
    pref = math.pi / (L * math.sqrt(math.pi * hbar * L))
    return pref * n / denom * (1.0 - sign * np.exp(-1j * p * L / hbar))


def _sinc(z):
    return np.sinc(z / math.pi)


def _phi_sinc(p, n: int, cfg: BoxConfig):
    L, hbar = cfg.L, cfg.hbar
    k = n * math.pi / L
    a = 0.5 * L * (p / hbar - k)
    b = 0.5 * L * (p / hbar + k)
    pref = math.sqrt(L / (math.pi * hbar)) / 2j
    return pref * (np.exp(-1j * a) * _sinc(a) - np.exp(-1j * b) * _sinc(b))


def near_removable_point(p, n: int, cfg: BoxConfig, eta: float = ETA):
    """Mask of momenta within eta*p0 of +-n*pi*hbar/L."""
    p = np.asarray(p, dtype=float)
    q = _removable_points(n, cfg)
    tol = eta * cfg.p0
    return (np.abs(p - q) < tol) | (np.abs(p + q) < tol)


def phi(p, n: int, cfg: BoxConfig, form: PhiForm = PhiForm.AUTO, eta: float = ETA):
    """Momentum amplitude of the n-th box state.

    ``CLOSED_RATIONAL`` raises exactly at the removable points; ``AUTO`` uses
    the sinc form inside the ``eta`` windows around them and the rational form
    elsewhere.
    """
    n = check_quantum_number(n)
    form = PhiForm(form)
    p_arr = np.asarray(p, dtype=float)
    if form is PhiForm.CLOSED_RATIONAL:
        out = _phi_rational(p_arr, n, cfg)
    elif form is PhiForm.SINC_PRODUCT:
        out = _phi_sinc(p_arr, n, cfg)
    else:
        near = near_removable_point(p_arr, n, cfg, eta)
        out = np.empty(p_arr.shape, dtype=complex)
        out[near] = _phi_sinc(p_arr[near], n, cfg)
        out[~near] = _phi_rational(p_arr[~near], n, cfg)
    return out[()] if out.ndim == 0 else out


def density_printed(p, n: int, cfg: BoxConfig, prefactor: str = "length"):
    """|phi_n|^2 from the trig closed form.

    ``prefactor="length"`` uses 4 n^2 pi L / hbar over ((n pi)^2 - (pL/hbar)^2)^2;
    ``prefactor="energy"`` uses 8 m hbar E_n / (pi L) over (p^2 - 2 m E_n)^2.
    Both are 0/0 at p = +-n*pi*hbar/L.
    """
    n = check_quantum_number(n)
    p = np.asarray(p, dtype=float)
    L, hbar = cfg.L, cfg.hbar
    half_phase = p * L / (2.0 * hbar)
    trig = np.sin(half_phase) ** 2 if n % 2 == 0 else np.cos(half_phase) ** 2
    if prefactor == "length":
        return 4.0 * n**2 * math.pi * L / hbar / ((n * math.pi) ** 2 - (p * L / hbar) ** 2) ** 2 * trig
    if prefactor == "energy":
        e_n = energy(n, cfg)
        return 8.0 * cfg.m * hbar * e_n / (math.pi * L) / (p**2 - 2.0 * cfg.m * e_n) ** 2 * trig
    raise ValueError(f"unknown prefactor convention {prefactor!r}")


def mom_density(p, n: int, cfg: BoxConfig, eta: float = ETA):
    """Momentum probability density |phi_n(p)|^2, finite at the removable points."""
    n = check_quantum_number(n)
    p_arr = np.asarray(p, dtype=float)
    near = near_removable_point(p_arr, n, cfg, eta)
    out = np.empty(p_arr.shape, dtype=float)
    out[near] = np.abs(_phi_sinc(p_arr[near], n, cfg)) ** 2
    out[~near] = density_printed(p_arr[~near], n, cfg)
    return out[()] if out.ndim == 0 else out


_POSITION_FUNCTIONS = {"u_box": u_box, "v_window": v_window}
_MOMENTUM_FUNCTIONS = {"phi": phi, "mom_density": mom_density}


def sample(fn, grid: Grid, n: int, cfg: BoxConfig, **kwargs) -> WaveSample:
    """Evaluate one of u_box, v_window, phi, mom_density on the nodes of ``grid``.

    ``fn`` may be the function object or its name.
    """
    name = fn if isinstance(fn, str) else getattr(fn, "__name__", repr(fn))
    if name in _POSITION_FUNCTIONS:
        if not isinstance(grid, PositionGrid):
            raise ValidationError("grid", f"{name} needs a PositionGrid")
        return WaveSample(grid, _POSITION_FUNCTIONS[name](grid.nodes, n, cfg))
    if name in _MOMENTUM_FUNCTIONS:
        if not isinstance(grid, MomentumGrid):
            raise ValidationError("grid", f"{name} needs a MomentumGrid")
        return WaveSample(grid, _MOMENTUM_FUNCTIONS[name](grid.nodes, n, cfg, **kwargs))
    raise ValidationError("fn", f"unknown function {name!r}")


def gram_matrix(n_max: int, cfg: BoxConfig, grid: PositionGrid) -> np.ndarray:
    """Quadrature Gram matrix of u_1..u_{n_max} on a grid inside [0, L]."""
    basis = np.array([u_box(grid.nodes, n, cfg) for n in range(1, n_max + 1)])
    return (basis * grid.weights) @ basis.T
