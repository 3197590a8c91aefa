"""Core value types: box constants, quadrature grids and sampled functions."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

import numpy as np


class ValidationError(ValueError):
    """Raised when a constructor receives an out-of-range argument."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


def _positive(name: str, value) -> float:
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise ValidationError(name, f"expected a number, got {value!r}") from None
    if not math.isfinite(value) or value <= 0.0:
        raise ValidationError(name, f"must be finite and > 0, got {value!r}")
    return value


def check_quantum_number(n) -> int:
    """Return ``n`` as an int, rejecting anything that is not an integer >= 1."""
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise ValidationError("n", f"quantum number must be an integer >= 1, got {n!r}")
    return int(n)


@dataclass(frozen=True)
class BoxConfig:
    """Mass, reduced Planck constant and box length, in any consistent units."""

    m: float = 1.0
    hbar: float = 1.0
    L: float = 1.0

    def __post_init__(self):
        for name in ("m", "hbar", "L"):
            object.__setattr__(self, name, _positive(name, getattr(self, name)))

    @property
    def p0(self) -> float:
        """Momentum scale pi*hbar/L (the ground-state wavenumber times hbar)."""
        return math.pi * self.hbar / self.L

    @property
    def e0(self) -> float:
        """Ground-state energy pi^2 hbar^2 / (2 m L^2)."""
        return self.p0**2 / (2.0 * self.m)

    def as_dict(self) -> dict[str, float]:
        return {"m": self.m, "hbar": self.hbar, "L": self.L}


def make_box_config(m: float = 1.0, hbar: float = 1.0, L: float = 1.0) -> BoxConfig:
    return BoxConfig(m=m, hbar=hbar, L=L)


def load_box_config(path: Union[str, Path], **overrides) -> BoxConfig:
    """Read a flat ``key = value`` file with keys m, hbar, L.

    Blank lines and ``#`` comments are ignored.  Keyword overrides that are not
    None take precedence over the file.
    """
    values: dict[str, float] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            key, _, value = line.partition(":")
        key = key.strip()
        if key not in ("m", "hbar", "L"):
            raise ValidationError(key or f"line {lineno}", "unknown config key")
        values[key] = _positive(key, value.strip())
    values.update({k: v for k, v in overrides.items() if v is not None})
    return BoxConfig(**values)


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class QuadratureRule:
    """Descriptor of how a grid was built."""

    kind: str  # "gauss" or "trapezoid"
    panels: int
    order: int


@dataclass(frozen=True, eq=False)
class Grid:
    nodes: np.ndarray
    weights: np.ndarray
    rule: QuadratureRule

    def __post_init__(self):
        nodes, weights = _frozen(self.nodes), _frozen(self.weights)
        if nodes.ndim != 1 or nodes.shape != weights.shape:
            raise ValidationError("nodes", "nodes and weights must be 1-d arrays of equal length")
        if nodes.size > 1 and not np.all(np.diff(nodes) > 0):
            raise ValidationError("nodes", "must be strictly increasing")
        if not np.all(weights > 0):
            raise ValidationError("weights", "must all be > 0")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    def __len__(self) -> int:
        return self.nodes.size

    def same_as(self, other: "Grid") -> bool:
        return self is other or (
            type(self) is type(other)
            and np.array_equal(self.nodes, other.nodes)
            and np.array_equal(self.weights, other.weights)
        )


@dataclass(frozen=True, eq=False)
class MomentumGrid(Grid):
    cutoff: float = 0.0

    def __post_init__(self):
        super().__post_init__()
        if not self.cutoff > 0:
            raise ValidationError("P", f"cutoff must be > 0, got {self.cutoff!r}")
        if np.any(np.abs(self.nodes) > self.cutoff * (1 + 1e-14)):
            raise ValidationError("nodes", "all nodes must lie in [-P, P]")

    @property
    def is_symmetric(self) -> bool:
        return bool(
            np.array_equal(self.nodes, -self.nodes[::-1])
            and np.array_equal(self.weights, self.weights[::-1])
        )


@dataclass(frozen=True, eq=False)
class PositionGrid(Grid):
    lower: float = 0.0
    upper: float = 0.0

    def covers(self, a: float, b: float) -> bool:
        return self.lower <= a and b <= self.upper


def gauss_legendre_panels(edges, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre nodes and weights on consecutive panels.

    ``edges`` are the panel boundaries; each panel gets ``order`` points.
    """
    if order < 1:
        raise ValidationError("order", "must be >= 1")
    edges = np.asarray(edges, dtype=float)
    t, wt = np.polynomial.legendre.leggauss(order)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * t[None, :]).ravel()
    weights = (half[:, None] * wt[None, :]).ravel()
    return nodes, weights


def trapezoid_nodes(a: float, b: float, count: int) -> tuple[np.ndarray, np.ndarray]:
    """Evenly spaced trapezoid rule with ``count`` nodes including both ends."""
    if count < 2:
        raise ValidationError("count", "trapezoid rule needs at least 2 nodes")
    nodes = np.linspace(a, b, count)
    h = (b - a) / (count - 1)
    weights = np.full(count, h)
    weights[[0, -1]] = 0.5 * h
    return nodes, weights


def make_momentum_grid(cfg: BoxConfig, P: float, panels: int, order: int,
                       rule: str = "gauss") -> MomentumGrid:
    """Symmetric quadrature grid on [-P, P].

    The positive half is built first and mirrored, so the node set is closed
    under negation bit for bit.  For ``rule="trapezoid"`` the grid has
    ``panels * order + 1`` evenly spaced nodes.
    """
    P = _positive("P", P)
    if int(panels) != panels or panels < 1:
        raise ValidationError("panels", f"must be a positive integer, got {panels!r}")
    if panels % 2:
        raise ValidationError("panels", f"must be even so the grid is symmetric about 0, got {panels}")
    panels = int(panels)
    if rule == "gauss":
        if int(order) != order or order < 2:
            raise ValidationError("order", f"must be an integer >= 2, got {order!r}")
        edges = np.linspace(0.0, P, panels // 2 + 1)
        half_nodes, half_weights = gauss_legendre_panels(edges, int(order))
        nodes = np.concatenate([-half_nodes[::-1], half_nodes])
        weights = np.concatenate([half_weights[::-1], half_weights])
    elif rule == "trapezoid":
        count = panels * int(order) // 2 + 1
        half_nodes, half_weights = trapezoid_nodes(0.0, P, count)
        nodes = np.concatenate([-half_nodes[:0:-1], half_nodes])
        # the p = 0 node is shared by both halves
        weights = np.concatenate([half_weights[:0:-1], [2.0 * half_weights[0]], half_weights[1:]])
    else:
        raise ValidationError("rule", f"unknown quadrature rule {rule!r}")
    return MomentumGrid(nodes, weights, QuadratureRule(rule, panels, int(order)), cutoff=P)


def make_position_grid(cfg: BoxConfig, panels: int, order: int,
                       lower: float = 0.0, upper: float | None = None) -> PositionGrid:
    """Composite Gauss-Legendre grid with panel boundaries exactly at 0 and L.

    ``panels`` panels cover [0, L]; the optional extensions [lower, 0] and
    [L, upper] get panels of about the same width.
    """
    L = cfg.L
    upper = L if upper is None else float(upper)
    lower = float(lower)
    if lower > 0.0:
        raise ValidationError("lower", f"must be <= 0, got {lower}")
    if upper < L:
        raise ValidationError("upper", f"must be >= L = {L}, got {upper}")
    if int(panels) != panels or panels < 1:
        raise ValidationError("panels", f"must be a positive integer, got {panels!r}")
    width = L / panels
    edges = [np.linspace(0.0, L, int(panels) + 1)]
    if lower < 0.0:
        k = max(1, math.ceil(-lower / width))
        edges.insert(0, np.linspace(lower, 0.0, k + 1)[:-1])
    if upper > L:
        k = max(1, math.ceil((upper - L) / width))
        edges.append(np.linspace(L, upper, k + 1)[1:])
    nodes, weights = gauss_legendre_panels(np.concatenate(edges), int(order))
    return PositionGrid(nodes, weights, QuadratureRule("gauss", int(panels), int(order)),
                        lower=lower, upper=upper)


def make_uniform_position_grid(lower: float, upper: float, step: float) -> PositionGrid:
    """Trapezoid grid with spacing as close to ``step`` as fits [lower, upper]."""
    step = _positive("h", step)
    count = int(math.ceil((upper - lower) / step - 1e-9)) + 1
    nodes, weights = trapezoid_nodes(lower, upper, count)
    return PositionGrid(nodes, weights, QuadratureRule("trapezoid", count - 1, 1),
                        lower=float(lower), upper=float(upper))


@dataclass(frozen=True, eq=False)
class WaveSample:
    """Complex samples of a function on the nodes of a grid."""

    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.array(self.values, dtype=complex)
        if values.shape != self.grid.nodes.shape:
            raise ValidationError(
                "values", f"expected {self.grid.nodes.size} samples, got {values.shape}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        if not math.isfinite(self.norm):
            raise ValidationError("values", "samples must have a finite norm")

    @property
    def kind(self) -> str:
        return "momentum" if isinstance(self.grid, MomentumGrid) else "position"

    @property
    def norm(self) -> float:
        """Quadrature L2 norm."""
        return float(np.sqrt(np.sum(self.grid.weights * np.abs(self.values) ** 2)))

    def inner(self, other: "WaveSample") -> complex:
        """Quadrature inner product <self, other>, conjugate-linear in self."""
        if not self.grid.same_as(other.grid):
            raise ValidationError("grid", "inner product needs samples on the same grid")
        return complex(np.sum(self.grid.weights * np.conj(self.values) * other.values))

    def normalized(self) -> "WaveSample":
        return WaveSample(self.grid, self.values / self.norm)
