"""Nystrom discretization of the momentum-space eigenvalue equation.

The integral equation

    p^2/(2m) phi(p) + (i/2m)(1/2pi) * s * int (1 - exp(-iL(p-p')/hbar)) p' phi(p') dp' = E phi(p)

is truncated to [-P, P] and replaced by a quadrature sum, giving a dense,
non-Hermitian complex matrix.  The kernel integral converges only
conditionally: a symmetric truncation recovers the midpoint of the one-sided
wall derivatives of the position wavefunction, while the modified Hamiltonian
acts with the derivative taken inside the box.  For box-supported states the
interior value is exactly twice the midpoint value, so ``wall_limit="interior"``
sets s = 2 and ``wall_limit="midpoint"`` keeps the literal s = 1.

Truncation error of the kernel integral is dominated by a term proportional
to cos(P L / hbar) / P; cutoffs at half-integer multiples of p0 = pi hbar / L
cancel it, which is why the reference cutoff is 60.5 p0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg

from . import analytic
from .domain import (BoxConfig, MomentumGrid, ValidationError, WaveSample,
                     check_quantum_number, make_momentum_grid)

WALL_LIMITS = {"interior": 2.0, "midpoint": 1.0}

REFERENCE_CUTOFF_P0 = 60.5
REFERENCE_PANELS = 100
REFERENCE_ORDER = 8

#: a mode counts as resolved when the numeric eigenvector carries at least
#: half of the analytic mode's probability, i.e. |overlap|^2 >= 1/2
MIN_OVERLAP = math.sqrt(0.5)
TIE_TOLERANCE = 1e-12
RESIDUAL_TOLERANCE = 1e-10


class SpectrumError(RuntimeError):
    """Dense eigensolve failed or produced pairs above the residual bound."""

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class ModeNotResolved(RuntimeError):
    def __init__(self, n: int, overlap: float):
        super().__init__(
            f"mode not resolved: n={n} best overlap {overlap:.4f} < {MIN_OVERLAP:.4f} "
            "(grid too coarse or cutoff too small)")
        self.n = n
        self.overlap = overlap


@dataclass(frozen=True, eq=False)
class ComplexOperatorMatrix:
    grid: MomentumGrid
    cfg: BoxConfig
    matrix: np.ndarray
    wall_limit: str = "interior"

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def hermitian_defect(self) -> float:
        """Frobenius norm of A - A^dagger; nonzero by construction."""
        return float(np.linalg.norm(self.matrix - self.matrix.conj().T))


def build_operator(grid: MomentumGrid, cfg: BoxConfig, wall_limit: str = "interior",
                   kernel: bool = True) -> ComplexOperatorMatrix:
    """Assemble A_ij = p_i^2/(2m) delta_ij + s i/(4 pi m) w_j (1 - exp(-iL(p_i - p_j)/hbar)) p_j.

    ``kernel=False`` leaves only the kinetic diagonal (used in tests).
    """
    if not grid.is_symmetric:
        raise ValidationError("grid", "operator needs a grid symmetric under p -> -p")
    try:
        scale = WALL_LIMITS[wall_limit]
    except KeyError:
        raise ValidationError("wall_limit", f"expected one of {sorted(WALL_LIMITS)}") from None
    p = grid.nodes
    if kernel:
        coeff = scale * 1j / (4.0 * math.pi * cfg.m)
        # p_i - p_j is exactly 0 on the diagonal, so the kernel vanishes there exactly
        phase = np.exp(-1j * cfg.L * (p[:, None] - p[None, :]) / cfg.hbar)
        a = coeff * (1.0 - phase) * (grid.weights * p)[None, :]
    else:
        a = np.zeros((p.size, p.size), dtype=complex)
    a[np.diag_indices_from(a)] += p**2 / (2.0 * cfg.m)
    a.setflags(write=False)
    return ComplexOperatorMatrix(grid, cfg, a, wall_limit)


def apply(op: ComplexOperatorMatrix, phi: WaveSample) -> WaveSample:
    if not phi.grid.same_as(op.grid):
        raise ValidationError("grid", "sample and operator live on different grids")
    return WaveSample(op.grid, op.matrix @ phi.values)


def oracle_residual(op: ComplexOperatorMatrix, n: int) -> float:
    """||A phi_n - E_n phi_n|| / ||phi_n|| for the analytic amplitude, quadrature norms."""
    phi_n = analytic.sample("phi", op.grid, n, op.cfg)
    r = apply(op, phi_n).values - analytic.energy(n, op.cfg) * phi_n.values
    return WaveSample(op.grid, r).norm / phi_n.norm


@dataclass(frozen=True, eq=False)
class RawSpectrum:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # columns, unit 2-norm
    residuals: np.ndarray     # ||A v - lambda v|| per pair
    matrix_norm: float

    def __len__(self) -> int:
        return self.eigenvalues.size


def solve_spectrum(op: ComplexOperatorMatrix) -> RawSpectrum:
    """Full eigendecomposition of the dense operator (LAPACK geev)."""
    a = np.array(op.matrix)
    if not np.all(np.isfinite(a)):
        raise SpectrumError("operator has non-finite entries")
    try:
        lam, vecs = scipy.linalg.eig(a, check_finite=False, overwrite_a=True)
    except (scipy.linalg.LinAlgError, ValueError) as exc:
        raise SpectrumError(f"eigensolver did not converge: {exc}",
                            {"size": op.size, "error": str(exc)}) from exc
    vecs = vecs / np.linalg.norm(vecs, axis=0)
    residuals = np.linalg.norm(op.matrix @ vecs - vecs * lam, axis=0)
    norm = float(np.linalg.norm(op.matrix))
    worst = int(np.argmax(residuals))
    if residuals[worst] > RESIDUAL_TOLERANCE * norm:
        raise SpectrumError(
            f"eigenpair residual {residuals[worst]:.3e} exceeds {RESIDUAL_TOLERANCE:g} * ||A||",
            {"index": worst, "residual": float(residuals[worst]), "matrix_norm": norm})
    return RawSpectrum(lam, vecs, residuals, norm)


@dataclass(frozen=True)
class MatchedMode:
    n: int
    index: int
    eigenvalue: complex
    energy: float
    overlap: float
    rel_error: float
    imag: float
    resolved: bool


@dataclass(frozen=True)
class MatchedSpectrum:
    modes: tuple[MatchedMode, ...]

    def __getitem__(self, n: int) -> MatchedMode:
        for mode in self.modes:
            if mode.n == n:
                return mode
        raise KeyError(n)

    @property
    def all_resolved(self) -> bool:
        return all(m.resolved for m in self.modes)

    def unresolved(self) -> list[int]:
        return [m.n for m in self.modes if not m.resolved]


def overlap_matrix(raw: RawSpectrum, cfg: BoxConfig, n_max: int, grid: MomentumGrid) -> np.ndarray:
    """|<phi_n, v_k>| for n = 1..n_max against every eigenvector.

    Eigenvectors are normalized in the grid's quadrature norm; the analytic
    amplitudes keep their unit full-line normalization, so whatever part of a
    mode lies beyond the cutoff lowers its overlap.
    """
    w = grid.weights
    vecs = raw.eigenvectors / np.sqrt(np.sum(w[:, None] * np.abs(raw.eigenvectors) ** 2, axis=0))
    phis = np.array([analytic.phi(grid.nodes, n, cfg) for n in range(1, n_max + 1)])
    return np.minimum(np.abs((phis.conj() * w) @ vecs), 1.0)


def match_modes(raw: RawSpectrum, cfg: BoxConfig, n_max: int, grid: MomentumGrid,
                strict: bool = True, min_overlap: float = MIN_OVERLAP) -> MatchedSpectrum:
    """Assign eigenpairs to quantum numbers 1..n_max by eigenvector overlap.

    Greedy and injective: repeatedly take the largest remaining overlap,
    breaking near-ties by the smaller |Im lambda|.  With ``strict`` a mode whose
    overlap falls below ``min_overlap`` raises ModeNotResolved.
    """
    n_max = check_quantum_number(n_max)
    if len(raw) != len(grid):
        raise ValidationError("grid", "spectrum and grid sizes differ")
    ov = overlap_matrix(raw, cfg, n_max, grid)
    imag = np.abs(raw.eigenvalues.imag)
    free_rows = set(range(n_max))
    free_cols = np.ones(len(raw), dtype=bool)
    chosen: dict[int, int] = {}
    while free_rows:
        rows = sorted(free_rows)
        sub = ov[rows][:, free_cols]
        best = sub.max()
        cols = np.flatnonzero(free_cols)
        cands = [(imag[cols[c]], rows[r], cols[c])
                 for r, c in zip(*np.nonzero(sub >= best - TIE_TOLERANCE))]
        _, row, col = min(cands)
        chosen[row] = col
        free_rows.discard(row)
        free_cols[col] = False

    modes = []
    for row in range(n_max):
        n, col = row + 1, chosen[row]
        e_n = analytic.energy(n, cfg)
        lam = complex(raw.eigenvalues[col])
        overlap = float(ov[row, col])
        modes.append(MatchedMode(
            n=n, index=int(col), eigenvalue=lam, energy=e_n, overlap=overlap,
            rel_error=abs(lam.real - e_n) / e_n, imag=abs(lam.imag),
            resolved=overlap >= min_overlap))
    result = MatchedSpectrum(tuple(modes))
    if strict and not result.all_resolved:
        first = result[result.unresolved()[0]]
        raise ModeNotResolved(first.n, first.overlap)
    return result


def solve_box_modes(cfg: BoxConfig, n_max: int, cutoff_p0: float = REFERENCE_CUTOFF_P0,
                    panels: int = REFERENCE_PANELS, order: int = REFERENCE_ORDER,
                    wall_limit: str = "interior", strict: bool = True):
    """Build, solve and match in one call; returns (operator, raw spectrum, matches)."""
    grid = make_momentum_grid(cfg, cutoff_p0 * cfg.p0, panels, order)
    op = build_operator(grid, cfg, wall_limit)
    raw = solve_spectrum(op)
    return op, raw, match_modes(raw, cfg, n_max, grid, strict=strict)


@dataclass(frozen=True)
class Resolution:
    cutoff_p0: float
    panels: int
    order: int

    @property
    def nodes(self) -> int:
        return self.panels * self.order


def fixed_density_schedule(cutoffs_p0: Iterable[float], panels_per_p0: int = 2,
                           order: int = 4) -> list[Resolution]:
    """Resolutions with a common panel width p0 / panels_per_p0.

    Keeping the width fixed keeps the node pattern around each p = n p0 the
    same at every cutoff, so the energy error follows the truncation error.
    """
    out = []
    for c in cutoffs_p0:
        panels = 2 * math.ceil(c * panels_per_p0 - 1e-9)
        out.append(Resolution(float(c), panels, order))
    return out


@dataclass(frozen=True)
class ConvergenceRow:
    cutoff_p0: float
    panels: int
    order: int
    nodes: int
    n: int
    energy: float
    eig_real: float
    eig_imag: float
    rel_error: float
    overlap: float
    residual: float
    resolved: bool


@dataclass(frozen=True)
class ConvergenceReport:
    rows: tuple[ConvergenceRow, ...]
    resolutions: tuple[Resolution, ...]
    n_max: int

    def series(self, n: int, metric: str = "rel_error") -> list[float]:
        return [getattr(r, metric) for r in self.rows if r.n == n]

    def tail_non_increasing(self, n: int, metric: str = "rel_error") -> bool:
        """True when the metric does not grow over the last two refinement steps."""
        s = self.series(n, metric)
        tail = s[-3:]
        return all(b <= a for a, b in zip(tail, tail[1:]))


def convergence_study(cfg: BoxConfig, n_max: int, resolutions: Sequence,
                      wall_limit: str = "interior") -> ConvergenceReport:
    """Energy error, overlap, |Im lambda| and oracle residual per mode and resolution.

    ``resolutions`` holds Resolution objects or (cutoff_p0, panels, order) tuples,
    ordered from coarse to fine.
    """
    res = [r if isinstance(r, Resolution) else Resolution(float(r[0]), int(r[1]), int(r[2]))
           for r in resolutions]
    if len(res) < 2:
        raise ValueError("convergence study needs at least two resolutions")
    rows = []
    for r in res:
        op, raw, matched = solve_box_modes(cfg, n_max, r.cutoff_p0, r.panels, r.order,
                                           wall_limit, strict=False)
        for mode in matched.modes:
            rows.append(ConvergenceRow(
                cutoff_p0=r.cutoff_p0, panels=r.panels, order=r.order, nodes=len(op.grid),
                n=mode.n, energy=mode.energy, eig_real=mode.eigenvalue.real,
                eig_imag=mode.eigenvalue.imag, rel_error=mode.rel_error, overlap=mode.overlap,
                residual=oracle_residual(op, mode.n), resolved=mode.resolved))
    return ConvergenceReport(tuple(rows), tuple(res), n_max)
