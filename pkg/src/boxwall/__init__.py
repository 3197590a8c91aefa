"""Spectral toolkit for a particle in an infinite box with wall-corrected Hamiltonian."""

__version__ = "0.1.0"

from .domain import (BoxConfig, MomentumGrid, PositionGrid, WaveSample,  # noqa: E402
                     make_box_config, make_momentum_grid)

__all__ = ["BoxConfig", "MomentumGrid", "PositionGrid", "WaveSample", "make_box_config",
           "make_momentum_grid", "__version__"]
