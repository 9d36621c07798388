"""Fleming-Viot particle system for Brownian motion with drift -1 killed at 0:
simulation, quasi-stationary analytics, and selection-principle diagnostics."""

from . import fleming_viot, kernel, killed, measures, nbbm, qsd  # noqa: F401

__version__ = "0.1.0"
