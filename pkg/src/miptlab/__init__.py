"""Numerical laboratory for the spectral transitions of P U'PUP.

Subpackages:
  linalg        dense Hermitian eigensolves and unitarity checks
  ensembles     seeded GUE / Cayley / Haar sampling
  measurement   projectors and sandwich operators
  chain, grid   1D and 2D circuit unitaries
  spectral      atoms, gaps, moments, trajectories, decay fits
  theory        self-consistent resolvent theory and closed forms
  experiments   declarative sweeps, aggregation, file emission
"""

__version__ = "0.1.0"
