"""Random 2d-regular graphs from the permutation model: cycle and walk counts,
their limit laws, spectra, and linear eigenvalue statistics."""

__version__ = "0.1.0"
