"""Spectrum, level crossings and exact degenerate states of the two-photon Rabi model."""

from .model import ModelParams, Parity, PhysicalParams, energy_from_chi, chi_from_energy, kappa_from_x, to_model_params

__all__ = [
    "ModelParams",
    "Parity",
    "PhysicalParams",
    "energy_from_chi",
    "chi_from_energy",
    "kappa_from_x",
    "to_model_params",
]

__version__ = "0.1.0"
