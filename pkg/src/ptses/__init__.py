"""Semi-exact and quasi-exact states of the charged shifted oscillator on a
complex contour."""

from .core import EVEN, ODD, ModelParams, QuantumNumbers, SpectralResult, energy, partial_wave_index
from .charges import ChargeSpectrum, multiplet_charges, quasi_even_charges, quasi_odd_charges
from .states import SesState, make_state
from .errors import DomainError, NumericalError

__all__ = [
    "EVEN",
    "ODD",
    "ChargeSpectrum",
    "DomainError",
    "ModelParams",
    "NumericalError",
    "QuantumNumbers",
    "SesState",
    "SpectralResult",
    "energy",
    "make_state",
    "multiplet_charges",
    "partial_wave_index",
    "quasi_even_charges",
    "quasi_odd_charges",
]
