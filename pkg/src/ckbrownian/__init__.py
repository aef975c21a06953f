"""Quantum Brownian motion of a free particle under the Caldirola-Kanai Hamiltonian."""
from .core import (
    DomainWarning,
    EnsembleReport,
    GaussianPacket,
    NoisePath,
    PhysicalParams,
    SpatialGrid,
    TimeGrid,
    ValidationError,
    WaveField,
    validate,
)

__version__ = "0.1.0"
