"""Modular equations of levels 2, 3, 4 and the Ramanujan-type 1/pi series they yield."""
from .derive import SeriesCertificate, derive, derive_certificate
from .kernels import BACKEND
from .modeq import ModularEquation, solve_modular_equation
from .numerics import HPReal, QuadraticSurd, compute_pi
from .verify import verify_certificate

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "HPReal",
    "ModularEquation",
    "QuadraticSurd",
    "SeriesCertificate",
    "compute_pi",
    "derive",
    "derive_certificate",
    "solve_modular_equation",
    "verify_certificate",
]
