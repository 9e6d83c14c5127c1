"""Exact-plus-truncated operator calculus for noncommutative compact surfaces.

The algebra is generated by Toeplitz operators on l2(N) whose symbols respect
a boundary identification of the disc; the package builds the even spectral
triple over it and audits its properties.
"""

from .scalars import ExactMatrix, GaussianRational, I
from .fourier import (DecayReport, FourierSeries, convolve, decay_report, differentiate, evaluate,
                      from_samples, hat_involution, trig)
from .surfaces import SurfacePreset, fourier_constraints, identify, is_member, loop_generator
from .algebra import (CornerMatrix, NotInvertibleError, SurfaceElement, TruncatedOperator, adjoint,
                      invert, multiply, rapid_decay_check, shift_power, shift_power_defect,
                      toeplitz_matrix, truncate, winding_number)
from .dirac import (GradedOperator, SpectralReport, build_dirac, commutator_D, eigenbasis,
                    fredholm_index, iterated_delta, spectrum, summability_scan)
from .real_structure import (AntiUnitary, build_J, commutant_dimension, conjugate_by_J,
                             eigen_multiplicity_witness, first_order_defect)
from .geometry import (HochschildChain, PairingInput, ParityObstruction, finiteness_isometry_check,
                       finiteness_phi, hochschild_boundary, k0_battery, orientation_obstruction,
                       pairing_index, pi_D_evaluate)
from .audit import AuditConfig, AxiomReport, ConfigError, run_audit

__version__ = "0.1.0"

__all__ = [
    "ExactMatrix", "GaussianRational", "I", "DecayReport", "FourierSeries", "convolve",
    "decay_report", "differentiate", "evaluate", "from_samples", "hat_involution", "trig",
    "SurfacePreset", "fourier_constraints", "identify", "is_member", "loop_generator",
    "CornerMatrix", "NotInvertibleError", "SurfaceElement", "TruncatedOperator", "adjoint",
    "invert", "multiply", "rapid_decay_check", "shift_power", "shift_power_defect",
    "toeplitz_matrix", "truncate", "winding_number", "GradedOperator", "SpectralReport",
    "build_dirac", "commutator_D", "eigenbasis", "fredholm_index", "iterated_delta", "spectrum",
    "summability_scan", "AntiUnitary", "build_J", "commutant_dimension", "conjugate_by_J",
    "eigen_multiplicity_witness", "first_order_defect", "HochschildChain", "PairingInput",
    "ParityObstruction", "finiteness_isometry_check", "finiteness_phi", "hochschild_boundary",
    "k0_battery", "orientation_obstruction", "pairing_index", "pi_D_evaluate", "AuditConfig",
    "AxiomReport", "ConfigError", "run_audit", "__version__",
]
