"""Non-planar periodic orbits on the vertical axis of the circular restricted 3- and 4-body problems."""

from .action import ActionReport, action_gradient, action_value, el_residual
from .configuration import (CircularConfig, DomainError, MassSystem, circular_config,
                            three_body_phases, three_body_radii, three_body_side,
                            two_body_radii, validate_config)
from .jacobi import (JacobiReport, first_conjugate_point, jacobi_field, jacobi_report,
                     nonminimality_certificate, second_variation_coeffs)
from .loopspace import LoopZ, SymmetryClass, project_symmetry, random_loop
from .odeverify import integrate, verify_periodicity
from .optimizer import MinimizeOptions, MinimizerReport, minimize, minimize_refined

__version__ = "0.1.0"

__all__ = [
    "ActionReport", "CircularConfig", "DomainError", "JacobiReport", "LoopZ", "MassSystem",
    "MinimizeOptions", "MinimizerReport", "SymmetryClass", "action_gradient", "action_value",
    "circular_config", "el_residual", "first_conjugate_point", "integrate", "jacobi_field",
    "jacobi_report", "minimize", "minimize_refined", "nonminimality_certificate",
    "project_symmetry", "random_loop", "second_variation_coeffs", "three_body_phases",
    "three_body_radii", "three_body_side", "two_body_radii", "validate_config",
    "verify_periodicity",
]
