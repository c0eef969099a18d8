"""Simulation and stability-certificate toolkit for a boundary-controlled
nonhomogeneous flexible wing.

The wing bends and twists along its span with spatially varying mass,
stiffness and Kelvin-Voigt damping; flaps at the free tip apply a
rate-plus-position feedback that cancels the tip-store inertia. The
package discretizes the coupled system (Hermite/Lagrange Galerkin),
integrates it under tip disturbances, evaluates the closed-form decay
certificate and disturbance ultimate bounds, and cross-checks the
analytic machinery numerically.
"""

__version__ = "0.1.0"

from .certificates import (CertificateParameters, CertificateReport,
                           check_certificate, compute_Km, compute_eps_stars,
                           compute_lambdas, compute_norm_AdB, compute_norm_B,
                           feasibility_search, ultimate_bounds)
from .fem import DiscreteSystem, DofMap, Mesh, assemble, first_order_form, interpolate
from .model import (ControlLaw, DisturbanceSpec, InitialCondition, WingModel,
                    bent_twisted_initial_condition, default_model,
                    flutter_prone_model, persistent_disturbance,
                    vanishing_disturbance, zero_disturbance)
from .profiles import SpatialProfile, essential_bounds, evaluate_profile, product_bounds
from .simulation import (SimulationConfig, Trajectory, decay_fit, energy_H1,
                         energy_H2, propagate_expm, simulate, step_newmark)
from .verification import (apply_A1_inverse, build_B_lift,
                           discrete_generator_spectrum,
                           nondissipativity_witness, run_verification)

__all__ = [
    "__version__",
    "CertificateParameters", "CertificateReport", "check_certificate",
    "compute_Km", "compute_eps_stars", "compute_lambdas", "compute_norm_AdB",
    "compute_norm_B", "feasibility_search", "ultimate_bounds",
    "DiscreteSystem", "DofMap", "Mesh", "assemble", "first_order_form", "interpolate",
    "ControlLaw", "DisturbanceSpec", "InitialCondition", "WingModel",
    "bent_twisted_initial_condition", "default_model", "flutter_prone_model",
    "persistent_disturbance", "vanishing_disturbance", "zero_disturbance",
    "SpatialProfile", "essential_bounds", "evaluate_profile", "product_bounds",
    "SimulationConfig", "Trajectory", "decay_fit", "energy_H1", "energy_H2",
    "propagate_expm", "simulate", "step_newmark",
    "apply_A1_inverse", "build_B_lift", "discrete_generator_spectrum",
    "nondissipativity_witness", "run_verification",
]
