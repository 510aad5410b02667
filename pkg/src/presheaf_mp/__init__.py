"""Generalized belief propagation and operator-form message passing on presheaves over finite posets."""
from .bp import BpOptions, beliefs_bp, bottom_up, bp_run, bp_step, normalize_log_messages
from .calculus import d_dual, delta, mu_dual_covariant, mu_functor, zeta_dual_covariant, zeta_functor
from .energy import (bethe_free_energy, check_subobject, criticality_residual, fe_differential, g_H,
                     hamiltonians_from_factors)
from .errors import *  # noqa: F401,F403
from .mp import MpOptions, beliefs_mp, delta_mp, mp_run, mp_step, transfer_bp_to_mp, transfer_mp_to_bp
from .oracle import (conditioning_to_hamiltonian, entropy_decomposition_check, exact_joint, exact_marginals,
                     tree_factorization_check, variational_identity_check)
from .poset import Poset, build_poset, graph_poset, mobius_table, overcount, zeta_scalar
from .presheaf import (FiniteSetPresheaf, GraphicalSpec, adjoint, graphical_presheaf, linear_sections_basis,
                       probabilistic_section_check, pullback, pushforward, sections)
from .transform import (NaturalTransformation, check_isometry, check_theorem1, check_theorem3, compose,
                        image_subpresheaf, phi_adjoint, phi_weights, push_hamiltonian, push_vector)

__version__ = "0.1.0"
