"""Constrained joint spectral radius via Kronecker lifts: bounds and
high-growth accepted switching sequence generation."""

from .automaton import (AcceptancePath, Dfa, NondeterministicDfaError, Tsm, build_tsm,
                        find_path, is_accepted, is_repeatable_cycle, word_product)
from .bounds import (BoundsReport, EnumerationCapError, brute_force_rho_k,
                     gripenberg_bounds, sos_primal_upper)
from .dual import (DualCertificate, PseudoExpectation, max_feasible_gamma, moment_matrix,
                   pushforward, solve_dual, verify_certificate)
from .lift import LiftedSet, MatrixSet, build_lift, lifted_word_product
from .linalg import (DimensionError, MonomialBasis, kron, spectral_norm, spectral_radius,
                     veronese_lift)
from .sdp import SolverInconclusive
from .seqgen import (CycleReport, GramPoly, GrowthReport, SwitchingWord, alg1_generate,
                     alg2_generate, check_theta_trace, extract_cycles, growth_report,
                     random_interior_poly)

__version__ = "0.1.0"
