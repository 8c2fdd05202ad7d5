"""Linear-optical estimation of multivariate traces (Bargmann invariants).

Simulates the Fourier-interferometer protocol on multiphoton multimode
states and cross-checks it against a brute-force Gram-chain oracle.
"""
__version__ = "0.1.0"

from bargmann.errors import (CapacityError, ConsistencyError, SeriesError, TruncationError,
                             UndefinedEntropyError)
from bargmann.fock import (MixedState, ModeLayout, PureState, Truncated, displaced_fock_state,
                           dual_rail_qubit, enumerate_sector, fock_state, inner_product,
                           random_pure_state, single_photon_state, tensor_product,
                           truncated_coherent_state, vacuum)
from bargmann.interferometer import (ModeUnitary, apply_to_mixture, beamsplitter_matrix,
                                     cyclic_matrix, diagonal_phases, fourier_matrix,
                                     lift_and_apply, permanent, random_unitary)
from bargmann.kernels import BACKEND as KERNEL_BACKEND
from bargmann.oracle import (certify_cyclic_symmetry, cyclic_expectation,
                             direct_multivariate_trace, symmetric_projection_weight)
from bargmann.protocol import (EXACT, InvariantEstimate, Sampled, estimate_multivariate_trace,
                               recover_X, sample_count)
from bargmann.applications import (classifier_eval, hom_overlap, husimi_q, kernel_matrix,
                                   kirkwood_dirac, positive_p, renyi_entropy,
                                   spectrum_from_traces, wigner_point)
