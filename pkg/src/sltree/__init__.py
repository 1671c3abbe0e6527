"""Spectral computations for Sturm-Liouville operators on compact metric trees:
characteristic functions, spectra, Weyl functions, and potential recovery from
systems of spectra when one edge's potential is known."""

from .errors import (CertificationError, FitError, IntegrationError, PairingError,
                     PipelineError, PoleProximityError, SltreeError, TrackingError,
                     TreeStructureError)
from .graph import (Edge, FivePartDecomposition, MetricTree, ValidationReport,
                    VertexSplit, load_problem, reassemble, save_problem,
                    split_at_vertex, split_edge_environment, validate_tree)
from .potentials import Potential, PotentialSet
from .ode import (FundamentalPair, SpectralParameter, fundamental_pair,
                  fundamental_pair_grid, principal_sqrt)
from .charfn import (CharFn, ProblemSpec, SpectrumSet, WeylSample, all_dirichlet,
                     assemble_char_fn, char_fn_by_split, eigenvalues_near,
                     find_eigenvalues, subtree_weyl_ratio, weyl_function,
                     with_neumann)
from .hadamard import TruncatedProduct, reconstruct_char_fn
from .identities import (growth_comparison, identity_suite_q0,
                         pair_product_identity, split_equivalence,
                         two_vertex_factorization)
from .inverse import (CoefficientTable, InverseOptions, InverseResult,
                      PotentialBasis, RecoveredPotential, ReferenceTable,
                      RootTrack, build_coefficient_table, cut_boundary_edges,
                      recover_edge_potential, reference_table,
                      run_partial_inverse, solve_quadratic_track,
                      split_end_ratio_model)

__version__ = "0.1.0"
