"""Desk-scale laboratory for sparse domination of pseudodifferential operators
and oscillatory Fourier multipliers on a periodic lattice."""

from .dyadic import (Ball, CubeFamily, DyadicCube, GridShift, SparseCollection,
                     carleson_constant, certify_sparse, children, one_third_trick_cover, parent)
from .func import GridFunction, Lattice, bernstein_check, dft, inverse_dft, local_average, lp_norm
from .maximal import MaximalKind, grand_maximal, maximal, pointwise_dominate
from .multiplier import (model_multiplier, miyachi_check, oscillatory_kernel_transfer,
                         propagate, propagator, subdyadic_check)
from .pdo import (CutoffPair, DecompParams, OperatorMatrix, apply_T, decay_fit, default_cutoff,
                  frequency_piece, kernel_l1, low_piece_sum, opnorm, spatial_piece)
from .sparse import (ExponentPair, Region, dominate, in_region, region_vertices, sharpness_probe,
                     sparse_form, sparse_from_decaying, sparse_operator)
from .symbol import ClassParams, Symbol, model_bessel, model_oscillatory, model_x_dependent, seminorm_check
from .weights import (Weight, ap_characteristic, corollary_endpoints, rh_characteristic,
                      weight_preset, weighted_sparse_bound_check)

__version__ = "0.1.0"
