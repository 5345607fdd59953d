"""Fast matrix multiplication through explicit bilinear algorithms.

An algorithm is a coefficient triple (U, V, W): column q of U and V gives the
two linear forms of the q-th product and column q of W says where it lands.
"""
from ._accel import backend
from .aggregation import (ApaAlgorithm, LambdaPoly, aggregation_pair, aggregation_triple, apa_apply, apa_pair,
                          apa_recover_exact, validate_border_rank)
from .algfile import load as load_algorithm, save as save_algorithm
from .engine import (DecompositionAlgorithm, DisjointSpec, MMShape, apply_bilinear, apply_recursive, disjoint_tensor,
                     dualize, equivalence_transform, mm_tensor, operation_census, recursive_counts,
                     straightforward_algorithm, tensor_product, validate_decomposition)
from .exponents import exponent_rect, exponent_square, family_rank_formula, schonhage_tau, rank_table_rows
from .fft import MatrixPolynomial, complex_mm_3m, convolve, fft, ifft, poly_mm, select_fft_size
from .randomized import error_stats, leverage_scores, sampled_mm
from .ring import OpCounter, commutative_mm_even, seeded_random_matrix, straightforward_mm
from .zoo import load_builtin, trilinear_form_check

__version__ = "0.1.0"

__all__ = [
    "ApaAlgorithm", "DecompositionAlgorithm", "DisjointSpec", "LambdaPoly", "MMShape", "MatrixPolynomial",
    "OpCounter", "aggregation_pair", "aggregation_triple", "apa_apply", "apa_pair", "apa_recover_exact",
    "apply_bilinear", "apply_recursive", "backend", "commutative_mm_even", "complex_mm_3m", "convolve",
    "disjoint_tensor", "dualize", "equivalence_transform", "error_stats", "exponent_rect", "exponent_square",
    "fft", "ifft", "leverage_scores", "load_algorithm", "load_builtin", "mm_tensor", "operation_census",
    "family_rank_formula", "poly_mm", "recursive_counts", "sampled_mm", "save_algorithm", "schonhage_tau",
    "seeded_random_matrix", "select_fft_size", "straightforward_algorithm", "straightforward_mm",
    "rank_table_rows", "tensor_product", "trilinear_form_check", "validate_border_rank", "validate_decomposition",
]
