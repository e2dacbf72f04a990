"""Deterministic identity testing for read-once algebraic branching programs and their sums."""

from .field import AnchorSet, FieldError, PrimeField, Scalar, lagrange_basis
from .formula import (FormulaNode, build_chain, build_fn, max_path3_free, parse,
                      product_program, to_roabp)
from .oracle import (AlignmentVerdict, CapExceeded, SparseMultilinear, dependent_vars,
                     from_roabp, is_aligned, is_decent, is_prealigned, is_prealigned_on)
from .pit import (AlignmentResult, BlackBox, BlackBoxHandle, PITReport, StructuralHandle,
                  find_alignment, pit_single_blackbox, pit_single_structural,
                  sum_pit_blackbox, sum_pit_nonblackbox, sum_pit_semiblackbox)
from .roabp import (ROABP, Const, Edge, ROABPError, Var, constant_path_sum, evaluate,
                    make_program, normalize, partial_derivative, present_vars, restrict,
                    scale, validate, zero_program)
from .svgen import (PointSet, SVGenerator, generator_image, low_weight_set,
                    nullstellensatz_grid, sum_set)

__version__ = "0.1.0"
