"""Constraint-based termination prover for tabled programs."""

from .certificate import (Certificate, ConstraintStatus, FingerprintMismatch,
                          check_certificate, check_constraint, check_mapping,
                          fingerprint, role_constraints)
from .constraints import (Alternative, Eliminated, SymbolCond, SymConstraint,
                          eliminate, gen_rigid_quasi, gen_validity)
from .prover import (INAPPLICABLE, PROVED, UNPROVED, Composition,
                     CompositionRejected, ExtendsViolation, ProofReport,
                     compose_min, compose_sum, prove_lg, prove_quasi)
from .solver import satisfies, solve
from .symbolic import (Ineq, Poly, SymbolId, SymExpr, concrete_level,
                       concrete_norm, ext_coeff, functor_coeff, pred_coeff,
                       program_symbols, size_expr, symbolic_level,
                       symbolic_norm)
