"""
Indecomposability over the bounded disc
A rank-one quotient M -> V_g splits off only if M has a vector with D(v) = g v converging on the
open unit disc. Candidate characters g come from exact first-order right factors of a cyclic
operator, and from the diagonal when the action is already diagonal.
"""

import logging
from typing import List, Optional, Sequence

from padic_ode.diffmod import (
    DiffModule,
    classify_solution_space,
    cyclic_vector,
    linear_right_factor,
    solve_horizontal,
)
from padic_ode.errors import CyclicVectorError, PreconditionError
from padic_ode.series import TruncatedSeries
from padic_ode.utils import linalg

logger = logging.getLogger(__name__)


def quotient_characters(M: DiffModule, attempts: int = 64, seed: int = 0) -> List[TruncatedSeries]:
    out: List[TruncatedSeries] = []
    if M.is_diagonal():
        out.extend(M.action[i][i] for i in range(M.rank))
    try:
        R = cyclic_vector(M, attempts, seed).operator
        factor = linear_right_factor(R)
        if factor is not None:
            out.append(factor[0])
    except CyclicVectorError as e:
        logger.warning(f"no cyclic vector for the right-factor search: {e}")
    unique: List[TruncatedSeries] = []
    for g in out:
        if not any((g - seen).is_zero() for seen in unique):
            unique.append(g)
    return unique


def eigen_module(M: DiffModule, g: TruncatedSeries) -> DiffModule:
    """Horizontal vectors of the result are the v with D(v) = g v in M"""
    A = M.matrix()
    shifted = [[A[i][j] - g if i == j else A[i][j] for j in range(M.rank)] for i in range(M.rank)]
    return DiffModule.from_matrix(shifted, M.ctx)


def indecomposability_check(M: DiffModule, candidates: Optional[Sequence[TruncatedSeries]] = None,
                            n_terms: int = 200) -> bool:
    """True when no candidate quotient character has a convergent eigenvector"""
    if M.rank != 2:
        raise PreconditionError(f"indecomposability_check needs rank 2, got {M.rank}")
    if M.domain.is_annulus:
        raise PreconditionError("indecomposability is decided over the bounded disc")
    if candidates is None:
        candidates = quotient_characters(M)
    for g in candidates:
        N = eigen_module(M, g)
        solutions = solve_horizontal(N, n_terms)
        report = classify_solution_space(N, solutions)
        if report.convergent_dimension:
            logger.info(f"eigenvector for {g!r} converges: M splits")
            return False
        logger.info(f"no convergent eigenvector for {g!r}")
    return True


def is_direct_sum_basis(vectors: Sequence[Sequence[TruncatedSeries]]) -> bool:
    """Columns form a basis of the free module: their determinant is a unit"""
    return linalg.det(linalg.columns_to_matrix(list(vectors))).is_unit()
