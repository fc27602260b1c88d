"""Determinants of complex non-Hermitian matrices via pivoted LU."""

from __future__ import annotations

import numpy as np
import scipy.linalg as la


def lu_determinant(matrix: np.ndarray) -> tuple[complex, float]:
    """Determinant and growth factor max|U| / max|A| of a square matrix.

    The empty matrix has determinant 1.
    """
    n = matrix.shape[0]
    if n == 0:
        return 1.0 + 0.0j, 1.0
    lu, piv = la.lu_factor(matrix, check_finite=True)
    diag = np.diag(lu)
    swaps = int(np.count_nonzero(piv != np.arange(n)))
    det = complex(np.prod(diag)) * (-1.0 if swaps % 2 else 1.0)
    scale = float(np.max(np.abs(matrix)))
    growth = float(np.max(np.abs(np.triu(lu)))) / scale if scale > 0 else 1.0
    return det, growth


def log_abs_determinant(matrix: np.ndarray) -> tuple[float, complex]:
    """(ln|det|, phase) of a square matrix; (-inf, 0) when singular."""
    if matrix.shape[0] == 0:
        return 0.0, 1.0 + 0.0j
    sign, logdet = np.linalg.slogdet(matrix)
    return float(logdet), complex(sign)
