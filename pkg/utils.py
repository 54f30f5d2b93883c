import numpy as np
from scipy import sparse

from constants import HERMITIAN_TOLERANCE


class NonHermitianError(ValueError):
    pass


def hermiticity_residual(matrix) -> float:
    """Largest absolute entry of matrix - matrix^dagger, for dense or sparse input."""
    difference = matrix - matrix.conj().T
    if sparse.issparse(difference):
        return float(abs(difference).max()) if difference.nnz else 0.0
    return float(np.max(np.abs(difference), initial=0.0))


def require_hermitian_matrix(matrix, what: str = "matrix", tolerance: float = HERMITIAN_TOLERANCE):
    """
    Check that a square matrix is Hermitian and return its symmetrized copy,
    so that eigh sees exactly Hermitian input. Sparse input stays sparse.

    :raises NonHermitianError: when the residual exceeds the tolerance.
    """
    matrix = sparse.csr_matrix(matrix, dtype=complex) if sparse.issparse(matrix) else np.asarray(matrix, dtype=complex)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ValueError(f"{what} must be square, got shape {matrix.shape}")
    residual = hermiticity_residual(matrix)
    if residual > tolerance:
        raise NonHermitianError(f"{what} is not Hermitian (residual {residual:.3e} > {tolerance:.1e})")
    symmetrized = (matrix + matrix.conj().T) * 0.5
    return symmetrized.tocsr() if sparse.issparse(symmetrized) else symmetrized
