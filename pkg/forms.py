"""
Concrete exterior algebra on numpy arrays.

k-forms are stored as totally antisymmetric k-index arrays with the
determinant convention (a wedge b)(u, v) = a(u) b(v) - a(v) b(u), so the
2-form sum_{i<j} w_ij dx^i ^ dx^j has matrix w. Vectors act on the first slot.
"""

import math
from itertools import permutations
from typing import Tuple

import numpy as np
import scipy.linalg


def _permutation_sign(perm) -> int:
    sign = 1
    seen = list(perm)
    for i in range(len(seen)):
        while seen[i] != i:
            j = seen[i]
            seen[i], seen[j] = seen[j], seen[i]
            sign = -sign
    return sign


def antisymmetrize(tensor: np.ndarray) -> np.ndarray:
    """Alt(T): signed average over permutations of all axes."""
    rank = tensor.ndim
    total = np.zeros_like(tensor)
    for perm in permutations(range(rank)):
        total = total + _permutation_sign(perm) * np.transpose(tensor, perm)
    return total / math.factorial(rank)


def wedge(alpha: np.ndarray, beta: np.ndarray) -> np.ndarray:
    """Exterior product of a p-form and a q-form (p, q >= 1)."""
    p, q = alpha.ndim, beta.ndim
    product = np.multiply.outer(alpha, beta)
    return math.factorial(p + q) / (math.factorial(p) * math.factorial(q)) * antisymmetrize(product)


def interior(vector: np.ndarray, form: np.ndarray) -> np.ndarray:
    """Contraction of a vector into the first slot of a form."""
    return np.tensordot(vector, form, axes=(0, 0))


def pfaffian(matrix: np.ndarray) -> complex:
    """
    Pfaffian by expansion along the first row.

    For w = sum_{i<j} w_ij dx^i ^ dx^j in dimension 2n,
    w^n = n! Pf(w) dx^1 ^ ... ^ dx^2n.
    """
    n = matrix.shape[0]
    if n == 0:
        return 1.0
    if n % 2:
        return 0.0
    total = 0.0
    for j in range(1, n):
        if matrix[0, j] == 0:
            continue
        keep = [k for k in range(1, n) if k != j]
        minor = matrix[np.ix_(keep, keep)]
        total = total + (-1) ** (j - 1) * matrix[0, j] * pfaffian(minor)
    return total


def nijenhuis(J: np.ndarray, dJ: np.ndarray) -> np.ndarray:
    """
    Nijenhuis tensor N[k, i, j] of an almost complex structure field.

    Args:
        J: J[k, j] = J^k_j at the point
        dJ: dJ[k, j, l] = d_l J^k_j at the point

    Returns:
        N^k_ij = J^l_i d_l J^k_j - J^l_j d_l J^k_i - J^k_l (d_i J^l_j - d_j J^l_i)
    """
    lie = np.einsum("li,kjl->kij", J, dJ)
    curl = np.einsum("kl,lji->kij", J, dJ) - np.einsum("kl,lij->kij", J, dJ)
    return lie - np.swapaxes(lie, 1, 2) - curl


def signature(matrix: np.ndarray, rel_tol: float = 1e-9) -> Tuple[int, int]:
    """(positive, negative) eigenvalue counts of a real symmetric matrix."""
    values = np.linalg.eigvalsh(0.5 * (matrix + matrix.T))
    cutoff = rel_tol * max(1.0, np.max(np.abs(values)))
    return int(np.sum(values > cutoff)), int(np.sum(values < -cutoff))


def eigenspace(matrix: np.ndarray, eigenvalue: complex, rcond: float = 1e-8) -> np.ndarray:
    """Orthonormal basis (columns) of ker(matrix - eigenvalue)."""
    shifted = matrix.astype(complex) - eigenvalue * np.eye(matrix.shape[0])
    return scipy.linalg.null_space(shifted, rcond=rcond)


def span_residual(vectors: np.ndarray, basis: np.ndarray) -> float:
    """
    Largest relative distance of the columns of `vectors` from span(basis).

    Returns 0.0 for an empty set of vectors.
    """
    vectors = np.atleast_2d(vectors.T).T
    if vectors.shape[1] == 0:
        return 0.0
    coeffs, *_ = scipy.linalg.lstsq(basis, vectors)
    residual = vectors - basis @ coeffs
    norms = np.maximum(np.linalg.norm(vectors, axis=0), 1e-300)
    return float(np.max(np.linalg.norm(residual, axis=0) / norms))


def max_abs(array) -> float:
    return float(np.max(np.abs(np.asarray(array)))) if np.size(array) else 0.0
