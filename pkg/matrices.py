"""Real eigenvalue counts of Gaussian matrices and characteristic polynomials."""
import math
from dataclasses import dataclass

import numpy as np

from errors import require
from numerics import Poly, double_factorial_ratio, log_gamma

CHAR_POLY_MAX_ORDER = 12


@dataclass(frozen=True)
class SquareMatrix:
    order: int
    entries: tuple

    def __post_init__(self):
        require(self.order >= 1, f"matrix order must be >= 1, got {self.order}")
        require(len(self.entries) == self.order * self.order,
                f"expected {self.order ** 2} entries, got {len(self.entries)}")

    @property
    def array(self):
        return np.asarray(self.entries, dtype=float).reshape(self.order, self.order)

    @classmethod
    def from_array(cls, arr):
        arr = np.asarray(arr, dtype=float)
        require(arr.ndim == 2 and arr.shape[0] == arr.shape[1], "matrix must be square")
        return cls(arr.shape[0], tuple(arr.ravel().tolist()))


def real_eigen_expected(n):
    """Expected number of real eigenvalues of an n x n matrix with iid N(0, 1) entries"""
    require(n >= 1, f"matrix order must be >= 1, got {n}")
    root2 = math.sqrt(2.0)
    if n % 2 == 0:
        return root2 * math.fsum(double_factorial_ratio(4 * k - 1, 4 * k) for k in range(n // 2))
    return 1.0 + root2 * math.fsum(double_factorial_ratio(4 * k - 3, 4 * k - 2) for k in range(1, (n - 1) // 2 + 1))


def real_eigen_asymptotic(n):
    require(n >= 1, f"matrix order must be >= 1, got {n}")
    return math.sqrt(2.0 * n / math.pi)


def matrix_poly_factor(p):
    """Ratio of expected real zeros of det(sum A_k f_k(t)) with p x p blocks to the scalar case"""
    require(p >= 1, f"block size must be >= 1, got {p}")
    return math.sqrt(math.pi) * math.exp(log_gamma((p + 1) / 2.0) - log_gamma(p / 2.0))


def kac_matrix(n):
    """(n+1) x (n+1) Clement matrix, spectrum {2k - n}"""
    require(n >= 1, f"Kac matrix needs n >= 1, got {n}")
    arr = np.zeros((n + 1, n + 1))
    for k in range(n):
        arr[k, k + 1] = n - k
        arr[k + 1, k] = k + 1
    return SquareMatrix.from_array(arr)


def char_poly(matrix):
    """det(lambda I - A) by the Faddeev-LeVerrier recurrence, ascending coefficients"""
    a = matrix.array if isinstance(matrix, SquareMatrix) else np.asarray(matrix, dtype=float)
    n = a.shape[0]
    require(n <= CHAR_POLY_MAX_ORDER, f"characteristic polynomial limited to order {CHAR_POLY_MAX_ORDER}, got {n}")
    descending = [1.0]
    eye = np.eye(n)
    m = np.zeros((n, n))
    for k in range(1, n + 1):
        m = a @ m + descending[-1] * eye
        descending.append(-float(np.trace(a @ m)) / k)
    return Poly(tuple(reversed(descending)))
