"""Shared numeric kernels: simplex mapping, log-domain utilities, SPD matrices."""

from __future__ import annotations

import re

import numpy as np
import scipy.linalg


class NotPositiveDefiniteError(ValueError):
    """Raised when a matrix expected to be SPD fails its Cholesky factorization."""

    def __init__(self, pivot: int):
        self.pivot = pivot
        super().__init__(f"matrix is not positive definite (pivot {pivot})")


def softmax(eta):
    """Map a natural-parameter vector to the probability simplex.

    Overflow-safe via max subtraction; invariant under adding a constant
    to every entry.
    """
    eta = np.asarray(eta, dtype=float)
    if eta.size < 1:
        raise ValueError("softmax requires a nonempty vector")
    if not np.all(np.isfinite(eta)):
        raise ValueError("softmax requires finite entries")
    shifted = eta - np.max(eta, axis=-1, keepdims=True)
    w = np.exp(shifted)
    return w / np.sum(w, axis=-1, keepdims=True)


def log_sum_exp(x):
    """Stable log(sum(exp(x))) for a nonempty finite vector."""
    x = np.asarray(x, dtype=float)
    if x.size == 0:
        raise ValueError("log_sum_exp of an empty vector is undefined")
    if not np.all(np.isfinite(x)):
        raise ValueError("log_sum_exp requires finite entries")
    m = np.max(x)
    return float(m + np.log(np.sum(np.exp(x - m))))


def lognormal_mean(lam, nu2):
    """Mean of exp(X) for X ~ N(lam, nu2): exp(lam + nu2/2)."""
    nu2 = np.asarray(nu2, dtype=float)
    if np.any(nu2 <= 0):
        raise ValueError("variance must be positive")
    return np.exp(np.asarray(lam, dtype=float) + nu2 / 2.0)


_PIVOT_RE = re.compile(r"(\d+)-th leading minor")


class SpdMatrix:
    """Symmetric positive-definite matrix with a cached Cholesky factorization.

    Solves, log-determinants and the explicit inverse all go through the
    factorization; the dense inverse is computed lazily and at most once.
    """

    def __init__(self, entries):
        a = np.array(entries, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("SpdMatrix requires a square matrix")
        scale = max(np.max(np.abs(a)), 1.0)
        if np.max(np.abs(a - a.T)) > 1e-10 * scale:
            raise ValueError("matrix is not symmetric within tolerance")
        a = (a + a.T) / 2.0
        try:
            self._lower = scipy.linalg.cholesky(a, lower=True)
        except scipy.linalg.LinAlgError as exc:
            m = _PIVOT_RE.search(str(exc))
            raise NotPositiveDefiniteError(int(m.group(1)) if m else -1) from exc
        self.entries = a
        self.dim = a.shape[0]
        self._inverse = None

    @classmethod
    def identity(cls, k: int) -> "SpdMatrix":
        return cls(np.eye(k))

    def solve(self, b):
        """Solve A x = b using the cached factorization."""
        b = np.asarray(b, dtype=float)
        y = scipy.linalg.solve_triangular(self._lower, b, lower=True)
        return scipy.linalg.solve_triangular(self._lower.T, y, lower=False)

    def logdet(self) -> float:
        """log |A|, from the Cholesky factor diagonal."""
        return float(2.0 * np.sum(np.log(np.diag(self._lower))))

    def inverse(self):
        """Dense inverse, computed once from the factorization and cached."""
        if self._inverse is None:
            inv = self.solve(np.eye(self.dim))
            self._inverse = (inv + inv.T) / 2.0
        return self._inverse
