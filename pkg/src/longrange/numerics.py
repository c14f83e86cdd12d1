"""Numerical kernels: symmetric eigensolvers, semi-infinite quadrature, power-law fits."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.typing import ArrayLike, NDArray

DEFAULT_NODES = 50


def eig_sym(matrix: ArrayLike) -> tuple[NDArray, NDArray]:
    """Eigenvalues (ascending) and orthonormal eigenvectors of a real symmetric matrix.

    Backed by LAPACK through ``numpy.linalg.eigh``; the lower triangle is used.
    """
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise ValueError("expected a non-empty square matrix")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return np.linalg.eigh(m)


def eig_sym_lowest(matrix: ArrayLike, count: int) -> tuple[NDArray, NDArray]:
    """The ``count`` lowest eigenpairs; uses a partial LAPACK solve for large matrices."""
    m = np.asarray(matrix, dtype=float)
    n = m.shape[0]
    if count >= n or n < 200:
        w, v = eig_sym(m)
        return w[:count], v[:, :count]
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    from scipy.linalg import eigh
    return eigh(m, subset_by_index=(0, count - 1), driver="evr", check_finite=False)


def jacobi_eig(matrix: ArrayLike, tol: float = 1e-14, max_sweeps: int = 100) -> tuple[NDArray, NDArray]:
    """Cyclic Jacobi diagonalization, row-by-row sweep order.

    Slow but independent of LAPACK; used to cross-check :func:`eig_sym`.
    """
    a = np.array(matrix, dtype=float)
    n = a.shape[0]
    if a.shape != (n, n) or not np.all(np.isfinite(a)):
        raise ValueError("expected a finite square matrix")
    a = 0.5 * (a + a.T)
    v = np.eye(n)
    scale = max(np.linalg.norm(a), 1e-300)
    for _ in range(max_sweeps):
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) < 1e-300:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.hypot(theta, 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                ap, aq = a[:, p].copy(), a[:, q].copy()
                a[:, p], a[:, q] = c * ap - s * aq, s * ap + c * aq
                ap, aq = a[p, :].copy(), a[q, :].copy()
                a[p, :], a[q, :] = c * ap - s * aq, s * ap + c * aq
                vp, vq = v[:, p].copy(), v[:, q].copy()
                v[:, p], v[:, q] = c * vp - s * vq, s * vp + c * vq
    else:
        warnings.warn("Jacobi iteration did not converge", RuntimeWarning)
    w = np.diag(a).copy()
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and weights on [0, inf) for integrands decaying like u**-4.

    Gauss-Legendre on t in (-1, 1) mapped through u = scale * ((1+t)/(1-t))**2.
    """

    nodes: NDArray
    weights: NDArray
    scale: float

    @property
    def count(self) -> int:
        return len(self.nodes)

    @classmethod
    def build(cls, scale: float, count: int = DEFAULT_NODES) -> "QuadratureRule":
        if scale <= 0 or count < 2:
            raise ValueError("scale must be positive and count >= 2")
        t, w = np.polynomial.legendre.leggauss(count)
        x = (1.0 + t) / (1.0 - t)
        nodes = scale * x * x
        weights = w * scale * 2.0 * x * 2.0 / (1.0 - t) ** 2
        return cls(nodes, weights, scale)

    @classmethod
    def for_gaps(cls, gaps: ArrayLike, count: int = DEFAULT_NODES) -> "QuadratureRule":
        """Rule centred on the geometric mean of the smallest and largest gap."""
        g = np.abs(np.asarray(gaps, dtype=float))
        g = g[g > 0]
        if g.size == 0:
            raise ValueError("no non-zero gaps")
        return cls.build(math.sqrt(g.min() * g.max()), count)


def integrate_seminfinite(f: Callable[[NDArray], NDArray], rule: QuadratureRule) -> tuple[float, float]:
    """Integrate f over [0, inf). Returns (estimate, tail bound).

    ``f`` is called once with the array of nodes. The tail bound is the
    contribution of the outermost node; a large value relative to the total
    signals an integrand that does not decay fast enough.
    """
    values = np.asarray(f(rule.nodes), dtype=float)
    contrib = values * rule.weights
    total = math.fsum(contrib)
    tail = abs(contrib[-1])
    if total != 0 and tail > 1e-6 * abs(total):
        warnings.warn("quadrature tail is large; integrand may not decay", RuntimeWarning)
    return total, tail


@dataclass(frozen=True)
class PowerLawFit:
    coefficient: float
    residual: float


def fit_power_law(r: ArrayLike, e: ArrayLike, n: int) -> PowerLawFit:
    """Least-squares c in E = c / R**n; residual is the max relative misfit."""
    r = np.asarray(r, dtype=float)
    e = np.asarray(e, dtype=float)
    if r.size < 3 or r.shape != e.shape:
        raise ValueError("need at least 3 matching points")
    basis = r ** (-float(n))
    c = float(np.dot(basis, e) / np.dot(basis, basis))
    model = c * basis
    denom = np.max(np.abs(e))
    residual = float(np.max(np.abs(e - model)) / denom) if denom > 0 else 0.0
    if residual > 0.01:
        warnings.warn(f"power-law fit residual {residual:.3g} exceeds 1%", RuntimeWarning)
    return PowerLawFit(c, residual)


def compensated_sum(values) -> float:
    """Exactly rounded floating sum (Shewchuk), used where cancellation matters."""
    return math.fsum(values)
