"""Adaptive Gauss-Legendre panel quadrature for matrix-valued integrands."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .krein import NumericalError

__all__ = ["PanelResult", "integrate_panels", "ResolventSum"]


@dataclass
class PanelResult:
    value: np.ndarray
    panels: int
    evaluations: int
    residual: float


def _nodes(order):
    x, w = np.polynomial.legendre.leggauss(order)
    return x, w


def integrate_panels(func, edges, transform="log", order=8, tol=1e-10, max_depth=30):
    """Integrate ``func(t)`` over ``[edges[0], edges[-1]]``.

    Each initial panel is refined by bisection until the Gauss-Legendre rule
    on the panel and the sum over its two halves agree to ``tol`` (max-abs
    entry).  With ``transform="log"`` the panels are uniform in ``log t`` and
    the Jacobian ``t`` is folded in, which suits integrands decaying like
    ``t^-2``.  ``residual`` is the summed change between the two levels over
    accepted panels.
    """
    x, w = _nodes(order)
    edges = np.asarray(edges, dtype=float)
    if transform == "log":
        if np.any(edges <= 0):
            raise ValueError("log panels need positive edges")
        s_edges = np.log(edges)

        def g(s):
            t = np.exp(s)
            return t * func(t)
    elif transform == "linear":
        s_edges = edges
        g = func
    else:
        raise ValueError(f"unknown transform {transform!r}")

    counter = {"evals": 0, "panels": 0}

    def rule(a, b):
        half = 0.5 * (b - a)
        mid = 0.5 * (b + a)
        total = None
        for xk, wk in zip(x, w):
            val = g(mid + half * xk)
            counter["evals"] += 1
            total = wk * val if total is None else total + wk * val
        return half * total

    total = None
    residual = 0.0
    stack = [(a, b, rule(a, b), 0) for a, b in zip(s_edges[:-1], s_edges[1:])]
    while stack:
        a, b, coarse, depth = stack.pop()
        m = 0.5 * (a + b)
        left = rule(a, m)
        right = rule(m, b)
        fine = left + right
        err = float(np.max(np.abs(fine - coarse)))
        if not np.isfinite(err):
            raise NumericalError("non-finite integrand value in quadrature")
        if err <= tol or depth >= max_depth:
            if err > tol:
                raise NumericalError(f"quadrature failed to reach tolerance {tol:g} (error {err:g})")
            total = fine if total is None else total + fine
            residual += err
            counter["panels"] += 2
        else:
            stack.append((m, b, right, depth + 1))
            stack.append((a, m, left, depth + 1))
    return PanelResult(total, counter["panels"], counter["evals"], residual)


class ResolventSum:
    """Evaluate ``(A + it)^{-1} + (A - it)^{-1} = 2 A (A^2 + t^2)^{-1}``.

    Tridiagonal matrices are solved in banded form.  For a real matrix the
    two resolvents are complex conjugates, so one solve suffices.
    """

    def __init__(self, matrix):
        A = np.asarray(matrix)
        if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] == 0:
            raise ValueError("resolvent integrand needs a non-empty square matrix")
        self.matrix = A
        self.n = A.shape[0]
        self.real = not np.iscomplexobj(A) or not np.any(A.imag)
        self.banded = self.n > 64 and _is_tridiagonal(A)
        if self.banded:
            ab = np.zeros((3, self.n), dtype=complex)
            ab[0, 1:] = np.diag(A, 1)
            ab[1, :] = np.diag(A)
            ab[2, :-1] = np.diag(A, -1)
            self._ab = ab
            self._eye = np.eye(self.n)
        else:
            self._two_a = 2 * A
            self._a2 = A @ A

    def resolvent(self, z):
        """``(A - z)^{-1}`` for complex ``z``."""
        if self.banded:
            ab = self._ab.copy()
            ab[1] -= z
            return scipy.linalg.solve_banded((1, 1), ab, self._eye, check_finite=False)
        return np.linalg.solve(self.matrix - z * np.eye(self.n), np.eye(self.n))

    def __call__(self, t):
        if self.banded:
            R = self.resolvent(-1j * t)
            if self.real:
                return 2 * R.real
            return R + self.resolvent(1j * t)
        return np.linalg.solve(self._a2 + t * t * np.eye(self.n), self._two_a)


def _is_tridiagonal(A):
    mask = np.abs(np.subtract.outer(np.arange(A.shape[0]), np.arange(A.shape[0]))) > 1
    return not np.any(A[mask])
