"""Bounded J-selfadjoint perturbations of J-non-negative operators.

For ``A0`` with ``J A0`` positive definite and a J-selfadjoint ``V`` the
non-real spectrum of ``A0 + V`` lies in ``K_r((-d, d))`` with

    r = (1 + tau0) / 2 * ||V||,      d = -(1 + tau0) / 2 * min sigma(J V),

where ``tau0 = ||E+ - E-||`` measures how far the spectral decomposition
of ``A0`` is from the given fundamental symmetry.  ``tau0`` is available
exactly from the spectral projections and, independently, as the norm of
a resolvent integral evaluated by quadrature.

In finite dimensions ``0`` and ``infinity`` are never singular critical
points, so that hypothesis is not checked.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .blocks import region_inflation
from .krein import (
    FundamentalSymmetry,
    KreinOperator,
    NumericalError,
    SpectralType,
    StadiumRegion,
    classify_eigenpairs,
    classify_spectrum,
    is_hermitian,
)
from .quadrature import ResolventSum, integrate_panels

__all__ = [
    "NonNegativePair",
    "SpectralProjections",
    "PerturbationBounds",
    "TauEstimate",
    "VerificationReport",
    "make_pair",
    "spectral_projections",
    "tau_quadrature",
    "tau_eta_quadrature",
    "default_cutoff",
    "bounds_main1",
    "verify_main1",
    "bounds_main2",
    "verify_main2",
    "main1_constants",
    "main2_radius",
]

PSD_TOL = 1e-10
INVERTIBLE_TOL = 1e-10
NONNEG_BRANCH_TOL = 1e-12
# initial panel width in log t; adaptivity refines where needed
LOG_PANEL_WIDTH = 3.0


def _herm(X):
    return 0.5 * (X + X.conj().T)


@dataclass(frozen=True, eq=False)
class NonNegativePair:
    """``A0`` J-non-negative and invertible, ``V`` J-selfadjoint."""

    a0: KreinOperator
    v: np.ndarray

    def __post_init__(self):
        if not isinstance(self.a0, KreinOperator):
            raise TypeError("a0 must be a KreinOperator")
        v = np.asarray(self.v)
        if v.shape != self.a0.matrix.shape:
            raise ValueError("V must have the same shape as A0")
        H = _herm(self.a0.hermitian_form)
        hnorm = float(np.linalg.norm(H, 2))
        if np.linalg.eigvalsh(H)[0] < -PSD_TOL * hnorm:
            raise ValueError("A0 is not J-non-negative: J A0 has a negative eigenvalue")
        smin = scipy.linalg.svdvals(self.a0.matrix)[-1]
        if smin <= INVERTIBLE_TOL * float(np.linalg.norm(self.a0.matrix, 2)):
            raise ValueError("A0 is not invertible (0 is an eigenvalue)")
        if not is_hermitian(self.a0.symmetry.apply(v)):
            raise ValueError("V is not J-selfadjoint: J V is not Hermitian")
        object.__setattr__(self, "v", v)

    @property
    def symmetry(self):
        return self.a0.symmetry

    @property
    def jv(self):
        return _herm(self.symmetry.apply(self.v))

    def perturbed(self):
        return KreinOperator(self.a0.matrix + self.v, self.symmetry)


def make_pair(a0, v, signs):
    """Convenience constructor from raw matrices and a signature."""
    J = FundamentalSymmetry(np.asarray(signs))
    return NonNegativePair(KreinOperator(np.asarray(a0), J), np.asarray(v))


@dataclass
class SpectralProjections:
    e_plus: np.ndarray
    e_minus: np.ndarray
    eigenvalues: np.ndarray
    checks: dict

    @property
    def j_tilde(self):
        return self.e_plus - self.e_minus

    @property
    def tau(self):
        """``||E+ - E-||`` in the spectral norm."""
        return float(np.linalg.norm(self.j_tilde, 2))

    def __iter__(self):
        yield self.e_plus
        yield self.e_minus
        yield self.j_tilde


def _gram_matrix(gram, n):
    gram = np.asarray(gram)
    return np.diag(gram.astype(float)) if gram.ndim == 1 else gram


def _positive_decomposition(A, G):
    """Diagonalise ``A`` when ``G A`` is Hermitian positive definite.

    With ``G A = C C^*`` the matrix ``K = C^* G^{-1} C`` is Hermitian and
    ``A = X diag(w) X^{-1}`` with ``X = C^{-*} U``, ``X^{-1} = U^* C^*``.
    """
    H = _herm(G @ A)
    try:
        C = np.linalg.cholesky(H)
    except np.linalg.LinAlgError as exc:
        raise ValueError("G A is not positive definite") from exc
    K = _herm(C.conj().T @ np.linalg.solve(G, C))
    w, U = np.linalg.eigh(K)
    X = scipy.linalg.solve_triangular(C.conj().T, U, lower=False)
    Xinv = U.conj().T @ C.conj().T
    return w, X, Xinv


def spectral_projections(a0, gram=None, check_tol=1e-6):
    """Riesz projections of ``A0`` onto its positive and negative spectrum.

    ``gram`` defaults to the signature of ``a0``; a Hermitian matrix ``G``
    selects the Krein space ``[f, g] = (G f, g)`` instead.  ``G A0`` must be
    positive definite, which makes the spectrum real and ``0`` a regular
    point.  The post-conditions ``E+ + E- = I``, ``E+^2 = E+``,
    ``E-^2 = E-``, ``[E f, g] = [f, E g]`` and ``J~^2 = I`` are measured and
    stored in ``checks``.
    """
    A = a0.matrix if isinstance(a0, KreinOperator) else np.asarray(a0)
    if gram is None:
        if not isinstance(a0, KreinOperator):
            raise ValueError("a Gram matrix is required for a bare matrix")
        gram = a0.symmetry.signs
    n = A.shape[0]
    if n == 0:
        raise ValueError("empty operator")
    G = _gram_matrix(gram, n)
    H = _herm(G @ A)
    h = np.linalg.eigvalsh(H)
    scale = max(float(np.max(np.abs(h))), np.finfo(float).tiny)
    if h[0] < -PSD_TOL * scale:
        raise ValueError("operator is not non-negative; its spectrum may be non-real")
    if h[0] <= INVERTIBLE_TOL * scale:
        raise ValueError("0 is an eigenvalue within tolerance")
    w, X, Xinv = _positive_decomposition(A, G)
    pos = w > 0
    E_plus = X[:, pos] @ Xinv[pos, :]
    E_minus = X[:, ~pos] @ Xinv[~pos, :]
    I = np.eye(n)
    Jt = E_plus - E_minus
    checks = {
        "sum": float(np.max(np.abs(E_plus + E_minus - I))),
        "idempotent_plus": float(np.max(np.abs(E_plus @ E_plus - E_plus))),
        "idempotent_minus": float(np.max(np.abs(E_minus @ E_minus - E_minus))),
        "selfadjoint_plus": float(np.max(np.abs(G @ E_plus - (G @ E_plus).conj().T))),
        "selfadjoint_minus": float(np.max(np.abs(G @ E_minus - (G @ E_minus).conj().T))),
        "involution": float(np.max(np.abs(Jt @ Jt - I))),
    }
    cond = float(np.linalg.norm(X, 2) * np.linalg.norm(Xinv, 2))
    worst = max(checks.values())
    if worst > check_tol * max(1.0, cond):
        raise NumericalError(f"spectral projection post-checks failed (residual {worst:g})")
    return SpectralProjections(E_plus, E_minus, w, checks)


@dataclass
class TauEstimate:
    value: float
    n: float
    panels: int
    scheme: str
    residual: float
    evaluations: int = 0
    matrix: np.ndarray | None = field(default=None, repr=False)
    exact: float | None = None

    @property
    def gap(self):
        return None if self.exact is None else self.value - self.exact

    def to_dict(self):
        out = {
            "value": self.value,
            "n": self.n,
            "panels": self.panels,
            "scheme": self.scheme,
            "residual": self.residual,
            "evaluations": self.evaluations,
        }
        if self.exact is not None:
            out["exact"] = self.exact
            out["gap"] = self.gap
        return out


def default_cutoff(a0, tail=1e-6):
    """Cutoff ``n`` for which both truncated tails are below ``tail``.

    The integrand ``2 A0 (A0^2 + t^2)^{-1}`` behaves like ``2 A0 / t^2``
    for large ``t`` and like ``2 A0^{-1}`` near ``0``.
    """
    A = a0.matrix if isinstance(a0, KreinOperator) else np.asarray(a0)
    big = 2 * float(np.linalg.norm(A, 2))
    small = 2 * float(np.linalg.norm(np.linalg.inv(A), 2))
    return max(big, small, 1.0) / tail


def _log_edges(lo, hi, width):
    count = max(1, int(np.ceil((np.log(hi) - np.log(lo)) / width)))
    return np.exp(np.linspace(np.log(lo), np.log(hi), count + 1))


def tau_quadrature(a0, n=None, panels=None, order=8, tol=1e-10):
    """Quadrature estimate of ``tau0``.

    Integrates ``(1/pi) int_{1/n}^{n} ((A0 + it)^{-1} + (A0 - it)^{-1}) dt``
    with adaptive Gauss-Legendre panels that are uniform in ``log t``;
    ``panels`` sets the number of initial panels (default: width
    ``LOG_PANEL_WIDTH`` in ``log t``).  The spectral norm of the resulting matrix is returned as
    ``value`` and the matrix itself as ``matrix``.
    """
    A = a0.matrix if isinstance(a0, KreinOperator) else np.asarray(a0)
    if n is None:
        n = default_cutoff(A)
    if n <= 1:
        raise ValueError("cutoff n must exceed 1")
    f = ResolventSum(A)
    if panels is None:
        edges = _log_edges(1.0 / n, n, LOG_PANEL_WIDTH)
    else:
        edges = np.exp(np.linspace(-np.log(n), np.log(n), int(panels) + 1))
    res = integrate_panels(f, edges, "log", order=order, tol=tol)
    M = res.value / np.pi
    return TauEstimate(
        value=float(np.linalg.norm(M, 2)),
        n=float(n),
        panels=res.panels,
        scheme=f"gauss-legendre-{order}/log-adaptive",
        residual=res.residual / np.pi,
        evaluations=res.evaluations,
        matrix=M,
    )


def tau_eta_quadrature(a, g_inv, eta, n=1e8, order=8, tol=1e-10):
    """Quadrature estimate of ``(1/pi) ||int_{-n}^{n} (A + eta G^{-1} - it)^{-1} dt||``.

    The integrand is folded onto ``[0, n]`` as ``2 B (B^2 + t^2)^{-1}`` with
    ``B = A + eta G^{-1}``; ``G B`` must be positive definite.
    """
    A = a.matrix if isinstance(a, KreinOperator) else np.asarray(a)
    g_inv = np.asarray(g_inv)
    if A.size == 0:
        raise ValueError("empty operator")
    if g_inv.shape != A.shape:
        raise ValueError("G^{-1} must have the shape of A")
    B = A + eta * g_inv
    G = np.linalg.inv(g_inv)
    if np.linalg.eigvalsh(_herm(G @ B))[0] <= 0:
        raise ValueError("A + eta G^{-1} is not uniformly positive in (G., .)")
    f = ResolventSum(B)
    t0 = 1.0 / n
    near = integrate_panels(f, [0.0, t0], "linear", order=order, tol=tol)
    far = integrate_panels(f, _log_edges(t0, n, LOG_PANEL_WIDTH), "log", order=order, tol=tol)
    M = (near.value + far.value) / np.pi
    return TauEstimate(
        value=float(np.linalg.norm(M, 2)),
        n=float(n),
        panels=near.panels + far.panels,
        scheme=f"gauss-legendre-{order}/linear+log-adaptive",
        residual=(near.residual + far.residual) / np.pi,
        evaluations=near.evaluations + far.evaluations,
        matrix=M,
    )


@dataclass
class PerturbationBounds:
    tau0: float
    r: float
    d: float
    region: StadiumRegion | None
    v_norm: float
    min_sigma_jv: float | None
    trivial: bool = False
    tau_source: str = "exact"

    def to_dict(self):
        return {
            "tau0": self.tau0,
            "r": self.r,
            "d": self.d,
            "region": None if self.region is None else self.region.to_dict(),
            "v_norm": self.v_norm,
            "min_sigma_jv": self.min_sigma_jv,
            "trivial": self.trivial,
            "tau_source": self.tau_source,
        }


def main1_constants(tau0, v_norm, min_sigma_jv):
    """``(r, d)`` for a non-negative ``A0`` perturbed by ``V``."""
    factor = 0.5 * (1.0 + tau0)
    return factor * v_norm, -factor * min_sigma_jv


def main2_radius(eta, tau_eta, g_inv_norm):
    """``r = eta (1 + tau_eta) / 2 ||G^{-1}||``."""
    return eta * 0.5 * (1.0 + tau_eta) * g_inv_norm


def bounds_main1(pair, tau0=None):
    """Enclosure constants for ``A0 + V``.

    If ``J V`` is positive semidefinite the sum is itself non-negative and
    the trivial branch (no region) is returned.  Otherwise ``tau0`` defaults
    to the exact ``||E+ - E-||``.
    """
    jv = pair.jv
    w = np.linalg.eigvalsh(jv)
    v_norm = float(np.linalg.norm(pair.v, 2))
    jv_norm = float(np.max(np.abs(w))) if w.size else 0.0
    source = "exact" if tau0 is None else "given"
    if tau0 is None:
        tau0 = spectral_projections(pair.a0).tau
    if w[0] >= -NONNEG_BRANCH_TOL * jv_norm:
        return PerturbationBounds(tau0, 0.0, 0.0, None, v_norm, float(w[0]), True, source)
    r, d = main1_constants(tau0, v_norm, float(w[0]))
    return PerturbationBounds(
        tau0, r, d, StadiumRegion.symmetric(d, r), v_norm, float(w[0]), False, source
    )


@dataclass
class VerificationReport:
    bounds: PerturbationBounds
    points: list
    inflation: float
    violations: list = field(default_factory=list)

    @property
    def max_imag(self):
        return max((abs(p.lam.imag) for p in self.points if p.kind is SpectralType.NONREAL), default=0.0)

    @property
    def n_nonreal(self):
        return sum(p.kind is SpectralType.NONREAL for p in self.points)

    @property
    def ok(self):
        return not self.violations

    def to_dict(self):
        return {
            "bounds": self.bounds.to_dict(),
            "n_eigenvalues": len(self.points),
            "n_nonreal": self.n_nonreal,
            "max_imag": self.max_imag,
            "inflation": self.inflation,
            "violations": self.violations,
            "eigenvalues": [p.to_dict() for p in self.points],
        }


def _check_points(points, region, edge, inflation):
    violations = []
    for p in points:
        where = [float(p.lam.real), float(p.lam.imag)]
        if p.kind is SpectralType.NONREAL:
            if region is None or not region.contains(p.lam, inflation):
                violations.append({"lambda": where, "claim": "non-real eigenvalue outside region"})
        elif p.lam.real > edge + inflation and p.kind is not SpectralType.POSITIVE:
            violations.append({"lambda": where, "claim": "expected positive type"})
        elif p.lam.real < -edge - inflation and p.kind is not SpectralType.NEGATIVE:
            violations.append({"lambda": where, "claim": "expected negative type"})
    return violations


def verify_main1(pair, bounds=None):
    """Compare the spectrum of ``A0 + V`` with its enclosure.

    Checks that non-real eigenvalues lie in ``K_r((-d, d))``, real ones
    above ``d + r`` are of positive type and real ones below ``-d - r``
    of negative type.  In the trivial branch every eigenvalue must be real
    with its type given by its sign.
    """
    if bounds is None:
        bounds = bounds_main1(pair)
    points = classify_spectrum(pair.perturbed())
    rho = max((abs(p.lam) for p in points), default=0.0)
    infl = region_inflation(rho)
    edge = 0.0 if bounds.trivial else bounds.d + bounds.r
    violations = _check_points(points, bounds.region, edge, infl)
    return VerificationReport(bounds, points, infl, violations)


def bounds_main2(a, g, gamma, eta, method="exact", n=1e8):
    """Enclosure ``K_r((-r, r))`` for ``A`` selfadjoint in ``(G., .)``.

    Preconditions: ``G A`` Hermitian with ``G A >= -gamma``, ``eta > gamma``.
    ``tau_eta`` comes from the spectral projections of ``A + eta G^{-1}``
    (``method="exact"``) or from :func:`tau_eta_quadrature`.
    """
    A = np.asarray(a.matrix if isinstance(a, KreinOperator) else a)
    G = np.asarray(g)
    if not is_hermitian(G):
        raise ValueError("G must be Hermitian")
    if not is_hermitian(G @ A):
        raise ValueError("A is not selfadjoint in (G., .): G A is not Hermitian")
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    form_min = float(np.linalg.eigvalsh(_herm(G @ A))[0])
    scale = max(1.0, float(np.linalg.norm(G @ A, 2)))
    if form_min < -gamma - 1e-12 * scale:
        raise ValueError(
            f"[Af, f] >= -gamma ||f||^2 violated: smallest value {form_min:g} < {-gamma:g}"
        )
    if not eta > gamma:
        raise ValueError("eta > gamma violated")
    g_inv = np.linalg.inv(G)
    if method == "exact":
        tau = spectral_projections(A + eta * g_inv, gram=G).tau
    elif method == "quadrature":
        tau = tau_eta_quadrature(A, g_inv, eta, n).value
    else:
        raise ValueError(f"unknown method {method!r}")
    g_inv_norm = float(np.linalg.norm(g_inv, 2))
    r = main2_radius(eta, tau, g_inv_norm)
    return PerturbationBounds(
        tau, r, r, StadiumRegion.symmetric(r, r), eta * g_inv_norm, None, False, method
    )


def verify_main2(a, g, bounds):
    """Non-real spectrum inside ``K_r((-r, r))``; real points beyond ``+-2r`` definite."""
    A = np.asarray(a.matrix if isinstance(a, KreinOperator) else a)
    G = np.asarray(g)
    w, V = scipy.linalg.eig(A)
    points = classify_eigenpairs(w, V, G)
    rho = max((abs(p.lam) for p in points), default=0.0)
    infl = region_inflation(rho)
    violations = _check_points(points, bounds.region, 2 * bounds.r, infl)
    return VerificationReport(bounds, points, infl, violations)
