"""Two-by-two block operators ``S = [[S+, M], [-M*, S-]]``.

With ``J = diag(I, -I)`` such an ``S`` is J-selfadjoint.  Its non-real
eigenvalues lie within distance ``nu = ||M||`` of both ``sigma(S+)`` and
``sigma(S-)``, real eigenvalues farther than ``nu`` from ``sigma(S-)`` are
of positive type, those farther than ``nu`` from ``sigma(S+)`` of negative
type, and the resolvent grows like ``C / |Im lambda|`` away from the
enclosure.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .krein import (
    TOL_SYM,
    FundamentalSymmetry,
    KreinOperator,
    SpectralPoint,
    SpectralType,
    StadiumRegion,
    classify_spectrum,
    distance_to_points,
    is_hermitian,
    resolvent_norm,
)

__all__ = [
    "BlockOperator",
    "EnclosureReport",
    "ResolventOrderReport",
    "assemble",
    "enclosure",
    "r_alpha",
    "definiteness_threshold",
    "resolvent_order_one",
    "sharp_example",
    "sharp_eigenvalues",
    "region_inflation",
]


@dataclass(frozen=True, eq=False)
class BlockOperator:
    s_plus: np.ndarray
    s_minus: np.ndarray
    m: np.ndarray
    nu: float

    @property
    def n_plus(self):
        return self.s_plus.shape[0]

    @property
    def n_minus(self):
        return self.s_minus.shape[0]

    @property
    def symmetry(self):
        return FundamentalSymmetry.from_counts(self.n_plus, self.n_minus)

    @property
    def matrix(self):
        return np.block([[self.s_plus, self.m], [-self.m.conj().T, self.s_minus]])

    def krein_operator(self):
        return KreinOperator(self.matrix, self.symmetry)

    def scaled(self, factor):
        """Same diagonal blocks with the coupling ``M`` multiplied by ``factor``."""
        return assemble(self.s_plus, self.s_minus, factor * self.m)


def assemble(s_plus, s_minus, m, tol_sym=TOL_SYM):
    """Build a :class:`BlockOperator`; the lower-left block is exactly ``-M^*``."""
    s_plus = np.atleast_2d(np.asarray(s_plus, dtype=complex))
    s_minus = np.atleast_2d(np.asarray(s_minus, dtype=complex))
    m = np.atleast_2d(np.asarray(m, dtype=complex))
    if not is_hermitian(s_plus, tol_sym):
        raise ValueError("S+ must be a Hermitian matrix")
    if not is_hermitian(s_minus, tol_sym):
        raise ValueError("S- must be a Hermitian matrix")
    if m.shape != (s_plus.shape[0], s_minus.shape[0]):
        raise ValueError(
            f"M must have shape {(s_plus.shape[0], s_minus.shape[0])}, got {m.shape}"
        )
    # exact Hermitian symmetrisation of the diagonal blocks
    s_plus = 0.5 * (s_plus + s_plus.conj().T)
    s_minus = 0.5 * (s_minus + s_minus.conj().T)
    nu = float(np.linalg.norm(m, 2)) if m.size else 0.0
    return BlockOperator(s_plus, s_minus, m, nu)


def sharp_example(z):
    """The 2x2 operator ``[[1, z], [-conj(z), -1]]``."""
    return assemble([[1.0]], [[-1.0]], [[z]])


def sharp_eigenvalues(z):
    """Closed-form spectrum of :func:`sharp_example`, ordered ``(+, -)``."""
    a = abs(z)
    if a <= 1:
        root = np.sqrt(1.0 - a * a)
        return np.array([root, -root], dtype=complex)
    root = np.sqrt(a * a - 1.0)
    return np.array([1j * root, -1j * root])


def r_alpha(alpha):
    """Lower bound on ``[f, f] / ||f||^2`` for approximate eigenvectors.

    ``r(alpha) = (1 - alpha)^2 (1 + alpha) (7 - alpha) / (8 (1 + alpha^2))``
    for ``alpha = nu / dist(lambda, sigma(S-))`` in ``(0, 1)``.
    """
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in the open interval (0, 1)")
    return (1 - alpha) ** 2 * (1 + alpha) * (7 - alpha) / (8 * (1 + alpha**2))


def definiteness_threshold(alpha):
    """``eps(alpha) = (1 - alpha^2) / (4 alpha)``.

    If ``||(S - lambda) f|| <= eps(alpha) nu ||f||`` then
    ``[f, f] >= r(alpha) ||f||^2``.
    """
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in the open interval (0, 1)")
    return (1 - alpha**2) / (4 * alpha)


def region_inflation(spectral_radius):
    """Containment slack ``max(1e-8, 1e-10 * spectral_radius)``."""
    return max(1e-8, 1e-10 * float(spectral_radius))


def _real_complement(points, nu):
    """Intervals of ``R`` farther than ``nu`` from every point; ``None`` = infinite end."""
    points = np.sort(np.real(np.asarray(points)))
    if points.size == 0:
        return [(None, None)]
    gaps = [(None, float(points[0] - nu))]
    for a, b in zip(points[:-1], points[1:]):
        if b - a > 2 * nu:
            gaps.append((float(a + nu), float(b - nu)))
    gaps.append((float(points[-1] + nu), None))
    return gaps


@dataclass
class ResolventOrderReport:
    constant: float
    far_constant: float
    n_samples: int
    n_far: int
    far_bound: float = 2.0
    tol: float = 1e-6

    @property
    def far_ok(self):
        return self.n_far == 0 or self.far_constant <= self.far_bound + self.tol

    def to_dict(self):
        return {
            "constant": self.constant,
            "far_constant": self.far_constant,
            "n_samples": self.n_samples,
            "n_far": self.n_far,
            "far_ok": self.far_ok,
        }


@dataclass
class EnclosureReport:
    nu: float
    spectrum_plus: np.ndarray
    spectrum_minus: np.ndarray
    points: list
    inflation: float
    violations: list = field(default_factory=list)
    boundary: list = field(default_factory=list)
    resolvent: ResolventOrderReport | None = None

    @property
    def hull_plus(self):
        return StadiumRegion(float(self.spectrum_plus.min()), float(self.spectrum_plus.max()), self.nu)

    @property
    def hull_minus(self):
        return StadiumRegion(float(self.spectrum_minus.min()), float(self.spectrum_minus.max()), self.nu)

    @property
    def positive_type_set(self):
        return _real_complement(self.spectrum_minus, self.nu)

    @property
    def negative_type_set(self):
        return _real_complement(self.spectrum_plus, self.nu)

    @property
    def resolvent_order_one_constant(self):
        return None if self.resolvent is None else self.resolvent.constant

    def nonreal(self):
        return [p for p in self.points if p.kind is SpectralType.NONREAL]

    def to_dict(self):
        return {
            "nu": self.nu,
            "spectrum_plus": [float(x) for x in self.spectrum_plus],
            "spectrum_minus": [float(x) for x in self.spectrum_minus],
            "nonreal_region": {
                "plus_hull": self.hull_plus.to_dict(),
                "minus_hull": self.hull_minus.to_dict(),
            },
            "positive_type_set": self.positive_type_set,
            "negative_type_set": self.negative_type_set,
            "eigenvalues": [p.to_dict() for p in self.points],
            "on_boundary": self.boundary,
            "inflation": self.inflation,
            "violations": self.violations,
            "resolvent_order_one": None if self.resolvent is None else self.resolvent.to_dict(),
        }


def enclosure(b, boundary_tol=1e-10, with_resolvent=False):
    """Check the block enclosure claims against a dense eigensolve.

    Non-real eigenvalues must lie in ``K_nu(sigma(S+)) & K_nu(sigma(S-))``
    (distances to the discrete spectra, not their hulls); real eigenvalues
    outside ``K_nu(sigma(S-))`` must be of positive type and those outside
    ``K_nu(sigma(S+))`` of negative type.  Failures are collected in
    ``violations`` as ``{"lambda": [re, im], "claim": ...}`` entries.
    """
    sp = np.linalg.eigvalsh(b.s_plus)
    sm = np.linalg.eigvalsh(b.s_minus)
    points = classify_spectrum(b.krein_operator())
    lams = np.array([p.lam for p in points])
    rho = float(np.max(np.abs(lams))) if lams.size else 0.0
    infl = region_inflation(rho)
    nu = b.nu
    dp = distance_to_points(lams, sp)
    dm = distance_to_points(lams, sm)

    violations = []
    boundary = []
    for p, dist_p, dist_m in zip(points, dp, dm):
        where = [float(p.lam.real), float(p.lam.imag)]
        if p.kind is SpectralType.NONREAL:
            if dist_p > nu + infl or dist_m > nu + infl:
                violations.append({"lambda": where, "claim": "(i) non-real eigenvalue outside enclosure"})
            excess = max(dist_p, dist_m) - nu
            boundary.append({"lambda": where, "excess": float(excess),
                             "on_boundary": bool(abs(excess) <= boundary_tol)})
            continue
        if dist_m > nu + infl and p.kind is not SpectralType.POSITIVE:
            violations.append({"lambda": where, "claim": "(ii) expected positive type"})
        if dist_p > nu + infl and p.kind is not SpectralType.NEGATIVE:
            violations.append({"lambda": where, "claim": "(iii) expected negative type"})

    report = EnclosureReport(nu, sp, sm, points, infl, violations, boundary)
    if with_resolvent:
        report.resolvent = resolvent_order_one(b)
        if not report.resolvent.far_ok:
            violations.append({"lambda": None, "claim": "resolvent bound 2/|Im lambda| exceeded"})
    return report


def _order_one_samples(b, delta, sample_count):
    S = b.matrix
    rho = float(np.max(np.abs(np.linalg.eigvals(S)))) if S.size else 0.0
    scale = max(1.0, rho)
    r_lo = max(b.nu, 1e-3 * scale)
    radii = np.geomspace(r_lo, 1e4 * scale, sample_count)
    # 16 equally spaced directions; the two real ones are dropped
    angles = 2 * np.pi * np.arange(16) / 16
    angles = angles[(angles != 0) & (angles != np.pi)]
    lam = (radii[:, None] * np.exp(1j * angles[None, :])).ravel()
    sp = np.linalg.eigvalsh(b.s_plus)
    sm = np.linalg.eigvalsh(b.s_minus)
    keep = (distance_to_points(lam, sm) > b.nu + delta) | (distance_to_points(lam, sp) > b.nu + delta)
    keep &= lam.imag != 0
    return lam[keep]


def resolvent_order_one(b, delta=None, sample_count=24):
    """Estimate ``C`` with ``||(S - lambda)^{-1}|| <= C / |Im lambda|``.

    Samples lie on logarithmic radii ``|lambda|`` from ``nu`` up to
    ``1e4 max(1, rho(S))`` in 14 non-real directions, and are kept when
    ``dist(lambda, sigma(S-)) > nu + delta`` or
    ``dist(lambda, sigma(S+)) > nu + delta``.  The sub-sample with
    ``|Im lambda| >= 2 nu`` obeys ``C <= 2``.
    """
    if delta is None:
        delta = max(0.1 * b.nu, 1e-3)
    if delta <= 0:
        raise ValueError("delta must be positive")
    lam = _order_one_samples(b, delta, sample_count)
    if lam.size == 0:
        raise ValueError("no admissible resolvent samples")
    S = b.matrix
    vals = np.array([resolvent_norm(S, z) * abs(z.imag) for z in lam])
    if not np.all(np.isfinite(vals)):
        raise ValueError("resolvent sample hit the spectrum")
    far = np.abs(lam.imag) >= 2 * b.nu
    return ResolventOrderReport(
        constant=float(vals.max()),
        far_constant=float(vals[far].max()) if far.any() else 0.0,
        n_samples=int(lam.size),
        n_far=int(far.sum()),
    )
