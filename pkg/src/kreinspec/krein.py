"""Finite-dimensional Krein-space linear algebra.

A Krein space here is ``C^n`` with the indefinite inner product
``[f, g] = (J f, g)`` for a diagonal signature ``J``.  An operator ``A`` is
J-selfadjoint when ``J A`` is Hermitian; its spectrum is symmetric with
respect to the real axis, and real eigenvalues are classified by the sign
of ``[u, u]`` on their eigenspaces.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

__all__ = [
    "NumericalError",
    "FundamentalSymmetry",
    "KreinOperator",
    "StadiumRegion",
    "SpectralType",
    "SpectralPoint",
    "GrowthReport",
    "krein_adjoint",
    "krein_inner",
    "classify_spectrum",
    "classify_eigenpairs",
    "classify_with_jnorms",
    "stadium_membership",
    "distance_to_points",
    "resolvent_growth_check",
    "resolvent_norm",
    "is_real_eigenvalue",
    "orthogonal_projection",
    "krein_projection",
    "compression_inverse_residual",
    "is_hermitian",
]

TOL_SYM = 1e-10
TOL_REAL = 1e-9
TOL_TYPE = 1e-10
CLUSTER_RADIUS = 1e-8
DEFECT_TOL = 1e-6


class NumericalError(RuntimeError):
    """A numerical routine failed or produced results outside tolerance."""


def is_hermitian(matrix, tol=TOL_SYM):
    """Return True if ``matrix`` equals its conjugate transpose up to ``tol``.

    The tolerance is relative to ``max(1, max|matrix_ij|)``.
    """
    matrix = np.asarray(matrix)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        return False
    if matrix.size == 0:
        return True
    scale = max(1.0, float(np.max(np.abs(matrix))))
    return float(np.max(np.abs(matrix - matrix.conj().T))) <= tol * scale


@dataclass(frozen=True, eq=False)
class FundamentalSymmetry:
    """Diagonal signature ``J = diag(signs)`` with entries in {+1, -1}."""

    signs: np.ndarray

    def __post_init__(self):
        signs = np.asarray(self.signs)
        if signs.ndim != 1:
            raise ValueError("signs must be a one-dimensional sequence")
        if not np.all((signs == 1) | (signs == -1)):
            raise ValueError("every entry of a fundamental symmetry must be +1 or -1")
        signs = signs.astype(np.int8)
        signs.setflags(write=False)
        object.__setattr__(self, "signs", signs)

    @classmethod
    def from_counts(cls, n_plus, n_minus):
        """``J = diag(I_{n_plus}, -I_{n_minus})``."""
        return cls(np.concatenate([np.ones(n_plus), -np.ones(n_minus)]))

    @classmethod
    def identity(cls, n):
        return cls(np.ones(n))

    @property
    def n(self):
        return self.signs.shape[0]

    @property
    def matrix(self):
        return np.diag(self.signs.astype(float))

    @property
    def n_plus(self):
        return int(np.count_nonzero(self.signs > 0))

    @property
    def n_minus(self):
        return int(np.count_nonzero(self.signs < 0))

    def apply(self, x):
        """Return ``J @ x`` for a vector or a matrix with ``n`` rows."""
        x = np.asarray(x)
        if x.shape[0] != self.n:
            raise ValueError(f"dimension mismatch: J is {self.n}, operand has {x.shape[0]} rows")
        if x.ndim == 1:
            return self.signs * x
        return self.signs[:, None] * x


def _as_symmetry(J):
    if isinstance(J, FundamentalSymmetry):
        return J
    J = np.asarray(J)
    if J.ndim == 2:
        if not np.array_equal(J, np.diag(np.diag(J))):
            raise ValueError("a fundamental symmetry matrix must be diagonal")
        J = np.diag(J)
    return FundamentalSymmetry(J)


@dataclass(frozen=True, eq=False)
class KreinOperator:
    """Square matrix paired with the signature of its Krein space.

    Construction verifies that ``J @ matrix`` is Hermitian within ``tol_sym``.
    """

    matrix: np.ndarray
    symmetry: FundamentalSymmetry
    tol_sym: float = field(default=TOL_SYM, compare=False)

    def __post_init__(self):
        matrix = np.asarray(self.matrix)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ValueError("operator matrix must be square")
        symmetry = _as_symmetry(self.symmetry)
        if symmetry.n != matrix.shape[0]:
            raise ValueError(
                f"dimension mismatch: matrix is {matrix.shape[0]}, symmetry is {symmetry.n}"
            )
        if not is_hermitian(symmetry.apply(matrix), self.tol_sym):
            raise ValueError("operator is not J-selfadjoint: J @ matrix is not Hermitian")
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "symmetry", symmetry)

    @property
    def n(self):
        return self.matrix.shape[0]

    @property
    def hermitian_form(self):
        """The Hermitian matrix ``J A`` representing ``[A f, f]``."""
        return self.symmetry.apply(self.matrix)


def krein_adjoint(A, J):
    """Adjoint with respect to ``[., .]``: ``A^+ = J A^* J``."""
    A = np.asarray(A)
    J = _as_symmetry(J)
    if A.ndim != 2 or A.shape != (J.n, J.n):
        raise ValueError(f"dimension mismatch: A has shape {A.shape}, J has size {J.n}")
    s = J.signs
    return s[:, None] * A.conj().T * s[None, :]


def krein_inner(f, g, J):
    """Indefinite inner product ``[f, g] = sum_i J_i f_i conj(g_i)``."""
    f = np.asarray(f)
    g = np.asarray(g)
    J = _as_symmetry(J)
    if f.shape != (J.n,) or g.shape != (J.n,):
        raise ValueError("vector lengths must match the fundamental symmetry")
    return complex(np.sum(J.signs * f * np.conj(g)))


# ---------------------------------------------------------------------------
# stadium regions


@dataclass(frozen=True)
class StadiumRegion:
    """``K_r([lo, hi]) = {z : dist(z, [lo, hi]) <= r}``."""

    lo: float
    hi: float
    r: float

    def __post_init__(self):
        if not self.lo <= self.hi:
            raise ValueError("stadium interval requires lo <= hi")
        if self.r < 0:
            raise ValueError("stadium radius must be non-negative")

    @classmethod
    def symmetric(cls, d, r):
        """Region around the interval ``(-d, d)``."""
        if d < 0:
            raise ValueError("interval half-length must be non-negative")
        return cls(-float(d), float(d), float(r))

    @property
    def d(self):
        return 0.5 * (self.hi - self.lo)

    @property
    def real_extent(self):
        """Intersection of the region with the real axis."""
        return self.lo - self.r, self.hi + self.r

    def distance(self, z):
        z = np.asarray(z, dtype=complex)
        x = z.real
        below = np.hypot(x - self.lo, z.imag)
        above = np.hypot(x - self.hi, z.imag)
        return np.where(x < self.lo, below, np.where(x > self.hi, above, np.abs(z.imag)))

    def contains(self, z, inflate=0.0):
        # a few ulps of slack so that analytically on-boundary points are inside
        dist = self.distance(z)
        slack = 4 * np.finfo(float).eps * (self.r + np.abs(np.asarray(z)) + 1.0)
        return dist <= self.r + inflate + slack

    def to_dict(self):
        return {"lo": self.lo, "hi": self.hi, "r": self.r}


def stadium_membership(z, region, inflate=0.0):
    """Closed-form membership test ``dist(z, [lo, hi]) <= r``."""
    result = region.contains(z, inflate)
    return bool(result) if np.ndim(result) == 0 else result


def distance_to_points(z, points):
    """Distance from each ``z`` to the finite set ``points``."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    points = np.asarray(points, dtype=complex).ravel()
    if points.size == 0:
        return np.full(z.shape, np.inf)
    return np.min(np.abs(z[:, None] - points[None, :]), axis=1)


# ---------------------------------------------------------------------------
# spectral classification


class SpectralType(str, enum.Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"
    INDEFINITE = "indefinite"
    NONREAL = "nonreal"


@dataclass(frozen=True)
class SpectralPoint:
    lam: complex
    kind: SpectralType
    j_norm: float
    multiplicity_hint: int = 1
    defective: bool = False

    def to_dict(self):
        return {
            "re": float(self.lam.real),
            "im": float(self.lam.imag),
            "type": self.kind.value,
            "j_norm": float(self.j_norm),
            "multiplicity": int(self.multiplicity_hint),
            "defective": bool(self.defective),
        }


def _gram_apply(gram, X):
    gram = np.asarray(gram)
    if gram.ndim == 1:
        return gram[:, None] * X if X.ndim == 2 else gram * X
    return gram @ X


def is_real_eigenvalue(lam, tol_real=TOL_REAL):
    lam = np.asarray(lam)
    return np.abs(lam.imag) <= tol_real * (1.0 + np.abs(lam))


def classify_eigenpairs(
    eigvals,
    eigvecs,
    gram,
    tol_real=TOL_REAL,
    tol_type=TOL_TYPE,
    cluster_radius=None,
):
    """Classify eigenpairs by the sign of the indefinite inner product.

    Parameters
    ----------
    eigvals : (n,) complex array
    eigvecs : (m, n) complex array
        Column ``k`` is an eigenvector for ``eigvals[k]``; columns need not
        be normalised.
    gram : (m,) or (m, m) array
        Signature vector of ``J`` or a Hermitian Gram matrix ``G`` so that
        ``[f, g] = (G f, g)``.
    tol_real : float
        ``lambda`` counts as real iff ``|Im lambda| <= tol_real (1 + |lambda|)``.
    tol_type : float
        Definiteness margin for ``[u, u]`` of unit eigenvectors.
    cluster_radius : float, optional
        Real eigenvalues closer than this are grouped and typed through the
        Gram matrix of their eigenvectors.  Defaults to ``1e-8`` times the
        spectral radius.

    Returns
    -------
    list of SpectralPoint, sorted by real part then imaginary part.
    """
    eigvals = np.asarray(eigvals, dtype=complex)
    U = np.asarray(eigvecs, dtype=complex)
    if U.shape[1] != eigvals.shape[0]:
        raise ValueError("eigenvector matrix must have one column per eigenvalue")
    norms = np.linalg.norm(U, axis=0)
    norms[norms == 0] = 1.0
    U = U / norms
    j_norms = np.real(np.sum(np.conj(U) * _gram_apply(gram, U), axis=0))
    return classify_with_jnorms(
        eigvals, j_norms, lambda idx: U[:, idx], gram, tol_real, tol_type, cluster_radius
    )


def _type_of(jn, tol_type):
    if jn > tol_type:
        return SpectralType.POSITIVE
    if jn < -tol_type:
        return SpectralType.NEGATIVE
    return SpectralType.INDEFINITE


def classify_with_jnorms(
    eigvals,
    j_norms,
    vectors_for,
    gram,
    tol_real=TOL_REAL,
    tol_type=TOL_TYPE,
    cluster_radius=None,
):
    """Classification from precomputed ``[u, u]`` of unit eigenvectors.

    ``vectors_for(indices)`` must return the unit eigenvectors for the given
    eigenvalue indices as columns; it is only called for clusters of nearly
    equal real eigenvalues.
    """
    eigvals = np.asarray(eigvals, dtype=complex)
    j_norms = np.asarray(j_norms, dtype=float)
    if cluster_radius is None:
        rho = float(np.max(np.abs(eigvals))) if eigvals.size else 0.0
        cluster_radius = CLUSTER_RADIUS * max(rho, np.finfo(float).tiny)

    real = is_real_eigenvalue(eigvals, tol_real)
    kinds = [SpectralType.NONREAL] * len(eigvals)
    mult = np.ones(len(eigvals), dtype=int)
    defective = np.zeros(len(eigvals), dtype=bool)

    real_idx = np.flatnonzero(real)
    real_idx = real_idx[np.argsort(eigvals[real_idx].real, kind="stable")]
    clusters = []
    for k in real_idx:
        if clusters and eigvals[k].real - eigvals[clusters[-1][-1]].real <= cluster_radius:
            clusters[-1].append(k)
        else:
            clusters.append([k])

    for members in clusters:
        if len(members) == 1:
            kinds[members[0]] = _type_of(j_norms[members[0]], tol_type)
            continue
        block = np.asarray(vectors_for(members), dtype=complex)
        smin = scipy.linalg.svdvals(block)[-1]
        is_defective = smin < DEFECT_TOL
        G = block.conj().T @ _gram_apply(gram, block)
        w = np.linalg.eigvalsh(0.5 * (G + G.conj().T))
        if is_defective:
            kind = SpectralType.INDEFINITE
        elif w[0] > tol_type:
            kind = SpectralType.POSITIVE
        elif w[-1] < -tol_type:
            kind = SpectralType.NEGATIVE
        else:
            kind = SpectralType.INDEFINITE
        for k in members:
            kinds[k] = kind
            mult[k] = len(members)
            defective[k] = is_defective

    points = [
        SpectralPoint(complex(eigvals[k]), kinds[k], float(j_norms[k]), int(mult[k]), bool(defective[k]))
        for k in range(len(eigvals))
    ]
    points.sort(key=lambda p: (p.lam.real, p.lam.imag))
    return points


def classify_spectrum(A, tol_real=TOL_REAL, tol_type=TOL_TYPE):
    """Eigendecompose a J-selfadjoint operator and type its eigenvalues.

    Real eigenvalues are of positive (negative) type when ``[u, u]`` is
    positive (negative) on the eigenspace.  Clusters of real eigenvalues
    are typed by the definiteness of the Gram matrix ``[u_i, u_j]``;
    numerically defective clusters are reported as indefinite with the
    ``defective`` flag set.
    """
    if not isinstance(A, KreinOperator):
        raise TypeError("classify_spectrum expects a KreinOperator")
    try:
        w, V = scipy.linalg.eig(A.matrix)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericalError(f"eigensolver failed: {exc}") from exc
    if not np.all(np.isfinite(w)):
        raise NumericalError("eigensolver returned non-finite eigenvalues")
    # a Jordan block of size two splits by about sqrt(eps) ||A|| under rounding
    rho = float(np.max(np.abs(w))) if w.size else 0.0
    radius = max(CLUSTER_RADIUS * rho, np.sqrt(np.finfo(float).eps) * float(np.linalg.norm(A.matrix, 2)))
    return classify_eigenpairs(w, V, A.symmetry.signs, tol_real, tol_type, radius or None)


# ---------------------------------------------------------------------------
# resolvent growth


@dataclass
class GrowthReport:
    samples: np.ndarray
    norms: np.ndarray
    bounds: np.ndarray
    passed: np.ndarray
    order: int
    constant: float
    min_constant: float

    @property
    def all_passed(self):
        return bool(np.all(self.passed))

    def to_dict(self):
        return {
            "order": self.order,
            "constant": self.constant,
            "min_constant": self.min_constant,
            "all_passed": self.all_passed,
            "n_samples": int(len(self.samples)),
            "n_failed": int(np.count_nonzero(~self.passed)),
        }


def resolvent_norm(matrix, lam):
    """Spectral norm of ``(matrix - lam)^{-1}`` via the smallest singular value."""
    matrix = np.asarray(matrix)
    smin = scipy.linalg.svdvals(matrix - lam * np.eye(matrix.shape[0]))[-1]
    return np.inf if smin == 0 else 1.0 / smin


def resolvent_growth_check(A, m, samples, M, tol=1e-12):
    """Check ``||(A - l)^{-1}|| <= M (1 + |l|)^(2m-2) / |Im l|^m`` on samples.

    Returns a :class:`GrowthReport` with per-sample verdicts and the
    smallest constant that would make every sample pass.
    """
    if m < 1:
        raise ValueError("growth order must be >= 1")
    matrix = A.matrix if isinstance(A, KreinOperator) else np.asarray(A)
    samples = np.atleast_1d(np.asarray(samples, dtype=complex))
    if np.any(samples.imag == 0):
        raise ValueError("resolvent growth samples must be non-real")
    scale = max(1.0, float(np.linalg.norm(matrix, 2))) if matrix.size else 1.0
    norms = np.empty(len(samples))
    for k, lam in enumerate(samples):
        norms[k] = resolvent_norm(matrix, lam)
        if norms[k] * tol * scale >= 1.0:
            raise ValueError(f"sample {lam} lies within tolerance of an eigenvalue")
    weight = (1.0 + np.abs(samples)) ** (2 * m - 2) / np.abs(samples.imag) ** m
    bounds = M * weight
    needed = norms / weight
    return GrowthReport(
        samples=samples,
        norms=norms,
        bounds=bounds,
        passed=norms <= bounds * (1 + 1e-12),
        order=m,
        constant=float(M),
        min_constant=float(np.max(needed)) if len(needed) else 0.0,
    )


# ---------------------------------------------------------------------------
# projections onto uniformly positive subspaces


def orthogonal_projection(basis):
    """Hilbert-space orthogonal projection onto ``span(basis)``."""
    Q, _ = np.linalg.qr(np.asarray(basis))
    return Q @ Q.conj().T


def krein_projection(basis, gram):
    """``[., .]``-orthogonal projection ``E = B (B^+ B)^{-1} B^+`` onto ``span(B)``.

    Here ``[f, g] = (G f, g)`` and ``B^+ = B^* G``; requires ``B^* G B``
    invertible, which holds for uniformly positive subspaces.
    """
    B = np.asarray(basis)
    Bplus = B.conj().T @ _gram_apply(gram, np.eye(B.shape[0]))
    return B @ np.linalg.solve(Bplus @ B, Bplus)


def compression_inverse_residual(gram, basis):
    """Residual of ``(P (G|L))^{-1} = E (G^{-1}|L)`` on ``L = span(basis)``.

    Both sides are expressed in an orthonormal basis ``Q`` of ``L``: the
    compression is ``Q^* G Q`` and ``E G^{-1}`` restricted to ``L`` is
    ``Q^* E G^{-1} Q``.  Raises ``ValueError`` if ``L`` is not uniformly
    positive.
    """
    G = np.asarray(gram)
    B = np.asarray(basis)
    Q, _ = np.linalg.qr(B)
    compression = Q.conj().T @ G @ Q
    compression = 0.5 * (compression + compression.conj().T)
    if np.linalg.eigvalsh(compression)[0] <= 0:
        raise ValueError("subspace is not uniformly positive for the given Gram matrix")
    E = krein_projection(B, G)
    rhs = Q.conj().T @ E @ np.linalg.solve(G, Q)
    return float(np.linalg.norm(np.linalg.inv(compression) - rhs, 2))
