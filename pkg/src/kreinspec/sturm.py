"""Indefinite Sturm-Liouville operators ``sgn(x) (-f'' + q f)`` on a truncated line.

The interval ``[-L, L]`` carries the cell-centred grid
``x_i = -L + (i + 1/2) h`` with ``h = 2L / n``, so no node sits at ``x = 0``
and ``J = diag(sgn x_i)`` is a true signature.  Dirichlet conditions at the
ends are realised by dropping the ghost nodes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse

from .krein import (
    TOL_REAL,
    TOL_TYPE,
    FundamentalSymmetry,
    KreinOperator,
    NumericalError,
    SpectralType,
    StadiumRegion,
    classify_with_jnorms,
)
from .perturbation import TauEstimate, spectral_projections, tau_quadrature

__all__ = [
    "Potential",
    "SturmLiouvilleProblem",
    "DiscreteIndefiniteOperator",
    "SLEnclosure",
    "SpectrumReport",
    "discretize",
    "sl_enclosure",
    "solve_and_verify",
    "truncation_check",
    "sqrt_branch",
    "f_lambda",
    "krein_resolvent_a0",
    "apply_a0",
    "krein_formula_residual",
    "default_lambda_grid",
    "resolvent_norm_bound_check",
    "tau0_estimate_sl",
    "m_endpoints",
    "tail_regime",
    "TAU0_BOUND",
]

TAU0_BOUND = 9.0
TAU0_FLAG = 0.05
TAU0_FAIL = 0.5
STRIP_TOL = 1e-6
TOL_DISC = 5e-2
TRUNCATION_TOL = 1e-6


def _parse_end(token):
    t = token.strip().lower()
    if t in ("inf", "+inf", "infinity"):
        return math.inf
    if t in ("-inf", "-infinity"):
        return -math.inf
    return float(t)


@dataclass(frozen=True, eq=False)
class Potential:
    """A potential ``q``: a named analytic form or samples at the grid nodes.

    Named forms are ``constant(c)``, ``step(a, b, depth)`` (``q = -depth`` on
    ``[a, b]`` and ``0`` elsewhere; ends may be infinite) and
    ``gaussian_well(center, width, depth)``
    (``q = -depth exp(-((x - center)/width)^2)``).  Sampled potentials may
    declare their tail limits ``(m_minus, m_plus)``.
    """

    kind: str
    params: tuple = ()
    samples: np.ndarray | None = None
    tails: tuple | None = None

    def __post_init__(self):
        arity = {"constant": 1, "step": 3, "gaussian_well": 3, "samples": 0}
        if self.kind not in arity:
            raise ValueError(f"unknown potential kind {self.kind!r}")
        if len(self.params) != arity[self.kind]:
            raise ValueError(f"{self.kind} takes {arity[self.kind]} parameters, got {len(self.params)}")
        if self.kind == "samples":
            if self.samples is None:
                raise ValueError("sampled potential needs samples")
            s = np.asarray(self.samples, dtype=float)
            if s.ndim != 1 or not np.all(np.isfinite(s)):
                raise ValueError("samples must be a finite 1-D array")
            object.__setattr__(self, "samples", s)
        if self.kind == "step" and not self.params[0] < self.params[1]:
            raise ValueError("step needs a < b")
        if self.kind == "gaussian_well" and self.params[1] <= 0:
            raise ValueError("gaussian_well width must be positive")

    @classmethod
    def constant(cls, c):
        return cls("constant", (float(c),))

    @classmethod
    def zero(cls):
        return cls.constant(0.0)

    @classmethod
    def step(cls, a, b, depth):
        return cls("step", (float(a), float(b), float(depth)))

    @classmethod
    def gaussian_well(cls, center, width, depth):
        return cls("gaussian_well", (float(center), float(width), float(depth)))

    @classmethod
    def from_samples(cls, values, tails=None):
        return cls("samples", (), np.asarray(values, dtype=float), None if tails is None else tuple(map(float, tails)))

    @classmethod
    def parse(cls, text):
        """Parse ``"constant:-1"``, ``"step:-1,1,5"`` or ``"gaussian_well:0,1,3"``."""
        kind, _, rest = text.strip().partition(":")
        kind = kind.strip().replace("-", "_")
        if kind == "samples":
            raise ValueError("sampled potentials are given through a problem file")
        if not rest.strip():
            raise ValueError(f"potential {text!r} has no parameters")
        try:
            args = tuple(_parse_end(t) for t in rest.split(","))
        except ValueError:
            raise ValueError(f"cannot parse potential parameters in {text!r}") from None
        return cls(kind, args)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "constant":
            return np.full(x.shape, self.params[0])
        if self.kind == "step":
            a, b, depth = self.params
            return np.where((x >= a) & (x <= b), -depth, 0.0)
        if self.kind == "gaussian_well":
            c, w, depth = self.params
            return -depth * np.exp(-(((x - c) / w) ** 2))
        if self.samples.shape != x.shape:
            raise ValueError(f"potential has {self.samples.size} samples, grid has {x.size} nodes")
        return self.samples

    def tail_limits(self):
        """``(m_minus, m_plus)`` or ``None`` when undeclared."""
        if self.kind == "constant":
            return (self.params[0], self.params[0])
        if self.kind == "step":
            a, b, depth = self.params
            return (-depth if a == -math.inf else 0.0, -depth if b == math.inf else 0.0)
        if self.kind == "gaussian_well":
            return (0.0, 0.0)
        return self.tails

    def describe(self):
        if self.kind == "samples":
            return f"samples[{self.samples.size}]"
        return f"{self.kind}:" + ",".join(repr(p) if math.isfinite(p) else ("inf" if p > 0 else "-inf")
                                          for p in self.params)


@dataclass(frozen=True, eq=False)
class SturmLiouvilleProblem:
    L: float
    n: int
    potential: Potential = field(default_factory=Potential.zero)

    def __post_init__(self):
        if not (isinstance(self.L, (int, float)) and self.L > 0 and math.isfinite(self.L)):
            raise ValueError("half-length L must be a positive number")
        if int(self.n) != self.n or self.n < 4 or self.n % 2:
            raise ValueError("grid size n must be an even integer >= 4")
        object.__setattr__(self, "L", float(self.L))
        object.__setattr__(self, "n", int(self.n))
        q = self.potential(self.x)
        object.__setattr__(self, "_q", np.asarray(q, dtype=float))

    @classmethod
    def free(cls, L, n):
        """The unperturbed problem ``q = 0``."""
        return cls(L, n, Potential.zero())

    @property
    def h(self):
        return 2 * self.L / self.n

    @property
    def x(self):
        return -self.L + (np.arange(self.n) + 0.5) * self.h

    @property
    def q(self):
        return self._q

    @property
    def q_inf_norm(self):
        return float(np.max(np.abs(self._q)))

    @property
    def q_essinf(self):
        return float(np.min(self._q))

    def with_grid(self, L, n):
        """Same potential on another grid; sampled potentials cannot be moved."""
        if self.potential.kind == "samples":
            raise ValueError("a sampled potential is tied to its grid")
        return SturmLiouvilleProblem(L, n, self.potential)

    def to_dict(self):
        return {"L": self.L, "n": self.n, "h": self.h, "potential": self.potential.describe(),
                "q_inf_norm": self.q_inf_norm, "q_essinf": self.q_essinf}


@dataclass(frozen=True, eq=False)
class DiscreteIndefiniteOperator:
    """``A = J T`` with ``T`` the symmetric tridiagonal ``-D2 + diag(q)``."""

    t_diag: np.ndarray
    t_off: float
    j_weights: FundamentalSymmetry
    h: float

    @property
    def n(self):
        return self.t_diag.size

    @property
    def t_matrix(self):
        return np.diag(self.t_diag) + self.t_off * (np.eye(self.n, k=1) + np.eye(self.n, k=-1))

    @property
    def a_matrix(self):
        return self.j_weights.signs[:, None] * self.t_matrix

    def a_bands(self):
        """Diagonals ``(lower, main, upper)`` of ``A``."""
        s = self.j_weights.signs.astype(float)
        off = np.full(self.n - 1, self.t_off)
        return s[1:] * off, s * self.t_diag, s[:-1] * off

    def a_sparse(self):
        lo, main, up = self.a_bands()
        return scipy.sparse.diags([lo, main, up], [-1, 0, 1], format="csr")

    def krein_operator(self):
        return KreinOperator(self.a_matrix, self.j_weights)

    def apply(self, u):
        """``A u`` without forming a matrix."""
        u = np.asarray(u)
        tu = self.t_diag * u
        tu[1:] += self.t_off * u[:-1]
        tu[:-1] += self.t_off * u[1:]
        return self.j_weights.signs * tu


def discretize(p, weight="sgn"):
    """Three-point discretisation of ``p``.

    ``weight="one"`` replaces ``sgn(x)`` by ``+1`` (a Hermitian control).
    """
    if weight not in ("sgn", "one"):
        raise ValueError("weight must be 'sgn' or 'one'")
    h = p.h
    diag = 2.0 / h**2 + p.q
    if weight == "sgn":
        signs = np.where(p.x > 0, 1, -1)
    else:
        signs = np.ones(p.n, dtype=int)
    return DiscreteIndefiniteOperator(diag, -1.0 / h**2, FundamentalSymmetry(signs), h)


@dataclass(frozen=True)
class SLEnclosure:
    """Non-real spectrum lies in ``K_r((-d, d))`` and in ``|Im lambda| <= strip``.

    ``trivial`` marks ``essinf q >= 0``: the operator is then non-negative,
    its spectrum is real and no region is produced.
    """

    r: float | None
    d: float | None
    strip: float | None
    q_inf_norm: float
    q_essinf: float
    trivial: bool = False

    @property
    def region(self):
        return None if self.trivial else StadiumRegion.symmetric(self.d, self.r)

    @property
    def edge(self):
        """Real eigenvalues beyond ``+-edge`` lie outside the stadium."""
        return None if self.trivial else self.d + self.r

    def contains(self, z, inflate=0.0):
        if self.trivial:
            return abs(complex(z).imag) == 0.0
        return self.region.contains(z, inflate) and abs(complex(z).imag) <= self.strip * (1 + STRIP_TOL) + inflate

    def excess(self, z):
        """How far ``z`` lies outside the composite region (``<= 0`` inside)."""
        z = complex(z)
        return max(self.region.distance(z) - self.r, abs(z.imag) - self.strip)

    def to_dict(self):
        return {
            "r": self.r,
            "d": self.d,
            "strip": self.strip,
            "q_inf_norm": self.q_inf_norm,
            "q_essinf": self.q_essinf,
            "trivial": self.trivial,
        }


def sl_enclosure(p):
    """Enclosure constants ``r = 5 ||q||``, ``d = -5 essinf q``, ``strip = 2 ||q||``."""
    qn, qi = p.q_inf_norm, p.q_essinf
    if qi >= 0:
        return SLEnclosure(None, None, None, qn, qi, trivial=True)
    return SLEnclosure(5 * qn, -5 * qi, 2 * qn, qn, qi)


class _TridiagEigvecs:
    """Eigenvectors of a tridiagonal matrix by shifted inverse iteration."""

    def __init__(self, op, eigvals):
        self.lo, self.main, self.up = op.a_bands()
        self.signs = op.j_weights.signs
        self.eigvals = eigvals
        self.scale = float(np.max(np.abs(self.main)) + 2 * abs(op.t_off))
        self._start = np.random.default_rng(0).standard_normal(op.n) + 0j
        self._cache = {}

    def __call__(self, k):
        if k in self._cache:
            return self._cache[k]
        lam = self.eigvals[k]
        ab = np.zeros((3, self.main.size), dtype=complex)
        ab[0, 1:] = self.up
        ab[2, :-1] = self.lo
        shift = lam + 1e-13 * self.scale * (1 + 1j)
        ab[1] = self.main - shift
        u = self._start / np.linalg.norm(self._start)
        for _ in range(3):
            u = scipy.linalg.solve_banded((1, 1), ab, u, check_finite=False)
            nrm = np.linalg.norm(u)
            if not np.isfinite(nrm) or nrm == 0:
                raise NumericalError(f"inverse iteration broke down at lambda = {lam}")
            u = u / nrm
        self._cache[k] = u
        return u

    def j_norm(self, k):
        u = self(k)
        return float(np.sum(self.signs * np.abs(u) ** 2))

    def residual(self, k):
        u = self(k)
        au = self.main * u
        au[1:] += self.lo * u[:-1]
        au[:-1] += self.up * u[1:]
        return float(np.linalg.norm(au - self.eigvals[k] * u)) / self.scale

    def block(self, indices):
        return np.column_stack([self(k) for k in indices])


def _classify_discrete(op, tol_real=TOL_REAL, tol_type=TOL_TYPE):
    try:
        lam = scipy.linalg.eigvals(op.a_matrix, overwrite_a=True, check_finite=False)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericalError(f"eigensolver failed: {exc}") from exc
    if not np.all(np.isfinite(lam)):
        raise NumericalError("eigensolver returned non-finite values")
    vecs = _TridiagEigvecs(op, lam)
    jn = np.array([vecs.j_norm(k) for k in range(lam.size)])
    points = classify_with_jnorms(lam, jn, vecs.block, op.j_weights.signs, tol_real, tol_type)
    worst = max(vecs.residual(k) for k in range(lam.size))
    return points, worst


@dataclass
class SpectrumReport:
    problem: SturmLiouvilleProblem
    enclosure: SLEnclosure
    points: list
    violations: list
    eigvec_residual: float
    truncation: dict | None = None

    def nonreal(self):
        return [p for p in self.points if p.kind is SpectralType.NONREAL]

    @property
    def containment_delta(self):
        """Largest excess of a non-real eigenvalue beyond the region, floored at 0."""
        nr = self.nonreal()
        if self.enclosure.trivial:
            return max((abs(p.lam.imag) for p in nr), default=0.0)
        return max([0.0] + [self.enclosure.excess(p.lam) for p in nr])

    @property
    def tightest_stadium(self):
        """Smallest stadium about ``(-d, d)`` and strip holding the non-real eigenvalues."""
        nr = self.nonreal()
        if not nr:
            return {"r": 0.0, "max_imag": 0.0, "max_abs_real": 0.0}
        lam = np.array([p.lam for p in nr])
        d = self.enclosure.d or 0.0
        r = StadiumRegion.symmetric(d, 0.0).distance(lam) if d > 0 else np.abs(lam)
        return {
            "r": float(np.max(r)),
            "max_imag": float(np.max(np.abs(lam.imag))),
            "max_abs_real": float(np.max(np.abs(lam.real))),
        }

    @property
    def ok(self):
        return not self.violations

    def csv_rows(self):
        return [(p.lam.real, p.lam.imag, p.kind.value, p.j_norm) for p in self.points]

    def to_dict(self, with_spectrum=True):
        out = {
            "problem": self.problem.to_dict(),
            "enclosure": self.enclosure.to_dict(),
            "n_eigenvalues": len(self.points),
            "n_nonreal": len(self.nonreal()),
            "nonreal": [p.to_dict() for p in self.nonreal()],
            "containment_delta": self.containment_delta,
            "tightest_stadium": self.tightest_stadium,
            "eigvec_residual": self.eigvec_residual,
            "violations": self.violations,
            "truncation": self.truncation,
        }
        if with_spectrum:
            out["eigenvalues"] = [p.to_dict() for p in self.points]
        return out


def solve_and_verify(p, tol_real=TOL_REAL, tol_type=TOL_TYPE):
    """Eigensolve the discretisation of ``p`` and check the enclosure.

    Every non-real eigenvalue must lie in ``K_r((-d, d))`` with
    ``|Im lambda| <= strip (1 + 1e-6)``; real eigenvalues beyond
    ``+-(d + r)`` must be of positive type on the right and negative type on
    the left.  When ``essinf q >= 0`` the spectrum must be real and every
    real eigenvalue of definite type matching its sign.
    """
    op = discretize(p)
    enc = sl_enclosure(p)
    points, resid = _classify_discrete(op, tol_real, tol_type)
    rho = max(abs(pt.lam) for pt in points)
    infl = max(1e-8, 1e-10 * rho)
    violations = []
    for pt in points:
        where = [pt.lam.real, pt.lam.imag]
        if pt.kind is SpectralType.NONREAL:
            if enc.trivial:
                violations.append({"lambda": where, "claim": "non-real eigenvalue of a non-negative operator"})
            elif not enc.contains(pt.lam, infl):
                violations.append({"lambda": where, "claim": "non-real eigenvalue outside enclosure",
                                   "excess": enc.excess(pt.lam)})
            continue
        edge = 0.0 if enc.trivial else enc.edge + infl
        x = pt.lam.real
        if x > edge and pt.kind is not SpectralType.POSITIVE:
            violations.append({"lambda": where, "claim": "expected positive type", "type": pt.kind.value})
        elif x < -edge and pt.kind is not SpectralType.NEGATIVE:
            violations.append({"lambda": where, "claim": "expected negative type", "type": pt.kind.value})
    return SpectrumReport(p, enc, points, violations, resid)


def truncation_check(report, factor=2):
    """Re-solve on ``[-factor L, factor L]`` with the same ``h`` and compare.

    Records how far each non-real eigenvalue moves (distance to the nearest
    non-real eigenvalue of the larger domain) and the containment deltas of
    both runs.  The result is stored on ``report.truncation`` and returned
    together with the larger-domain report.
    """
    p = report.problem
    big = solve_and_verify(p.with_grid(factor * p.L, factor * p.n))
    base = np.array([pt.lam for pt in report.nonreal()])
    other = np.array([pt.lam for pt in big.nonreal()])
    if base.size and other.size:
        moves = np.min(np.abs(base[:, None] - other[None, :]), axis=1)
    else:
        moves = np.full(base.size, np.inf)
    report.truncation = {
        "L": factor * p.L,
        "n": factor * p.n,
        "max_move": float(moves.max()) if moves.size else 0.0,
        "n_stable": int(np.sum(moves < TRUNCATION_TOL)),
        "n_nonreal": int(base.size),
        "containment_delta": report.containment_delta,
        "containment_delta_large": big.containment_delta,
    }
    return report.truncation, big


def sqrt_branch(lam):
    """``sqrt(rho) e^{it/2}`` for ``lam = rho e^{it}``, ``t`` in ``[0, 2 pi)``.

    The result has non-negative imaginary part.
    """
    lam = np.asarray(lam, dtype=complex)
    t = np.mod(np.angle(lam), 2 * np.pi)
    return np.sqrt(np.abs(lam)) * np.exp(0.5j * t)


def _require_nonreal(lam):
    lam = complex(lam)
    if lam.imag == 0:
        raise ValueError("lambda must be non-real")
    return lam


def f_lambda(lam, x):
    """``e^{i sqrt(lam) x}`` for ``x > 0``, ``e^{-i sqrt(-lam) x}`` for ``x < 0``, 1 at 0."""
    lam = _require_nonreal(lam)
    x = np.asarray(x, dtype=float)
    k, kp = sqrt_branch(lam), sqrt_branch(-lam)
    return np.where(x > 0, np.exp(1j * k * x), np.exp(-1j * kp * x))


def _half_line_resolvent(k, y, g, h, side):
    """Dirichlet resolvent of ``-d2/dx2`` on a half-line applied to ``g``.

    ``side=+1``: ``(B+ - k^2)^{-1}`` with kernel
    ``(i / 2k)(e^{ik|x-y|} - e^{ik(x+y)})``.  ``side=-1``: ``(B- + k^2)^{-1}``
    where ``B- = d2/dx2`` on ``x < 0``; with ``k = sqrt(-lam)`` the kernel is
    ``-(i / 2k)(e^{ik|x-y|} - e^{-ik(x+y)})``.
    """
    diff = np.abs(y[:, None] - y[None, :])
    s = y[:, None] + y[None, :]
    kernel = np.exp(1j * k * diff) - np.exp(1j * side * k * s)
    return side * (1j / (2 * k)) * (kernel @ g) * h


def krein_resolvent_a0(lam, f, p):
    """Evaluate ``(A0 - lam)^{-1} f`` for ``A0 = -sgn(x) d2/dx2`` from the Krein formula.

    ``(A0 - lam)^{-1} f = (B0 - lam)^{-1} f - [f, f_conj(lam)] / (i (sqrt(lam) + sqrt(-lam))) f_lam``
    where ``B0`` is the orthogonal sum of the two half-line Dirichlet
    operators and ``[f, g] = int sgn(x) f conj(g) dx``.  Integrals use the
    grid weights ``h``; the potential of ``p`` is ignored.
    """
    lam = _require_nonreal(lam)
    f = np.asarray(f, dtype=complex)
    x = p.x
    if f.shape != x.shape:
        raise ValueError(f"grid function must have {x.size} samples")
    h = p.h
    k, kp = complex(sqrt_branch(lam)), complex(sqrt_branch(-lam))
    pos = x > 0
    u = np.empty(x.size, dtype=complex)
    u[pos] = _half_line_resolvent(k, x[pos], f[pos], h, +1)
    u[~pos] = _half_line_resolvent(kp, x[~pos], f[~pos], h, -1)
    fl = f_lambda(lam, x)
    # conj(f_conj(lam)) = f_lam
    bracket = np.sum(np.sign(x) * f * fl) * h
    return u - bracket / (1j * (k + kp)) * fl


def apply_a0(u, p, lam=0.0):
    """``(A0_h - lam) u`` on the grid of ``p`` (``q`` ignored)."""
    return discretize(SturmLiouvilleProblem.free(p.L, p.n)).apply(np.asarray(u, dtype=complex)) - lam * u


def krein_formula_residual(lam, f, p):
    """Relative apply-back residual ``||(A0_h - lam) R f - f|| / ||f||``.

    Also returned: the residual restricted to the nodes away from ``x = 0``
    (``bulk``) and at the two nodes ``+-h/2`` (``interface``), where the
    three-point stencil straddles the jump of ``u''``.
    """
    f = np.asarray(f, dtype=complex)
    u = krein_resolvent_a0(lam, f, p)
    r = apply_a0(u, p, lam) - f
    nf = np.linalg.norm(f)
    mid = np.abs(p.x) < p.h
    return {
        "lambda": [complex(lam).real, complex(lam).imag],
        "residual": float(np.linalg.norm(r) / nf),
        "bulk": float(np.linalg.norm(r[~mid]) / nf),
        "interface": float(np.linalg.norm(r[mid]) / nf),
    }


def default_lambda_grid(count=40, lo=0.1, hi=100.0):
    """``count`` non-real points: log-spaced moduli times four fixed arguments."""
    if count % 4:
        raise ValueError("count must be a multiple of 4")
    radii = np.geomspace(lo, hi, count // 4)
    args = np.array([1, 3, 5, 7]) * np.pi / 8
    return (radii[:, None] * np.exp(1j * args[None, :])).ravel()


def _smallest_singular(op, lam):
    """Smallest singular value of ``A - lam`` from the banded ``(A-lam)^*(A-lam)``."""
    B = (op.a_sparse() - lam * scipy.sparse.identity(op.n, format="csr")).astype(complex)
    M = (B.conj().T @ B).todia()
    ab = np.zeros((3, op.n), dtype=complex)
    for k in range(3):
        d = M.diagonal(k)
        ab[2 - k, k:] = d
    w = scipy.linalg.eigvals_banded(ab, lower=False, select="i", select_range=(0, 0), check_finite=False)
    return math.sqrt(max(float(w[0]), 0.0))


@dataclass
class ResolventBoundReport:
    samples: list
    ratios: list
    tol: float

    @property
    def worst(self):
        return max(self.ratios)

    @property
    def ok(self):
        return self.worst <= 1 + self.tol

    def to_dict(self):
        return {
            "samples": [[z.real, z.imag] for z in self.samples],
            "ratios": self.ratios,
            "worst_ratio": self.worst,
            "tol_disc": self.tol,
            "ok": self.ok,
        }


def resolvent_norm_bound_check(lambda_samples, p, weight="sgn", tol=TOL_DISC):
    """Ratios ``||(A0_h - lam)^{-1}|| |Im lam| / 2`` for the free operator on ``p``'s grid."""
    samples = [_require_nonreal(z) for z in lambda_samples]
    if not samples:
        raise ValueError("no samples")
    op = discretize(SturmLiouvilleProblem.free(p.L, p.n), weight)
    ratios = []
    for z in samples:
        smin = _smallest_singular(op, z)
        if smin == 0:
            raise NumericalError(f"A0_h - lambda is singular at {z}")
        ratios.append(abs(z.imag) / (2 * smin))
    return ResolventBoundReport(samples, ratios, tol)


@dataclass
class SLTauReport:
    quadrature: TauEstimate
    exact: float
    bound: float = TAU0_BOUND

    @property
    def gap(self):
        return abs(self.quadrature.value - self.exact)

    @property
    def flagged(self):
        return max(self.quadrature.value, self.exact) > self.bound * (1 + TAU0_FLAG)

    @property
    def failed(self):
        return max(self.quadrature.value, self.exact) > self.bound * (1 + TAU0_FAIL)

    def to_dict(self):
        q = self.quadrature.to_dict()
        return {"quadrature": q, "exact": self.exact, "gap": self.gap, "bound": self.bound,
                "flagged": self.flagged, "failed": self.failed}


def tau0_estimate_sl(p, n_cutoff=1e8, weight="sgn", order=8, tol=1e-10):
    """``tau0`` of the discrete free operator ``A0_h`` by quadrature and exactly.

    The problem must have ``q = 0``.  The exact value is ``||E+ - E-||``
    from the spectral projections.
    """
    if np.any(p.q != 0):
        raise ValueError("tau0 is defined for the free operator (q = 0)")
    op = discretize(p, weight)
    ko = op.krein_operator()
    est = tau_quadrature(ko, n=n_cutoff, order=order, tol=tol)
    exact = spectral_projections(ko).tau
    est.exact = exact
    est.matrix = None
    return SLTauReport(est, exact)


def m_endpoints(p):
    """Tail limits ``(m_plus, m_minus)`` of the potential of ``p``."""
    tails = p.potential.tail_limits()
    if tails is None:
        raise ValueError("potential does not declare its tail limits")
    m_minus, m_plus = tails
    return float(m_plus), float(m_minus)


def tail_regime(m_plus, m_minus):
    """Which case of the tail alternative applies.

    ``"finite"`` when ``m_plus > -m_minus`` (finitely many non-real
    eigenvalues), otherwise ``"accumulation"``; ``boundary`` marks equality.
    """
    return {
        "m_plus": m_plus,
        "m_minus": m_minus,
        "regime": "finite" if m_plus > -m_minus else "accumulation",
        "boundary": m_plus == -m_minus,
    }
