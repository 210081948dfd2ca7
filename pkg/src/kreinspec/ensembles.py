"""Seeded random instances and the ensemble runner.

Trial ``k`` of a run with seed ``s`` draws from
``default_rng(SeedSequence([s, k]))``, so every trial is reproducible on its
own and results do not depend on how trials are scheduled.
"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .blocks import assemble, enclosure
from .krein import FundamentalSymmetry, KreinOperator, compression_inverse_residual
from .perturbation import NonNegativePair, spectral_projections, tau_quadrature, verify_main1

__all__ = [
    "trial_rng",
    "random_unitary",
    "random_hermitian",
    "random_block",
    "random_pair",
    "random_nonnegative",
    "random_projection_instance",
    "run_trial",
    "run_ensemble",
    "COMMANDS",
    "ENSEMBLE_TOLERANCES",
]

ENSEMBLE_TOLERANCES = {
    "block_far_constant": 2.0 + 1e-6,
    "tau_relative": 5e-3,
    "projection_identity": 1e-10,
}


def trial_rng(seed, trial):
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(trial)]))


def random_unitary(rng, n):
    Z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    Q, R = np.linalg.qr(Z)
    return Q * (np.diag(R) / np.abs(np.diag(R)))


def random_hermitian(rng, n, radius):
    """GUE sample rescaled to spectral radius ``radius``."""
    Z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    H = 0.5 * (Z + Z.conj().T)
    rho = np.max(np.abs(np.linalg.eigvalsh(H)))
    return H * (radius / rho) if rho > 0 else H


def random_block(rng, max_dim=20, max_radius=10.0, nu_range=(0.1, 5.0)):
    """Block operator with GUE diagonal blocks and ``||M||`` uniform in ``nu_range``."""
    n_plus = int(rng.integers(1, max_dim + 1))
    n_minus = int(rng.integers(1, max_dim + 1))
    s_plus = random_hermitian(rng, n_plus, rng.uniform(0.5, max_radius))
    s_minus = random_hermitian(rng, n_minus, rng.uniform(0.5, max_radius))
    M = rng.standard_normal((n_plus, n_minus)) + 1j * rng.standard_normal((n_plus, n_minus))
    M *= rng.uniform(*nu_range) / np.linalg.norm(M, 2)
    return assemble(s_plus, s_minus, M)


def _random_signs(rng, n):
    n_plus = int(rng.integers(1, n))
    return np.array([1] * n_plus + [-1] * (n - n_plus))


def random_nonnegative(rng, max_dim=30, spectrum=(0.1, 10.0)):
    """``A0 = J H`` with ``H`` positive definite, eigenvalues in ``spectrum``."""
    n = int(rng.integers(2, max_dim + 1))
    signs = _random_signs(rng, n)
    U = random_unitary(rng, n)
    H = (U * rng.uniform(*spectrum, n)) @ U.conj().T
    H = 0.5 * (H + H.conj().T)
    J = FundamentalSymmetry(signs)
    return KreinOperator(J.apply(H), J)


def random_pair(rng, max_dim=30, w_range=(0.1, 3.0)):
    """Non-negative ``A0`` plus ``V = J W`` with ``W`` Hermitian, ``||W||`` in ``w_range``."""
    a0 = random_nonnegative(rng, max_dim)
    W = random_hermitian(rng, a0.n, rng.uniform(*w_range))
    return NonNegativePair(a0, a0.symmetry.apply(W))


def random_projection_instance(rng, max_dim=20, max_cond=10.0):
    """Invertible Hermitian ``G`` (``cond <= max_cond``) and a uniformly positive subspace basis."""
    n = int(rng.integers(2, max_dim + 1))
    signs = _random_signs(rng, n)
    mags = rng.uniform(1.0, max_cond, n)
    U = random_unitary(rng, n)
    G = (U * (signs * mags)) @ U.conj().T
    G = 0.5 * (G + G.conj().T)
    pos, neg = U[:, signs > 0], U[:, signs < 0]
    k = int(rng.integers(1, pos.shape[1] + 1))
    X = rng.standard_normal((pos.shape[1], k)) + 1j * rng.standard_normal((pos.shape[1], k))
    Y = rng.standard_normal((neg.shape[1], k)) + 1j * rng.standard_normal((neg.shape[1], k))
    # keep ||G^- part|| well below the positive part so L stays uniformly positive
    Xq, _ = np.linalg.qr(X)
    Y *= 0.5 / max(np.linalg.norm(Y, 2), 1e-300) * np.sqrt(1.0 / max_cond)
    basis = pos @ Xq + neg @ Y
    return G, basis


def _block_trial(rng):
    b = random_block(rng)
    rep = enclosure(b, with_resolvent=True)
    far = rep.resolvent
    claim_violations = [v for v in rep.violations if v["lambda"] is not None]
    return {
        "n_plus": b.n_plus,
        "n_minus": b.n_minus,
        "nu": b.nu,
        "n_nonreal": len(rep.nonreal()),
        "claim_violations": len(claim_violations),
        "far_constant": far.far_constant,
        "order_one_constant": far.constant,
        "violations": len(rep.violations),
    }


def _perturb_trial(rng):
    pair = random_pair(rng)
    rep = verify_main1(pair)
    return {
        "n": pair.a0.n,
        "tau0": rep.bounds.tau0,
        "r": rep.bounds.r,
        "d": rep.bounds.d,
        "trivial": rep.bounds.trivial,
        "n_nonreal": rep.n_nonreal,
        "max_imag": rep.max_imag,
        "violations": len(rep.violations),
    }


def _tau_trial(rng):
    a0 = random_nonnegative(rng, max_dim=20)
    exact = spectral_projections(a0).tau
    est = tau_quadrature(a0, n=1e8)
    rel = abs(est.value - exact) / exact
    return {
        "n": a0.n,
        "exact": exact,
        "quadrature": est.value,
        "relative_error": rel,
        "evaluations": est.evaluations,
        "violations": int(rel > ENSEMBLE_TOLERANCES["tau_relative"]),
    }


def _projection_trial(rng):
    G, basis = random_projection_instance(rng)
    res = compression_inverse_residual(G, basis)
    return {
        "n": G.shape[0],
        "dim": basis.shape[1],
        "cond": float(np.linalg.cond(G)),
        "residual": res,
        "violations": int(res > ENSEMBLE_TOLERANCES["projection_identity"]),
    }


COMMANDS = {
    "block": _block_trial,
    "perturb": _perturb_trial,
    "tau": _tau_trial,
    "projection": _projection_trial,
}


def run_trial(command, seed, trial):
    if command not in COMMANDS:
        raise ValueError(f"unknown ensemble command {command!r}; choose from {sorted(COMMANDS)}")
    out = {"trial": int(trial)}
    out.update(COMMANDS[command](trial_rng(seed, trial)))
    return out


def _run_star(args):
    return run_trial(*args)


def run_ensemble(command, trials, seed, workers=1):
    """Run ``trials`` seeded trials; results are ordered by trial index."""
    if command not in COMMANDS:
        raise ValueError(f"unknown ensemble command {command!r}; choose from {sorted(COMMANDS)}")
    if trials < 1:
        raise ValueError("trials must be positive")
    if seed < 0:
        raise ValueError("seed must be non-negative")
    jobs = [(command, seed, k) for k in range(trials)]
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_star, jobs))
    else:
        results = [_run_star(j) for j in jobs]
    results.sort(key=lambda r: r["trial"])
    failing = [r["trial"] for r in results if r["violations"]]
    summary = {
        "command": command,
        "trials": trials,
        "seed": seed,
        "violations": sum(r["violations"] for r in results),
        "failing_trials": failing,
    }
    if command == "block":
        summary["max_far_constant"] = max(r["far_constant"] for r in results)
    elif command == "perturb":
        summary["max_tau0"] = max(r["tau0"] for r in results)
    elif command == "tau":
        summary["max_relative_error"] = max(r["relative_error"] for r in results)
    elif command == "projection":
        summary["max_residual"] = max(r["residual"] for r in results)
    return {"summary": summary, "results": results}
