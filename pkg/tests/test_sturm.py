import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kreinspec.krein import SpectralType
from kreinspec.sturm import (
    Potential,
    SturmLiouvilleProblem,
    apply_a0,
    default_lambda_grid,
    discretize,
    f_lambda,
    krein_formula_residual,
    krein_resolvent_a0,
    m_endpoints,
    resolvent_norm_bound_check,
    sl_enclosure,
    solve_and_verify,
    sqrt_branch,
    tail_regime,
    tau0_estimate_sl,
)


def bump(x, c=0.0, w=2.0):
    s = (x - c) / w
    out = np.zeros_like(x)
    m = np.abs(s) < 1
    out[m] = np.exp(-1 / (1 - s[m] ** 2))
    return out


class TestGrid:
    def test_cell_centred_nodes(self):
        p = SturmLiouvilleProblem.free(2.0, 8)
        assert p.h == 0.5
        assert np.allclose(p.x, -2 + (np.arange(8) + 0.5) * 0.5)
        assert not np.any(p.x == 0)

    @pytest.mark.parametrize("n", [4, 10, 200])
    def test_signature_split(self, n):
        op = discretize(SturmLiouvilleProblem.free(3.0, n))
        signs = op.j_weights.signs
        assert np.sum(signs > 0) == n // 2 and np.sum(signs < 0) == n // 2

    @pytest.mark.parametrize("L,n", [(1.0, 5), (1.0, 2), (0.0, 10), (-1.0, 10)])
    def test_invalid_grid(self, L, n):
        with pytest.raises(ValueError):
            SturmLiouvilleProblem.free(L, n)

    def test_matrices(self):
        p = SturmLiouvilleProblem(3.0, 12, Potential.gaussian_well(0, 1, 2))
        op = discretize(p)
        T = op.t_matrix
        assert np.array_equal(T, T.T)
        assert np.allclose(np.diag(T, 1), -1 / p.h**2)
        assert np.allclose(np.diag(T), 2 / p.h**2 + p.q)
        A = op.a_matrix
        assert np.array_equal(op.j_weights.matrix @ A, T)
        u = np.arange(12.0) - 3j
        assert np.allclose(op.apply(u), A @ u)

    def test_dirichlet_eigenvalues(self):
        L, n = 5.0, 400
        p = SturmLiouvilleProblem.free(L, n)
        w = np.sort(np.linalg.eigvalsh(discretize(p, weight="one").t_matrix))
        h = p.h
        k = np.arange(1, n + 1)
        exact_discrete = (4 / h**2) * np.sin(k * np.pi / (2 * (n + 1))) ** 2
        assert np.allclose(w, exact_discrete, rtol=1e-10)
        # continuum value, allowing the h/2 shift of the effective walls
        assert w[0] == pytest.approx((np.pi / (2 * L)) ** 2, rel=2 * h / L)

    def test_constant_shift(self):
        base = np.linalg.eigvalsh(discretize(SturmLiouvilleProblem.free(4.0, 40), "one").t_matrix)
        shifted = np.linalg.eigvalsh(discretize(SturmLiouvilleProblem(4.0, 40, Potential.constant(-1.7)), "one").t_matrix)
        assert np.allclose(shifted, base - 1.7, atol=1e-10)


class TestPotential:
    def test_parse_named_forms(self):
        assert Potential.parse("constant:-1").params == (-1.0,)
        assert Potential.parse("step:-1,1,5").params == (-1.0, 1.0, 5.0)
        assert Potential.parse("gaussian-well:0,1,3").kind == "gaussian_well"
        assert Potential.parse("step:-inf,0,2").params[0] == -math.inf

    @pytest.mark.parametrize("text", ["blob:1", "constant:", "step:1,0,5", "step:a,b,c", "constant:1,2"])
    def test_parse_errors(self, text):
        with pytest.raises(ValueError):
            Potential.parse(text)

    def test_step_values(self):
        q = Potential.step(-1, 1, 5)
        assert np.array_equal(q(np.array([-2.0, -0.5, 0.5, 3.0])), [0, -5, -5, 0])

    def test_samples_must_match_grid(self):
        with pytest.raises(ValueError):
            SturmLiouvilleProblem(1.0, 4, Potential.from_samples([1, 2, 3]))


class TestEnclosure:
    def test_constant_minus_one(self):
        e = sl_enclosure(SturmLiouvilleProblem(10.0, 40, Potential.constant(-1)))
        assert (e.r, e.d, e.strip) == (5.0, 5.0, 2.0)
        assert not e.trivial

    def test_formula_arithmetic(self):
        q = np.full(8, 0.3)
        q[1], q[5] = 2.0, -0.5
        e = sl_enclosure(SturmLiouvilleProblem(1.0, 8, Potential.from_samples(q)))
        assert (e.r, e.d, e.strip) == (10.0, 2.5, 4.0)

    def test_trivial_regime(self):
        e = sl_enclosure(SturmLiouvilleProblem(1.0, 8, Potential.constant(0.5)))
        assert e.trivial and e.region is None

    def test_free_operator_real(self):
        rep = solve_and_verify(SturmLiouvilleProblem.free(10.0, 200))
        assert rep.enclosure.trivial
        assert not rep.nonreal() and rep.ok
        types = {p.kind for p in rep.points}
        assert SpectralType.NONREAL not in types

    @pytest.mark.parametrize("pot", ["constant:-1", "step:-1,1,5", "gaussian_well:0,1,3"])
    def test_small_grid_containment(self, pot):
        p = SturmLiouvilleProblem(10.0, 400, Potential.parse(pot))
        rep = solve_and_verify(p)
        assert rep.violations == []
        e = rep.enclosure
        for pt in rep.nonreal():
            assert abs(pt.lam.imag) <= e.strip * (1 + 1e-6)
            assert e.contains(pt.lam, 1e-8)
        lam = np.array([pt.lam for pt in rep.points])
        for z in lam:
            assert np.min(np.abs(lam - np.conj(z))) <= 1e-8 * (1 + np.max(np.abs(lam)))

    def test_step_has_nonreal_eigenvalues(self):
        rep = solve_and_verify(SturmLiouvilleProblem(10.0, 400, Potential.step(-1, 1, 5)))
        assert rep.nonreal()
        ts = rep.tightest_stadium
        assert ts["max_imag"] <= rep.enclosure.strip


class TestBranch:
    def test_at_i(self):
        assert complex(sqrt_branch(1j)) == pytest.approx(np.exp(1j * np.pi / 4), abs=1e-15)
        x = np.array([1.0, 10.0, 40.0])
        assert np.all(np.diff(np.abs(f_lambda(1j, x))) < 0)

    def test_near_negative_axis(self):
        assert complex(sqrt_branch(-1 + 1e-12j)) == pytest.approx(1j, abs=1e-10)
        assert complex(sqrt_branch(-1 - 1e-12j)) == pytest.approx(1j, abs=1e-10)
        # the cut sits on the positive real axis
        assert complex(sqrt_branch(1 - 1e-12j)) == pytest.approx(-1, abs=1e-10)

    def test_value_at_origin_and_sides(self):
        lam = 2 - 3j
        x = np.array([-1.5, 0.0, 2.5])
        k, kp = complex(sqrt_branch(lam)), complex(sqrt_branch(-lam))
        assert np.allclose(f_lambda(lam, x), [np.exp(1.5j * kp), 1.0, np.exp(2.5j * k)])

    @given(st.floats(1e-3, 1e3))
    def test_sum_identity(self, t):
        s = complex(sqrt_branch(1j * t) + sqrt_branch(-1j * t))
        assert s == pytest.approx(1j * math.sqrt(2 * t), rel=1e-12)

    @given(st.floats(1e-3, 1e3), st.floats(0.01, 2 * math.pi - 0.01).filter(lambda a: abs(a - math.pi) > 1e-3))
    def test_decay_and_conjugation(self, rho, arg):
        lam = rho * complex(math.cos(arg), math.sin(arg))
        if lam.imag == 0:
            return
        assert complex(sqrt_branch(lam)).imag > 0 and complex(sqrt_branch(-lam)).imag > 0
        x = np.linspace(-5, 5, 11)
        assert np.allclose(f_lambda(np.conj(lam), x), np.conj(f_lambda(lam, x)), rtol=1e-12, atol=1e-300)

    def test_real_lambda_rejected(self):
        p = SturmLiouvilleProblem.free(5.0, 20)
        with pytest.raises(ValueError):
            f_lambda(2.0, p.x)
        with pytest.raises(ValueError):
            krein_resolvent_a0(-1.0, bump(p.x), p)


class TestKreinFormula:
    def test_matches_dense_solve(self):
        p = SturmLiouvilleProblem.free(20.0, 1000)
        f = bump(p.x, 0.5)
        A = discretize(p).a_matrix
        u_dense = np.linalg.solve(A - 1j * np.eye(p.n), f)
        u = krein_resolvent_a0(1j, f, p)
        assert np.linalg.norm(u - u_dense) / np.linalg.norm(u_dense) < 1e-3

    def test_bulk_residual_second_order(self):
        res = [krein_formula_residual(1j, bump(p.x, 3.0), p)["bulk"]
               for p in (SturmLiouvilleProblem.free(40.0, n) for n in (1000, 2000))]
        assert res[1] < 1e-3
        assert res[0] / res[1] > 3

    def test_resolvent_identity(self):
        lam, mu = 1j, 1 + 2j
        errs = []
        for n in (500, 1000):
            p = SturmLiouvilleProblem.free(20.0, n)
            f = bump(p.x, 0.5)
            lhs = krein_resolvent_a0(lam, f, p) - krein_resolvent_a0(mu, f, p)
            rhs = (lam - mu) * krein_resolvent_a0(lam, krein_resolvent_a0(mu, f, p), p)
            errs.append(np.linalg.norm(lhs - rhs) / np.linalg.norm(lhs))
        assert errs[1] < 1e-3 and errs[0] / errs[1] > 3

    def test_apply_a0_ignores_potential(self):
        p = SturmLiouvilleProblem(5.0, 20, Potential.constant(-3))
        u = bump(p.x)
        assert np.allclose(apply_a0(u, p), discretize(SturmLiouvilleProblem.free(5.0, 20)).apply(u))

    def test_grid_mismatch(self):
        p = SturmLiouvilleProblem.free(5.0, 20)
        with pytest.raises(ValueError):
            krein_resolvent_a0(1j, np.ones(10), p)


class TestResolventBound:
    def _dense_ratio(self, p, z, weight="sgn"):
        A = discretize(p, weight).a_matrix
        smin = np.linalg.svd(A - z * np.eye(p.n), compute_uv=False)[-1]
        return abs(z.imag) / (2 * smin)

    def test_banded_matches_dense(self):
        p = SturmLiouvilleProblem.free(10.0, 200)
        zs = [1j, 10j, 0.3 + 0.2j, -5 - 1j]
        rep = resolvent_norm_bound_check(zs, p)
        for z, r in zip(zs, rep.ratios):
            assert r == pytest.approx(self._dense_ratio(p, z), rel=1e-6)

    def test_at_i_and_10i(self):
        rep = resolvent_norm_bound_check([1j, 10j], SturmLiouvilleProblem.free(20.0, 400))
        assert rep.ok
        assert rep.ratios[1] * 2 / 10 <= 0.2 * (1 + rep.tol)

    def test_hermitian_control(self):
        rep = resolvent_norm_bound_check(default_lambda_grid(), SturmLiouvilleProblem.free(10.0, 200), weight="one")
        assert rep.worst <= 0.5 + 1e-9  # ||(T - z)^{-1}|| <= 1/|Im z|

    def test_grid_shape(self):
        g = default_lambda_grid()
        assert g.size == 40 and np.all(g.imag != 0)
        with pytest.raises(ValueError):
            default_lambda_grid(10)

    def test_real_sample_rejected(self):
        with pytest.raises(ValueError):
            resolvent_norm_bound_check([1.0], SturmLiouvilleProblem.free(5.0, 20))


class TestTau0:
    def test_small_grid(self):
        rep = tau0_estimate_sl(SturmLiouvilleProblem.free(20.0, 200))
        assert rep.gap / rep.exact < 5e-3
        assert 1 < rep.exact <= 9 * 1.05
        assert not rep.flagged and not rep.failed

    def test_identity_weight(self):
        rep = tau0_estimate_sl(SturmLiouvilleProblem.free(5.0, 40), weight="one")
        assert rep.exact == pytest.approx(1.0, abs=1e-10)
        assert rep.quadrature.value == pytest.approx(1.0, abs=1e-6)

    def test_needs_free_operator(self):
        with pytest.raises(ValueError):
            tau0_estimate_sl(SturmLiouvilleProblem(5.0, 40, Potential.constant(-1)))


class TestTails:
    def test_constant_tails(self):
        mp, mm = m_endpoints(SturmLiouvilleProblem(5.0, 20, Potential.constant(-1)))
        assert (mp, mm) == (-1.0, -1.0)
        assert tail_regime(mp, mm)["regime"] == "accumulation"

    def test_decaying_tails_boundary(self):
        mp, mm = m_endpoints(SturmLiouvilleProblem(5.0, 20, Potential.gaussian_well(0, 1, 3)))
        reg = tail_regime(mp, mm)
        assert (mp, mm) == (0.0, 0.0) and reg["boundary"]

    def test_asymmetric_finite(self):
        pot = Potential.from_samples(np.zeros(20), tails=(1.0, 2.0))
        mp, mm = m_endpoints(SturmLiouvilleProblem(5.0, 20, pot))
        assert (mp, mm) == (2.0, 1.0)
        assert tail_regime(mp, mm)["regime"] == "finite"

    def test_half_infinite_step(self):
        mp, mm = m_endpoints(SturmLiouvilleProblem(5.0, 20, Potential.step(0, math.inf, 2)))
        assert (mp, mm) == (-2.0, 0.0)

    def test_undeclared(self):
        with pytest.raises(ValueError):
            m_endpoints(SturmLiouvilleProblem(5.0, 4, Potential.from_samples([1, 2, 3, 4])))
