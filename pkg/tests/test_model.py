"""Model construction, derivatives, and the hypothesis audit."""

import math

import numpy as np
import pytest

from latticefronts import (DomainError, ParameterError, ReactionSystem,
                           audit_hypotheses, equilibrium_residual,
                           make_holling2_model, make_ricker_model)

from conftest import HOLLING_PARAMS, RICKER_PARAMS


def fd_gradient(sys, u, h=1e-6):
    """Central-difference first partials; the oracle for grad_f."""
    out = np.empty((sys.n, sys.n))
    for j in range(sys.n):
        e = np.zeros(sys.n)
        e[j] = h
        out[:, j] = (np.asarray(sys.f(u + e)) - np.asarray(sys.f(u - e))) / (2 * h)
    return out


def fd_hessian(sys, u, h=1e-5):
    """Central-difference second partials of each component; the oracle
    for hess_f."""
    out = np.empty((sys.n, sys.n, sys.n))
    for j in range(sys.n):
        ej = np.zeros(sys.n)
        ej[j] = h
        for k in range(sys.n):
            ek = np.zeros(sys.n)
            ek[k] = h
            fpp = np.asarray(sys.f(u + ej + ek))
            fpm = np.asarray(sys.f(u + ej - ek))
            fmp = np.asarray(sys.f(u - ej + ek))
            fmm = np.asarray(sys.f(u - ej - ek))
            out[:, j, k] = (fpp - fpm - fmp + fmm) / (4 * h * h)
    return out


class TestHolling2:
    def test_unit_equilibrium(self, holling):
        # closed-form equilibrium for the symmetric unit parameters
        assert holling.K == pytest.approx([1.0, 1.0], abs=0)
        # f1(K) = -1 + 2*1/(1+1) = 0 by direct substitution
        assert np.asarray(holling.f(holling.K)) == pytest.approx([0.0, 0.0],
                                                                 abs=1e-15)

    def test_origin_exact(self, holling):
        assert np.all(np.asarray(holling.f(np.zeros(2))) == 0.0)

    def test_equilibrium_residual_scales(self, rng):
        for _ in range(10):
            a1, a2 = rng.uniform(0.5, 2.0, 2)
            al1, al2 = rng.uniform(1.0, 4.0, 2)
            be1, be2 = rng.uniform(0.1, 0.9, 2)
            ga1, ga2 = rng.uniform(0.5, 2.0, 2)
            if al1 * al2 <= a1 * a2 * be1 * be2:
                continue
            sysm = make_holling2_model(a1=a1, a2=a2, d1=1, d2=1, alpha1=al1,
                                       alpha2=al2, beta1=be1, beta2=be2,
                                       gamma1=ga1, gamma2=ga2)
            scale = max(a1 * sysm.K[0], a2 * sysm.K[1])
            assert np.max(np.abs(np.asarray(sysm.f(sysm.K)))) <= 1e-12 * scale
            assert np.all(np.asarray(sysm.f(np.zeros(2))) == 0.0)

    def test_rejects_equality_case(self):
        # alpha1*alpha2 = a1*a2*beta1*beta2 violates the strict inequality
        with pytest.raises(ParameterError, match="alpha1\\*alpha2"):
            make_holling2_model(a1=1, a2=1, d1=1, d2=1, alpha1=1, alpha2=1,
                                beta1=1, beta2=1, gamma1=1, gamma2=1)

    def test_rejects_nonpositive_parameter(self):
        bad = dict(HOLLING_PARAMS)
        bad["d1"] = -0.5
        with pytest.raises(ParameterError, match="d1"):
            make_holling2_model(**bad)


class TestRicker:
    def test_boundary_ratio_equilibrium(self):
        # ratio a*p/(a1*a2) = e equals the upper admissible endpoint at m=1
        sysm = make_ricker_model(a=1, a1=1, a2=1, d1=1, d2=1, p=math.e, q=1,
                                 m=1)
        assert sysm.K == pytest.approx([1.0, 1.0], rel=1e-14)
        # recruitment balances removal at K: p*K1*exp(-q*K1) = a2*K2
        g_at_K = math.e * 1.0 * math.exp(-1.0)
        assert g_at_K == pytest.approx(1.0, rel=1e-15)

    def test_log_equilibrium(self):
        sysm = make_ricker_model(a=1, a1=1, a2=1, d1=1, d2=1, p=2, q=2, m=1)
        assert sysm.K[0] == pytest.approx(math.log(2.0) / 2.0, rel=1e-14)
        assert sysm.K[1] == pytest.approx(sysm.K[0], rel=1e-14)
        # direct residual check of the recruitment equation at K
        g = 2.0 * sysm.K[0] * math.exp(-2.0 * sysm.K[0])
        assert g == pytest.approx(sysm.K[1], rel=1e-14)

    def test_rejects_unit_ratio(self):
        with pytest.raises(ParameterError, match="outside the admissible"):
            make_ricker_model(a=1, a1=1, a2=1, d1=1, d2=1, p=1, q=1, m=1)

    def test_rejects_excess_ratio(self):
        with pytest.raises(ParameterError, match="3"):
            make_ricker_model(a=1, a1=1, a2=1, d1=1, d2=1, p=3, q=1, m=1)


class TestDerivatives:
    @pytest.mark.parametrize("which", ["holling", "ricker"])
    def test_grad_hess_match_finite_differences(self, which, holling, ricker,
                                                rng):
        sysm = holling if which == "holling" else ricker
        for _ in range(100):
            u = rng.uniform(0.05, 0.95, 2) * sysm.K
            g = np.asarray(sysm.grad_f(u))
            g_fd = fd_gradient(sysm, u)
            assert g == pytest.approx(g_fd, rel=1e-6, abs=1e-8)
            H = np.asarray(sysm.hess_f(u))
            H_fd = fd_hessian(sysm, u)
            assert H == pytest.approx(H_fd, rel=1e-5, abs=1e-5)

    def test_vectorized_evaluation(self, holling):
        pts = np.random.default_rng(1).uniform(0, 1, (2, 7))
        batch = np.asarray(holling.f(pts))
        for k in range(7):
            assert batch[:, k] == pytest.approx(
                np.asarray(holling.f(pts[:, k])), rel=1e-15)


class TestEquilibriumResidual:
    def test_origin(self, holling):
        assert equilibrium_residual(holling, [0.0, 0.0]) == 0.0

    def test_at_K(self, holling):
        assert equilibrium_residual(holling, holling.K) <= 1e-12

    def test_interior_positive(self, holling):
        # f1(0.5, 0.5) = -0.5 + 2*0.5/1.5 = 1/6
        r = equilibrium_residual(holling, [0.5, 0.5])
        assert r == pytest.approx(1.0 / 6.0, rel=1e-12)

    def test_outside_rectangle(self, holling):
        with pytest.raises(DomainError):
            equilibrium_residual(holling, [1.5, 0.5])


def noncooperative_system():
    """f1 = -u1 + u2*(1.5 - u2), f2 = -u2 + 2*u1: the cross slope
    1.5 - 2*u2 turns negative inside the rectangle (K = (0.5, 1))."""

    def f(u):
        u = np.asarray(u, dtype=float)
        return np.stack([-u[0] + u[1] * (1.5 - u[1]), -u[1] + 2.0 * u[0]])

    def grad_f(u):
        u = np.asarray(u, dtype=float)
        one = np.ones_like(u[0])
        return np.stack([
            np.stack([-one, 1.5 - 2.0 * u[1]]),
            np.stack([2.0 * one, -one]),
        ])

    def hess_f(u):
        u = np.asarray(u, dtype=float)
        H = np.zeros((2, 2, 2) + u.shape[1:])
        H[0, 1, 1] = -2.0
        return H

    return ReactionSystem(n=2, d=[1.0, 1.0], f=f, grad_f=grad_f,
                          hess_f=hess_f, K=[0.5, 1.0], label="noncoop")


class TestAudit:
    def test_holling_all_pass(self, holling):
        report = audit_hypotheses(holling, 33)
        for name in ("H1", "H2", "H3", "H4", "A1", "A2", "A4",
                     "B1", "B2", "B3", "B4"):
            assert report[name].passed, f"{name}: {report[name].detail}"

    def test_valid_ricker_all_pass(self, ricker):
        report = audit_hypotheses(ricker, 33)
        assert report.passed(["H1", "H2", "H3", "H4"])
        assert report.passed(["B1", "B2", "B3", "B4"])

    def test_ricker_boundary_case_fails_b4(self):
        # at ratio e with a = a1 = a2 = 1 the stable-side slope condition
        # min(a1,a2) > max(hbar'(K2), gbar'(K1)) = max(1, 0) sits at equality
        sysm = make_ricker_model(a=1, a1=1, a2=1, d1=1, d2=1, p=math.e, q=1,
                                 m=1)
        report = audit_hypotheses(sysm, 33)
        verdict = report["B4"]
        assert not verdict.passed
        assert verdict.witness is not None
        assert verdict.witness.value == pytest.approx(0.0, abs=1e-12)
        # the recruitment slope at K1 is exactly 0 there
        assert float(sysm.epidemic.gbar_d1(sysm.K[0])) == pytest.approx(
            0.0, abs=1e-12)

    def test_cooperativity_failure_carries_witness(self):
        report = audit_hypotheses(noncooperative_system(), 41)
        verdict = report["H2"]
        assert not verdict.passed
        assert verdict.witness is not None
        # the witness must actually violate the sampled condition
        assert verdict.witness.value < 0
        assert verdict.witness.point[1] > 0.75

    def test_failure_persists_under_refinement(self):
        sysm = noncooperative_system()
        coarse = audit_hypotheses(sysm, 5)
        fine = audit_hypotheses(sysm, 9)  # contains the coarse grid points
        assert not coarse["H2"].passed
        assert not fine["H2"].passed
        assert fine["H2"].witness.value <= coarse["H2"].witness.value

    def test_density_guard(self, holling):
        with pytest.raises(ParameterError):
            audit_hypotheses(holling, 1)

    def test_records_are_flat(self, holling):
        rows = audit_hypotheses(holling, 9).to_records()
        assert {r["hypothesis"] for r in rows} >= {"H1", "B4"}
        for row in rows:
            assert set(row) == {"hypothesis", "passed", "detail",
                                "witness_point", "witness_quantity",
                                "witness_value"}


class TestConstructionGuards:
    def test_negative_diffusion_rejected(self):
        with pytest.raises(ParameterError):
            ReactionSystem(n=2, d=[-1.0, 1.0],
                           f=lambda u: np.zeros_like(np.asarray(u)),
                           grad_f=lambda u: np.zeros((2, 2)),
                           hess_f=lambda u: np.zeros((2, 2, 2)),
                           K=[1.0, 1.0])

    def test_sloppy_equilibrium_rejected(self):
        def f(u):
            u = np.asarray(u, dtype=float)
            return np.stack([-u[0] + 0.5, -u[1] + 0.5])  # f(0) != 0

        with pytest.raises(ParameterError, match="vanish"):
            ReactionSystem(n=2, d=[1.0, 1.0], f=f,
                           grad_f=lambda u: -np.eye(2),
                           hess_f=lambda u: np.zeros((2, 2, 2)),
                           K=[0.5, 0.5])
