import math

import numpy as np
import pytest

from qclab.diffraction import (
    GaussianSpec,
    PointMeasure,
    bohr_coefficient,
    bohr_scan,
    growth_profile,
    logderiv_measure,
    poisson_residual,
)
from qclab.errors import DomainError, InsufficientDataError, InvalidInputError
from qclab.wiener import canonicalize
from qclab.zeros import ZeroSet

from conftest import SQRT2, lattice_measure, lattice_zeroset


class TestBohrCoefficient:
    def test_lattice_gamma_one(self, lat2100):
        assert bohr_coefficient(lat2100, 1.0, 1000.0) == pytest.approx(-1.0, abs=0.01)

    def test_gamma_zero_is_density(self, lat2100):
        assert bohr_coefficient(lat2100, 0.0, 1000.0).real == pytest.approx(1.0, abs=0.01)

    def test_off_spectrum_cancels(self, lat2100):
        assert abs(bohr_coefficient(lat2100, 0.5, 1000.0)) < 0.01
        assert abs(bohr_coefficient(lat2100, 0.5, 500.0)) < 0.01

    def test_window_guard(self, lat500):
        with pytest.raises(DomainError):
            bohr_coefficient(lat500, 1.0, 1000.0)


class TestBohrScan:
    def test_lattice_atoms(self, lat2100):
        mu = bohr_scan(lat2100, [k / 4.0 for k in range(-20, 21)], 2000.0, 0.1)
        assert mu.d == pytest.approx(1.0, abs=0.01)
        got = dict((round(g * 4) / 4, b) for g, b in mu.atoms())
        assert sorted(got) == [float(k) for k in (-5, -4, -3, -2, -1, 1, 2, 3, 4, 5)]
        for k, b in got.items():
            assert b == pytest.approx((-1.0) ** abs(k), abs=0.01)

    def test_union_atoms(self, uni2100):
        grid = sorted(set([float(k) for k in range(-6, 7)]
                          + [round(k * SQRT2, 12) for k in range(-4, 5)]))
        mu = bohr_scan(uni2100, grid, 2000.0, 0.1)
        assert mu.d == pytest.approx(1.0 + SQRT2, abs=0.02)
        assert mu.mass_at(1.0) == pytest.approx(-1.0, abs=0.01)
        assert mu.mass_at(SQRT2) == pytest.approx(-SQRT2, abs=0.01)
        assert mu.mass_at(2 * SQRT2) == pytest.approx(SQRT2, abs=0.01)

    def test_poisson_process_no_atoms(self):
        rng = np.random.default_rng(2)
        pts = np.sort(rng.uniform(-2000.0, 2000.0, rng.poisson(4000)))
        A = ZeroSet((-2000.0, 2000.0), pts, np.ones(pts.size, np.int64))
        mu = bohr_scan(A, [k / 4.0 for k in range(-20, 21)], 2000.0, 0.1)
        assert len(mu) == 0
        assert mu.d == pytest.approx(1.0, abs=0.05)

    def test_threshold_guard(self, lat2100):
        with pytest.raises(InvalidInputError):
            bohr_scan(lat2100, [1.0], 2000.0, 1e-5)

    def test_scan_conjugate_symmetry(self, uni2100):
        grid = sorted(set([float(k) for k in range(-6, 7)]
                          + [round(k * SQRT2, 12) for k in range(-4, 5)]))
        mu = bohr_scan(uni2100, grid, 2000.0, 0.1)
        assert mu.conjugate_defect() < 0.01


class TestLogderivMeasure:
    def test_cos_exact_atoms(self, cos):
        mu = logderiv_measure(cos, 1.0, 10.0)
        assert mu.d == pytest.approx(1.0, abs=1e-10)
        for k in range(1, 10):
            assert mu.mass_at(float(k)) == pytest.approx((-1.0) ** k, abs=1e-10)
            assert mu.mass_at(float(-k)) == pytest.approx((-1.0) ** k, abs=1e-10)

    def test_cutoff_strict(self, cos):
        mu = logderiv_measure(cos, 1.0, 10.0)
        assert float(np.max(mu.gammas)) < 10.0

    def test_single_exponential_rejected(self):
        with pytest.raises(DomainError):
            logderiv_measure(canonicalize([(0.7, 2.0)]), 1.0, 10.0)

    def test_non_real_zeros_rejected(self):
        f = canonicalize([(0.0, 1.0), (1.0, -0.25)])
        with pytest.raises(DomainError):
            logderiv_measure(f, "auto", 5.0, realness_window=(-5.2, 5.2))

    def test_height_independence(self, cos):
        mu1 = logderiv_measure(cos, 0.6, 8.0)
        mu2 = logderiv_measure(cos, 1.3, 8.0)
        for k in range(1, 8):
            assert abs(mu1.mass_at(float(k)) - mu2.mass_at(float(k))) < 1e-9

    def test_conjugate_symmetry(self, funion):
        mu = logderiv_measure(funion, "auto", 8.0)
        assert mu.conjugate_defect() < 1e-9

    def test_logderivative_norm_bound(self, cos, funion):
        # the coefficient-sum of f'/f at height s stays below
        # 6*pi*max(|w_n| e^{2pi(w_n-w_1)s}) * sum|q_n/q_1|
        from qclab.wiener import at_height, choose_height, derivative, multiply, neumann_inverse
        for f in (cos, funion):
            s, _ = choose_height(f)
            ld = multiply(at_height(derivative(f), s),
                          neumann_inverse(f, s, prune_tol=0.0, keep_freqs_up_to=10.0),
                          prune_tol=0.0)
            w1 = f.freqs[0]
            q1 = abs(f.coeffs[0])
            cf = (6 * np.pi
                  * float(np.max(np.abs(f.freqs) * np.exp(2 * np.pi * (f.freqs - w1) * s)))
                  * float(np.sum(np.abs(f.coeffs))) / q1)
            assert ld.wiener_norm <= cf

    def test_union_atoms_on_both_combs(self, funion):
        mu = logderiv_measure(funion, "auto", 10.0)
        assert mu.d == pytest.approx(1.0 + SQRT2, abs=1e-9)
        assert mu.mass_at(1.0) == pytest.approx(-1.0, abs=1e-9)
        assert mu.mass_at(3.0) == pytest.approx(-1.0, abs=1e-9)
        assert mu.mass_at(SQRT2) == pytest.approx(-SQRT2, abs=1e-9)
        assert mu.mass_at(2 * SQRT2) == pytest.approx(SQRT2, abs=1e-9)
        # no atoms off the two combs
        for g in mu.gammas:
            on_int = abs(g - round(g)) < 1e-6
            on_r2 = abs(g / SQRT2 - round(g / SQRT2)) < 1e-6
            assert on_int or on_r2


class TestRouteAgreement:
    def test_cos_routes_agree(self, cos, lat2100):
        mu_log = logderiv_measure(cos, 1.0, 10.0)
        for g, b in mu_log.atoms():
            est = bohr_coefficient(lat2100, g, 2000.0)
            assert abs(est - b) < 0.01

    def test_union_routes_agree(self, funion, uni2100):
        mu_log = logderiv_measure(funion, "auto", 10.0)
        for g, b in mu_log.atoms():
            est = bohr_coefficient(uni2100, g, 2000.0)
            assert abs(est - b) < 0.01

    def test_d_matches_density(self, funion, uni2100):
        from qclab.apset import density
        mu_log = logderiv_measure(funion, "auto", 10.0)
        est = density(uni2100)
        assert abs(mu_log.d - est.d) <= est.error_bound


class TestPoissonResidual:
    def test_exact_lattice_identity(self, lat2100):
        rep = poisson_residual(lat2100, lattice_measure(K=8), GaussianSpec(1.0))
        assert rep.residual < 1e-8
        assert rep.zero_tail < 1e-8 and rep.atom_tail < 1e-8
        # both sides equal the theta-function value
        theta = sum(math.exp(-math.pi * (n + 0.5) ** 2) for n in range(-40, 40))
        assert rep.zero_side == pytest.approx(theta, rel=1e-12)

    def test_union_scanned_measure(self, uni2100):
        grid = sorted(set([float(k) for k in range(-8, 9)]
                          + [round(k * SQRT2, 12) for k in range(-6, 7)]))
        mu = bohr_scan(uni2100, grid, 2000.0, 0.1)
        rep = poisson_residual(uni2100, mu, GaussianSpec(1.0))
        assert rep.residual < 1e-3

    def test_negative_control(self, lat2100):
        broken = lattice_measure(K=8).drop_atom(1.0)
        rep = poisson_residual(lat2100, broken, GaussianSpec(1.0))
        assert rep.residual > 1e-2

    def test_residual_improves_with_T(self, uni2100):
        grid = sorted(set([float(k) for k in range(-8, 9)]
                          + [round(k * SQRT2, 12) for k in range(-6, 7)]))
        residuals = []
        for T in (250.0, 500.0, 1000.0, 2000.0):
            mu = bohr_scan(uni2100, grid, T, 0.1)
            residuals.append(poisson_residual(uni2100, mu, GaussianSpec(1.0)).residual)
        assert residuals[-1] <= residuals[0]
        assert residuals[-1] < 1e-3

    def test_insufficient_window(self):
        A = lattice_zeroset(0.5, 1.0, 3)
        with pytest.raises(InsufficientDataError) as exc:
            poisson_residual(A, lattice_measure(K=1), GaussianSpec(1.0))
        assert exc.value.required_window is not None


class TestGrowthProfile:
    def test_lattice_floor(self):
        prof = growth_profile(lattice_measure(K=10), range(1, 11))
        assert prof.m_of_s == [(float(s), float(s)) for s in range(1, 11)]
        assert prof.t3_value == 0.0
        assert prof.kappa_fit == pytest.approx(1.0, abs=0.2)

    def test_union_no_atoms_below_one(self, funion):
        mu = logderiv_measure(funion, "auto", 10.0)
        prof = growth_profile(mu, np.linspace(0.5, 10, 20))
        assert prof.t3_value == 0.0

    def test_compressed_lattice_atom(self):
        mu = PointMeasure(0.6, np.array([-0.6, 0.6]), np.array([-0.6 + 0j, -0.6 + 0j]))
        prof = growth_profile(mu, [0.5, 1.0, 2.0])
        assert prof.t3_value == pytest.approx(1.0, abs=1e-12)

    def test_m_nondecreasing(self, funion):
        mu = logderiv_measure(funion, "auto", 10.0)
        ms = [m for _, m in growth_profile(mu, np.linspace(0.3, 9.5, 30)).m_of_s]
        assert all(a <= b for a, b in zip(ms, ms[1:]))
