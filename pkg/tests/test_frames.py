import math
from fractions import Fraction

import numpy as np
import pytest

import coorbit as cb
from coorbit.fields import affine_box, tf_box
from coorbit.frames import (
    DesignSearchError,
    ReconstructionDivergence,
    atom_certificate,
    besov_exponent,
    design_lattice,
    frame_bounds_empirical,
    frame_operator_invert,
    gabor_coefficients,
    gabor_frame_operator,
    gabor_synthesize,
    gabor_tightness_probe,
    neumann_reconstruct,
    random_bandlimited_signal,
    stft_window_sufficient,
    wavelet_atom_sufficient,
)
from coorbit.groups import build_affine_quadrature, build_tf_quadrature
from coorbit.lattices import AffineLattice, TFLattice, build_bupu, sample_field
from coorbit.signals import inner
from coorbit.voice import NotAdmissibleError, cwt


@pytest.fixture(scope="module")
def atom_chart():
    # working chart for the all-moments atom: kernel decays well inside
    return build_affine_quadrature(-2, 2, 512, 1 / 4, 4, 49, (1, -1))


@pytest.fixture(scope="module")
def atom_kernel(s0_atom_normalized, atom_chart):
    return cwt(s0_atom_normalized, s0_atom_normalized, atom_chart)


class TestCertificate:
    def test_consistency_invariants(self, s0_atom, atom_chart):
        w1 = cb.symmetric_power(1.0)
        cert = atom_certificate(s0_atom, atom_chart, w1, affine_box(0.05, 1.05))
        assert cert.q == pytest.approx(cert.kernel_l1w * cert.osc_l1w, rel=1e-12)
        assert cert.passed == (cert.q < 1.0)
        assert "chart" in cert.to_dict()

    def test_enlarging_U_never_decreases_q(self, s0_atom, atom_chart):
        w1 = cb.symmetric_power(1.0)
        small = atom_certificate(s0_atom, atom_chart, w1, affine_box(0.02, 1.02))
        large = atom_certificate(s0_atom, atom_chart, w1, affine_box(0.1, 1.1))
        assert large.q >= small.q

    def test_not_admissible(self, gauss, atom_chart):
        with pytest.raises(NotAdmissibleError):
            atom_certificate(gauss, atom_chart, cb.symmetric_power(1.0),
                             affine_box(0.1, 1.1))

    def test_tf_certificate_runs(self, gauss):
        quad = build_tf_quadrature(-6, 0.125, 97, -6, 0.125, 97)
        cert = atom_certificate(gauss, quad, cb.poly_tf(0, 0), tf_box(0.05, 0.05))
        assert cert.q > 0


class TestAtomSufficiency:
    def test_mexican_hat(self, mexhat):
        assert wavelet_atom_sufficient(mexhat, 1.0).passed  # 1 < 2 - 1/2
        assert not wavelet_atom_sufficient(mexhat, 2.0).passed  # 2 >= 1.5

    def test_gaussian_fails(self, gauss):
        rep = wavelet_atom_sufficient(gauss, 0.0)
        assert rep.vanishing_moments == 0
        assert not rep.passed

    def test_report_contents(self, mexhat):
        rep = wavelet_atom_sufficient(mexhat, 1.0)
        assert rep.vanishing_moments == 2
        assert len(rep.absolute_moments) == rep.vanishing_moments + 2
        assert len(rep.derivative_l1_norms) == rep.vanishing_moments + 1
        assert all(np.isfinite(v) for v in rep.derivative_l1_norms)


class TestWindowSufficiency:
    def test_gaussian_passes(self, gauss):
        assert stft_window_sufficient(gauss, 1.0, 1.0).passed

    def test_boxcar_fails_in_frequency(self):
        n = 2048
        dt = 32.0 / n
        t = -16 + dt * np.arange(n)
        box = cb.SampledSignal(-16, dt, ((t >= -0.5) & (t < 0.5)).astype(float))
        rep = stft_window_sufficient(box, 0.0, 2.0)
        assert not rep.passed
        assert rep.freq_tail_fraction > 0.01

    def test_zero_signal_fails(self, gauss):
        rep = stft_window_sufficient(gauss.with_values(np.zeros(gauss.n)), 1.0, 1.0)
        assert not rep.passed


@pytest.fixture(scope="module")
def g():
    return cb.gaussian(-16, 16, 2048)


@pytest.fixture(scope="module")
def lat():
    # omega rows extend past the test band by several window bandwidths
    # so the frame operator stays well-conditioned on the leakage
    return TFLattice.separable(0.5, 0.5, (-24, 24), (-12, 12))


class TestGabor:

    def test_zero_in_zero_out(self, g, lat):
        zero = g.with_values(np.zeros(g.n))
        out = gabor_frame_operator(zero, g, lat)
        assert np.max(np.abs(out.values)) == 0.0

    def test_self_adjoint(self, g, lat):
        rng = np.random.default_rng(0)
        f = random_bandlimited_signal(g, (0.2, 1.0), rng, envelope_width=2.5)
        h = random_bandlimited_signal(g, (0.2, 1.0), rng, envelope_width=2.5)
        sf = gabor_frame_operator(f, g, lat)
        sh = gabor_frame_operator(h, g, lat)
        assert inner(sf, h) == pytest.approx(inner(f, sh), abs=1e-8)

    def test_tightness_probe(self, g, lat):
        probe = gabor_tightness_probe(g, lat, ensemble=20, seed=5,
                                      band=(0.2, 1.2), envelope_width=2.5)
        assert probe["variation"] < 0.10

    def test_synthesis_adjoint_roundtrip(self, g, lat):
        rng = np.random.default_rng(1)
        f = random_bandlimited_signal(g, (0.2, 1.0), rng, envelope_width=2.5)
        c = gabor_coefficients(f, g, lat)
        sf = gabor_frame_operator(f, g, lat)
        assert np.allclose(gabor_synthesize(c, g, lat).values, sf.values, atol=1e-12)

    def test_inversion_reconstructs(self, g, lat):
        rng = np.random.default_rng(11)
        f = random_bandlimited_signal(g, (0.25, 1.0), rng, envelope_width=2.2)
        probe = gabor_tightness_probe(g, lat, ensemble=5, seed=5,
                                      band=(0.25, 1.0), envelope_width=2.2)
        sf = gabor_frame_operator(f, g, lat)
        rec, rep = frame_operator_invert(sf, g, lat, (probe["min"], probe["max"]),
                                         tol=1e-10, max_iter=50)
        err = np.sqrt(np.sum(np.abs(rec.values - f.values) ** 2)
                      / np.sum(np.abs(f.values) ** 2))
        assert err <= 1e-6

    def test_bad_bounds_rejected(self, g, lat):
        with pytest.raises(ValueError):
            frame_operator_invert(g, g, lat, (0.0, 1.0))


class TestFrameBounds:
    def test_gabor_near_tight(self):
        g = cb.gaussian(-16, 16, 2048)
        lat = TFLattice.separable(0.5, 0.5, (-24, 24), (-7, 7))
        quad = build_tf_quadrature(-12, 0.125, 193, -3.5, 0.125, 57)
        rep = frame_bounds_empirical(g, lat, p=2, ensemble=20, seed=3, quad=quad,
                                     band=(0.2, 1.2), envelope_width=3.0)
        assert rep.a_hat / rep.b_hat >= 0.9

    def test_coarse_lattice_far_from_frame(self):
        g = cb.gaussian(-16, 16, 2048)
        lat = TFLattice.separable(2.0, 2.0, (-6, 6), (-2, 2))
        quad = build_tf_quadrature(-12, 0.125, 193, -3.5, 0.125, 57)
        rep = frame_bounds_empirical(g, lat, p=2, ensemble=20, seed=3, quad=quad,
                                     band=(0.2, 1.2), envelope_width=3.0)
        assert rep.a_hat / rep.b_hat < 0.6

    def test_single_draw_degenerate(self):
        g = cb.gaussian(-16, 16, 2048)
        lat = TFLattice.separable(0.5, 0.5, (-24, 24), (-7, 7))
        quad = build_tf_quadrature(-12, 0.125, 193, -3.5, 0.125, 57)
        rep = frame_bounds_empirical(g, lat, p=2, ensemble=1, seed=9, quad=quad,
                                     band=(0.2, 1.2), envelope_width=3.0)
        assert rep.a_hat == rep.b_hat

    def test_upper_bound_law(self, s0_atom_normalized, atom_chart, atom_kernel):
        # empirical upper ratio <= analytic N * C * (osc + kernel) bound
        psi = s0_atom_normalized
        w1 = cb.symmetric_power(1.0)
        beta, alpha = 0.7**8, 1 + 0.7**8
        U = affine_box(beta, alpha)
        cert = atom_certificate(psi, atom_chart, w1, U)
        ln_a = math.log(alpha)
        j_span = int(math.ceil(math.log(4) / ln_a))
        k_span = int(math.ceil(2 / (beta * 0.25)))
        lat = AffineLattice(alpha, beta, -j_span, j_span, -k_span, k_span, (1, -1))
        rep = frame_bounds_empirical(psi, lat, p=2, m=None, ensemble=5, seed=2,
                                     quad=atom_chart, band=(0.45, 1.1),
                                     envelope_width=0.6)
        from coorbit.lattices import cover_counts, default_density_probe

        counts = cover_counts(lat, U, *default_density_probe(atom_chart, lat, U))
        n_max = int(np.max(counts))
        mass = U.haar_mass()
        c_lower = math.sqrt(alpha) / math.sqrt(mass)  # inverse lower constant
        analytic = c_lower * n_max * (cert.osc_l1w + cert.kernel_l1w)
        assert rep.b_hat <= analytic


@pytest.fixture(scope="module")
def neumann_setup(s0_atom_normalized, atom_chart, atom_kernel):
    psi = s0_atom_normalized
    w1 = cb.symmetric_power(1.0)
    n = 15
    beta, alpha = 0.7**n, 1 + 0.7**n
    U = affine_box(beta, alpha)
    cert = atom_certificate(psi, atom_chart, w1, U)
    assert cert.passed
    ln_a = math.log(alpha)
    j_span = int(math.ceil(math.log(4) / ln_a))
    k_span = int(math.ceil(2 / (beta * 0.25)))
    lat = AffineLattice(alpha, beta, -j_span, j_span, -k_span, k_span, (1, -1))
    bupu = build_bupu(lat, U, atom_chart)
    return psi, cert, lat, bupu, atom_kernel


class TestNeumann:
    def test_requires_certificate(self, neumann_setup):
        psi, cert, lat, bupu, K = neumann_setup
        samples = sample_field(K, lat)
        with pytest.raises(ValueError):
            neumann_reconstruct(samples, bupu, K)

    def test_zero_samples(self, neumann_setup):
        psi, cert, lat, bupu, K = neumann_setup
        zero = sample_field(K.with_values(np.zeros_like(K.values)), lat)
        field, rep = neumann_reconstruct(zero, bupu, K, certificate=cert)
        assert rep.converged
        assert np.max(np.abs(field.values)) == 0.0

    def test_kernel_reconstruction(self, neumann_setup):
        # K itself lies in the reproducing space: its samples determine it
        psi, cert, lat, bupu, K = neumann_setup
        samples = sample_field(K, lat)
        rec, rep = neumann_reconstruct(samples, bupu, K, tol=1e-4, max_iter=100,
                                       certificate=cert, ground_truth=K)
        assert rep.converged
        assert rep.final_relative_error <= 5e-3
        ratios = rep.contraction_ratios()
        assert np.max(ratios[2:]) <= cert.q + 0.1

    def test_divergence_detection(self, neumann_setup):
        psi, cert, lat, bupu, K = neumann_setup
        # feeding a kernel scaled far above idempotence makes T expansive
        bad_K = K.with_values(25.0 * K.values)
        samples = sample_field(bad_K, lat)
        with pytest.raises(ReconstructionDivergence) as exc:
            neumann_reconstruct(samples, bupu, bad_K, tol=1e-6, max_iter=50,
                                allow_uncertified=True)
        assert exc.value.report.iterations >= 3


class TestDesign:
    def test_zero_cap_errors(self, s0_atom, atom_chart):
        with pytest.raises(DesignSearchError):
            design_lattice(s0_atom, atom_chart, cb.symmetric_power(1.0), max_steps=0)

    def test_insufficient_moments_rejected(self, gauss, atom_chart):
        with pytest.raises(ValueError):
            design_lattice(gauss, atom_chart, cb.symmetric_power(1.0))

    def test_monotone_q_and_success(self, s0_atom, atom_chart):
        result = design_lattice(s0_atom, atom_chart, cb.symmetric_power(1.0),
                                max_steps=18)
        assert result.certificate.passed
        qs = np.asarray(result.q_history)
        assert np.all(np.diff(qs) < 0)
        assert result.beta == pytest.approx(0.7 ** (result.steps - 1))

    def test_cap_below_crossing_reports_best(self, s0_atom, atom_chart):
        with pytest.raises(DesignSearchError) as exc:
            design_lattice(s0_atom, atom_chart, cb.symmetric_power(1.0), max_steps=4)
        assert exc.value.best_q > 1.0
        assert len(exc.value.q_history) == 4


class TestBesovExponent:
    def test_pinned_values(self):
        assert besov_exponent(2, 1) == (Fraction(1), 2, 2)
        sigma, p, q = besov_exponent(math.inf, Fraction(1, 2))
        assert sigma == 0 and p == math.inf and q == math.inf
        assert besov_exponent(1, 0)[0] == Fraction(1, 2)

    def test_exact_rational(self):
        sigma, _, _ = besov_exponent(3, Fraction(2, 7))
        assert sigma == Fraction(2, 7) - Fraction(1, 2) + Fraction(1, 3)
        assert isinstance(sigma, Fraction)

    def test_float_path(self):
        sigma, _, _ = besov_exponent(2.0, 0.25)
        assert sigma == pytest.approx(0.25)

    def test_invalid_p(self):
        with pytest.raises(ValueError):
            besov_exponent(0.5, 1)
