"""Monte Carlo oracle: determinism, closed-form agreement, paired physics."""

import math

import numpy as np
import pytest

import diffint.mc as mc
from diffint.core import EnsembleConfig
from diffint.errors import DegenerateTiltError, InvalidParameterError
from diffint.schemes import LightConfig, SchemeId, evaluate_scheme

# Desk-scale regime: variances resolvable with modest sample counts while
# the closed forms' assumption hierarchy still holds.
N_BAR = 1e4
LIGHT = LightConfig(n=1e7, chi=1e-4)
SEED = 20260818
SAMPLES = 200_000


def desk_cfg(alpha=0.0, gamma=0.0, phi=0.0, theta=0.0):
    return EnsembleConfig.symmetric(
        N_BAR, gamma=gamma, alpha=alpha, phi=phi, theta=theta
    )


def opts(n_samples=SAMPLES, seed=SEED, **kw):
    return mc.McOptions(n_samples=n_samples, seed=seed, **kw)


def variance_tolerance(closed: float, result: mc.McResult) -> float:
    return max(0.05 * closed, 4.0 * result.se_variance)


class TestDeterminism:
    def test_repeat_call_bit_identical(self):
        cfg = desk_cfg(alpha=0.02, gamma=10.0)
        a = mc.run_scheme_mc(cfg, LIGHT, "js", opts())
        b = mc.run_scheme_mc(cfg, LIGHT, "js", opts())
        assert a == b

    def test_worker_count_invariance(self):
        cfg = desk_cfg(alpha=0.02, gamma=10.0)
        one = mc.run_scheme_mc(cfg, LIGHT, "js_plus_corrected", opts(workers=1))
        three = mc.run_scheme_mc(cfg, LIGHT, "js_plus_corrected", opts(workers=3))
        assert one == three

    def test_pregenerated_normals_bit_identical(self):
        cfg = desk_cfg(alpha=0.02, gamma=10.0)
        z = mc.generate_normals(SEED, SAMPLES)
        direct = mc.run_scheme_mc(cfg, LIGHT, "ss_plus", opts())
        shared = mc.run_scheme_mc(cfg, LIGHT, "ss_plus", opts(), normals=z)
        assert direct == shared

    def test_backends_agree(self):
        try:
            from diffint.mc import _kernel  # noqa: F401
        except ImportError:
            pytest.skip("compiled kernel not built")
        cfg = desk_cfg(alpha=0.02, gamma=10.0, phi=0.003, theta=0.001)
        for scheme in SchemeId:
            a = mc.run_scheme_mc(cfg, LIGHT, scheme, opts(), backend="kernel")
            b = mc.run_scheme_mc(cfg, LIGHT, scheme, opts(), backend="numpy")
            assert a.sample_variance == pytest.approx(b.sample_variance, rel=1e-12)
            assert a.sample_mean == pytest.approx(b.sample_mean, rel=1e-9, abs=1e-15)

    def test_active_backend_reports_valid_name(self):
        assert mc.active_backend() in ("kernel", "numpy")


class TestClosedFormAgreement:
    """MC variance/mean vs closed forms, at parameters inside the
    closed forms' validity regime."""

    CELLS = [
        ("cs", 0.0, 0.0),
        ("cs", 0.02, 10.0),
        ("ss", 0.0, 0.0),
        ("ss", 0.02, 10.0),
        ("ss_plus", 0.0, 0.0),
        ("ss_plus", 0.02, 0.0),
        ("js", 0.0, 10.0),
        ("js", 0.02, 0.0),
        ("js_plus", 0.0, 0.0),
        ("js_plus", 0.02, 10.0),
        ("js_plus_corrected", 0.0, 10.0),
        ("js_plus_corrected", 0.02, 0.0),
    ]

    @pytest.mark.parametrize("scheme,alpha,gamma", CELLS)
    def test_variance_matches(self, scheme, alpha, gamma):
        cfg = desk_cfg(alpha=alpha, gamma=gamma)
        result = mc.run_scheme_mc(cfg, LIGHT, scheme, opts())
        closed = evaluate_scheme(SchemeId(scheme), cfg, LIGHT)
        assert abs(result.sample_variance - closed.variance) <= variance_tolerance(
            closed.variance, result
        )

    def test_means_unbiased_at_zero_phases(self):
        # At phi = theta = 0 every estimator's sample mean must vanish
        # within sampling error.
        for scheme, alpha, gamma in self.CELLS:
            cfg = desk_cfg(alpha=alpha, gamma=gamma)
            result = mc.run_scheme_mc(cfg, LIGHT, scheme, opts())
            assert abs(result.sample_mean) <= 4.0 * result.se_mean, scheme

    def test_ee_without_second_pulse_matches_closed_form(self):
        # The EE closed form keeps leading order only; the second squeezing
        # pulse's quadratic back-action is exactly the part it drops, so
        # toggling that pulse off must land on the closed form.
        cfg = desk_cfg()
        result = mc.run_scheme_mc(cfg, LIGHT, "ee", opts(), ee_second_pulse=False)
        closed = evaluate_scheme(SchemeId.EE, cfg, LIGHT)
        assert abs(result.sample_variance - closed.variance) <= variance_tolerance(
            closed.variance, result
        )

    @staticmethod
    def _pulse_moments():
        """Exact Gaussian moments of one back-action angle a = chi * S_z.

        With a ~ N(0, sigma^2), sigma^2 = chi^2 n / 4:
        E[cos a] = exp(-sigma^2/2), E[cos^2 a] = (1 + exp(-2 sigma^2))/2,
        E[sin^2 a] = (1 - exp(-2 sigma^2))/2.
        """
        sigma2 = LIGHT.chi**2 * LIGHT.n / 4.0
        e_cos = math.exp(-sigma2 / 2.0)
        e_cos2 = 0.5 * (1.0 + math.exp(-2.0 * sigma2))
        e_sin2 = 0.5 * (1.0 - math.exp(-2.0 * sigma2))
        e_cosm1_sq = e_cos2 - 2.0 * e_cos + 1.0
        return e_cos2, e_sin2, e_cosm1_sq

    def test_ee_full_chain_carries_derived_quadratic_excess(self):
        # The full EE chain exceeds the leading-order closed form by the
        # quadratic back-action of the pulse between the two read-outs:
        # the swapped-basis interlude turns the z-sum into
        # (z-sum)*cos(a_t) + sin(a_t) sin(a_s) (j_y - l_y), so the phi
        # read-out gains (1/cos^2 v)(N/2)[E(cos a - 1)^2 + E(sin^2 a)^2]/N^2.
        cfg = desk_cfg()
        e_cos2, e_sin2, e_cosm1_sq = self._pulse_moments()
        excess = 2.0 * (N_BAR / 2.0) * (e_cosm1_sq + e_sin2**2) / N_BAR**2
        closed = evaluate_scheme(SchemeId.EE, cfg, LIGHT)
        result = mc.run_scheme_mc(cfg, LIGHT, "ee", opts())
        expected = closed.variance + excess
        tol = max(0.03 * expected, 4.0 * result.se_variance)
        assert abs(result.sample_variance - expected) <= tol

    def test_ee_theta_estimator_at_gamma_zero(self):
        # The theta read-out shares the phi read-out's leading variance at
        # varphi=pi/4 but collects quadratic back-action from two pulses
        # (the second squeezing pulse and the first read-out pulse), whose
        # leak coefficient is sin(a_s) cos(a_t) (j_y - l_y) plus
        # sin(a_t) (j_z + l_z).
        cfg = desk_cfg()
        e_cos2, e_sin2, e_cosm1_sq = self._pulse_moments()
        excess = (
            2.0
            * (N_BAR / 2.0)
            * (e_cos2 * e_cosm1_sq + e_sin2 * (e_sin2 * e_cos2 + e_sin2))
            / N_BAR**2
        )
        result = mc.run_scheme_mc(cfg, LIGHT, "ee", opts(), ee_estimator="theta")
        from diffint.schemes import eval_ee

        _, theta_closed = eval_ee(cfg, LIGHT)
        expected = theta_closed.variance + excess
        tol = max(0.03 * expected, 4.0 * result.se_variance)
        assert abs(result.sample_variance - expected) <= tol
        assert abs(result.sample_mean) <= 4.0 * result.se_mean


class TestPairedPhysics:
    """Common-random-number comparisons isolating single effects."""

    def test_joint_vs_individual_squeezing_factor_two(self):
        cfg = desk_cfg()
        ss = mc.run_scheme_mc(cfg, LIGHT, "ss", opts())
        js = mc.run_scheme_mc(cfg, LIGHT, "js", opts())
        assert js.sample_variance / ss.sample_variance == pytest.approx(0.5, abs=0.01)

    def test_detection_noise_attribution(self):
        # Toggling alpha adds exactly the closed-form detection term;
        # common random numbers keep everything else identical.
        for scheme in ("cs", "ss"):
            base = mc.run_scheme_mc(desk_cfg(), LIGHT, scheme, opts())
            noisy = mc.run_scheme_mc(desk_cfg(alpha=0.02), LIGHT, scheme, opts())
            measured = noisy.sample_variance - base.sample_variance
            expected = (
                evaluate_scheme(SchemeId(scheme), desk_cfg(alpha=0.02), LIGHT).breakdown[
                    "detection"
                ]
                - evaluate_scheme(SchemeId(scheme), desk_cfg(), LIGHT).breakdown[
                    "detection"
                ]
            )
            bound = 3.0 * math.hypot(base.se_variance, noisy.se_variance)
            assert abs(measured - expected) <= bound, scheme

    def test_exact_interaction_damps_fringe(self):
        # With exact trigonometry the light's shot noise damps the mean
        # fringe by exp(-n chi^2 / 8); linearized runs show no damping.
        phi = 0.2
        cfg = desk_cfg(phi=phi)
        damping = math.exp(-LIGHT.n * LIGHT.chi**2 / 8.0)
        exact = mc.run_scheme_mc(cfg, LIGHT, "ss", opts())
        linear = mc.run_scheme_mc(
            cfg, LIGHT, "ss", opts(include_exact_trig=False)
        )
        assert abs(exact.sample_mean - math.sin(phi) * damping) <= 4 * exact.se_mean
        assert abs(linear.sample_mean - math.sin(phi)) <= 4 * linear.se_mean
        # the two targets are hundreds of sigma apart
        assert abs(exact.sample_mean - linear.sample_mean) > 50 * exact.se_mean

    def test_ee_second_pulse_leaves_phi_mean_invariant(self):
        # The two entangling pulses address commuting joint observables at
        # gamma=0: adding the second pulse must not shift the phi read-out.
        cfg = desk_cfg()
        full = mc.run_scheme_mc(cfg, LIGHT, "ee", opts())
        bare = mc.run_scheme_mc(cfg, LIGHT, "ee", opts(), ee_second_pulse=False)
        bound = 3.0 * math.hypot(full.se_mean, bare.se_mean)
        assert abs(full.sample_mean - bare.sample_mean) <= bound

    def test_mismatch_term_scales_with_gamma(self):
        # JS carries a gamma^2/(8 N^2) mismatch term; CRN isolates it.
        base = mc.run_scheme_mc(desk_cfg(), LIGHT, "js", opts())
        mis = mc.run_scheme_mc(desk_cfg(gamma=10.0), LIGHT, "js", opts())
        expected = 10.0**2 / (8.0 * N_BAR**2)
        measured = mis.sample_variance - base.sample_variance
        bound = 3.0 * math.hypot(base.se_variance, mis.se_variance)
        assert abs(measured - expected) <= bound


class TestMicroState:
    def test_fixed_offset_alternates_assignment(self):
        cfg = desk_cfg(gamma=10.0)
        o = opts()
        even = mc.sample_initial(cfg, LIGHT, o, 0)
        odd = mc.sample_initial(cfg, LIGHT, o, 1)
        assert (even.n_j, even.n_l) == (cfg.N_J, cfg.N_L)
        assert (odd.n_j, odd.n_l) == (cfg.N_L, cfg.N_J)
        assert abs(even.n_j - even.n_l) == pytest.approx(
            10.0 * math.sqrt(N_BAR), rel=1e-12
        )

    def test_state_matches_stream(self):
        cfg = desk_cfg(alpha=0.02, gamma=10.0)
        o = opts()
        idx = 137
        state = mc.sample_initial(cfg, LIGHT, o, idx)
        row = mc.generate_normals(SEED, 1, start=idx)[0]
        sj = math.sqrt(0.25 * state.n_j)
        assert state.j[0] == 0.5 * state.n_j
        assert state.j[1] == sj * row[0]
        assert state.j[2] == sj * row[1]
        shot = math.sqrt(0.25 * LIGHT.n)
        assert state.s[0] == 0.5 * LIGHT.n
        assert state.t[1] == shot * row[6]
        assert state.s_r[2] == shot * row[9]
        assert state.t_r[1] == shot * row[10]
        # detection offsets reconstruct the spin/number noises
        w = math.sqrt(cfg.alpha * state.n_j) * row[12]
        s = math.sqrt(cfg.alpha * state.n_j) * row[14]
        assert state.delta_n_j[0] + state.delta_n_j[1] == pytest.approx(s, rel=1e-12)
        assert 0.5 * (state.delta_n_j[0] - state.delta_n_j[1]) == pytest.approx(
            w, rel=1e-12
        )

    def test_zero_alpha_means_zero_detection_offsets(self):
        state = mc.sample_initial(desk_cfg(), LIGHT, opts(), 3)
        assert state.delta_n_j == (0.0, 0.0)
        assert state.delta_n_l == (0.0, 0.0)

    def test_deterministic_and_order_independent(self):
        cfg = desk_cfg(gamma=10.0, alpha=0.02)
        o = opts()
        first = mc.sample_initial(cfg, LIGHT, o, 42)
        other = mc.sample_initial(cfg, LIGHT, o, 7)
        again = mc.sample_initial(cfg, LIGHT, o, 42)
        assert np.array_equal(first.j, again.j)
        assert np.array_equal(first.t_r, again.t_r)
        assert first.delta_n_l == again.delta_n_l
        assert not np.array_equal(first.j, other.j)

    def test_gaussian_width_model(self):
        cfg = desk_cfg(gamma=10.0)
        o = opts(mismatch_model="gaussian_width")
        states = [mc.sample_initial(cfg, LIGHT, o, i) for i in range(2000)]
        n_j = np.array([s.n_j for s in states])
        n_l = np.array([s.n_l for s in states])
        assert np.all(n_j >= 1.0) and np.all(n_l >= 1.0)
        assert n_j.std() > 0 and n_l.std() > 0
        width = 0.5 * 10.0 * math.sqrt(N_BAR)
        for sample in (n_j, n_l):
            assert abs(sample.mean() - N_BAR) < 4.0 * width / math.sqrt(len(sample))
            assert sample.std() == pytest.approx(width, rel=0.15)

    def test_index_bounds_checked(self):
        with pytest.raises(InvalidParameterError):
            mc.sample_initial(desk_cfg(), LIGHT, opts(), -1)
        with pytest.raises(InvalidParameterError):
            mc.sample_initial(desk_cfg(), LIGHT, opts(), SAMPLES)
        with pytest.raises(InvalidParameterError):
            mc.sample_initial(desk_cfg(), None, opts(), 0)


class TestTransforms:
    def test_qnd_preserves_z_bitwise_and_norms(self):
        rng = np.random.default_rng(SEED)
        spins = rng.normal(scale=50.0, size=(5000, 3))
        spins[:, 0] += N_BAR / 2
        stokes = rng.normal(scale=1500.0, size=(5000, 3))
        stokes[:, 0] += LIGHT.n / 2
        spin_out, stokes_out = mc.qnd_transform(spins, stokes, LIGHT.chi)
        assert np.array_equal(spin_out[:, 2], spins[:, 2])
        assert np.array_equal(stokes_out[:, 2], stokes[:, 2])
        for before, after in ((spins, spin_out), (stokes, stokes_out)):
            norm_in = np.linalg.norm(before, axis=1)
            norm_out = np.linalg.norm(after, axis=1)
            assert np.max(np.abs(norm_out - norm_in) / norm_in) < 1e-9

    def test_qnd_rotation_angles(self):
        spin = np.array([3.0, 4.0, 5.0])
        stokes = np.array([10.0, -2.0, 7.0])
        chi = 0.05
        spin_out, stokes_out = mc.qnd_transform(spin, stokes, chi)
        a_spin = chi * stokes[2]
        a_stokes = chi * spin[2]
        assert spin_out[0] == pytest.approx(
            spin[0] * math.cos(a_spin) - spin[1] * math.sin(a_spin)
        )
        assert stokes_out[1] == pytest.approx(
            stokes[0] * math.sin(a_stokes) + stokes[1] * math.cos(a_stokes)
        )

    def test_joint_qnd_conserves_all_z(self):
        rng = np.random.default_rng(7)
        j = rng.normal(size=(100, 3))
        l = rng.normal(size=(100, 3))
        s = rng.normal(size=(100, 3))
        j_out, l_out, s_out = mc.joint_qnd_transform(j, l, s, 0.01)
        assert np.array_equal(j_out[:, 2], j[:, 2])
        assert np.array_equal(l_out[:, 2], l[:, 2])
        assert np.array_equal(s_out[:, 2], s[:, 2])
        # the light reads the z sum
        expected = s[0, 0] * math.sin(0.01 * (j[0, 2] + l[0, 2])) + s[0, 1] * math.cos(
            0.01 * (j[0, 2] + l[0, 2])
        )
        assert s_out[0, 1] == pytest.approx(expected)

    def test_linearized_interaction(self):
        spin = np.array([3.0, 4.0, 5.0])
        stokes = np.array([10.0, -2.0, 7.0])
        chi = 0.05
        spin_out, _ = mc.qnd_transform(spin, stokes, chi, exact=False)
        a = chi * stokes[2]
        assert spin_out[0] == pytest.approx(spin[0] - spin[1] * a)
        assert spin_out[1] == pytest.approx(spin[0] * a + spin[1])


class TestValidation:
    def test_option_invariants(self):
        with pytest.raises(InvalidParameterError):
            mc.McOptions(n_samples=999, seed=0)
        with pytest.raises(InvalidParameterError):
            mc.McOptions(n_samples=1000, seed=0, mismatch_model="bogus")
        with pytest.raises(InvalidParameterError):
            mc.McOptions(n_samples=1000, seed=0, workers=0)

    def test_light_required_for_squeezed_schemes(self):
        with pytest.raises(InvalidParameterError):
            mc.run_scheme_mc(desk_cfg(), None, "ss", opts())

    def test_cs_runs_without_light(self):
        result = mc.run_scheme_mc(desk_cfg(), None, "cs", opts(n_samples=1000))
        assert math.isfinite(result.sample_variance)

    def test_degenerate_ee_tilt_rejected(self):
        with pytest.raises(DegenerateTiltError):
            mc.run_scheme_mc(desk_cfg(), LIGHT, "ee", opts(), varphi=0.0)
        with pytest.raises(DegenerateTiltError):
            mc.run_scheme_mc(desk_cfg(), LIGHT, "ee", opts(), varphi=math.pi / 2)

    def test_theta_estimator_only_for_ee(self):
        with pytest.raises(InvalidParameterError):
            mc.run_scheme_mc(desk_cfg(), LIGHT, "js", opts(), ee_estimator="theta")
        with pytest.raises(InvalidParameterError):
            mc.run_scheme_mc(desk_cfg(), LIGHT, "ee", opts(), ee_estimator="both")

    def test_second_pulse_toggle_constraints(self):
        with pytest.raises(InvalidParameterError):
            mc.run_scheme_mc(
                desk_cfg(), LIGHT, "js", opts(), ee_second_pulse=False
            )
        with pytest.raises(InvalidParameterError):
            mc.run_scheme_mc(
                desk_cfg(),
                LIGHT,
                "ee",
                opts(),
                ee_estimator="theta",
                ee_second_pulse=False,
            )

    def test_normals_shape_checked(self):
        bad = np.zeros((10, 18))
        with pytest.raises(InvalidParameterError):
            mc.run_scheme_mc(desk_cfg(), LIGHT, "ss", opts(), normals=bad)
        wrong_width = np.zeros((SAMPLES, 4))
        with pytest.raises(InvalidParameterError):
            mc.run_scheme_mc(desk_cfg(), LIGHT, "ss", opts(), normals=wrong_width)

    def test_unknown_backend_rejected(self):
        with pytest.raises(InvalidParameterError):
            mc.run_scheme_mc(desk_cfg(), LIGHT, "ss", opts(), backend="fortran")

    def test_unknown_scheme_rejected(self):
        with pytest.raises(ValueError):
            mc.run_scheme_mc(desk_cfg(), LIGHT, "nope", opts())
