import numpy as np
import pytest

from blowup.integrate import IntegratorConfig
from blowup.model import Params, explicit_interface_F0
from blowup.shooting import (Exhausted, Interface, ReachedOrigin,
                             VerticalSlope, count_maxima, find_good_profiles,
                             interface_series_state, multiplicity_scan,
                             nonexistence_gap, series_constant,
                             shoot_backward, shoot_forward, slope_fn)

P20 = Params(m=2.0, sigma=0.0)
P201 = Params(m=2.0, sigma=0.1)
TIGHT = IntegratorConfig(rel_tol=1e-12, abs_tol=1e-14)


class TestSeriesSeed:
    def test_constant_value(self):
        # C = (m-1) h0 / (2 sqrt(m(m-1))) = sqrt((m-1)/(2m(m+1)))
        for m in (2.0, 3.0, 1.5):
            p = Params(m=m, sigma=0.3)
            assert series_constant(p) == pytest.approx(
                np.sqrt((m - 1.0) / (2.0 * m * (m + 1.0))), rel=1e-14)

    def test_seed_state(self):
        p = Params(m=2.0, sigma=0.0)
        C = series_constant(p)
        g, dg = interface_series_state(p, 5.0, 1e-4)
        assert g == pytest.approx((C * 1e-4) ** 4, rel=1e-12)
        assert dg == pytest.approx(-4.0 * C * (C * 1e-4) ** 3, rel=1e-12)

    def test_validation(self):
        with pytest.raises(ValueError):
            interface_series_state(P20, -1.0, 1e-6)
        with pytest.raises(ValueError):
            interface_series_state(P20, 1.0, 2.0)


class TestForwardShot:
    def test_sigma0_explicit_interface(self):
        # the sigma=0 shot from the explicit amplitude lands its interface at
        # pi*m/(m-1); tight tolerances since the interface layer amplifies
        # integration error into the projected location
        prof, out = shoot_forward(P20, 4.0 / 3.0, xi_max=20.0, config=TIGHT)
        assert isinstance(out, Interface)
        assert out.xi0 == pytest.approx(2.0 * np.pi, abs=1e-5)
        assert prof.interface == out.xi0
        assert prof.maxima == (0.0,)
        assert count_maxima(prof) == 1

    def test_sigma0_constant_solution(self):
        prof, out = shoot_forward(P20, 1.0, xi_max=10.0)
        assert isinstance(out, Exhausted)
        assert np.max(np.abs(prof.g - 1.0)) < 1e-9
        assert count_maxima(prof) == 0

    def test_sigma_half_vertical_slope(self):
        prof, out = shoot_forward(Params(2.0, 0.5), 3.0, xi_max=50.0)
        assert isinstance(out, VerticalSlope)
        # transversal vanishing: dg stays O(1) at the crossing
        assert abs(prof.dg[-1]) > 1e-3

    def test_rejects_bad_inputs(self):
        with pytest.raises(ValueError):
            shoot_forward(P20, -1.0)
        with pytest.raises(ValueError):
            shoot_forward(P20, 1.0, xi_max=0.0)

    def test_small_sigma_good_profile_roundtrip(self):
        # backward shot at a slope root, re-shot forward from its axis data,
        # must place the interface back at the root
        prof_b, out_b = shoot_backward(P201, 9.6355)
        assert isinstance(out_b, ReachedOrigin)
        prof_f, out_f = shoot_forward(P201, out_b.f0, slope0=out_b.slope,
                                      xi_max=20.0, config=TIGHT)
        assert isinstance(out_f, Interface)
        assert out_f.xi0 == pytest.approx(9.6355, abs=5e-3)


class TestBackwardShot:
    def test_sigma0_recovers_explicit(self):
        prof, out = shoot_backward(P20, explicit_interface_F0(2.0))
        assert isinstance(out, ReachedOrigin)
        assert out.f0 == pytest.approx(4.0 / 3.0, abs=1e-4)
        assert out.slope == pytest.approx(0.0, abs=1e-4)
        assert count_maxima(prof) == 1
        assert prof.maxima == (0.0,)

    def test_interface_annotations(self):
        prof, _ = shoot_backward(P20, 2.0 * np.pi)
        assert prof.interface == pytest.approx(2.0 * np.pi)
        # seeded essentially at the interface: g and dg vanish there
        assert prof.g[-1] < 1e-20
        assert abs(prof.dg[-1]) < 1e-15
        assert np.all(np.diff(prof.xi) > 0.0)

    def test_small_sigma_slope_signs(self):
        # the slope of the backward shot at the axis, at the reference points
        # xi0 = 10, 12, 14 for sigma = 0.1: all negative
        slopes = [shoot_backward(P201, x, dense_dx=None, track_events=False)[1].slope
                  for x in (10.0, 12.0, 14.0)]
        assert all(s < 0.0 for s in slopes)

    def test_positive_slope_window(self):
        # between the slope roots near 6.9 and 9.64 the slope is positive
        _, out = shoot_backward(P201, 8.0, dense_dx=None, track_events=False)
        assert isinstance(out, ReachedOrigin) and out.slope > 0.0

    def test_rejects_bad_xi0(self):
        with pytest.raises(ValueError):
            shoot_backward(P20, -2.0)


class TestSlopeFn:
    def test_sigma0_root(self):
        assert slope_fn(P20, explicit_interface_F0(2.0)) == \
            pytest.approx(0.0, abs=1e-4)

    def test_sign_structure_small_sigma(self):
        # slope changes sign across the roots at ~6.90, ~9.64, ~15.39
        assert slope_fn(P201, 6.5) < 0.0
        assert slope_fn(P201, 8.0) > 0.0
        assert slope_fn(P201, 12.0) < 0.0
        assert slope_fn(P201, 16.0) > 0.0

    def test_nonexistence_regime_all_negative(self):
        p = Params(2.0, 4.0)
        for xi0 in (0.5, 2.0, 8.0, 20.0):
            assert slope_fn(p, xi0) < 0.0


class TestFindGoodProfiles:
    def test_sigma0_unique_hump(self):
        found = find_good_profiles(P20, 5.0, 7.0, grid_n=9)
        assert len(found) == 1
        gp = found[0]
        assert gp.xi0 == pytest.approx(2.0 * np.pi, abs=1e-3)
        assert gp.n_max == 1
        assert gp.a == pytest.approx(4.0 / 3.0, abs=1e-4)
        assert abs(gp.slope) < 1e-6
        assert gp.residual < 1e-6

    def test_two_roots_in_window(self):
        found = find_good_profiles(P201, 8.0, 16.0, grid_n=33)
        xi0s = sorted(gp.xi0 for gp in found)
        assert len(xi0s) == 2
        assert xi0s[0] == pytest.approx(9.6355, abs=0.05)
        assert xi0s[1] == pytest.approx(15.3854, abs=0.05)
        n_by_xi0 = {round(gp.xi0, 1): gp.n_max for gp in found}
        assert n_by_xi0[9.6] == 1
        assert n_by_xi0[15.4] == 2

    def test_empty_when_no_sign_change(self):
        found = find_good_profiles(Params(2.0, 4.0), 1.0, 10.0, grid_n=13)
        assert found == []

    def test_window_validation(self):
        with pytest.raises(ValueError):
            find_good_profiles(P20, 3.0, 2.0)
        with pytest.raises(ValueError):
            find_good_profiles(P20, 1.0, 2.0, grid_n=1)


class TestGoodProfileInvariants:
    def test_maxima_above_equilibrium_hyperbola(self):
        found = find_good_profiles(P201, 8.0, 16.0, grid_n=33)
        for gp in found:
            m, sigma = gp.params.m, gp.params.sigma
            for xi_m in gp.profile.maxima:
                if xi_m == 0.0:
                    continue
                i = gp.profile.nearest_index(xi_m)
                level = (m - 1.0) * xi_m ** sigma \
                    * float(gp.profile.f[i]) ** (m - 1.0)
                assert level >= 1.0 - 1e-6

    def test_interface_end_state(self):
        found = find_good_profiles(P20, 5.5, 7.0, grid_n=9)
        prof = found[0].profile
        assert prof.g[-1] < 1e-12
        assert abs(prof.dg[-1]) < 1e-12


class TestMultiplicityScan:
    def test_sigma0_one_hump_window(self):
        rows = multiplicity_scan(2.0, [0.0], 7.0, xi0_lo=4.0, grid_dx=0.5)
        assert rows[0].count == 1
        assert rows[0].xi0s[0] == pytest.approx(2.0 * np.pi, abs=1e-3)

    def test_failure_recorded_not_raised(self):
        rows = multiplicity_scan(2.0, [0.0, -1.0], 7.0, xi0_lo=4.0)
        by_sigma = {r.sigma: r for r in rows}
        assert by_sigma[-1.0].error is not None
        assert by_sigma[0.0].error is None


class TestNonexistenceGap:
    def test_reference_values_m2_sigma4(self):
        gb = nonexistence_gap(Params(2.0, 4.0))
        assert gb.xi_plus == pytest.approx((48.0 / 5.0) ** (1.0 / 6.0), abs=1e-12)
        assert gb.xi_minus == pytest.approx(12.0 ** (1.0 / 6.0), abs=1e-12)
        assert gb.gap is True

    def test_no_gap_at_small_sigma(self):
        gb = nonexistence_gap(Params(2.0, 1.0))
        assert gb.gap is False
        assert gb.xi_minus < gb.xi_plus

    def test_threshold_value(self):
        gb = nonexistence_gap(Params(2.0, 1.0))
        assert gb.sigma_threshold == pytest.approx(4.0 * np.sqrt(0.8), rel=1e-12)

    def test_threshold_identity_random(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            m = 1.0 + rng.uniform(0.1, 4.0)
            sigma = rng.uniform(0.05, 8.0)
            gb = nonexistence_gap(Params(m, sigma))
            assert gb.gap == (sigma * sigma * (2.0 * m + 1.0) > 8.0 * m ** 3)

    def test_requires_positive_sigma(self):
        with pytest.raises(ValueError):
            nonexistence_gap(Params(2.0, 0.0))


class TestCountMaxima:
    def test_explicit_profile(self):
        prof, _ = shoot_forward(P20, 4.0 / 3.0, xi_max=20.0)
        assert count_maxima(prof) == 1

    def test_constant_profile(self):
        prof, _ = shoot_forward(P20, 1.0, xi_max=10.0)
        assert count_maxima(prof) == 0

    def test_oscillating_profile(self):
        # the root near 15.39 carries two maxima and one interior minimum
        prof, out = shoot_backward(P201, 15.3854)
        assert isinstance(out, ReachedOrigin)
        assert count_maxima(prof) == 2
        assert len(prof.minima) >= 1


class TestGapImpliesEmpty:
    @pytest.mark.parametrize("m,sigma,hi", [(2.0, 4.0, 12.0), (3.0, 6.0, 8.0)])
    def test_gap_windows_are_empty(self, m, sigma, hi):
        params = Params(m, sigma)
        assert nonexistence_gap(params).gap
        cfg = IntegratorConfig(rel_tol=1e-8, abs_tol=1e-12)
        found = find_good_profiles(params, 0.5, hi, grid_n=17, config=cfg)
        assert found == []


class TestScanParallelism:
    def test_thread_env_var_is_deterministic(self, monkeypatch):
        seq = find_good_profiles(P201, 9.0, 11.0, grid_n=9)
        monkeypatch.setenv("BLOWUP_NUM_THREADS", "4")
        par = find_good_profiles(P201, 9.0, 11.0, grid_n=9)
        assert [gp.xi0 for gp in seq] == [gp.xi0 for gp in par]
        assert [gp.n_max for gp in seq] == [gp.n_max for gp in par]


class TestMultiSigmaScan:
    def test_rows_sorted_and_complete(self):
        rows = multiplicity_scan(2.0, [0.1, 0.0], 7.0, xi0_lo=4.0,
                                 grid_dx=0.5)
        assert [r.sigma for r in rows] == [0.0, 0.1]
        assert rows[0].count == 1          # the explicit sigma=0 hump
        assert rows[1].count >= 1          # the first sigma=0.1 root at 6.9
        for r in rows:
            assert len(r.xi0s) == r.count == len(r.n_maxs)


class TestIndependentCollocationOracle:
    def test_bvp_collocation_confirms_root(self):
        # independent route to the first sigma=0.1 good profile in [8, 16]:
        # collocation (scipy.solve_bvp) on s = xi/xi0 with xi0 an unknown
        # parameter, boundary conditions dg(0) = 0 plus the interface-series
        # contact at the right end.  Started from a deformed guess (5%
        # amplitude distortion, 2% off in xi0), it must come back to the
        # shooting answer through an entirely different discretization.
        from scipy.integrate import solve_bvp

        params = P201
        C = series_constant(params)
        pw = 4.0  # series exponent at m = 2
        eps_rel = 1e-3

        def ode(s, y, p):
            xi0 = p[0]
            g = np.maximum(y[0], 0.0)
            return np.vstack([xi0 * y[1],
                              xi0 * (np.sqrt(g) - (xi0 * s) ** 0.1 * y[0])])

        def bc(ya, yb, p):
            eps = eps_rel * p[0]
            return np.array([ya[1],
                             yb[0] - (C * eps) ** pw,
                             yb[1] + pw * C * (C * eps) ** (pw - 1.0)])

        root = _bisect(params, 9.5, 9.8)
        prof, out = shoot_backward(params, root, dense_dx=None)
        s_nodes = np.linspace(0.0, 1.0 - eps_rel, 400)
        g_i = np.interp(s_nodes * root, prof.xi, prof.g) * 1.05
        dg_i = np.interp(s_nodes * root, prof.xi, prof.dg) * 1.05
        sol = solve_bvp(ode, bc, s_nodes, np.vstack([g_i, dg_i]),
                        p=[1.02 * root], tol=1e-8, max_nodes=60000)
        assert sol.p[0] == pytest.approx(root, abs=1e-4)
        assert np.sqrt(sol.y[0][0]) == pytest.approx(out.f0, abs=1e-5)


def _bisect(params, lo, hi, tol=1e-7):
    s_lo = slope_fn(params, lo)
    assert s_lo * slope_fn(params, hi) < 0.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        s_mid = slope_fn(params, mid)
        if abs(s_mid) < tol:
            return mid
        if (s_lo < 0.0) == (s_mid < 0.0):
            lo, s_lo = mid, s_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


class TestVerticalSlopeSteepness:
    def test_f_slope_blows_up_at_vanish(self):
        # transversal vanishing has dg bounded away from zero, so the slope
        # of f itself diverges approaching the zero
        prof, out = shoot_forward(Params(2.0, 0.5), 3.0, xi_max=50.0)
        assert isinstance(out, VerticalSlope)
        fp = prof.fprime
        interior = prof.g > 1e-12
        assert fp[interior][-1] < -10.0


class TestSigmaZeroRegressionM3:
    def test_roundtrip_with_cubic_series(self):
        # m = 3 exercises the p = 3 interface series (g ~ delta^3): the
        # explicit profile has amplitude sqrt(3)/2 and interface 3*pi/2
        m = 3.0
        p = Params(m, 0.0)
        from blowup.model import explicit_interface_F0, explicit_profile_F0
        a = explicit_profile_F0(m, 0.0)
        xi0 = explicit_interface_F0(m)
        assert a == pytest.approx(np.sqrt(3.0) / 2.0, rel=1e-15)
        assert xi0 == pytest.approx(1.5 * np.pi, rel=1e-15)

        prof, out = shoot_forward(p, a, xi_max=10.0, config=TIGHT)
        assert isinstance(out, Interface)
        assert out.xi0 == pytest.approx(xi0, abs=1e-5)

        _, back = shoot_backward(p, xi0)
        assert isinstance(back, ReachedOrigin)
        assert back.f0 == pytest.approx(a, abs=1e-8)
        assert back.slope == pytest.approx(0.0, abs=1e-8)
