"""Functionals: local times, Feynman-Kac weights, Wiener integrals,
exponential densities, Bessel mean functions, envelope."""
import numpy as np
import pytest
from scipy import special

from penalab.functionals import (abs_gauss_exp_moment, bessel_mean,
                                 centered_wiener_integral, exp_density,
                                 f_phi_integral, fk_log_weight, fk_weight_t,
                                 fk_weight_total, gaussian_envelope,
                                 local_time_band, local_time_signed,
                                 local_time_zero, occupation_integral, phi_a,
                                 wiener_integral)
from penalab.integrands import Integrand, MeasureSpec
from penalab.paths import SamplePath, concat, make_grid, shift
from penalab.samplers import sample_W, substream, WProposal

RNG = np.random.default_rng(321)


def bm_matrix(n_paths, n_steps, dt, seed, x0=0.0):
    rng = np.random.default_rng(seed)
    X = np.concatenate(
        [np.full((n_paths, 1), x0),
         x0 + np.cumsum(rng.standard_normal((n_paths, n_steps)) * np.sqrt(dt), axis=1)],
        axis=1)
    return X


def test_local_time_away_from_level_is_zero():
    g = make_grid(1.0, 0.01)
    p = SamplePath(g, np.full(g.n + 1, 5.0))
    assert local_time_zero(p).value == 0.0
    assert local_time_signed(p.values) == 0.0


def test_band_local_time_mean_on_bm():
    dt = 1e-3
    X = bm_matrix(4000, 1000, dt, seed=42)
    lt = local_time_band(X, dt)
    target = np.sqrt(2.0 / np.pi)     # E L^0_1 = E|B_1|
    se = lt.std() / np.sqrt(len(lt))
    assert abs(lt.mean() - target) <= 4 * se + 0.05 * target


def test_band_eps_doubling_bias_bounded():
    dt = 1e-3
    X = bm_matrix(4000, 1000, dt, seed=43)
    eps = np.sqrt(dt)
    a = local_time_band(X, dt, eps=eps).mean()
    b = local_time_band(X, dt, eps=2 * eps).mean()
    assert abs(b - a) <= 3 * eps      # documented O(eps) movement


def test_signed_local_time_mean_exact():
    # E exp(-lam L_t) has the closed form erfcx(lam sqrt(t/2)) from 0
    dt, t, lam = 1e-3, 1.0, 1.0
    X = bm_matrix(6000, int(t / dt), dt, seed=44)
    lt = local_time_signed(X)
    vals = np.exp(-lam * lt)
    exact = special.erfcx(lam * np.sqrt(t / 2.0))
    se = vals.std() / np.sqrt(len(vals))
    budget = 0.5 * lam * lam * np.sqrt(dt) * exact
    assert abs(vals.mean() - exact) <= 4 * se + budget


def test_signed_local_time_splits_exactly():
    vals = np.concatenate([[0.0], np.cumsum(RNG.standard_normal(400)) * 0.05])
    k = 137
    total = local_time_signed(vals)
    left = local_time_signed(vals, upto=k)
    right = (abs(vals[-1]) - abs(vals[k])
             - np.sum(np.where(vals[k:-1] >= 0, 1, -1) * np.diff(vals[k:])))
    assert total == pytest.approx(left + right, abs=1e-12)


def test_fk_weight_trivial_cases():
    g = make_grid(2.0, 0.01)
    p = SamplePath(g, np.zeros(g.n + 1))
    assert fk_weight_t(MeasureSpec.empty(), p, 2.0).value == 1.0
    far = SamplePath(g, np.full(g.n + 1, 5.0))
    assert fk_weight_t(MeasureSpec.point(0.0, 3.0), far, 2.0).value == 1.0
    # box density along the zero path: occupation = t exactly
    got = fk_weight_t(MeasureSpec.box(-1, 1, 1), p, 2.0).value
    assert got == pytest.approx(np.exp(-2.0), rel=1e-12)


def test_fk_weight_multiplicative_on_concat():
    dt = 0.01
    gen = substream(99, 0)
    b = np.concatenate([[0.0], np.cumsum(gen.standard_normal(100)) * np.sqrt(dt)])
    b -= np.linspace(0, 1, 101) * b[-1]
    b[-1] = 0.0
    y = np.concatenate([[0.0], np.cumsum(np.abs(gen.standard_normal(150))) * 0.02])
    gx = make_grid(1.0, dt)
    gy = make_grid(1.5, dt)
    x_path = SamplePath(gx, b)
    y_path = SamplePath(gy, y)
    z = concat(x_path, y_path)
    for V in (MeasureSpec.point(0.0, 1.0), MeasureSpec.box(-0.5, 0.5, 2.0),
              MeasureSpec.points([(-0.3, 1.0), (0.2, 0.5)])):
        whole = fk_weight_total(V, z).value
        left = fk_weight_t(V, z, 1.0).value
        right = fk_weight_total(V, shift(z, 1.0)).value
        assert whole == pytest.approx(left * right, rel=1e-12)


def test_fk_weight_on_sigma_finite_draw_stops_at_u():
    # after the last zero the sign is constant: no further level-0 time
    grid = make_grid(16.0, 0.01)
    wp = sample_W(WProposal(kind="gamma", theta=1.0, alpha=1.0), grid, substream(5, 3))
    V = MeasureSpec.point(0.0, 1.3)
    ku = wp.path.grid.index(wp.u)
    upto = np.exp(fk_log_weight(V, wp.path.values, 0.01, upto=ku))
    full = fk_weight_total(V, wp.path).value
    assert full == pytest.approx(upto, rel=1e-12)


def test_fk_total_censor_flag():
    g = make_grid(1.0, 0.01)
    near = SamplePath(g, np.full(g.n + 1, 1.5))     # inside support+3
    v = MeasureSpec.point(0.0, 1.0)
    assert fk_weight_total(v, near).censored
    far = SamplePath(g, np.full(g.n + 1, 9.0))
    assert not fk_weight_total(v, far).censored
    wobble = SamplePath(g, 9.0 * np.cos(np.linspace(0, 60, g.n + 1)))
    assert fk_weight_total(v, wobble).censored      # not sign-constant late


def test_wiener_integral_step_exact():
    g = make_grid(2.0, 0.25)
    vals = np.array([0.0, 1.0, -1.0, 2.0, 0.5, 0.5, 3.0, -2.0, 1.0])
    p = SamplePath(g, vals)
    f = Integrand.indicator(0.0, 1.0)
    got = wiener_integral(f, p.values, p.dt)
    assert got == pytest.approx(vals[4] - vals[0], abs=1e-15)
    assert wiener_integral(Integrand.zero(), p.values, p.dt) == 0.0
    with pytest.raises(ValueError):
        wiener_integral(Integrand.indicator(0.0, 3.0), p.values, p.dt)
    off_grid = Integrand.indicator(0.0, 0.3)
    with pytest.raises(ValueError):
        wiener_integral(off_grid, p.values, p.dt)


def test_wiener_integral_ito_isometry():
    dt = 1e-3
    X = bm_matrix(4000, 1500, dt, seed=46)
    for f in (Integrand.indicator(0.0, 1.0),
              Integrand.step([0.0, 0.5, 1.0, 1.5], [1.0, -0.5, 0.25]),
              Integrand.step([0.0, 1.0], [0.7])):
        w = wiener_integral(f, X, dt)
        var = w.var()
        se = np.sqrt(2.0 / len(w)) * var     # var of the variance estimator
        assert abs(var - f.l2_sq) <= 4 * se + 1e-3
        assert abs(w.mean()) <= 4 * w.std() / np.sqrt(len(w))


def test_exp_density_unit_mean_and_multiplicativity():
    dt = 1e-3
    X = bm_matrix(4000, 1000, dt, seed=47)
    f = Integrand.indicator(0.0, 1.0)
    e = exp_density(f, X, dt)
    se = e.std() / np.sqrt(len(e))
    assert abs(e.mean() - 1.0) <= 4 * se
    assert np.all(exp_density(Integrand.zero(), X, dt) == 1.0)
    # exact multiplicativity at a grid split
    t = 0.5
    k = int(t / dt)
    left = exp_density(f, X, dt, t=t)
    right = exp_density(f.shifted(t), X[:, k:], dt)
    np.testing.assert_allclose(left * right, e, rtol=1e-12)


def test_phi_a_closed_forms():
    assert phi_a(0.0, 2.0 / np.pi) == pytest.approx(1.0)
    assert phi_a(1e-6, 0.5) == pytest.approx(phi_a(0.0, 0.5), rel=1e-4)
    # small-time limit 1/a for a > 0
    assert phi_a(2.0, 1e-8) == pytest.approx(0.5, rel=1e-12)
    ts = np.geomspace(1e-3, 30, 50)
    assert np.all(phi_a(1.0, ts) <= phi_a(0.0, ts))
    with pytest.raises(ValueError):
        phi_a(-1.0, 1.0)
    with pytest.raises(ValueError):
        phi_a(1.0, 0.0)


def test_bessel_mean_values():
    assert bessel_mean(0.0, 1.0) == pytest.approx(np.sqrt(8 / np.pi))
    assert bessel_mean(2.0, 0.0) == 2.0
    assert bessel_mean(0.0, 4.0) == pytest.approx(np.sqrt(32 / np.pi))
    # quadrature route for a > 0 agrees with direct integration
    from scipy.integrate import quad
    direct = 1.0 + quad(lambda s: phi_a(1.0, s), 0, 1.0)[0]
    assert bessel_mean(1.0, 1.0) == pytest.approx(direct, rel=1e-6)


def test_f_phi_integral_exact_vs_quadrature():
    f = Integrand.indicator(0.0, 1.0)
    # a=0 closed form: sqrt(2/pi) * 2 sqrt(1)
    assert f_phi_integral(f, 0.0) == pytest.approx(2.0 * np.sqrt(2 / np.pi))
    from scipy.integrate import quad
    want = quad(lambda s: phi_a(1.5, s), 0, 1.0)[0]
    assert f_phi_integral(f, 1.5) == pytest.approx(want, rel=1e-5)
    assert f_phi_integral(Integrand.zero(), 0.0) == 0.0


def test_centered_wiener_integral_zero_for_zero_f():
    X = bm_matrix(3, 100, 0.01, seed=48) + 1.0
    assert np.all(centered_wiener_integral(Integrand.zero(), X, 0.01, 1.0) == 0.0)


def test_envelope_closed_form_and_trivial_tail():
    f = Integrand.indicator(0.0, 1.0)
    assert gaussian_envelope(f, 2.0) == 0.0
    sig = f.tail_l2(0.5)
    b = np.sqrt(2 / np.pi) * f.f_tilde(0.5) + 0.5 * sig ** 2
    closed = (np.exp(2 * b) * abs_gauss_exp_moment(2 * sig)
              - 2 * np.exp(b) * abs_gauss_exp_moment(sig) + 1.0)
    assert gaussian_envelope(f, 0.5) == pytest.approx(closed, rel=1e-9)


def test_abs_gauss_exp_moment():
    # E e^{b|N|} via brute force
    z = np.abs(np.random.default_rng(7).standard_normal(400_000))
    for b in (0.3, 1.0, -0.5):
        mc = np.exp(b * z).mean()
        assert abs_gauss_exp_moment(b) == pytest.approx(mc, rel=5e-3)


def test_occupation_integral_matches_local_time_route():
    # occupation identity: time quadrature vs local-time-in-space integral
    dt = 1e-3
    X = bm_matrix(800, 1000, dt, seed=49)
    V = MeasureSpec.box(-1.0, 1.0, 1.0)
    occ = occupation_integral(X, dt, V).mean()
    ys = np.linspace(-1, 1, 41)
    lt = np.mean([local_time_band(X, dt, level=y).mean() for y in ys])
    assert occ == pytest.approx(lt * 2.0, rel=0.05)


def test_envelope_gh_cross_check():
    from penalab.functionals import gaussian_envelope_gh
    f = Integrand.step([0.0, 1.0], [0.5])
    for t in (0.0, 0.5):
        exact = gaussian_envelope(f, t)
        gh = gaussian_envelope_gh(f, t)
        assert gh == pytest.approx(exact, rel=5e-3)
