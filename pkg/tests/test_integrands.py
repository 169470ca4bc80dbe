"""Integrand norms, primitives, tail transforms; measure specifications."""
import numpy as np
import pytest

from penalab.integrands import DensityPiece, Integrand, MeasureSpec


def test_step_values_and_norms():
    f = Integrand.step([0.0, 0.5, 1.0, 1.5], [1.0, -0.5, 0.25])
    assert f.support_end == 1.5
    np.testing.assert_allclose(f.value([0.0, 0.4999, 0.5, 1.2, 1.5, 2.0]),
                               [1.0, 1.0, -0.5, 0.25, 0.0, 0.0])
    assert f.l1 == pytest.approx(0.5 + 0.25 + 0.125)
    assert f.l2_sq == pytest.approx(0.5 + 0.125 + 0.03125)


def test_primitive_exact_for_steps():
    f = Integrand.indicator(0.0, 1.0)
    assert f.primitive(0.5) == pytest.approx(0.5)
    assert f.primitive(2.0) == pytest.approx(1.0)       # no trapezoid smearing
    assert f.primitive(1.0) == pytest.approx(1.0)
    np.testing.assert_allclose(f.primitive(np.array([0.25, 3.0])), [0.25, 1.0])


def test_zero_and_indicator_constructors():
    assert Integrand.zero().is_zero
    g = Integrand.indicator(0.5, 1.0, height=2.0)
    np.testing.assert_allclose(g.value([0.25, 0.75]), [0.0, 2.0])


def test_tail_quantities():
    f = Integrand.indicator(0.0, 1.0)
    assert f.tail_l2(0.0) == pytest.approx(1.0)
    assert f.tail_l2(0.75) == pytest.approx(0.5)
    assert f.tail_l2(2.0) == 0.0
    assert f.l1_tail(0.25) == pytest.approx(0.75)


def test_f_tilde_exact_and_zero_tail():
    f = Integrand.indicator(0.0, 1.0)
    assert f.f_tilde(1.0) == 0.0
    assert f.f_tilde(2.0) == 0.0
    assert f.f_tilde(0.0) == pytest.approx(2.0)         # int_0^1 s^{-1/2}
    assert f.f_tilde(0.75) == pytest.approx(2.0 * np.sqrt(0.25))


def test_shifted_step():
    f = Integrand.step([0.0, 0.5, 1.0], [1.0, -2.0])
    g = f.shifted(0.25)
    np.testing.assert_allclose(g.value([0.0, 0.2, 0.3, 0.8]),
                               [1.0, 1.0, -2.0, 0.0])
    assert f.shifted(5.0).is_zero
    assert f.shifted(0.0) is f


def test_tabulated_roundtrip():
    dt = 0.01
    ts = np.arange(100) * dt
    f = Integrand.tabulated(np.sin(ts), dt)
    assert f.support_end == pytest.approx(1.0)
    # trapezoid primitive close to 1 - cos(t)
    assert f.primitive(0.7) == pytest.approx(1 - np.cos(0.7), abs=5e-3)
    assert f.f_tilde(1.5) == 0.0
    assert f.f_tilde(0.5) > 0.0


def test_measure_spec_masses():
    V = MeasureSpec.points([(0.0, 2.0), (1.0, 0.5)])
    assert V.total_mass() == pytest.approx(2.5)
    assert V.weighted_total() == pytest.approx(2.0 + 0.5 * 2.0)
    assert V.support_radius() == 1.0
    box = MeasureSpec.box(-1.0, 1.0, 1.0)
    assert box.total_mass() == pytest.approx(2.0)
    # int (1+|x|) 1_[-1,1] dx = 2 + 1
    assert box.weighted_total() == pytest.approx(3.0)


def test_density_evaluation():
    box = MeasureSpec.box(-1.0, 1.0, 1.0)
    np.testing.assert_allclose(box.density([-1.5, -1.0, 0.0, 1.0, 1.5]),
                               [0.0, 1.0, 1.0, 1.0, 0.0])
    bump = MeasureSpec.bump()
    np.testing.assert_allclose(bump.density([-3.0, -2.5, -2.0, 0.0, 2.5, 3.0]),
                               [0.0, 0.5, 1.0, 1.0, 0.5, 0.0])
    assert np.all(bump.density(np.linspace(-5, 5, 101)) >= 0)


def test_bump_dominates_box_plus_one():
    # v0 = 1 on |x| <= 2 covers the unit box shifted by up to 1
    bump, box = MeasureSpec.bump(), MeasureSpec.box()
    xs = np.linspace(-1, 1, 201)
    shifts = np.linspace(-1, 1, 41)
    for s in shifts:
        assert np.all(bump.density(xs + s) >= box.density(xs) - 1e-15)


def test_invalid_measures():
    with pytest.raises(ValueError):
        MeasureSpec.point(0.0, -1.0)
    with pytest.raises(ValueError):
        MeasureSpec.point(0.0, 0.0)
    # empty measure allowed as trivial kernel
    assert MeasureSpec.empty().total_mass() == 0.0


def test_scaled_measure():
    V = MeasureSpec.box(-1, 1, 1).scaled(2.0)
    assert V.total_mass() == pytest.approx(4.0)
    np.testing.assert_allclose(V.density([0.0]), [2.0])
    with pytest.raises(ValueError):
        V.scaled(0.0)


def test_density_piece_weighted_mass():
    # (1+|x|) against a symmetric box: 2 * int_0^1 (1+x) dx = 3
    p = DensityPiece(-1.0, 1.0, 1.0, 1.0)
    assert p.weighted_mass() == pytest.approx(3.0)
    # triangle on [0,2]: int (1+x)(x/2) dx = [x^2/4 + x^3/6] = 1 + 8/6
    tri = DensityPiece(0.0, 2.0, 0.0, 1.0)
    assert tri.weighted_mass() == pytest.approx(1.0 + 8.0 / 6.0)
