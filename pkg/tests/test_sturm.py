"""Two-point boundary solver for the penalisation normalizer."""
import numpy as np
import pytest

from penalab.functionals import fk_weight_t
from penalab.integrands import MeasureSpec
from penalab.paths import SamplePath, make_grid
from penalab.samplers import sample_bm, substream
from penalab.sturm import (SolverError, atomic_phi_oracle, martingale_density,
                           scale_gamma, solve_phi)


def test_single_atom_closed_form():
    for lam in (0.5, 1.0, 2.0):
        sol = solve_phi(MeasureSpec.point(0.0, lam), L=50.0, dx=1e-3)
        err = np.max(np.abs(sol.phi - (1.0 / lam + np.abs(sol.xs))))
        assert err <= 1e-6
        assert sol.C_V == pytest.approx(1.0 / lam, abs=1e-9)
        assert sol.phi_at(1.0) == pytest.approx(1.0 / lam + 1.0, abs=1e-8)


def test_boundary_slopes_exact():
    sol = solve_phi(MeasureSpec.box(-1, 1, 1), L=50.0, dx=2e-3)
    assert sol.dphi[0] == pytest.approx(-1.0, abs=1e-12)
    assert sol.dphi[-1] == pytest.approx(1.0, abs=1e-12)
    assert np.all(np.abs(sol.dphi) <= 1.0 + 1e-8)
    # linear growth far out
    assert sol.phi_at(40.0) / 40.0 == pytest.approx(1.0, rel=0.05)


def test_atom_jump_residuals():
    atoms = [(-1.0, 1.0), (0.5, 2.0)]
    sol = solve_phi(MeasureSpec.points(atoms), L=50.0, dx=1e-3)
    for k, jump in sol.jumps:
        lam = dict((x, l) for x, l in atoms)[round(sol.xs[k], 9)]
        assert jump == pytest.approx(2.0 * lam * sol.phi[k], rel=1e-12)
    # derivative jump observed in the tabulated left-derivatives
    for loc, lam in atoms:
        k = int(round((loc + 50.0) / 1e-3))
        observed = sol.dphi[k + 1] - sol.dphi[k]
        assert observed == pytest.approx(2.0 * lam * sol.phi[k], abs=1e-6)


def test_oracle_agreement_two_and_three_atoms():
    for atoms in ([(-1.0, 1.0), (1.0, 1.0)],
                  [(-1.5, 0.5), (0.0, 1.0), (2.0, 2.0)]):
        sol = solve_phi(MeasureSpec.points(atoms), L=50.0, dx=1e-3)
        oracle = atomic_phi_oracle(atoms)
        xs = np.linspace(-20, 20, 4001)
        assert np.max(np.abs(sol.phi_at(xs) - oracle(xs))) <= 1e-7
        assert sol.C_V == pytest.approx(oracle.C_V, abs=1e-8)


def test_box_density_residual_second_order():
    errs = []
    for dx in (4e-3, 2e-3, 1e-3):
        sol = solve_phi(MeasureSpec.box(-1, 1, 1), L=50.0, dx=dx)
        inner = slice(1, len(sol.xs) - 1)
        second = (sol.phi[2:] - 2 * sol.phi[1:-1] + sol.phi[:-2]) / dx ** 2
        target = 2.0 * MeasureSpec.box(-1, 1, 1).density(sol.xs[inner]) * sol.phi[inner]
        mask = np.abs(np.abs(sol.xs[inner]) - 1.0) > 2 * dx
        errs.append(np.max(np.abs((second - target)[mask])))
    assert errs[-1] <= 1e-3
    assert errs[-1] <= errs[0]


def test_scale_function():
    sol = solve_phi(MeasureSpec.point(0.0, 1.0))
    assert scale_gamma(sol, 0.0) == 0.0
    assert scale_gamma(sol, 1.0) == pytest.approx(0.5, abs=1e-6)
    xs = np.linspace(0, 10, 100)
    np.testing.assert_allclose(scale_gamma(sol, xs), -scale_gamma(sol, -xs),
                               atol=1e-9)


def test_solver_rejections():
    with pytest.raises(SolverError):
        solve_phi(MeasureSpec.point(30.0, 1.0), L=50.0)    # support too wide
    with pytest.raises(SolverError):
        solve_phi(MeasureSpec.empty(), L=50.0)             # V = 0 inconsistent


def test_martingale_density_unit_start_and_mean():
    V = MeasureSpec.point(0.0, 1.0)
    sol = solve_phi(V, L=50.0, dx=1e-3)
    g = make_grid(1.0, 1e-3)
    p = sample_bm(0.3, g, substream(77, 0))
    assert martingale_density(sol, p, 0.0) == pytest.approx(1.0, rel=1e-9)
    N = 3000
    vals = np.empty(N)
    for i in range(N):
        q = sample_bm(0.3, g, substream(78, i))
        vals[i] = martingale_density(sol, q, 1.0)
    se = vals.std() / np.sqrt(N)
    assert abs(vals.mean() - 1.0) <= 4 * se + 0.5 * np.sqrt(1e-3)


def test_martingale_density_median_decays():
    # almost-sure convergence to 0 shows up in the median (the mean stays 1)
    V = MeasureSpec.point(0.0, 1.0)
    sol = solve_phi(V, L=50.0, dx=1e-3)
    g = make_grid(16.0, 4e-3)
    N = 400
    med = []
    for t in (1.0, 4.0, 16.0):
        vals = [martingale_density(sol, sample_bm(0.0, g, substream(79, i)), t)
                for i in range(N)]
        med.append(np.median(vals))
    assert med[0] > med[1] > med[2]


def test_phi_interpolation_beyond_box():
    sol = solve_phi(MeasureSpec.point(0.0, 2.0), L=50.0, dx=1e-3)
    # linear continuation with unit slope outside [-L, L]
    assert sol.phi_at(60.0) == pytest.approx(sol.phi_at(50.0) + 10.0, rel=1e-12)
    assert sol.dphi_at(-70.0) == -1.0


def test_fk_consistency_with_martingale_density():
    V = MeasureSpec.points([(0.0, 1.0), (0.5, 0.5)])
    sol = solve_phi(V, L=50.0, dx=1e-3)
    g = make_grid(2.0, 1e-3)
    p = sample_bm(0.0, g, substream(80, 1))
    m = martingale_density(sol, p, 2.0)
    k = fk_weight_t(V, p, 2.0).value
    want = sol.phi_at(p.values[-1]) / sol.phi_at(0.0) * k
    assert m == pytest.approx(want, rel=1e-12)
