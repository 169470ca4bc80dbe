"""Named verification experiments: one per identity, bound or limit.

Each experiment consumes a RunConfig, runs its Monte Carlo or quadrature
legs with seeds derived from (master_seed, experiment tag), and returns a
list of IdentityCheck rows.  Verdicts are pure functions of (config, seed).

Estimation of the sigma-finite measure comes in two regimes.  Functionals
carrying an exp(-alpha g) factor are integrated with the matched gamma
proposal.  Functionals whose conditional mean decays only polynomially in
the last-exit time (Feynman-Kac weights and translated-path functionals)
put an irreducible fraction of their mass beyond any simulable horizon; for
bounded checks the estimate targets the restriction to {g <= t_max} with an
explicit quadrature tail budget, and the exact-identity checks on the
Feynman-Kac class are evaluated through the finite-horizon reduction
(kernel transported to a late time U times the marginal normalizer), which
is exact for atoms at the origin and solver-exact otherwise.
"""
from __future__ import annotations

import numpy as np
from scipy import integrate as sq


from .config import RunConfig
from .estimator import (EstimatorResult, IdentityCheck, bm_chunk_pass,
                        derive_seed, path_pass, run_chunked)
from .functionals import (abs_gauss_exp_moment, exp_density, f_phi_integral,
                          fk_log_weight, gaussian_envelope, local_time_signed,
                          occupation_integral, phi_a, wiener_integral)
from .integrands import Integrand, MeasureSpec
from .paths import hitting_index, last_exit_index
from .samplers import WProposal, sample_W, substream
from .sturm import atomic_phi_oracle, solve_phi

__all__ = ["REGISTRY", "BATTERY", "run_experiment", "envelope_rows"]

Z_ONE_SIDED = 3.0     # one-sided guards use 3 standard errors

# -- shared integrand battery -------------------------------------------------

F_ZERO = Integrand.zero()
F_UNIT = Integrand.step([0.0, 1.0], [1.0])
F_HALF = Integrand.step([0.0, 1.0], [0.5])
F_STEP3 = Integrand.step([0.0, 0.5, 1.0, 1.5], [1.0, -0.5, 0.25])
F_SIGNED = Integrand.step([0.0, 1.0, 2.0], [0.6, -0.6])

V_D0 = MeasureSpec.point(0.0, 1.0)
V_2D0 = MeasureSpec.point(0.0, 2.0)
V_BOX = MeasureSpec.box(-1.0, 1.0, 1.0)


def _sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * np.asarray(x)))


def _m0(u):
    return 1.0 / np.sqrt(2.0 * np.pi * u)


# -- vectorized path machinery -------------------------------------------------

def _last_exit_idx(X: np.ndarray) -> np.ndarray:
    """Row-wise last-exit index (matrix version of paths.last_exit_index)."""
    prod = X[:, :-1] * X[:, 1:]
    mask = prod <= 0
    has = mask.any(axis=1)
    j = X.shape[1] - 2 - np.argmax(mask[:, ::-1], axis=1)
    i = j + 1
    rows = np.arange(X.shape[0])
    at_prev = (X[rows, i] != 0.0) & (X[rows, np.maximum(i - 1, 0)] == 0.0)
    idx = np.where(at_prev, i - 1, i)
    return np.where(has, idx, 0)


def _first_hit_idx(X: np.ndarray, a: float) -> np.ndarray:
    """Row-wise first-visit index of level a; -1 when never within horizon."""
    v = X - a
    prod = v[:, :-1] * v[:, 1:]
    mask = prod <= 0
    has = mask.any(axis=1)
    j = np.argmax(mask, axis=1)
    i = j + 1
    rows = np.arange(X.shape[0])
    at_prev = v[rows, np.maximum(i - 1, 0)] == 0.0
    idx = np.where(at_prev, i - 1, i)
    idx = np.where(v[:, 0] == 0.0, 0, idx)
    return np.where(has | (v[:, 0] == 0.0), idx, -1)


# -- normalizer phi and tolerance budgets --------------------------------------

def _phi_hat(V: MeasureSpec, cfg: RunConfig):
    """(phi callable, C_V, source note) for the tail normalizer.

    Atoms at the origin admit the closed form 1/mass + |y| (the exact
    strong-Markov tail identity); anything else uses the ODE solver."""
    if not V.has_density and all(x == 0.0 for x, _ in V.atoms):
        lam = V.total_mass()
        return (lambda y: 1.0 / lam + np.abs(y)), 1.0 / lam, "closed-form"
    sol = solve_phi(V, L=cfg.L, dx=cfg.dx)
    return sol.phi_at, sol.C_V, "solver"


def _fk_budget(V: MeasureSpec, dt: float, scale: float) -> float:
    """Calibrated bias allowance for exp(-int L dV) estimated with the
    signed-increment local time / trapezoid occupation on step-dt paths."""
    lam = V.total_mass()
    return 0.5 * lam * lam * np.sqrt(dt) * abs(scale)


def _translation_tail_budget(f: Integrand, t_max: float) -> float:
    """Mass of translated-path functionals (bounded by 1, damped by
    exp(-g(X+h))) that lives beyond the horizon: paths with g(X) > t_max
    contribute only when the long bridge stays above the drift profile,
    which the reflection bound controls."""
    if f.is_zero:
        return 0.0
    ts = np.linspace(0.0, f.support_end, 2001)
    hbar = float(np.max(np.abs(f.primitive(ts))))
    if hbar == 0.0:
        return 0.0

    def integrand(u):
        stay = min(1.0, 2.0 * hbar * hbar / max(u - np.sqrt(u), 1.0))
        return _m0(u) * (0.5 * stay + np.exp(-np.sqrt(u)))

    val, _ = sq.quad(integrand, t_max, np.inf, limit=400)
    return float(val)


def _grid_h(f: Integrand, n: int, dt: float, T: float | None = None) -> np.ndarray:
    return f.primitive_on_grid(np.arange(n + 1) * dt, T=T)


# -- experiments ---------------------------------------------------------------


def exp_phi_atom(cfg: RunConfig) -> list[IdentityCheck]:
    """Sturm-Liouville exactness against closed forms and the independent
    piecewise-linear assembly for purely atomic measures."""
    rows = []
    for lam in (0.5, 1.0, 2.0):
        sol = solve_phi(MeasureSpec.point(0.0, lam), L=cfg.L, dx=cfg.dx)
        err = float(np.max(np.abs(sol.phi - (1.0 / lam + np.abs(sol.xs)))))
        rows.append(IdentityCheck.build(
            f"phi-atom/maxerr/lam={lam}", EstimatorResult.exact(err),
            EstimatorResult.exact(0.0, budget=1e-6)))
        rows.append(IdentityCheck.build(
            f"phi-atom/phi(1)/lam={lam}", EstimatorResult.exact(float(sol.phi_at(1.0))),
            EstimatorResult.exact(1.0 / lam + 1.0, budget=1e-6)))
    for name, atoms in (("two", [(-1.0, 1.0), (1.0, 1.0)]),
                        ("three", [(-1.5, 0.5), (0.0, 1.0), (2.0, 2.0)])):
        sol = solve_phi(MeasureSpec.points(atoms), L=cfg.L, dx=cfg.dx)
        oracle = atomic_phi_oracle(atoms)
        xs = np.linspace(-cfg.L / 2, cfg.L / 2, 2001)
        err = float(np.max(np.abs(sol.phi_at(xs) - oracle(xs))))
        rows.append(IdentityCheck.build(
            f"phi-atom/oracle/{name}-atom", EstimatorResult.exact(err),
            EstimatorResult.exact(0.0, budget=1e-7)))
        rows.append(IdentityCheck.build(
            f"phi-atom/oracle-CV/{name}-atom", EstimatorResult.exact(sol.C_V),
            EstimatorResult.exact(oracle.C_V, budget=1e-7)))
    # scale function: gamma_{delta_0}(1) = 1/(1+1) = 0.5; gamma odd for symmetric V
    from .sturm import scale_gamma
    sol = solve_phi(V_D0, L=cfg.L, dx=cfg.dx)
    rows.append(IdentityCheck.build(
        "phi-atom/gamma(1)", EstimatorResult.exact(float(scale_gamma(sol, 1.0))),
        EstimatorResult.exact(0.5, budget=1e-6)))
    xs = np.linspace(0.0, 5.0, 501)
    odd = float(np.max(np.abs(scale_gamma(sol, xs) + scale_gamma(sol, -xs))))
    rows.append(IdentityCheck.build(
        "phi-atom/gamma-odd", EstimatorResult.exact(odd),
        EstimatorResult.exact(0.0, budget=1e-9)))
    # interior residual of the box-density solve: second difference vs 2 v phi
    solb = solve_phi(V_BOX, L=cfg.L, dx=cfg.dx)
    inner = slice(1, len(solb.xs) - 1)
    second = (solb.phi[2:] - 2.0 * solb.phi[1:-1] + solb.phi[:-2]) / cfg.dx ** 2
    target = 2.0 * V_BOX.density(solb.xs[inner]) * solb.phi[inner]
    off_edge = np.abs(np.abs(solb.xs[inner]) - 1.0) > 2 * cfg.dx
    err = float(np.max(np.abs((second - target)[off_edge])))
    rows.append(IdentityCheck.build(
        "phi-atom/box-residual", EstimatorResult.exact(err),
        EstimatorResult.exact(0.0, budget=max(1e-3, 100 * cfg.dx ** 2))))
    return rows


def exp_w_oracle(cfg: RunConfig) -> list[IdentityCheck]:
    """Closed-form oracle for the weighted sampler: integrals of exp(-alpha g)."""
    grid_n = int(round(cfg.t_max / cfg.dt))
    alphas = (1.0, 2.0, 5.0)
    prop = WProposal(kind="gamma", theta=cfg.theta, alpha=min(alphas))
    from .paths import TimeGrid, last_exit_time
    grid = TimeGrid(t_max=cfg.t_max, dt=cfg.dt, n=grid_n)

    def make(gen, idx):
        wp = sample_W(prop, grid, gen)
        le = last_exit_time(wp.path)
        out = {f"a{a}": (wp.weight * np.exp(-a * le.time), wp.censored) for a in alphas}
        out["g-mismatch"] = (float(le.time != wp.u), False)
        return out

    n = max(1000, cfg.n_paths // 2)
    accs = run_chunked(n, derive_seed(cfg.master_seed, "w-oracle"),
                       path_pass(make), cfg.n_workers)
    rows = []
    for a in alphas:
        lhs = accs[f"a{a}"].result(cfg.dt, budget=a * cfg.dt, z_mult=cfg.z_mult)
        rhs_val, _ = sq.quad(lambda u: _m0(u) * np.exp(-a * u), 0, np.inf, limit=200)
        rows.append(IdentityCheck.build(
            f"w-oracle/alpha={a}", lhs, EstimatorResult.exact(rhs_val),
            note="closed form 1/sqrt(2 alpha)"))
    mism = accs["g-mismatch"].result(cfg.dt, z_mult=cfg.z_mult)
    rows.append(IdentityCheck.build(
        "w-oracle/last-exit-equals-u",
        EstimatorResult.exact(mism.mean * mism.n_paths), EstimatorResult.exact(0.0),
        note="construction invariant, zero failures allowed"))

    # matched proposal theta = 1/alpha: the u-part of the weight cancels exactly
    prop2 = WProposal.for_decay(2.0)

    def make2(gen, idx):
        wp = sample_W(prop2, grid, gen)
        le = last_exit_time(wp.path)
        return {"v": (wp.weight * np.exp(-2.0 * le.time), wp.censored)}

    accs2 = run_chunked(max(1000, cfg.n_paths // 10),
                        derive_seed(cfg.master_seed, "w-oracle-matched"),
                        path_pass(make2), cfg.n_workers)
    rows.append(IdentityCheck.build(
        "w-oracle/alpha=2-matched-theta",
        accs2["v"].result(cfg.dt, budget=2 * cfg.dt, z_mult=cfg.z_mult),
        EstimatorResult.exact(0.5), note="theta = 1/alpha, zero-variance in u"))
    return rows


def exp_penal_limit(cfg: RunConfig) -> list[IdentityCheck]:
    """sqrt(pi t / 2) W_x[K_t(V)] -> phi_V(x) at t = 25, within 4 se + 5%."""
    t = 25.0
    n_steps = int(round(t / cfg.dt))
    factor = np.sqrt(np.pi * t / 2.0)
    cases = [("V=d0/x=0", V_D0, 0.0), ("V=d0/x=1", V_D0, 1.0),
             ("V=two-atom/x=0", MeasureSpec.points([(-0.5, 1.0), (0.5, 1.0)]), 0.0)]
    rows = []
    for tag, V, x in cases:
        if not V.has_density and all(loc == 0.0 for loc, _ in V.atoms):
            target = 1.0 / V.total_mass() + abs(x)
        else:
            target = float(atomic_phi_oracle(V.atoms)(x))

        def eval_matrix(X, V=V):
            return {"v": (factor * np.exp(fk_log_weight(V, X, cfg.dt)), None)}

        accs = run_chunked(cfg.n_paths, derive_seed(cfg.master_seed, f"penal-{tag}"),
                           bm_chunk_pass(x, n_steps, cfg.dt, eval_matrix), cfg.n_workers)
        lhs = accs["v"].result(cfg.dt, budget=0.0, z_mult=cfg.z_mult)
        rows.append(IdentityCheck.build(
            f"penal-limit/{tag}", lhs, EstimatorResult.exact(target, budget=0.05 * target),
            note="finite-t limit deficit and local-time bias inside the 5% budget"))
    return rows


def _z_battery(X: np.ndarray, k_t: int):
    """Bounded F_t-measurable test functionals on a path matrix."""
    return (("Z=1", np.ones(X.shape[0])),
            ("Z=sigmoid", _sigmoid(X[:, k_t])),
            ("Z=indicator", (np.abs(X[:, k_t // 2]) < 1.0).astype(float)))


def exp_kernel_identity(cfg: RunConfig) -> list[IdentityCheck]:
    """Identity between the sigma-finite side weighted by the total
    Feynman-Kac functional and the Brownian side weighted by the normalizer.

    The sigma-finite side is computed through the exact finite-horizon
    reduction at U: transported kernel K_U(V) phi_V(X_U).  Importance
    sampling it directly is hopeless: the conditional mean of K(V) decays
    like 1/g, leaving ~12% of the integral beyond any affordable horizon.
    """
    U = 12.0
    kU = int(round(U / cfg.dt))
    Vs = (("V=d0", V_D0), ("V=2d0", V_2D0), ("V=box", V_BOX))
    ts = (1.0, 4.0)
    rows = []
    for x in (0.0, 1.0):
        phis = {tag: _phi_hat(V, cfg) for tag, V in Vs}

        def eval_lhs(X):
            out = {}
            for tag, V in Vs:
                phi_f = phis[tag][0]
                kfull = np.exp(fk_log_weight(V, X, cfg.dt))
                tail = phi_f(X[:, -1])
                for t in ts:
                    for zn, z in _z_battery(X, int(round(t / cfg.dt))):
                        out[f"{tag}/t={t}/{zn}"] = (z * kfull * tail, None)
            return out

        accs_l = run_chunked(cfg.n_paths // 2,
                             derive_seed(cfg.master_seed, f"kernel-identity-lhs-x{x}"),
                             bm_chunk_pass(x, kU, cfg.dt, eval_lhs), cfg.n_workers)
        for t in ts:
            kt = int(round(t / cfg.dt))

            def eval_rhs(X):
                out = {}
                for tag, V in Vs:
                    phi_f = phis[tag][0]
                    kpart = np.exp(fk_log_weight(V, X, cfg.dt))
                    val = phi_f(X[:, -1]) * kpart
                    for zn, z in _z_battery(X, kt):
                        out[f"{tag}/{zn}"] = (z * val, None)
                return out

            accs_r = run_chunked(cfg.n_paths // 2,
                                 derive_seed(cfg.master_seed, f"kernel-identity-rhs-x{x}-t{t}"),
                                 bm_chunk_pass(x, kt, cfg.dt, eval_rhs), cfg.n_workers)
            for tag, V in Vs:
                for zn in ("Z=1", "Z=sigmoid", "Z=indicator"):
                    lhs = accs_l[f"{tag}/t={t}/{zn}"].result(cfg.dt, z_mult=cfg.z_mult)
                    rhs = accs_r[f"{tag}/{zn}"].result(cfg.dt, z_mult=cfg.z_mult)
                    budget = _fk_budget(V, cfg.dt, lhs.mean) + _fk_budget(V, cfg.dt, rhs.mean)
                    rows.append(IdentityCheck.build(
                        f"kernel-identity/{tag}/x={x}/t={t}/{zn}", lhs, rhs, extra_budget=budget,
                        note=f"sigma-finite side via exact reduction at U={U}"
                             f" ({phis[tag][2]} normalizer)"))
    return rows


def exp_markov(cfg: RunConfig) -> list[IdentityCheck]:
    """Markov transport of the total Feynman-Kac weight, fixed time and a
    bounded stopping time; sigma-finite side via the same exact reduction."""
    T = 1.0
    U = 10.0
    kT = int(round(T / cfg.dt))
    kU = int(round(U / cfg.dt))
    Vs = (("V=d0", V_D0), ("V=2d0", V_2D0), ("V=box", V_BOX))
    phis = {tag: _phi_hat(V, cfg) for tag, V in Vs}
    rows = []

    def eval_lhs(X):
        out = {}
        rowsn = np.arange(X.shape[0])
        hit1 = _first_hit_idx(X, 1.0)
        k_tau = np.minimum(np.where(hit1 < 0, kT, hit1), kT)
        for tag, V in Vs:
            phi_f = phis[tag][0]
            log_after_T = fk_log_weight(V, X, cfg.dt) - fk_log_weight(V, X, cfg.dt, upto=kT)
            val = np.exp(log_after_T) * phi_f(X[:, -1])
            for zn, z in _z_battery(X, kT):
                out[f"{tag}/fixed/{zn}"] = (z * val, None)
            # stopping-time variant needs the kernel accrued on (tau, U]
            log_after_tau = np.zeros(X.shape[0])
            for loc, lam in V.atoms:
                v = X - loc
                sgn = np.where(v[:, :-1] >= 0, 1.0, -1.0)
                csum = np.concatenate(
                    [np.zeros((X.shape[0], 1)), np.cumsum(sgn * np.diff(X, axis=1), axis=1)],
                    axis=1)
                l_seg = (np.abs(v[:, -1]) - np.abs(v[rowsn, k_tau])
                         - (csum[:, -1] - csum[rowsn, k_tau]))
                log_after_tau -= lam * l_seg
            if V.has_density:
                dens = V.density(X)
                occ = np.concatenate(
                    [np.zeros((X.shape[0], 1)),
                     np.cumsum(0.5 * (dens[:, 1:] + dens[:, :-1]) * cfg.dt, axis=1)], axis=1)
                log_after_tau -= occ[:, -1] - occ[rowsn, k_tau]
            z_tau = _sigmoid(X[rowsn, k_tau])
            out[f"{tag}/stopping"] = (z_tau * np.exp(log_after_tau) * phi_f(X[:, -1]), None)
            out[f"{tag}/stopping-rhs-aux"] = (z_tau * phi_f(X[rowsn, k_tau]), None)
        return out

    accs_l = run_chunked(cfg.n_paths // 2, derive_seed(cfg.master_seed, "markov-lhs"),
                         bm_chunk_pass(0.0, kU, cfg.dt, eval_lhs), cfg.n_workers)

    def eval_rhs(X):
        out = {}
        for tag, V in Vs:
            phi_f = phis[tag][0]
            val = phi_f(X[:, -1])
            for zn, z in _z_battery(X, kT):
                out[f"{tag}/{zn}"] = (z * val, None)
        return out

    accs_r = run_chunked(cfg.n_paths // 2, derive_seed(cfg.master_seed, "markov-rhs"),
                         bm_chunk_pass(0.0, kT, cfg.dt, eval_rhs), cfg.n_workers)

    for tag, V in Vs:
        for zn in ("Z=1", "Z=sigmoid", "Z=indicator"):
            lhs = accs_l[f"{tag}/fixed/{zn}"].result(cfg.dt, z_mult=cfg.z_mult)
            rhs = accs_r[f"{tag}/{zn}"].result(cfg.dt, z_mult=cfg.z_mult)
            budget = _fk_budget(V, cfg.dt, lhs.mean)
            rows.append(IdentityCheck.build(
                f"markov/{tag}/T={T}/{zn}", lhs, rhs, extra_budget=budget,
                note=f"sigma-finite side via exact reduction at U={U}"))
        lhs_s = accs_l[f"{tag}/stopping"].result(cfg.dt, z_mult=cfg.z_mult)
        rhs_s = accs_l[f"{tag}/stopping-rhs-aux"].result(cfg.dt, z_mult=cfg.z_mult)
        rows.append(IdentityCheck.build(
            f"markov/{tag}/stopping-tau1^T", lhs_s, rhs_s,
            extra_budget=_fk_budget(V, cfg.dt, lhs_s.mean),
            note="tau = first visit to 1, capped at T; common paths"))
    lhs = accs_r["V=d0/Z=1"].result(cfg.dt, z_mult=cfg.z_mult)
    rows.append(IdentityCheck.build(
        "markov/closed-form/W[1+|X_1|]", lhs,
        EstimatorResult.exact(1.0 + np.sqrt(2.0 / np.pi)),
        note="Gaussian mean of the normalizer at T=1"))
    return rows


def exp_tau0(cfg: RunConfig) -> list[IdentityCheck]:
    """Mass of never-hitting-zero paths under the shifted measure equals |x|.

    Body sampled with the truncated heavy proposal; the mass beyond the
    horizon is the classical bridge-reflection integral, added exactly."""
    from .paths import TimeGrid
    grid = TimeGrid(t_max=cfg.t_max, dt=cfg.dt, n=int(round(cfg.t_max / cfg.dt)))
    prop = WProposal(kind="heavy", theta=cfg.theta_heavy)
    xs = (-1.0, -0.5, 0.5, 1.0)

    def make(gen, idx):
        wp = sample_W(prop, grid, gen)
        out = {}
        for x in xs:
            never = hitting_index(wp.path.values + x, 0.0) is None
            out[f"x={x}"] = (wp.weight * float(never), wp.censored)
        return out

    accs = run_chunked(cfg.n_paths // 2, derive_seed(cfg.master_seed, "tau0"),
                       path_pass(make), cfg.n_workers)
    rows = []
    for x in xs:
        tail, _ = sq.quad(
            lambda u: _m0(u) * 0.5 * (1.0 - np.exp(-2.0 * x * x / u)),
            cfg.t_max, np.inf, limit=400)
        body = accs[f"x={x}"].result(cfg.dt, z_mult=cfg.z_mult)
        est = EstimatorResult(mean=body.mean + tail, std_error=body.std_error,
                              n_paths=body.n_paths, censor_rate=body.censor_rate,
                              dt=cfg.dt, z_mult=cfg.z_mult)
        # barrier-shift bias of grid crossing detection + undetected late
        # Bessel crossings (mean ball-exit time bound)
        budget = 0.65 * np.sqrt(cfg.dt) + 0.5 * (x * x / 3.0) * _m0(max(1.0, cfg.t_max - 4 * x * x))
        rows.append(IdentityCheck.build(
            f"tau0/x={x}", est, EstimatorResult.exact(abs(x)), extra_budget=budget,
            note=f"analytic tail beyond horizon = {tail:.6f} (exact quadrature)"))
    rows.append(IdentityCheck.build(
        "tau0/x=0", EstimatorResult.exact(0.0), EstimatorResult.exact(0.0),
        note="paths from 0 hit 0 at time 0; estimand vanishes identically"))
    return rows


def exp_cm_brownian(cfg: RunConfig) -> list[IdentityCheck]:
    """Brownian quasi-invariance under the drift, paired common random
    numbers; the f = 0 control must give a difference of exactly zero."""
    T = 8.0
    n_steps = int(round(T / cfg.dt))
    f = F_UNIT
    k1 = int(round(1.0 / cfg.dt))
    rows = []

    def battery(X):
        idx = _last_exit_idx(X)
        g = idx * cfg.dt
        ltz = local_time_signed(X[:, : k1 + 1])
        return {"F=exp(-g^T)": np.exp(-g),
                "F=sigmoid(X1)": _sigmoid(X[:, k1]),
                "F=exp(-L1)": np.exp(-ltz)}

    for ftag, fi in (("f=0", F_ZERO), ("f=unit", f)):
        h = _grid_h(fi, n_steps, cfg.dt)

        def eval_matrix(X, fi=fi, h=h):
            lhs = battery(X + h)
            ee = exp_density(fi, X, cfg.dt)
            rhs = battery(X)
            out = {}
            for k in lhs:
                out[f"{k}/diff"] = (lhs[k] - rhs[k] * ee, None)
                out[f"{k}/lhs"] = (lhs[k], None)
                out[f"{k}/rhs"] = (rhs[k] * ee, None)
            return out

        accs = run_chunked(cfg.n_paths, derive_seed(cfg.master_seed, f"cm-{ftag}"),
                           bm_chunk_pass(0.0, n_steps, cfg.dt, eval_matrix), cfg.n_workers)
        for k in ("F=exp(-g^T)", "F=sigmoid(X1)", "F=exp(-L1)"):
            d = accs[f"{k}/diff"].result(cfg.dt, z_mult=cfg.z_mult)
            budget = 0.0 if ftag == "f=0" else 0.3 * np.sqrt(cfg.dt) * (k == "F=exp(-L1)")
            rows.append(IdentityCheck.build(
                f"cm-brownian/{ftag}/{k}", d, EstimatorResult.exact(0.0),
                extra_budget=budget,
                note="paired difference" + ("; exact-zero control" if ftag == "f=0" else "")))
    # closed-form oracle: E sigmoid(X_1 + h_1) by Gauss-Hermite
    zs, ws = np.polynomial.hermite.hermgauss(96)
    target = float(np.dot(ws, _sigmoid(np.sqrt(2.0) * zs + 1.0)) / np.sqrt(np.pi))
    accs = run_chunked(cfg.n_paths, derive_seed(cfg.master_seed, "cm-f=unit"),
                       bm_chunk_pass(0.0, n_steps, cfg.dt,
                                     lambda X: {"v": (_sigmoid(X[:, k1] + 1.0), None)}),
                       cfg.n_workers)
    rows.append(IdentityCheck.build(
        "cm-brownian/oracle/sigmoid-shift",
        accs["v"].result(cfg.dt, z_mult=cfg.z_mult), EstimatorResult.exact(target),
        note="Gaussian mean-shift quadrature"))
    return rows


_MAIN_COMBOS = (
    ("f=half/V=d0/G=1", F_HALF, V_D0, "one"),
    ("f=half/V=box/G=sig", F_HALF, V_BOX, "sig"),
    ("f=step3/V=d0/G=sig", F_STEP3, V_D0, "sig"),
    ("f=step3/V=box/G=1", F_STEP3, V_BOX, "one"),
    ("f=signed/V=d0/G=1", F_SIGNED, V_D0, "one"),
    ("f=signed/V=box/G=sig", F_SIGNED, V_BOX, "sig"),
)


def exp_translation_identity(cfg: RunConfig) -> list[IdentityCheck]:
    """Translation identity for the damped Feynman-Kac class, paired common
    random numbers, one weighted pass; plus the truncated-drift form."""
    from .paths import TimeGrid
    n = int(round(cfg.t_max / cfg.dt))
    grid = TimeGrid(t_max=cfg.t_max, dt=cfg.dt, n=n)
    prop = WProposal(kind="heavy", theta=cfg.theta_heavy)
    k1 = int(round(1.0 / cfg.dt))
    hs = {ftag: _grid_h(f, n, cfg.dt) for ftag, f, _, _ in _MAIN_COMBOS}
    trunc_ts = (0.5, 3.0)
    h_trunc = {T: _grid_h(F_HALF, n, cfg.dt, T=T) for T in trunc_ts}

    def gamma_log(V, values):
        gi = last_exit_index(values)
        return -gi * cfg.dt + fk_log_weight(V, values, cfg.dt)

    def make(gen, idx):
        wp = sample_W(prop, grid, gen)
        X = wp.path.values
        w = wp.weight
        out = {}
        ee = {}
        for ftag, f, V, gk in _MAIN_COMBOS:
            if ftag.split("/")[0] not in ee:
                key = ftag.split("/")[0]
                ee[key] = float(exp_density(f, X, cfg.dt))
            Y = X + hs[ftag]
            gl = float(np.exp(gamma_log(V, Y)))
            gr = float(np.exp(gamma_log(V, X)))
            Gl = float(_sigmoid(Y[k1])) if gk == "sig" else 1.0
            Gr = float(_sigmoid(X[k1])) if gk == "sig" else 1.0
            lhs = w * Gl * gl
            rhs = w * Gr * gr * ee[ftag.split("/")[0]]
            out[f"{ftag}/diff"] = (lhs - rhs, wp.censored)
            out[f"{ftag}/lhs"] = (lhs, wp.censored)
        # f = 0 control: same functional on both sides, difference exactly 0
        g0 = float(np.exp(gamma_log(V_D0, X)))
        out["control/diff"] = (w * g0 - w * g0 * 1.0, wp.censored)
        # truncated-drift form, f = half, V = d0, G = 1
        for T in trunc_ts:
            YT = X + h_trunc[T]
            lhs = w * float(np.exp(gamma_log(V_D0, YT)))
            rhs = w * g0 * float(exp_density(F_HALF, X, cfg.dt, t=T))
            out[f"trunc/T={T}/diff"] = (lhs - rhs, wp.censored)
        return out

    n_used = max(2000, cfg.n_paths // 4)
    accs = run_chunked(n_used, derive_seed(cfg.master_seed, "translation-identity"),
                       path_pass(make), cfg.n_workers)
    rows = []
    for ftag, f, V, gk in _MAIN_COMBOS:
        d = accs[f"{ftag}/diff"].result(cfg.dt, z_mult=cfg.z_mult)
        scale = accs[f"{ftag}/lhs"].result(cfg.dt).mean
        budget = (_translation_tail_budget(f, cfg.t_max)
                  + _fk_budget(V, cfg.dt, scale))
        rows.append(IdentityCheck.build(
            f"translation-identity/{ftag}", d, EstimatorResult.exact(0.0),
            extra_budget=budget,
            note="paired difference; horizon tail budget from reflection bound"))
    dc = accs["control/diff"].result(cfg.dt, z_mult=cfg.z_mult)
    rows.append(IdentityCheck.build(
        "translation-identity/control-f=0", dc, EstimatorResult.exact(0.0),
        note="must be exactly zero (pairing machinery)"))
    for T in trunc_ts:
        d = accs[f"trunc/T={T}/diff"].result(cfg.dt, z_mult=cfg.z_mult)
        budget = (_translation_tail_budget(F_HALF, cfg.t_max)
                  + _fk_budget(V_D0, cfg.dt, accs["f=half/V=d0/G=1/lhs"].result(cfg.dt).mean))
        note = "truncated drift inside support" if T < F_HALF.support_end \
            else "T beyond support: equals the full form"
        rows.append(IdentityCheck.build(
            f"translation-identity/truncated/T={T}", d, EstimatorResult.exact(0.0),
            extra_budget=budget, note=note))
    return rows


def exp_exit_density(cfg: RunConfig) -> list[IdentityCheck]:
    """Translated last-exit density against the bridge x Bessel product
    formula, binned over (0, 6], plus the pinned-bridge spot value."""
    from .paths import TimeGrid
    f = F_UNIT
    n = int(round(cfg.t_max / cfg.dt))
    grid = TimeGrid(t_max=cfg.t_max, dt=cfg.dt, n=n)
    prop = WProposal(kind="gamma", theta=cfg.theta, alpha=1.0)
    edges = np.arange(0.0, 6.5, 0.5)
    nb = len(edges) - 1

    def make(gen, idx):
        wp = sample_W(prop, grid, gen)
        X = wp.path.values
        damp = np.exp(-wp.u) * wp.weight
        e = float(exp_density(f, X, cfg.dt)) * damp
        out = {}
        b = int(np.searchsorted(edges, wp.u, side="left")) - 1
        for k in range(nb):
            out[f"bin{k}"] = (e if k == b else 0.0, wp.censored)
        # undrifted control bins: the bare density integrates in closed form
        for k in (0, 4):
            out[f"f0bin{k}"] = (damp if k == b else 0.0, wp.censored)
        return out

    accs = run_chunked(cfg.n_paths // 2, derive_seed(cfg.master_seed, "exit-lhs"),
                       path_pass(make), cfg.n_workers)

    # product side: Simpson in s = sqrt(u) with Monte Carlo factors per node
    def factors(u, seed_tag, n_inner):
        """(mean, se) of Pi^{(u)}[E_u] * R[E(f(.+u))] at one node;
        the two factors draw from independent substreams."""
        ku = max(1, int(round(u / cfg.dt)))
        u_snap = ku * cfg.dt
        seed_n = derive_seed(cfg.master_seed, f"exit-rhs-{seed_tag}")
        gen_pi = substream(seed_n, 0)
        gen_r = substream(seed_n, 1)
        # bridge factor: exact telescoping of the step integrand
        kf = min(int(round(f.support_end / cfg.dt)), ku)
        zb = gen_pi.standard_normal((n_inner, ku)) * np.sqrt(cfg.dt)
        B = np.concatenate([np.zeros((n_inner, 1)), np.cumsum(zb, axis=1)], axis=1)
        B -= (np.arange(ku + 1) * cfg.dt / u_snap) * B[:, -1][:, None]
        B[:, -1] = 0.0
        pib = np.exp((B[:, kf] - B[:, 0]) - 0.5 * f.l2sq_partial(u_snap))
        pi_m, pi_se = pib.mean(), pib.std() / np.sqrt(n_inner)
        r = f.support_end - u_snap
        if r <= 0:
            return pi_m, pi_se
        kr = int(round(r / cfg.dt))
        z3 = gen_r.standard_normal((n_inner, kr, 3)) * np.sqrt(cfg.dt)
        W3 = np.cumsum(z3, axis=1)
        bes = np.sqrt(np.einsum("nij,nij->ni", W3, W3))
        epsv = np.where(gen_r.random(n_inner) < 0.5, 1.0, -1.0)
        rb = np.exp(epsv * bes[:, -1] - 0.5 * r)
        r_m, r_se = rb.mean(), rb.std() / np.sqrt(n_inner)
        return pi_m * r_m, abs(pi_m) * r_se + abs(r_m) * pi_se

    n_inner = max(500, cfg.n_paths // 40)
    rows = []
    for k in range(nb):
        lo, hi = edges[k], edges[k + 1]
        # uniform Simpson nodes in s = sqrt(u); factors() snaps u=0 to dt,
        # where the pinned bridge factor is exp(-dt/2) ~ 1
        s_nodes = np.linspace(np.sqrt(lo), np.sqrt(hi), 5)
        vals, ses = [], []
        for j, s in enumerate(s_nodes):
            m, se = factors(s * s, f"{k}-{j}", n_inner)
            vals.append(np.sqrt(2.0 / np.pi) * np.exp(-s * s) * m)
            ses.append(np.sqrt(2.0 / np.pi) * np.exp(-s * s) * se)
        # Simpson over s on 5 nodes (first bin: lower node nudged off 0)
        ww = (s_nodes[-1] - s_nodes[0]) / 12.0 * np.array([1, 4, 2, 4, 1])
        rhs_val = float(np.dot(ww, vals))
        rhs_se = float(np.dot(ww, ses))
        rhs = EstimatorResult(mean=rhs_val, std_error=rhs_se, n_paths=5 * n_inner,
                              dt=cfg.dt, z_mult=cfg.z_mult,
                              discretization_budget=0.02 * rhs_val)
        lhs = accs[f"bin{k}"].result(cfg.dt, budget=cfg.dt * lhs_budget_scale(lo),
                                     z_mult=cfg.z_mult)
        rows.append(IdentityCheck.build(
            f"exit-density/bin({lo},{hi}]", lhs, rhs,
            note="translated-law bin mass, drift-density weighted form"))
    # pinned-bridge spot value at u = 1: every draw equals exp(-1/2) exactly
    gen = substream(derive_seed(cfg.master_seed, "exit-spot"), 0)
    ku = int(round(1.0 / cfg.dt))
    zb = gen.standard_normal((2000, ku)) * np.sqrt(cfg.dt)
    B = np.concatenate([np.zeros((2000, 1)), np.cumsum(zb, axis=1)], axis=1)
    B -= (np.arange(ku + 1) * cfg.dt / 1.0) * B[:, -1][:, None]
    B[:, -1] = 0.0
    spot = np.exp((B[:, -1] - B[:, 0]) - 0.5)
    lhs = EstimatorResult(mean=float(spot.mean()),
                          std_error=float(spot.std() / np.sqrt(len(spot))),
                          n_paths=len(spot), dt=cfg.dt, z_mult=cfg.z_mult)
    rows.append(IdentityCheck.build(
        "exit-density/pinned-spot-u=1", lhs, EstimatorResult.exact(np.exp(-0.5)),
        note="bridge pins the integral: zero variance"))
    for k in (0, 4):
        lo, hi = edges[k], edges[k + 1]
        want, _ = sq.quad(lambda u: _m0(u) * np.exp(-u), lo, hi, limit=200)
        got = accs[f"f0bin{k}"].result(cfg.dt, budget=cfg.dt, z_mult=cfg.z_mult)
        rows.append(IdentityCheck.build(
            f"exit-density/f=0-bin({lo},{hi}]", got, EstimatorResult.exact(want),
            note="undrifted law: incomplete-Gamma quadrature"))
    return rows


def lhs_budget_scale(lo: float) -> float:
    # u-rounding affects bin membership only at the edges; one-step allowance
    return 1.0 if lo > 0 else 2.0


def exp_convex_moments(cfg: RunConfig) -> list[IdentityCheck]:
    """Convex-moment domination of centered Bessel Wiener integrals by the
    Gaussian case, one-sided, plus a must-fail uncentered control."""
    rows = []
    fs = (("f=unit", F_UNIT), ("f=signed", F_SIGNED))
    for ftag, f in fs:
        n_steps = int(round(f.support_end / cfg.dt))
        sig = np.sqrt(f.l2_sq)
        targets = {"psi=x^2": sig * sig,
                   "psi=|x|": np.sqrt(2.0 / np.pi) * sig,
                   "psi=(e^|x|-1)^2": abs_gauss_exp_moment(2 * sig)
                                      - 2 * abs_gauss_exp_moment(sig) + 1.0}
        for a in (0.0, 1.0, 3.0):
            center = f_phi_integral(f, a)

            def chunk_fn(seed, start, size, a=a, f=f, center=center, n_steps=n_steps):
                X = np.empty((size, n_steps + 1))
                for i in range(size):
                    g = substream(seed, start + i)
                    w3 = g.standard_normal((n_steps, 3))
                    np.cumsum(w3, axis=0, out=w3)
                    w3 *= np.sqrt(cfg.dt)
                    w3[:, 0] += a
                    X[i, 0] = a
                    X[i, 1:] = np.sqrt(np.einsum("ij,ij->i", w3, w3))
                wi = wiener_integral(f, X, cfg.dt) - center
                return {"psi=x^2": (wi * wi, None),
                        "psi=|x|": (np.abs(wi), None),
                        "psi=(e^|x|-1)^2": ((np.exp(np.abs(wi)) - 1.0) ** 2, None),
                        "uncentered": ((wi + center) ** 2, None)}

            accs = run_chunked(cfg.n_paths // 2,
                               derive_seed(cfg.master_seed, f"convex-moments-{ftag}-a{a}"),
                               chunk_fn, cfg.n_workers)
            for pn, tv in targets.items():
                lhs = accs[pn].result(cfg.dt, z_mult=Z_ONE_SIDED)
                rows.append(IdentityCheck.build(
                    f"convex-moments/{ftag}/a={a}/{pn}", lhs, EstimatorResult.exact(tv),
                    mode="upper", note="one-sided via 3 se"))
            if a == 0.0 and ftag == "f=unit":
                lhs = accs["uncentered"].result(cfg.dt, z_mult=Z_ONE_SIDED)
                raw = IdentityCheck.build("raw", lhs,
                                          EstimatorResult.exact(targets["psi=x^2"]),
                                          mode="upper")
                rows.append(IdentityCheck(
                    name=f"convex-moments/{ftag}/a={a}/negative-control",
                    lhs=lhs, rhs=EstimatorResult.exact(targets["psi=x^2"]),
                    verdict="PASS" if raw.verdict == "FAIL" else "FAIL",
                    tolerance=raw.tolerance, mode="upper",
                    note="uncentered integral must violate the bound"))
    return rows


def exp_nondeg_bound(cfg: RunConfig) -> list[IdentityCheck]:
    """Weighted mass of K(V) E(f) against the normalizer bound, one-sided.
    Horizon truncation only lowers the nonnegative left side."""
    from .paths import TimeGrid
    n = int(round(cfg.t_max / cfg.dt))
    grid = TimeGrid(t_max=cfg.t_max, dt=cfg.dt, n=n)
    prop = WProposal(kind="heavy", theta=cfg.theta_heavy)
    combos = (("f=0/V=d0", F_ZERO, V_D0), ("f=half/V=d0", F_HALF, V_D0),
              ("f=half/V=2d0", F_HALF, V_2D0), ("f=step3/V=box", F_STEP3, V_BOX))

    def make(gen, idx):
        wp = sample_W(prop, grid, gen)
        X = wp.path.values
        out = {}
        for tag, f, V in combos:
            kv = np.exp(fk_log_weight(V, X, cfg.dt))
            out[tag] = (wp.weight * kv * float(exp_density(f, X, cfg.dt)), wp.censored)
        return out

    accs = run_chunked(max(2000, cfg.n_paths // 4),
                       derive_seed(cfg.master_seed, "nondeg"),
                       path_pass(make), cfg.n_workers)
    rows = []
    for tag, f, V in combos:
        phi_f, c_v, src = _phi_hat(V, cfg)
        bound = float(phi_f(0.0)) * np.exp(f.l1 / c_v)
        lhs = accs[tag].result(cfg.dt, z_mult=Z_ONE_SIDED)
        rows.append(IdentityCheck.build(
            f"nondeg-bound/{tag}", lhs, EstimatorResult.exact(bound), mode="upper",
            note=f"C_V={c_v:.4f} ({src}); truncation lowers the left side"))
    lhs = accs["f=0/V=d0"].result(cfg.dt, z_mult=Z_ONE_SIDED)
    raw = IdentityCheck.build("raw", lhs, EstimatorResult.exact(0.4), mode="upper")
    rows.append(IdentityCheck(
        name="nondeg-bound/negative-control", lhs=lhs,
        rhs=EstimatorResult.exact(0.4),
        verdict="PASS" if raw.verdict == "FAIL" else "FAIL",
        tolerance=raw.tolerance, mode="upper",
        note="bound shrunk to 0.4 must be violated"))
    return rows


def exp_tail_vanishing(cfg: RunConfig) -> list[IdentityCheck]:
    """Damped drift-density mass on {g > t} vanishes under exp(-t)/sqrt(2)."""
    from .paths import TimeGrid
    n = int(round(cfg.t_max / cfg.dt))
    grid = TimeGrid(t_max=cfg.t_max, dt=cfg.dt, n=n)
    prop = WProposal(kind="gamma", theta=cfg.theta, alpha=1.0)
    ts = (0.0, 1.0, 2.0, 5.0)

    def make(gen, idx):
        wp = sample_W(prop, grid, gen)
        X = wp.path.values
        out = {}
        for ftag, f in (("f=0", F_ZERO), ("f=unit", F_UNIT)):
            for t in ts:
                v = 0.0
                if wp.u > t:
                    v = wp.weight * float(exp_density(f, X, cfg.dt, t=t)) * np.exp(-wp.u)
                out[f"{ftag}/t={t}"] = (v, wp.censored)
        return out

    accs = run_chunked(cfg.n_paths // 2, derive_seed(cfg.master_seed, "tail-vanishing"),
                       path_pass(make), cfg.n_workers)
    rows = []
    for ftag in ("f=0", "f=unit"):
        for t in ts:
            lhs = accs[f"{ftag}/t={t}"].result(cfg.dt, budget=cfg.dt, z_mult=Z_ONE_SIDED)
            bound = np.exp(-t) / np.sqrt(2.0)
            rows.append(IdentityCheck.build(
                f"tail-vanishing/{ftag}/t={t}", lhs, EstimatorResult.exact(bound),
                mode="upper",
                note="edge equality at t=0, f=0" if (t == 0.0 and ftag == "f=0") else ""))
    lhs = accs["f=0/t=0.0"].result(cfg.dt, budget=cfg.dt, z_mult=Z_ONE_SIDED)
    shrunk = 0.25 / np.sqrt(2.0)
    raw = IdentityCheck.build("raw", lhs, EstimatorResult.exact(shrunk), mode="upper")
    rows.append(IdentityCheck(
        name="tail-vanishing/negative-control", lhs=lhs,
        rhs=EstimatorResult.exact(shrunk),
        verdict="PASS" if raw.verdict == "FAIL" else "FAIL",
        tolerance=raw.tolerance, mode="upper",
        note="bound shrunk by 4 must be violated"))
    return rows


def exp_domination(cfg: RunConfig) -> list[IdentityCheck]:
    """Pathwise domination of the plateau-density kernel by the box-density
    kernel under truncated drifts; zero violations allowed, and a shrunk
    plateau must violate."""
    from .paths import TimeGrid
    n = int(round(cfg.t_max / cfg.dt))
    grid = TimeGrid(t_max=cfg.t_max, dt=cfg.dt, n=n)
    prop = WProposal(kind="gamma", theta=cfg.theta, alpha=1.0)
    v0, v1 = MeasureSpec.bump(), V_BOX
    v0_bad = MeasureSpec.bump(inner=0.5, outer=0.6)
    T = 1.0                      # the signed drift has |h|-tail 0.6 <= 1 past T
    t_list = (1.0, 1.5, 2.0, cfg.t_max)
    n_used = min(10_000, cfg.n_paths)
    h_T = {}
    for ftag, f in (("f=0", F_ZERO), ("f=signed", F_SIGNED)):
        h_T[ftag] = (_grid_h(f, n, cfg.dt, T=T),
                     np.stack([_grid_h(f, n, cfg.dt, T=t) for t in t_list]))

    def make(gen, idx):
        wp = sample_W(prop, grid, gen)
        X = wp.path.values
        out = {}
        for ftag in ("f=0", "f=signed"):
            hT, hts = h_T[ftag]
            occ1 = occupation_integral(X + hT, cfg.dt, v1)
            occ0 = occupation_integral(X[None, :] + hts, cfg.dt, v0)
            occ0b = occupation_integral(X[None, :] + hts, cfg.dt, v0_bad)
            out[f"{ftag}/violation"] = (float(np.min(occ0 - occ1) < -1e-10), False)
            out[f"{ftag}/control-violation"] = (float(np.min(occ0b - occ1) < -1e-10), False)
        return out

    accs = run_chunked(n_used, derive_seed(cfg.master_seed, "domination"),
                       path_pass(make), cfg.n_workers)
    rows = []
    for ftag in ("f=0", "f=signed"):
        viol = accs[f"{ftag}/violation"]
        count = EstimatorResult(mean=viol.s, std_error=0.0, n_paths=viol.n, dt=cfg.dt)
        rows.append(IdentityCheck.build(
            f"domination/{ftag}", count, EstimatorResult.exact(0.0),
            note=f"pathwise over {viol.n} draws, t in {t_list}, tail condition at T={T}"))
        bad = accs[f"{ftag}/control-violation"]
        rows.append(IdentityCheck(
            name=f"domination/{ftag}/negative-control",
            lhs=EstimatorResult(mean=bad.s, std_error=0.0, n_paths=bad.n, dt=cfg.dt),
            rhs=EstimatorResult.exact(0.0),
            verdict="PASS" if bad.s > 0 else "FAIL", tolerance=0.0,
            note="shrunk plateau must produce violations"))
    return rows


def exp_tail_transform(cfg: RunConfig) -> list[IdentityCheck]:
    """Deterministic quadrature facts: the tail-transform integral bound,
    its vanishing liminf, and monotonicity of the mean-inverse curves."""
    rows = []
    for ftag, f in (("f=unit", F_UNIT), ("f=half", F_HALF), ("f=step3", F_STEP3)):
        for a in (0.25, 1.0, 4.0):
            ts = np.linspace(0.0, a, 4001)
            vals = np.array([f.f_tilde(t) for t in ts])
            lhs = float(np.trapezoid(vals, ts))
            bound = 2.0 * np.sqrt(a) * f.l1
            rows.append(IdentityCheck.build(
                f"tail-transform/{ftag}/a={a}", EstimatorResult.exact(lhs),
                EstimatorResult.exact(bound, budget=1e-4 * max(1.0, bound)),
                mode="upper"))
    ts = np.linspace(0.0, 1.0, 4001)
    got = float(np.trapezoid([F_UNIT.f_tilde(t) for t in ts], ts))
    rows.append(IdentityCheck.build(
        "tail-transform/exact-4/3", EstimatorResult.exact(got),
        EstimatorResult.exact(4.0 / 3.0, budget=1e-4)))
    tgrid = np.geomspace(F_UNIT.support_end + 1e-9, 100.0, 200)
    mn = float(min(F_UNIT.f_tilde(t) for t in tgrid))
    rows.append(IdentityCheck.build(
        "tail-transform/liminf-zero", EstimatorResult.exact(mn), EstimatorResult.exact(0.0)))
    tt = np.geomspace(1e-3, 50.0, 200)
    worst = max(float(np.max(phi_a(a, tt) - phi_a(0.0, tt))) for a in (0.1, 1.0, 3.0))
    rows.append(IdentityCheck.build(
        "tail-transform/phi-monotone", EstimatorResult.exact(max(worst, 0.0)),
        EstimatorResult.exact(0.0, budget=1e-12), mode="upper"))
    return rows


def exp_dichotomy(cfg: RunConfig) -> list[IdentityCheck]:
    """Divergence on fixed-time events: the lower bound grows like 1/lambda."""
    t = 1.0
    n_steps = int(round(t / cfg.dt))
    lams = (1.0, 0.1, 0.01, 0.001)

    def eval_matrix(X):
        lt = local_time_signed(X)
        a_ind = (np.abs(X[:, -1]) < 1.0).astype(float)
        empty = (np.abs(X[:, -1]) < 0.0).astype(float)     # impossible event
        out = {"W(A)": (a_ind, None), "q99-aux": (lt, None)}
        for lam in lams:
            damp = np.exp(-lam * np.maximum(lt, 0.0))
            out[f"A/lam={lam}"] = (a_ind * damp, None)
            out[f"full/lam={lam}"] = (damp, None)
            out[f"empty/lam={lam}"] = (empty * damp, None)
        return out

    accs = run_chunked(cfg.n_paths, derive_seed(cfg.master_seed, "dichotomy"),
                       bm_chunk_pass(0.0, n_steps, cfg.dt, eval_matrix), cfg.n_workers)
    rows = []
    wa = accs["W(A)"].result(cfg.dt, z_mult=cfg.z_mult)
    ests = {}
    for lam in lams:
        for tag in ("A", "full"):
            r = accs[f"{tag}/lam={lam}"].result(cfg.dt, z_mult=cfg.z_mult)
            ests[(tag, lam)] = (r.mean / lam, r.std_error / lam)
    diffs = [ests[("A", lams[i + 1])][0] - ests[("A", lams[i])][0]
             for i in range(len(lams) - 1)]
    seq = ", ".join(f"{ests[('A', lam)][0]:.1f}" for lam in lams)
    rows.append(IdentityCheck.build(
        "dichotomy/monotone-growth", EstimatorResult.exact(-min(diffs)),
        EstimatorResult.exact(0.0), mode="upper",
        note=f"estimates grow as lambda shrinks: {seq}"))
    for lam in lams:
        if lam <= 0.01:
            m, se = ests[("full", lam)]
            rows.append(IdentityCheck.build(
                f"dichotomy/full-space/lam={lam}",
                EstimatorResult.exact(0.9 / lam),
                EstimatorResult(mean=m, std_error=se, n_paths=wa.n_paths,
                                dt=cfg.dt, z_mult=cfg.z_mult),
                mode="upper", note="grows at least like 0.9 / lambda"))
        # proof-shaped lower bound with the empirical damping factor
        m, se = ests[("A", lam)]
        lowm = (wa.mean - 4.0 * wa.std_error) / lam * np.exp(-lam * 4.0)
        rows.append(IdentityCheck.build(
            f"dichotomy/lower/lam={lam}", EstimatorResult.exact(lowm),
            EstimatorResult(mean=m, std_error=se, n_paths=wa.n_paths,
                            dt=cfg.dt, z_mult=cfg.z_mult),
            mode="upper", note="(W(A) - 4 se)/lambda with damping allowance"))
    empty_worst = max(accs[f"empty/lam={lam}"].result(cfg.dt).mean for lam in lams)
    rows.append(IdentityCheck.build(
        "dichotomy/empty-event", EstimatorResult.exact(empty_worst),
        EstimatorResult.exact(0.0), note="null event stays null at every lambda"))
    return rows


def envelope_rows(cfg: RunConfig, f: Integrand = F_HALF) -> list[IdentityCheck]:
    """Gaussian envelope domination of the shifted drift densities under the
    signed Bessel laws (a functionals-module invariant, not a CLI battery
    member), plus the quadrature-vs-Monte-Carlo consistency row."""
    rows = []
    for t in (0.0, 0.5, 1.0, 5.0):
        ft = f.shifted(t)
        env = gaussian_envelope(f, t)
        for a in (0.0, 1.0, -1.0):
            if ft.is_zero:
                lhs = EstimatorResult.exact(0.0)
            else:
                n_steps = int(np.ceil(ft.support_end / cfg.dt - 1e-9))

                def chunk_fn(seed, start, size, a=a, ft=ft, n_steps=n_steps):
                    X = np.empty((size, n_steps + 1))
                    aa = abs(a)
                    for i in range(size):
                        g = substream(seed, start + i)
                        w3 = g.standard_normal((n_steps, 3))
                        np.cumsum(w3, axis=0, out=w3)
                        w3 *= np.sqrt(cfg.dt)
                        w3[:, 0] += aa
                        X[i, 0] = aa
                        X[i, 1:] = np.sqrt(np.einsum("ij,ij->i", w3, w3))
                    if a < 0:
                        X = -X
                    ee = exp_density(ft, X, cfg.dt)
                    return {"v": ((ee - 1.0) ** 2, None)}

                accs = run_chunked(cfg.n_paths // 4,
                                   derive_seed(cfg.master_seed, f"env-{t}-{a}"),
                                   chunk_fn, cfg.n_workers)
                lhs = accs["v"].result(cfg.dt, z_mult=Z_ONE_SIDED)
            rows.append(IdentityCheck.build(
                f"envelope/t={t}/a={a}", lhs, EstimatorResult.exact(env), mode="upper"))
            if t == 0.0 and a == 0.0:
                shrunk = 0.02 * env
                raw = IdentityCheck.build("raw", lhs, EstimatorResult.exact(shrunk),
                                          mode="upper")
                rows.append(IdentityCheck(
                    name="envelope/negative-control", lhs=lhs,
                    rhs=EstimatorResult.exact(shrunk),
                    verdict="PASS" if raw.verdict == "FAIL" else "FAIL",
                    tolerance=raw.tolerance, mode="upper",
                    note="envelope shrunk 50x must be violated"))
    # quadrature vs brute-force Monte Carlo of the same Gaussian expectation
    gen = substream(derive_seed(cfg.master_seed, "env-mc"), 0)
    z = np.abs(gen.standard_normal(1_000_000))
    sig = f.tail_l2(0.0)
    b = np.sqrt(2.0 / np.pi) * f.f_tilde(0.0) + 0.5 * sig * sig
    mc = float(np.mean((np.exp(sig * z + b) - 1.0) ** 2))
    quad = gaussian_envelope(f, 0.0)
    rows.append(IdentityCheck.build(
        "envelope/quadrature-vs-mc", EstimatorResult.exact(quad),
        EstimatorResult.exact(mc, budget=0.01 * max(mc, 1.0)),
        note="1% agreement"))
    return rows


REGISTRY = {
    "phi-atom": exp_phi_atom,
    "w-oracle": exp_w_oracle,
    "penal-limit": exp_penal_limit,
    "kernel-identity": exp_kernel_identity,
    "markov": exp_markov,
    "tau0": exp_tau0,
    "cm-brownian": exp_cm_brownian,
    "translation-identity": exp_translation_identity,
    "exit-density": exp_exit_density,
    "convex-moments": exp_convex_moments,
    "nondeg-bound": exp_nondeg_bound,
    "tail-vanishing": exp_tail_vanishing,
    "domination": exp_domination,
    "tail-transform": exp_tail_transform,
    "dichotomy": exp_dichotomy,
}

# the standard battery: the 14 named verification experiments
BATTERY = ["w-oracle", "penal-limit", "kernel-identity", "markov", "tau0", "cm-brownian",
           "translation-identity", "exit-density", "convex-moments", "nondeg-bound",
           "tail-vanishing", "domination", "tail-transform", "dichotomy"]


def run_experiment(name: str, cfg: RunConfig) -> list[IdentityCheck]:
    if name not in REGISTRY:
        raise KeyError(f"unknown experiment {name!r}; known: {sorted(REGISTRY)}")
    return REGISTRY[name](cfg)
