"""Sturm-Liouville solver for the penalisation normalizer.

Solves phi'' = 2 phi V(dx) in the distributional sense on [-L, L] with slope
boundary conditions phi'(-L) = -1, phi'(+L) = +1, by superposition of two
fundamental solutions integrated left to right (Heun scheme between atoms,
derivative jumps 2 lambda_k phi(x_k) applied exactly at atom nodes) and a
2x2 linear solve for the combination.

Truncation to [-L, L] is exact, not approximate, once L exceeds the support
of V: outside the support phi'' = 0, so the slopes are already constant.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .functionals import fk_log_weight
from .integrands import MeasureSpec
from .paths import SamplePath

__all__ = ["PhiSolution", "solve_phi", "scale_gamma", "martingale_density",
           "atomic_phi_oracle"]


class SolverError(RuntimeError):
    pass


@dataclass(frozen=True)
class PhiSolution:
    """Tabulated solution on [-L, L]: values, left derivatives, scale function."""
    xs: np.ndarray
    phi: np.ndarray
    dphi: np.ndarray            # left one-sided derivative at each node
    jumps: tuple                # ((node_index, 2*lambda*phi jump), ...)
    C_V: float                  # inf phi, attained on the grid
    gamma_table: np.ndarray     # gamma(x) = int_0^x phi^-2, tabulated on xs
    V: MeasureSpec

    @property
    def L(self) -> float:
        return float(self.xs[-1])

    @property
    def dx(self) -> float:
        return float(self.xs[1] - self.xs[0])

    def phi_at(self, y) -> np.ndarray:
        out = np.interp(y, self.xs, self.phi)
        # exact linear continuation phi ~ C + |y| beyond the solved box
        y = np.asarray(y, dtype=float)
        hi = y > self.xs[-1]
        lo = y < self.xs[0]
        if np.any(hi):
            out = np.where(hi, self.phi[-1] + (y - self.xs[-1]), out)
        if np.any(lo):
            out = np.where(lo, self.phi[0] + (self.xs[0] - y), out)
        return out if out.ndim else float(out)

    def dphi_at(self, y) -> np.ndarray:
        out = np.interp(y, self.xs, self.dphi)
        y = np.asarray(y, dtype=float)
        out = np.where(y > self.xs[-1], 1.0, out)
        out = np.where(y < self.xs[0], -1.0, out)
        return out if out.ndim else float(out)

    def drift_at(self, y) -> np.ndarray:
        """phi'/phi, the diffusion drift of the penalised process."""
        return self.dphi_at(y) / self.phi_at(y)


def solve_phi(V: MeasureSpec, L: float = 50.0, dx: float = 1e-3) -> PhiSolution:
    if V.support_radius() >= L / 2:
        raise SolverError("support of V must lie inside (-L/2, L/2)")
    if V.total_mass() <= 0:
        raise SolverError("V = 0 admits no solution with the slope conditions")
    m = int(round(2 * L / dx))
    xs = -L + np.arange(m + 1) * dx
    dens = V.density(xs) if V.has_density else np.zeros(m + 1)
    g = 2.0 * dens                                    # phi'' = g phi between atoms

    jump_at = np.zeros(m + 1)                         # derivative jump factor 2*lambda
    for loc, lam in V.atoms:
        k = int(round((loc + L) / dx))
        jump_at[k] += 2.0 * lam

    def integrate(y0: float, p0: float):
        y = np.empty(m + 1)
        p = np.empty(m + 1)                           # left derivative at node
        y[0], p[0] = y0, p0
        pr = p0 + jump_at[0] * y0
        yc = y0
        for i in range(m):
            ye = yc + dx * pr                         # Heun predictor
            pe = pr + dx * g[i] * yc
            y[i + 1] = yc + 0.5 * dx * (pr + pe)
            p[i + 1] = pr + 0.5 * dx * (g[i] * yc + g[i + 1] * ye)
            yc = y[i + 1]
            pr = p[i + 1] + jump_at[i + 1] * yc       # atom jump, applied exactly
        return y, p

    y1, p1 = integrate(1.0, 0.0)
    y2, p2 = integrate(0.0, 1.0)
    A = np.array([[0.0, 1.0], [p1[-1] + jump_at[-1] * y1[-1], p2[-1] + jump_at[-1] * y2[-1]]])
    # no atom sits at +L (support check), so the jump terms at -L/+L vanish
    b = np.array([-1.0, 1.0])
    det = A[0, 0] * A[1, 1] - A[0, 1] * A[1, 0]
    if abs(det) < 1e-12 * max(1.0, abs(A[1, 0]), abs(A[1, 1])):
        raise SolverError("singular boundary system (is V admissible?)")
    a = np.linalg.solve(A, b)
    phi = a[0] * y1 + a[1] * y2
    dphi = a[0] * p1 + a[1] * p2

    if np.any(phi <= 0):
        raise SolverError("solver produced a nonpositive phi")
    inv2 = 1.0 / (phi * phi)
    cum = np.concatenate([[0.0], np.cumsum(0.5 * (inv2[1:] + inv2[:-1]) * dx)])
    k0 = int(round(L / dx))
    gamma = cum - cum[k0]

    jumps = tuple((int(k), float(jump_at[k] * phi[k])) for k in np.nonzero(jump_at)[0])
    return PhiSolution(xs=xs, phi=phi, dphi=dphi, jumps=jumps,
                       C_V=float(phi.min()), gamma_table=gamma, V=V)


def scale_gamma(sol: PhiSolution, x) -> np.ndarray:
    """gamma_V(x) = int_0^x phi^-2, by trapezoid on the solution grid."""
    out = np.interp(x, sol.xs, sol.gamma_table)
    return out if np.ndim(x) else float(out)


def martingale_density(sol: PhiSolution, path: SamplePath, t: float) -> float:
    """M_t = phi(X_t)/phi(X_0) * K_t(V; X)."""
    k = path.grid.index(t)
    kt = np.exp(fk_log_weight(sol.V, path.values, path.dt, upto=k))
    return float(sol.phi_at(path.values[k]) / sol.phi_at(path.values[0]) * kt)


def atomic_phi_oracle(atoms) -> "AtomicPhi":
    """Independent closed-form construction for purely atomic V.

    Between atoms phi'' = 0, so phi is piecewise linear with slope -1 left of
    the first atom and +1 right of the last; each atom bends the slope by
    2 lambda phi.  Assembling those constraints gives a small linear system
    for the atom values, solved directly - no ODE stepping involved.
    """
    atoms = sorted((float(x), float(l)) for x, l in atoms)
    xs = np.array([x for x, _ in atoms])
    lams = np.array([l for _, l in atoms])
    K = len(atoms)
    # unknowns phi_k at atoms; slopes s_k = -1 + sum_{j<=k} 2 lam_j phi_j
    A = np.zeros((K, K))
    b = np.zeros(K)
    for k in range(K - 1):
        # phi_{k+1} - phi_k = (x_{k+1} - x_k) * s_k
        gap = xs[k + 1] - xs[k]
        A[k, k + 1] += 1.0
        A[k, k] -= 1.0
        A[k, : k + 1] -= gap * 2.0 * lams[: k + 1]
        b[k] = -gap
    A[K - 1, :] = 2.0 * lams
    b[K - 1] = 2.0
    vals = np.linalg.solve(A, b)
    if np.any(vals <= 0):
        raise SolverError("oracle produced nonpositive atom values")
    return AtomicPhi(xs=xs, lams=lams, vals=vals)


@dataclass(frozen=True)
class AtomicPhi:
    xs: np.ndarray
    lams: np.ndarray
    vals: np.ndarray

    @property
    def C_V(self) -> float:
        return float(self.vals.min())

    def __call__(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        slopes = -1.0 + np.concatenate([[0.0], np.cumsum(2.0 * self.lams * self.vals)])
        # piecewise-linear evaluation from the nearest atom on the left
        idx = np.searchsorted(self.xs, y, side="right")
        base = np.where(idx > 0, self.vals[np.clip(idx - 1, 0, None)], self.vals[0])
        anchor = np.where(idx > 0, self.xs[np.clip(idx - 1, 0, None)], self.xs[0])
        out = base + slopes[idx] * (y - anchor)
        return out if out.ndim else float(out)
