"""Exact-in-law path samplers and the importance-weighted sampler for the
sigma-finite bridge/Bessel measure.

Reproducibility contract: one Philox substream per path index, keyed by
(master_seed, stream_index).  Identical (master_seed, stream_index, config)
reproduce a path bit-for-bit regardless of batching or thread count.  Inside
one sigma-finite draw the consumption order is fixed: bridge length, bridge
normals, global sign, Bessel normals.

Two proposals are available for the bridge-length integral du / sqrt(2 pi u):

* ``gamma(theta)`` - Gamma(1/2, theta); weight sqrt(theta/2) exp(u/theta).
  Finite variance for functionals dominated by C exp(-alpha g) with
  alpha > 1/(2 theta); the caller declares alpha and the pairing is checked
  at configuration time.
* ``heavy(theta)`` - the square of a half-Cauchy of scale sqrt(theta),
  truncated to (0, t_max]; weight F(t_max) sqrt(pi/2) (theta+u)/sqrt(theta).
  Polynomially growing weights, for bounded functionals whose conditional
  mean decays only polynomially in g.  The estimator then targets the
  restriction of the measure to {g <= t_max}; the caller owns the tail
  budget for what lies beyond.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import special

from .paths import ConfigurationError, SamplePath, TimeGrid, WeightedPath
from .sturm import PhiSolution

__all__ = [
    "RngStream", "substream", "WProposal",
    "sample_bm", "sample_bridge", "sample_bessel3", "sample_symmetrized_bessel",
    "sample_W", "sample_Wx", "sample_WV", "DiffusionDraw",
    "bm_matrix",
]

GAMMA_TAIL_LIMIT = 1e-6


def substream(master_seed: int, stream_index: int) -> np.random.Generator:
    """Philox generator keyed by (master_seed, stream_index)."""
    key = np.array([master_seed, stream_index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


@dataclass(frozen=True)
class RngStream:
    master_seed: int
    stream_index: int = 0

    def generator(self) -> np.random.Generator:
        return substream(self.master_seed, self.stream_index)

    def child(self, index: int) -> "RngStream":
        return RngStream(self.master_seed, index)


# -- elementary samplers ------------------------------------------------------


def bm_matrix(x0: float, n_steps: int, dt: float, gens) -> np.ndarray:
    """(len(gens), n_steps+1) Brownian paths, one substream per row."""
    out = np.empty((len(gens), n_steps + 1))
    out[:, 0] = x0
    sq = np.sqrt(dt)
    for i, g in enumerate(gens):
        np.cumsum(g.standard_normal(n_steps), out=out[i, 1:])
    out[:, 1:] *= sq
    out[:, 1:] += x0
    return out


def sample_bm(x0: float, grid: TimeGrid, rng: np.random.Generator) -> SamplePath:
    """Brownian motion from x0: independent N(0, dt) increments."""
    v = np.empty(grid.n + 1)
    v[0] = 0.0
    np.cumsum(rng.standard_normal(grid.n), out=v[1:])
    v *= np.sqrt(grid.dt)
    v += x0
    v[0] = x0
    return SamplePath(grid=grid, values=v)


def _bridge_values(ku: int, dt: float, rng: np.random.Generator) -> np.ndarray:
    b = np.empty(ku + 1)
    b[0] = 0.0
    np.cumsum(rng.standard_normal(ku), out=b[1:])
    b *= np.sqrt(dt)
    u = ku * dt
    b -= (np.arange(ku + 1) * dt / u) * b[-1]
    b[-1] = 0.0                      # endpoint is a literal zero
    return b


def sample_bridge(u: float, dt: float, rng: np.random.Generator) -> SamplePath:
    """Brownian bridge 0 -> 0 of length u via B_s - (s/u) B_u."""
    if u <= 0:
        raise ValueError("bridge length must be positive")
    ku = int(round(u / dt))
    if ku < 1 or abs(ku * dt - u) > 1e-9 * max(1.0, u):
        raise ValueError("u must be a positive grid multiple of dt")
    grid = TimeGrid(t_max=ku * dt, dt=dt, n=ku)
    return SamplePath(grid=grid, values=_bridge_values(ku, dt, rng))


def _bessel3_values(a: float, n: int, dt: float, rng: np.random.Generator) -> np.ndarray:
    w = rng.standard_normal((n, 3))
    np.cumsum(w, axis=0, out=w)
    w *= np.sqrt(dt)
    w[:, 0] += a
    out = np.empty(n + 1)
    out[0] = a
    np.sqrt(np.einsum("ij,ij->i", w, w), out=out[1:])
    return out


def sample_bessel3(a: float, grid: TimeGrid, rng: np.random.Generator) -> SamplePath:
    """3-d Bessel process from a >= 0, as the norm of 3-d Brownian motion
    started at (a, 0, 0) - exact in law at the grid points."""
    if a < 0:
        raise ValueError("a must be nonnegative")
    return SamplePath(grid=grid, values=_bessel3_values(a, grid.n, grid.dt, rng))


def sample_symmetrized_bessel(grid: TimeGrid, rng: np.random.Generator) -> SamplePath:
    """eps * Bessel(3) from 0 with an independent fair sign eps."""
    eps = 1.0 if rng.random() < 0.5 else -1.0
    v = eps * _bessel3_values(0.0, grid.n, grid.dt, rng)
    return SamplePath(grid=grid, values=v)


# -- the sigma-finite sampler -------------------------------------------------


@dataclass(frozen=True)
class WProposal:
    """Proposal for the bridge length u against du / sqrt(2 pi u)."""
    kind: str = "gamma"             # "gamma" | "heavy"
    theta: float = 1.0
    alpha: float | None = None      # declared decay of the test functionals

    def __post_init__(self):
        if self.kind not in ("gamma", "heavy"):
            raise ConfigurationError(f"unknown proposal kind {self.kind!r}")
        if self.theta <= 0:
            raise ConfigurationError("theta must be positive")
        if self.kind == "gamma" and self.alpha is not None:
            if not (self.alpha > 1.0 / (2.0 * self.theta)):
                raise ConfigurationError(
                    f"declared decay alpha={self.alpha} needs alpha > 1/(2 theta)"
                    f" = {1.0 / (2.0 * self.theta)}")

    @staticmethod
    def for_decay(alpha: float) -> "WProposal":
        """Gamma proposal matched to functionals dominated by exp(-alpha g)."""
        if alpha <= 0:
            raise ConfigurationError("alpha must be positive")
        return WProposal(kind="gamma", theta=1.0 / alpha, alpha=alpha)

    def validate(self, t_max: float) -> None:
        if self.kind == "gamma":
            tail = float(special.erfc(np.sqrt(t_max / self.theta)))
            if tail >= GAMMA_TAIL_LIMIT:
                raise ConfigurationError(
                    f"horizon t_max={t_max} too small for theta={self.theta}"
                    f" (proposal tail {tail:.2e} >= {GAMMA_TAIL_LIMIT})")

    def truncation_mass(self, t_max: float) -> float:
        """Proposal-free statement of what lies beyond the horizon: the
        untruncated proposal mass above t_max (gamma) or 0 by construction
        (heavy, which renormalizes on (0, t_max])."""
        if self.kind == "gamma":
            return float(special.erfc(np.sqrt(t_max / self.theta)))
        return 0.0

    def draw(self, t_max: float, rng: np.random.Generator) -> tuple[float, float, bool]:
        """Return (u_raw, weight, censored)."""
        if self.kind == "gamma":
            u = float(rng.gamma(0.5, self.theta))
            w = float(np.sqrt(self.theta / 2.0) * np.exp(u / self.theta))
            censored = u > t_max
            return (min(u, t_max), w, censored)
        F = (2.0 / np.pi) * np.arctan(np.sqrt(t_max / self.theta))
        q = rng.random() * F
        u = float(self.theta * np.tan(0.5 * np.pi * q) ** 2)
        u = min(u, t_max)           # guards the open upper edge
        w = float(F * np.sqrt(np.pi / 2.0) * (self.theta + u) / np.sqrt(self.theta))
        return (u, w, False)


def sample_W(proposal: WProposal, grid: TimeGrid,
             rng: np.random.Generator) -> WeightedPath:
    """One weighted draw: bridge of sampled length u glued to a symmetrized
    Bessel path, with the importance weight of the proposal.

    The mean of weight * F(path) over draws estimates the sigma-finite
    integral of F (restricted to {g <= t_max} for the heavy proposal)."""
    proposal.validate(grid.t_max)
    u_raw, w, censored = proposal.draw(grid.t_max, rng)
    ku = min(max(int(round(u_raw / grid.dt)), 1), grid.n - 1)
    bridge = _bridge_values(ku, grid.dt, rng)
    eps = 1.0 if rng.random() < 0.5 else -1.0
    bes = _bessel3_values(0.0, grid.n - ku, grid.dt, rng)
    v = np.empty(grid.n + 1)
    v[: ku + 1] = bridge
    v[ku:] = eps * bes
    v[ku] = 0.0
    path = SamplePath(grid=grid, values=v)
    return WeightedPath(path=path, weight=w, u=ku * grid.dt, censored=censored)


def sample_Wx(x: float, proposal: WProposal, grid: TimeGrid,
              rng: np.random.Generator) -> WeightedPath:
    """Draw against the x-shifted measure: the same construction moved by x.
    u is retained from the construction (the last visit of the path to x)."""
    base = sample_W(proposal, grid, rng)
    shifted = SamplePath(grid=grid, values=base.path.values + x)
    return WeightedPath(path=shifted, weight=base.weight, u=base.u,
                        censored=base.censored, x0=x)


class DiffusionDraw(NamedTuple):
    path: SamplePath
    exited: bool        # left the tabulated phi domain; discard per contract


def sample_WV(x0: float, sol: PhiSolution, grid: TimeGrid,
              rng: np.random.Generator) -> DiffusionDraw:
    """Euler-Maruyama for dX = dB + (phi'/phi)(X) dt started at x0.

    The drift is bounded by 1/C_V, so plain Euler is adequate; exiting the
    tabulated spatial domain only flags the draw."""
    n, dt = grid.n, grid.dt
    dB = rng.standard_normal(n) * np.sqrt(dt)
    v = np.empty(n + 1)
    v[0] = x0
    lim = sol.L - 1.0
    exited = False
    x = x0
    for i in range(n):
        x = x + sol.drift_at(x) * dt + dB[i]
        if abs(x) > lim:
            exited = True
        v[i + 1] = x
    return DiffusionDraw(path=SamplePath(grid=grid, values=v), exited=exited)
