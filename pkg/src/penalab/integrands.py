"""Deterministic integrands f (drift densities) and penalisation measures V.

An Integrand is either a finite step function (the workhorse: all norms,
primitives and tail transforms come out in closed form) or a tabulated
continuous function on a uniform table.  A MeasureSpec is a finite sum of
point atoms plus a piecewise-linear density of compact support.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

__all__ = ["Integrand", "MeasureSpec", "DensityPiece"]

_REL_TOL = 1e-9


def _as_float_array(x) -> np.ndarray:
    a = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(a)):
        raise ValueError("non-finite values not allowed")
    return a


@dataclass(frozen=True)
class Integrand:
    """A deterministic f with compact support and finite L1/L2 norms.

    Step form: f = sum_k levels[k] * 1_[breaks[k], breaks[k+1]).
    Tabulated form: values sampled on a uniform table with spacing table_dt,
    interpreted as left-continuous between table nodes.
    """

    kind: str                      # "step" | "tabulated"
    breaks: np.ndarray = field(default_factory=lambda: np.zeros(1))
    levels: np.ndarray = field(default_factory=lambda: np.zeros(0))
    table_dt: float = 0.0
    table: np.ndarray = field(default_factory=lambda: np.zeros(0))
    alpha_decay: float | None = None

    # -- constructors ------------------------------------------------------

    @staticmethod
    def step(breaks: Sequence[float], levels: Sequence[float],
             alpha_decay: float | None = None) -> "Integrand":
        b = _as_float_array(breaks)
        c = _as_float_array(levels)
        if b.ndim != 1 or c.ndim != 1 or len(b) != len(c) + 1:
            raise ValueError("need len(breaks) == len(levels) + 1")
        if b[0] != 0.0 or np.any(np.diff(b) <= 0):
            raise ValueError("breaks must start at 0 and increase strictly")
        return Integrand(kind="step", breaks=b, levels=c, alpha_decay=alpha_decay)

    @staticmethod
    def zero() -> "Integrand":
        return Integrand.step([0.0, 1.0], [0.0])

    @staticmethod
    def indicator(a: float, b: float, height: float = 1.0) -> "Integrand":
        """height * 1_[a, b)."""
        if a == 0.0:
            return Integrand.step([0.0, b], [height])
        return Integrand.step([0.0, a, b], [0.0, height])

    @staticmethod
    def tabulated(values: Sequence[float], table_dt: float) -> "Integrand":
        v = _as_float_array(values)
        if table_dt <= 0 or v.ndim != 1 or len(v) < 1:
            raise ValueError("bad table")
        return Integrand(kind="tabulated", table=v, table_dt=float(table_dt))

    # -- basic queries ------------------------------------------------------

    @property
    def support_end(self) -> float:
        if self.kind == "step":
            nz = np.nonzero(self.levels)[0]
            return float(self.breaks[nz[-1] + 1]) if nz.size else 0.0
        return float(len(self.table) * self.table_dt)

    @property
    def is_zero(self) -> bool:
        return self.support_end == 0.0

    def value(self, t) -> np.ndarray:
        """f(t), right-continuous; 0 outside the support."""
        t = np.asarray(t, dtype=float)
        if self.kind == "step":
            idx = np.searchsorted(self.breaks, t, side="right") - 1
            ok = (idx >= 0) & (idx < len(self.levels))
            out = np.where(ok, self.levels[np.clip(idx, 0, max(len(self.levels) - 1, 0))], 0.0)
            return out if out.ndim else float(out)
        idx = np.floor(t / self.table_dt).astype(int)
        ok = (t >= 0) & (idx < len(self.table))
        out = np.where(ok, self.table[np.clip(idx, 0, len(self.table) - 1)], 0.0)
        return out if out.ndim else float(out)

    # -- integrals ----------------------------------------------------------

    def primitive(self, t) -> np.ndarray:
        """h(t) = int_0^t f(s) ds; exact for steps, trapezoid for tables."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        if self.kind == "step":
            seg = np.concatenate([[0.0], np.cumsum(self.levels * np.diff(self.breaks))])
            idx = np.clip(np.searchsorted(self.breaks, t, side="right") - 1, 0, len(self.levels))
            base = seg[idx]
            lev = np.where(idx < len(self.levels), self.levels[np.clip(idx, 0, len(self.levels) - 1)], 0.0)
            out = base + lev * (t - self.breaks[idx])
            out[t >= self.breaks[-1]] = seg[-1]
        else:
            nodes = np.arange(len(self.table) + 1) * self.table_dt
            vals = np.concatenate([self.table, [0.0]])
            cum = np.concatenate([[0.0], np.cumsum(0.5 * (vals[1:] + vals[:-1]) * self.table_dt)])
            out = np.interp(t, nodes, cum, left=0.0, right=cum[-1])
        return out if out.shape != (1,) else float(out[0])

    def primitive_on_grid(self, times: np.ndarray, T: float | None = None) -> np.ndarray:
        """h_{t ^ T} on the grid times (T = None means no truncation)."""
        t = np.asarray(times, dtype=float)
        if T is not None:
            t = np.minimum(t, float(T))
        return np.atleast_1d(self.primitive(t))

    def l2sq_partial(self, t: float) -> float:
        """int_0^t f(s)^2 ds."""
        if self.kind == "step":
            sq = Integrand.step(self.breaks, self.levels ** 2)
            return float(sq.primitive(t))
        sq = Integrand.tabulated(self.table ** 2, self.table_dt)
        return float(sq.primitive(t))

    @property
    def l2_sq(self) -> float:
        return self.l2sq_partial(self.support_end)

    @property
    def l1(self) -> float:
        if self.kind == "step":
            return float(np.sum(np.abs(self.levels) * np.diff(self.breaks)))
        a = Integrand.tabulated(np.abs(self.table), self.table_dt)
        return float(a.primitive(a.support_end))

    def tail_l2(self, t: float) -> float:
        """sigma_t = sqrt(int_t^inf f^2)."""
        return float(np.sqrt(max(0.0, self.l2_sq - self.l2sq_partial(t))))

    def l1_tail(self, t: float) -> float:
        if self.kind == "step":
            a = Integrand.step(self.breaks, np.abs(self.levels))
            return float(a.primitive(self.support_end) - a.primitive(t))
        a = Integrand.tabulated(np.abs(self.table), self.table_dt)
        return float(a.primitive(a.support_end) - a.primitive(t))

    def f_tilde(self, t: float) -> float:
        """int_t^inf |f(s)| (s - t)^{-1/2} ds; exact per piece for steps.

        The square-root singularity is absorbed: on a piece [a,b) with level c
        the contribution is |c| * 2 (sqrt(b-t) - sqrt(max(a,t)-t)).
        """
        if t >= self.support_end:
            return 0.0
        if self.kind == "step":
            tot = 0.0
            for k, c in enumerate(self.levels):
                if c == 0.0:
                    continue
                a, b = self.breaks[k], self.breaks[k + 1]
                if b <= t:
                    continue
                lo = max(a, t)
                tot += abs(c) * 2.0 * (np.sqrt(b - t) - np.sqrt(lo - t))
            return float(tot)
        # substitute s = t + r^2: 2 int_0^R |f(t + r^2)| dr, smooth integrand
        R = np.sqrt(self.support_end - t)
        r = np.linspace(0.0, R, 2001)
        vals = np.abs(self.value(t + r * r))
        return float(2.0 * np.trapezoid(vals, r))

    def shifted(self, t0: float) -> "Integrand":
        """f(. + t0)."""
        if t0 <= 0:
            return self
        if self.kind == "step":
            b = np.maximum(self.breaks - t0, 0.0)
            keep = self.breaks[1:] > t0
            nb = np.concatenate([[0.0], b[1:][keep]])
            nl = self.levels[keep]
            if nl.size == 0:
                return Integrand.zero()
            return Integrand.step(nb, nl)
        k = int(np.floor(t0 / self.table_dt + _REL_TOL))
        if k >= len(self.table):
            return Integrand.zero()
        return Integrand.tabulated(self.table[k:], self.table_dt)

    def scaled(self, c: float) -> "Integrand":
        if self.kind == "step":
            return Integrand.step(self.breaks, c * self.levels, self.alpha_decay)
        return Integrand.tabulated(c * self.table, self.table_dt)


@dataclass(frozen=True)
class DensityPiece:
    """Linear density segment from (a, ha) to (b, hb), supported on [a, b)."""
    a: float
    b: float
    ha: float
    hb: float

    def value(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        lam = np.clip((x - self.a) / (self.b - self.a), 0.0, 1.0)
        inside = (x >= self.a) & (x < self.b)
        return np.where(inside, self.ha + (self.hb - self.ha) * lam, 0.0)

    def mass(self) -> float:
        return 0.5 * (self.ha + self.hb) * (self.b - self.a)

    def weighted_mass(self) -> float:
        """int (1 + |x|) v(x) dx over the piece, exact (splits at 0)."""
        def part(a, b, ha, hb, sign):
            # integrate (1 + sign*x)(ha + slope*(x-a)) on [a,b]
            if b <= a:
                return 0.0
            slope = (hb - ha) / (self.b - self.a)
            h_at = lambda x: self.ha + slope * (x - self.a)
            # 2-point Gauss-Legendre is exact for this quadratic
            m, r = 0.5 * (a + b), 0.5 * (b - a)
            g = r / np.sqrt(3.0)
            tot = 0.0
            for x in (m - g, m + g):
                tot += (1.0 + sign * x) * h_at(x)
            return tot * r
        if self.b <= 0:
            return part(self.a, self.b, self.ha, self.hb, -1.0)
        if self.a >= 0:
            return part(self.a, self.b, self.ha, self.hb, 1.0)
        return part(self.a, 0.0, self.ha, self.hb, -1.0) + part(0.0, self.b, self.ha, self.hb, 1.0)


@dataclass(frozen=True)
class MeasureSpec:
    """Penalisation measure: point atoms plus a compactly supported density."""

    atoms: tuple = ()               # ((location, mass > 0), ...)
    pieces: tuple = ()              # (DensityPiece, ...), disjoint interiors
    closed_right: bool = True       # include the rightmost support edge

    def __post_init__(self):
        for _, lam in self.atoms:
            if lam <= 0:
                raise ValueError("atom masses must be positive")
        w = self.weighted_total()
        if (self.atoms or self.pieces) and not (0.0 < w < np.inf):
            raise ValueError("need 0 < int (1+|x|) V(dx) < inf")
        # the empty measure is allowed as a trivial kernel (weight 1);
        # the penalisation admissibility condition is enforced where the
        # limit theorems need it (the ODE solver and the experiments)

    @staticmethod
    def empty() -> "MeasureSpec":
        return MeasureSpec()

    @staticmethod
    def point(location: float = 0.0, mass: float = 1.0) -> "MeasureSpec":
        return MeasureSpec(atoms=((float(location), float(mass)),))

    @staticmethod
    def points(pairs) -> "MeasureSpec":
        return MeasureSpec(atoms=tuple((float(x), float(l)) for x, l in pairs))

    @staticmethod
    def box(a: float = -1.0, b: float = 1.0, height: float = 1.0) -> "MeasureSpec":
        return MeasureSpec(pieces=(DensityPiece(a, b, height, height),))

    @staticmethod
    def bump(inner: float = 2.0, outer: float = 3.0, height: float = 1.0) -> "MeasureSpec":
        """Continuous plateau: height on [-inner, inner], linear to 0 at +-outer."""
        return MeasureSpec(pieces=(
            DensityPiece(-outer, -inner, 0.0, height),
            DensityPiece(-inner, inner, height, height),
            DensityPiece(inner, outer, height, 0.0),
        ))

    def _knot_table(self):
        """(xp, fp) for one-shot np.interp evaluation; duplicated knots encode
        jumps (np.interp picks the right-hand value at a duplicate)."""
        cached = getattr(self, "_knots", None)
        if cached is not None:
            return cached
        xp: list[float] = []
        fp: list[float] = []
        prev_b: float | None = None
        prev_hb = 0.0
        for p in sorted(self.pieces, key=lambda q: q.a):
            if prev_b is None or p.a > prev_b:
                if prev_b is not None and prev_hb != 0.0:
                    xp.append(prev_b)
                    fp.append(0.0)
                xp.append(p.a)
                fp.append(0.0)
                if p.ha != 0.0:
                    xp.append(p.a)
                    fp.append(p.ha)
            elif p.ha != prev_hb:
                xp.append(p.a)
                fp.append(p.ha)
            xp.append(p.b)
            fp.append(p.hb)
            prev_b, prev_hb = p.b, p.hb
        if prev_hb != 0.0:
            xp.append(prev_b)
            fp.append(0.0)
        table = (np.asarray(xp), np.asarray(fp))
        object.__setattr__(self, "_knots", table)
        return table

    def density(self, x) -> np.ndarray:
        """Density value; the right support edge is closed (box is 1_[a,b])."""
        x = np.asarray(x, dtype=float)
        if not self.pieces:
            return np.zeros_like(x)
        xp, fp = self._knot_table()
        out = np.interp(x, xp, fp, left=0.0, right=0.0)
        if self.closed_right:
            edge = max(p.b for p in self.pieces)
            hb = sum(p.hb for p in self.pieces if p.b == edge)
            if hb:
                out = np.where(x == edge, hb, out)
        return out

    @property
    def has_density(self) -> bool:
        return len(self.pieces) > 0

    def total_mass(self) -> float:
        return float(sum(l for _, l in self.atoms) + sum(p.mass() for p in self.pieces))

    def weighted_total(self) -> float:
        """int (1 + |x|) V(dx), in closed form."""
        at = sum(l * (1.0 + abs(x)) for x, l in self.atoms)
        den = sum(p.weighted_mass() for p in self.pieces)
        return float(at + den)

    def support_radius(self) -> float:
        r = 0.0
        for x, _ in self.atoms:
            r = max(r, abs(x))
        for p in self.pieces:
            r = max(r, abs(p.a), abs(p.b))
        return r

    def scaled(self, c: float) -> "MeasureSpec":
        if c <= 0:
            raise ValueError("scale must be positive")
        return MeasureSpec(
            atoms=tuple((x, c * l) for x, l in self.atoms),
            pieces=tuple(DensityPiece(p.a, p.b, c * p.ha, c * p.hb) for p in self.pieces),
            closed_right=self.closed_right,
        )
