"""Streaming Monte Carlo harness.

One Philox substream per path index; paths are processed in fixed-size
chunks whose partial sums are combined in chunk order with compensated
(Kahan) addition, so results do not depend on the worker count and repeat
bit-for-bit for a fixed seed.
"""
from __future__ import annotations

import hashlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .samplers import substream

__all__ = [
    "EstimatorResult", "IdentityCheck", "derive_seed", "mc_estimate",
    "run_chunked", "bm_chunk_pass", "path_pass", "CHUNK",
]

CHUNK = 256                      # fixed: part of the reproducibility contract
CENSOR_LIMIT = 0.05


def derive_seed(master_seed: int, tag: str) -> int:
    """Stable 63-bit sub-seed for an estimator leg, from (master_seed, tag)."""
    h = hashlib.blake2b(f"{master_seed}:{tag}".encode(), digest_size=8).digest()
    return int.from_bytes(h, "big") >> 1


@dataclass(frozen=True)
class EstimatorResult:
    mean: float
    std_error: float
    n_paths: int
    censor_rate: float = 0.0
    dt: float = 0.0
    discretization_budget: float = 0.0
    z_mult: float = 4.0

    @staticmethod
    def exact(value: float, budget: float = 0.0) -> "EstimatorResult":
        return EstimatorResult(mean=float(value), std_error=0.0, n_paths=0,
                               discretization_budget=budget)

    def tolerance_part(self) -> float:
        return self.z_mult * self.std_error + self.discretization_budget


@dataclass(frozen=True)
class IdentityCheck:
    name: str
    lhs: EstimatorResult
    rhs: EstimatorResult
    verdict: str                 # PASS | FAIL | INCONCLUSIVE
    tolerance: float
    mode: str = "two-sided"      # "two-sided" | "upper"  (upper: lhs <= rhs + tol)
    note: str = ""

    @property
    def difference(self) -> float:
        return self.lhs.mean - self.rhs.mean

    @staticmethod
    def build(name: str, lhs: EstimatorResult, rhs: EstimatorResult,
              mode: str = "two-sided", extra_budget: float = 0.0,
              note: str = "") -> "IdentityCheck":
        tol = lhs.tolerance_part() + rhs.tolerance_part() + extra_budget
        censor = max(lhs.censor_rate, rhs.censor_rate)
        d = lhs.mean - rhs.mean
        if censor > CENSOR_LIMIT:
            verdict = "INCONCLUSIVE"
        elif mode == "upper":
            verdict = "PASS" if d <= tol else "FAIL"
        else:
            verdict = "PASS" if abs(d) <= tol else "FAIL"
        return IdentityCheck(name=name, lhs=lhs, rhs=rhs, verdict=verdict,
                             tolerance=tol, mode=mode, note=note)


class _Accum:
    """Compensated accumulation of sum, sum of squares and censor count."""

    __slots__ = ("s", "s_c", "q", "q_c", "cens", "n")

    def __init__(self):
        self.s = 0.0
        self.s_c = 0.0
        self.q = 0.0
        self.q_c = 0.0
        self.cens = 0
        self.n = 0

    def _kadd(self, attr_s, attr_c, x):
        s = getattr(self, attr_s)
        c = getattr(self, attr_c)
        y = x - c
        t = s + y
        setattr(self, attr_c, (t - s) - y)
        setattr(self, attr_s, t)

    def add_chunk(self, values: np.ndarray, censored) -> None:
        v = np.asarray(values, dtype=float)
        self._kadd("s", "s_c", float(np.sum(v)))
        self._kadd("q", "q_c", float(np.sum(v * v)))
        if censored is not None:
            self.cens += int(np.count_nonzero(censored))
        self.n += v.size

    def result(self, dt: float, budget: float = 0.0, z_mult: float = 4.0) -> EstimatorResult:
        if self.n == 0:
            raise ValueError("estimator ran over zero paths")
        mean = self.s / self.n
        var = max(0.0, self.q / self.n - mean * mean)
        se = np.sqrt(var / self.n)
        return EstimatorResult(mean=mean, std_error=float(se), n_paths=self.n,
                               censor_rate=self.cens / self.n, dt=dt,
                               discretization_budget=budget, z_mult=z_mult)


def run_chunked(n_paths: int, seed: int, chunk_fn, n_workers: int = 1) -> dict:
    """Drive chunk_fn(seed, start_index, size) -> {name: (values, censored)}
    over ceil(n/CHUNK) chunks and accumulate deterministically.

    Chunk boundaries are fixed by CHUNK, not by the worker count; partials
    are combined in chunk order, so any worker count yields the same sums.
    """
    if n_paths <= 0:
        raise ValueError("n_paths must be positive")
    starts = list(range(0, n_paths, CHUNK))
    jobs = [(s, min(CHUNK, n_paths - s)) for s in starts]
    accs: dict[str, _Accum] = {}

    def _consume(out):
        for name, (vals, cens) in out.items():
            accs.setdefault(name, _Accum()).add_chunk(vals, cens)

    if n_workers <= 1:
        for s, m in jobs:
            _consume(chunk_fn(seed, s, m))
    else:
        with ThreadPoolExecutor(max_workers=n_workers) as ex:
            for out in ex.map(lambda j: chunk_fn(seed, j[0], j[1]), jobs):
                _consume(out)
    return accs


def mc_estimate(functional, sampler, n_paths: int, seed: int,
                dt: float = 0.0, budget: float = 0.0, z_mult: float = 4.0,
                n_workers: int = 1) -> EstimatorResult:
    """Mean and standard error of (weight x) functional over n_paths
    independent substreams.

    sampler(generator) returns a SamplePath or a WeightedPath; weighted
    draws multiply the functional by their importance weight and propagate
    the censor flag.  functional(path) returns a float or a FunctionalValue.
    """

    def make(gen, idx):
        draw = sampler(gen)
        weight = getattr(draw, "weight", 1.0)
        censored = bool(getattr(draw, "censored", False))
        path = getattr(draw, "path", draw)
        out = functional(path)
        value = getattr(out, "value", out)
        censored = censored or bool(getattr(out, "censored", False))
        return {"v": (weight * value, censored)}

    accs = run_chunked(n_paths, seed, path_pass(make), n_workers)
    return accs["v"].result(dt, budget=budget, z_mult=z_mult)


def bm_chunk_pass(x0: float, n_steps: int, dt: float, eval_matrix):
    """Chunk function for Brownian ensembles: builds a (size, n+1) matrix of
    substream paths and hands it to eval_matrix(X)."""
    sq = np.sqrt(dt)

    def chunk_fn(seed: int, start: int, size: int):
        X = np.empty((size, n_steps + 1))
        X[:, 0] = 0.0
        for i in range(size):
            g = substream(seed, start + i)
            np.cumsum(g.standard_normal(n_steps), out=X[i, 1:])
        X[:, 1:] *= sq
        X += x0
        return eval_matrix(X)

    return chunk_fn


def path_pass(make_path_values):
    """Chunk function for per-path sampling: make_path_values(gen, index)
    -> {name: (value, censored_flag)}."""

    def chunk_fn(seed: int, start: int, size: int):
        rows: dict[str, tuple[list, list]] = {}
        for i in range(size):
            g = substream(seed, start + i)
            out = make_path_values(g, start + i)
            for name, (val, cens) in out.items():
                vals, cmask = rows.setdefault(name, ([], []))
                vals.append(val)
                cmask.append(bool(cens))
        return {k: (np.array(v), np.array(c)) for k, (v, c) in rows.items()}

    return chunk_fn
