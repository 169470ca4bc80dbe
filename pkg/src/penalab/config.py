"""Run configuration: flat key=value files, env/flag overrides, validation."""
from __future__ import annotations

import os
from dataclasses import dataclass, fields, replace

from scipy.special import ndtri

__all__ = ["RunConfig", "parse_config_file", "config_from_sources"]

# ci level whose two-sided normal quantile is exactly 4 standard errors
CI_FOUR_SE = 0.9999366575163338


@dataclass(frozen=True)
class RunConfig:
    dt: float = 1e-3
    t_max: float = 40.0
    n_paths: int = 100_000
    master_seed: int = 20070845
    theta: float = 1.0          # gamma proposal scale for exp(-g)-damped functionals
    theta_heavy: float = 10.0   # heavy proposal scale for polynomially decaying ones
    eps_localtime: float = 0.0  # 0 means the default sqrt(dt)
    L: float = 50.0             # Sturm-Liouville half-width
    dx: float = 1e-3            # Sturm-Liouville step
    ci_level: float = CI_FOUR_SE
    n_workers: int = 1
    out_dir: str = "penalab-out"

    def __post_init__(self):
        if min(self.dt, self.t_max, self.theta, self.theta_heavy, self.L, self.dx) <= 0:
            raise ValueError("all scale parameters must be positive")
        if self.n_paths <= 0 or self.n_workers <= 0:
            raise ValueError("n_paths and n_workers must be positive")
        if not (0.5 < self.ci_level < 1.0):
            raise ValueError("ci_level must lie in (0.5, 1)")
        ratio = self.t_max / self.dt
        if abs(ratio - round(ratio)) > 1e-9 * max(1.0, ratio):
            raise ValueError("t_max must be an integer multiple of dt")

    @property
    def z_mult(self) -> float:
        return float(ndtri(0.5 + 0.5 * self.ci_level))

    def replaced(self, **kw) -> "RunConfig":
        return replace(self, **kw)

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


_INT_KEYS = {"n_paths", "master_seed", "n_workers"}
_STR_KEYS = {"out_dir"}


def parse_config_file(path: str) -> dict:
    """Flat key=value lines; '#' starts a comment; unknown keys rejected."""
    known = {f.name for f in fields(RunConfig)}
    out: dict = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value")
            key, val = (s.strip() for s in line.split("=", 1))
            if key not in known:
                raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
            out[key] = _coerce(key, val)
    return out


def _coerce(key: str, val: str):
    if key in _STR_KEYS:
        return val
    if key in _INT_KEYS:
        return int(val)
    return float(val)


_CORE_KEYS = ("dt", "t_max", "n_paths", "master_seed")


def config_from_sources(file_path: str | None = None, overrides: dict | None = None,
                        env: dict | None = None) -> RunConfig:
    """File keys, then CLI overrides, then the PENALAB_SEED env variable.

    A config file must pin the core keys (dt, t_max, n_paths, master_seed),
    possibly via flags; defaults apply only to flags-without-file usage."""
    env = os.environ if env is None else env
    kw: dict = {}
    if file_path is not None:
        kw.update(parse_config_file(file_path))
    if overrides:
        kw.update({k: v for k, v in overrides.items() if v is not None})
    if "PENALAB_SEED" in env:
        kw["master_seed"] = int(env["PENALAB_SEED"])
    if file_path is not None:
        missing = [k for k in _CORE_KEYS if k not in kw]
        if missing:
            raise ValueError(f"config file {file_path} leaves core keys unset: "
                             + ", ".join(missing))
    return RunConfig(**kw)
