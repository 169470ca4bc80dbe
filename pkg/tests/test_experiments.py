"""Structural behavior of the experiment battery at toy scale."""
import numpy as np
import pytest

from penalab.config import RunConfig
from penalab.experiments import BATTERY, REGISTRY, envelope_rows, run_experiment

TOY = RunConfig(dt=1e-2, t_max=40.0, n_paths=600, master_seed=99)


def test_registry_and_battery_shape():
    assert len(BATTERY) == 14
    assert set(BATTERY) <= set(REGISTRY)
    assert "phi-atom" in REGISTRY            # individually runnable
    with pytest.raises(KeyError):
        run_experiment("nope", TOY)


def test_verdicts_are_reproducible():
    a = run_experiment("w-oracle", TOY)
    b = run_experiment("w-oracle", TOY)
    assert [(r.name, r.verdict, r.lhs.mean) for r in a] == \
           [(r.name, r.verdict, r.lhs.mean) for r in b]


def test_negative_controls_detect_violations():
    rows = run_experiment("nondeg-bound", TOY)
    control = [r for r in rows if "negative-control" in r.name]
    assert control and all(r.verdict == "PASS" for r in control)
    # the control passes exactly because the raw comparison violates
    c = control[0]
    assert c.lhs.mean > c.rhs.mean + c.tolerance


def test_domination_controls():
    rows = run_experiment("domination", TOY)
    named = {r.name: r for r in rows}
    assert named["domination/f=0"].lhs.mean == 0.0
    assert named["domination/f=0/negative-control"].lhs.mean > 0
    assert named["domination/f=signed"].verdict == "PASS"


def test_tail_vanishing_control_present():
    rows = run_experiment("tail-vanishing", TOY)
    names = [r.name for r in rows]
    assert "tail-vanishing/negative-control" in names
    control = [r for r in rows if "negative-control" in r.name][0]
    assert control.verdict == "PASS"


def test_envelope_rows_toy():
    rows = envelope_rows(TOY)
    named = {r.name: r for r in rows}
    assert named["envelope/t=5.0/a=0.0"].lhs.mean == 0.0    # empty tail
    assert named["envelope/quadrature-vs-mc"].verdict == "PASS"
    assert named["envelope/negative-control"].verdict == "PASS"


def test_translation_identity_control_exact_zero():
    rows = run_experiment("translation-identity", TOY)
    named = {r.name: r for r in rows}
    c = named["translation-identity/control-f=0"]
    assert c.lhs.mean == 0.0 and c.lhs.std_error == 0.0
    assert c.verdict == "PASS"


def test_cm_brownian_control_exact_zero():
    rows = run_experiment("cm-brownian", TOY)
    for r in rows:
        if r.name.startswith("cm-brownian/f=0/"):
            assert r.lhs.mean == 0.0 and r.verdict == "PASS"


def test_matrix_random_time_kernels_match_scalar():
    from penalab.experiments import _first_hit_idx, _last_exit_idx
    from penalab.paths import hitting_index, last_exit_index
    rng = np.random.default_rng(17)
    X = np.cumsum(rng.standard_normal((64, 300)) * 0.1, axis=1)
    X = np.concatenate([np.zeros((64, 1)), X], axis=1)
    X[5] = np.abs(X[5]) + 0.1        # never returns
    X[6, :] = 0.0                    # identically zero
    X[7, 120] = 0.0                  # exact interior zero
    le = _last_exit_idx(X)
    for i in range(64):
        assert le[i] == last_exit_index(X[i]), i
    for a in (0.0, 0.37, -0.5):
        fh = _first_hit_idx(X, a)
        for i in range(64):
            want = hitting_index(X[i], a)
            assert fh[i] == (-1 if want is None else want), (i, a)
