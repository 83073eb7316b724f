import json
import math
from pathlib import Path

import numpy as np
import pytest

from genramsey.coloring import read_witness, verify_coloring
from genramsey.harness import (CSV_COLUMNS, WORKERS_ENV, AnalysisError, ConfigError,
                               ExperimentRecord, fit_exponent, load_config, min_successful_T,
                               run_experiment, trial_seed, validate_config)
from genramsey.hypergraph import complete_host, complete_pattern, enumerate_copies

GOLDEN = Path(__file__).parent / "golden" / "records.csv"
SMALL = {"pattern": "K3", "q": 2, "method": "lll", "ns": [5, 6], "trials": 3, "T": 3, "seed": 4}


@pytest.mark.parametrize("doc,path", [
    ({"pattern": "K4", "q": "four", "method": "lll", "ns": [5], "T": 3}, "$.q"),
    ({"pattern": "K4", "q": 4, "method": "lll", "ns": [5, 1], "T": 3}, "$.ns[1]"),
    ({"pattern": "K4", "q": 4, "method": "sat", "ns": [5], "T": 3}, "$.method"),
    ({"pattern": "K4", "q": 4, "method": "greedy", "ns": [5], "T": 3, "greedy": {"order": "x"}},
     "$.greedy.order"),
    ({"pattern": "K4", "q": 4, "method": "greedy", "ns": [5], "colour": 3}, "$"),
    ({"pattern": "K4", "q": 4, "method": "greedy", "ns": [5]}, "$"),
])
def test_schema_errors_carry_paths(doc, path):
    with pytest.raises(ConfigError) as info:
        validate_config(doc)
    assert info.value.path == path


def test_load_config_errors(tmp_path):
    bad = tmp_path / "c.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError):
        load_config(bad)
    good = tmp_path / "d.json"
    good.write_text(json.dumps(SMALL))
    assert load_config(good) == SMALL


def test_golden_csv():
    assert run_experiment(SMALL).to_csv() == GOLDEN.read_text()
    assert GOLDEN.read_text().splitlines()[0] == ",".join(CSV_COLUMNS)


def test_grid_of_100_records_is_reproducible(tmp_path):
    doc = {"pattern": "K4", "q": 4, "method": "greedy", "ns": [20, 30, 40, 50, 60], "trials": 20,
           "C": 4.0, "seed": 1}
    a = run_experiment(doc, out_dir=tmp_path / "a")
    run_experiment(doc, out_dir=tmp_path / "b")
    assert len(a.records) == 100
    assert {(r.n, r.trial) for r in a.records} == {(n, t) for n in doc["ns"] for t in range(20)}
    assert (tmp_path / "a" / "records.csv").read_bytes() == (tmp_path / "b" / "records.csv").read_bytes()
    for r in a.records:
        assert not r.success or r.violations == 0
        assert r.colors_used <= r.T


def test_record_invariants_and_json(tmp_path):
    res = run_experiment({**SMALL, "T": 2, "ns": [5, 6]}, out_dir=tmp_path)
    for r in res.records:
        assert r.success == (r.violations == 0)
        assert r.colors_used <= r.T
    doc = json.loads((tmp_path / "records.json").read_text())
    assert len(doc["records"]) == len(res.records)
    assert all("wall_time" in r for r in doc["records"])
    assert "wall_time" not in (tmp_path / "records.csv").read_text()


def test_witnesses_reverify(tmp_path):
    wdir = tmp_path / "w"
    res = run_experiment({"pattern": "K4", "q": 4, "method": "greedy", "ns": [8, 9], "trials": 3,
                          "T": 6, "witness_dir": str(wdir)})
    files = sorted(wdir.glob("*.txt"))
    assert len(files) == sum(r.success for r in res.records) > 0
    for f in files:
        n = int(f.name.split("_n")[1].split("_")[0])
        G = complete_host(n, 2)
        F = complete_pattern(4)
        assert verify_coloring(G, F, 4, read_witness(G, f), enumerate_copies(G, F)).valid


def test_exact_mode_records_guard_errors():
    res = run_experiment({"pattern": "K3", "q": 2, "method": "exact", "ns": [5, 8, 6]})
    rows = {r.n: r for r in res.records}
    assert rows[8].error == "size-limit" and not rows[8].success
    assert rows[5].T == 2 and rows[6].T == 3 and rows[6].success
    assert [r.n for r in res.records] == [5, 8, 6]


def test_seeds_are_distinct_and_stable():
    seeds = {trial_seed(0, n, T, t) for n in (20, 30) for T in (5, 6) for t in range(10)}
    assert len(seeds) == 40
    assert trial_seed(3, 20, 5, 1) == trial_seed(3, 20, 5, 1)


def test_worker_pool_matches_serial(monkeypatch):
    doc = {**SMALL, "ns": [6, 7], "trials": 4}
    serial = run_experiment(doc).to_csv()
    monkeypatch.setenv(WORKERS_ENV, "2")
    assert run_experiment(doc).to_csv() == serial


def test_bisection_finds_quorum_boundary():
    doc = {"pattern": "K4", "q": 4, "method": "lll", "ns": [8, 10], "trials": 5, "seed": 2,
           "search": {"mode": "bisect", "lo": 2, "quorum": 0.8}}
    res = run_experiment(doc)
    for n, best in res.min_T.items():
        assert best is not None
        groups = {}
        for r in res.records:
            if r.n == n:
                groups.setdefault(r.T, []).append(r.success)
        assert len(groups[best]) == 5 and sum(groups[best]) >= 4
        for T, flags in groups.items():
            if T < best:
                assert sum(flags) < 4 or len(flags) < 5
    assert min_successful_T(res.records)[8] <= res.min_T[8]


def _records(table, p=4, k=2):
    return [ExperimentRecord(k=k, p=p, q=4, r=6, pattern_hash="x", n=n, method="greedy", T=T,
                             C=None, seed=0, trial=0, success=True, colors_used=T, violations=0)
            for n, T in table.items()]


def test_fit_synthetic_power_law():
    ns = [20, 30, 40, 50, 60, 70, 80]
    fit = fit_exponent({n: n ** (2 / 3) for n in ns}, p_minus_k=2)
    assert abs(fit.slope - 2 / 3) < 1e-9 and fit.residual < 1e-9
    fit = fit_exponent({n: (n ** 2 / math.log(n)) ** (1 / 3) for n in ns}, p_minus_k=2)
    assert abs(fit.slope_compound - 1 / 3) < 1e-9 and fit.residual_compound < 1e-9


def test_fit_from_records_and_errors():
    recs = _records({20: 10, 30: 13, 40: 15, 50: 17})
    fit = fit_exponent(recs)
    assert fit.ns == [20, 30, 40, 50]
    x, y = np.log(fit.ns), np.log(fit.Ts)
    assert fit.slope == pytest.approx(np.polyfit(x, y, 1)[0], abs=1e-12)
    with pytest.raises(AnalysisError):
        fit_exponent(_records({20: 10, 30: 13, 40: 15}))
    with pytest.raises(AnalysisError):
        fit_exponent({20: 1.0, 30: 2.0, 40: 3.0, 50: 4.0})
