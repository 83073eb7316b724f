"""Batch experiments: seeded trials over a grid of host sizes, persisted as CSV and JSON.

Each trial seed is derived from ``(seed, n, T, trial)`` with ``numpy.random.SeedSequence``,
so a rerun of the same configuration reproduces every record.  Wall time is kept out of
the CSV so that reruns produce byte-identical files; it is present in the JSON output.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Tuple, Union

import jsonschema
import numpy as np

from .coloring import (PartialColoring, UNCOLORED, distinct_per_row, make_lists, verify_coloring,
                       write_witness)
from .encoder import ConflictTracker, SizeLimitError, budget
from .exact import DEFAULT_GUARD, exact_min_colors
from .greedy import GreedyConfig, greedy_color
from .hypergraph import (CopySet, PatternGraph, RamseyParams, complete_host,
                         enumerate_copies, parse_pattern)
from .lll import calibrate_constant, lll_budget, moser_tardos_color

WORKERS_ENV = "GENRAMSEY_WORKERS"

CSV_COLUMNS = ("k", "p", "q", "r", "pattern_hash", "n", "method", "T", "C", "seed", "trial",
               "success", "colors_used", "violations", "error")

CONFIG_SCHEMA: Dict[str, Any] = {
    "type": "object",
    "required": ["pattern", "q", "method", "ns"],
    "additionalProperties": False,
    "properties": {
        "pattern": {"type": "string"},
        "k": {"type": "integer", "minimum": 2},
        "q": {"type": "integer", "minimum": 1},
        "method": {"enum": ["lll", "greedy", "exact"]},
        "ns": {"type": "array", "items": {"type": "integer", "minimum": 2}, "minItems": 1},
        "trials": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer", "minimum": 0},
        "lists": {"enum": ["shared", "disjoint", "random"]},
        "pool_size": {"type": "integer", "minimum": 1},
        "T": {"type": "integer", "minimum": 1},
        "C": {"type": "number", "exclusiveMinimum": 0},
        "max_resamples": {"type": "integer", "minimum": 0},
        "guard": {"type": "integer", "minimum": 1},
        "witness_dir": {"type": "string"},
        "greedy": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "order": {"enum": ["random-edge-permutation", "random-pair-stream"]},
                "max_retries_per_edge": {"type": "integer", "minimum": 1},
                "max_restarts": {"type": "integer", "minimum": 1},
                "repair": {"type": "boolean"},
            },
        },
        "search": {
            "type": "object",
            "additionalProperties": False,
            "required": ["mode"],
            "properties": {
                "mode": {"enum": ["bisect"]},
                "lo": {"type": "integer", "minimum": 1},
                "hi": {"type": "integer", "minimum": 1},
                "quorum": {"type": "number", "minimum": 0, "maximum": 1},
            },
        },
    },
}


class ConfigError(ValueError):
    """Configuration failed schema validation; ``path`` locates the offending entry."""

    def __init__(self, message: str, path: str):
        super().__init__(f"{path}: {message}")
        self.path = path


class AnalysisError(ValueError):
    pass


@dataclass
class ExperimentRecord:
    k: int
    p: int
    q: int
    r: int
    pattern_hash: str
    n: int
    method: str
    T: int
    C: Optional[float]
    seed: int
    trial: int
    success: bool
    colors_used: int
    violations: int
    error: str = ""
    wall_time: float = 0.0

    def csv_row(self) -> List[str]:
        C = "" if self.C is None else repr(float(self.C))
        return [str(self.k), str(self.p), str(self.q), str(self.r), self.pattern_hash, str(self.n),
                self.method, str(self.T), C, str(self.seed), str(self.trial),
                "1" if self.success else "0", str(self.colors_used), str(self.violations), self.error]


@dataclass
class ExperimentResult:
    records: List[ExperimentRecord]
    min_T: Dict[int, Optional[int]] = field(default_factory=dict)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for rec in self.records:
            writer.writerow(rec.csv_row())
        return buf.getvalue()

    def to_json(self) -> str:
        doc = {"records": [asdict(r) for r in self.records],
               "min_T": {str(n): t for n, t in sorted(self.min_T.items())}}
        return json.dumps(doc, indent=1)

    def save(self, out_dir) -> Tuple[Path, Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        csv_path, json_path = out / "records.csv", out / "records.json"
        csv_path.write_text(self.to_csv())
        json_path.write_text(self.to_json())
        if self.min_T:
            lines = ["# n min_T"] + [f"{n} {t}" for n, t in sorted(self.min_T.items()) if t is not None]
            (out / "min_T.dat").write_text("\n".join(lines) + "\n")
        return csv_path, json_path


def validate_config(doc: Mapping[str, Any]) -> Dict[str, Any]:
    validator = jsonschema.Draft7Validator(CONFIG_SCHEMA)
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        path = "$" + "".join(f"[{p!r}]" if isinstance(p, int) else f".{p}" for p in err.absolute_path)
        raise ConfigError(err.message, path)
    cfg = dict(doc)
    if cfg["method"] != "exact" and "search" not in cfg and "T" not in cfg and "C" not in cfg:
        raise ConfigError("palette runs need T, C or a search block", "$")
    return cfg


def trial_seed(seed: int, n: int, T: int, trial: int) -> int:
    return int(np.random.SeedSequence([seed, n, T, trial]).generate_state(1, dtype=np.uint32)[0])


def uncertified_copies(phi: PartialColoring, index: CopySet, q: int) -> int:
    """Copies whose colored edges show fewer than q colors (the violation count when total)."""
    count = 0
    chunk = 1 << 18
    for lo in range(0, len(index), chunk):
        rows = phi.colors[index.edges[lo:lo + chunk]]
        # The uncolored marker counts as one extra "color" wherever it occurs.
        colored = distinct_per_row(rows) - (rows == UNCOLORED).any(axis=1)
        count += int((colored < q).sum())
    return count


class _Context:
    """Host, copies and the greedy tracker for one n, built once and reused."""

    def __init__(self, n: int, pattern: PatternGraph, params: RamseyParams):
        self.host = complete_host(n, pattern.k)
        self.index = enumerate_copies(self.host, pattern)
        self.pattern = pattern
        self.params = params
        self._tracker: Optional[ConflictTracker] = None

    @property
    def tracker(self) -> ConflictTracker:
        if self._tracker is None:
            self._tracker = ConflictTracker(self.host, self.pattern, self.params, self.index)
        return self._tracker


_CONTEXTS: Dict[Tuple[int, str, int], _Context] = {}


def _context(n: int, pattern: PatternGraph, params: RamseyParams) -> _Context:
    key = (n, pattern.fingerprint(), params.q)
    if key not in _CONTEXTS:
        _CONTEXTS.clear()
        _CONTEXTS[key] = _Context(n, pattern, params)
    return _CONTEXTS[key]


def _run_palette_trial(cfg: Dict[str, Any], pattern: PatternGraph, n: int, T: int,
                       C: Optional[float], trial: int) -> ExperimentRecord:
    params = RamseyParams.from_pattern(pattern, cfg["q"])
    ctx = _context(n, pattern, params)
    pattern = ctx.pattern  # the copy index is tied to this object
    seed = trial_seed(cfg.get("seed", 0), n, T, trial)
    base = dict(k=params.k, p=params.p, q=params.q, r=params.r, pattern_hash=pattern.fingerprint(),
                n=n, method=cfg["method"], T=T, C=C, seed=seed, trial=trial)
    start = time.perf_counter()
    lists = make_lists(ctx.host, T, mode=cfg.get("lists", "shared"), seed=seed,
                       pool_size=cfg.get("pool_size"))
    if cfg["method"] == "lll":
        res = moser_tardos_color(ctx.host, pattern, params.q, lists, ctx.index, seed=seed,
                                 max_resamples=cfg.get("max_resamples"))
        phi, ok = res.coloring, res.success
    else:
        g = cfg.get("greedy", {})
        gcfg = GreedyConfig(order=g.get("order", "random-edge-permutation"),
                            max_retries_per_edge=g.get("max_retries_per_edge", 8),
                            max_restarts=g.get("max_restarts", 5), seed=seed,
                            repair=g.get("repair", False))
        res = greedy_color(ctx.host, pattern, params.q, lists, ctx.index, params, gcfg,
                           tracker=ctx.tracker)
        phi, ok = res.coloring, res.success
    if ok:
        # Never trust the constructor: re-verify independently.
        violations = len(verify_coloring(ctx.host, pattern, params.q, phi, ctx.index))
        ok = violations == 0 and lists.respects(phi)
    else:
        violations = uncertified_copies(phi, ctx.index, params.q)
        violations = max(violations, 1)
    used = int(np.unique(phi.colors[phi.colors != UNCOLORED]).size)
    if ok and cfg.get("witness_dir"):
        wdir = Path(cfg["witness_dir"])
        wdir.mkdir(parents=True, exist_ok=True)
        write_witness(wdir / f"{cfg['method']}_n{n}_T{T}_t{trial}.txt", phi)
    return ExperimentRecord(**base, success=ok, colors_used=used, violations=violations,
                            wall_time=time.perf_counter() - start)


def _worker(args) -> ExperimentRecord:
    cfg, pattern_spec, n, T, C, trial = args
    pattern = parse_pattern(pattern_spec, cfg.get("k", 2))
    return _run_palette_trial(cfg, pattern, n, T, C, trial)


def _workers() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def _batch(cfg: Dict[str, Any], pattern: PatternGraph, n: int, T: int, C: Optional[float],
           trials: int, stop_after_failures: Optional[int] = None) -> List[ExperimentRecord]:
    """Run trials ``0..trials-1``; with ``stop_after_failures`` the batch ends once that many fail."""
    workers = _workers()
    if workers > 1:
        jobs = [(cfg, cfg["pattern"], n, T, C, t) for t in range(trials)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            recs = list(pool.map(_worker, jobs))
        if stop_after_failures is not None:
            out, fails = [], 0
            for rec in recs:
                out.append(rec)
                fails += not rec.success
                if fails >= stop_after_failures:
                    break
            recs = out
        return recs
    recs: List[ExperimentRecord] = []
    fails = 0
    for t in range(trials):
        rec = _run_palette_trial(cfg, pattern, n, T, C, t)
        recs.append(rec)
        fails += not rec.success
        if stop_after_failures is not None and fails >= stop_after_failures:
            break
    return recs


def _palette_for(cfg: Dict[str, Any], params: RamseyParams, n: int) -> Tuple[int, Optional[float]]:
    if "T" in cfg:
        return int(cfg["T"]), cfg.get("C")
    C = float(cfg["C"])
    if cfg["method"] == "lll":
        return lll_budget(n, params, C), C
    return budget(n, params, C).T, C


def _bisect(cfg: Dict[str, Any], pattern: PatternGraph, params: RamseyParams, n: int,
            trials: int) -> Tuple[Optional[int], List[ExperimentRecord]]:
    """Smallest T whose batch meets the quorum, assuming success is monotone in T."""
    search = cfg["search"]
    quorum = search.get("quorum", 0.8)
    allowed_failures = trials - math.ceil(quorum * trials - 1e-12)
    records: List[ExperimentRecord] = []
    verdict: Dict[int, bool] = {}

    def probe(T: int) -> bool:
        if T not in verdict:
            recs = _batch(cfg, pattern, n, T, None, trials, stop_after_failures=allowed_failures + 1)
            records.extend(recs)
            verdict[T] = sum(r.success for r in recs) >= quorum * trials - 1e-12 and len(recs) == trials
        return verdict[T]

    lo = max(1, search.get("lo", params.q) - 1)  # assumed to fail
    hi = search.get("hi", max(lo + 1, 2 * params.q))
    # With C(n,k) colors per edge a rainbow coloring is always reachable.
    top = math.comb(n, params.k)
    while not probe(hi):
        lo = hi
        if hi >= top:
            return None, records
        hi = min(top, 2 * hi)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if probe(mid):
            hi = mid
        else:
            lo = mid
    records.sort(key=lambda r: (r.T, r.trial))
    return hi, records


def calibrate(doc: Mapping[str, Any], n: int, trials: int, quorum: float,
              start: float = 1.0) -> Tuple[float, List[Tuple[float, bool]], List[ExperimentRecord]]:
    """Smallest ``start * 2**j`` whose batch at ``n`` meets the quorum, for the doc's method.

    ``doc`` is a configuration without ``T``/``C``/``search``; each probe stops as soon as
    the quorum is out of reach.  Returns the constant, the probe history and all records.
    """
    cfg = validate_config({**doc, "ns": [n], "C": start})
    if cfg["method"] == "exact" or "T" in doc or "search" in doc:
        raise ConfigError("calibration needs a palette method without T or search", "$")
    pattern = parse_pattern(cfg["pattern"], cfg.get("k", 2))
    params = RamseyParams.from_pattern(pattern, cfg["q"])
    allowed = trials - math.ceil(quorum * trials - 1e-12)
    records: List[ExperimentRecord] = []

    def succeeds(C: float) -> bool:
        probe = {**cfg, "C": C}
        T, _ = _palette_for(probe, params, n)
        recs = _batch(probe, pattern, n, T, C, trials, stop_after_failures=allowed + 1)
        records.extend(recs)
        return len(recs) == trials and sum(r.success for r in recs) >= quorum * trials - 1e-12

    C, history = calibrate_constant(succeeds, start=start)
    return C, history, records


def run_experiment(doc: Mapping[str, Any], out_dir=None) -> ExperimentResult:
    """Run a configuration document; records come out ordered by (n, T, trial)."""
    cfg = validate_config(doc)
    pattern = parse_pattern(cfg["pattern"], cfg.get("k", 2))
    params = RamseyParams.from_pattern(pattern, cfg["q"])
    trials = cfg.get("trials", 1)
    records: List[ExperimentRecord] = []
    min_T: Dict[int, Optional[int]] = {}
    for n in cfg["ns"]:
        if cfg["method"] == "exact":
            records.extend(_exact_rows(cfg, pattern, params, n, trials))
        elif "search" in cfg:
            best, recs = _bisect(cfg, pattern, params, n, trials)
            min_T[n] = best
            records.extend(recs)
        else:
            T, C = _palette_for(cfg, params, n)
            records.extend(_batch(cfg, pattern, n, T, C, trials))
    result = ExperimentResult(records, min_T)
    if out_dir is not None:
        result.save(out_dir)
    return result


def _exact_rows(cfg, pattern: PatternGraph, params: RamseyParams, n: int,
                trials: int) -> List[ExperimentRecord]:
    rows = []
    for trial in range(trials):
        base = dict(k=params.k, p=params.p, q=params.q, r=params.r,
                    pattern_hash=pattern.fingerprint(), n=n, method="exact", C=None,
                    seed=cfg.get("seed", 0), trial=trial)
        start = time.perf_counter()
        try:
            res = exact_min_colors(n, params.k, pattern, params.q,
                                   guard=cfg.get("guard", DEFAULT_GUARD))
        except SizeLimitError:
            rows.append(ExperimentRecord(**base, T=0, success=False, colors_used=0, violations=0,
                                         error="size-limit", wall_time=time.perf_counter() - start))
            continue
        rows.append(ExperimentRecord(**base, T=res.value, success=True, colors_used=res.value,
                                     violations=0, wall_time=time.perf_counter() - start))
    return rows


def load_config(path) -> Dict[str, Any]:
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(str(exc), "$") from None


@dataclass
class FitResult:
    slope: float
    intercept: float
    residual: float
    slope_compound: float
    intercept_compound: float
    residual_compound: float
    ns: List[int]
    Ts: List[float]


def min_successful_T(records: Iterable[ExperimentRecord], quorum: float = 0.8) -> Dict[int, int]:
    """Per n, the smallest T whose trials meet the success quorum."""
    groups: Dict[Tuple[int, int], List[bool]] = {}
    for rec in records:
        groups.setdefault((rec.n, rec.T), []).append(rec.success)
    best: Dict[int, int] = {}
    for (n, T), flags in groups.items():
        if sum(flags) >= quorum * len(flags) - 1e-12 and (n not in best or T < best[n]):
            best[n] = T
    return best


def _lstsq(x: np.ndarray, y: np.ndarray) -> Tuple[float, float, float]:
    A = np.stack([x, np.ones_like(x)], axis=1)
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    return float(coef[0]), float(coef[1]), float(np.sqrt(np.mean(resid ** 2)))


def fit_exponent(data: Union[Mapping[int, float], Iterable[ExperimentRecord]],
                 p_minus_k: Optional[int] = None, quorum: float = 0.8) -> FitResult:
    """Least-squares slope of ln T against ln n and against ln(n^(p-k) / ln n).

    ``data`` maps n to the minimum successful T, or is a record list reduced with
    ``min_successful_T``.  Residuals are root-mean-square.
    """
    if isinstance(data, Mapping):
        table = {int(n): float(T) for n, T in data.items() if T is not None}
    else:
        recs = list(data)
        table = {n: float(T) for n, T in min_successful_T(recs, quorum).items()}
        if p_minus_k is None and recs:
            p_minus_k = recs[0].p - recs[0].k
    if len(table) < 4:
        raise AnalysisError(f"need at least 4 distinct n with successes, got {len(table)}")
    if p_minus_k is None:
        raise AnalysisError("p - k is needed for the compound predictor")
    ns = sorted(table)
    if min(ns) < 2:
        raise AnalysisError("n must be at least 2 for ln n > 0")
    x = np.log(np.array(ns, dtype=float))
    y = np.log(np.array([table[n] for n in ns]))
    slope, icpt, res = _lstsq(x, y)
    xc = p_minus_k * x - np.log(x)
    slope_c, icpt_c, res_c = _lstsq(xc, y)
    return FitResult(slope, icpt, res, slope_c, icpt_c, res_c, ns, [table[n] for n in ns])
