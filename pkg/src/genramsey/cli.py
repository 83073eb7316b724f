"""Command line entry point: ``genramsey <subcommand> ...``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import List, Optional

from .audit import audit
from .bes import bes_lower_bound, bes_substitution, classify_regime
from .coloring import make_lists, read_witness, verify_coloring, write_witness
from .encoder import SizeLimitError, budget
from .exact import exact_min_colors, exact_min_colors_list, export_cnf
from .greedy import GreedyConfig, colors_used, greedy_color
from .harness import ConfigError, load_config, run_experiment
from .hypergraph import (ParameterError, RamseyParams, complete_host, enumerate_copies, load_host,
                         parse_pattern)
from .lll import lll_budget, moser_tardos_color


def _common(p: argparse.ArgumentParser, need_q: bool = True) -> None:
    p.add_argument("--n", type=int, help="host vertices (complete host)")
    p.add_argument("--k", type=int, default=2, help="uniformity")
    p.add_argument("--pattern", default="K3", help="Kp or an edge-list file")
    if need_q:
        p.add_argument("--q", type=int, required=True, help="colors every copy must see")
    p.add_argument("--host", help="edge-list file instead of the complete host")


def _palette(p: argparse.ArgumentParser) -> None:
    p.add_argument("--colors", type=int, help="list size T")
    p.add_argument("--C", type=float, help="constant for the method's budget formula")
    p.add_argument("--lists", default="shared", choices=["shared", "disjoint", "random"])
    p.add_argument("--pool-size", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="genramsey", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("color-lll", help="Moser-Tardos resampling colorer")
    _common(p)
    _palette(p)
    p.add_argument("--max-resamples", type=int)

    p = sub.add_parser("color-greedy", help="conflict-free greedy colorer")
    _common(p)
    _palette(p)
    p.add_argument("--order", default="random-edge-permutation",
                   choices=["random-edge-permutation", "random-pair-stream"])
    p.add_argument("--retries", type=int, default=8)
    p.add_argument("--restarts", type=int, default=5)
    p.add_argument("--repair", action="store_true")

    p = sub.add_parser("verify", help="check a witness file")
    _common(p)
    p.add_argument("--witness", required=True)

    p = sub.add_parser("exact", help="exact minimum color count at tiny scale")
    _common(p)
    p.add_argument("--upper-hint", type=int)
    p.add_argument("--guard", type=int, default=21)
    p.add_argument("--colors", type=int, help="with --lists: decide this list assignment")
    p.add_argument("--lists", choices=["shared", "disjoint", "random"])
    p.add_argument("--pool-size", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")

    p = sub.add_parser("audit", help="degree statistics of H against the thresholds")
    _common(p)
    p.add_argument("--palette", type=int, required=True, help="audit palette 0..P-1")
    p.add_argument("--C", type=float, default=1.0, help="budget constant for D")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--size-cap", type=int)
    p.add_argument("--max-configs", type=int, default=2_000_000)
    p.add_argument("--out")

    p = sub.add_parser("cnf", help="export a DIMACS CNF")
    _common(p)
    p.add_argument("--colors", type=int, required=True)
    p.add_argument("--lists", choices=["shared", "disjoint", "random"])
    p.add_argument("--pool-size", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-symmetry", action="store_true", help="omit color symmetry breaking")
    p.add_argument("--out", help="file, default stdout")

    p = sub.add_parser("bes", help="Brown-Erdos-Sos lower bound from a color count")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--j", type=int, required=True)
    p.add_argument("--i", type=int, required=True)
    p.add_argument("--r-value", type=int, required=True)
    p.add_argument("--source", default="", help="provenance of r-value")

    p = sub.add_parser("experiment", help="run a JSON-configured batch")
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    return parser


def _host(args):
    if args.host:
        return load_host(args.host)
    if args.n is None:
        raise ParameterError("give --n or --host")
    return complete_host(args.n, args.k)


def _emit(doc, out_dir: Optional[str], name: str) -> None:
    text = json.dumps(doc, indent=2, sort_keys=True)
    print(text)
    if out_dir:
        Path(out_dir).mkdir(parents=True, exist_ok=True)
        (Path(out_dir) / name).write_text(text + "\n")


def _T(args, params: RamseyParams, n: int, method: str) -> int:
    if args.colors is not None:
        return args.colors
    if args.C is None:
        raise ParameterError("give --colors or --C")
    return lll_budget(n, params, args.C) if method == "lll" else budget(n, params, args.C).T


def _color(args, method: str) -> int:
    host = _host(args)
    pattern = parse_pattern(args.pattern, args.k)
    params = RamseyParams.from_pattern(pattern, args.q)
    index = enumerate_copies(host, pattern)
    T = _T(args, params, host.n, method)
    lists = make_lists(host, T, args.lists, args.seed, args.pool_size)
    if method == "lll":
        res = moser_tardos_color(host, pattern, args.q, lists, index, seed=args.seed,
                                 max_resamples=args.max_resamples)
        doc = {"resamples": res.resamples, "remaining_violations": res.remaining_violations}
    else:
        cfg = GreedyConfig(order=args.order, max_retries_per_edge=args.retries,
                           max_restarts=args.restarts, seed=args.seed, repair=args.repair)
        res = greedy_color(host, pattern, args.q, lists, index, params, cfg)
        doc = {"passes": res.passes, "kicks": res.kicks, "repaired": res.repaired}
        if res.failure is not None and not res.success:
            doc["stuck_edge"] = list(res.failure.edge)
            doc["stuck_list"] = res.failure.colors
            doc["conflicting_copies"] = {str(c): v for c, v in res.failure.conflicting_copies.items()}
    ok = res.success and verify_coloring(host, pattern, args.q, res.coloring, index).valid
    doc.update({"method": method, "n": host.n, "T": T, "success": bool(ok)})
    if ok:
        doc["colors_used"] = colors_used(res.coloring)
        if args.out:
            Path(args.out).mkdir(parents=True, exist_ok=True)
            write_witness(Path(args.out) / "witness.txt", res.coloring)
    _emit(doc, args.out, "result.json")
    return 0 if ok else 1


def _verify(args) -> int:
    host = _host(args)
    pattern = parse_pattern(args.pattern, args.k)
    index = enumerate_copies(host, pattern)
    phi = read_witness(host, args.witness)
    report = verify_coloring(host, pattern, args.q, phi, index)
    bad = [{"copy": i, "vertices": index.vertices[i].tolist(), "colors": c}
           for i, c in report.violations[:20]]
    print(json.dumps({"valid": report.valid, "violations": len(report), "first": bad}, indent=2))
    return 0 if report.valid else 1


def _exact(args) -> int:
    pattern = parse_pattern(args.pattern, args.k)
    if args.n is None:
        raise ParameterError("exact needs --n")
    if args.lists:
        if args.colors is None:
            raise ParameterError("--lists needs --colors")
        host = complete_host(args.n, args.k)
        lists = make_lists(host, args.colors, args.lists, args.seed, args.pool_size)
        phi = exact_min_colors_list(args.n, args.k, pattern, args.q, lists, guard=args.guard)
        doc = {"sat": phi is not None}
        if phi is not None and args.out:
            Path(args.out).mkdir(parents=True, exist_ok=True)
            write_witness(Path(args.out) / "witness.txt", phi)
        _emit(doc, args.out, "exact.json")
        return 0
    res = exact_min_colors(args.n, args.k, pattern, args.q, args.upper_hint, guard=args.guard)
    if args.out:
        Path(args.out).mkdir(parents=True, exist_ok=True)
        write_witness(Path(args.out) / "witness.txt", res.witness)
    _emit({"value": res.value, "nodes_explored": res.nodes_explored}, args.out, "exact.json")
    return 0


def _audit(args) -> int:
    host = _host(args)
    pattern = parse_pattern(args.pattern, args.k)
    params = RamseyParams.from_pattern(pattern, args.q)
    index = enumerate_copies(host, pattern)
    report = audit(host, range(args.palette), index, params, budget(host.n, params, args.C),
                   alpha=args.alpha, size_cap=args.size_cap, max_configs=args.max_configs)
    print(report.to_text(), end="")
    if args.out:
        Path(args.out).mkdir(parents=True, exist_ok=True)
        (Path(args.out) / "audit.json").write_text(report.to_json() + "\n")
    return 0


def _cnf(args) -> int:
    pattern = parse_pattern(args.pattern, args.k)
    if args.n is None:
        raise ParameterError("cnf needs --n")
    lists = None
    if args.lists:
        lists = make_lists(complete_host(args.n, args.k), args.colors, args.lists, args.seed,
                           args.pool_size)
    symmetry = None if not args.no_symmetry else False
    doc = export_cnf(args.n, args.k, pattern, args.q, args.colors, lists, symmetry=symmetry)
    if args.out:
        doc.write(args.out)
    else:
        sys.stdout.write(doc.to_dimacs())
    return 0


def _bes(args) -> int:
    bound = bes_lower_bound(args.n, args.k, args.j, args.i, args.r_value)
    p, q = bes_substitution(args.k, args.j, args.i)
    regime = classify_regime(args.k, p, q)
    print(json.dumps({"lower_bound": bound, "p": p, "q": q, "regime": regime.flags(),
                      "r_value": args.r_value, "r_value_source": args.source}, indent=2))
    return 0


def _experiment(args) -> int:
    result = run_experiment(load_config(args.config), out_dir=args.out)
    ok = sum(r.success for r in result.records)
    doc = {"records": len(result.records), "successes": ok,
           "min_T": {str(n): t for n, t in sorted(result.min_T.items())}}
    print(json.dumps(doc, indent=2))
    return 0


COMMANDS = {"color-lll": lambda a: _color(a, "lll"), "color-greedy": lambda a: _color(a, "greedy"),
            "verify": _verify, "exact": _exact, "audit": _audit, "cnf": _cnf, "bes": _bes,
            "experiment": _experiment}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (ParameterError, SizeLimitError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
