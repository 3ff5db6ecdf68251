"""Command-line entry point for theory values, experiments and exhaustive checks."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import fields
from pathlib import Path

import numpy as np

from . import branching, combinatorics, kernels, lab, paths

EXPERIMENT_FLAGS = {
    "giant": [],
    "census": ["kmax"],
    "diameter": ["exact_limit"],
    "mixing": ["starts", "tmax", "start_strategy"],
    "expansion": ["sizes", "sets"],
    "sprinkle": ["delta", "epsilon"],
    "antipodal": ["k1"],
}


def _ints(text: str) -> list[int]:
    return [int(x) for x in text.replace(",", " ").split()]


def read_config_file(path: str) -> dict[str, str]:
    """key=value lines; blank lines and '#' comments ignored."""
    out = {}
    for n, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise lab.ConfigError(f"{path}:{n}: expected key=value")
        key, val = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = val
    return out


def _coerce(key: str, val):
    if not isinstance(val, str):
        return val
    if key in ("d", "sizes"):
        return tuple(_ints(val))
    if key in ("c", "delta", "epsilon", "k1"):
        return float(val)
    if key in ("trials", "seed", "kmax", "starts", "tmax", "sets", "exact_limit", "threads"):
        return int(val)
    return val


def build_config(name: str, args: argparse.Namespace) -> lab.ExperimentConfig:
    known = {f.name for f in fields(lab.ExperimentConfig)}
    merged: dict = {}
    if args.config:
        for k, v in read_config_file(args.config).items():
            if k not in known:
                raise lab.ConfigError(f"unknown config key {k!r}")
            merged[k] = _coerce(k, v)
    for k, v in vars(args).items():
        if k in known and v is not None:
            merged[k] = _coerce(k, v)
    merged["experiment"] = name
    return lab.ExperimentConfig(**merged)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--d", type=int, nargs="+", help="dimension(s)")
    p.add_argument("--c", type=float, help="p = c/d")
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int, help="root seed; trial seeds are derived from it")
    p.add_argument("--threads", type=int)
    p.add_argument("--out", help="write results here instead of stdout")
    p.add_argument("--format", choices=["csv", "json"])
    p.add_argument("--config", help="file of key=value lines; flags override it")


def _add_experiment_flags(p: argparse.ArgumentParser, name: str) -> None:
    for flag in EXPERIMENT_FLAGS[name]:
        opt = "--" + flag.replace("_", "-")
        if flag == "sizes":
            p.add_argument(opt, type=str, help="comma separated set sizes")
        elif flag == "start_strategy":
            p.add_argument(opt, choices=["peripheral", "uniform"])
        elif flag in ("delta", "epsilon", "k1"):
            p.add_argument(opt, type=float)
        else:
            p.add_argument(opt, type=int)


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cubeperc", description=__doc__)
    parser.add_argument("--backend", choices=["cython", "python"], help="kernel implementation")
    sub = parser.add_subparsers(dest="command", required=True)

    theory = sub.add_parser("theory", help="closed-form and numerical branching values")
    tsub = theory.add_subparsers(dest="what", required=True)
    p = tsub.add_parser("y", help="Poisson(c) survival probability")
    p.add_argument("--c", type=float, required=True)
    p = tsub.add_parser("borel", help="Borel total-progeny weights")
    p.add_argument("--c", type=float, required=True)
    p.add_argument("--kmax", type=int, default=10)
    p = tsub.add_parser("cutoff", help="order past which the Borel tail is below t/(4n)")
    p.add_argument("--c", type=float, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--t", type=int, required=True)

    for name in EXPERIMENT_FLAGS:
        p = sub.add_parser(name, help=f"{name} experiment")
        _add_common(p)
        _add_experiment_flags(p, name)

    p = sub.add_parser("tame", help="exact tame-path counts")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--k", type=int, required=True)

    verify = sub.add_parser("verify", help="exhaustive small-instance checks")
    vsub = verify.add_subparsers(dest="what", required=True)
    p = vsub.add_parser("harper")
    p.add_argument("--d", type=int, required=True)
    p = vsub.add_parser("trees")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p = vsub.add_parser("forests")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p = vsub.add_parser("decompose")
    p.add_argument("--n", type=int, default=200, help="random trees to check")
    p.add_argument("--seed", type=int, default=0)
    p = vsub.add_parser("switching")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    return parser


def _theory(args) -> dict:
    if args.what == "y":
        sol = branching.solve_poisson_survival(args.c)
        return {"c": args.c, "y": sol.survival, "residual": sol.residual, "iterations": sol.iterations}
    if args.what == "borel":
        return {"c": args.c, "weights": {k: branching.borel_weight(args.c, k) for k in range(1, args.kmax + 1)}}
    return {"c": args.c, "d": args.d, "t": args.t, "k": branching.tail_cutoff(args.t, 2**args.d, args.c)}


def random_tree(n: int, rng: np.random.Generator, max_degree: int) -> list[tuple[int, int]]:
    """Random recursive tree on n vertices with degrees capped at max_degree."""
    deg = [0] * n
    edges = []
    for v in range(1, n):
        choices = [u for u in range(v) if deg[u] < max_degree]
        u = int(rng.choice(choices))
        deg[u] += 1
        deg[v] += 1
        edges.append((u, v))
    return edges


def _verify(args) -> dict:
    if args.what == "harper":
        r = combinatorics.harper_check_exhaustive(args.d)
        return {"d": r.d, "subsets": r.subsets_checked, "violations": r.violations, "min_slack": r.min_slack,
                "attaining_set": list(r.attaining_set), "zero_slack_sets": r.zero_slack_sets}
    if args.what == "trees":
        lo, hi = combinatorics.subtree_bounds(args.d, args.k)
        return {"d": args.d, "k": args.k, "count": combinatorics.count_rooted_subtrees(args.d, 0, args.k),
                "lower": lo, "upper": hi}
    if args.what == "forests":
        roots = [0, 2**args.d - 1]
        return {"d": args.d, "k": args.k, "roots": roots, "count": combinatorics.count_forests(args.d, roots, args.k),
                "bound": combinatorics.forest_bound(len(roots), args.k, args.d)}
    if args.what == "decompose":
        rng = np.random.default_rng(args.seed)
        parts = 0
        for _ in range(args.n):
            n = int(rng.integers(1, 60))
            delta = int(rng.integers(2, 6))
            m0 = float(rng.uniform(1, 5))
            weight = {v: float(rng.uniform(0.01, 1)) * m0 for v in range(n)}
            tree = combinatorics.WeightedTree.from_edges(random_tree(n, rng, delta), weight)
            if tree.total() < m0:
                continue
            parts += len(combinatorics.decompose_weighted_tree(tree, m0, delta))
        return {"trees": args.n, "parts": parts, "violations": 0}
    f = combinatorics.DistinctInPrefix(args.d, args.k * args.d // 2)
    r = combinatorics.mc_switching_concentration(f, f.lipschitz, args.k, args.d, None, args.trials, args.seed)
    return {"d": args.d, "k": args.k, "t": r.t, "tail": r.tail, "stderr": r.stderr, "bound": r.bound,
            "max_jump": r.max_jump, "passed": r.passed}


def _print_summary(result: lab.RunResult) -> None:
    s = result.summary
    print(f"# {s.config}", file=sys.stderr)
    for d, cols in s.aggregates.items():
        for k, a in cols.items():
            print(f"d={d:<3d} {k:<15s} mean={a.mean:<12.6g} median={a.median:<12.6g} se={a.stderr:.3g}",
                  file=sys.stderr)
    for k, v in s.theory.items():
        print(f"theory {k} = {v:.6g}", file=sys.stderr)
    for k, v in s.verdicts.items():
        print(f"{'PASS' if v else 'FAIL'} {k}", file=sys.stderr)


def main(argv: list[str] | None = None) -> int:
    args = make_parser().parse_args(argv)
    if args.backend:
        kernels.use(args.backend)
    try:
        if args.command == "theory":
            print(json.dumps(_theory(args)))
        elif args.command == "tame":
            r = paths.enumerate_tame(args.d, args.k)
            print(json.dumps({"d": r.d, "k": r.k, "paths": r.paths, "tame": r.tame,
                              "sequences": r.upper_bound}))
        elif args.command == "verify":
            print(json.dumps(_verify(args)))
        else:
            cfg = build_config(args.command, args)
            result = lab.run(cfg)
            if not cfg.out:
                sys.stdout.write(result.render())
            _print_summary(result)
    except (ValueError, combinatorics.BoundViolation) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
