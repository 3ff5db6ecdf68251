"""Experiment harness: seeded trials on a thread pool with CSV or JSON reports."""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Callable

import numpy as np

from . import branching
from .components import bad_vertices, census, label_components, longest_bare_path
from .graph import ComponentGraph
from .hypercube import all_ones
from .paths import graph_diameter, shortest_path
from .percolation import EdgeRound, PercolationSample, SprinklingPair
from .seeds import derive_seed
from .walk import estimate_mixing, expansion_scan, sample_starts


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    experiment: str
    d: tuple[int, ...] = (12,)
    c: float = 2.0
    trials: int = 10
    seed: int = 1
    delta: float = 0.5
    epsilon: float = 0.1
    k1: float = 5.0
    kmax: int = 5
    starts: int = 8
    start_strategy: str = "peripheral"
    tmax: int = 100000
    sizes: tuple[int, ...] | None = None
    sets: int = 10
    exact_limit: int = 40000
    threads: int = 1
    out: str | None = None
    format: str = "csv"

    # fields that change where or how fast results appear, never what they are
    RUNTIME_ONLY = ("threads", "out", "format")

    def __post_init__(self):
        self.d = tuple(int(x) for x in np.atleast_1d(self.d))
        if self.sizes is not None:
            self.sizes = tuple(int(x) for x in self.sizes)
        self.validate()

    def validate(self) -> None:
        def need(ok: bool, name: str, expected: str):
            if not ok:
                raise ConfigError(f"{name}={getattr(self, name)!r}: expected {expected}")

        need(self.experiment in EXPERIMENTS, "experiment", f"one of {sorted(EXPERIMENTS)}")
        need(len(self.d) > 0 and all(1 <= x <= 30 for x in self.d), "d", "dimensions in [1, 30]")
        need(all(0 <= self.c <= x for x in self.d), "c", "0 <= c <= d")
        need(self.trials >= 1, "trials", ">= 1")
        need(0 <= self.seed < 1 << 64, "seed", "a 64-bit unsigned integer")
        need(0 < self.delta < self.c or self.experiment != "sprinkle", "delta", "0 < delta < c")
        need(0 < self.epsilon < 1, "epsilon", "(0, 1)")
        need(self.k1 >= 1, "k1", ">= 1")
        need(self.kmax >= 1, "kmax", ">= 1")
        need(self.starts >= 1, "starts", ">= 1")
        need(self.start_strategy in ("peripheral", "uniform"), "start_strategy", "peripheral or uniform")
        need(self.tmax >= 1, "tmax", ">= 1")
        need(self.sets >= 1, "sets", ">= 1")
        need(self.exact_limit >= 0, "exact_limit", ">= 0")
        need(self.threads >= 1, "threads", ">= 1")
        need(self.format in ("csv", "json"), "format", "csv or json")

    def canonical(self) -> str:
        """One-line key=value echo of everything that determines the results."""
        parts = []
        for f in fields(self):
            if f.name in self.RUNTIME_ONLY:
                continue
            v = getattr(self, f.name)
            if isinstance(v, tuple):
                v = ",".join(map(str, v))
            parts.append(f"{f.name}={v}")
        return " ".join(parts)


@dataclass(frozen=True)
class TrialRow:
    d: int
    trial: int
    seed: int
    values: dict[str, float]


# --- per-trial measurements -------------------------------------------------


def _giant_graph(sample: PercolationSample):
    lab = label_components(sample)
    return lab, ComponentGraph.from_sample(sample, lab.giant_vertices())


def _giant(cfg, d, seed):
    s = PercolationSample.make(d, cfg.c, seed)
    lab = label_components(s)
    bare = longest_bare_path(lab, s)
    return {
        "giant_size": lab.giant_size,
        "giant_fraction": lab.giant_size / s.n,
        "components": lab.n_components,
        "bare_path": bare.longest,
    }


def _census(cfg, d, seed):
    s = PercolationSample.make(d, cfg.c, seed)
    lab = label_components(s)
    cen = census(lab)
    out = {"giant_fraction": lab.giant_size / s.n}
    for k in range(1, cfg.kmax + 1):
        out[f"v{k}_fraction"] = cen.vertices_of_order(k) / s.n
    return out


def _diameter(cfg, d, seed):
    lab, g = _giant_graph(PercolationSample.make(d, cfg.c, seed))
    rep = graph_diameter(g, cfg.exact_limit, seed=seed)
    return {"diameter": rep.value, "exact": int(not rep.approximate), "lower_bound": rep.lower_bound, "giant_size": g.m}


def _mixing(cfg, d, seed):
    lab, g = _giant_graph(PercolationSample.make(d, cfg.c, seed))
    est = estimate_mixing(g, sample_starts(g, cfg.starts, seed, cfg.start_strategy), cfg.tmax)
    return {
        "t_mix": est.t_mix if est.mixed else cfg.tmax,
        "mixed": int(est.mixed),
        "drift": est.drift,
        "giant_size": g.m,
    }


def default_sizes(d: int) -> tuple[int, ...]:
    return tuple(2**j for j in range(4, d - 1))


def _expansion(cfg, d, seed):
    lab, g = _giant_graph(PercolationSample.make(d, cfg.c, seed))
    rep = expansion_scan(g, d, cfg.sizes or default_sizes(d), cfg.sets, seed)
    return {
        "expansion_min": rep.global_min,
        "small_min": min(rep.per_size.values(), default=math.inf),
        "large_min": min(rep.large.values(), default=math.inf),
        "giant_size": g.m,
    }


# bad-vertex counts are also reported at these fixed thresholds
EPSILON_SENSITIVITY = (0.05, 0.1, 0.2)


def _sprinkle(cfg, d, seed):
    pair = SprinklingPair(d, cfg.c, cfg.delta, seed)
    states = pair.scan()
    lab1, lab2 = label_components(pair.g1), label_components(pair.g2)
    n_edges = len(states)
    out = {
        "bad_count": bad_vertices(lab1, cfg.epsilon),
        "g1_giant": lab1.giant_size,
        "g2_giant": lab2.giant_size,
        "in_g1": np.count_nonzero(states == EdgeRound.IN_G1) / n_edges,
        "in_g2_only": np.count_nonzero(states == EdgeRound.IN_G2_ONLY) / n_edges,
        "closed": np.count_nonzero(states == EdgeRound.CLOSED) / n_edges,
    }
    for eps in EPSILON_SENSITIVITY:
        out[f"bad_eps{eps:g}"] = bad_vertices(lab1, eps)
    return out


def _antipodal(cfg, d, seed):
    path = shortest_path(PercolationSample.make(d, cfg.c, seed), 0, all_ones(d), math.floor(cfg.k1 * d))
    return {"connected": int(path is not None), "distance": -1 if path is None else len(path) - 1}


EXPERIMENTS: dict[str, Callable] = {
    "giant": _giant,
    "census": _census,
    "diameter": _diameter,
    "mixing": _mixing,
    "expansion": _expansion,
    "sprinkle": _sprinkle,
    "antipodal": _antipodal,
}


# --- running ----------------------------------------------------------------


@dataclass(frozen=True)
class Aggregate:
    n: int
    mean: float
    median: float
    stderr: float
    min: float
    max: float

    @classmethod
    def of(cls, xs) -> "Aggregate":
        a = np.asarray(xs, dtype=np.float64)
        se = float(a.std(ddof=1) / math.sqrt(len(a))) if len(a) > 1 else 0.0
        return cls(len(a), float(a.mean()), float(np.median(a)), se, float(a.min()), float(a.max()))


@dataclass(frozen=True)
class PowerLawFit:
    exponent: float
    intercept: float
    r2: float


def fit_power_law(points) -> PowerLawFit:
    """Least squares on (log d, log value)."""
    pts = [(float(x), float(y)) for x, y in points]
    if len({x for x, _ in pts}) < 3:
        raise ValueError("need at least 3 distinct d values")
    if any(x <= 0 or y <= 0 for x, y in pts):
        raise ValueError("d and values must be positive")
    lx = np.log([x for x, _ in pts])
    ly = np.log([y for _, y in pts])
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    r2 = 1.0 - resid.var() / ly.var() if ly.var() > 0 else 1.0
    return PowerLawFit(float(slope), float(intercept), float(r2))


@dataclass
class SummaryReport:
    config: str
    aggregates: dict[int, dict[str, Aggregate]]
    theory: dict[str, float]
    verdicts: dict[str, bool] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "aggregates": {str(d): {k: asdict(a) for k, a in cols.items()} for d, cols in self.aggregates.items()},
            "theory": self.theory,
            "verdicts": self.verdicts,
        }


def summarize(cfg: ExperimentConfig, rows: list[TrialRow]) -> SummaryReport:
    aggs: dict[int, dict[str, Aggregate]] = {}
    for d in cfg.d:
        sub = [r for r in rows if r.d == d]
        aggs[d] = {k: Aggregate.of([r.values[k] for r in sub]) for k in sub[0].values}
    theory: dict[str, float] = {}
    if cfg.c > 0:
        theory["y"] = branching.survival(cfg.c)
        for k in range(1, cfg.kmax + 1):
            theory[f"borel_{k}"] = branching.borel_weight(cfg.c, k)
    return SummaryReport(cfg.canonical(), aggs, theory, _verdicts(cfg, aggs, theory))


def _verdicts(cfg, aggs, theory) -> dict[str, bool]:
    out: dict[str, bool] = {}
    if cfg.experiment == "giant" and cfg.c > 1:
        for d, a in aggs.items():
            out[f"giant_mean_d{d}"] = abs(a["giant_fraction"].mean - theory["y"]) <= 0.02
    if cfg.experiment == "census" and cfg.c > 0:
        for d, a in aggs.items():
            for k in range(1, cfg.kmax + 1):
                b = theory[f"borel_{k}"]
                out[f"census_k{k}_d{d}"] = abs(a[f"v{k}_fraction"].mean - b) <= 0.15 * b
    if len(cfg.d) >= 3:
        key, band = {"diameter": ("diameter", (0.7, 1.4)), "mixing": ("t_mix", (1.5, 2.8))}.get(cfg.experiment, (None, None))
        if key:
            fit = fit_power_law([(d, aggs[d][key].median) for d in cfg.d])
            out[f"{key}_exponent"] = band[0] <= fit.exponent <= band[1]
    return out


def run_trials(cfg: ExperimentConfig) -> list[TrialRow]:
    fn = EXPERIMENTS[cfg.experiment]
    tasks = [(d, i, derive_seed(cfg.seed, i)) for d in cfg.d for i in range(cfg.trials)]

    def one(task):
        d, i, s = task
        return TrialRow(d, i, s, {k: float(v) for k, v in fn(cfg, d, s).items()})

    if cfg.threads == 1:
        rows = [one(t) for t in tasks]
    else:
        with ThreadPoolExecutor(cfg.threads) as pool:
            rows = list(pool.map(one, tasks))
    rows.sort(key=lambda r: (r.d, r.trial))
    for r in rows:
        bad = [k for k, v in r.values.items() if not math.isfinite(v)]
        if bad:
            raise ValueError(f"non-finite {bad} in trial {r.trial} at d={r.d}")
    return rows


@dataclass
class RunResult:
    config: ExperimentConfig
    rows: list[TrialRow]
    summary: SummaryReport

    def render(self) -> str:
        return to_json(self) if self.config.format == "json" else to_csv(self.config, self.rows)


def run(cfg: ExperimentConfig) -> RunResult:
    rows = run_trials(cfg)
    result = RunResult(cfg, rows, summarize(cfg, rows))
    if cfg.out:
        Path(cfg.out).write_text(result.render())
    return result


# --- serialization ----------------------------------------------------------


def _fmt(v: float) -> str:
    return str(int(v)) if v.is_integer() and abs(v) < 2**53 else repr(v)


def to_csv(cfg: ExperimentConfig, rows: list[TrialRow]) -> str:
    buf = io.StringIO()
    buf.write(f"# config: {cfg.canonical()}\n")
    w = csv.writer(buf, lineterminator="\n")
    cols = list(rows[0].values) if rows else []
    w.writerow(["d", "trial", "seed", *cols])
    for r in rows:
        w.writerow([r.d, r.trial, r.seed, *(_fmt(r.values[c]) for c in cols)])
    return buf.getvalue()


def read_csv(text: str) -> tuple[str, list[TrialRow]]:
    lines = text.splitlines()
    if not lines or not lines[0].startswith("# config: "):
        raise ValueError("missing config line")
    reader = csv.reader(lines[1:])
    header = next(reader)
    rows = []
    for rec in reader:
        vals = {k: float(v) for k, v in zip(header[3:], rec[3:])}
        rows.append(TrialRow(int(rec[0]), int(rec[1]), int(rec[2]), vals))
    return lines[0][len("# config: ") :], rows


def to_json(result: RunResult) -> str:
    payload = {
        "config": result.config.canonical(),
        "rows": [asdict(r) for r in result.rows],
        "summary": result.summary.to_dict(),
    }
    return json.dumps(payload, indent=1, sort_keys=True) + "\n"


def read_json(text: str) -> tuple[str, list[TrialRow]]:
    data = json.loads(text)
    return data["config"], [TrialRow(r["d"], r["trial"], r["seed"], r["values"]) for r in data["rows"]]
