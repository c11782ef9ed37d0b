"""Experiment configuration, per-cell seeding, execution and result emission.

A config is TOML::

    seed = 7
    repeats = 10
    algorithms = ["GGADM", "GEGADM", "GPSODM", "LPA"]
    metrics = ["nmi", "fccn", "modularity"]
    out = "results"

    [[datasets]]
    name = "gn"
    kind = "gn"            # gn | er | karate | files
    mu = [0.1, 0.2, 0.3]   # a list makes this a sweep

    [hdf]                  # omit for the built-in five-schema function
    file = "f.hdf"         # or: beta, n_order1, n_higher, score_low, score_high

    [diffusion]
    epochs = 20
    runs = 10

    [game]
    mode = "disjoint"

Relative paths resolve against the config file's directory.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import io
import json
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

from .baselines import LpaConfig, lpa_detect
from .diffusion import ModelConfig, run_diffusion
from .exceptions import ConfigError
from .game import GameConfig, run_game
from .generators import ErConfig, GnConfig, generate_er, generate_gn
from .graph import DISJOINT, OVERLAPPING, build_event_stream, read_communities, read_edge_list
from .hdf import HdfFunction, build_random_hdf, example_hdf, load_hdf
from .metrics import fccn, modularity, nmi_overlapping

ALGORITHMS = {"GGADM": "GADM", "GEGADM": "EGADM", "GPSODM": "PSODM", "LPA": None}
METRICS = ("nmi", "fccn", "modularity")
DATASET_KINDS = ("gn", "er", "karate", "files")
_DATA = Path(__file__).parent / "data"
_U64 = (1 << 64) - 1


def stable_hash(*parts) -> int:
    """64-bit hash of the ``repr`` of ``parts``; identical across processes and runs."""
    h = hashlib.blake2b(repr(parts).encode(), digest_size=8)
    return int.from_bytes(h.digest(), "little")


def cell_seed(master: int, dataset: str, algorithm: str, repeat: int) -> int:
    return (int(master) ^ stable_hash(dataset, algorithm, repeat)) & _U64


def graph_seed(master: int, dataset: str, repeat: int) -> int:
    # shared by every algorithm so a repeat compares them on the same graph
    return (int(master) ^ stable_hash(dataset, "graph", repeat)) & _U64


@dataclass(frozen=True)
class DatasetSpec:
    name: str
    kind: str
    mu: tuple[float, ...] = ()
    n: int = 200
    p: float = 0.05
    wiring: str = "expected"
    edges: str | None = None
    truth: str | None = None
    truth_format: str = "per-line"
    one_based: bool = False

    @property
    def swept(self) -> bool:
        return self.kind == "gn" and len(self.mu) > 1

    def points(self) -> list[tuple[str, float | None]]:
        """``(dataset id, mu)`` for every grid point."""
        if self.kind != "gn":
            return [(self.name, None)]
        if not self.swept:
            return [(self.name, self.mu[0])]
        return [(f"{self.name}[mu={m:g}]", m) for m in self.mu]


@dataclass(frozen=True)
class ExperimentConfig:
    datasets: tuple[DatasetSpec, ...]
    algorithms: tuple[str, ...] = ("GGADM", "GEGADM", "GPSODM")
    metrics: tuple[str, ...] = METRICS
    repeats: int = 10
    seed: int = 0
    out: str = "results"
    hdf: dict = field(default_factory=dict)
    diffusion: dict = field(default_factory=dict)
    game: dict = field(default_factory=dict)
    workers: int = 1

    def __post_init__(self):
        if self.repeats < 1:
            raise ConfigError("repeats must be at least 1")
        if not self.datasets:
            raise ConfigError("config lists no datasets")
        for a in self.algorithms:
            if a not in ALGORITHMS:
                raise ConfigError(f"unknown algorithm {a!r}; choose from {sorted(ALGORITHMS)}")
        for m in self.metrics:
            if m not in METRICS:
                raise ConfigError(f"unknown metric {m!r}")
        for d in self.datasets:
            if d.kind not in DATASET_KINDS:
                raise ConfigError(f"dataset {d.name!r}: unknown kind {d.kind!r}")
            if d.kind == "gn" and not d.mu:
                raise ConfigError(f"dataset {d.name!r}: gn needs mu")
            for m in d.mu:
                if not 0.0 <= m <= 1.0:
                    raise ConfigError(f"dataset {d.name!r}: mu {m} outside [0, 1]")
            if d.kind == "files":
                if not d.edges:
                    raise ConfigError(f"dataset {d.name!r}: files needs an edges path")
                for p in (d.edges, d.truth):
                    if p and not Path(p).is_file():
                        raise ConfigError(f"dataset {d.name!r}: no such file {p}")
        names = [d.name for d in self.datasets]
        if len(set(names)) != len(names):
            raise ConfigError("dataset names must be unique")
        if "file" in self.hdf and not Path(self.hdf["file"]).is_file():
            raise ConfigError(f"no such HDF file {self.hdf['file']}")
        if self.game.get("mode", DISJOINT) not in ("disjoint", "overlap", "overlapping"):
            raise ConfigError(f"unknown game mode {self.game['mode']!r}")

    @classmethod
    def from_dict(cls, data: dict, base: Path | None = None) -> "ExperimentConfig":
        data = dict(data)
        base = base or Path(".")

        def resolve(p):
            return None if p is None else str(base / p) if not Path(p).is_absolute() else p

        sets = []
        for raw in data.pop("datasets", []):
            raw = dict(raw)
            known = {f.name for f in dataclasses.fields(DatasetSpec)}
            extra = set(raw) - known
            if extra:
                raise ConfigError(f"unknown dataset keys {sorted(extra)}")
            raw.setdefault("name", raw.get("kind", "dataset"))
            mu = raw.get("mu", ())
            try:
                raw["mu"] = tuple(float(m) for m in (mu if isinstance(mu, (list, tuple)) else [mu]))
            except (TypeError, ValueError):
                raise ConfigError(f"dataset {raw['name']!r}: mu must be numeric") from None
            raw["edges"] = resolve(raw.get("edges"))
            raw["truth"] = resolve(raw.get("truth"))
            sets.append(DatasetSpec(**raw))
        hdf = dict(data.pop("hdf", {}))
        if "file" in hdf:
            hdf["file"] = resolve(hdf["file"])
        known = {f.name for f in dataclasses.fields(cls)} - {"datasets", "hdf"}
        extra = set(data) - known
        if extra:
            raise ConfigError(f"unknown config keys {sorted(extra)}")
        for key in ("algorithms", "metrics"):
            if key in data:
                data[key] = tuple(data[key])
        return cls(datasets=tuple(sets), hdf=hdf, **data)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        path = Path(path)
        try:
            data = tomllib.loads(path.read_text())
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from None
        return cls.from_dict(data, path.parent)


RECORD_FIELDS = ("dataset", "algorithm", "repeat", "seed", "mu", "n_nodes", "n_edges",
                 "community_count", "largest_community", "nmi", "fccn", "modularity",
                 "converged", "status", "wall_time", "failed", "reason")
TIMING_FIELDS = ("wall_time",)


@dataclass
class ResultRecord:
    dataset: str
    algorithm: str
    repeat: int
    seed: int
    mu: float | None = None
    n_nodes: int | None = None
    n_edges: int | None = None
    community_count: int | None = None
    largest_community: int | None = None
    nmi: float | None = None
    fccn: float | None = None
    modularity: float | None = None
    converged: bool | None = None
    status: str | None = None
    wall_time: float | None = None
    failed: bool = False
    reason: str = ""

    def key(self):
        return (self.dataset, self.algorithm, self.repeat)

    def as_dict(self, timing: bool = True) -> dict[str, Any]:
        d = dataclasses.asdict(self)
        if not timing:
            for k in TIMING_FIELDS:
                d.pop(k)
        return d


def resolve_hdf(spec: dict, master: int) -> HdfFunction:
    if not spec:
        return example_hdf()
    if "file" in spec:
        return load_hdf(spec["file"])
    try:
        return build_random_hdf(int(spec.get("beta", 10)), int(spec.get("n_order1", 3)),
                                int(spec.get("n_higher", 2)), float(spec.get("score_low", -5)),
                                float(spec.get("score_high", 5)),
                                np.random.default_rng(master ^ stable_hash("hdf")))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad [hdf] section: {exc}") from None


def build_dataset(spec: DatasetSpec, mu, seed: int):
    """``(graph, truth)``; truth is ``None`` when the dataset has none."""
    if spec.kind == "gn":
        return generate_gn(GnConfig(mu, seed, spec.wiring))
    if spec.kind == "er":
        return generate_er(ErConfig(spec.n, spec.p, seed)), None
    if spec.kind == "karate":
        g = read_edge_list(_DATA / "karate.edges")
        return g, read_communities(_DATA / "karate.truth", format="node-label", n=g.n)
    g = read_edge_list(spec.edges, one_based=spec.one_based)
    truth = None
    if spec.truth:
        truth = read_communities(spec.truth, format=spec.truth_format,
                                 one_based=spec.one_based, n=g.n)
    return g, truth


def _game_kwargs(game: dict) -> tuple[GameConfig, dict]:
    game = dict(game)
    mode = game.pop("mode", "disjoint")
    kw = {"mode": OVERLAPPING if mode in ("overlap", "overlapping") else DISJOINT}
    for k in ("lam", "m_norm"):
        if k in game:
            kw[k] = game.pop(k)
    return GameConfig(**game), kw


def run_cell(config: ExperimentConfig, spec: DatasetSpec, dataset_id: str, mu, algorithm: str,
             repeat: int, hdf: HdfFunction | None = None) -> ResultRecord:
    """One (dataset point, algorithm, repeat) cell. Never raises on stage errors."""
    seed = cell_seed(config.seed, dataset_id, algorithm, repeat)
    rec = ResultRecord(dataset_id, algorithm, repeat, seed, mu)
    t0 = time.perf_counter()
    try:
        graph, truth = build_dataset(spec, mu, graph_seed(config.seed, dataset_id, repeat))
        rec.n_nodes, rec.n_edges = graph.n, graph.n_edges
        model = ALGORITHMS[algorithm]
        if model is None:
            cover = lpa_detect(graph, LpaConfig(seed=seed))
            rec.converged, rec.status = True, "converged"
        else:
            f = hdf if hdf is not None else resolve_hdf(config.hdf, config.seed)
            mcfg = ModelConfig(**{"model": model, "beta": f.beta, **config.diffusion, "seed": seed})
            stream = build_event_stream(graph, mcfg.epochs, seed)
            info = run_diffusion(mcfg, graph, stream, f).info
            gcfg, kw = _game_kwargs({**config.game, "seed": seed})
            res = run_game(graph, info, gcfg, **kw)
            cover = res.cover
            rec.converged, rec.status = res.converged, res.status
        rec.community_count = len(cover)
        rec.largest_community = max(cover.sizes(), default=0)
        if truth is not None and "nmi" in config.metrics:
            rec.nmi = nmi_overlapping(cover, truth)
        if truth is not None and "fccn" in config.metrics:
            rec.fccn = fccn(cover, truth)
        if "modularity" in config.metrics and cover.mode == DISJOINT:
            rec.modularity = modularity(graph, cover)
    except Exception as exc:  # recorded, pipeline continues
        rec.failed = True
        rec.reason = f"{type(exc).__name__}: {exc}"
    rec.wall_time = time.perf_counter() - t0
    return rec


def cells(config: ExperimentConfig):
    for spec in config.datasets:
        for dataset_id, mu in spec.points():
            for algorithm in config.algorithms:
                for r in range(config.repeats):
                    yield spec, dataset_id, mu, algorithm, r


def _run_star(args):
    return run_cell(*args)


def run_pipeline(config: ExperimentConfig, workers: int | None = None) -> list[ResultRecord]:
    """Every cell of dataset x grid point x algorithm x repeat, sorted by cell key."""
    try:
        hdf = resolve_hdf(config.hdf, config.seed)
    except Exception as exc:
        hdf, hdf_error = None, exc
    else:
        hdf_error = None
    jobs = list(cells(config))
    workers = workers or config.workers
    if hdf_error is not None:
        out = []
        for spec, dataset_id, mu, algorithm, r in jobs:
            rec = ResultRecord(dataset_id, algorithm, r,
                               cell_seed(config.seed, dataset_id, algorithm, r), mu,
                               failed=True, reason=f"{type(hdf_error).__name__}: {hdf_error}")
            out.append(rec)
    elif workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            out = list(pool.map(_run_star, [(config, *j, hdf) for j in jobs]))
    else:
        out = [run_cell(config, *j, hdf=hdf) for j in jobs]
    order = {(d, a, r): k for k, (_, d, _, a, r) in enumerate(jobs)}
    return sorted(out, key=lambda rec: order[rec.key()])


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def records_csv(records, timing: bool = True) -> str:
    fields = [f for f in RECORD_FIELDS if timing or f not in TIMING_FIELDS]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(fields)
    for rec in records:
        d = rec.as_dict(timing)
        w.writerow([_fmt(d[f]) for f in fields])
    return buf.getvalue()


def records_jsonl(records, timing: bool = True) -> str:
    return "".join(json.dumps(r.as_dict(timing), sort_keys=True) + "\n" for r in records)


SUMMARY_FIELDS = ("dataset", "algorithm", "n_records", "n_failed", "n_valid",
                  "nmi_mean", "nmi_max", "fccn_mean", "fccn_max",
                  "modularity_mean", "modularity_max", "wall_time_mean", "community_count_mean")


def _mean(xs):
    return sum(xs) / len(xs) if xs else None


def emit_summary(records) -> list[dict]:
    """One row per (dataset, algorithm) in first-seen order.

    Null metric values are left out of that metric's mean and max;
    ``n_valid`` counts records with a non-null nmi.
    """
    if not records:
        raise ConfigError("no records to summarize")
    groups: dict[tuple[str, str], list[ResultRecord]] = {}
    for r in records:
        groups.setdefault((r.dataset, r.algorithm), []).append(r)
    rows = []
    for (dataset, algorithm), rs in groups.items():
        row = {"dataset": dataset, "algorithm": algorithm, "n_records": len(rs),
               "n_failed": sum(r.failed for r in rs)}
        for m in METRICS:
            vals = [getattr(r, m) for r in rs if getattr(r, m) is not None]
            row[f"{m}_mean"] = _mean(vals)
            row[f"{m}_max"] = max(vals) if vals else None
            if m == "nmi":
                row["n_valid"] = len(vals)
        row["wall_time_mean"] = _mean([r.wall_time for r in rs if r.wall_time is not None])
        row["community_count_mean"] = _mean(
            [r.community_count for r in rs if r.community_count is not None])
        rows.append(row)
    return rows


def summary_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SUMMARY_FIELDS)
    for row in rows:
        w.writerow([_fmt(row[f]) for f in SUMMARY_FIELDS])
    return buf.getvalue()


def sweep_curve(records, dataset: str) -> list[dict]:
    """Mean NMI and its standard error per (mu, algorithm) for one swept dataset."""
    prefix = f"{dataset}[mu="
    acc: dict[tuple[float, str], list[float]] = {}
    for r in records:
        if r.dataset.startswith(prefix) and r.nmi is not None:
            acc.setdefault((r.mu, r.algorithm), []).append(r.nmi)
    rows = []
    for (mu, algorithm), xs in sorted(acc.items()):
        mean = sum(xs) / len(xs)
        if len(xs) > 1:
            sd = math.sqrt(sum((x - mean) ** 2 for x in xs) / (len(xs) - 1))
            se = sd / math.sqrt(len(xs))
        else:
            se = None
        rows.append({"mu": mu, "algorithm": algorithm, "mean_nmi": mean, "stderr": se})
    return rows


def write_outputs(config: ExperimentConfig, records, out=None) -> dict[str, Path]:
    out = Path(out or config.out)
    out.mkdir(parents=True, exist_ok=True)
    paths = {"records.csv": out / "records.csv", "records.jsonl": out / "records.jsonl",
             "summary.csv": out / "summary.csv"}
    paths["records.csv"].write_text(records_csv(records))
    paths["records.jsonl"].write_text(records_jsonl(records))
    paths["summary.csv"].write_text(summary_csv(emit_summary(records)))
    for spec in config.datasets:
        if not spec.swept:
            continue
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("mu", "algorithm", "mean_nmi", "stderr"))
        for row in sweep_curve(records, spec.name):
            w.writerow([_fmt(row[k]) for k in ("mu", "algorithm", "mean_nmi", "stderr")])
        name = f"curve_{spec.name}.csv"
        paths[name] = out / name
        paths[name].write_text(buf.getvalue())
    return paths
