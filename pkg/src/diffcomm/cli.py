"""Command-line entry point: ``diffcomm <subcommand> ...``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .baselines import LpaConfig, lpa_detect
from .diffusion import InfoMatrix, ModelConfig, run_diffusion
from .exceptions import ConfigError, FormatError, StateError
from .game import GameConfig, run_game
from .generators import ErConfig, GnConfig, generate_er, generate_gn
from .graph import (DISJOINT, OVERLAPPING, build_event_stream, format_communities,
                    format_edge_list, read_communities, read_edge_list)
from .hdf import example_hdf, load_hdf
from .metrics import fccn, modularity, nmi_overlapping
from .pipeline import DatasetSpec, ExperimentConfig, run_pipeline, write_outputs


def _write(path, text: str) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text)


def _truth_path(out: str, given: str | None) -> str:
    return given or f"{out}.communities"


def cmd_gen_gn(a):
    g, truth = generate_gn(GnConfig(a.mu, a.seed, a.wiring))
    _write(a.out, format_edge_list(g, a.one_based))
    _write(_truth_path(a.out, a.truth_out), format_communities(truth, one_based=a.one_based))


def cmd_gen_er(a):
    g = generate_er(ErConfig(a.n, a.p, a.seed))
    _write(a.out, format_edge_list(g, a.one_based))


def cmd_diffuse(a):
    g = read_edge_list(a.graph, one_based=a.one_based)
    f = load_hdf(a.hdf) if a.hdf else example_hdf()
    cfg = ModelConfig(model=a.model, beta=f.beta, p_m=a.p_m, c_accel=a.c_accel, init=a.init,
                      epochs=a.epochs, runs=a.runs, seed=a.seed)
    stream = build_event_stream(g, cfg.epochs, a.seed)
    res = run_diffusion(cfg, g, stream, f)
    _write(a.out, res.info.to_tsv())
    if a.trajectory:
        _write(a.trajectory, res.trajectory_csv())


def cmd_detect(a):
    g = read_edge_list(a.graph, one_based=a.one_based)
    if a.algo == "lpa":
        cover = lpa_detect(g, LpaConfig(seed=a.seed))
    else:
        if not a.info:
            raise ConfigError("--info is required unless --algo lpa")
        info = InfoMatrix.from_tsv(Path(a.info).read_text())
        if info.n < g.n:
            info = InfoMatrix.from_array(_pad(info.entries, g.n), info.run_count)
        mode = OVERLAPPING if a.mode == "overlap" else DISJOINT
        res = run_game(g, info, GameConfig(seed=a.seed), mode=mode, lam=a.lam)
        cover = res.cover
        print(f"status={res.status} picks={res.picks} communities={len(cover)}", file=sys.stderr)
    _write(a.out, format_communities(cover, one_based=a.one_based))


def _pad(arr, n):
    import numpy as np

    out = np.zeros((n, n))
    out[: arr.shape[0], : arr.shape[1]] = arr
    return out


def cmd_eval(a):
    g = read_edge_list(a.graph, one_based=a.one_based) if a.graph else None
    n = g.n if g is not None else None
    det = read_communities(a.detected, format=a.detected_format, one_based=a.one_based, n=n)
    truth = None
    if a.truth:
        truth = read_communities(a.truth, format=a.truth_format, one_based=a.one_based,
                                 n=n if n is not None else det.n)
    n = max(det.n, truth.n if truth is not None else 0) if n is None else n
    out = {"nmi": None, "fccn": None, "modularity": None}
    if truth is not None:
        out["nmi"] = nmi_overlapping(det, truth, n)
        out["fccn"] = fccn(det, truth, n)
    if g is not None and det.mode == DISJOINT:
        out["modularity"] = modularity(g, det)
    wanted = [m.strip() for m in a.metrics.split(",")] if a.metrics else list(out)
    _write(a.out, json.dumps({k: out[k] for k in wanted if k in out}, sort_keys=True) + "\n")


def _print_summary(paths):
    for name, p in paths.items():
        print(f"wrote {p}", file=sys.stderr)


def cmd_sweep(a):
    if a.config:
        cfg = ExperimentConfig.load(a.config)
    else:
        mus = tuple(float(x) for x in a.mu.split(","))
        cfg = ExperimentConfig(datasets=(DatasetSpec("gn", "gn", mu=mus),),
                               algorithms=tuple(a.algorithms.split(",")),
                               repeats=a.repeats, seed=a.seed or 0)
    if a.seed is not None:
        cfg = _with(cfg, seed=a.seed)
    records = run_pipeline(cfg, a.workers)
    _print_summary(write_outputs(cfg, records, a.out))


def cmd_pipeline(a):
    cfg = ExperimentConfig.load(a.config)
    if a.seed is not None:
        cfg = _with(cfg, seed=a.seed)
    records = run_pipeline(cfg, a.workers)
    _print_summary(write_outputs(cfg, records, a.out))


def _with(cfg, **kw):
    import dataclasses

    return dataclasses.replace(cfg, **kw)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="diffcomm", description=(
        "Information-diffusion community detection: generate benchmarks, run "
        "diffusion, detect communities, evaluate, and run experiment pipelines."))
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, seed=True):
        if seed:
            sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--one-based", action="store_true", help="node ids in files start at 1")

    sp = sub.add_parser("gen-gn", help="GN benchmark graph and its planted communities")
    sp.add_argument("--mu", type=float, required=True)
    sp.add_argument("--out", required=True, help="edge-list path")
    sp.add_argument("--truth-out", help="community file (default <out>.communities)")
    sp.add_argument("--wiring", choices=("expected", "regular"), default="expected")
    common(sp)
    sp.set_defaults(func=cmd_gen_gn)

    sp = sub.add_parser("gen-er", help="Erdos-Renyi G(n, p) graph")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--out", required=True)
    common(sp)
    sp.set_defaults(func=cmd_gen_er)

    sp = sub.add_parser("diffuse", help="run diffusion and dump the information matrix")
    sp.add_argument("--graph", required=True)
    sp.add_argument("--model", choices=("GADM", "EGADM", "PSODM"), default="PSODM")
    sp.add_argument("--hdf", help="schema file (default: built-in five-schema function)")
    sp.add_argument("--epochs", type=int, default=ModelConfig.epochs)
    sp.add_argument("--runs", type=int, default=ModelConfig.runs)
    sp.add_argument("--p-m", type=float, default=ModelConfig.p_m)
    sp.add_argument("--c-accel", type=float, default=ModelConfig.c_accel)
    sp.add_argument("--init", choices=("uniform", "zero"), default="uniform")
    sp.add_argument("--out", default="-", help="information-matrix TSV")
    sp.add_argument("--trajectory", help="write (epoch, total_fitness) CSV here")
    common(sp)
    sp.set_defaults(func=cmd_diffuse)

    sp = sub.add_parser("detect", help="detect communities")
    sp.add_argument("--graph", required=True)
    sp.add_argument("--info", help="information-matrix TSV from 'diffuse'")
    sp.add_argument("--algo", choices=("gid", "lpa"), default="gid")
    sp.add_argument("--mode", choices=("disjoint", "overlap"), default="disjoint")
    sp.add_argument("--lam", type=float, help="label cost in overlap mode")
    sp.add_argument("--out", default="-")
    common(sp)
    sp.set_defaults(func=cmd_detect)

    sp = sub.add_parser("eval", help="score a detected cover; prints JSON")
    sp.add_argument("--detected", required=True)
    sp.add_argument("--truth")
    sp.add_argument("--graph")
    sp.add_argument("--detected-format", choices=("per-line", "node-label"), default="per-line")
    sp.add_argument("--truth-format", choices=("per-line", "node-label"), default="per-line")
    sp.add_argument("--metrics", help="comma list of nmi,fccn,modularity")
    sp.add_argument("--out", default="-")
    common(sp, seed=False)
    sp.set_defaults(func=cmd_eval)

    sp = sub.add_parser("sweep", help="mu sweep on GN graphs")
    sp.add_argument("--config")
    sp.add_argument("--mu", default="0.1,0.2,0.3,0.4,0.5")
    sp.add_argument("--algorithms", default="GPSODM")
    sp.add_argument("--repeats", type=int, default=10)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--workers", type=int)
    sp.add_argument("--out", default="results")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("pipeline", help="run a TOML experiment config")
    sp.add_argument("--config", required=True)
    sp.add_argument("--seed", type=int, help="override the config's master seed")
    sp.add_argument("--workers", type=int)
    sp.add_argument("--out", help="output directory (default: config 'out')")
    sp.set_defaults(func=cmd_pipeline)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (ConfigError, FormatError, StateError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
