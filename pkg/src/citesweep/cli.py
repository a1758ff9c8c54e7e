"""Command-line front end for the experiment pipeline.

Subcommands: ``characterize`` (topology profiles + PCA of all
single-keyword removals), ``sweep`` (community agreement per removed
keyword), ``greedy`` (stepwise best/worst removal sequences), ``toy``
(benchmark-graph removal experiments) and ``plot-data`` (reshape result
CSVs into long-format plotting series).

Configuration comes from an optional JSON file (``--config``) whose values
are overridden by command-line flags. Every run writes a ``manifest.json``
that echoes the effective configuration, the tool version and the seed,
which is sufficient to reproduce the outputs bit for bit.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

from . import __version__
from . import output as out
from .corpus import KeywordSet, load_corpus
from .errors import (CitesweepError, ConfigError, EmptyNetwork,
                     GenerationFailure, SchemaError)
from .lfr import LfrConfig, toy_experiment
from .mapeq import DetectionConfig
from .perturb import greedy_sequence, keyword_purity, single_removal_sweep, \
    summarize_sweep
from .topology import pca_project, topology_profile

EXIT_CODES = {
    "success": 0,
    "config": 2,
    "io": 3,
    "schema": 4,
    "empty-network": 5,
    "generation": 6,
    "pipeline": 7,
}

_EXIT_HELP = """\
exit status:
  0  success
  2  configuration error (missing/invalid fields or paths)
  3  I/O error
  4  input file does not match its documented schema
  5  the query retains no usable network
  6  synthetic graph generation failed
  7  other pipeline error
"""

_TOY_FIELDS = ("n", "mu", "s_min", "s_max", "k_max", "k_avg", "communities")


@dataclass
class ExperimentConfig:
    """Effective settings of one run (config file merged with flags)."""

    kind: str
    out_dir: Path
    seed: int = 0
    trials: int = 1000
    workers: int = 1
    beta: float = 1.0
    corpus: Optional[Path] = None
    keywords: Optional[Path] = None
    mode: Optional[str] = None
    strategy: Optional[str] = None
    runs: int = 50
    rho: Optional[float] = None
    toy_trials: int = 20
    toy: dict = field(default_factory=dict)
    results: Optional[Path] = None

    def echo(self) -> dict:
        d = {k: (str(v) if isinstance(v, Path) else v)
             for k, v in self.__dict__.items() if v is not None}
        return d


def _load_config_file(path) -> dict:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object")
    return data


def _merge_config(args: argparse.Namespace) -> ExperimentConfig:
    file_cfg = _load_config_file(args.config) if args.config else {}

    def pick(flag_value, key, default=None):
        if flag_value is not None:
            return flag_value
        return file_cfg.get(key, default)

    cfg = ExperimentConfig(
        kind=args.command,
        out_dir=Path(pick(args.out, "out", "results")),
        seed=int(pick(args.seed, "seed", 0)),
        trials=int(pick(getattr(args, "trials", None), "trials", 1000)),
        workers=int(pick(getattr(args, "workers", None), "workers", 1)),
        beta=float(pick(getattr(args, "beta", None), "beta", 1.0)),
    )
    if cfg.trials < 1:
        raise ConfigError("trials must be >= 1")
    if cfg.workers < 1:
        raise ConfigError("workers must be >= 1")

    if args.command in ("characterize", "sweep", "greedy"):
        corpus = pick(getattr(args, "corpus", None), "corpus")
        keywords = pick(getattr(args, "keywords", None), "keywords")
        if corpus is None:
            raise ConfigError("a corpus path is required (--corpus)")
        if keywords is None:
            raise ConfigError("a keyword file is required (--keywords)")
        cfg.corpus = Path(corpus)
        cfg.keywords = Path(keywords)
        if not cfg.corpus.is_file():
            raise ConfigError(f"corpus file not found: {cfg.corpus}")
        if not cfg.keywords.is_file():
            raise ConfigError(f"keyword file not found: {cfg.keywords}")
    if args.command == "greedy":
        cfg.mode = pick(args.mode, "greedy_mode", "worst")
        if cfg.mode not in ("best", "worst"):
            raise ConfigError("greedy mode must be 'best' or 'worst'")
    if args.command == "toy":
        toy = dict(file_cfg.get("toy", {}))
        for name in ("strategy", "mode", "runs", "rho", "trials"):
            flag = getattr(args, name if name != "trials" else "detect_trials", None)
            if flag is not None:
                toy[name] = flag
        missing = [f for f in _TOY_FIELDS if f not in toy]
        if missing:
            raise ConfigError(f"toy config is missing fields: {', '.join(missing)}")
        cfg.strategy = toy.get("strategy", "dependent")
        cfg.mode = toy.get("mode", "worst")
        cfg.runs = int(toy.get("runs", 50))
        cfg.rho = toy.get("rho")
        if cfg.rho is not None:
            cfg.rho = float(cfg.rho)
        cfg.toy_trials = int(toy.get("trials", 20))
        if cfg.strategy not in ("dependent", "independent", "shuffled"):
            raise ConfigError("toy strategy must be dependent|independent|shuffled")
        if cfg.strategy == "shuffled" and cfg.rho is None:
            raise ConfigError("toy strategy 'shuffled' needs rho")
        if cfg.mode not in ("best", "worst"):
            raise ConfigError("toy mode must be 'best' or 'worst'")
        try:
            cfg.toy = dict(
                n=int(toy["n"]), mu=float(toy["mu"]), s_min=int(toy["s_min"]),
                s_max=int(toy["s_max"]), k_max=int(toy["k_max"]),
                k_avg=float(toy["k_avg"]), communities=int(toy["communities"]),
                gamma=float(toy.get("gamma", -2.0)),
                tau2=float(toy.get("tau2", 1.0)))
            LfrConfig(**cfg.toy)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"invalid toy parameters: {exc}") from exc
    if args.command == "plot-data":
        results = pick(args.results, "results")
        if results is None:
            raise ConfigError("plot-data needs --results")
        cfg.results = Path(results)
        if not cfg.results.is_file():
            raise ConfigError(f"results file not found: {cfg.results}")
    return cfg


def _load_inputs(cfg: ExperimentConfig):
    corpus = list(load_corpus(cfg.corpus))
    ks = KeywordSet.from_file(cfg.keywords)
    return corpus, ks


def _run_characterize(cfg: ExperimentConfig) -> dict:
    from .corpus import build_network
    corpus, ks = _load_inputs(cfg)
    names = ["original"]
    profiles = [topology_profile(build_network(corpus, ks))]
    for i in range(len(ks)):
        try:
            g = build_network(corpus, ks, frozenset({i}))
        except EmptyNetwork:
            continue
        names.append(ks[i])
        profiles.append(topology_profile(g))
    projection = pca_project(profiles)
    counts = {
        "profiles.csv": out.write_profiles_csv(cfg.out_dir / "profiles.csv",
                                               names, profiles),
        "pca.csv": out.write_pca_csv(cfg.out_dir / "pca.csv", names, projection),
        "pca_variance.csv": out.write_pca_variance_csv(
            cfg.out_dir / "pca_variance.csv", projection),
    }
    return counts


def _run_sweep(cfg: ExperimentConfig) -> dict:
    corpus, ks = _load_inputs(cfg)
    det = DetectionConfig(trials=cfg.trials, seed=cfg.seed)
    result = single_removal_sweep(corpus, ks, det, beta=cfg.beta,
                                  workers=cfg.workers)
    summary = summarize_sweep(result)
    return {
        "sweep.csv": out.write_sweep_csv(cfg.out_dir / "sweep.csv", result),
        "sweep_summary.csv": out.write_sweep_summary_csv(
            cfg.out_dir / "sweep_summary.csv", summary),
        "original_partition.csv": out.write_partition_csv(
            cfg.out_dir / "original_partition.csv", result.original_partition),
    }


def _run_greedy(cfg: ExperimentConfig) -> dict:
    from .corpus import build_network
    from .mapeq import detect_communities
    corpus, ks = _load_inputs(cfg)
    det = DetectionConfig(trials=cfg.trials, seed=cfg.seed)
    trace = greedy_sequence(corpus, ks, cfg.mode, det, beta=cfg.beta,
                            workers=cfg.workers)
    original = build_network(corpus, ks)
    base = detect_communities(original, det, workers=cfg.workers)
    purity = keyword_purity(base, original.incidence)
    return {
        "greedy.csv": out.write_greedy_csv(cfg.out_dir / "greedy.csv", trace),
        "purity.csv": out.write_purity_csv(cfg.out_dir / "purity.csv", purity,
                                           keyword_names=list(ks)),
        "purity_summary.csv": out.write_purity_summary_csv(
            cfg.out_dir / "purity_summary.csv", purity),
        "original_partition.csv": out.write_partition_csv(
            cfg.out_dir / "original_partition.csv", base),
    }


def _run_toy(cfg: ExperimentConfig) -> dict:
    lfr_cfg = LfrConfig(**cfg.toy)
    run = toy_experiment(lfr_cfg, cfg.strategy, cfg.mode, runs=cfg.runs,
                         seed=cfg.seed, rho=cfg.rho, trials=cfg.toy_trials,
                         workers=cfg.workers)
    return {"toy_curve.csv": out.write_toy_curve_csv(
        cfg.out_dir / "toy_curve.csv", run)}


def _read_result_rows(path: Path):
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None:
                raise SchemaError(f"{path}: empty results file")
            rows = list(reader)
    except OSError as exc:
        raise OSError(f"cannot read results file: {exc}") from exc
    if not rows:
        raise SchemaError(f"{path}: results file has no data rows")
    return reader.fieldnames, rows


def plot_data_series(path: Path):
    """Reshape a result CSV into (series_name, x, y, y_err) rows."""
    fields, rows = _read_result_rows(path)
    series = []
    if "mean_nmi" in fields:  # toy curve
        for name in ("mean_nmi", "std_nmi", "mean_size", "std_size"):
            err = {"mean_nmi": "std_nmi", "mean_size": "std_size"}.get(name)
            for r in rows:
                series.append([name, int(r["step"]), float(r[name]),
                               float(r[err]) if err else 0.0])
    elif "step" in fields:  # greedy trace
        for name in ("nmi", "normalized_size"):
            for r in rows:
                series.append([name, int(r["step"]), float(r[name]), 0.0])
    elif "removed_keyword" in fields:  # sweep
        for name in ("nmi", "ami", "ari", "vme", "normalized_size"):
            for x, r in enumerate(rows):
                series.append([name, x + 1, float(r[name]), 0.0])
    else:
        raise SchemaError(f"{path}: unrecognized results schema "
                          f"(columns: {', '.join(fields)})")
    return series


def _run_plot_data(cfg: ExperimentConfig) -> dict:
    series = plot_data_series(cfg.results)
    return {"plot_data.csv": out.write_plot_data_csv(
        cfg.out_dir / "plot_data.csv", series)}


_RUNNERS = {
    "characterize": _run_characterize,
    "sweep": _run_sweep,
    "greedy": _run_greedy,
    "toy": _run_toy,
    "plot-data": _run_plot_data,
}


def run(cfg: ExperimentConfig) -> dict:
    """Execute one configured experiment; returns per-file row counts."""
    started = datetime.now(timezone.utc).isoformat()
    t0 = time.perf_counter()
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    counts = _RUNNERS[cfg.kind](cfg)
    out.write_manifest(cfg.out_dir / "manifest.json", cfg.echo(), __version__,
                       cfg.seed, time.perf_counter() - t0, counts, started)
    return counts


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="citesweep",
        description=__doc__.split("\n\n")[0],
        epilog=_EXIT_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, corpus=False):
        p.add_argument("--config", help="JSON config file; flags override it")
        p.add_argument("--out", help="output directory (default: results)")
        p.add_argument("--seed", type=int, help="root random seed")
        p.add_argument("--workers", type=int, help="parallel jobs (default 1)")
        if corpus:
            p.add_argument("--corpus", help="line-delimited JSON corpus file")
            p.add_argument("--keywords", help="keyword file, one phrase per line")
            p.add_argument("--trials", type=int,
                           help="community-detection trials (default 1000)")
            p.add_argument("--beta", type=float,
                           help="V-measure weight (default 1.0)")

    common(sub.add_parser("characterize",
                          help="topology profiles and PCA of all "
                               "single-keyword removals"), corpus=True)
    common(sub.add_parser("sweep",
                          help="community agreement per removed keyword"),
           corpus=True)
    p_greedy = sub.add_parser("greedy",
                              help="stepwise greedy keyword removal")
    common(p_greedy, corpus=True)
    p_greedy.add_argument("--mode", choices=["best", "worst"])
    p_toy = sub.add_parser("toy", help="benchmark-graph removal experiments")
    common(p_toy)
    p_toy.add_argument("--strategy",
                       choices=["dependent", "independent", "shuffled"])
    p_toy.add_argument("--mode", choices=["best", "worst"])
    p_toy.add_argument("--runs", type=int)
    p_toy.add_argument("--rho", type=float,
                       help="fraction of keyword labels to shuffle")
    p_toy.add_argument("--detect-trials", type=int,
                       help="detection trials per toy network (default 20)")
    p_plot = sub.add_parser("plot-data",
                            help="reshape a result CSV into plot series")
    common(p_plot)
    p_plot.add_argument("--results", help="result CSV to reshape")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = _merge_config(args)
        counts = run(cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CODES["config"]
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CODES["schema"]
    except EmptyNetwork as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CODES["empty-network"]
    except GenerationFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CODES["generation"]
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CODES["io"]
    except (CitesweepError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CODES["pipeline"]
    for name, rows in counts.items():
        print(f"wrote {cfg.out_dir / name} ({rows} rows)")
    return EXIT_CODES["success"]


if __name__ == "__main__":
    sys.exit(main())
