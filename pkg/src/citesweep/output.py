"""CSV and manifest emission.

All CSV bodies are deterministic for a fixed config and seed: floats are
written with shortest round-trip ``repr`` and row order follows the
deterministic order of the underlying computation. Timestamps appear only
in the run manifest. Schemas are documented in ``docs/formats.md``.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .topology import TopologyProfile

SCHEMA_VERSION = 1


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def write_csv(path, header, rows) -> int:
    """Write rows (already ordered) to ``path``; returns the row count."""
    count = 0
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) for v in row])
            count += 1
    return count


def write_profiles_csv(path, names, profiles) -> int:
    header = ["network", *TopologyProfile.FIELDS]
    rows = ([name, *prof.as_array().tolist()] for name, prof in zip(names, profiles))
    return write_csv(path, header, rows)


def write_pca_csv(path, names, projection) -> int:
    k = projection.coordinates.shape[1]
    header = ["network"] + [f"pc{i + 1}" for i in range(k)]
    rows = ([name, *coords.tolist()]
            for name, coords in zip(names, projection.coordinates))
    return write_csv(path, header, rows)


def write_pca_variance_csv(path, projection) -> int:
    rows = ([i + 1, v] for i, v in
            enumerate(projection.explained_variance_ratio.tolist()))
    return write_csv(path, ["component", "explained_variance_ratio"], rows)


def write_sweep_csv(path, result) -> int:
    header = ["removed_keyword", "nmi", "ami", "ari", "vme", "shared_n",
              "normalized_size", "shuffled_nmi", *TopologyProfile.FIELDS]
    rows = ([r.keyword, r.metrics.nmi, r.metrics.ami, r.metrics.ari,
             r.metrics.vme, r.metrics.shared_n, r.normalized_size,
             r.shuffled_nmi, *r.profile.as_array().tolist()]
            for r in result.rows)
    return write_csv(path, header, rows)


def write_sweep_summary_csv(path, summary: dict) -> int:
    rows = ([name, mean, std] for name, (mean, std) in summary.items())
    return write_csv(path, ["quantity", "mean", "std"], rows)


def write_greedy_csv(path, trace) -> int:
    header = ["step", "removed_keyword", "normalized_size",
              "nmi", "ami", "ari", "vme", "shared_n"]
    rows = ([i + 1, s.keyword, s.normalized_size, s.metrics.nmi,
             s.metrics.ami, s.metrics.ari, s.metrics.vme, s.metrics.shared_n]
            for i, s in enumerate(trace.steps))
    return write_csv(path, header, rows)


def write_purity_csv(path, purity, keyword_names=None) -> int:
    def name(i):
        return keyword_names[i] if keyword_names is not None else i

    rows = ([c, int(s), name(int(k)), f]
            for c, (s, k, f) in enumerate(
                zip(purity.sizes, purity.top_keyword, purity.fractions)))
    return write_csv(path, ["community", "size", "top_keyword", "purity"], rows)


def write_purity_summary_csv(path, purity) -> int:
    return write_csv(path, ["mean", "std"], [[purity.mean, purity.std]])


def write_partition_csv(path, partition) -> int:
    rows = ([nid, int(lab)] for nid, lab in
            zip(partition.node_ids, partition.labels.tolist()))
    return write_csv(path, ["node_id", "community_label"], rows)


def write_toy_curve_csv(path, run) -> int:
    rows = ([i + 1, mn, sn, ms, ss] for i, (mn, sn, ms, ss) in enumerate(
        zip(run.mean_nmi.tolist(), run.std_nmi.tolist(),
            run.mean_size.tolist(), run.std_size.tolist())))
    return write_csv(path, ["step", "mean_nmi", "std_nmi",
                            "mean_size", "std_size"], rows)


def write_plot_data_csv(path, series_rows) -> int:
    return write_csv(path, ["series_name", "x", "y", "y_err"], series_rows)


def write_manifest(path, config: dict, version: str, seed: int,
                   duration_seconds: float, row_counts: dict,
                   started_utc: str) -> None:
    payload = {
        "schema_version": SCHEMA_VERSION,
        "tool_version": version,
        "config": config,
        "seed": seed,
        "started_utc": started_utc,
        "duration_seconds": duration_seconds,
        "row_counts": row_counts,
    }
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n",
                          encoding="utf-8")
