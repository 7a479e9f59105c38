"""Pipeline stages and the cluster-size sweep.

Artifacts are plain text (JSON and CSV) under one output directory:

    config.txt            resolved configuration, canonical form
    layout.json           stations, users, frozen shadowing draws
    clusters.json         cluster assignment and convergence time
    training_records.csv  thinned per-episode training traces
    training_summary.json per-cluster training outcome
    powers.json           learned transmit power per station
    evaluation.json       SINR/capacity/fairness report
    sweep_members.csv     per-member results of the size sweep
    sweep_summary.csv     per-cell results of the size sweep
    timings.txt           wall-clock stage durations

Every artifact except timings.txt is a pure function of (config bytes,
seed): rerunning a stage overwrites it with identical bytes. timings.txt
is a wall-clock diagnostic and is exempt from that guarantee.

Training within a run and cells within a sweep are independent, so the
parallel switch only changes scheduling, never results: per-cluster and
per-cell seeds are derived from stable keys, and outputs are written in
sorted order after all workers finish.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace

import numpy as np

from .channel import build_gain_matrix
from .deployment import (
    BaseStation,
    NetworkLayout,
    Point2D,
    UserEquipment,
    generate_layout,
)
from .floc import (
    Band,
    Cluster,
    ClusterAssignment,
    ClusterMember,
    NonConvergenceError,
    run_clustering,
    verify_assignment,
)
from .metrics import EvaluationReport, evaluate, jain_index
from .qlearn import RewardSpec, train_cluster
from .config import config_to_text

CONFIG_TXT = "config.txt"
LAYOUT_JSON = "layout.json"
CLUSTERS_JSON = "clusters.json"
TRAIN_CSV = "training_records.csv"
TRAIN_SUMMARY_JSON = "training_summary.json"
POWERS_JSON = "powers.json"
EVAL_JSON = "evaluation.json"
SWEEP_MEMBERS_CSV = "sweep_members.csv"
SWEEP_SUMMARY_CSV = "sweep_summary.csv"
TIMINGS_TXT = "timings.txt"

TRAIN_CSV_HEADER = (
    "cluster_id",
    "episode",
    "bs_id",
    "ring",
    "power_dbm",
    "sinr_db",
    "capacity",
    "reward",
)


class StageError(RuntimeError):
    def __init__(self, stage, message):
        super().__init__("stage %s: %s" % (stage, message))
        self.stage = stage


def _write_text(out_dir, name, text):
    path = os.path.join(out_dir, name)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return path


def _read_text(out_dir, name, stage):
    path = os.path.join(out_dir, name)
    if not os.path.exists(path):
        raise StageError(stage, "missing artifact %s (run earlier stages first)" % name)
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def _csv_text(header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _record_timing(out_dir, stage, seconds):
    """Merge one stage duration into timings.txt (diagnostic only)."""
    path = os.path.join(out_dir, TIMINGS_TXT)
    timings = {}
    if os.path.exists(path):
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                if "=" in line:
                    key, _, val = line.partition("=")
                    timings[key.strip()] = val.strip()
    timings[stage] = "%.3f" % seconds
    order = ("deploy", "cluster", "train", "evaluate", "sweep")
    lines = ["%s = %s s" % (k, timings[k].rstrip(" s")) for k in order if k in timings]
    _write_text(out_dir, TIMINGS_TXT, "\n".join(lines) + "\n")


def _timed(out_dir, stage, fn, *args):
    start = time.perf_counter()
    try:
        result = fn(*args)
    except (StageError, NonConvergenceError):
        raise
    except ValueError as exc:
        raise StageError(stage, str(exc)) from exc
    _record_timing(out_dir, stage, time.perf_counter() - start)
    return result


def stage_deploy(cfg, out_dir):
    layout = generate_layout(
        cfg.deploy.region,
        cfg.deploy.lambda_bs_per_km2,
        cfg.deploy.ue_radius_m,
        cfg.deploy.qos_sinr,
        cfg.seed,
    )
    _write_text(out_dir, LAYOUT_JSON, layout.to_json() + "\n")
    return layout


def stage_cluster(cfg, out_dir, layout=None):
    if layout is None:
        layout = NetworkLayout.from_json(_read_text(out_dir, LAYOUT_JSON, "cluster"))
    assignment = run_clustering(layout, cfg.floc, seed=cfg.seed)
    positions = {b.bs_id: (b.position.x, b.position.y) for b in layout.stations}
    violations = verify_assignment(assignment, positions, cfg.floc)
    if violations:
        raise StageError(
            "cluster", "assignment violates invariants: %s" % violations[:3]
        )
    _write_text(out_dir, CLUSTERS_JSON, assignment.to_json() + "\n")
    return assignment


def _map_cells(fn, items, parallel):
    """Apply fn over items, optionally on a thread pool; order preserved."""
    if parallel and len(items) > 1:
        with ThreadPoolExecutor(max_workers=min(8, len(items))) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


def train_all(clusters, layout, gains, channel_params, reward_spec, learn_cfg,
              seed, parallel=False):
    """Train every cluster; output order and bytes do not depend on
    parallel, since each cluster's stream is keyed by (seed, head)."""
    order = sorted(clusters, key=lambda c: c.head)

    def one(cluster):
        return train_cluster(
            cluster, layout, gains, channel_params, reward_spec, learn_cfg, seed
        )

    return _map_cells(one, order, parallel)


def stage_train(cfg, out_dir, layout=None, assignment=None):
    if layout is None:
        layout = NetworkLayout.from_json(_read_text(out_dir, LAYOUT_JSON, "train"))
    if assignment is None:
        assignment = ClusterAssignment.from_json(
            _read_text(out_dir, CLUSTERS_JSON, "train")
        )
    if assignment.unclustered:
        raise StageError("train", "assignment has unclustered stations")

    gains = build_gain_matrix(layout, cfg.channel)
    results = train_all(
        assignment.clusters,
        layout,
        gains,
        cfg.channel,
        cfg.reward_spec(),
        cfg.learn,
        cfg.seed,
        parallel=cfg.parallel,
    )

    rows = []
    powers = {}
    summary = []
    for res in results:
        for row in res.record.rows:
            rows.append((res.cluster_id,) + row)
        powers.update(res.powers_dbm)
        summary.append(
            {
                "head": res.cluster_id,
                "agent_ids": res.agent_ids,
                "rings": {str(k): v for k, v in sorted(res.rings.items())},
                "episodes_run": res.record.episodes_run,
                "early_stopped": res.record.early_stopped,
                "q_exchange_messages": res.record.q_exchange_messages,
                "final_actions": {
                    str(k): v for k, v in sorted(res.actions.items())
                },
                "final_powers_dbm": {
                    str(k): v for k, v in sorted(res.powers_dbm.items())
                },
                "last_shared_rows": {
                    str(k): [float(x) for x in v]
                    for k, v in sorted(res.record.last_shared_rows.items())
                },
            }
        )

    _write_text(out_dir, TRAIN_CSV, _csv_text(TRAIN_CSV_HEADER, rows))
    _write_text(
        out_dir,
        TRAIN_SUMMARY_JSON,
        json.dumps(summary, sort_keys=True) + "\n",
    )
    _write_text(
        out_dir,
        POWERS_JSON,
        json.dumps({str(k): v for k, v in sorted(powers.items())}, sort_keys=True)
        + "\n",
    )
    return results, powers


def stage_evaluate(cfg, out_dir, layout=None, assignment=None, powers=None):
    if layout is None:
        layout = NetworkLayout.from_json(_read_text(out_dir, LAYOUT_JSON, "evaluate"))
    if assignment is None:
        assignment = ClusterAssignment.from_json(
            _read_text(out_dir, CLUSTERS_JSON, "evaluate")
        )
    if powers is None:
        powers = {
            int(k): v
            for k, v in json.loads(
                _read_text(out_dir, POWERS_JSON, "evaluate")
            ).items()
        }
    gains = build_gain_matrix(layout, cfg.channel)
    report = evaluate(layout, gains, assignment, powers, cfg.channel, cfg.eval_mode)
    _write_text(out_dir, EVAL_JSON, report.to_json() + "\n")
    return report


def run_pipeline(cfg, out_dir=None):
    """deploy -> cluster -> train -> evaluate, all artifacts on disk."""
    cfg.validate()
    out_dir = out_dir or cfg.out_dir
    os.makedirs(out_dir, exist_ok=True)
    _write_text(out_dir, CONFIG_TXT, config_to_text(cfg))
    layout = _timed(out_dir, "deploy", stage_deploy, cfg, out_dir)
    assignment = _timed(out_dir, "cluster", stage_cluster, cfg, out_dir, layout)
    results, powers = _timed(
        out_dir, "train", stage_train, cfg, out_dir, layout, assignment
    )
    report = _timed(
        out_dir, "evaluate", stage_evaluate, cfg, out_dir, layout, assignment, powers
    )
    return {
        "layout": layout,
        "assignment": assignment,
        "train_results": results,
        "powers": powers,
        "report": report,
        "out_dir": out_dir,
    }


def _pack_cell_seed(base, size, seed_index):
    """Distinct stream key per sweep cell; the reward kind is deliberately
    not part of the key, so both kinds face identical draws."""
    return base * 1_000_003 + size * 1_009 + seed_index


def synthesize_cluster(size, cfg, seed_index):
    """One cluster of exactly `size` stations: a head at the region center
    and size-1 members uniform by area in its outband disc, IB or OB by
    distance. Degenerate draws (anything closer than 1 m) are redrawn."""
    if size < 1:
        raise ValueError("cluster size must be >= 1")
    flc = cfg.floc
    margin = 20.0
    side = 2.0 * (flc.outband_distance_m + cfg.deploy.ue_radius_m + margin)
    center = side / 2.0
    rng = np.random.default_rng([cfg.seed, size, seed_index])

    xy = [np.array([center, center])]
    tries = 0
    while len(xy) < size:
        u = rng.random()
        theta = rng.uniform(0.0, 2.0 * np.pi)
        d = flc.outband_distance_m * math.sqrt(u)
        pos = xy[0] + d * np.array([math.cos(theta), math.sin(theta)])
        if min(float(np.hypot(*(pos - q))) for q in xy) < 1.0:
            tries += 1
            if tries > 1000:
                raise RuntimeError("could not place members 1 m apart")
            continue
        xy.append(pos)

    n = size
    radii = cfg.deploy.ue_radius_m * np.sqrt(rng.random(n))
    angles = rng.uniform(0.0, 2.0 * np.pi, n)
    shadowing = rng.standard_normal((n, n))

    stations = [BaseStation(i, Point2D(float(p[0]), float(p[1]))) for i, p in enumerate(xy)]
    users = [
        UserEquipment(
            i,
            Point2D(
                float(xy[i][0] + radii[i] * np.cos(angles[i])),
                float(xy[i][1] + radii[i] * np.sin(angles[i])),
            ),
            serving_bs=i,
            qos_sinr=cfg.deploy.qos_sinr,
        )
        for i in range(n)
    ]
    layout = NetworkLayout(
        region=(side, side),
        stations=stations,
        users=users,
        shadowing=shadowing,
        seed=_pack_cell_seed(cfg.seed, size, seed_index),
    )

    members = []
    for i in range(1, n):
        d = float(np.hypot(*(xy[i] - xy[0])))
        band = Band.IB if d <= flc.unit_distance_m else Band.OB
        members.append(ClusterMember(i, band))
    cluster = Cluster(head=0, members=members, announce_time=0.0)
    assignment = ClusterAssignment([cluster], convergence_time=0.0)
    return layout, assignment


SWEEP_MEMBER_HEADER = (
    "size",
    "seed_index",
    "reward",
    "bs_id",
    "ring",
    "power_dbm",
    "sinr_db",
    "capacity",
    "qos_met",
)
SWEEP_SUMMARY_HEADER = (
    "size",
    "seed_index",
    "reward",
    "status",
    "sum_capacity",
    "jain",
    "min_sinr_db",
    "qos_met_fraction",
    "episodes_run",
    "early_stopped",
    "error",
)


def _run_sweep_cell(cfg, size, seed_index):
    """Train and evaluate both reward kinds on one synthesized cluster."""
    layout, assignment = synthesize_cluster(size, cfg, seed_index)
    positions = {b.bs_id: (b.position.x, b.position.y) for b in layout.stations}
    violations = verify_assignment(assignment, positions, cfg.floc)
    if violations:
        raise RuntimeError("synthesized cluster invalid: %s" % violations[:3])
    gains = build_gain_matrix(layout, cfg.channel)
    cluster = assignment.clusters[0]
    # per-episode traces would dwarf the sweep CSVs; keep final rows only
    learn_cfg = replace(cfg.learn, trace_every=0)
    cell_seed = _pack_cell_seed(cfg.seed, size, seed_index)

    out = {}
    for kind in ("cdpq", "expq"):
        spec = RewardSpec(
            kind=kind, qos_sinr=cfg.deploy.qos_sinr, shape=cfg.expq_shape
        )
        result = train_cluster(
            cluster, layout, gains, cfg.channel, spec, learn_cfg, cell_seed
        )
        report = evaluate(
            layout, gains, assignment, result.powers_dbm, cfg.channel, "in_cluster"
        )
        out[kind] = (result, report)
    return out


def sweep_cluster_sizes(cfg, out_dir):
    """Train both reward kinds over synthesized clusters of every
    configured size, seeds_per_size times each; emit per-member and
    per-cell CSV rows. Failed cells are recorded, never silently dropped,
    and fail the stage at the end."""
    cfg.validate()
    os.makedirs(out_dir, exist_ok=True)
    _write_text(out_dir, CONFIG_TXT, config_to_text(cfg))
    start = time.perf_counter()

    cells = [
        (size, j)
        for size in range(cfg.sweep_size_min, cfg.sweep_size_max + 1)
        for j in range(cfg.sweep_seeds_per_size)
    ]

    def one(cell):
        size, j = cell
        try:
            return cell, _run_sweep_cell(cfg, size, j), None
        except Exception as exc:  # recorded as a tagged failure row
            return cell, None, "%s: %s" % (type(exc).__name__, exc)

    outcomes = _map_cells(one, cells, cfg.parallel)

    member_rows = []
    summary_rows = []
    failures = []
    for (size, j), result, error in outcomes:
        for kind in ("cdpq", "expq"):
            if error is not None:
                summary_rows.append(
                    (size, j, kind, "failed", "", "", "", "", "", "", error)
                )
                continue
            res, report = result[kind]
            head = res.cluster_id
            cstats = report.per_cluster[head]
            summary_rows.append(
                (
                    size,
                    j,
                    kind,
                    "ok",
                    cstats["sum_capacity"],
                    cstats["jain"],
                    cstats["min_sinr_db"],
                    cstats["qos_met_fraction"],
                    res.record.episodes_run,
                    res.record.early_stopped,
                    "",
                )
            )
            for row in report.per_user:
                member_rows.append(
                    (
                        size,
                        j,
                        kind,
                        row["bs_id"],
                        res.rings[row["bs_id"]],
                        row["power_dbm"],
                        row["sinr_db"],
                        row["capacity"],
                        row["qos_met"],
                    )
                )
        if error is not None:
            failures.append(((size, j), error))

    _write_text(out_dir, SWEEP_MEMBERS_CSV, _csv_text(SWEEP_MEMBER_HEADER, member_rows))
    _write_text(out_dir, SWEEP_SUMMARY_CSV, _csv_text(SWEEP_SUMMARY_HEADER, summary_rows))
    _record_timing(out_dir, "sweep", time.perf_counter() - start)
    if failures:
        raise StageError(
            "sweep",
            "%d of %d cells failed, first: %s -> %s"
            % (len(failures), len(cells), failures[0][0], failures[0][1]),
        )
    return summary_rows


def _histogram_lines(sizes):
    lines = []
    for size in sorted(set(sizes)):
        count = sizes.count(size)
        lines.append("  size %2d: %3d  %s" % (size, count, "#" * count))
    return lines


def report_text(out_dir):
    """Human-readable summary of whatever artifacts exist in out_dir."""
    if not os.path.isdir(out_dir):
        raise StageError("report", "no artifacts: %s is not a directory" % out_dir)
    sections = []

    path = os.path.join(out_dir, TIMINGS_TXT)
    if os.path.exists(path):
        with open(path, "r", encoding="utf-8") as fh:
            sections.append("stage timings\n" + fh.read().rstrip())

    path = os.path.join(out_dir, LAYOUT_JSON)
    layout = None
    if os.path.exists(path):
        with open(path, "r", encoding="utf-8") as fh:
            layout = NetworkLayout.from_json(fh.read())
        sections.append(
            "deployment\n  %d stations in a %.0f x %.0f m region (seed %s)"
            % (layout.n_stations, layout.region[0], layout.region[1], layout.seed)
        )

    path = os.path.join(out_dir, CLUSTERS_JSON)
    assignment = None
    if os.path.exists(path):
        with open(path, "r", encoding="utf-8") as fh:
            assignment = ClusterAssignment.from_json(fh.read())
        sizes = assignment.sizes()
        lines = [
            "clustering",
            "  %d clusters, converged at %.3f s"
            % (len(assignment.clusters), assignment.convergence_time),
        ]
        if sizes:
            lines += _histogram_lines(sizes)
        sections.append("\n".join(lines))

    path = os.path.join(out_dir, EVAL_JSON)
    if os.path.exists(path):
        with open(path, "r", encoding="utf-8") as fh:
            report = EvaluationReport.from_json(fh.read())
        net = report.network
        lines = [
            "evaluation (%s)" % report.mode,
            "  users %d  sum capacity %.3f  mean %.3f  jain %.4f  qos met %.1f%%"
            % (
                net["n_users"],
                net["sum_capacity"],
                net["mean_capacity"],
                net["jain"],
                100.0 * net["qos_met_fraction"],
            ),
            "  cross/in-cluster interference ratio: %s"
            % (
                "n/a"
                if math.isnan(net["cross_cluster_interference_ratio"])
                else "%.3g" % net["cross_cluster_interference_ratio"]
            ),
            "  head  size  sum_capacity    jain  qos_met",
        ]
        for head in sorted(report.per_cluster):
            c = report.per_cluster[head]
            lines.append(
                "  %4d  %4d  %12.3f  %6.4f  %6.1f%%"
                % (
                    head,
                    c["size"],
                    c["sum_capacity"],
                    c["jain"],
                    100.0 * c["qos_met_fraction"],
                )
            )
        sections.append("\n".join(lines))

    path = os.path.join(out_dir, SWEEP_SUMMARY_CSV)
    if os.path.exists(path):
        with open(path, "r", encoding="utf-8", newline="") as fh:
            rows = list(csv.DictReader(fh))
        by_cell = {}
        for row in rows:
            if row["status"] != "ok":
                continue
            key = (int(row["size"]), row["reward"])
            by_cell.setdefault(key, []).append(row)
        sizes = sorted({k[0] for k in by_cell})
        lines = [
            "size sweep (means over seeds)",
            "  size  cdpq_sum  expq_sum  cdpq_jain  expq_jain  cdpq_qos  expq_qos",
        ]
        for size in sizes:
            cells = {}
            for kind in ("cdpq", "expq"):
                group = by_cell.get((size, kind), [])
                cells[kind] = (
                    _mean(group, "sum_capacity"),
                    _mean(group, "jain"),
                    _mean(group, "qos_met_fraction"),
                )
            lines.append(
                "  %4d  %8.2f  %8.2f  %9.4f  %9.4f  %7.2f  %7.2f"
                % (
                    size,
                    cells["cdpq"][0],
                    cells["expq"][0],
                    cells["cdpq"][1],
                    cells["expq"][1],
                    cells["cdpq"][2],
                    cells["expq"][2],
                )
            )
        sections.append("\n".join(lines))

    if not sections:
        raise StageError("report", "no artifacts found in %s" % out_dir)
    return "\n\n".join(sections) + "\n"


def _mean(rows, key):
    vals = [float(r[key]) for r in rows if r[key] != ""]
    return sum(vals) / len(vals) if vals else float("nan")
