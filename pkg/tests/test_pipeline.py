"""End-to-end pipeline checks: artifact determinism, stage wiring,
synthesized single-cluster layouts, and the size sweep."""

import csv
import json
import shutil
from dataclasses import replace

import numpy as np
import pytest

from mmwave_son.config import RunConfig, load_config
from mmwave_son.deployment import distance
from mmwave_son.floc import Band, NonConvergenceError, verify_assignment
from mmwave_son.metrics import EvaluationReport
from mmwave_son.pipeline import (
    StageError,
    _pack_cell_seed,
    report_text,
    run_pipeline,
    stage_cluster,
    stage_evaluate,
    stage_train,
    sweep_cluster_sizes,
    synthesize_cluster,
    train_all,
)
from mmwave_son.channel import build_gain_matrix

ARTIFACTS = (
    "config.txt",
    "layout.json",
    "clusters.json",
    "training_records.csv",
    "training_summary.json",
    "powers.json",
    "evaluation.json",
)


def small_cfg(**overrides):
    """A quick config: ~12 stations, short training."""
    base = RunConfig()
    cfg = replace(
        base,
        deploy=replace(base.deploy, region_width_m=320.0, region_height_m=320.0),
        learn=replace(base.learn, episodes_max=1200, trace_every=300),
        seed=7,
    )
    return replace(cfg, **overrides) if overrides else cfg


def read_artifacts(out_dir, names=ARTIFACTS):
    return {name: (out_dir / name).read_bytes() for name in names}


class TestSynthesizedClusters:
    def test_head_sits_at_region_center(self):
        cfg = small_cfg()
        layout, assignment = synthesize_cluster(6, cfg, 0)
        side = 2.0 * (cfg.floc.outband_distance_m + cfg.deploy.ue_radius_m + 20.0)
        assert layout.region == (side, side)
        head = layout.stations[0].position
        assert head.x == pytest.approx(side / 2.0)
        assert head.y == pytest.approx(side / 2.0)
        assert assignment.clusters[0].head == 0

    def test_members_inside_outband_disc_and_separated(self):
        cfg = small_cfg()
        for size in (2, 5, 12):
            layout, _ = synthesize_cluster(size, cfg, 3)
            pts = [b.position for b in layout.stations]
            for p in pts[1:]:
                assert distance(pts[0], p) <= cfg.floc.outband_distance_m + 1e-9
            for i in range(size):
                for j in range(i + 1, size):
                    assert distance(pts[i], pts[j]) >= 1.0

    def test_bands_follow_head_distance(self):
        cfg = small_cfg()
        layout, assignment = synthesize_cluster(12, cfg, 1)
        pts = {b.bs_id: b.position for b in layout.stations}
        for member in assignment.clusters[0].members:
            d = distance(pts[0], pts[member.bs_id])
            want = Band.IB if d <= cfg.floc.unit_distance_m else Band.OB
            assert member.band == want

    def test_assignment_passes_verification(self):
        cfg = small_cfg()
        for size in (1, 4, 14):
            layout, assignment = synthesize_cluster(size, cfg, 0)
            positions = {
                b.bs_id: (b.position.x, b.position.y) for b in layout.stations
            }
            assert verify_assignment(assignment, positions, cfg.floc) == []

    def test_users_stay_within_serving_radius(self):
        cfg = small_cfg()
        layout, _ = synthesize_cluster(9, cfg, 2)
        for ue in layout.users:
            bs = layout.stations[ue.serving_bs]
            assert distance(ue.position, bs.position) <= cfg.deploy.ue_radius_m + 1e-9
            assert ue.qos_sinr == cfg.deploy.qos_sinr

    def test_layout_seed_records_the_cell_key(self):
        cfg = small_cfg()
        layout, _ = synthesize_cluster(5, cfg, 11)
        assert layout.seed == _pack_cell_seed(cfg.seed, 5, 11)

    def test_deterministic_per_cell_and_distinct_across_cells(self):
        cfg = small_cfg()
        a1, _ = synthesize_cluster(7, cfg, 4)
        a2, _ = synthesize_cluster(7, cfg, 4)
        b, _ = synthesize_cluster(7, cfg, 5)
        assert a1.to_json() == a2.to_json()
        assert a1.to_json() != b.to_json()

    def test_singleton_has_no_members(self):
        layout, assignment = synthesize_cluster(1, small_cfg(), 0)
        assert layout.n_stations == 1
        assert assignment.clusters[0].members == []

    def test_size_below_one_rejected(self):
        with pytest.raises(ValueError, match="size"):
            synthesize_cluster(0, small_cfg(), 0)

    def test_cell_seeds_never_collide(self):
        # the packing must stay injective over any grid we realistically run
        seen = set()
        for base in (0, 1, 7, 123):
            for size in range(1, 16):
                for j in range(50):
                    seen.add(_pack_cell_seed(base, size, j))
        assert len(seen) == 4 * 15 * 50


@pytest.fixture(scope="module")
def cfg():
    return small_cfg()


@pytest.fixture(scope="module")
def first_run(cfg, tmp_path_factory):
    out = tmp_path_factory.mktemp("run_a")
    result = run_pipeline(cfg, str(out))
    return result, out


class TestRunPipeline:
    def test_all_artifacts_written(self, first_run):
        _, out = first_run
        for name in ARTIFACTS + ("timings.txt",):
            assert (out / name).exists(), name

    def test_result_dict_is_coherent(self, cfg, first_run):
        result, out = first_run
        layout = result["layout"]
        assert result["out_dir"] == str(out)
        assert set(result["powers"]) == {b.bs_id for b in layout.stations}
        assert isinstance(result["report"], EvaluationReport)
        heads = [r.cluster_id for r in result["train_results"]]
        assert heads == sorted(c.head for c in result["assignment"].clusters)

    def test_config_artifact_loads_back_equal(self, cfg, first_run):
        _, out = first_run
        assert load_config(str(out / "config.txt")) == cfg

    def test_second_run_byte_identical(self, cfg, first_run, tmp_path_factory):
        _, out_a = first_run
        out_b = tmp_path_factory.mktemp("run_b")
        run_pipeline(cfg, str(out_b))
        assert read_artifacts(out_a) == read_artifacts(out_b)

    def test_rerun_in_place_rewrites_same_bytes(self, cfg, first_run, tmp_path):
        _, out_a = first_run
        copy = tmp_path / "copy"
        shutil.copytree(out_a, copy)
        before = read_artifacts(copy)
        run_pipeline(cfg, str(copy))
        assert read_artifacts(copy) == before

    def test_parallel_run_matches_sequential(self, cfg, first_run, tmp_path_factory):
        _, out_a = first_run
        out_c = tmp_path_factory.mktemp("run_c")
        run_pipeline(replace(cfg, parallel=True), str(out_c))
        # config.txt differs by the parallel flag itself; results must not
        names = tuple(n for n in ARTIFACTS if n != "config.txt")
        assert read_artifacts(out_a, names) == read_artifacts(out_c, names)

    def test_train_all_parallel_equals_sequential(self, cfg, first_run):
        result, _ = first_run
        layout = result["layout"]
        clusters = result["assignment"].clusters
        gains = build_gain_matrix(layout, cfg.channel)
        args = (clusters, layout, gains, cfg.channel, cfg.reward_spec(), cfg.learn,
                cfg.seed)
        seq = train_all(*args, parallel=False)
        par = train_all(*args, parallel=True)
        assert len(seq) == len(par)
        for a, b in zip(seq, par):
            assert a.cluster_id == b.cluster_id
            assert a.record.rows == b.record.rows
            assert a.record.episodes_run == b.record.episodes_run
            assert a.actions == b.actions
            assert a.powers_dbm == b.powers_dbm

    def test_learned_powers_sit_on_the_grid(self, cfg, first_run):
        result, out = first_run
        powers = json.loads((out / "powers.json").read_text())
        grid = np.linspace(
            cfg.channel.p_min_dbm, cfg.channel.p_max_dbm, cfg.learn.n_power
        )
        assert set(map(int, powers)) == {b.bs_id for b in result["layout"].stations}
        for value in powers.values():
            assert np.min(np.abs(grid - value)) < 1e-9

    def test_training_summary_shape(self, cfg, first_run):
        result, out = first_run
        summary = json.loads((out / "training_summary.json").read_text())
        heads = sorted(c.head for c in result["assignment"].clusters)
        assert sorted(entry["head"] for entry in summary) == heads
        for entry in summary:
            n = len(entry["agent_ids"])
            assert entry["agent_ids"] == sorted(entry["agent_ids"])
            assert entry["episodes_run"] <= cfg.learn.episodes_max
            assert entry["q_exchange_messages"] == entry["episodes_run"] * n * (n - 1)
            assert set(entry["final_powers_dbm"]) == set(map(str, entry["agent_ids"]))

    def test_training_csv_has_thinned_traces(self, cfg, first_run):
        _, out = first_run
        with open(out / "training_records.csv", newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert rows, "expected at least the final-episode rows"
        episodes = sorted({int(r["episode"]) for r in rows})
        for ep in episodes:
            assert ep % cfg.learn.trace_every == 0 or ep == max(episodes)

    def test_evaluation_artifact_roundtrips(self, first_run):
        result, out = first_run
        report = EvaluationReport.from_json((out / "evaluation.json").read_text())
        assert report.mode == "in_cluster"
        assert report.network["n_users"] == result["layout"].n_stations
        assert {row["band"] for row in report.per_user} <= {"CH", "IB", "OB"}

    def test_report_text_covers_all_sections(self, first_run):
        _, out = first_run
        text = report_text(str(out))
        for fragment in (
            "stage timings",
            "deployment",
            "clustering",
            "evaluation (in_cluster)",
            "  head  size  sum_capacity",
        ):
            assert fragment in text
        assert text.endswith("\n")


class TestStageErrors:
    def test_cluster_needs_a_layout(self, tmp_path):
        with pytest.raises(StageError, match="layout.json"):
            stage_cluster(small_cfg(), str(tmp_path))

    def test_train_needs_earlier_stages(self, tmp_path):
        with pytest.raises(StageError, match="earlier stages") as exc:
            stage_train(small_cfg(), str(tmp_path))
        assert exc.value.stage == "train"

    def test_evaluate_needs_earlier_stages(self, tmp_path):
        with pytest.raises(StageError):
            stage_evaluate(small_cfg(), str(tmp_path))

    def test_report_rejects_missing_and_empty_dirs(self, tmp_path):
        with pytest.raises(StageError, match="not a directory"):
            report_text(str(tmp_path / "nope"))
        with pytest.raises(StageError, match="no artifacts"):
            report_text(str(tmp_path))

    def test_clustering_deadline_propagates(self, tmp_path):
        cfg = small_cfg(floc=replace(small_cfg().floc, convergence_budget_s=0.004))
        with pytest.raises(NonConvergenceError):
            run_pipeline(cfg, str(tmp_path))


@pytest.fixture(scope="module")
def sweep_run(tmp_path_factory):
    cfg = small_cfg(
        sweep_size_min=2,
        sweep_size_max=3,
        sweep_seeds_per_size=2,
        learn=replace(small_cfg().learn, episodes_max=400, trace_every=0),
    )
    out = tmp_path_factory.mktemp("sweep_a")
    rows = sweep_cluster_sizes(cfg, str(out))
    return cfg, rows, out


class TestSweep:
    def test_grid_is_complete_and_clean(self, sweep_run):
        cfg, rows, _ = sweep_run
        cells = {(r[0], r[1], r[2]) for r in rows}
        want = {
            (size, j, kind)
            for size in (2, 3)
            for j in range(2)
            for kind in ("cdpq", "expq")
        }
        assert cells == want
        assert all(r[3] == "ok" for r in rows)

    def test_summary_csv_matches_returned_rows(self, sweep_run):
        _, rows, out = sweep_run
        with open(out / "sweep_summary.csv", newline="") as fh:
            on_disk = list(csv.DictReader(fh))
        assert len(on_disk) == len(rows)
        for row in on_disk:
            assert 0.0 < float(row["jain"]) <= 1.0
            assert float(row["sum_capacity"]) > 0.0
            assert 0.0 <= float(row["qos_met_fraction"]) <= 1.0

    def test_member_rows_cover_every_station(self, sweep_run):
        _, _, out = sweep_run
        with open(out / "sweep_members.csv", newline="") as fh:
            members = list(csv.DictReader(fh))
        # one row per station per cell per reward kind
        assert len(members) == (2 + 2 + 3 + 3) * 2
        for row in members:
            assert row["qos_met"] in ("True", "False")

    def test_sweep_rerun_is_byte_identical(self, sweep_run, tmp_path):
        cfg, _, out = sweep_run
        again = tmp_path / "sweep_b"
        sweep_cluster_sizes(cfg, str(again))
        names = ("config.txt", "sweep_members.csv", "sweep_summary.csv")
        assert read_artifacts(out, names) == read_artifacts(again, names)

    def test_report_renders_the_sweep_table(self, sweep_run):
        _, _, out = sweep_run
        text = report_text(str(out))
        assert "size sweep (means over seeds)" in text
        assert "cdpq_sum" in text
