"""Fairness index and network scoring against hand-computed link budgets."""

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mmwave_son.channel import ChannelParams, build_gain_matrix, dbm_to_mw
from mmwave_son.floc import Band, Cluster, ClusterAssignment, ClusterMember
from mmwave_son.metrics import EvaluationReport, evaluate, jain_index


class TestJainIndex:
    def test_known_value(self):
        # (1+2+3)^2 / (3 * (1+4+9)) = 36/42
        assert jain_index([1.0, 2.0, 3.0]) == pytest.approx(36.0 / 42.0, abs=1e-12)

    def test_equal_shares_score_one(self):
        assert jain_index([5.0] * 7) == pytest.approx(1.0, abs=1e-12)

    def test_single_value_scores_one(self):
        assert jain_index([0.3]) == pytest.approx(1.0, abs=1e-12)

    def test_degenerate_inputs(self):
        assert math.isnan(jain_index([]))
        assert math.isnan(jain_index([0.0, 0.0]))
        with pytest.raises(ValueError):
            jain_index([1.0, -0.5])

    def test_extreme_imbalance_approaches_reciprocal_n(self):
        vals = [1000.0] + [1e-9] * 9
        assert jain_index(vals) == pytest.approx(0.1, rel=1e-6)

    @given(
        xs=st.lists(st.floats(1e-3, 1e6), min_size=1, max_size=30),
        scale=st.floats(1e-3, 1e3),
    )
    def test_scale_invariance(self, xs, scale):
        a = jain_index(xs)
        b = jain_index([scale * x for x in xs])
        assert a == pytest.approx(b, rel=1e-9)
        assert 1.0 / len(xs) - 1e-9 <= a <= 1.0 + 1e-9


def two_cluster_setup(make_layout):
    """Four stations, two clusters: {0 head, 1 OB} and {2 head, 3 IB}.

    Users sit on their stations (the 1 m clamp applies to the desired
    link) and shadowing is zero, so every gain is a bare path-loss value.
    """
    lay = make_layout(
        bs_xy=[(0.0, 0.0), (150.0, 0.0), (1000.0, 0.0), (1080.0, 0.0)],
        shadowing=np.zeros((4, 4)),
    )
    asg = ClusterAssignment(
        clusters=[
            Cluster(head=0, members=[ClusterMember(1, Band.OB)], announce_time=0.0),
            Cluster(head=2, members=[ClusterMember(3, Band.IB)], announce_time=1.0),
        ],
        convergence_time=2.0,
    )
    powers = {0: 10.0, 1: 20.0, 2: 35.0, 3: -10.0}
    return lay, asg, powers


def expected_sinrs(lay, powers, interferers_of):
    """Explicit milliwatt arithmetic, one user at a time."""
    params = ChannelParams()
    h = build_gain_matrix(lay, params).h
    noise = float(dbm_to_mw(-120.0))
    out = {}
    for k in sorted(powers):
        num = float(dbm_to_mw(powers[k])) * h[k, k]
        den = noise + sum(
            float(dbm_to_mw(powers[i])) * h[i, k] for i in interferers_of[k]
        )
        out[k] = num / den
    return out


class TestEvaluate:
    def test_in_cluster_mode_counts_only_cluster_mates(self, make_layout):
        lay, asg, powers = two_cluster_setup(make_layout)
        gains = build_gain_matrix(lay, ChannelParams())
        rep = evaluate(lay, gains, asg, powers, ChannelParams(), mode="in_cluster")
        want = expected_sinrs(
            lay, powers, {0: [1], 1: [0], 2: [3], 3: [2]}
        )
        for row in rep.per_user:
            k = row["bs_id"]
            assert row["sinr_db"] == pytest.approx(
                10.0 * math.log10(want[k]), abs=1e-6
            )
            assert row["capacity"] == pytest.approx(
                math.log2(1.0 + want[k]), abs=1e-6
            )
            assert row["qos_met"] == (want[k] >= 2.83)
            assert row["power_dbm"] == powers[k]

    def test_full_network_mode_counts_everyone(self, make_layout):
        lay, asg, powers = two_cluster_setup(make_layout)
        gains = build_gain_matrix(lay, ChannelParams())
        rep = evaluate(lay, gains, asg, powers, ChannelParams(), mode="full_network")
        others = {k: [i for i in range(4) if i != k] for k in range(4)}
        want = expected_sinrs(lay, powers, others)
        for row in rep.per_user:
            k = row["bs_id"]
            # the vectorized interference term subtracts two near-equal
            # sums, so agreement stops around 1e-8 dB
            assert row["sinr_db"] == pytest.approx(
                10.0 * math.log10(want[k]), abs=1e-6
            )

    def test_full_network_never_beats_in_cluster(self, make_layout):
        lay, asg, powers = two_cluster_setup(make_layout)
        gains = build_gain_matrix(lay, ChannelParams())
        a = evaluate(lay, gains, asg, powers, ChannelParams(), mode="in_cluster")
        b = evaluate(lay, gains, asg, powers, ChannelParams(), mode="full_network")
        for ra, rb in zip(a.per_user, b.per_user):
            assert rb["sinr_db"] <= ra["sinr_db"] + 1e-12

    def test_band_labels_and_cluster_rollups(self, make_layout):
        lay, asg, powers = two_cluster_setup(make_layout)
        gains = build_gain_matrix(lay, ChannelParams())
        rep = evaluate(lay, gains, asg, powers, ChannelParams())
        bands = {r["bs_id"]: r["band"] for r in rep.per_user}
        assert bands == {0: "CH", 1: "OB", 2: "CH", 3: "IB"}
        assert set(rep.per_cluster) == {0, 2}
        caps = {r["bs_id"]: r["capacity"] for r in rep.per_user}
        c0 = rep.per_cluster[0]
        assert c0["size"] == 2
        assert c0["sum_capacity"] == pytest.approx(caps[0] + caps[1], abs=1e-9)
        assert c0["jain"] == pytest.approx(
            jain_index([caps[0], caps[1]]), abs=1e-12
        )
        sinrs = {r["bs_id"]: r["sinr_db"] for r in rep.per_user}
        assert c0["min_sinr_db"] == pytest.approx(min(sinrs[0], sinrs[1]), abs=1e-9)

    def test_network_rollup_and_cross_ratio(self, make_layout):
        lay, asg, powers = two_cluster_setup(make_layout)
        params = ChannelParams()
        gains = build_gain_matrix(lay, params)
        rep = evaluate(lay, gains, asg, powers, params)
        caps = [r["capacity"] for r in rep.per_user]
        net = rep.network
        assert net["n_users"] == 4
        assert net["sum_capacity"] == pytest.approx(sum(caps), abs=1e-9)
        assert net["jain"] == pytest.approx(jain_index(caps), abs=1e-12)
        # cross ratio: mean over users of (out-of-cluster)/(in-cluster)
        h = gains.h
        p_mw = {k: float(dbm_to_mw(p)) for k, p in powers.items()}
        mates = {0: [1], 1: [0], 2: [3], 3: [2]}
        ratios = []
        for k in range(4):
            inside = sum(p_mw[i] * h[i, k] for i in mates[k])
            outside = sum(
                p_mw[i] * h[i, k]
                for i in range(4)
                if i != k and i not in mates[k]
            )
            if inside > 0:
                ratios.append(outside / inside)
        assert net["cross_cluster_interference_ratio"] == pytest.approx(
            float(np.mean(ratios)), rel=1e-4
        )

    def test_empty_assignment_reports_nan_aggregates(self, make_layout):
        lay = make_layout(bs_xy=[], shadowing=np.zeros((0, 0)))
        gains = build_gain_matrix(lay, ChannelParams())
        rep = evaluate(lay, gains, ClusterAssignment([]), {}, ChannelParams())
        assert rep.network["n_users"] == 0
        assert math.isnan(rep.network["jain"])
        assert rep.per_user == [] and rep.per_cluster == {}

    def test_missing_or_out_of_range_power_rejected(self, make_layout):
        lay, asg, powers = two_cluster_setup(make_layout)
        gains = build_gain_matrix(lay, ChannelParams())
        with pytest.raises(ValueError):
            evaluate(lay, gains, asg, {0: 10.0}, ChannelParams())
        bad = {**powers, 3: 99.0}
        with pytest.raises(ValueError):
            evaluate(lay, gains, asg, bad, ChannelParams())
        with pytest.raises(ValueError):
            evaluate(lay, gains, asg, powers, ChannelParams(), mode="both")

    def test_report_json_round_trip(self, make_layout):
        lay, asg, powers = two_cluster_setup(make_layout)
        gains = build_gain_matrix(lay, ChannelParams())
        rep = evaluate(lay, gains, asg, powers, ChannelParams())
        back = EvaluationReport.from_json(rep.to_json())
        assert back.mode == rep.mode
        assert back.per_user == rep.per_user
        assert back.per_cluster == rep.per_cluster
        assert back.network == rep.network
        assert back.to_json() == rep.to_json()
