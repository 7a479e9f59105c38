"""Network evaluation: SINR, capacity, fairness, QoS attainment.

evaluate() scores a clustered network under a given power assignment in
one of two interference scopes. "in_cluster" counts only same-cluster
transmitters as interferers, matching what the agents trained against;
"full_network" counts every co-channel transmitter. The cross-cluster
interference ratio is reported either way, since it measures how much the
in-cluster view underestimates reality.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .channel import capacity, dbm_to_mw

MODES = ("in_cluster", "full_network")


def jain_index(values):
    """Jain fairness (sum x)^2 / (n sum x^2); NaN for empty or all-zero."""
    x = np.asarray(values, dtype=float)
    if x.size == 0:
        return float("nan")
    if np.any(x < 0):
        raise ValueError("jain_index expects nonnegative values")
    denom = x.size * float(np.sum(x * x))
    if denom == 0.0:
        return float("nan")
    total = float(np.sum(x))
    return total * total / denom


@dataclass
class EvaluationReport:
    mode: str
    per_user: list = field(default_factory=list)
    per_cluster: dict = field(default_factory=dict)
    network: dict = field(default_factory=dict)

    def to_json(self):
        return json.dumps(
            {
                "mode": self.mode,
                "per_user": self.per_user,
                "per_cluster": {str(k): v for k, v in self.per_cluster.items()},
                "network": self.network,
            },
            sort_keys=True,
            allow_nan=True,
        )

    @classmethod
    def from_json(cls, text):
        raw = json.loads(text)
        return cls(
            mode=raw["mode"],
            per_user=raw["per_user"],
            per_cluster={int(k): v for k, v in raw["per_cluster"].items()},
            network=raw["network"],
        )


def _nanmean(values):
    vals = [v for v in values if not math.isnan(v)]
    return sum(vals) / len(vals) if vals else float("nan")


def evaluate(layout, gains, assignment, powers_dbm, channel_params,
             mode="in_cluster"):
    """Score every clustered station's downlink to its own user.

    powers_dbm maps bs_id to transmit power; every clustered station must
    appear and lie within the configured power bounds.
    """
    if mode not in MODES:
        raise ValueError("mode must be one of %s" % (MODES,))
    ids = sorted(assignment.all_ids())
    for i in ids:
        if i not in powers_dbm:
            raise ValueError("missing power for station %d" % i)
        p = powers_dbm[i]
        if not channel_params.p_min_dbm <= p <= channel_params.p_max_dbm:
            raise ValueError("power %.2f dBm for station %d out of range" % (p, i))

    report = EvaluationReport(mode=mode)
    if not ids:
        report.network = {
            "n_users": 0,
            "sum_capacity": 0.0,
            "mean_capacity": float("nan"),
            "jain": float("nan"),
            "qos_met_fraction": float("nan"),
            "cross_cluster_interference_ratio": float("nan"),
        }
        return report

    index = {bs_id: pos for pos, bs_id in enumerate(ids)}
    h = gains.submatrix(ids)
    p_mw = np.array([dbm_to_mw(powers_dbm[i]) for i in ids])
    noise_mw = float(dbm_to_mw(channel_params.noise_dbm))

    received = p_mw @ h
    desired = p_mw * np.diag(h)
    total_interf = received - desired

    in_cluster_interf = np.zeros_like(desired)
    cluster_by_user = {}
    band_by_user = {}
    for c in assignment.clusters:
        cids = c.ids()
        rows = [index[i] for i in cids]
        sub_received = p_mw[rows] @ h[np.ix_(rows, rows)]
        for local, i in enumerate(cids):
            k = index[i]
            in_cluster_interf[k] = sub_received[local] - desired[k]
            cluster_by_user[i] = c.head
        band_by_user[c.head] = "CH"
        for m in c.members:
            band_by_user[m.bs_id] = m.band.value

    interf = in_cluster_interf if mode == "in_cluster" else total_interf
    sinr = desired / (interf + noise_mw)
    caps = capacity(sinr)
    cross = total_interf - in_cluster_interf

    qos_by_user = {ue.serving_bs: ue.qos_sinr for ue in layout.users}
    for i in ids:
        k = index[i]
        q = qos_by_user[i]
        report.per_user.append(
            {
                "bs_id": i,
                "cluster_id": cluster_by_user[i],
                "band": band_by_user[i],
                "power_dbm": float(powers_dbm[i]),
                "sinr_db": float(10.0 * np.log10(sinr[k])),
                "capacity": float(caps[k]),
                "qos_sinr": float(q),
                "qos_met": bool(sinr[k] >= q),
            }
        )

    for c in assignment.clusters:
        rows = np.array([index[i] for i in c.ids()])
        ccaps = caps[rows]
        met = [sinr[k] >= qos_by_user[i] for i, k in zip(c.ids(), rows)]
        report.per_cluster[c.head] = {
            "size": c.size,
            "sum_capacity": float(ccaps.sum()),
            "mean_capacity": float(ccaps.mean()),
            "jain": jain_index(ccaps),
            "qos_met_fraction": float(np.mean(met)),
            "min_sinr_db": float(10.0 * np.log10(sinr[rows].min())),
        }

    with_in = in_cluster_interf > 0
    if np.any(with_in):
        ratio = float(np.mean(cross[with_in] / in_cluster_interf[with_in]))
    else:
        ratio = float("nan")
    met_all = [sinr[index[i]] >= qos_by_user[i] for i in ids]
    report.network = {
        "n_users": len(ids),
        "sum_capacity": float(caps.sum()),
        "mean_capacity": float(caps.mean()),
        "jain": jain_index(caps),
        "qos_met_fraction": float(np.mean(met_all)),
        "cross_cluster_interference_ratio": ratio,
    }
    return report
