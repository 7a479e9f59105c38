"""Shared fixtures: hand-built layouts and default parameter sets."""

import numpy as np
import pytest

from mmwave_son.channel import ChannelParams
from mmwave_son.deployment import BaseStation, NetworkLayout, Point2D, UserEquipment
from mmwave_son.floc import FlocParams


@pytest.fixture
def channel_params():
    return ChannelParams()


@pytest.fixture
def floc_params():
    return FlocParams()


@pytest.fixture
def make_layout():
    """Factory for deterministic layouts from explicit coordinates.

    bs_xy is a list of (x, y) station positions; ue_xy defaults to placing
    every user right on its station (distance clamps to 1 m in both
    path-loss laws, so that is a valid degenerate choice). shadowing
    defaults to zeros, meaning interfering links take the bare NLOS law.
    """

    def build(bs_xy, ue_xy=None, shadowing=None, qos_sinr=2.83, seed=0):
        n = len(bs_xy)
        if ue_xy is None:
            ue_xy = bs_xy
        if shadowing is None:
            shadowing = np.zeros((n, n))
        stations = [
            BaseStation(i, Point2D(float(x), float(y)))
            for i, (x, y) in enumerate(bs_xy)
        ]
        users = [
            UserEquipment(i, Point2D(float(x), float(y)), i, qos_sinr)
            for i, (x, y) in enumerate(ue_xy)
        ]
        width = max((p.position.x for p in stations), default=100.0) + 100.0
        height = max((p.position.y for p in stations), default=100.0) + 100.0
        return NetworkLayout(
            region=(width, height),
            stations=stations,
            users=users,
            shadowing=np.asarray(shadowing, dtype=float).reshape(n, n),
            seed=seed,
        )

    return build
