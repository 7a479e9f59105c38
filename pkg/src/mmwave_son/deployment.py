"""Random deployment of mmWave base stations and their users.

Base stations follow a homogeneous spatial Poisson point process over a
rectangular region: the station count is a Poisson draw with mean
``density * area`` and positions are independent uniforms. Every station
serves exactly one user equipment, dropped uniformly (by area) inside a
small disc around its station. A frozen matrix of standard-normal draws is
attached to the layout so that shadow fading is fixed per link for the
lifetime of the layout; the channel module scales it by the shadowing
standard deviation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

M2_PER_KM2 = 1e6


@dataclass(frozen=True)
class Point2D:
    x: float
    y: float

    def as_tuple(self):
        return (self.x, self.y)


def distance(a, b):
    """Euclidean distance between two points (Point2D or (x, y) pairs)."""
    ax, ay = (a.x, a.y) if isinstance(a, Point2D) else (a[0], a[1])
    bx, by = (b.x, b.y) if isinstance(b, Point2D) else (b[0], b[1])
    return float(np.hypot(ax - bx, ay - by))


@dataclass(frozen=True)
class BaseStation:
    bs_id: int
    position: Point2D


@dataclass(frozen=True)
class UserEquipment:
    ue_id: int
    position: Point2D
    serving_bs: int
    qos_sinr: float


@dataclass
class NetworkLayout:
    """A drawn deployment: stations, one user each, frozen shadowing draws.

    ``shadowing`` holds unit-variance normal draws, entry [i, k] belonging
    to the link from station i to user k. It is scaled to dB by the channel
    parameters, never here.
    """

    region: tuple[float, float]
    stations: list[BaseStation]
    users: list[UserEquipment]
    shadowing: np.ndarray
    seed: int
    _bs_xy: np.ndarray = field(default=None, repr=False, compare=False)
    _ue_xy: np.ndarray = field(default=None, repr=False, compare=False)

    @property
    def n_stations(self):
        return len(self.stations)

    def bs_positions(self):
        """Station coordinates as an (N, 2) array."""
        if self._bs_xy is None:
            self._bs_xy = np.array(
                [[b.position.x, b.position.y] for b in self.stations]
            ).reshape(-1, 2)
        return self._bs_xy

    def ue_positions(self):
        """User coordinates as an (N, 2) array, row i serving station i."""
        if self._ue_xy is None:
            self._ue_xy = np.array(
                [[u.position.x, u.position.y] for u in self.users]
            ).reshape(-1, 2)
        return self._ue_xy

    def to_json(self):
        return json.dumps(
            {
                "region": list(self.region),
                "seed": self.seed,
                "stations": [
                    {"id": b.bs_id, "x": b.position.x, "y": b.position.y}
                    for b in self.stations
                ],
                "users": [
                    {
                        "id": u.ue_id,
                        "x": u.position.x,
                        "y": u.position.y,
                        "serving_bs": u.serving_bs,
                        "qos_sinr": u.qos_sinr,
                    }
                    for u in self.users
                ],
                "shadowing": self.shadowing.tolist(),
            },
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text):
        raw = json.loads(text)
        stations = [
            BaseStation(s["id"], Point2D(s["x"], s["y"])) for s in raw["stations"]
        ]
        users = [
            UserEquipment(
                u["id"], Point2D(u["x"], u["y"]), u["serving_bs"], u["qos_sinr"]
            )
            for u in raw["users"]
        ]
        n = len(stations)
        shadowing = np.array(raw["shadowing"], dtype=float).reshape(n, n)
        return cls(
            region=tuple(raw["region"]),
            stations=stations,
            users=users,
            shadowing=shadowing,
            seed=raw["seed"],
        )


def generate_layout(region, lambda_bs_per_km2, ue_radius_m, qos_sinr, seed):
    """Draw a deployment.

    region: (width_m, height_m) rectangle with the origin at a corner.
    lambda_bs_per_km2: station density of the Poisson process.
    ue_radius_m: each user is uniform by area in a disc of this radius
        around its station (users may land outside the region; only
        stations are confined to it).
    qos_sinr: linear SINR floor stamped on every user.
    seed: all draws come from one numpy default_rng(seed); identical seeds
        reproduce the layout bit for bit.

    A zero station count is a valid (empty) layout, not an error.
    """
    width, height = float(region[0]), float(region[1])
    if width <= 0 or height <= 0:
        raise ValueError("region must have positive area")
    if lambda_bs_per_km2 < 0:
        raise ValueError("lambda_bs_per_km2 must be >= 0")
    if ue_radius_m < 0:
        raise ValueError("ue_radius_m must be >= 0")

    rng = np.random.default_rng(seed)
    area_km2 = width * height / M2_PER_KM2
    n = int(rng.poisson(lambda_bs_per_km2 * area_km2))

    xs = rng.uniform(0.0, width, n)
    ys = rng.uniform(0.0, height, n)
    # Area-uniform draw in the disc: radius scales with sqrt of a uniform.
    radii = ue_radius_m * np.sqrt(rng.random(n))
    angles = rng.uniform(0.0, 2.0 * np.pi, n)
    shadowing = rng.standard_normal((n, n))

    stations = [BaseStation(i, Point2D(float(xs[i]), float(ys[i]))) for i in range(n)]
    users = [
        UserEquipment(
            i,
            Point2D(
                float(xs[i] + radii[i] * np.cos(angles[i])),
                float(ys[i] + radii[i] * np.sin(angles[i])),
            ),
            serving_bs=i,
            qos_sinr=qos_sinr,
        )
        for i in range(n)
    ]
    return NetworkLayout(
        region=(width, height),
        stations=stations,
        users=users,
        shadowing=shadowing,
        seed=seed,
    )
