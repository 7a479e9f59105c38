"""Deployment draws: Poisson counts, uniform positions, frozen shadowing."""

import numpy as np
import pytest
from scipy import stats

from mmwave_son.deployment import (
    NetworkLayout,
    Point2D,
    distance,
    generate_layout,
)

REGION = (1000.0, 1000.0)


def test_same_seed_reproduces_layout_bit_for_bit():
    a = generate_layout(REGION, 120.0, 10.0, 2.83, seed=42)
    b = generate_layout(REGION, 120.0, 10.0, 2.83, seed=42)
    assert a.to_json() == b.to_json()
    np.testing.assert_array_equal(a.shadowing, b.shadowing)


def test_different_seeds_differ():
    a = generate_layout(REGION, 120.0, 10.0, 2.83, seed=1)
    b = generate_layout(REGION, 120.0, 10.0, 2.83, seed=2)
    assert a.to_json() != b.to_json()


def test_station_count_tracks_density_times_area():
    # 200 draws of Poisson(120): the sample mean has standard error
    # sqrt(120/200) ~ 0.775, so a 3-sigma band around 120 is +-2.33.
    counts = [
        generate_layout(REGION, 120.0, 10.0, 2.83, seed=s).n_stations
        for s in range(200)
    ]
    assert abs(np.mean(counts) - 120.0) < 3.0 * np.sqrt(120.0 / 200.0)
    # and it is a genuine distribution, not a constant
    assert np.std(counts) > 5.0


def test_count_scales_with_region_area():
    counts = [
        generate_layout((500.0, 500.0), 120.0, 10.0, 2.83, seed=s).n_stations
        for s in range(200)
    ]
    assert abs(np.mean(counts) - 30.0) < 3.0 * np.sqrt(30.0 / 200.0)


def test_stations_confined_to_region():
    lay = generate_layout((400.0, 250.0), 300.0, 10.0, 2.83, seed=7)
    xy = lay.bs_positions()
    assert lay.n_stations > 0
    assert xy[:, 0].min() >= 0.0 and xy[:, 0].max() <= 400.0
    assert xy[:, 1].min() >= 0.0 and xy[:, 1].max() <= 250.0


def test_each_user_within_its_serving_disc():
    lay = generate_layout(REGION, 120.0, 10.0, 2.83, seed=3)
    gap = lay.bs_positions() - lay.ue_positions()
    d = np.hypot(gap[:, 0], gap[:, 1])
    assert d.max() <= 10.0 + 1e-9
    assert (d > 0.0).any()
    assert [u.serving_bs for u in lay.users] == [b.bs_id for b in lay.stations]


def test_user_offsets_are_area_uniform_in_the_disc():
    # Area-uniform in a disc means the squared normalized radius is U(0,1).
    vals = []
    for s in range(30):
        lay = generate_layout(REGION, 120.0, 10.0, 2.83, seed=s)
        gap = lay.bs_positions() - lay.ue_positions()
        d = np.hypot(gap[:, 0], gap[:, 1])
        vals.extend((d / 10.0) ** 2)
    assert stats.kstest(vals, "uniform").pvalue > 0.01


def test_shadowing_matrix_is_square_standard_normal():
    lay = generate_layout(REGION, 120.0, 10.0, 2.83, seed=11)
    n = lay.n_stations
    assert lay.shadowing.shape == (n, n)
    # about 14k draws: moments should sit close to (0, 1)
    assert abs(lay.shadowing.mean()) < 0.05
    assert abs(lay.shadowing.std() - 1.0) < 0.05


def test_qos_floor_stamped_on_every_user():
    lay = generate_layout(REGION, 120.0, 10.0, 4.5, seed=2)
    assert all(u.qos_sinr == 4.5 for u in lay.users)


def test_zero_density_yields_valid_empty_layout():
    lay = generate_layout(REGION, 0.0, 10.0, 2.83, seed=5)
    assert lay.n_stations == 0
    assert lay.users == []
    assert lay.shadowing.shape == (0, 0)
    assert NetworkLayout.from_json(lay.to_json()).n_stations == 0


def test_bad_inputs_raise():
    with pytest.raises(ValueError):
        generate_layout((0.0, 100.0), 120.0, 10.0, 2.83, seed=1)
    with pytest.raises(ValueError):
        generate_layout(REGION, -1.0, 10.0, 2.83, seed=1)
    with pytest.raises(ValueError):
        generate_layout(REGION, 120.0, -2.0, 2.83, seed=1)


def test_json_round_trip_is_exact():
    lay = generate_layout((300.0, 300.0), 120.0, 10.0, 2.83, seed=9)
    back = NetworkLayout.from_json(lay.to_json())
    assert back.to_json() == lay.to_json()
    np.testing.assert_array_equal(back.shadowing, lay.shadowing)
    assert back.region == lay.region
    assert back.stations == lay.stations
    assert back.users == lay.users


def test_distance_accepts_points_and_tuples():
    assert distance(Point2D(0.0, 0.0), Point2D(3.0, 4.0)) == 5.0
    assert distance((0.0, 0.0), (3.0, 4.0)) == 5.0
    assert distance(Point2D(1.0, 1.0), (1.0, 1.0)) == 0.0
