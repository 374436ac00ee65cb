import dataclasses
import math

import numpy as np
import pytest

from blockcast.errors import DegenerateLinkError
from blockcast.geometry import (
    AXIS_EPS,
    LinkGeometry,
    blockage_from_location,
    blockage_labels_from_rssi,
    predict_blockage_sequence,
    transfer_link,
)
from blockcast.models import build_localization_model, predict_locations_batch
from blockcast.models import NormStats
from blockcast.preprocess import Centroid
from blockcast.scene import RssiFrame

VERTICAL = LinkGeometry((0.0, 0.0), (0.0, 12.0), object_width=4.0)


def loc(x, y):
    return Centroid(0, float(x), float(y), True)


def sampled_blockage(link, location, samples=4001):
    """Independent check: walk the segment and look for a point at the
    object's y whose x falls inside the object's extent."""
    tx = np.asarray(link.tx)
    rx = np.asarray(link.rx)
    t = np.linspace(0.0, 1.0, samples)
    px = tx[0] + t * (rx[0] - tx[0])
    py = tx[1] + t * (rx[1] - tx[1])
    step_y = abs(rx[1] - tx[1]) / (samples - 1)
    near = np.abs(py - location.y) <= 0.5 * step_y + 1e-12
    return bool(np.any(near & (np.abs(px - location.x) <= link.object_width / 2.0)))


def boundary_margins(link, location):
    dx = link.rx[0] - link.tx[0]
    dy = link.rx[1] - link.tx[1]
    along = (location.y - link.tx[1]) / dy
    crossing = link.tx[0] + along * dx
    m_along = min(abs(along), abs(along - 1.0))
    m_across = abs(abs(crossing - location.x) - link.object_width / 2.0)
    return m_along, m_across, abs(dx)


# ---------------------------------------------------------------------------
# Direct cases
# ---------------------------------------------------------------------------

def test_object_on_the_midpoint_blocks():
    assert blockage_from_location(loc(0.0, 6.0), VERTICAL)


def test_object_beside_the_link_does_not_block():
    assert not blockage_from_location(loc(3.0, 6.0), VERTICAL)
    assert not blockage_from_location(loc(-2.1, 6.0), VERTICAL)


def test_interval_edges_are_inclusive():
    assert blockage_from_location(loc(2.0, 6.0), VERTICAL)
    assert blockage_from_location(loc(-2.0, 6.0), VERTICAL)
    assert blockage_from_location(loc(0.0, 0.0), VERTICAL)
    assert blockage_from_location(loc(0.0, 12.0), VERTICAL)
    assert not blockage_from_location(loc(0.0, 12.1), VERTICAL)
    assert not blockage_from_location(loc(0.0, -0.1), VERTICAL)


def test_horizontal_link_uses_the_other_axis():
    link = LinkGeometry((0.0, 5.0), (10.0, 5.0), object_width=4.0)
    assert blockage_from_location(loc(5.0, 5.0), link)
    assert blockage_from_location(loc(5.0, 6.9), link)
    assert blockage_from_location(loc(0.0, 5.0), link)
    assert not blockage_from_location(loc(5.0, 7.1), link)
    assert not blockage_from_location(loc(-0.1, 5.0), link)
    assert not blockage_from_location(loc(10.2, 5.0), link)


def test_diagonal_link_hand_case():
    link = LinkGeometry((0.0, 0.0), (10.0, 10.0), object_width=2.0)
    # At y=4 the link crosses x=4; the object at x=4.9 still overlaps.
    assert blockage_from_location(loc(4.9, 4.0), link)
    assert not blockage_from_location(loc(5.1, 4.0), link)


def test_invalid_location_is_rejected():
    with pytest.raises(ValueError):
        blockage_from_location(Centroid(0, math.nan, math.nan, False), VERTICAL)


def test_link_validation():
    with pytest.raises(DegenerateLinkError):
        LinkGeometry((1.0, 1.0), (1.0, 1.0))
    almost = (1.0, 1.0 + AXIS_EPS / 10)
    with pytest.raises(DegenerateLinkError):
        LinkGeometry((1.0, 1.0), almost)
    with pytest.raises(ValueError):
        LinkGeometry((0.0, 0.0), (0.0, 12.0), object_width=0.0)
    with pytest.raises(ValueError):
        LinkGeometry((0.0, 0.0), (0.0, 12.0), power_threshold=0.0)


# ---------------------------------------------------------------------------
# Properties against independent sampling
# ---------------------------------------------------------------------------

def test_blockage_matches_dense_segment_sampling():
    rng = np.random.default_rng(21)
    samples = 4001
    outcomes = {True: 0, False: 0}
    for _ in range(300):
        tx = rng.uniform(-20.0, 20.0, size=2)
        rx = tx + np.array(
            [rng.uniform(-15.0, 15.0),
             rng.choice([-1.0, 1.0]) * rng.uniform(0.5, 15.0)]
        )
        w = rng.uniform(0.5, 6.0)
        link = LinkGeometry(tuple(tx), tuple(rx), object_width=w)
        lo_x, hi_x = sorted((tx[0], rx[0]))
        lo_y, hi_y = sorted((tx[1], rx[1]))
        where = loc(rng.uniform(lo_x - 5.0, hi_x + 5.0),
                    rng.uniform(lo_y - 2.0, hi_y + 2.0))
        got = blockage_from_location(where, link)
        ref = sampled_blockage(link, where, samples)
        outcomes[got] += 1
        if got != ref:
            m_along, m_across, adx = boundary_margins(link, where)
            step = 1.0 / (samples - 1)
            assert m_along <= 2.0 * step or m_across <= 2.0 * (adx + 1.0) * step, (
                link, where, got, ref
            )
    assert outcomes[True] > 20 and outcomes[False] > 20


def test_blockage_is_translation_invariant():
    rng = np.random.default_rng(22)
    for _ in range(1000):
        tx = rng.uniform(-10.0, 10.0, size=2)
        rx = tx + np.array([rng.uniform(-8.0, 8.0),
                            rng.choice([-1.0, 1.0]) * rng.uniform(0.5, 8.0)])
        w = rng.uniform(0.5, 5.0)
        where = rng.uniform(-12.0, 12.0, size=2)
        shift = rng.uniform(-50.0, 50.0, size=2)
        a = blockage_from_location(
            loc(*where), LinkGeometry(tuple(tx), tuple(rx), object_width=w)
        )
        b = blockage_from_location(
            loc(*(where + shift)),
            LinkGeometry(tuple(tx + shift), tuple(rx + shift), object_width=w),
        )
        assert a == b


def test_blockage_is_symmetric_in_the_endpoints():
    rng = np.random.default_rng(23)
    for _ in range(1000):
        tx = rng.uniform(-10.0, 10.0, size=2)
        rx = tx + np.array([rng.uniform(-8.0, 8.0),
                            rng.choice([-1.0, 1.0]) * rng.uniform(0.5, 8.0)])
        w = rng.uniform(0.5, 5.0)
        where = loc(*rng.uniform(-12.0, 12.0, size=2))
        a = blockage_from_location(where, LinkGeometry(tuple(tx), tuple(rx), object_width=w))
        b = blockage_from_location(where, LinkGeometry(tuple(rx), tuple(tx), object_width=w))
        assert a == b


def test_wider_objects_block_at_least_as_often():
    rng = np.random.default_rng(24)
    for _ in range(1000):
        tx = rng.uniform(-10.0, 10.0, size=2)
        rx = tx + np.array([rng.uniform(-8.0, 8.0),
                            rng.choice([-1.0, 1.0]) * rng.uniform(0.5, 8.0)])
        w = rng.uniform(0.5, 4.0)
        where = loc(*rng.uniform(-12.0, 12.0, size=2))
        narrow = blockage_from_location(
            where, LinkGeometry(tuple(tx), tuple(rx), object_width=w)
        )
        wide = blockage_from_location(
            where, LinkGeometry(tuple(tx), tuple(rx), object_width=w + rng.uniform(0.1, 4.0))
        )
        assert wide or not narrow


# ---------------------------------------------------------------------------
# Threshold labels
# ---------------------------------------------------------------------------

def test_threshold_comparison_is_strict():
    frames = [
        RssiFrame(0, np.array([0.5, 0.5])),        # exactly the threshold
        RssiFrame(1, np.array([0.5, 0.49999])),    # just under
        RssiFrame(2, np.array([0.7, 0.4])),        # above
    ]
    labels = blockage_labels_from_rssi(frames, 1.0)
    assert [(l.t, l.blocked) for l in labels] == [(0, False), (1, True), (2, False)]


def test_threshold_must_be_positive():
    with pytest.raises(ValueError):
        blockage_labels_from_rssi([RssiFrame(0, np.array([1.0]))], 0.0)


def test_geometric_and_threshold_labels_agree_on_the_standard_run(
    standard_bundle, standard_dataset
):
    link = LinkGeometry(
        (14.0, -4.0), (14.0, 8.0),
        object_width=4.0,
        power_threshold=standard_bundle.meta["power_threshold"],
    )
    by_t = {l.t: l.blocked for l in standard_bundle.labels}
    hits = total = 0
    for s in standard_dataset.samples:
        total += 1
        hits += blockage_from_location(s.label, link) == by_t[s.t]
    assert total > 1000
    assert hits / total >= 0.99


# ---------------------------------------------------------------------------
# Prediction plumbing and zero-shot transfer
# ---------------------------------------------------------------------------

def test_predicted_sequence_from_a_zeroed_model_is_all_clear():
    stats = NormStats(
        rssi_mean=np.zeros(3),
        rssi_std=np.ones(3),
        road_origin=np.array([-14.0, 4.0]),
        road_size=np.array([28.0, 4.0]),
        lidar_max_range=16.0,
    )
    model = build_localization_model(3, 4, 5, stats)
    for arr in model.named_params().values():
        arr[...] = 0.0
    link = LinkGeometry((14.0, -4.0), (14.0, 8.0), object_width=4.0)
    flags = predict_blockage_sequence(model, np.full((4, 3), 0.5), link)
    assert flags.shape == (5,) and flags.dtype == bool
    assert not flags.any()


def test_trained_model_tracks_transitions(trained_localization, standard_dataset):
    link = LinkGeometry((14.0, -4.0), (14.0, 8.0), object_width=4.0)
    samples = [
        s for s in standard_dataset.subset("test")
        if s.future_blocked.any() and not s.future_blocked.all()
    ]
    assert len(samples) >= 5
    coords = predict_locations_batch(
        trained_localization, np.stack([s.window for s in samples])
    )
    good = 0
    for s, path in zip(samples, coords):
        flags = np.array(
            [blockage_from_location(loc(x, y), link) for x, y in path]
        )
        good += int((flags == s.future_blocked).sum()) >= 3
    assert good >= math.ceil(len(samples) / 2), (good, len(samples))


def test_transfer_link_replaces_only_the_receiver():
    link = LinkGeometry((14.0, -4.0), (14.0, 8.0), object_width=4.0, power_threshold=0.5)
    moved = transfer_link(link, (28, 8))
    assert moved.rx == (28.0, 8.0)
    assert moved.tx == link.tx
    assert moved.object_width == 4.0 and moved.power_threshold == 0.5
    assert link.rx == (14.0, 8.0)  # original untouched

    # The same object stops blocking once the receiver moves aside.
    between = loc(14.0, 2.0)
    assert blockage_from_location(between, link)
    assert not blockage_from_location(between, moved)

    with pytest.raises(DegenerateLinkError):
        transfer_link(link, link.tx)


def test_transfer_link_is_a_fresh_frozen_instance():
    link = LinkGeometry((0.0, 0.0), (0.0, 12.0))
    moved = transfer_link(link, (3.0, 12.0))
    assert moved is not link
    with pytest.raises(dataclasses.FrozenInstanceError):
        moved.object_width = 2.0
