import math

import numpy as np
import pytest

from spikecodec.encoder import Code, CodeSet
from spikecodec.errors import InvalidCenters, ZeroIntensity
from spikecodec.spikecoder import (
    DEFAULT_CENTERS,
    build_channel_table,
    emit_stream,
    map_code,
    nearest_level,
)


def brute_nearest_log_center(intensity, centers):
    best, best_dist = 0, None
    for level, c in enumerate(centers):
        dist = abs(math.log(abs(intensity)) - math.log(c))
        if best_dist is None or dist < best_dist:
            best, best_dist = level, dist
    return best


def test_default_table_has_120_channels():
    table = build_channel_table(40, DEFAULT_CENTERS)
    assert table.total_channels == 120
    assert table.levels == 3


def test_single_channel_table():
    assert build_channel_table(1, [1.0]).total_channels == 1


def test_channel_ids_enumerate_kernel_major():
    table = build_channel_table(3, [0.1, 10.0])
    assert table.total_channels == 6
    seen = set()
    for m in range(3):
        for level in range(2):
            event = map_code(Code(m=m, tau=0, s=0.1 if level == 0 else 10.0),
                             table, width=64)
            assert event.channel == m * 2 + level
            seen.add(event.channel)
    assert seen == set(range(6))


@pytest.mark.parametrize(
    "centers", [[0.1, 0.1, 1.0], [1.0, 0.5], [-1.0, 2.0], [0.0, 1.0], []]
)
def test_bad_centers_rejected(centers):
    with pytest.raises(InvalidCenters):
        build_channel_table(4, centers)


def test_center_intensity_maps_to_its_level():
    table = build_channel_table(40)
    event = map_code(Code(m=0, tau=0, s=0.4115), table, width=2048)
    assert (event.level, event.channel) == (1, 1)
    assert map_code(Code(m=0, tau=0, s=0.0065), table, width=2048).level == 0


def test_zero_intensity_raises():
    table = build_channel_table(4)
    with pytest.raises(ZeroIntensity):
        map_code(Code(m=0, tau=0, s=0.0), table, width=64)


def test_log_sweep_matches_brute_force_scan():
    table = build_channel_table(40)
    for s in np.logspace(-4, 2, 1000):
        assert nearest_level(s, table) == brute_nearest_log_center(s, DEFAULT_CENTERS)
        assert nearest_level(-s, table) == nearest_level(s, table)


def test_level_never_decreases_with_intensity():
    table = build_channel_table(40)
    levels = [nearest_level(s, table) for s in np.logspace(-5, 3, 500)]
    assert all(b >= a for a, b in zip(levels, levels[1:]))


def test_linear_metric_differs_where_expected():
    table = build_channel_table(40)
    # 0.05: log-nearest is the lowest center, linear-nearest is 0.0065 too;
    # 0.25 sits linearly nearest 0.4115 but check both rules stay consistent
    for s in (0.05, 0.25, 3.0):
        lin = nearest_level(s, table, metric="linear")
        expected = int(np.argmin([abs(s - c) for c in DEFAULT_CENTERS]))
        assert lin == expected


def test_empty_codesets_give_empty_stream():
    table = build_channel_table(40)
    assert emit_stream([], table, width=2048) == []
    assert emit_stream([CodeSet(codes=[])], table, width=2048) == []


def test_single_code_event_time_and_channel():
    table = build_channel_table(40)
    stream = emit_stream(
        [CodeSet(codes=[Code(m=9, tau=-40, s=3.0, segment_index=0)])],
        table,
        width=2048,
    )
    assert len(stream) == 1
    event = stream[0]
    assert event.t == 984  # 0*2048 + 1024 - 40
    assert event.level == brute_nearest_log_center(3.0, DEFAULT_CENTERS) == 1
    assert event.channel == 9 * 3 + 1 == 28


def test_equal_times_ordered_by_channel():
    table = build_channel_table(40)
    codes = [
        Code(m=5, tau=0, s=1.0, segment_index=0),
        Code(m=1, tau=0, s=1.0, segment_index=0),
    ]
    stream = emit_stream([CodeSet(codes=codes)], table, width=64)
    assert [e.t for e in stream] == [32, 32]
    assert [e.channel for e in stream] == sorted(e.channel for e in stream)


def test_stream_sorted_and_conserves_nonzero_codes():
    rng = np.random.default_rng(0)
    table = build_channel_table(8)
    codesets = []
    nonzero = 0
    for seg in range(4):
        codes = []
        for _ in range(10):
            s = float(rng.choice([0.0, rng.lognormal()]))
            nonzero += s != 0.0
            codes.append(Code(m=int(rng.integers(8)), tau=int(rng.integers(-32, 33)),
                              s=s, segment_index=seg))
        codesets.append(CodeSet(codes=codes))
    stream = emit_stream(codesets, table, width=64)
    assert len(stream) == nonzero
    keys = [(e.t, e.channel) for e in stream]
    assert keys == sorted(keys)
    assert all(0 <= e.channel < table.total_channels for e in stream)
    assert all(
        e.channel == e.m * table.levels + e.level for e in stream
    )
