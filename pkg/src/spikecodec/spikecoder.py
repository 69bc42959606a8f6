"""Intensity-to-place coding.

Each kernel owns N output channels ("fibres") with fixed center intensities.
A code fires the channel whose center is nearest to the code's intensity
magnitude, so intensity is conveyed by which channel spikes rather than by
an analog value. Event time is the absolute sample position of the shifted
kernel: segment_index * W + W/2 + tau.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .encoder import Code, CodeSet
from .errors import InvalidCenters, ZeroIntensity

# three logarithmically distributed per-kernel center intensities
DEFAULT_CENTERS = (0.0065, 0.4115, 25.8744)


@dataclass(frozen=True)
class ChannelTable:
    centers: tuple[float, ...]
    num_kernels: int

    @property
    def levels(self) -> int:
        return len(self.centers)

    @property
    def total_channels(self) -> int:
        return self.num_kernels * self.levels


@dataclass(frozen=True)
class SpikeEvent:
    t: int  # absolute time in samples
    m: int  # kernel index
    level: int  # 0..N-1
    channel: int  # m * N + level
    magnitude_level_center: float
    raw_intensity: float = 0.0  # signed s of the originating code


def build_channel_table(
    num_kernels: int, centers=DEFAULT_CENTERS
) -> ChannelTable:
    centers = tuple(float(c) for c in centers)
    if len(centers) < 1 or num_kernels < 1:
        raise InvalidCenters("need at least one center and one kernel")
    if any(c <= 0 for c in centers):
        raise InvalidCenters(f"centers must be positive, got {centers}")
    if any(b <= a for a, b in zip(centers, centers[1:])):
        raise InvalidCenters(f"centers must be strictly increasing, got {centers}")
    return ChannelTable(centers=centers, num_kernels=num_kernels)


def nearest_level(intensity: float, table: ChannelTable, metric: str = "log") -> int:
    """Index of the center nearest |intensity|; ties go to the lower level.

    `metric="log"` measures distance between log-magnitudes (the natural
    choice for logarithmically spaced centers); `metric="linear"` compares
    plain differences for low-precision hardware mimicry.
    """
    mag = abs(float(intensity))
    if mag == 0.0:
        raise ZeroIntensity("zero intensity maps to no spike")
    centers = np.asarray(table.centers)
    if metric == "log":
        dist = np.abs(np.log(mag) - np.log(centers))
    else:
        dist = np.abs(mag - centers)
    return int(np.argmin(dist))


def map_code(
    code: Code, table: ChannelTable, width: int, metric: str = "log"
) -> SpikeEvent:
    """Map one code to its spike event; raises ZeroIntensity for s = 0."""
    level = nearest_level(code.s, table, metric)
    return SpikeEvent(
        t=code.segment_index * width + width // 2 + code.tau,
        m=code.m,
        level=level,
        channel=code.m * table.levels + level,
        magnitude_level_center=table.centers[level],
        raw_intensity=code.s,
    )


def emit_stream(
    codesets: list[CodeSet], table: ChannelTable, width: int, metric: str = "log"
) -> list[SpikeEvent]:
    """Serialize codesets to a deterministic (t, channel)-ordered event list.

    Zero-intensity codes emit nothing.
    """
    events = []
    for cs in codesets:
        for code in cs.codes:
            if code.s == 0.0:
                continue
            events.append(map_code(code, table, width, metric))
    events.sort(key=lambda e: (e.t, e.channel))
    return events
