"""Inverse transform: reconstruct a waveform from code sets.

Reconstruction linearly superposes every code's scaled shifted kernel at its
segment offset. By default the raw signed intensities are used; quantized
mode substitutes the intensity-to-place center for each magnitude (keeping
the sign), which exposes the information lost in the spike representation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dictionary import Dictionary
from .encoder import CodeSet, shift_kernel
from .errors import CodeOutOfBounds, InvalidConfig, LengthMismatch
from .spikecoder import ChannelTable, nearest_level


@dataclass
class ReconstructionReport:
    l2_error: float
    snr_db: float
    codes_used: int = 0
    per_k_curve: list[tuple[int, float]] = field(default_factory=list)


def _effective_intensity(
    s: float, quantized: bool, table: ChannelTable | None, metric: str
) -> float:
    if not quantized or s == 0.0:
        return s
    level = nearest_level(s, table, metric)
    return math.copysign(table.centers[level], s)


def reconstruct(
    codesets: list[CodeSet],
    dictionary: Dictionary,
    width: int,
    total_len: int,
    quantized: bool = False,
    table: ChannelTable | None = None,
    metric: str = "log",
) -> np.ndarray:
    """Sum s_i * shift_kernel(kernel m_i, tau_i) at each segment offset."""
    if quantized and table is None:
        raise InvalidConfig("quantized reconstruction needs a ChannelTable")
    out = np.zeros(total_len)
    for cs in codesets:
        for code in cs.codes:
            if not (0 <= code.m < dictionary.num_kernels):
                raise CodeOutOfBounds(f"kernel index {code.m} out of range")
            if abs(code.tau) > width // 2:
                raise CodeOutOfBounds(f"shift {code.tau} out of range for W={width}")
            offset = code.segment_index * width
            if offset < 0 or offset + width > total_len:
                raise CodeOutOfBounds(
                    f"segment {code.segment_index} does not fit in {total_len} samples"
                )
            s = _effective_intensity(code.s, quantized, table, metric)
            out[offset : offset + width] += s * shift_kernel(
                dictionary.kernels[code.m], code.tau, width
            )
    return out


def reconstruction_error(x: np.ndarray, x_hat: np.ndarray) -> ReconstructionReport:
    """L2 error and SNR of a reconstruction against the reference signal."""
    x = np.asarray(x, dtype=np.float64)
    x_hat = np.asarray(x_hat, dtype=np.float64)
    if x.shape != x_hat.shape:
        raise LengthMismatch(f"length mismatch: {x.shape} vs {x_hat.shape}")
    err = float(np.linalg.norm(x - x_hat))
    ref = float(np.linalg.norm(x))
    if err == 0.0:
        snr = math.inf
    elif ref == 0.0:
        snr = -math.inf
    else:
        snr = 20.0 * math.log10(ref / err)
    return ReconstructionReport(l2_error=err, snr_db=snr)


def error_curve(
    x: np.ndarray,
    codesets: list[CodeSet],
    dictionary: Dictionary,
    width: int,
    quantized: bool = False,
    table: ChannelTable | None = None,
    metric: str = "log",
) -> list[tuple[int, float]]:
    """L2 error after keeping only the first k codes of every segment,
    for k = 1..max codes per segment.

    Computed by running the subtractions in emission order, so the curve
    reproduces the encoder's own residual trajectory.
    """
    x = np.asarray(x, dtype=np.float64)
    residual = x.copy()
    max_k = max((len(cs.codes) for cs in codesets), default=0)
    curve = []
    for k in range(1, max_k + 1):
        for cs in codesets:
            if len(cs.codes) < k:
                continue
            code = cs.codes[k - 1]
            offset = code.segment_index * width
            if offset < 0 or offset + width > len(x):
                raise CodeOutOfBounds(
                    f"segment {code.segment_index} does not fit in {len(x)} samples"
                )
            s = _effective_intensity(code.s, quantized, table, metric)
            residual[offset : offset + width] -= s * shift_kernel(
                dictionary.kernels[code.m], code.tau, width
            )
        curve.append((k, float(np.linalg.norm(residual))))
    return curve


def evaluate_reconstruction(
    x: np.ndarray,
    codesets: list[CodeSet],
    dictionary: Dictionary,
    width: int,
    quantized: bool = False,
    table: ChannelTable | None = None,
    metric: str = "log",
) -> ReconstructionReport:
    """Full report: final error, SNR, code count, and the per-k curve."""
    x_hat = reconstruct(
        codesets, dictionary, width, len(x), quantized, table, metric
    )
    report = reconstruction_error(x, x_hat)
    report.codes_used = sum(len(cs.codes) for cs in codesets)
    report.per_k_curve = error_curve(
        x, codesets, dictionary, width, quantized, table, metric
    )
    return report
