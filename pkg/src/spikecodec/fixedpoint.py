"""Two's-complement fixed-point arithmetic emulation.

Models the encoder's hardware datapath: a 34-bit signed word with 24
fractional bits by default, round-to-nearest-even at every rescale, and
saturating (or optionally wrapping) overflow. Scalar ops (`quantize`,
`macc`) use exact Python integers and are the bit-level reference; the
`*_array` helpers are vectorized equivalents used by the encoder's fixed
mode and fall back to the scalar path whenever int64 headroom or the
no-overflow fast path cannot be guaranteed.

Accumulation order is ascending sample index throughout, so results are
bit-reproducible across runs and platforms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, InvalidConfig


@dataclass(frozen=True)
class FixedFormat:
    total_bits: int = 34
    frac_bits: int = 24
    overflow: str = "saturate"  # or "wrap"

    def __post_init__(self):
        if not (0 < self.frac_bits < self.total_bits <= 64):
            raise InvalidConfig(
                f"need 0 < frac_bits < total_bits <= 64, got "
                f"{self.frac_bits}:{self.total_bits}"
            )
        if self.overflow not in ("saturate", "wrap"):
            raise InvalidConfig(f"unknown overflow policy {self.overflow!r}")

    @property
    def scale(self) -> int:
        return 1 << self.frac_bits

    @property
    def raw_min(self) -> int:
        return -(1 << (self.total_bits - 1))

    @property
    def raw_max(self) -> int:
        return (1 << (self.total_bits - 1)) - 1

    @property
    def lsb(self) -> float:
        return 2.0 ** (-self.frac_bits)


@dataclass(frozen=True)
class FixedValue:
    raw: int
    fmt: FixedFormat

    def __post_init__(self):
        if not self.fmt.raw_min <= self.raw <= self.fmt.raw_max:
            raise InvalidConfig(
                f"raw {self.raw} outside {self.fmt.total_bits}-bit range"
            )

    @property
    def value(self) -> float:
        return self.raw / self.fmt.scale


@dataclass
class SaturationStats:
    """Overflow events are silent; they are only tallied here."""

    saturations: int = 0
    wraps: int = 0


def _round_half_even(numer: int, frac_bits: int) -> int:
    """Round-to-nearest-even of numer / 2**frac_bits, exact integer math."""
    q, r = divmod(numer, 1 << frac_bits)
    half = 1 << (frac_bits - 1)
    if r > half or (r == half and (q & 1)):
        q += 1
    return q


def _apply_overflow(raw: int, fmt: FixedFormat, stats: SaturationStats | None) -> int:
    if fmt.raw_min <= raw <= fmt.raw_max:
        return raw
    if fmt.overflow == "saturate":
        if stats is not None:
            stats.saturations += 1
        return fmt.raw_max if raw > fmt.raw_max else fmt.raw_min
    if stats is not None:
        stats.wraps += 1
    span = 1 << fmt.total_bits
    return (raw - fmt.raw_min) % span + fmt.raw_min


def quantize(
    x: float, fmt: FixedFormat = FixedFormat(), stats: SaturationStats | None = None
) -> FixedValue:
    """Round-to-nearest-even of x * 2**frac_bits, overflow per format policy.

    Never raises: infinities saturate, NaN quantizes to zero.
    """
    x = float(x)
    if x != x:  # NaN
        return FixedValue(raw=0, fmt=fmt)
    scaled = x * fmt.scale  # power-of-two scaling is exact in binary fp
    if scaled == float("inf"):
        raw = _apply_overflow(fmt.raw_max + 1, fmt, stats)
    elif scaled == float("-inf"):
        raw = _apply_overflow(fmt.raw_min - 1, fmt, stats)
    else:
        raw = _apply_overflow(round(scaled), fmt, stats)
    return FixedValue(raw=raw, fmt=fmt)


def dequantize(v: FixedValue) -> float:
    return v.raw / v.fmt.scale


def macc(
    acc: FixedValue,
    a: FixedValue,
    b: FixedValue,
    stats: SaturationStats | None = None,
) -> FixedValue:
    """acc + a*b, product rescaled to frac_bits with round-to-nearest-even.

    All three operands must share one format. Uses exact integer arithmetic;
    overflow of the accumulate follows the format policy.
    """
    if not (acc.fmt == a.fmt == b.fmt):
        raise DimensionMismatch("macc operands must share one FixedFormat")
    term = _round_half_even(a.raw * b.raw, acc.fmt.frac_bits)
    raw = _apply_overflow(acc.raw + term, acc.fmt, stats)
    return FixedValue(raw=raw, fmt=acc.fmt)


# ----- vectorized helpers (int64 raw arrays) -----

def quantize_array(
    x: np.ndarray, fmt: FixedFormat, stats: SaturationStats | None = None
) -> np.ndarray:
    """Vectorized quantize; returns int64 raw values. NaN -> 0, inf saturates."""
    x = np.asarray(x, dtype=np.float64)
    if fmt.total_bits > 62:
        # raw_max +/- 1 no longer fits the int64 fast path; go scalar
        flat = np.array([quantize(v, fmt, stats).raw for v in x.ravel()])
        return flat.reshape(x.shape)
    scaled = np.rint(x * fmt.scale)
    scaled = np.nan_to_num(
        scaled, nan=0.0, posinf=float(fmt.raw_max + 1), neginf=float(fmt.raw_min - 1)
    )
    # keep values within int64 before the cast; counting happens on the ints
    clipped = np.clip(scaled, float(fmt.raw_min - 1), float(fmt.raw_max + 1))
    return apply_overflow_array(clipped.astype(np.int64), fmt, stats)


def dequantize_array(raw: np.ndarray, fmt: FixedFormat) -> np.ndarray:
    # int64 raw / 2**frac is exact in float64 for |raw| < 2**53
    return raw.astype(np.float64) / fmt.scale


def apply_overflow_array(
    raw: np.ndarray, fmt: FixedFormat, stats: SaturationStats | None = None
) -> np.ndarray:
    over = (raw > fmt.raw_max) | (raw < fmt.raw_min)
    if not np.any(over):
        return raw
    n = int(np.count_nonzero(over))
    if fmt.overflow == "saturate":
        if stats is not None:
            stats.saturations += n
        return np.clip(raw, fmt.raw_min, fmt.raw_max)
    if stats is not None:
        stats.wraps += n
    span = 1 << fmt.total_bits
    return (raw - fmt.raw_min) % span + fmt.raw_min


def rescale_half_even_array(products: np.ndarray, frac_bits: int) -> np.ndarray:
    """Vectorized `_round_half_even` over an int64 product array."""
    q = products >> frac_bits  # arithmetic shift == floor division
    r = products & ((1 << frac_bits) - 1)
    half = 1 << (frac_bits - 1)
    bump = (r > half) | ((r == half) & ((q & 1) == 1))
    return q + bump


def fixed_dot(
    a_raw: np.ndarray,
    b_raw: np.ndarray,
    fmt: FixedFormat,
    stats: SaturationStats | None = None,
) -> int:
    """Dot product with per-term rescale and per-step accumulate overflow.

    Fast path: exact int64 products and a cumulative-sum overflow check.
    Falls back to the scalar `macc` chain when int64 headroom is insufficient
    or any running sum leaves the representable range (per-step saturation
    then matters).
    """
    a_raw = np.asarray(a_raw, dtype=np.int64)
    b_raw = np.asarray(b_raw, dtype=np.int64)
    if a_raw.shape != b_raw.shape:
        raise DimensionMismatch("fixed_dot operands must have equal length")
    if a_raw.size == 0:
        return 0
    amax = int(np.max(np.abs(a_raw)))
    bmax = int(np.max(np.abs(b_raw)))
    if amax == 0 or bmax == 0:
        return 0
    if amax * bmax < (1 << 62) // a_raw.size:
        terms = rescale_half_even_array(a_raw * b_raw, fmt.frac_bits)
        running = np.cumsum(terms)
        if fmt.raw_min <= int(running.min()) and int(running.max()) <= fmt.raw_max:
            return int(running[-1])
    acc = FixedValue(0, fmt)
    for ai, bi in zip(a_raw.tolist(), b_raw.tolist()):
        acc = macc(acc, FixedValue(ai, fmt), FixedValue(bi, fmt), stats)
    return acc.raw


def parse_format(text: str) -> FixedFormat:
    """Parse the CLI syntax 'TOTAL:FRAC', e.g. '34:24'."""
    try:
        total, frac = text.split(":")
        total_bits, frac_bits = int(total), int(frac)
    except ValueError:
        raise InvalidConfig(
            f"bad fixed-point format {text!r}, want TOTAL:FRAC"
        ) from None
    return FixedFormat(total_bits=total_bits, frac_bits=frac_bits)
