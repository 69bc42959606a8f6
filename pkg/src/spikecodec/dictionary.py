"""Gammatone kernel dictionary.

Builds the bank of unit-norm gammatone waveforms used as matching-pursuit
atoms, plus their precomputed spectra for the FFT correlation backend.

The impulse response of each kernel is

    g(t) = t^(n-1) * exp(-2*pi*b*ERB(fc)*t) * cos(2*pi*fc*t + phase)

with order n = 4 and bandwidth scale b = 1.019 by default, ERB per
Glasberg & Moore (1990), and center frequencies equally spaced on the
ERB-rate scale between ``freq_lo`` and ``freq_hi``.

Each kernel occupies a buffer of ``kernel_len`` samples with its onset at
``kernel_len // 2``. The half-buffer lead-in of zeros means every shift in
[-kernel_len/2, 0] is a pure translation of the stored samples, mirroring a
shift register twice the kernel length addressed around its midpoint.
Waveforms are truncated at the buffer end and L2-normalized afterwards.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidConfig, LengthTooSmall

DEFAULT_BANDWIDTH_SCALE = 1.019


def erb_bandwidth(freq_hz):
    """Equivalent rectangular bandwidth (Hz) of an auditory filter at freq_hz."""
    return 24.7 * (4.37 * np.asarray(freq_hz) / 1000.0 + 1.0)


def hz_to_erb_rate(freq_hz):
    """Frequency in Hz -> position on the ERB-rate scale."""
    return 21.4 * np.log10(4.37 * np.asarray(freq_hz) / 1000.0 + 1.0)


def erb_rate_to_hz(rate):
    """Inverse of :func:`hz_to_erb_rate`."""
    return (np.power(10.0, np.asarray(rate) / 21.4) - 1.0) * 1000.0 / 4.37


def erb_space(freq_lo: float, freq_hi: float, count: int) -> np.ndarray:
    """`count` frequencies equally spaced on the ERB-rate scale, inclusive."""
    rates = np.linspace(hz_to_erb_rate(freq_lo), hz_to_erb_rate(freq_hi), count)
    # clip kills the odd half-ulp excursion of the round trip at the endpoints
    return np.clip(erb_rate_to_hz(rates), freq_lo, freq_hi)


@dataclass(frozen=True)
class DictionaryConfig:
    num_kernels: int = 40
    sample_rate: float = 16000.0
    freq_lo: float = 20.0
    freq_hi: float = 8000.0
    kernel_len: int = 2048
    gammatone_order: int = 4
    bandwidth_scale: float = DEFAULT_BANDWIDTH_SCALE
    phase: float = 0.0

    def validate(self) -> None:
        if self.num_kernels < 1:
            raise InvalidConfig(f"num_kernels must be >= 1, got {self.num_kernels}")
        if self.kernel_len < 1:
            raise InvalidConfig(f"kernel_len must be >= 1, got {self.kernel_len}")
        if self.gammatone_order < 1:
            raise InvalidConfig("gammatone_order must be >= 1")
        if not (0.0 < self.freq_lo < self.freq_hi):
            raise InvalidConfig(
                f"need 0 < freq_lo < freq_hi, got {self.freq_lo}, {self.freq_hi}"
            )
        # <= not <: the reference operating point puts freq_hi exactly at
        # Nyquist (20 Hz .. 8 kHz at 16 kHz sampling)
        if not self.freq_hi <= self.sample_rate / 2.0:
            raise InvalidConfig(
                f"freq_hi {self.freq_hi} must not exceed Nyquist "
                f"{self.sample_rate / 2.0}"
            )


@dataclass(frozen=True)
class Dictionary:
    """Immutable bank of unit-norm kernels; safe to share across encoders."""

    kernels: np.ndarray  # (num_kernels, kernel_len)
    center_freqs: np.ndarray  # (num_kernels,), Hz, strictly increasing
    config: DictionaryConfig

    @property
    def num_kernels(self) -> int:
        return self.kernels.shape[0]

    @property
    def kernel_len(self) -> int:
        return self.kernels.shape[1]


@dataclass(frozen=True)
class SpectralDictionary:
    """Forward DFTs of the zero-padded kernels, for the spectral backend."""

    spectra: np.ndarray  # (num_kernels, fft_len), complex
    fft_len: int
    kernel_len: int

    @property
    def num_kernels(self) -> int:
        return self.spectra.shape[0]


def build_dictionary(config: DictionaryConfig = DictionaryConfig()) -> Dictionary:
    """Construct the kernel bank for `config`.

    Deterministic: equal configs produce bitwise-identical dictionaries.

    Raises
    ------
    InvalidConfig
        If the config violates its invariants or a kernel has zero energy.
    """
    config.validate()
    centers = erb_space(config.freq_lo, config.freq_hi, config.num_kernels)

    onset = config.kernel_len // 2
    n_active = config.kernel_len - onset
    t = (np.arange(n_active) + 1.0) / config.sample_rate

    kernels = np.zeros((config.num_kernels, config.kernel_len))
    order = config.gammatone_order
    for i, fc in enumerate(centers):
        decay = 2.0 * np.pi * config.bandwidth_scale * erb_bandwidth(fc)
        env = t ** (order - 1) * np.exp(-decay * t)
        kernels[i, onset:] = env * np.cos(2.0 * np.pi * fc * t + config.phase)

    norms = np.linalg.norm(kernels, axis=1)
    if np.any(norms == 0.0):
        raise InvalidConfig("kernel with zero energy; check kernel_len/frequencies")
    kernels /= norms[:, np.newaxis]

    kernels.flags.writeable = False
    centers.flags.writeable = False
    return Dictionary(kernels=kernels, center_freqs=centers, config=config)


def kernel_onset(config: DictionaryConfig) -> int:
    """Sample index where the gammatone waveform starts within its buffer."""
    return config.kernel_len // 2


def kernel_spectra(
    dictionary: Dictionary, fft_len: int, signal_len: int | None = None
) -> SpectralDictionary:
    """Precompute kernel DFTs at `fft_len` bins.

    `fft_len` must be a power of two at least ``signal_len + kernel_len - 1``
    (the linear-correlation bound); `signal_len` defaults to the kernel
    length, i.e. segments as wide as the kernels.
    """
    kernel_len = dictionary.kernel_len
    if signal_len is None:
        signal_len = kernel_len
    bound = signal_len + kernel_len - 1
    if fft_len < bound:
        raise LengthTooSmall(
            f"fft_len {fft_len} below linear-correlation bound {bound}"
        )
    if fft_len & (fft_len - 1) != 0:
        raise InvalidConfig(f"fft_len must be a power of two, got {fft_len}")

    spectra = np.fft.fft(dictionary.kernels, n=fft_len, axis=1)
    spectra.flags.writeable = False
    return SpectralDictionary(spectra=spectra, fft_len=fft_len, kernel_len=kernel_len)


def default_fft_len(width: int, kernel_len: int) -> int:
    """Smallest power of two satisfying the linear-correlation bound."""
    bound = width + kernel_len - 1
    return 1 << int(np.ceil(np.log2(bound)))


def dump_dictionary_csv(dictionary: Dictionary, fh) -> None:
    """Write one row per kernel: kernel_index,center_freq_hz,s0,s1,..."""
    cols = ",".join(f"s{i}" for i in range(dictionary.kernel_len))
    fh.write(f"kernel_index,center_freq_hz,{cols}\n")
    for i in range(dictionary.num_kernels):
        samples = ",".join(repr(float(v)) for v in dictionary.kernels[i])
        fh.write(f"{i},{repr(float(dictionary.center_freqs[i]))},{samples}\n")
