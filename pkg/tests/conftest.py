import numpy as np
import pytest

from spikecodec.dictionary import (
    DictionaryConfig,
    build_dictionary,
    default_fft_len,
    kernel_spectra,
)


@pytest.fixture(scope="session")
def small_dict():
    """8 kernels, W=256: fast enough for exhaustive oracles."""
    return build_dictionary(DictionaryConfig(num_kernels=8, kernel_len=256))


@pytest.fixture(scope="session")
def small_sdict(small_dict):
    return kernel_spectra(small_dict, default_fft_len(256, 256))


@pytest.fixture(scope="session")
def full_dict():
    """The reference operating point: 40 kernels, W=2048, 20 Hz - 8 kHz."""
    return build_dictionary(DictionaryConfig())


@pytest.fixture(scope="session")
def full_sdict(full_dict):
    return kernel_spectra(full_dict, default_fft_len(2048, 2048))


def max_in_support_shift(kernel: np.ndarray, tol: float = 1e-14) -> int:
    """Largest positive shift that discards only negligible stored energy.

    Negative shifts never discard stored samples (the waveform onset sits at
    the buffer midpoint), so the in-support range is [-W//2, this value].
    """
    tail_energy = np.cumsum(kernel[::-1] ** 2)[::-1]
    significant = np.nonzero(tail_energy > tol)[0]
    last = significant[-1] if len(significant) else -1
    return len(kernel) - 1 - int(last)
