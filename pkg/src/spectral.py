"""
Sample statistics of uniformly sampled traces: autocorrelation, Welch PSD,
exponential timescale fits and synthesis of coloured Gaussian noise.
"""

import logging
from typing import Callable, Optional, Tuple

import numpy as np
from scipy import optimize, signal

from errors import DomainError, InsufficientDataError
from noise import Band, Spectrum

logger = logging.getLogger(__name__)


def sample_acf(x: np.ndarray, max_lag_steps: int) -> np.ndarray:
    """
    Unbiased sample autocovariance of x for lags 0..max_lag_steps.
    Uses a zero-padded FFT so the cost stays O(n log n).
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    if max_lag_steps < 0:
        raise DomainError(f"max_lag_steps must be >= 0, got {max_lag_steps}")
    if n <= max_lag_steps:
        raise InsufficientDataError(
            f"{n} samples cannot give an ACF up to lag {max_lag_steps}"
        )
    centred = x - x.mean()
    n_fft = 1 << int(np.ceil(np.log2(2 * n)))
    transform = np.fft.rfft(centred, n=n_fft)
    raw = np.fft.irfft(transform * np.conjugate(transform), n=n_fft)
    lags = np.arange(max_lag_steps + 1)
    return raw[: max_lag_steps + 1] / (n - lags)


def exponential_timescale(
    lags: np.ndarray, values: np.ndarray, initial_guess: Optional[float] = None
) -> float:
    """
    Least-squares fit of values ~ a * exp(-lag / tau); returns tau.
    """
    lags = np.asarray(lags, dtype=float)
    values = np.asarray(values, dtype=float)
    if lags.size < 3:
        raise InsufficientDataError("need at least 3 lags to fit a timescale")
    if initial_guess is None:
        below = np.nonzero(values < values[0] / np.e)[0]
        initial_guess = lags[below[0]] if below.size else lags[-1]
        initial_guess = max(initial_guess, lags[1])

    def model(t, amplitude, tau):
        return amplitude * np.exp(-t / tau)

    params, _ = optimize.curve_fit(
        model,
        lags,
        values,
        p0=(values[0], initial_guess),
        bounds=([0.0, 1e-300], [np.inf, np.inf]),
    )
    return float(params[1])


def welch_spectrum(
    x: np.ndarray, dt: float, segment_length: Optional[int] = None
) -> Spectrum:
    """
    Welch-averaged PSD of x, returned two-sided on its positive side
    (the one-sided estimate halved). The DC bin is dropped.
    """
    x = np.asarray(x, dtype=float)
    if segment_length is None:
        segment_length = min(x.size, 4096)
    frequencies, one_sided = signal.welch(
        x, fs=1.0 / dt, nperseg=segment_length, detrend="constant"
    )
    frequencies = frequencies[1:]
    two_sided = one_sided[1:] / 2
    if frequencies.size > 1 and np.isclose(frequencies[-1], 0.5 / dt):
        # Nyquist bin is not doubled by the one-sided estimate.
        two_sided[-1] = one_sided[-1]
    return Spectrum(frequencies, two_sided, Band(frequencies[0], frequencies[-1]))


def synthesis_band(n_samples: int, dt: float) -> Tuple[float, float]:
    """
    Frequencies a trace of n_samples with step dt can represent,
    [1/T, 1/(2 dt)].
    """
    return 1.0 / (n_samples * dt), 0.5 / dt


def shaped_noise(
    psd: Callable[[np.ndarray], np.ndarray],
    n_samples: int,
    dt: float,
    rng: np.random.Generator,
) -> np.ndarray:
    """
    Real Gaussian noise whose two-sided PSD follows psd on the synthesis
    band. Each rfft bin gets an independent complex Gaussian amplitude
    scaled to the target power; the DC bin is zero.
    """
    if n_samples < 2:
        raise DomainError(f"need at least 2 samples, got {n_samples}")
    fs = 1.0 / dt
    frequencies = np.fft.rfftfreq(n_samples, dt)
    target = np.zeros_like(frequencies)
    target[1:] = psd(frequencies[1:])
    scale = np.sqrt(target * fs * n_samples / 2)
    spectrum = scale * (
        rng.standard_normal(frequencies.size)
        + 1j * rng.standard_normal(frequencies.size)
    )
    if n_samples % 2 == 0:
        # Nyquist bin must be real.
        spectrum[-1] = np.sqrt(target[-1] * fs * n_samples) * rng.standard_normal()
    return np.fft.irfft(spectrum, n=n_samples)
