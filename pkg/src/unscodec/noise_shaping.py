"""Spectral and temporal noise shaping on the one-sided DFT.

FDNS divides the spectrum by the reconstructed frequency envelope (the decoder
multiplies back); CTNS runs a complex prediction-error filter along the
frequency axis above a start bin, with the decision to engage it driven by the
measured prediction gain.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_START_BIN = 25
DEFAULT_THRESHOLD_DB = -4.5
GAIN_FLOOR_DB = -100.0
GAIN_CEIL_DB = 20.0


@dataclass
class CtnsDecision:
    gain_db: float
    active: bool
    threshold_db: float = DEFAULT_THRESHOLD_DB


def fdns_forward(bins: np.ndarray, env_values: np.ndarray) -> np.ndarray:
    """Divide each bin by the (strictly positive) envelope value."""
    env = np.asarray(env_values, dtype=float)
    if np.any(env <= 0.0):
        raise ValueError("envelope must be strictly positive")
    return np.asarray(bins) / env


def fdns_inverse(bins: np.ndarray, env_values: np.ndarray) -> np.ndarray:
    """Multiply each bin by the envelope value (decoder side of FDNS)."""
    env = np.asarray(env_values, dtype=float)
    if np.any(env <= 0.0):
        raise ValueError("envelope must be strictly positive")
    return np.asarray(bins) * env


def prediction_error_filter(x: np.ndarray, coeffs: np.ndarray, start: int, stop: int) -> np.ndarray:
    """FIR e[f] = x[f] + sum_k a_k x[f-k] for f in [start, stop]; copy elsewhere.

    History taps below the start index read from the unfiltered input, and
    taps before index 0 are treated as zero.
    """
    x = np.asarray(x)
    a = np.asarray(coeffs)
    e = x.copy()
    for k in range(1, a.size + 1):
        lo = max(start, k)
        if lo > stop:
            continue
        e[lo:stop + 1] = e[lo:stop + 1] + a[k - 1] * x[lo - k:stop + 1 - k]
    return e


def inverse_prediction_filter(e: np.ndarray, coeffs: np.ndarray, start: int, stop: int) -> np.ndarray:
    """Recursive inverse of :func:`prediction_error_filter` over [start, stop]."""
    e = np.asarray(e)
    a = np.asarray(coeffs)
    x = e.copy()
    p = a.size
    for f in range(start, stop + 1):
        lo = max(0, f - p)
        hist = x[lo:f][::-1]
        x[f] = e[f] - np.dot(a[:f - lo], hist)
    return x


def ctns_filter(res: np.ndarray, coeffs: np.ndarray, start_bin: int = DEFAULT_START_BIN) -> np.ndarray:
    """Complex prediction-error filtering along frequency.

    Operates on a one-sided spectrum; the last bin (Nyquist) always passes
    through untouched and bins below ``start_bin`` serve only as history.
    """
    return prediction_error_filter(res, coeffs, start_bin, len(res) - 2)


def ctns_unfilter(filtered: np.ndarray, coeffs: np.ndarray, start_bin: int = DEFAULT_START_BIN) -> np.ndarray:
    """Inverse CTNS filtering (decoder side)."""
    return inverse_prediction_filter(filtered, coeffs, start_bin, len(filtered) - 2)


def prediction_gain(x_fd: np.ndarray, x_ct: np.ndarray, start_bin: int = DEFAULT_START_BIN,
                    threshold_db: float = DEFAULT_THRESHOLD_DB) -> CtnsDecision:
    """Energy ratio of the predicted component against the unfiltered residual.

    G = 10 log10( sum |x_fd - x_ct|^2 / sum |x_fd|^2 ) over the filtered bins;
    the filter engages when G exceeds the threshold.  Degenerate frames
    (silent band, or nothing predicted) clamp to the floor and stay inactive.
    """
    if len(x_fd) != len(x_ct):
        raise ValueError("residual sequences must have equal length")
    stop = len(x_fd) - 1
    fd = np.asarray(x_fd)[start_bin:stop]
    ct = np.asarray(x_ct)[start_bin:stop]
    den = float(np.sum(np.abs(fd) ** 2))
    num = float(np.sum(np.abs(fd - ct) ** 2))
    if den <= 0.0 or num <= 0.0:
        return CtnsDecision(gain_db=GAIN_FLOOR_DB, active=False, threshold_db=threshold_db)
    gain = float(np.clip(10.0 * np.log10(num / den), GAIN_FLOOR_DB, GAIN_CEIL_DB))
    return CtnsDecision(gain_db=gain, active=gain > threshold_db, threshold_db=threshold_db)
