"""Hybrid polar quantization of complex residual coefficients.

Magnitudes use three regions: an entropy-constrained 8-cell core below 5.056,
a companded (x^(3/4)) mid region, and a uniform outlier region reached through
an escape index.  Phase resolution follows the magnitude index and is halved
in sub-bands whose share of the frequency-envelope peaks falls at or below a
contrast threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .util import round_half_up, wrap_phase

ECUPQ_RATE = 2.495
ECUPQ_R7 = 5.056
R7_TILDE = 8.5 ** (4.0 / 3.0)
OUTLIER_MIN = 18
OUTLIER_MAX = (1 << 16) - 1
ESCAPE_INDEX = 8
NONLINEAR_SHIFT = 6
FER_THRESHOLD = 0.125


class ConvergenceError(RuntimeError):
    """Table design failed to converge; carries the last iterate."""

    def __init__(self, msg, last_table=None):
        super().__init__(msg)
        self.last_table = last_table


@dataclass(frozen=True)
class EcupqTable:
    """Quantizer core table: 8 thresholds (7 interior + the 5.056 sentinel)
    and 8 reconstruction levels with a zero deadzone level."""

    thresholds: tuple
    levels: tuple
    design_rate: float = ECUPQ_RATE
    version: str = "rayleigh-2.495-v1"

    def __post_init__(self):
        if len(self.thresholds) != 8 or len(self.levels) != 8:
            raise ValueError("table needs 8 thresholds (incl. sentinel) and 8 levels")
        if self.levels[0] != 0.0:
            raise ValueError("deadzone level must be zero")
        if np.any(np.diff(self.thresholds) <= 0):
            raise ValueError("thresholds must be strictly increasing")

    @property
    def interior(self) -> np.ndarray:
        return np.asarray(self.thresholds[:7])

    @property
    def r7(self) -> float:
        return self.thresholds[-1]


@dataclass
class MagnitudeCode:
    index1: int
    index2: int | None = None


@dataclass(frozen=True)
class PhaseCellSets:
    high: tuple = (1, 8, 16, 16, 32, 32, 64, 64)
    low: tuple = (1, 4, 8, 8, 16, 16, 32, 32)


DEFAULT_PHASE_SETS = PhaseCellSets()


@dataclass
class FerProfile:
    """Per-band share of the (shifted) dB envelope maxima."""

    fer: np.ndarray
    threshold: float = FER_THRESHOLD

    @property
    def high_contrast(self) -> np.ndarray:
        return self.fer > self.threshold


def compute_fer(values_db: np.ndarray, layout, threshold: float = FER_THRESHOLD) -> FerProfile:
    """Band-max envelope ratios from the dB envelope.

    The dB values are shifted by their minimum over the banded bins so every
    band maximum is non-negative; a flat envelope degenerates to equal shares.
    """
    vdb = np.asarray(values_db, dtype=float)
    banded = vdb[:layout.upper_edges[-1]]
    shifted = banded - banded.min()
    maxima = np.array([shifted[lo:hi].max() for lo, hi in layout.ranges()])
    total = maxima.sum()
    if total <= 0.0:
        fer = np.full(layout.n_bands, 1.0 / layout.n_bands)
    else:
        fer = maxima / total
    return FerProfile(fer=fer, threshold=threshold)


def quantize_magnitudes(mags: np.ndarray, table: EcupqTable):
    """Vectorized hybrid magnitude quantization.

    Returns (index1, index2) integer arrays; index2 is only meaningful where
    index1 equals the escape value.
    """
    a = np.asarray(mags, dtype=float)
    if np.any(a < 0) or not np.all(np.isfinite(a)):
        raise ValueError("magnitudes must be finite and non-negative")
    idx1 = np.searchsorted(table.interior, a, side="right")
    nonlinear = a >= table.r7
    if np.any(nonlinear):
        raw = np.floor(a[nonlinear] ** 0.75 + 0.5)
        idx1 = idx1.astype(int)
        idx1[nonlinear] = (raw + NONLINEAR_SHIFT).astype(int)
    outlier = a >= R7_TILDE
    idx2 = np.zeros(a.shape, dtype=int)
    if np.any(outlier):
        idx1[outlier] = ESCAPE_INDEX
        idx2[outlier] = np.clip(round_half_up(a[outlier]), OUTLIER_MIN, OUTLIER_MAX)
    return idx1.astype(int), idx2


def dequantize_magnitudes(idx1: np.ndarray, idx2: np.ndarray, table: EcupqTable) -> np.ndarray:
    """Vectorized inverse of :func:`quantize_magnitudes`.

    The companded region inverts with the 4/3 power, floored at the region
    boundary so every code requantizes to itself.
    """
    i1 = np.asarray(idx1, dtype=int)
    levels = np.asarray(table.levels)
    out = levels[np.clip(i1, 0, 7)]
    nonlinear = i1 > ESCAPE_INDEX
    if np.any(nonlinear):
        out = out.astype(float)
        out[nonlinear] = np.maximum((i1[nonlinear] - NONLINEAR_SHIFT) ** (4.0 / 3.0), table.r7)
    escape = i1 == ESCAPE_INDEX
    if np.any(escape):
        out = out.astype(float)
        out[escape] = np.asarray(idx2, dtype=float)[escape]
    return np.asarray(out, dtype=float)


def quantize_magnitude(a: float, table: EcupqTable) -> MagnitudeCode:
    """Scalar hybrid quantization of one non-negative magnitude."""
    idx1, idx2 = quantize_magnitudes(np.array([a]), table)
    i1 = int(idx1[0])
    return MagnitudeCode(index1=i1, index2=int(idx2[0]) if i1 == ESCAPE_INDEX else None)


def dequantize_magnitude(code: MagnitudeCode, table: EcupqTable) -> float:
    if code.index1 == ESCAPE_INDEX and code.index2 is None:
        raise ValueError("escape code requires index2")
    idx2 = code.index2 if code.index2 is not None else 0
    return float(dequantize_magnitudes(np.array([code.index1]), np.array([idx2]), table)[0])


def phase_cells(index1: int, band_high_contrast: bool,
                sets: PhaseCellSets = DEFAULT_PHASE_SETS) -> int:
    """Number of phase cells for one coefficient; 1 means no phase is sent."""
    entry = min(int(index1), 7)
    return (sets.high if band_high_contrast else sets.low)[entry]


def phase_cells_array(idx1: np.ndarray, band_high_contrast: bool,
                      sets: PhaseCellSets = DEFAULT_PHASE_SETS) -> np.ndarray:
    table = np.asarray(sets.high if band_high_contrast else sets.low)
    return table[np.minimum(np.asarray(idx1, dtype=int), 7)]


def quantize_phase(theta, n_cells):
    """Uniform phase quantization to one of n_cells (a power of two)."""
    n = np.asarray(n_cells, dtype=int)
    if np.any(n < 1):
        raise ValueError("cell count must be at least 1")
    wrapped = wrap_phase(theta)
    idx = np.floor((wrapped + np.pi) * n / (2.0 * np.pi)).astype(int) % np.maximum(n, 1)
    return idx if np.ndim(n_cells) or np.ndim(theta) else int(idx)


def dequantize_phase(index, n_cells):
    """Cell-center reconstruction; a single cell always decodes to phase 0."""
    n = np.asarray(n_cells, dtype=float)
    if np.any(n < 1):
        raise ValueError("cell count must be at least 1")
    rec = -np.pi + (np.asarray(index, dtype=float) + 0.5) * 2.0 * np.pi / n
    rec = np.where(n == 1, 0.0, rec)
    return rec if np.ndim(n_cells) or np.ndim(index) else float(rec)


# --- entropy-constrained table design on the unit-variance-component
# --- complex-Gaussian magnitude density (Rayleigh, sigma = 1)

def _m0(a, b):
    return math.exp(-a * a / 2.0) - math.exp(-b * b / 2.0)


def _m1(a, b):
    g = math.sqrt(math.pi / 2.0)
    return (a * math.exp(-a * a / 2.0) - b * math.exp(-b * b / 2.0)
            + g * (math.erf(b / math.sqrt(2.0)) - math.erf(a / math.sqrt(2.0))))


def _m2(a, b):
    return (a * a + 2.0) * math.exp(-a * a / 2.0) - (b * b + 2.0) * math.exp(-b * b / 2.0)


def _lloyd_pass(bounds, lam, r7):
    """One centroid + penalized-threshold update; returns (bounds, levels, p, H, mse)."""
    edges = np.concatenate([[0.0], bounds, [r7]])
    m0 = np.array([_m0(edges[j], edges[j + 1]) for j in range(8)])
    m1 = np.array([_m1(edges[j], edges[j + 1]) for j in range(8)])
    m2 = np.array([_m2(edges[j], edges[j + 1]) for j in range(8)])
    levels = np.where(m0 > 1e-300, m1 / np.maximum(m0, 1e-300), 0.5 * (edges[:-1] + edges[1:]))
    levels[0] = 0.0
    mass = m0.sum()
    p = m0 / mass
    # floor the penalty probabilities so a temporarily starved cell is not
    # squeezed out of existence by its own code length
    codelen = -np.log2(np.maximum(p, 1e-3))
    new_bounds = np.empty(7)
    for j in range(7):
        dy = levels[j + 1] - levels[j]
        t = 0.5 * (levels[j] + levels[j + 1])
        if dy > 1e-12:
            t += lam * (codelen[j + 1] - codelen[j]) / (2.0 * dy)
        new_bounds[j] = t
    eps = 1e-6
    new_bounds = np.clip(new_bounds, eps, r7 - 8 * eps)
    new_bounds = np.maximum.accumulate(new_bounds)
    for j in range(1, 7):
        if new_bounds[j] <= new_bounds[j - 1]:
            new_bounds[j] = min(new_bounds[j - 1] + eps, r7 - (7 - j) * eps)
    entropy = float(-(p * np.log2(np.maximum(p, 1e-300))).sum())
    mse = float(((m2 - 2.0 * levels * m1 + levels ** 2 * m0) / mass).sum())
    return new_bounds, levels, p, entropy, mse


def _lloyd_converge(lam, bounds, r7, iters=300):
    levels, entropy, mse = None, None, None
    for _ in range(iters):
        new_bounds, levels, _, entropy, mse = _lloyd_pass(bounds, lam, r7)
        if np.max(np.abs(new_bounds - bounds)) < 1e-12:
            bounds = new_bounds
            break
        bounds = new_bounds
    return bounds, levels, entropy, mse


def design_ecupq_table(rate_target: float = ECUPQ_RATE, r7_fixed: float = ECUPQ_R7,
                       band: float = 0.05, max_outer: int = 500) -> EcupqTable:
    """Design the 8-cell core by entropy-constrained Lloyd iteration.

    The Lagrange multiplier on code length is bisected until the cell entropy
    lands inside [rate_target - band, rate_target + band]; the top boundary is
    pinned and the deadzone level is held at zero throughout.
    """
    init = np.linspace(r7_fixed / 8.0, r7_fixed * 7.0 / 8.0, 7)
    upper = rate_target + band
    # bisect for the smallest multiplier whose entropy enters the target band;
    # approaching from below keeps the deadzone as wide as the rate allows
    lam_lo, lam_hi = 0.0, 0.5
    last = None
    entropy = float("nan")
    for _ in range(max_outer):
        lam = 0.5 * (lam_lo + lam_hi)
        bounds, levels, entropy, _ = _lloyd_converge(lam, init.copy(), r7_fixed)
        last = (bounds, levels)
        if entropy > upper:
            lam_lo = lam
        else:
            lam_hi = lam
        if lam_hi - lam_lo < 1e-12 and entropy <= upper:
            if abs(entropy - rate_target) <= band:
                return EcupqTable(
                    thresholds=tuple(float(v) for v in np.concatenate([bounds, [r7_fixed]])),
                    levels=tuple(float(v) for v in levels),
                    design_rate=rate_target,
                    version=f"rayleigh-{rate_target:g}-v1",
                )
            break
    raise ConvergenceError(
        f"entropy {entropy:.4f} did not reach {rate_target} +/- {band}", last_table=last
    )


def table_entropy_and_mse(table: EcupqTable):
    """Cell entropy and in-region MSE of a table on the design density."""
    edges = np.concatenate([[0.0], np.asarray(table.thresholds)])
    levels = np.asarray(table.levels)
    m0 = np.array([_m0(edges[j], edges[j + 1]) for j in range(8)])
    m1 = np.array([_m1(edges[j], edges[j + 1]) for j in range(8)])
    m2 = np.array([_m2(edges[j], edges[j + 1]) for j in range(8)])
    mass = m0.sum()
    p = m0 / mass
    entropy = float(-(p * np.log2(np.maximum(p, 1e-300))).sum())
    mse = float(((m2 - 2.0 * levels * m1 + levels ** 2 * m0) / mass).sum())
    return entropy, mse


def uniform_quantizer_mse(r7: float = ECUPQ_R7, n_cells: int = 8) -> float:
    """MSE of the midpoint-reconstruction uniform quantizer on [0, r7]."""
    edges = np.linspace(0.0, r7, n_cells + 1)
    mids = 0.5 * (edges[:-1] + edges[1:])
    mass = _m0(0.0, r7)
    total = 0.0
    for j in range(n_cells):
        a, b = edges[j], edges[j + 1]
        total += _m2(a, b) - 2.0 * mids[j] * _m1(a, b) + mids[j] ** 2 * _m0(a, b)
    return total / mass


# Frozen output of design_ecupq_table() at the default settings; regenerate
# with the design-ecupq CLI command if the design parameters change.
DEFAULT_ECUPQ_TABLE = EcupqTable(
    thresholds=(
        0.10002145347689399,
        0.5923245576004721,
        1.0158351089207314,
        1.4368262547623647,
        1.8717702824906262,
        2.3459899013972203,
        2.932406802980782,
        5.056,
    ),
    levels=(
        0.0,
        0.39826938550745106,
        0.8108674703325153,
        1.220461352915259,
        1.638045806040988,
        2.078908076238058,
        2.5771120398735383,
        3.2425708120290717,
    ),
    design_rate=2.495,
    version="rayleigh-2.495-v1",
)
