"""Deterministic synthetic test signals.

Everything the metrics, experiments, and acceptance tests need is generated
here from fixed seeds, so no recorded material ships with the repo.
"""

from __future__ import annotations

import numpy as np

RATE = 12800


def silence(seconds: float, rate: int = RATE) -> np.ndarray:
    return np.zeros(int(seconds * rate))


def tone(freq_hz: float, seconds: float, amp: float = 0.5, rate: int = RATE) -> np.ndarray:
    t = np.arange(int(seconds * rate)) / rate
    return amp * np.sin(2.0 * np.pi * freq_hz * t)


def harmonic_tone(f0_hz: float, seconds: float, n_partials: int = 8,
                  amp: float = 0.6, vibrato_hz: float = 5.0, rate: int = RATE) -> np.ndarray:
    """Sustained harmonic note with mild vibrato; music-like sustained content."""
    n = int(seconds * rate)
    t = np.arange(n) / rate
    phase = 2.0 * np.pi * f0_hz * (t + 0.002 * np.sin(2.0 * np.pi * vibrato_hz * t) / vibrato_hz)
    x = np.zeros(n)
    for k in range(1, n_partials + 1):
        if k * f0_hz >= rate / 2:
            break
        x += np.sin(k * phase + 0.7 * k) / k
    return amp * x / np.abs(x).max()


def click_train(seconds: float, period_s: float = 0.25, burst_len: int = 1200,
                amp: float = 0.9, seed: int = 11, rate: int = RATE,
                start_s: float = 0.1):
    """Castanet-style percussive bursts.

    Each burst mixes noise with two randomly placed resonant rings under a
    three-rate decay envelope, so the bursts carry a strong temporal envelope
    without being an exactly low-order-predictable process.  Returns
    (signal, attack_sample_indices).
    """
    rng = np.random.default_rng(seed)
    n = int(seconds * rate)
    x = np.zeros(n)
    attacks = []
    s = int(start_s * rate)
    while s + burst_len < n:
        t = np.arange(burst_len) / rate
        env = np.exp(-t / 0.002) + 0.5 * np.exp(-t / 0.015) + 0.25 * np.exp(-t / 0.08)
        f1 = rng.uniform(1200.0, 2800.0)
        f2 = rng.uniform(3200.0, 5600.0)
        ring = (0.7 * np.sin(2.0 * np.pi * f1 * t + rng.uniform(0, 6))
                + 0.4 * np.sin(2.0 * np.pi * f2 * t + rng.uniform(0, 6)))
        x[s:s + burst_len] += env * (0.6 * rng.standard_normal(burst_len) + ring)
        attacks.append(s)
        s += int(period_s * rate)
    peak = np.abs(x).max()
    if peak > 0:
        x *= amp / peak
    return x, attacks


def speechish(seconds: float, amp: float = 0.55, seed: int = 5, rate: int = RATE) -> np.ndarray:
    """Amplitude-modulated low-passed noise plus a wandering buzz; rough vocal
    texture with syllabic energy bursts."""
    rng = np.random.default_rng(seed)
    n = int(seconds * rate)
    t = np.arange(n) / rate
    noise = rng.standard_normal(n)
    # crude one-pole lowpass, voicy tilt
    lp = np.empty(n)
    acc = 0.0
    for i in range(n):
        acc = 0.82 * acc + 0.18 * noise[i]
        lp[i] = acc
    syllables = np.clip(np.sin(2.0 * np.pi * 3.1 * t) + 0.4 * np.sin(2.0 * np.pi * 0.7 * t), 0.0, None)
    buzz = 0.35 * np.sin(2.0 * np.pi * (120.0 + 25.0 * np.sin(2.0 * np.pi * 0.5 * t)) * t)
    x = (lp + buzz) * syllables
    return amp * x / np.abs(x).max()


def attack_then_sustain(seconds: float = 2.0, attack_s: float = 0.8, amp: float = 0.9,
                        seed: int = 23, rate: int = RATE):
    """A quiet sustained tone interrupted by one sharp, fast-decaying attack.

    The attack dies within a few milliseconds, so the surrounding signal is
    quiet; spread-out quantization noise from coding the attack frame is then
    directly visible next to it.  Returns (signal, attack_sample_index).
    """
    rng = np.random.default_rng(seed)
    n = int(seconds * rate)
    attack = int(attack_s * rate)
    t = np.arange(n) / rate
    x = 0.04 * np.sin(2.0 * np.pi * 523.0 * t)
    burst = int(0.01 * rate)
    x[attack:attack + burst] += np.exp(-np.arange(burst) / (0.0025 * rate)) * rng.standard_normal(burst)
    return amp * x / np.abs(x).max(), attack


def organ_chord(seconds: float, amp: float = 0.6, rate: int = RATE) -> np.ndarray:
    """Three-voice sustained chord with slow tremolo and a soft breath floor."""
    n = int(seconds * rate)
    t = np.arange(n) / rate
    x = np.zeros(n)
    for f0, w in ((196.0, 1.0), (247.0, 0.8), (311.0, 0.65)):
        trem = 1.0 + 0.12 * np.sin(2.0 * np.pi * (4.5 + f0 / 200.0) * t)
        for k in (1, 2, 3, 4):
            x += w * trem * np.sin(2.0 * np.pi * k * f0 * t + 1.3 * k) / (k * k)
    rng = np.random.default_rng(17)
    x += 0.004 * rng.standard_normal(n)
    return amp * x / np.abs(x).max()


def mixed_corpus(seconds_total: float = 30.0, rate: int = RATE):
    """Named corpus items totalling roughly ``seconds_total`` seconds."""
    per = seconds_total / 5.0
    items = {
        "harmonic_low": harmonic_tone(165.0, per),
        "harmonic_high": harmonic_tone(392.0, per, n_partials=10, vibrato_hz=6.5),
        "speechish": speechish(per),
        "castanet": click_train(per)[0],
        "organ_chord": organ_chord(per),
    }
    return items
