"""Synthetic heart/lung sound generator for desk-scale pipeline testing.

Deliberately simple physiologically-flavored signal models: they validate
pipeline mechanics, not clinical performance.  Real recordings can be supplied
in the same WAV + manifest layout.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from scipy.signal import lfilter

from .core import AudioSignal, Rng
from .audioproc import write_wav

PEAK = 0.9


def _lowpass_kernel(cutoff_hz: float, sample_rate: int, taps: int = 101) -> np.ndarray:
    """Windowed-sinc FIR low-pass, unit DC gain."""
    t = np.arange(taps) - (taps - 1) / 2.0
    fc = cutoff_hz / sample_rate
    k = 2 * fc * np.sinc(2 * fc * t)
    k *= np.hamming(taps)
    return k / k.sum()


def _bandpass(x: np.ndarray, low_hz: float, high_hz: float, sample_rate: int) -> np.ndarray:
    lo = np.convolve(x, _lowpass_kernel(high_hz, sample_rate), mode="same")
    return lo - np.convolve(x, _lowpass_kernel(low_hz, sample_rate), mode="same")


def _render_heart(duration_s: float, sample_rate: int, rng: Rng) -> tuple[np.ndarray, np.ndarray]:
    """Returns (base, abnormality): S1/S2 pairs over pink-like noise; the
    abnormality is a band-limited murmur between S1 and S2 of each beat."""
    n = int(round(duration_s * sample_rate))

    # pink-like background: one-pole low-passed white noise
    white = rng.gaussian_array(n)
    a = 0.95
    bg = lfilter([1 - a], [1, -a], white)
    bg *= 0.04 / max(np.abs(bg).max(), 1e-12)

    impulses = np.zeros(n)
    murmur_mask = np.zeros(n)
    period = 60.0 / 72.0
    t = 0.05
    while t < duration_s - 0.5:
        jitter = 1.0 + 0.05 * (2.0 * rng.uniform() - 1.0)
        beat = period * jitter
        s1 = int(t * sample_rate)
        s2 = int((t + 0.30 * beat) * sample_rate)
        if s1 < n:
            impulses[s1] = 1.0
        if s2 < n:
            impulses[s2] = 0.7
        m0 = int((t + 0.10 * beat) * sample_rate)
        m1 = int((t + 0.26 * beat) * sample_rate)
        murmur_mask[m0 : min(m1, n)] = 1.0
        t += beat
    base = np.convolve(impulses, _lowpass_kernel(150.0, sample_rate), mode="same")
    base = base / max(np.abs(base).max(), 1e-12) + bg

    murmur_noise = rng.gaussian_array(n)
    murmur = _bandpass(murmur_noise, 150.0, 400.0, sample_rate)
    murmur = 0.30 * murmur / max(np.abs(murmur).max(), 1e-12) * murmur_mask
    return base, murmur


def _render_lung(duration_s: float, sample_rate: int, rng: Rng) -> tuple[np.ndarray, np.ndarray]:
    """Returns (base, abnormality): breathing-modulated filtered noise; the
    abnormality is an expiration wheeze tone plus sparse expiratory crackles."""
    n = int(round(duration_s * sample_rate))
    t = np.arange(n) / sample_rate
    phase = np.sin(2.0 * np.pi * 0.25 * t)
    insp = np.maximum(phase, 0.0)
    exp = np.maximum(-phase, 0.0)
    envelope = 0.05 + 1.0 * insp + 0.25 * exp

    noise = rng.gaussian_array(n)
    breath = np.convolve(noise, _lowpass_kernel(800.0, sample_rate), mode="same")
    breath /= max(np.abs(breath).max(), 1e-12)
    base = envelope * breath

    wheeze = 0.12 * np.sin(2.0 * np.pi * 400.0 * t) * exp

    crackles = np.zeros(n)
    click = np.exp(-np.arange(40) / 6.0) * np.cos(2.0 * np.pi * 600.0 * np.arange(40) / sample_rate)
    n_crackles = 8 + rng.randint(5)
    for _ in range(n_crackles):
        pos = rng.randint(max(n - len(click), 1))
        if exp[pos] > 0.3:  # crackles confined to low-envelope expiration
            crackles[pos : pos + len(click)] += 0.08 * click
    return base, wheeze + crackles


def synth_cardio_sample(
    task: str, label: int, duration_s: float, sample_rate: int, rng: Rng
) -> AudioSignal:
    """One synthetic recording; label=1 adds the task's abnormality component.

    The abnormality stream is drawn for both labels so a positive and negative
    sample from the same seed differ only on the abnormality's support.  The
    normalization scale comes from the base signal alone (the base peak
    dominates by construction), so the peak amplitude is PEAK for both labels.
    """
    if duration_s < 2.0:
        raise ValueError("duration must be >= 2 s")
    if sample_rate not in (4000, 8000):
        raise ValueError("sample_rate must be 4000 or 8000")
    if task == "heart":
        base, abnormality = _render_heart(duration_s, sample_rate, rng)
    elif task == "lung":
        base, abnormality = _render_lung(duration_s, sample_rate, rng)
    else:
        raise ValueError(f"unknown task {task!r}")
    scale = PEAK / np.abs(base).max()
    out = scale * (base + abnormality) if label == 1 else scale * base
    return AudioSignal(np.clip(out, -1.0, 1.0), sample_rate)


def generate_cardio_dataset(
    task: str,
    n: int,
    positive_fraction: float,
    duration_s: float,
    sample_rate: int,
    rng: Rng,
) -> list[tuple[AudioSignal, int]]:
    if n < 1:
        raise ValueError("n must be >= 1")
    n_pos = int(np.floor(n * positive_fraction + 0.5))
    labels = [1] * n_pos + [0] * (n - n_pos)
    rng.shuffle(labels)
    return [(synth_cardio_sample(task, lab, duration_s, sample_rate, rng), lab) for lab in labels]


def write_cardio_dataset(
    out_dir, task: str, n: int, positive_fraction: float, duration_s: float,
    sample_rate: int, seed: int
) -> None:
    """WAV files plus manifest.csv (filename,label,seed); the seed column holds
    the generator state just before each sample."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if n < 1:
        raise ValueError("n must be >= 1")
    n_pos = int(np.floor(n * positive_fraction + 0.5))
    labels = [1] * n_pos + [0] * (n - n_pos)
    rng = Rng(seed)
    rng.shuffle(labels)
    rows = []
    for i, lab in enumerate(labels):
        state = rng.state
        sig = synth_cardio_sample(task, lab, duration_s, sample_rate, rng)
        name = f"rec{i:04d}.wav"
        (out / name).write_bytes(write_wav(sig))
        rows.append((name, lab, state))
    with open(out / "manifest.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["filename", "label", "seed"])
        writer.writerows(rows)
