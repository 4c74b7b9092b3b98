"""WAV ingestion, wavelet denoising, MFCC extraction, feature aggregation."""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np
from scipy.fft import dct

from .core import AudioSignal, FormatError


@dataclass
class MfccConfig:
    frame_len: float = 0.025
    hop: float = 0.010
    pre_emphasis: float = 0.97
    n_filters: int = 26
    n_coeffs: int = 13
    fft_size: int | None = None  # next power of two >= frame samples when None
    log_floor: float = 1e-10

    def __post_init__(self):
        if not (0 < self.hop <= self.frame_len):
            raise ValueError("need 0 < hop <= frame_len")
        if not (1 <= self.n_coeffs <= self.n_filters):
            raise ValueError("need 1 <= n_coeffs <= n_filters")


# ---------------------------------------------------------------------------
# WAV I/O


def read_wav(data: bytes) -> AudioSignal:
    """Decode RIFF/WAVE PCM16.  Multi-channel input is averaged to mono."""
    if data[:4] != b"RIFF":
        raise FormatError("not a RIFF file")
    if data[8:12] != b"WAVE":
        raise FormatError("not a WAVE file")
    pos = 12
    fmt = None
    raw = None
    while pos + 8 <= len(data):
        chunk_id = data[pos : pos + 4]
        (size,) = struct.unpack("<I", data[pos + 4 : pos + 8])
        body = data[pos + 8 : pos + 8 + size]
        if chunk_id == b"fmt ":
            if len(body) < 16:
                raise FormatError("truncated fmt chunk")
            fmt = struct.unpack("<HHIIHH", body[:16])
        elif chunk_id == b"data":
            if len(body) < size:
                raise FormatError("truncated data chunk")
            raw = body
        pos += 8 + size + (size & 1)  # chunks are word-aligned
    if fmt is None:
        raise FormatError("missing fmt chunk")
    if raw is None:
        raise FormatError("missing data chunk")
    audio_format, n_channels, sample_rate, _, _, bits = fmt
    if audio_format != 1:
        raise FormatError(f"unsupported format code {audio_format} (PCM only)")
    if bits != 16:
        raise FormatError(f"unsupported bit depth {bits} (16-bit only)")
    if n_channels < 1:
        raise FormatError("zero channels")
    ints = np.frombuffer(raw[: len(raw) - len(raw) % (2 * n_channels)], dtype="<i2")
    if len(ints) == 0:
        raise FormatError("empty data chunk")
    samples = ints.astype(np.float64).reshape(-1, n_channels).mean(axis=1) / 32768.0
    return AudioSignal(samples, sample_rate)


def write_wav(sig: AudioSignal) -> bytes:
    """Encode mono PCM16 WAV."""
    ints = np.clip(np.round(sig.samples * 32768.0), -32768, 32767).astype("<i2")
    raw = ints.tobytes()
    sr = sig.sample_rate
    header = struct.pack(
        "<4sI4s4sIHHIIHH4sI",
        b"RIFF", 36 + len(raw), b"WAVE",
        b"fmt ", 16, 1, 1, sr, sr * 2, 2, 16,
        b"data", len(raw),
    )
    return header + raw


def read_wav_file(path) -> AudioSignal:
    with open(path, "rb") as fh:
        return read_wav(fh.read())


# ---------------------------------------------------------------------------
# Spectral primitives


def pre_emphasis(sig: AudioSignal, alpha: float = 0.97) -> AudioSignal:
    if not (0 <= alpha < 1):
        raise ValueError("alpha must be in [0, 1)")
    x = sig.samples
    y = np.empty_like(x)
    y[0] = x[0]
    y[1:] = x[1:] - alpha * x[:-1]
    return AudioSignal(y, sig.sample_rate)


def _bit_reverse_indices(n: int) -> np.ndarray:
    bits = n.bit_length() - 1
    idx = np.arange(n)
    rev = np.zeros(n, dtype=int)
    for _ in range(bits):
        rev = (rev << 1) | (idx & 1)
        idx >>= 1
    return rev


def fft(x, inverse: bool = False) -> np.ndarray:
    """Radix-2 Cooley-Tukey DFT.  Inverse scales by 1/N."""
    a = np.asarray(x, dtype=np.complex128).copy()
    n = len(a)
    if n == 0 or (n & (n - 1)) != 0:
        raise ValueError(f"length must be a power of two, got {n}")
    if n == 1:
        return a
    a = a[_bit_reverse_indices(n)]
    sign = 1j if inverse else -1j
    m = 2
    while m <= n:
        half = m // 2
        tw = np.exp(sign * 2.0 * np.pi * np.arange(half) / m)
        a = a.reshape(-1, m)
        odd = a[:, half:] * tw
        even = a[:, :half].copy()
        a[:, :half] = even + odd
        a[:, half:] = even - odd
        a = a.reshape(-1)
        m *= 2
    if inverse:
        a /= n
    return a


def mel(f_hz: float) -> float:
    if np.any(np.asarray(f_hz) < 0):
        raise ValueError("frequency must be non-negative")
    return 2595.0 * np.log10(1.0 + np.asarray(f_hz) / 700.0)


def mel_inverse(m: float):
    return 700.0 * (10.0 ** (np.asarray(m) / 2595.0) - 1.0)


def mel_filterbank(n_filters: int, fft_size: int, sample_rate: int) -> np.ndarray:
    """Triangular unit-peak filters, equally spaced in mel over [0, sr/2].

    Returns (n_filters, fft_size//2 + 1) weights sampled at FFT bin centers.
    """
    points = mel_inverse(np.linspace(0.0, mel(sample_rate / 2.0), n_filters + 2))
    freqs = np.arange(fft_size // 2 + 1) * (sample_rate / fft_size)
    bank = np.zeros((n_filters, len(freqs)))
    for i in range(n_filters):
        lower, center, upper = points[i], points[i + 1], points[i + 2]
        rise = (freqs - lower) / (center - lower)
        fall = (upper - freqs) / (upper - center)
        bank[i] = np.clip(np.minimum(rise, fall), 0.0, None)
    return bank


def _frame_signal(x: np.ndarray, frame_n: int, hop_n: int) -> np.ndarray:
    n_frames = 1 + (len(x) - frame_n) // hop_n
    idx = np.arange(frame_n)[None, :] + hop_n * np.arange(n_frames)[:, None]
    return x[idx]


def mfcc(sig: AudioSignal, cfg: MfccConfig | None = None) -> np.ndarray:
    """MFCC frame matrix of shape (n_frames, n_coeffs)."""
    frames, _ = mfcc_debug(sig, cfg)
    return frames


def mfcc_debug(sig: AudioSignal, cfg: MfccConfig | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Like :func:`mfcc` but also returns pre-DCT filterbank energies."""
    cfg = cfg or MfccConfig()
    sr = sig.sample_rate
    frame_n = int(round(cfg.frame_len * sr))
    hop_n = int(round(cfg.hop * sr))
    if len(sig.samples) < frame_n:
        raise ValueError(f"signal ({len(sig.samples)} samples) shorter than one frame ({frame_n})")
    emphasized = pre_emphasis(sig, cfg.pre_emphasis).samples
    frames = _frame_signal(emphasized, frame_n, hop_n)
    window = 0.54 - 0.46 * np.cos(2.0 * np.pi * np.arange(frame_n) / (frame_n - 1))
    windowed = frames * window
    fft_size = cfg.fft_size or 1 << (frame_n - 1).bit_length()
    padded = np.zeros((len(windowed), fft_size))
    padded[:, :frame_n] = windowed
    spectra = np.array([fft(row) for row in padded])
    power = np.abs(spectra[:, : fft_size // 2 + 1]) ** 2 / fft_size
    bank = mel_filterbank(cfg.n_filters, fft_size, sr)
    energies = power @ bank.T
    log_e = np.log(np.maximum(energies, cfg.log_floor))
    coeffs = dct(log_e, type=2, norm="ortho", axis=1)[:, : cfg.n_coeffs]
    return coeffs, energies


def aggregate_features(frames: np.ndarray) -> np.ndarray:
    """Per-coefficient mean and population std, concatenated."""
    frames = np.asarray(frames, dtype=np.float64)
    if frames.ndim != 2 or frames.shape[0] < 1:
        raise ValueError("empty frame matrix")
    return np.concatenate([frames.mean(axis=0), frames.std(axis=0)])


def frames_to_csv(frames: np.ndarray) -> str:
    """One frame per row, 17 significant digits."""
    return "\n".join(",".join(format(v, ".17g") for v in row) for row in frames) + "\n"


# ---------------------------------------------------------------------------
# Daubechies-4 (8-tap) wavelet transform, periodic boundary


_DB4_LO = np.array(
    [
        0.230377813308855230,
        0.714846570552541500,
        0.630880767929590400,
        -0.027983769416983850,
        -0.187034811718881140,
        0.030841381835986965,
        0.032883011666982945,
        -0.010597401784997278,
    ]
)
_DB4_HI = (_DB4_LO[::-1] * np.array([1, -1] * 4)).copy()  # g[m] = (-1)^m h[L-1-m]


@dataclass
class WaveletPyramid:
    """Deepest-level approximation plus detail bands, finest first."""

    approx: np.ndarray
    details: list[np.ndarray]

    @property
    def levels(self) -> int:
        return len(self.details)


def _analyze(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    n = len(x)
    idx = (2 * np.arange(n // 2)[:, None] + np.arange(8)[None, :]) % n
    windows = x[idx]
    return windows @ _DB4_LO, windows @ _DB4_HI


def _synthesize(approx: np.ndarray, detail: np.ndarray) -> np.ndarray:
    n = 2 * len(approx)
    idx = (2 * np.arange(len(approx))[:, None] + np.arange(8)[None, :]) % n
    out = np.zeros(n)
    np.add.at(out, idx, approx[:, None] * _DB4_LO[None, :] + detail[:, None] * _DB4_HI[None, :])
    return out


def dwt_forward(x: np.ndarray, levels: int) -> WaveletPyramid:
    x = np.asarray(x, dtype=np.float64)
    if levels < 1:
        raise ValueError("levels must be >= 1")
    if len(x) % (1 << levels) != 0:
        raise ValueError(f"length {len(x)} not divisible by 2^{levels}")
    details = []
    approx = x
    for _ in range(levels):
        approx, d = _analyze(approx)
        details.append(d)
    return WaveletPyramid(approx, details)


def dwt_inverse(pyr: WaveletPyramid) -> np.ndarray:
    x = pyr.approx
    for d in reversed(pyr.details):
        x = _synthesize(x, d)
    return x


def soft_threshold(x: np.ndarray, t: float) -> np.ndarray:
    return np.sign(x) * np.maximum(np.abs(x) - t, 0.0)


def wavelet_denoise(sig: AudioSignal, levels: int = 4) -> AudioSignal:
    """Soft-threshold detail bands with the universal threshold sigma*sqrt(2 ln N).

    sigma is the MAD/0.6745 estimate from the finest detail band; the
    approximation band is untouched.  The signal is zero-padded to the
    required length multiple and truncated after reconstruction.
    """
    x = sig.samples
    block = 1 << levels
    pad = (-len(x)) % block
    padded = np.concatenate([x, np.zeros(pad)]) if pad else x
    pyr = dwt_forward(padded, levels)
    sigma = np.median(np.abs(pyr.details[0])) / 0.6745
    threshold = sigma * np.sqrt(2.0 * np.log(len(padded)))
    pyr = WaveletPyramid(pyr.approx, [soft_threshold(d, threshold) for d in pyr.details])
    out = dwt_inverse(pyr)[: len(x)]
    return AudioSignal(out, sig.sample_rate)
