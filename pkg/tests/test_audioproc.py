import numpy as np
import pytest

from prediagnose.core import AudioSignal, FormatError, Rng
from prediagnose import audioproc as ap


def naive_dft(x, inverse=False):
    """O(n^2) reference DFT, written independently of the fast path."""
    x = np.asarray(x, dtype=np.complex128)
    n = len(x)
    k = np.arange(n)
    sign = 2j if inverse else -2j
    mat = np.exp(sign * np.pi * np.outer(k, k) / n)
    out = mat @ x
    return out / n if inverse else out


def tone(freq, sr=8000, seconds=1.0, amp=0.5):
    t = np.arange(int(sr * seconds)) / sr
    return AudioSignal(amp * np.sin(2 * np.pi * freq * t), sr)


class TestFft:
    @pytest.mark.parametrize("n", [1, 2, 8, 64, 256])
    def test_matches_naive_dft(self, n):
        rng = Rng(n)
        x = rng.gaussian_array(n) + 1j * rng.gaussian_array(n)
        assert np.max(np.abs(ap.fft(x) - naive_dft(x))) < 1e-9

    def test_inverse_roundtrip(self):
        x = Rng(2).gaussian_array(128)
        back = ap.fft(ap.fft(x), inverse=True)
        assert np.max(np.abs(back - x)) < 1e-12

    def test_parseval(self):
        x = Rng(3).gaussian_array(1024)
        spec = ap.fft(x)
        assert np.sum(np.abs(spec) ** 2) / 1024 == pytest.approx(np.sum(x**2))

    def test_non_power_of_two_rejected(self):
        with pytest.raises(ValueError):
            ap.fft(np.zeros(12))
        with pytest.raises(ValueError):
            ap.fft(np.zeros(0))

    def test_single_bin_impulse(self):
        # DFT of a unit impulse is all ones.
        x = np.zeros(16)
        x[0] = 1.0
        assert np.allclose(ap.fft(x), np.ones(16))


class TestMelScale:
    def test_closed_form_points(self):
        assert ap.mel(0.0) == 0.0
        assert ap.mel(700.0) == pytest.approx(2595.0 * np.log10(2.0))
        assert ap.mel(1000.0) == pytest.approx(999.9855371, abs=1e-4)

    def test_inverse_roundtrip(self):
        f = np.array([0.0, 100.0, 440.0, 4000.0])
        assert np.allclose(ap.mel_inverse(ap.mel(f)), f)

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            ap.mel(-1.0)

    def test_filterbank_shape_and_peaks(self):
        bank = ap.mel_filterbank(26, 512, 8000)
        assert bank.shape == (26, 257)
        assert np.all(bank >= 0.0) and np.all(bank <= 1.0 + 1e-12)
        # each filter attains a value close to its unit peak at some bin
        assert np.all(bank.max(axis=1) > 0.5)

    def test_filterbank_supports_ordered(self):
        bank = ap.mel_filterbank(10, 256, 8000)
        starts = [np.nonzero(row)[0][0] for row in bank]
        assert starts == sorted(starts)


class TestMfcc:
    def test_silence_closed_form(self):
        sig = AudioSignal(np.zeros(8000), 8000)
        coeffs = ap.mfcc(sig)
        # all filter energies hit the floor; only c0 of the orthonormal DCT
        # survives: sqrt(26) * ln(1e-10)
        expected_c0 = np.sqrt(26.0) * np.log(1e-10)
        assert np.allclose(coeffs[:, 0], expected_c0)
        assert np.allclose(coeffs[:, 1:], 0.0, atol=1e-9)

    def test_frame_count(self):
        # 1 s at 8 kHz, 200-sample frames, 80-sample hop -> 1 + (8000-200)//80
        coeffs = ap.mfcc(AudioSignal(np.zeros(8000), 8000))
        assert coeffs.shape == (98, 13)

    def test_too_short_rejected(self):
        with pytest.raises(ValueError):
            ap.mfcc(AudioSignal(np.zeros(100), 8000))

    def test_tone_energy_in_nearest_filter(self):
        sig = tone(1000.0)
        _, energies = ap.mfcc_debug(sig)
        centers = ap.mel_inverse(
            np.linspace(0.0, ap.mel(4000.0), 26 + 2)
        )[1:-1]
        nearest = int(np.argmin(np.abs(centers - 1000.0)))
        assert np.all(energies.argmax(axis=1) == nearest)

    def test_amplitude_doubling_shifts_only_c0(self):
        c1 = ap.mfcc(tone(1000.0, amp=0.25))
        c2 = ap.mfcc(tone(1000.0, amp=0.5))
        d = c2 - c1
        # doubling amplitude multiplies every energy by 4, adding ln 4 to each
        # log energy; the orthonormal DCT maps that to sqrt(26)*ln(4) on c0
        assert np.allclose(d[:, 0], np.sqrt(26.0) * np.log(4.0), atol=1e-9)
        assert np.max(np.abs(d[:, 1:])) < 1e-9

    def test_aggregate_mean_and_population_std(self):
        frames = np.array([[1.0, 0.0], [3.0, 0.0]])
        agg = ap.aggregate_features(frames)
        assert np.allclose(agg, [2.0, 0.0, 1.0, 0.0])
        with pytest.raises(ValueError):
            ap.aggregate_features(np.zeros((0, 13)))

    def test_frames_to_csv(self):
        text = ap.frames_to_csv(np.array([[1.0, 0.5]]))
        assert text == "1,0.5\n"


class TestWavelet:
    def test_filters_orthonormal(self):
        assert np.sum(ap._DB4_LO**2) == pytest.approx(1.0)
        assert np.sum(ap._DB4_HI**2) == pytest.approx(1.0)
        assert np.dot(ap._DB4_LO, ap._DB4_HI) == pytest.approx(0.0, abs=1e-15)
        assert np.sum(ap._DB4_LO) == pytest.approx(np.sqrt(2.0))

    def test_constant_signal_zero_details(self):
        pyr = ap.dwt_forward(np.full(64, 3.0), 3)
        for d in pyr.details:
            assert np.max(np.abs(d)) < 1e-12
        # energy concentrates in the approximation: each level scales by sqrt(2)
        assert np.allclose(pyr.approx, 3.0 * 2.0**1.5)

    def test_ramp_details_vanish_except_wraparound(self):
        # db4 has two vanishing moments, so linear ramps give zero detail
        # except where the periodic extension wraps (last 3 output positions
        # for an 8-tap filter).
        x = np.arange(64, dtype=np.float64)
        _, d = ap._analyze(x)
        assert np.max(np.abs(d[:-3])) < 1e-10
        assert np.max(np.abs(d[-3:])) > 1.0

    def test_roundtrip(self):
        x = Rng(17).gaussian_array(256)
        back = ap.dwt_inverse(ap.dwt_forward(x, 4))
        assert np.max(np.abs(back - x)) < 1e-10

    def test_energy_preserved(self):
        x = Rng(18).gaussian_array(128)
        pyr = ap.dwt_forward(x, 2)
        total = np.sum(pyr.approx**2) + sum(np.sum(d**2) for d in pyr.details)
        assert total == pytest.approx(np.sum(x**2))

    def test_bad_lengths(self):
        with pytest.raises(ValueError):
            ap.dwt_forward(np.zeros(60), 3)
        with pytest.raises(ValueError):
            ap.dwt_forward(np.zeros(64), 0)

    def test_soft_threshold_scalars(self):
        assert ap.soft_threshold(np.array([0.5]), 0.2)[0] == pytest.approx(0.3)
        assert ap.soft_threshold(np.array([-0.5]), 0.2)[0] == pytest.approx(-0.3)
        assert ap.soft_threshold(np.array([0.1]), 0.2)[0] == 0.0

    def test_denoise_improves_mse_on_noisy_sine(self):
        sr = 8000
        t = np.arange(sr) / sr
        # tone well inside the 4-level approximation band (0-250 Hz)
        clean = 0.6 * np.sin(2 * np.pi * 100 * t)
        noisy = clean + 0.1 * Rng(42).gaussian_array(sr)
        out = ap.wavelet_denoise(AudioSignal(noisy, sr)).samples
        mse_before = np.mean((noisy - clean) ** 2)
        mse_after = np.mean((out - clean) ** 2)
        assert mse_after < 0.5 * mse_before

    def test_denoise_second_pass_changes_little(self):
        sr = 4096
        t = np.arange(sr) / sr
        noisy = np.sin(2 * np.pi * 110 * t) + 0.05 * Rng(43).gaussian_array(sr)
        once = ap.wavelet_denoise(AudioSignal(noisy, sr))
        twice = ap.wavelet_denoise(once)
        delta1 = np.mean((once.samples - noisy) ** 2)
        delta2 = np.mean((twice.samples - once.samples) ** 2)
        assert delta2 < delta1

    def test_denoise_preserves_length_with_padding(self):
        sig = AudioSignal(Rng(44).gaussian_array(1000), 8000)
        assert len(ap.wavelet_denoise(sig).samples) == 1000


class TestWav:
    def test_known_sample_scaling(self):
        sig = AudioSignal(np.zeros(4), 8000)
        raw = ap.write_wav(sig)
        body = bytearray(raw)
        import struct

        body[44:52] = struct.pack("<4h", 0, 16384, -16384, 32767)
        out = ap.read_wav(bytes(body))
        assert np.allclose(out.samples, [0.0, 0.5, -0.5, 32767 / 32768.0])

    def test_round_trip(self):
        samples = np.round(Rng(5).uniform_array(64) * 2 - 1, 3)
        sig = AudioSignal(samples, 16000)
        again = ap.read_wav(ap.write_wav(sig))
        assert again.sample_rate == 16000
        assert np.max(np.abs(again.samples - samples)) <= 0.5 / 32768.0

    def test_clipping_on_write(self):
        sig = AudioSignal(np.array([2.0, -2.0]), 8000)
        out = ap.read_wav(ap.write_wav(sig))
        assert out.samples[0] == pytest.approx(32767 / 32768.0)
        assert out.samples[1] == -1.0

    def test_stereo_averaged(self):
        import struct

        raw = struct.pack("<4h", 1000, 3000, -1000, -3000)
        header = struct.pack(
            "<4sI4s4sIHHIIHH4sI",
            b"RIFF", 36 + len(raw), b"WAVE",
            b"fmt ", 16, 1, 2, 8000, 8000 * 4, 4, 16,
            b"data", len(raw),
        )
        out = ap.read_wav(header + raw)
        assert np.allclose(out.samples, [2000 / 32768.0, -2000 / 32768.0])

    def test_bad_headers(self):
        with pytest.raises(FormatError):
            ap.read_wav(b"RIFX" + b"\x00" * 40)
        with pytest.raises(FormatError):
            ap.read_wav(b"RIFF\x00\x00\x00\x00WAVE")  # no chunks
        good = ap.write_wav(AudioSignal(np.zeros(4), 8000))
        mangled = bytearray(good)
        mangled[20] = 3  # format code: IEEE float
        with pytest.raises(FormatError):
            ap.read_wav(bytes(mangled))

    def test_pre_emphasis(self):
        sig = AudioSignal(np.array([1.0, 1.0, 1.0]), 8000)
        out = ap.pre_emphasis(sig, 0.97)
        assert np.allclose(out.samples, [1.0, 0.03, 0.03])
        with pytest.raises(ValueError):
            ap.pre_emphasis(sig, 1.0)
