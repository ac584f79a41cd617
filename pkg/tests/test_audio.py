import struct

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lyricsasr.audio import (
    AudioBuffer, FrameConfig, MalformedHeaderError, UnsupportedCodecError, num_frames, power_spectrum,
    read_wav, resample_speed, write_wav,
)

SR = 16000


def sine(freq, seconds=1.0, sr=SR, amp=0.5):
    t = np.arange(int(seconds * sr)) / sr
    return AudioBuffer(amp * np.sin(2 * np.pi * freq * t), sr)


def test_read_silence(tmp_path):
    path = tmp_path / "sil.wav"
    write_wav(AudioBuffer(np.zeros(SR), SR), path)
    buf = read_wav(path)
    assert buf.sample_rate == SR
    assert len(buf) == SR
    assert not buf.samples.any()


def test_round_trip_within_quantization(tmp_path):
    rng = np.random.default_rng(0)
    buf = AudioBuffer(rng.uniform(-1, 1, 5000), SR)
    write_wav(buf, tmp_path / "r.wav")
    back = read_wav(tmp_path / "r.wav")
    assert np.max(np.abs(back.samples - buf.samples)) <= 1 / 32768


def test_quantization_bytes(tmp_path):
    write_wav(AudioBuffer([0.0, 1.0, -1.0], SR), tmp_path / "q.wav")
    data = (tmp_path / "q.wav").read_bytes()
    assert struct.unpack("<3h", data[44:50]) == (0, 32767, -32768)
    assert data[:4] == b"RIFF" and data[8:16] == b"WAVEfmt "


def test_write_empty_rejected(tmp_path):
    with pytest.raises(ValueError):
        write_wav(AudioBuffer(np.zeros(0), SR), tmp_path / "e.wav")


def test_truncated_data_chunk(tmp_path):
    path = tmp_path / "bad.wav"
    write_wav(AudioBuffer(np.zeros(100), SR), path)
    data = bytearray(path.read_bytes())
    data[40:44] = struct.pack("<I", 10_000)
    path.write_bytes(bytes(data))
    with pytest.raises(MalformedHeaderError) as err:
        read_wav(path)
    assert err.value.field == "data"


def test_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        read_wav(tmp_path / "nope.wav")


def test_unsupported_bit_depth(tmp_path):
    path = tmp_path / "u8.wav"
    pcm = bytes(10)
    header = struct.pack("<4sI4s4sIHHIIHH4sI", b"RIFF", 36 + len(pcm), b"WAVE", b"fmt ", 16, 1, 1, SR, SR, 1, 8,
                         b"data", len(pcm))
    path.write_bytes(header + pcm)
    with pytest.raises(UnsupportedCodecError) as err:
        read_wav(path)
    assert err.value.field == "bits_per_sample"


def test_stereo_float_downmix(tmp_path):
    left = np.linspace(-0.5, 0.5, 64, dtype="<f4")
    right = np.full(64, 0.25, dtype="<f4")
    pcm = np.stack([left, right], axis=1).reshape(-1).tobytes()
    header = struct.pack("<4sI4s4sIHHIIHH4sI", b"RIFF", 36 + len(pcm), b"WAVE", b"fmt ", 16, 3, 2, SR, SR * 8, 8,
                         32, b"data", len(pcm))
    path = tmp_path / "st.wav"
    path.write_bytes(header + pcm)
    buf = read_wav(path)
    assert np.allclose(buf.samples, (left + right) / 2)


def test_resample_on_load(tmp_path):
    write_wav(sine(440, sr=8000), tmp_path / "8k.wav")
    buf = read_wav(tmp_path / "8k.wav", resample_to=SR)
    assert buf.sample_rate == SR
    assert len(buf) == 16000


def test_speed_length():
    out = resample_speed(AudioBuffer(np.zeros(16000), SR), 0.9)
    assert abs(len(out) - round(16000 / 0.9)) <= 1
    assert out.sample_rate == SR


def test_speed_identity():
    buf = sine(300)
    out = resample_speed(buf, 1.0)
    assert np.sqrt(np.mean((out.samples - buf.samples) ** 2)) < 1e-6


def test_speed_shifts_frequency():
    out = resample_speed(sine(1000), 1.1)
    spec = np.abs(np.fft.rfft(out.samples)) ** 2
    freqs = np.fft.rfftfreq(len(out), 1 / SR)
    assert abs(freqs[np.argmax(spec)] - 1100) <= SR / len(out)


def test_speed_range():
    with pytest.raises(ValueError):
        resample_speed(sine(100), 2.5)


def test_speed_round_trip_band_limited():
    rng = np.random.default_rng(3)
    t = np.arange(SR) / SR
    x = sum(rng.uniform(0.05, 0.2) * np.sin(2 * np.pi * f * t + rng.uniform(0, 6)) for f in (220, 555, 1230))
    buf = AudioBuffer(x * np.hanning(SR), SR)
    back = resample_speed(resample_speed(buf, 0.9), 1 / 0.9)
    n = min(len(back), len(buf))
    assert np.sqrt(np.mean((back.samples[:n] - buf.samples[:n]) ** 2)) < 1e-3


def test_frame_count_one_second():
    spec = power_spectrum(AudioBuffer(np.zeros(SR), SR), FrameConfig(), 512)
    assert spec.num_frames == 98
    assert spec.values.shape[1] == 257
    assert not spec.values.any()


def test_short_input_flagged():
    spec = power_spectrum(AudioBuffer(np.zeros(100), SR), FrameConfig(), 512)
    assert spec.num_frames == 0 and spec.short_input


def test_sine_peak_bin():
    spec = power_spectrum(sine(1000), FrameConfig(), 512)
    assert np.all(np.argmax(spec.values, axis=1) == 32)
    # direct DFT of one processed frame agrees
    frame = sine(1000).samples[:400]
    frame = frame - frame.mean()
    frame = np.concatenate([[frame[0] * 0.03], frame[1:] - 0.97 * frame[:-1]])
    frame = frame * np.power(0.5 - 0.5 * np.cos(2 * np.pi * np.arange(400) / 399), 0.85)
    k = np.arange(257)[:, None]
    dft = np.abs((frame[None, :] * np.exp(-2j * np.pi * k * np.arange(400)[None, :] / 512)).sum(axis=1)) ** 2
    assert np.argmax(dft) == 32
    assert np.allclose(dft, spec.values[0], rtol=1e-9, atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(n=st.integers(400, 5000), length=st.sampled_from([20.0, 25.0, 32.0]), shift=st.sampled_from([5.0, 10.0, 20.0]))
def test_frame_count_formula(n, length, shift):
    cfg = FrameConfig(frame_length_ms=length, frame_shift_ms=min(shift, length))
    flen, fshift = cfg.frame_length(SR), cfg.frame_shift(SR)
    if n < flen:
        return
    spec = power_spectrum(AudioBuffer(np.zeros(n), SR), cfg, 1024)
    assert spec.num_frames == 1 + (n - flen) // fshift == num_frames(n, flen, fshift)


def test_shift_covariance():
    rng = np.random.default_rng(1)
    x = rng.standard_normal(4000)
    cfg = FrameConfig()
    hop = cfg.frame_shift(SR)
    a = power_spectrum(AudioBuffer(x, SR), cfg, 512).values
    b = power_spectrum(AudioBuffer(x[hop:], SR), cfg, 512).values
    assert np.allclose(a[1:1 + b.shape[0]], b, atol=1e-10, rtol=0)


def test_dither_seeded():
    cfg = FrameConfig(dither=1.0, seed=5)
    buf = AudioBuffer(np.zeros(2000), SR)
    a = power_spectrum(buf, cfg, 512).values
    b = power_spectrum(buf, cfg, 512).values
    assert a.any() and np.array_equal(a, b)
