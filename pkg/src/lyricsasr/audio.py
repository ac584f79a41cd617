"""Audio buffers, WAV I/O, speed perturbation and framed power spectra."""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np
from scipy.signal import resample_poly

DEFAULT_SAMPLE_RATE = 16000

_WAVE_FORMAT_PCM = 1
_WAVE_FORMAT_IEEE_FLOAT = 3
_WAVE_FORMAT_EXTENSIBLE = 0xFFFE


class WavError(Exception):
    """Base class for WAV decoding problems."""


class MalformedHeaderError(WavError):
    def __init__(self, field_name: str, detail: str):
        super().__init__(f"malformed WAV header ({field_name}): {detail}")
        self.field = field_name


class UnsupportedCodecError(WavError):
    def __init__(self, field_name: str, value):
        super().__init__(f"unsupported WAV {field_name}: {value!r}")
        self.field = field_name
        self.value = value


@dataclass(frozen=True)
class AudioBuffer:
    samples: np.ndarray
    sample_rate: int = DEFAULT_SAMPLE_RATE

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64).reshape(-1)
        if self.sample_rate <= 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        if not np.all(np.isfinite(samples)):
            raise ValueError("samples must be finite")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)

    def __len__(self) -> int:
        return self.samples.shape[0]

    @property
    def duration(self) -> float:
        return len(self) / self.sample_rate


@dataclass(frozen=True)
class FrameConfig:
    frame_length_ms: float = 25.0
    frame_shift_ms: float = 10.0
    window: str = "povey"
    preemphasis: float = 0.97
    dither: float = 0.0
    remove_dc: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.frame_length_ms <= 0 or self.frame_shift_ms <= 0:
            raise ValueError("frame length and shift must be positive")
        if self.frame_shift_ms > self.frame_length_ms:
            raise ValueError("frame_shift_ms must not exceed frame_length_ms")
        if self.window not in WINDOWS:
            raise ValueError(f"unknown window {self.window!r}; choose from {sorted(WINDOWS)}")
        if not 0.0 <= self.preemphasis < 1.0:
            raise ValueError("preemphasis must lie in [0, 1)")
        if self.dither < 0:
            raise ValueError("dither must be non-negative")

    def frame_length(self, sample_rate: int) -> int:
        return int(round(sample_rate * self.frame_length_ms / 1000.0))

    def frame_shift(self, sample_rate: int) -> int:
        return int(round(sample_rate * self.frame_shift_ms / 1000.0))


@dataclass(frozen=True)
class SpectrogramMatrix:
    values: np.ndarray
    fft_size: int
    frame_shift_ms: float
    short_input: bool = False
    log_energy: np.ndarray | None = field(default=None, repr=False)

    @property
    def num_frames(self) -> int:
        return self.values.shape[0]


def _povey(n: int) -> np.ndarray:
    return np.power(0.5 - 0.5 * np.cos(2 * np.pi * np.arange(n) / (n - 1)), 0.85)


def _hann(n: int) -> np.ndarray:
    return 0.5 - 0.5 * np.cos(2 * np.pi * np.arange(n) / (n - 1))


def _hamming(n: int) -> np.ndarray:
    return 0.54 - 0.46 * np.cos(2 * np.pi * np.arange(n) / (n - 1))


WINDOWS = {"povey": _povey, "hann": _hann, "hamming": _hamming}


def window_function(name: str, length: int) -> np.ndarray:
    return WINDOWS[name](length)


# -- WAV I/O ------------------------------------------------------------------


def read_wav(path, resample_to: int | None = None) -> AudioBuffer:
    """Read a RIFF/WAVE file (PCM16 or float32, mono or stereo).

    Stereo is averaged down to mono. When ``resample_to`` is given and
    differs from the file rate, the signal is resampled on load.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such WAV file: {path}")
    data = path.read_bytes()
    if len(data) < 12 or data[:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise MalformedHeaderError("riff", "missing RIFF/WAVE signature")

    fmt = None
    pcm = None
    pos = 12
    while pos + 8 <= len(data):
        chunk_id = data[pos:pos + 4]
        (size,) = struct.unpack("<I", data[pos + 4:pos + 8])
        body_start = pos + 8
        if body_start + size > len(data):
            raise MalformedHeaderError(
                chunk_id.decode("latin-1"),
                f"declared size {size} exceeds remaining {len(data) - body_start} bytes",
            )
        body = data[body_start:body_start + size]
        if chunk_id == b"fmt ":
            if size < 16:
                raise MalformedHeaderError("fmt", f"chunk too small ({size} bytes)")
            fmt = struct.unpack("<HHIIHH", body[:16])
            if fmt[0] == _WAVE_FORMAT_EXTENSIBLE and size >= 40:
                (sub_format,) = struct.unpack("<H", body[24:26])
                fmt = (sub_format,) + fmt[1:]
        elif chunk_id == b"data":
            pcm = body
        pos = body_start + size + (size & 1)

    if fmt is None:
        raise MalformedHeaderError("fmt", "no fmt chunk")
    if pcm is None:
        raise MalformedHeaderError("data", "no data chunk")
    audio_format, channels, sample_rate, _, block_align, bits = fmt
    if channels not in (1, 2):
        raise UnsupportedCodecError("channels", channels)
    if sample_rate <= 0:
        raise MalformedHeaderError("sample_rate", str(sample_rate))
    if audio_format == _WAVE_FORMAT_PCM and bits == 16:
        samples = np.frombuffer(pcm[: len(pcm) // 2 * 2], dtype="<i2").astype(np.float64) / 32768.0
    elif audio_format == _WAVE_FORMAT_IEEE_FLOAT and bits == 32:
        samples = np.frombuffer(pcm[: len(pcm) // 4 * 4], dtype="<f4").astype(np.float64)
    elif audio_format in (_WAVE_FORMAT_PCM, _WAVE_FORMAT_IEEE_FLOAT):
        raise UnsupportedCodecError("bits_per_sample", bits)
    else:
        raise UnsupportedCodecError("audio_format", audio_format)
    if channels == 2:
        samples = samples[: len(samples) // 2 * 2].reshape(-1, 2).mean(axis=1)

    buf = AudioBuffer(samples, sample_rate)
    if resample_to is not None and resample_to != sample_rate:
        buf = resample_rate(buf, resample_to)
    return buf


def load_audio(path) -> AudioBuffer:
    """Read a WAV file and bring it to the pipeline rate of 16 kHz."""
    return read_wav(path, resample_to=DEFAULT_SAMPLE_RATE)


def write_wav(buf: AudioBuffer, path, sample_format: str = "pcm16") -> None:
    """Write ``buf`` as mono WAV.

    ``pcm16`` clips to [-1, 1] and quantizes; ``float32`` stores IEEE
    floats, so stems and their sum stay consistent to float precision.
    """
    if len(buf) == 0:
        raise ValueError("cannot write an empty buffer")
    if sample_format == "pcm16":
        clipped = np.clip(buf.samples, -1.0, 1.0)
        payload = np.clip(np.round(clipped * 32768.0), -32768, 32767).astype("<i2").tobytes()
        fmt_code, width = _WAVE_FORMAT_PCM, 2
    elif sample_format == "float32":
        payload = buf.samples.astype("<f4").tobytes()
        fmt_code, width = _WAVE_FORMAT_IEEE_FLOAT, 4
    else:
        raise ValueError(f"unknown sample_format {sample_format!r}")
    header = struct.pack(
        "<4sI4s4sIHHIIHH4sI",
        b"RIFF", 36 + len(payload), b"WAVE",
        b"fmt ", 16, fmt_code, 1, buf.sample_rate, buf.sample_rate * width, width, 8 * width,
        b"data", len(payload),
    )
    Path(path).write_bytes(header + payload)


# -- resampling ---------------------------------------------------------------


def _rational(x: float) -> Fraction:
    return Fraction(x).limit_denominator(1000)


def resample_rate(buf: AudioBuffer, new_rate: int) -> AudioBuffer:
    ratio = Fraction(new_rate, buf.sample_rate)
    out = resample_poly(buf.samples, ratio.numerator, ratio.denominator)
    return AudioBuffer(out, new_rate)


def resample_speed(buf: AudioBuffer, factor: float) -> AudioBuffer:
    """Speed-perturb ``buf`` by ``factor`` keeping the sample rate.

    The signal is resampled (polyphase, Kaiser-windowed sinc) to
    ``rate / factor`` and then relabelled as ``rate``, so duration scales
    by ``1 / factor`` and pitch by ``factor``. Output length is
    ``ceil(N * q / p)`` where ``p / q`` is the rational approximation of
    ``factor``; that is ``round(N / factor)`` up to one sample.
    """
    if not 0.5 <= factor <= 2.0:
        raise ValueError(f"speed factor must lie in [0.5, 2.0], got {factor}")
    if factor == 1.0 or len(buf) == 0:
        return AudioBuffer(buf.samples.copy(), buf.sample_rate)
    ratio = _rational(factor)
    out = resample_poly(buf.samples, ratio.denominator, ratio.numerator)
    return AudioBuffer(out, buf.sample_rate)


# -- framing and spectra ------------------------------------------------------


def num_frames(num_samples: int, frame_len: int, shift: int) -> int:
    if num_samples < frame_len:
        return 0
    return 1 + (num_samples - frame_len) // shift


def frame_signal(samples: np.ndarray, frame_len: int, shift: int) -> np.ndarray:
    n = num_frames(len(samples), frame_len, shift)
    if n == 0:
        return np.zeros((0, frame_len))
    idx = np.arange(frame_len)[None, :] + shift * np.arange(n)[:, None]
    return samples[idx]


def process_frames(frames: np.ndarray, cfg: FrameConfig) -> tuple[np.ndarray, np.ndarray]:
    """Dither, DC removal, preemphasis and windowing applied per frame.

    Returns the windowed frames and the per-frame log energy measured
    after DC removal and before preemphasis.
    """
    frames = np.array(frames, dtype=np.float64)
    if cfg.dither > 0:
        rng = np.random.default_rng(cfg.seed)
        frames += cfg.dither * rng.standard_normal(frames.shape)
    if cfg.remove_dc:
        frames -= frames.mean(axis=1, keepdims=True)
    energy = np.log(np.maximum((frames ** 2).sum(axis=1), np.finfo(float).eps))
    if cfg.preemphasis > 0:
        shifted = np.concatenate([frames[:, :1], frames[:, :-1]], axis=1)
        frames = frames - cfg.preemphasis * shifted
    frames *= window_function(cfg.window, frames.shape[1])[None, :]
    return frames, energy


def power_spectrum(buf: AudioBuffer, cfg: FrameConfig = FrameConfig(), fft_size: int = 512) -> SpectrogramMatrix:
    frame_len = cfg.frame_length(buf.sample_rate)
    shift = cfg.frame_shift(buf.sample_rate)
    if fft_size < frame_len:
        raise ValueError(f"fft_size {fft_size} is smaller than the frame length {frame_len}")
    if fft_size & (fft_size - 1):
        raise ValueError(f"fft_size must be a power of two, got {fft_size}")
    bins = fft_size // 2 + 1
    frames = frame_signal(buf.samples, frame_len, shift)
    if frames.shape[0] == 0:
        return SpectrogramMatrix(np.zeros((0, bins)), fft_size, cfg.frame_shift_ms, short_input=True,
                                 log_energy=np.zeros(0))
    windowed, energy = process_frames(frames, cfg)
    spec = np.abs(np.fft.rfft(windowed, n=fft_size, axis=1)) ** 2
    return SpectrogramMatrix(spec, fft_size, cfg.frame_shift_ms, log_energy=energy)


def padded_fft_size(frame_len: int) -> int:
    size = 1
    while size < frame_len:
        size *= 2
    return size
