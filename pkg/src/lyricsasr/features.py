"""MFCC front end, deltas, mean normalization and dual-stream stacking."""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np
from scipy.fft import dct

from .audio import AudioBuffer, FrameConfig, padded_fft_size, power_spectrum

STREAMS = ("poly", "vocal", "robust")


def mel_scale(freq):
    return 1127.0 * np.log(1.0 + np.asarray(freq, dtype=np.float64) / 700.0)


def inverse_mel_scale(mel):
    return 700.0 * (np.exp(np.asarray(mel, dtype=np.float64) / 1127.0) - 1.0)


@dataclass(frozen=True)
class MfccConfig:
    frame: FrameConfig = field(default_factory=FrameConfig)
    num_mel_filters: int = 23
    num_cepstra: int = 13
    low_freq_hz: float = 20.0
    high_freq_hz: float = 8000.0
    use_energy_as_c0: bool = False
    log_floor: float = 1e-10
    deltas: bool = False

    def __post_init__(self):
        if self.num_cepstra > self.num_mel_filters:
            raise ValueError("num_cepstra cannot exceed num_mel_filters")
        if not 0 <= self.low_freq_hz < self.high_freq_hz:
            raise ValueError("need 0 <= low_freq_hz < high_freq_hz")
        if self.log_floor <= 0:
            raise ValueError("log_floor must be positive")

    @property
    def output_dims(self) -> int:
        return self.num_cepstra * (3 if self.deltas else 1)


# 13 cepstra + deltas + delta-deltas: the GMM-HMM alignment-model front end.
ALIGN = MfccConfig(num_mel_filters=23, num_cepstra=13, low_freq_hz=20.0, high_freq_hz=8000.0, deltas=True)
# 40 filters / 40 cepstra high-resolution MFCC.
HIRES = MfccConfig(num_mel_filters=40, num_cepstra=40, low_freq_hz=20.0, high_freq_hz=7800.0)
PRESETS = {"align": ALIGN, "hires": HIRES}


@dataclass(frozen=True)
class FeatureMatrix:
    values: np.ndarray
    frame_shift_ms: float = 10.0
    stream: str = "poly"

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise ValueError(f"feature values must be 2-D, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("feature values must be finite")
        if self.stream not in STREAMS:
            raise ValueError(f"unknown stream {self.stream!r}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def num_frames(self) -> int:
        return self.values.shape[0]

    @property
    def dims(self) -> int:
        return self.values.shape[1]


def mel_filterbank(cfg: MfccConfig, fft_size: int, sample_rate: int) -> np.ndarray:
    """Triangular filters on the mel scale, shape (num_mel_filters, fft_size//2 + 1).

    Triangles are linear in mel, with centres equally spaced between
    mel(low_freq_hz) and mel(high_freq_hz).
    """
    nyquist = sample_rate / 2.0
    if cfg.high_freq_hz > nyquist:
        raise ValueError(f"high_freq_hz {cfg.high_freq_hz} is above Nyquist ({nyquist})")
    n_bins = fft_size // 2 + 1
    mel_lo, mel_hi = mel_scale(cfg.low_freq_hz), mel_scale(cfg.high_freq_hz)
    edges = np.linspace(mel_lo, mel_hi, cfg.num_mel_filters + 2)
    bin_mel = mel_scale(np.arange(n_bins) * sample_rate / fft_size)
    left, centre, right = edges[:-2, None], edges[1:-1, None], edges[2:, None]
    up = (bin_mel[None, :] - left) / (centre - left)
    down = (right - bin_mel[None, :]) / (right - centre)
    return np.maximum(0.0, np.minimum(up, down))


def filter_centres_hz(cfg: MfccConfig) -> np.ndarray:
    edges = np.linspace(mel_scale(cfg.low_freq_hz), mel_scale(cfg.high_freq_hz), cfg.num_mel_filters + 2)
    return inverse_mel_scale(edges[1:-1])


def compute_mfcc(buf: AudioBuffer, cfg: MfccConfig = HIRES, stream: str = "poly") -> FeatureMatrix:
    """MFCCs of ``buf``; appends deltas when the config asks for them."""
    fft_size = padded_fft_size(cfg.frame.frame_length(buf.sample_rate))
    spec = power_spectrum(buf, cfg.frame, fft_size)
    fbank = mel_filterbank(cfg, fft_size, buf.sample_rate)
    energies = spec.values @ fbank.T
    log_mel = np.log(np.maximum(energies, cfg.log_floor))
    ceps = dct(log_mel, type=2, norm="ortho", axis=1)[:, : cfg.num_cepstra]
    if cfg.use_energy_as_c0 and ceps.shape[0]:
        ceps[:, 0] = spec.log_energy
    fm = FeatureMatrix(ceps.reshape(-1, cfg.num_cepstra), cfg.frame.frame_shift_ms, stream)
    if cfg.deltas and fm.num_frames:
        fm = append_deltas(fm)
    return fm


def _regression(x: np.ndarray, window: int) -> np.ndarray:
    n = x.shape[0]
    denom = 2.0 * sum(k * k for k in range(1, window + 1))
    padded = np.concatenate([np.repeat(x[:1], window, axis=0), x, np.repeat(x[-1:], window, axis=0)])
    out = np.zeros_like(x)
    for k in range(1, window + 1):
        out += k * (padded[window + k: window + k + n] - padded[window - k: window - k + n])
    return out / denom


def append_deltas(fm: FeatureMatrix, window: int = 2) -> FeatureMatrix:
    if fm.num_frames == 0:
        raise ValueError("cannot take deltas of an empty feature matrix")
    delta = _regression(fm.values, window)
    delta2 = _regression(delta, window)
    return FeatureMatrix(np.hstack([fm.values, delta, delta2]), fm.frame_shift_ms, fm.stream)


def cmvn(fm: FeatureMatrix) -> FeatureMatrix:
    """Per-utterance mean subtraction; variances are left alone.

    A single frame normalizes to all zeros.
    """
    if fm.num_frames == 0:
        return fm
    return replace(fm, values=fm.values - fm.values.mean(axis=0, keepdims=True))


class StackError(ValueError):
    pass


def stack(poly_fm: FeatureMatrix, vocal_fm: FeatureMatrix) -> FeatureMatrix:
    """Frame-wise concatenation [vocal | poly] into the robust stream."""
    if poly_fm.stream != "poly" or vocal_fm.stream != "vocal":
        raise StackError(f"expected (poly, vocal) streams, got ({poly_fm.stream}, {vocal_fm.stream})")
    if poly_fm.num_frames != vocal_fm.num_frames:
        raise StackError(f"frame-count mismatch: poly has {poly_fm.num_frames}, vocal has {vocal_fm.num_frames}")
    if poly_fm.frame_shift_ms != vocal_fm.frame_shift_ms:
        raise StackError(f"frame-shift mismatch: {poly_fm.frame_shift_ms} vs {vocal_fm.frame_shift_ms}")
    return FeatureMatrix(np.hstack([vocal_fm.values, poly_fm.values]), poly_fm.frame_shift_ms, "robust")


# -- feature archive ----------------------------------------------------------
#
# Layout, little-endian throughout:
#   file   := magic "LAFA" | u16 version | u32 count | record*count
#   record := u16 id_len | id (utf-8) | u32 frames | u32 dims
#             | f32 frame_shift_ms | u8 stream | f32[frames*dims] row-major

ARCHIVE_MAGIC = b"LAFA"
ARCHIVE_VERSION = 1


def write_archive(path, items: Iterable[tuple[str, FeatureMatrix]]) -> None:
    items = list(items)
    chunks = [ARCHIVE_MAGIC, struct.pack("<HI", ARCHIVE_VERSION, len(items))]
    for utt_id, fm in items:
        raw_id = utt_id.encode("utf-8")
        chunks.append(struct.pack("<H", len(raw_id)) + raw_id)
        chunks.append(struct.pack("<IIfB", fm.num_frames, fm.dims, fm.frame_shift_ms, STREAMS.index(fm.stream)))
        chunks.append(np.ascontiguousarray(fm.values, dtype="<f4").tobytes())
    Path(path).write_bytes(b"".join(chunks))


def read_archive(path) -> Iterator[tuple[str, FeatureMatrix]]:
    data = Path(path).read_bytes()
    if data[:4] != ARCHIVE_MAGIC:
        raise ValueError(f"{path}: not a feature archive (bad magic)")
    version, count = struct.unpack_from("<HI", data, 4)
    if version != ARCHIVE_VERSION:
        raise ValueError(f"{path}: unsupported archive version {version}")
    pos = 10
    for _ in range(count):
        (id_len,) = struct.unpack_from("<H", data, pos)
        pos += 2
        utt_id = data[pos:pos + id_len].decode("utf-8")
        pos += id_len
        frames, dims, shift, stream = struct.unpack_from("<IIfB", data, pos)
        pos += 13
        n = frames * dims
        values = np.frombuffer(data, dtype="<f4", count=n, offset=pos).astype(np.float64).reshape(frames, dims)
        pos += 4 * n
        yield utt_id, FeatureMatrix(values, float(shift), STREAMS[stream])


def write_csv(path, fm: FeatureMatrix) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["frame"] + [f"d{i}" for i in range(fm.dims)])
        for t, row in enumerate(fm.values):
            writer.writerow([t] + [f"{v:.6g}" for v in row])
