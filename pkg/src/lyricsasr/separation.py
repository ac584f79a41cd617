"""Oracle ideal-ratio-mask vocal extraction with controllable degradation.

Stands in for a learned singing-voice separator: the mask is computed from
the known stems, then eroded, blurred and leaked so the music-removed stream
carries separator-like artifacts.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import uniform_filter
from scipy.signal import istft, stft

from .audio import AudioBuffer

N_FFT = 1024
HOP = 256
SNR_CAP_DB = 120.0


@dataclass(frozen=True)
class SeparationDistortion:
    mask_erosion: float = 0.0
    mask_blur: int = 0
    residual_music: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.mask_erosion <= 1.0:
            raise ValueError("mask_erosion must lie in [0, 1]")
        if self.mask_blur < 0:
            raise ValueError("mask_blur must be >= 0")
        if not 0.0 <= self.residual_music <= 1.0:
            raise ValueError("residual_music must lie in [0, 1]")


def _stft(x: np.ndarray) -> np.ndarray:
    return stft(x, nperseg=N_FFT, noverlap=N_FFT - HOP, window="hann", boundary="zeros", padded=True)[2]


def _istft(spec: np.ndarray, length: int) -> np.ndarray:
    out = istft(spec, nperseg=N_FFT, noverlap=N_FFT - HOP, window="hann", boundary=True)[1]
    if out.shape[0] >= length:
        return out[:length]
    return np.pad(out, (0, length - out.shape[0]))


def degrade_mask(mask: np.ndarray, distortion: SeparationDistortion) -> np.ndarray:
    """Blur, then randomly zero cells, then leak music back in."""
    out = mask
    if distortion.mask_blur > 0:
        out = uniform_filter(out, size=2 * distortion.mask_blur + 1, mode="nearest")
    if distortion.mask_erosion > 0:
        rng = np.random.default_rng(distortion.seed)
        out = np.where(rng.random(out.shape) < distortion.mask_erosion, 0.0, out)
    if distortion.residual_music > 0:
        # amplitude leak sqrt(r) on the music share puts r of its power back
        out = out + np.sqrt(distortion.residual_music) * (1.0 - out)
    return out


def oracle_mask_separate(mixture: AudioBuffer, vocal_stem: AudioBuffer, music_stem: AudioBuffer,
                         distortion: SeparationDistortion = SeparationDistortion()) -> AudioBuffer:
    n = len(mixture)
    if len(vocal_stem) != n or len(music_stem) != n:
        raise ValueError(f"length mismatch: mixture {n}, vocal {len(vocal_stem)}, music {len(music_stem)}")
    if not mixture.sample_rate == vocal_stem.sample_rate == music_stem.sample_rate:
        raise ValueError("sample-rate mismatch between mixture and stems")
    if n == 0:
        return AudioBuffer(np.zeros(0), mixture.sample_rate)
    residual = mixture.samples - vocal_stem.samples - music_stem.samples
    rms = float(np.sqrt(np.mean(residual ** 2)))
    if rms > 1e-6:
        raise ValueError(f"mixture is not vocal + music (residual RMS {rms:.3g})")

    v_pow = np.abs(_stft(vocal_stem.samples)) ** 2
    s_pow = np.abs(_stft(music_stem.samples)) ** 2
    # cells where both stems are silent get mask 0; the mixture is silent there too
    total = v_pow + s_pow
    ideal = np.divide(v_pow, total, out=np.zeros_like(total), where=total > 0)
    mask = degrade_mask(ideal, distortion)
    out = _istft(mask * _stft(mixture.samples), n)
    return AudioBuffer(out, mixture.sample_rate)


def measure_snr(signal: AudioBuffer, reference: AudioBuffer) -> float:
    """SNR of ``signal`` against ``reference`` in dB, capped at 120 dB."""
    if len(signal) != len(reference):
        raise ValueError(f"length mismatch: {len(signal)} vs {len(reference)}")
    p_ref = float(np.mean(reference.samples ** 2)) if len(reference) else 0.0
    if p_ref == 0.0:
        raise ValueError("reference signal is silent")
    p_err = float(np.mean((signal.samples - reference.samples) ** 2))
    if p_err == 0.0:
        return SNR_CAP_DB
    return min(SNR_CAP_DB, 10.0 * np.log10(p_ref / p_err))
