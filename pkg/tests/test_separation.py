import numpy as np
import pytest

from lyricsasr.audio import AudioBuffer
from lyricsasr.separation import SNR_CAP_DB, SeparationDistortion, measure_snr, oracle_mask_separate

SR = 16000


def _stems(seed=0, n=SR):
    rng = np.random.default_rng(seed)
    t = np.arange(n) / SR
    vocal = 0.3 * np.sin(2 * np.pi * 440 * t) * (1 + 0.5 * np.sin(2 * np.pi * 3 * t))
    music = 0.2 * rng.standard_normal(n)
    return AudioBuffer(vocal, SR), AudioBuffer(music, SR), AudioBuffer(vocal + music, SR)


def test_clean_vocal_recovered():
    v = AudioBuffer(0.3 * np.sin(2 * np.pi * 300 * np.arange(SR) / SR), SR)
    silent = AudioBuffer(np.zeros(SR), SR)
    out = oracle_mask_separate(v, v, silent)
    assert measure_snr(out, v) >= 40


def test_silent_vocal_gives_near_silence():
    _, music, _ = _stems()
    silent = AudioBuffer(np.zeros(SR), SR)
    out = oracle_mask_separate(music, silent, music)
    assert np.sqrt(np.mean(out.samples ** 2)) < 1e-3 * np.sqrt(np.mean(music.samples ** 2))


def test_length_preserved():
    v, m, mix = _stems(n=12345)
    assert len(oracle_mask_separate(mix, v, m)) == 12345


def test_inconsistent_mixture_rejected():
    v, m, mix = _stems()
    bad = AudioBuffer(mix.samples + 0.01, SR)
    with pytest.raises(ValueError, match="residual"):
        oracle_mask_separate(bad, v, m)


def test_length_mismatch_rejected():
    v, m, mix = _stems()
    with pytest.raises(ValueError, match="length"):
        oracle_mask_separate(mix, AudioBuffer(v.samples[:-1], SR), m)


def test_erosion_lowers_snr():
    v, m, mix = _stems()
    clean = measure_snr(oracle_mask_separate(mix, v, m), v)
    eroded = measure_snr(oracle_mask_separate(mix, v, m, SeparationDistortion(mask_erosion=0.5)), v)
    assert eroded < clean


def test_residual_music_monotone():
    v, m, mix = _stems(1)
    snrs = [measure_snr(oracle_mask_separate(mix, v, m, SeparationDistortion(residual_music=r)), v)
            for r in (0.0, 0.1, 0.3, 0.6, 1.0)]
    assert all(a > b for a, b in zip(snrs, snrs[1:]))


def test_full_residual_returns_mixture():
    v, m, mix = _stems(2)
    out = oracle_mask_separate(mix, v, m, SeparationDistortion(residual_music=1.0))
    assert np.allclose(out.samples, mix.samples, atol=1e-8)


def test_deterministic_per_seed():
    v, m, mix = _stems()
    d = SeparationDistortion(mask_erosion=0.3, mask_blur=2, residual_music=0.1, seed=7)
    a = oracle_mask_separate(mix, v, m, d)
    b = oracle_mask_separate(mix, v, m, d)
    assert np.array_equal(a.samples, b.samples)
    c = oracle_mask_separate(mix, v, m, SeparationDistortion(mask_erosion=0.3, mask_blur=2, residual_music=0.1,
                                                             seed=8))
    assert not np.array_equal(a.samples, c.samples)


def test_invalid_distortion():
    with pytest.raises(ValueError):
        SeparationDistortion(mask_erosion=1.5)
    with pytest.raises(ValueError):
        SeparationDistortion(mask_blur=-1)


@pytest.mark.parametrize("target", [0.0, 10.0])
def test_snr_law(target):
    rng = np.random.default_rng(3)
    ref = rng.standard_normal(8000)
    noise = rng.standard_normal(8000)
    noise *= np.sqrt(np.mean(ref ** 2) / np.mean(noise ** 2) / 10 ** (target / 10))
    assert measure_snr(AudioBuffer(ref + noise, SR), AudioBuffer(ref, SR)) == pytest.approx(target, abs=1e-9)


def test_snr_cap_and_silent_reference():
    x = AudioBuffer(np.ones(100), SR)
    assert measure_snr(x, x) == SNR_CAP_DB
    with pytest.raises(ValueError):
        measure_snr(x, AudioBuffer(np.zeros(100), SR))
