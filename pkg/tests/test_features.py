import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from lyricsasr.audio import AudioBuffer
from lyricsasr.features import (
    ALIGN, HIRES, FeatureMatrix, MfccConfig, StackError, append_deltas, cmvn, compute_mfcc, filter_centres_hz,
    mel_filterbank, mel_scale, read_archive, stack, write_archive,
)

from oracles import delta_oracle, mfcc_oracle

SR = 16000


def test_mel_formula():
    assert mel_scale(700.0) == pytest.approx(1127 * np.log(2), abs=1e-12)
    assert mel_scale(700.0) == pytest.approx(781.17, abs=0.01)


@pytest.mark.parametrize("cfg", [ALIGN, HIRES, MfccConfig(num_mel_filters=10, num_cepstra=5, low_freq_hz=300,
                                                          high_freq_hz=3000)])
def test_filter_support_within_band(cfg):
    fb = mel_filterbank(cfg, 512, SR)
    freqs = np.arange(257) * SR / 512
    assert (fb >= 0).all()
    support = fb.sum(axis=0) > 0
    assert freqs[support].min() >= cfg.low_freq_hz
    assert freqs[support].max() <= cfg.high_freq_hz


def test_filter_centres_match_formula():
    cfg = HIRES
    lo = 1127 * np.log(1 + cfg.low_freq_hz / 700)
    hi = 1127 * np.log(1 + cfg.high_freq_hz / 700)
    expected = [700 * (np.exp((lo + (m + 1) * (hi - lo) / (cfg.num_mel_filters + 1)) / 1127) - 1)
                for m in range(cfg.num_mel_filters)]
    assert np.allclose(filter_centres_hz(cfg), expected, rtol=0, atol=1e-9)


def test_high_freq_above_nyquist():
    with pytest.raises(ValueError):
        mel_filterbank(MfccConfig(high_freq_hz=9000), 512, SR)


def test_hires_shape():
    fm = compute_mfcc(AudioBuffer(np.random.default_rng(0).standard_normal(SR) * 0.1, SR), HIRES)
    assert fm.values.shape == (98, 40)


def test_align_dims():
    fm = compute_mfcc(AudioBuffer(np.random.default_rng(0).standard_normal(SR) * 0.1, SR), ALIGN)
    assert fm.dims == 39


def test_constant_signal():
    fm = compute_mfcc(AudioBuffer(np.full(8000, 0.3), SR), HIRES)
    from scipy.fft import dct
    expected = dct(np.full(40, np.log(1e-10)), type=2, norm="ortho")[:40]
    assert np.allclose(fm.values, expected[None, :])


@pytest.mark.parametrize("preset", ["hires", "align"])
def test_mfcc_matches_oracle(preset):
    cfg = {"hires": HIRES, "align": ALIGN}[preset]
    rng = np.random.default_rng(11)
    x = rng.uniform(-0.5, 0.5, SR // 2)
    base = MfccConfig(num_mel_filters=cfg.num_mel_filters, num_cepstra=cfg.num_cepstra,
                      low_freq_hz=cfg.low_freq_hz, high_freq_hz=cfg.high_freq_hz)
    ours = compute_mfcc(AudioBuffer(x, SR), base).values
    ref = mfcc_oracle(x, SR, n_filters=cfg.num_mel_filters, n_ceps=cfg.num_cepstra, low=cfg.low_freq_hz,
                      high=cfg.high_freq_hz)
    assert np.allclose(ours, ref, rtol=1e-6, atol=1e-9 * np.abs(ref).max())


def test_deltas_constant():
    out = append_deltas(FeatureMatrix(np.ones((7, 3))))
    assert out.dims == 9
    assert not out.values[:, 3:].any()


def test_deltas_ramp():
    x = np.tile(np.arange(12.0)[:, None], (1, 2))
    out = append_deltas(FeatureMatrix(x)).values
    assert np.allclose(out[2:-2, 2:4], 1.0)
    assert np.allclose(out[4:-4, 4:6], 0.0)


def test_deltas_match_oracle():
    x = np.random.default_rng(2).standard_normal((10, 13))
    out = append_deltas(FeatureMatrix(x)).values
    d = delta_oracle(x)
    assert np.allclose(out[:, 13:26], d, atol=1e-12)
    assert np.allclose(out[:, 26:], delta_oracle(d), atol=1e-12)


def test_deltas_empty():
    with pytest.raises(ValueError):
        append_deltas(FeatureMatrix(np.zeros((0, 3))))


finite = st.floats(-1e3, 1e3, allow_nan=False)


@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(2, 30), st.integers(1, 6)), elements=finite), finite)
def test_cmvn_properties(x, c):
    out = cmvn(FeatureMatrix(x)).values
    assert np.allclose(out.mean(axis=0), 0, atol=1e-10 * max(1.0, np.abs(x).max()))
    assert np.allclose(cmvn(FeatureMatrix(out)).values, out, atol=1e-9 * max(1.0, np.abs(x).max()))
    assert np.allclose(cmvn(FeatureMatrix(x + c)).values, out, atol=1e-9 * max(1.0, np.abs(x).max(), abs(c)))


def test_cmvn_zero_mean_unchanged():
    x = np.array([[1.0, -2.0], [-1.0, 2.0]])
    assert np.allclose(cmvn(FeatureMatrix(x)).values, x, atol=1e-12)


def test_cmvn_single_frame():
    assert not cmvn(FeatureMatrix(np.array([[3.0, 4.0]]))).values.any()


def test_stack_shapes_and_order():
    rng = np.random.default_rng(3)
    poly = FeatureMatrix(rng.standard_normal((98, 40)), stream="poly")
    vocal = FeatureMatrix(np.zeros((98, 40)), stream="vocal")
    out = stack(poly, vocal)
    assert out.values.shape == (98, 80) and out.stream == "robust"
    assert np.array_equal(out.values[:, 40:], poly.values)
    assert np.array_equal(out.values[:, :40], vocal.values)


def test_stack_frame_mismatch():
    with pytest.raises(StackError, match="98.*97"):
        stack(FeatureMatrix(np.zeros((98, 40)), stream="poly"), FeatureMatrix(np.zeros((97, 40)), stream="vocal"))


def test_stack_stream_mismatch():
    with pytest.raises(StackError):
        stack(FeatureMatrix(np.zeros((5, 4)), stream="vocal"), FeatureMatrix(np.zeros((5, 4)), stream="poly"))


def test_archive_round_trip(tmp_path):
    rng = np.random.default_rng(4)
    items = [("utt1", FeatureMatrix(rng.standard_normal((5, 3)), stream="poly")),
             ("utt-2", FeatureMatrix(rng.standard_normal((2, 6)), 30.0, "robust"))]
    write_archive(tmp_path / "a.feats", items)
    back = list(read_archive(tmp_path / "a.feats"))
    assert [k for k, _ in back] == ["utt1", "utt-2"]
    for (_, a), (_, b) in zip(items, back):
        assert b.stream == a.stream and b.frame_shift_ms == a.frame_shift_ms
        assert np.allclose(a.values, b.values, atol=1e-6)
