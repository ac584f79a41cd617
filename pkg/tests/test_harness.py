import filecmp
import math
import shutil
from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

from lyricsasr.am import TrainConfig, train_gmm_hmm
from lyricsasr.audio import AudioBuffer, read_wav, write_wav
from lyricsasr.experiment import (
    ExperimentConfig, build_lms, decode_utterance, load_config, run_experiment, to_toml,
)
from lyricsasr.eval import EvalReport, align_transcripts, wer
from lyricsasr.features import PRESETS, cmvn, compute_mfcc
from lyricsasr.separation import SeparationDistortion, measure_snr
from lyricsasr.synth import MusicProfile, SynthConfig, mix_at_snr, synth_corpus

SMALL = SynthConfig(
    seed=11,
    songs={"train": {"metal": 6, "pop": 6, "hiphop": 6}, "dev": {"metal": 1, "pop": 1, "hiphop": 1},
           "test": {"metal": 2, "pop": 2, "hiphop": 2}},
    general_lines=300, lyrics_text_lines=200,
)

TINY = SynthConfig(
    songs={"train": {"metal": 2, "pop": 2, "hiphop": 2}, "dev": {"metal": 1, "pop": 1, "hiphop": 1},
           "test": {"metal": 1, "pop": 1, "hiphop": 1}},
    lines_per_song=3, general_lines=100, lyrics_text_lines=50,
)


@pytest.fixture(scope="module")
def small(tmp_path_factory):
    return synth_corpus(SMALL, tmp_path_factory.mktemp("small"))


def _tree_equal(a: Path, b: Path) -> list[str]:
    """Relative paths whose bytes differ (or exist on one side only)."""
    fa = {p.relative_to(a) for p in a.rglob("*") if p.is_file()}
    fb = {p.relative_to(b) for p in b.rglob("*") if p.is_file()}
    diff = sorted(str(p) for p in fa ^ fb)
    diff += sorted(str(p) for p in fa & fb if not filecmp.cmp(a / p, b / p, shallow=False))
    return diff


# -- synthesis -------------------------------------------------------------------


def test_snr_hits_target(small):
    for split, utts in small.utterances.items():
        for u in utts:
            vocal, music = small.stems(u.utt_id)
            target = SMALL.profiles[u.genre].snr_db
            assert abs(measure_snr(small.mixture(u.utt_id), vocal) - target) <= 0.1
            assert abs(10 * math.log10(np.mean(vocal.samples ** 2) / np.mean(music.samples ** 2)) - target) <= 0.1


def test_mixture_is_vocal_plus_music(small):
    for u in small.utterances["test"]:
        vocal, music = small.stems(u.utt_id)
        mix = small.mixture(u.utt_id)
        assert np.max(np.abs(mix.samples - vocal.samples - music.samples)) < 1e-6


def test_splits_disjoint_and_lexicon_complete(small):
    songs = {split: {u.song_id for u in utts} for split, utts in small.utterances.items()}
    assert not songs["train"] & songs["dev"]
    assert not songs["train"] & songs["test"]
    assert not songs["dev"] & songs["test"]
    for utts in small.utterances.values():
        for u in utts:
            assert all(w in small.lexicon for w in u.words)
    assert all(w in small.lexicon for line in small.text("general") for w in line)


def test_genre_map_and_line_times(small):
    assert set(small.genres.values()) == {"metal", "pop", "hiphop"}
    by_song: dict[str, list] = {}
    for row in small.lines:
        by_song.setdefault(row["song_id"], []).append((float(row["start_sec"]), float(row["end_sec"])))
    for spans in by_song.values():
        for (s0, e0), (s1, e1) in zip(spans, spans[1:]):
            assert s0 < e0 <= s1 < e1


def test_same_seed_bit_identical(tmp_path):
    synth_corpus(TINY, tmp_path / "a")
    synth_corpus(TINY, tmp_path / "b")
    assert _tree_equal(tmp_path / "a", tmp_path / "b") == []


def test_different_seed_differs(tmp_path):
    synth_corpus(TINY, tmp_path / "a")
    synth_corpus(replace(TINY, seed=1), tmp_path / "b")
    assert _tree_equal(tmp_path / "a", tmp_path / "b")


def test_unwritable_output(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(OSError):
        synth_corpus(TINY, blocker / "sub")


def test_config_validation():
    with pytest.raises(ValueError):
        MusicProfile(float("inf"), drone=1.0)
    with pytest.raises(ValueError):
        MusicProfile(0.0)
    with pytest.raises(ValueError):
        MusicProfile(0.0, noise=1.0, phone_ms=(0.0, 10.0))
    with pytest.raises(ValueError):
        SynthConfig(songs={"train": {"jazz": 1}})
    with pytest.raises(ValueError):
        mix_at_snr(np.zeros(10), np.ones(10), 0.0)


def test_synth_config_dict_round_trip():
    cfg = SynthConfig.from_dict({"seed": 4, "profiles": {"metal": {"snr_db": -8.0}}})
    assert cfg.profiles["metal"].snr_db == -8.0
    assert cfg.profiles["metal"].drone == SynthConfig().profiles["metal"].drone
    assert SynthConfig.from_dict(cfg.to_dict()) == cfg


# -- experiment pieces -----------------------------------------------------------------


def test_clean_vocal_sanity_ceiling(small):
    """A model trained and tested on clean vocal stems stays under 5% WER."""
    cfg = ExperimentConfig()
    lms = build_lms(small, cfg.lm)

    def feats(split):
        return [(u.utt_id, u.words, cmvn(compute_mfcc(small.stems(u.utt_id)[0], PRESETS["align"], "vocal")))
                for u in small.utterances[split]]

    am = train_gmm_hmm([(fm, w) for _, w, fm in feats("train")], small.lexicon, cfg.train)
    full = lms.models["interpolated"]
    rep = EvalReport()
    for u, w, fm in feats("test"):
        r = decode_utterance(u, w, fm, am, full.truncate(2), full, cfg.decode)
        rep.add(u, align_transcripts(r.ref, r.hyp))
    assert wer(rep) < 5.0


def test_lm_ordering_on_small_corpus(small):
    lms = build_lms(small, ExperimentConfig().lm)
    for ppl in (lms.dev_perplexity, lms.test_perplexity):
        assert ppl["interpolated"] <= ppl["lyrics"] <= ppl["general"]


def test_degenerate_streams_agree(small, tmp_path):
    """Silent music and no distortion: all streams see the same signal."""
    root = tmp_path / "silent"
    shutil.copytree(small.root, root)
    for path in (root / "stems").glob("*.music.wav"):
        music = read_wav(path)
        write_wav(AudioBuffer(np.zeros(len(music)), music.sample_rate), path, "float32")
        utt = path.name[: -len(".music.wav")]
        write_wav(read_wav(root / "stems" / f"{utt}.vocal.wav"), root / "wav" / f"{utt}.wav", "float32")
    cfg = ExperimentConfig(seed=SMALL.seed, data_dir=str(root), separation=SeparationDistortion())
    report = run_experiment(cfg, tmp_path / "out")
    rates = [report.wer[s]["interpolated"] for s in cfg.streams]
    assert max(rates) - min(rates) <= 2.0


def test_failed_decode_scores_as_empty():
    class Broken:
        scorer = graph = None

    fm = compute_mfcc(AudioBuffer(np.zeros(4000), 16000), PRESETS["align"])
    res = decode_utterance("u1", ["A", "B"], fm, Broken(), None, None, ExperimentConfig().decode)
    assert res.failed and res.hyp == [] and res.ref == ["A", "B"]
    assert align_transcripts(res.ref, res.hyp).csid == (0, 0, 0, 2)


# -- experiment end to end ---------------------------------------------------------------

FAST = ExperimentConfig(seed=5, synth=TINY, train=TrainConfig(em_iterations=8, lda_dim=20))


@pytest.fixture(scope="module")
def fast_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("fast")
    return run_experiment(FAST, out / "a"), out


def test_report_files(fast_run):
    report, root = fast_run
    out = root / "a"
    for name in ("wer.csv", "genre.csv", "errors.csv", "perplexity.csv", "settings.json", "report.txt",
                 "config.toml", "confidence.svg", "genre_wer.svg", "models/interpolated.arpa",
                 "models/robust/am.npz", "models/robust/graph.json", "hyp/robust.interpolated.ctm"):
        assert (out / name).is_file(), name
    assert (out / "confidence.svg").read_text().lstrip().startswith("<?xml")
    assert load_config(out / "config.toml") == FAST
    text = (out / "report.txt").read_text()
    assert "interpolation weight" in text and "beam 150.0" in text
    assert set(report.wer) == {"poly", "vocal", "robust"}
    assert 0.0 <= report.lm_weight <= 1.0


def test_experiment_deterministic(fast_run):
    _, root = fast_run
    run_experiment(FAST, root / "b")
    assert _tree_equal(root / "a", root / "b") == []


def test_experiment_config_checks(tmp_path):
    with pytest.raises(ValueError):
        ExperimentConfig(streams=())
    with pytest.raises(ValueError):
        ExperimentConfig(lms=("bogus",))
    with pytest.raises(ValueError):
        ExperimentConfig.from_dict({"decode": {"beem": 3}})
    with pytest.raises(ValueError):
        ExperimentConfig.from_dict({"colour": 1})
    partial = ExperimentConfig.from_dict({"train": {"em_iterations": 3}, "decode": {"n_best": 5}})
    assert partial.train == replace(ExperimentConfig().train, em_iterations=3)
    assert partial.decode == replace(ExperimentConfig().decode, n_best=5)
    path = tmp_path / "c.toml"
    path.write_text(to_toml(ExperimentConfig().to_dict()))
    assert load_config(path) == ExperimentConfig()
    assert load_config(path, {"seed": 9}).seed == 9


def test_shipped_config_matches_defaults():
    shipped = Path(__file__).resolve().parents[1] / "configs" / "experiment.toml"
    assert load_config(shipped) == ExperimentConfig()
