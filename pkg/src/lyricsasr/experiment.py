"""End-to-end experiment: poly / vocal / robust streams against one or more LMs.

For every stream the acoustic model is trained on the train split, the
interpolation weight is tuned on dev text, and the test split is decoded
with the bigram projection of each LM and rescored with its full order.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import time
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .am.decoder import DecodeConfig, viterbi_decode
from .am.nbest import NBestList, ctm_lines, rescore_nbest, word_confidence
from .am.train import TrainConfig, train_gmm_hmm
from .audio import AudioBuffer, resample_speed
from .eval.align import align_transcripts
from .eval.reports import (
    EvalReport, aggregate_errors, bins_csv, confidence_bins, format_error_table, genre_report, merge_bins, wer,
)
from .features import PRESETS, FeatureMatrix, cmvn, compute_mfcc, stack
from .lm import (
    count_ngrams, interpolate, parse_arpa, perplexity, prune_entropy, serialize_arpa, train_kneser_ney, tune_weight,
)
from .lm.model import NGramModel
from .plots import confidence_histogram, wer_bars
from .separation import SeparationDistortion, oracle_mask_separate
from .synth import Dataset, SynthConfig, synth_corpus

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

log = logging.getLogger(__name__)

STREAM_ORDER = ("poly", "vocal", "robust")
LM_ORDER = ("general", "lyrics", "interpolated")


@dataclass(frozen=True)
class LmConfig:
    order: int = 3
    general_prune: float = 3e-7
    grid_step: float = 0.01


@dataclass(frozen=True)
class ExperimentConfig:
    seed: int = 0
    streams: tuple[str, ...] = STREAM_ORDER
    lms: tuple[str, ...] = ("interpolated",)
    features: str = "align"
    data_dir: str | None = None  # reuse a dataset instead of synthesizing one
    speed_perturb: tuple[float, ...] = (1.0,)
    confidence_bins: int = 10
    separation: SeparationDistortion = SeparationDistortion(mask_erosion=0.3, residual_music=0.1)
    decode: DecodeConfig = DecodeConfig(beam=150.0, lattice_beam=30.0, n_best=20, lm_scale=8.0)
    train: TrainConfig = TrainConfig(lda_dim=20)
    lm: LmConfig = LmConfig()
    synth: SynthConfig = field(default_factory=SynthConfig)

    def __post_init__(self):
        if not self.streams or set(self.streams) - set(STREAM_ORDER):
            raise ValueError(f"streams must be a non-empty subset of {STREAM_ORDER}")
        if not self.lms or set(self.lms) - set(LM_ORDER):
            raise ValueError(f"lms must be a non-empty subset of {LM_ORDER}")
        if self.features not in PRESETS:
            raise ValueError(f"unknown feature preset {self.features!r}")

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        raw = dict(raw)
        defaults = cls()
        for key in ("separation", "decode", "train", "lm"):
            if key in raw:
                # a partial table overrides only the keys it names
                base = getattr(defaults, key)
                unknown = set(raw[key]) - {f.name for f in fields(base)}
                if unknown:
                    raise ValueError(f"unknown [{key}] keys: {sorted(unknown)}")
                raw[key] = replace(base, **raw[key])
        if "synth" in raw:
            raw["synth"] = SynthConfig.from_dict(raw["synth"])
        for key in ("streams", "lms", "speed_perturb"):
            if key in raw:
                raw[key] = tuple(raw[key])
        if raw.get("data_dir") == "":
            raw["data_dir"] = None
        unknown = set(raw) - {f.name for f in fields(cls)}
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**raw)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["synth"] = self.synth.to_dict()
        return out


def load_config(path, overrides: dict | None = None) -> ExperimentConfig:
    with open(path, "rb") as fh:
        raw = tomllib.load(fh)
    raw.update(overrides or {})
    return ExperimentConfig.from_dict(raw)


def _toml_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, str):
        return json.dumps(v)
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_toml_value(x) for x in v) + "]"
    return repr(v)


def to_toml(tree: dict, prefix: str = "") -> str:
    """Minimal TOML writer for config trees (scalars, arrays, nested tables; None is omitted)."""
    scalars = [(k, v) for k, v in tree.items() if not isinstance(v, dict) and v is not None]
    tables = [(k, v) for k, v in tree.items() if isinstance(v, dict)]
    out = [f"{k} = {_toml_value(v)}\n" for k, v in scalars]
    for k, v in tables:
        name = f"{prefix}.{k}" if prefix else k
        body = to_toml(v, name)
        if any(not isinstance(x, dict) and x is not None for x in v.values()):
            out.append(f"\n[{name}]\n")
        out.append(body)
    return "".join(out)


# -- features -----------------------------------------------------------------


def _utt_seed(seed: int, utt_id: str) -> int:
    # stable across runs and platforms, unlike hash()
    return int.from_bytes(f"{seed}:{utt_id}".encode(), "little") % (2 ** 32)


def stream_features(mixture: AudioBuffer, vocal: AudioBuffer, music: AudioBuffer, streams, preset: str,
                    distortion: SeparationDistortion) -> dict[str, FeatureMatrix]:
    """Per-utterance, mean-normalized features for each requested stream."""
    cfg = PRESETS[preset]
    out = {}
    poly = vocal_fm = None
    if {"poly", "robust"} & set(streams):
        poly = cmvn(compute_mfcc(mixture, cfg, "poly"))
    if {"vocal", "robust"} & set(streams):
        separated = oracle_mask_separate(mixture, vocal, music, distortion)
        vocal_fm = cmvn(compute_mfcc(separated, cfg, "vocal"))
    if "poly" in streams:
        out["poly"] = poly
    if "vocal" in streams:
        out["vocal"] = vocal_fm
    if "robust" in streams:
        out["robust"] = stack(poly, vocal_fm)
    return out


def split_features(ds: Dataset, split: str, cfg: ExperimentConfig, speeds=(1.0,)):
    """{stream: [(utt_id, words, FeatureMatrix)]} for one split.

    Values are rounded to float32, the feature archive's precision, so a
    pipeline run through archives sees exactly the same numbers.
    """
    out: dict[str, list] = {s: [] for s in cfg.streams}
    for utt in ds.utterances[split]:
        v, m = ds.stems(utt.utt_id)
        for speed in speeds:
            if speed == 1.0:
                vs, ms, mix = v, m, ds.mixture(utt.utt_id)
            else:
                vs, ms = resample_speed(v, speed), resample_speed(m, speed)
                mix = AudioBuffer(vs.samples + ms.samples, vs.sample_rate)
            tag = utt.utt_id if speed == 1.0 else f"sp{speed}-{utt.utt_id}"
            distortion = replace(cfg.separation, seed=_utt_seed(cfg.seed + cfg.separation.seed, tag))
            feats = stream_features(mix, vs, ms, cfg.streams, cfg.features, distortion)
            for s in cfg.streams:
                fm = replace(feats[s], values=feats[s].values.astype(np.float32).astype(np.float64))
                out[s].append((tag, utt.words, fm))
    return out


# -- language models -------------------------------------------------------------


@dataclass
class LmBundle:
    models: dict[str, NGramModel]
    weight: float
    dev_perplexity: dict[str, float]
    test_perplexity: dict[str, float]


def _canonical(model: NGramModel) -> NGramModel:
    # what a reader of the written ARPA file gets back
    return parse_arpa(serialize_arpa(model))


def build_lms(ds: Dataset, cfg: LmConfig) -> LmBundle:
    """Lyrics and general KN models, the dev-tuned mixture, and their perplexities.

    Every model is passed through ARPA text so in-memory decoding matches
    decoding from the written files.
    """
    lyrics = _canonical(train_kneser_ney(count_ngrams(ds.text("lyrics"), cfg.order, add_unk=True)))
    general = train_kneser_ney(count_ngrams(ds.text("general"), cfg.order, add_unk=True))
    if cfg.order > 1 and cfg.general_prune > 0:
        general = prune_entropy(general, cfg.general_prune)
    general = _canonical(general)
    dev = ds.transcripts("dev")
    weight, _ = tune_weight(lyrics, general, dev, cfg.grid_step)
    models = {"general": general, "lyrics": lyrics,
              "interpolated": _canonical(interpolate(lyrics, general, weight))}
    test = ds.transcripts("test")
    return LmBundle(
        models, weight,
        {k: perplexity(m, dev)[0] for k, m in models.items()},
        {k: perplexity(m, test)[0] for k, m in models.items()},
    )


# -- the run --------------------------------------------------------------------


@dataclass
class DecodeResult:
    utt_id: str
    ref: list[str]
    hyp: list[str]
    confidences: list[float]
    ctm: list[str]
    failed: bool = False
    first_pass: NBestList | None = field(default=None, repr=False, compare=False)


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    lm_weight: float
    dev_perplexity: dict[str, float]
    test_perplexity: dict[str, float]
    wer: dict[str, dict[str, float]]  # stream -> lm -> WER
    genre_wer: dict[str, dict[str, float]]  # stream -> genre -> WER (primary LM)
    genre_songs: dict[str, int]
    results: dict[tuple[str, str], list[DecodeResult]]
    confidence: dict[str, dict[str, float]]  # stream -> {"correct": mean, "incorrect": mean}
    train_log: dict[str, list[float]]
    timings: dict[str, float]

    @property
    def primary_lm(self) -> str:
        return _primary_lm(self.config)


def _primary_lm(cfg: ExperimentConfig) -> str:
    return "interpolated" if "interpolated" in cfg.lms else cfg.lms[0]


def finish_decode(utt_id, words, first_pass: NBestList, lm_full: NGramModel,
                  frame_shift_ms: float = 10.0) -> DecodeResult:
    """Rescore a first-pass N-best list with ``lm_full`` and attach confidences."""
    if first_pass.empty:
        log.warning("%s: empty decode", utt_id)
        return DecodeResult(utt_id, list(words), [], [], [], failed=True, first_pass=first_pass)
    nb = rescore_nbest(first_pass, lm_full)
    conf = word_confidence(nb)
    return DecodeResult(utt_id, list(words), list(nb.best.words), [c for _, c in conf],
                        ctm_lines(utt_id, nb, frame_shift_ms), first_pass=first_pass)


def decode_utterance(utt_id, words, fm, am, lm_first, lm_full, dcfg: DecodeConfig) -> DecodeResult:
    """Bigram first pass, full-order rescoring; any failure scores as an empty hypothesis."""
    try:
        nb = viterbi_decode(fm, am.scorer, am.graph, lm_first, dcfg)
        return finish_decode(utt_id, words, nb, lm_full, fm.frame_shift_ms)
    except Exception as exc:  # keep the rest of the run
        log.error("%s: decode failed: %s", utt_id, exc)
        return DecodeResult(utt_id, list(words), [], [], [], failed=True)


def run_experiment(cfg: ExperimentConfig, out_dir) -> ExperimentReport:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    timings = {}
    t0 = time.perf_counter()
    if cfg.data_dir:
        ds = Dataset(cfg.data_dir)
    else:
        ds = synth_corpus(replace(cfg.synth, seed=cfg.seed), out / "data")
    timings["synth"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    lms = build_lms(ds, cfg.lm)
    timings["lm"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    train = split_features(ds, "train", cfg, cfg.speed_perturb)
    test = split_features(ds, "test", cfg)
    timings["features"] = time.perf_counter() - t0

    models_dir = out / "models"
    models_dir.mkdir(exist_ok=True)
    genres = ds.genres
    results: dict[tuple[str, str], list[DecodeResult]] = {}
    wers: dict[str, dict[str, float]] = {}
    train_log = {}
    timings["train"] = timings["decode"] = 0.0
    for stream in cfg.streams:
        t0 = time.perf_counter()
        am = train_gmm_hmm([(fm, words) for _, words, fm in train[stream]], ds.lexicon, cfg.train)
        train_log[stream] = [h.log_likelihood for h in am.history]
        (models_dir / stream).mkdir(exist_ok=True)
        am.scorer.save(models_dir / stream / "am.npz")
        am.graph.save(models_dir / stream / "graph.json")
        timings["train"] += time.perf_counter() - t0
        t0 = time.perf_counter()
        wers[stream] = {}
        for lm_name in cfg.lms:
            full = lms.models[lm_name]
            first = full.truncate(2)
            res = [decode_utterance(u, w, fm, am, first, full, cfg.decode) for u, w, fm in test[stream]]
            results[(stream, lm_name)] = res
            wers[stream][lm_name] = wer(_report(res))
        timings["decode"] += time.perf_counter() - t0

    primary = _primary_lm(cfg)
    genre_wer, genre_songs, confidence = {}, {}, {}
    for stream in cfg.streams:
        res = results[(stream, primary)]
        songs = _song_reports(res)
        table = genre_report(songs, genres)
        genre_wer[stream] = table.wer
        genre_songs = table.song_totals
        confidence[stream] = _mean_confidence(res)

    report = ExperimentReport(cfg, lms.weight, lms.dev_perplexity, lms.test_perplexity, wers, genre_wer,
                              genre_songs, results, confidence, train_log, timings)
    write_report(report, out, lms)
    return report


def _report(results: list[DecodeResult]) -> EvalReport:
    rep = EvalReport()
    for r in results:
        rep.add(r.utt_id, align_transcripts(r.ref, r.hyp))
    return rep


def _song_reports(results: list[DecodeResult]) -> dict[str, EvalReport]:
    songs: dict[str, EvalReport] = {}
    for r in results:
        songs.setdefault(r.utt_id.rsplit("_", 1)[0], EvalReport()).add(r.utt_id, align_transcripts(r.ref, r.hyp))
    return songs


def _bins(results: list[DecodeResult], bins: int):
    tables = [confidence_bins(list(zip(r.hyp, r.confidences)), align_transcripts(r.ref, r.hyp), bins)
              for r in results]
    return merge_bins(tables)


def _mean_confidence(results: list[DecodeResult]) -> dict[str, float]:
    good, bad = [], []
    for r in results:
        labels = [lab for _, h, lab in align_transcripts(r.ref, r.hyp).pairs if h is not None]
        for lab, c in zip(labels, r.confidences):
            (good if lab == "C" else bad).append(c)
    return {"correct": float(np.mean(good)) if good else math.nan,
            "incorrect": float(np.mean(bad)) if bad else math.nan,
            "n_correct": len(good), "n_incorrect": len(bad)}


# -- report files -------------------------------------------------------------------


def _fmt(x: float) -> str:
    return "nan" if x != x else f"{x:.2f}"


def write_report(report: ExperimentReport, out: Path, lms: LmBundle | None = None) -> None:
    cfg = report.config
    primary = report.primary_lm
    streams = list(cfg.streams)

    rows = [["stream", *cfg.lms]] + [[s, *(_fmt(report.wer[s][l]) for l in cfg.lms)] for s in streams]
    _write_csv(out / "wer.csv", rows)

    genres = [g for g in ("metal", "pop", "hiphop") if g in report.genre_songs]
    _write_csv(out / "genre.csv", [["stream", *genres], ["songs", *(report.genre_songs[g] for g in genres)]]
               + [[s, *(_fmt(report.genre_wer[s][g]) for g in genres)] for s in streams])

    errors = aggregate_errors({s: _report(report.results[(s, primary)]) for s in streams})
    _write_csv(out / "errors.csv", [["stream", "ins", "del", "sub", "ref_words", "ins_pct", "del_pct", "sub_pct"]]
               + [[r.name, r.insertions, r.deletions, r.substitutions, r.ref_words, *r.percentages]
                  for r in errors[:-1]])

    bins = {s: _bins(report.results[(s, primary)], cfg.confidence_bins) for s in streams}
    for s in streams:
        (out / f"confidence_{s}.csv").write_text(bins_csv(bins[s]))
    confidence_histogram(bins, out / "confidence.svg")
    wer_bars({g: {s: report.genre_wer[s][g] for s in streams} for g in genres}, out / "genre_wer.svg")

    _write_csv(out / "perplexity.csv", [["lm", "dev", "test"]] + [
        [k, f"{report.dev_perplexity[k]:.4f}", f"{report.test_perplexity[k]:.4f}"] for k in LM_ORDER])

    hyp_dir = out / "hyp"
    hyp_dir.mkdir(exist_ok=True)
    for (s, l), res in report.results.items():
        (hyp_dir / f"{s}.{l}.txt").write_text("".join(f"{r.utt_id} {' '.join(r.hyp)}\n" for r in res))
        (hyp_dir / f"{s}.{l}.ctm").write_text("".join(line + "\n" for r in res for line in r.ctm))
    if lms is not None:
        (out / "models").mkdir(exist_ok=True)
        for name, model in lms.models.items():
            (out / "models" / f"{name}.arpa").write_text(serialize_arpa(model))

    settings = {
        "config": cfg.to_dict(),
        "lm_weight": report.lm_weight,
        "dev_perplexity": report.dev_perplexity,
        "test_perplexity": report.test_perplexity,
        "confidence_means": report.confidence,
        "failed_decodes": {f"{s}.{l}": sum(r.failed for r in res) for (s, l), res in report.results.items()},
        "dev_usage": "dev transcripts are used only to tune the interpolation weight",
    }
    (out / "config.toml").write_text(to_toml(cfg.to_dict()))
    (out / "settings.json").write_text(json.dumps(settings, indent=1, sort_keys=True, default=list) + "\n")
    (out / "report.txt").write_text(format_report(report, errors))


def format_report(report: ExperimentReport, errors=None) -> str:
    cfg = report.config
    buf = io.StringIO()
    buf.write(f"seed {cfg.seed}; features {cfg.features}; separation {asdict(cfg.separation)}\n")
    d = cfg.decode
    buf.write(f"decoder: beam {d.beam}, lm_scale {d.lm_scale}, insertion penalty {d.word_insertion_penalty}, "
              f"n_best {d.n_best}, subsampling {cfg.train.subsampling}\n")
    buf.write(f"interpolation weight on lyrics LM: {report.lm_weight:.2f}\n")
    buf.write("perplexity (dev / test): " + ", ".join(
        f"{k} {report.dev_perplexity[k]:.2f} / {report.test_perplexity[k]:.2f}" for k in LM_ORDER) + "\n\n")
    buf.write("WER (%)\n")
    buf.write(f"{'':10}" + "".join(f"{l:>14}" for l in cfg.lms) + "\n")
    for s in cfg.streams:
        buf.write(f"{s:10}" + "".join(f"{_fmt(report.wer[s][l]):>14}" for l in cfg.lms) + "\n")
    genres = list(report.genre_songs)
    buf.write(f"\nWER (%) by genre, {report.primary_lm} LM\n")
    buf.write(f"{'':10}" + "".join(f"{g:>10}" for g in genres) + "\n")
    buf.write(f"{'# songs':10}" + "".join(f"{report.genre_songs[g]:>10}" for g in genres) + "\n")
    for s in cfg.streams:
        buf.write(f"{s:10}" + "".join(f"{_fmt(report.genre_wer[s][g]):>10}" for g in genres) + "\n")
    if errors is not None:
        buf.write("\nErrors\n" + format_error_table(errors) + "\n")
    buf.write("\nMean word confidence (correct / incorrect)\n")
    for s in cfg.streams:
        c = report.confidence[s]
        buf.write(f"{s:10}{c['correct']:.4f} / {c['incorrect']:.4f}\n")
    return buf.getvalue()


def _write_csv(path: Path, rows) -> None:
    with open(path, "w", newline="") as fh:
        csv.writer(fh, lineterminator="\n").writerows(rows)
