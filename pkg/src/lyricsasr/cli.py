"""Command-line entry point: ``lyricsasr <group> <command> [options]``.

Commands that take ``--config`` read an experiment TOML file (see
configs/experiment.toml); ``--set section.key=value`` overrides single
entries. Results go to stdout unless ``--out`` is given. Any error exits
nonzero with a message on stderr.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__

log = logging.getLogger("lyricsasr")

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib


class CliError(Exception):
    pass


# -- config handling -------------------------------------------------------------


def _parse_value(text: str):
    try:
        return tomllib.loads(f"v = {text}")["v"]
    except tomllib.TOMLDecodeError:
        return text


def parse_overrides(items) -> dict:
    """``["decode.beam=40", "seed=3"]`` -> nested dict."""
    tree: dict = {}
    for item in items or []:
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise CliError(f"--set expects KEY=VALUE, got {item!r}")
        node = tree
        parts = key.strip().split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise CliError(f"--set {key}: {part} is not a table")
        node[parts[-1]] = _parse_value(value.strip())
    return tree


def _deep_update(base: dict, extra: dict) -> dict:
    for k, v in extra.items():
        if isinstance(v, dict) and isinstance(base.get(k), dict):
            _deep_update(base[k], v)
        else:
            base[k] = v
    return base


def experiment_config(args):
    from .experiment import ExperimentConfig

    raw: dict = {}
    if getattr(args, "config", None):
        try:
            with open(args.config, "rb") as fh:
                raw = tomllib.load(fh)
        except OSError as exc:
            raise CliError(f"cannot read config: {exc}") from None
    _deep_update(raw, parse_overrides(getattr(args, "set", None)))
    if getattr(args, "seed", None) is not None:
        raw["seed"] = args.seed
    return ExperimentConfig.from_dict(raw)


def _defaults_epilog() -> str:
    from .experiment import ExperimentConfig, to_toml

    return "configuration keys and defaults:\n\n" + to_toml(ExperimentConfig().to_dict())


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


# -- features / separation ---------------------------------------------------------


def cmd_features_extract(args) -> None:
    from .audio import read_wav
    from .experiment import split_features
    from .features import PRESETS, cmvn, compute_mfcc, write_archive
    from .synth import Dataset

    if args.wav:
        if not args.out:
            raise CliError("--out is required")
        fm = compute_mfcc(read_wav(args.wav), PRESETS[args.preset], "poly")
        if args.cmvn:
            fm = cmvn(fm)
        write_archive(args.out, [(args.utt_id or Path(args.wav).stem, fm)])
        return
    if not args.data or not args.out:
        raise CliError("either --wav, or --data with --out, is required")
    cfg = experiment_config(args)
    feats = split_features(Dataset(args.data), args.split, cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for stream, items in feats.items():
        write_archive(out / f"{stream}.ark", [(u, fm) for u, _, fm in items])
        print(f"{stream}\t{len(items)}\t{out / f'{stream}.ark'}")


def cmd_features_stack(args) -> None:
    from .features import read_archive, stack, write_archive

    poly = dict(read_archive(args.poly))
    vocal = dict(read_archive(args.vocal))
    if set(poly) != set(vocal):
        raise CliError(f"archives hold different utterances ({len(set(poly) ^ set(vocal))} differ)")
    write_archive(args.out, [(u, stack(poly[u], vocal[u])) for u in poly])


def cmd_separate(args) -> None:
    from .audio import read_wav, write_wav
    from .separation import SeparationDistortion, measure_snr, oracle_mask_separate

    cfg = experiment_config(args).separation
    distortion = SeparationDistortion(
        args.erosion if args.erosion is not None else cfg.mask_erosion,
        args.blur if args.blur is not None else cfg.mask_blur,
        args.residual if args.residual is not None else cfg.residual_music,
        args.distortion_seed if args.distortion_seed is not None else cfg.seed,
    )
    vocal = read_wav(args.vocal_stem)
    est = oracle_mask_separate(read_wav(args.mixture), vocal, read_wav(args.music_stem), distortion)
    write_wav(est, args.out, "float32")
    print(json.dumps({"snr_db": round(measure_snr(est, vocal), 6)}))


# -- language models -----------------------------------------------------------------


def _corpus(path):
    from .lm import read_corpus

    return read_corpus(path)


def cmd_lm_count(args) -> None:
    from .lm import count_ngrams, write_counts

    counts = count_ngrams(_corpus(args.text), args.order, add_unk=args.unk)
    if args.out:
        write_counts(counts, args.out)
        return
    for n in range(1, counts.order + 1):
        for key in sorted(counts[n]):
            print(f"{' '.join(key)}\t{counts[n][key]}")


def cmd_lm_train(args) -> None:
    from .lm import count_ngrams, read_counts, serialize_arpa, train_kneser_ney

    if bool(args.text) == bool(args.counts):
        raise CliError("give exactly one of --text or --counts")
    counts = read_counts(args.counts) if args.counts else count_ngrams(_corpus(args.text), args.order, args.unk)
    discount = "estimate" if args.discount is None else args.discount
    model = train_kneser_ney(counts, discount)
    _emit(serialize_arpa(model), args.out)


def cmd_lm_interpolate(args) -> None:
    from .lm import interpolate, read_arpa, serialize_arpa

    _emit(serialize_arpa(interpolate(read_arpa(args.lm_a), read_arpa(args.lm_b), args.weight)), args.out)


def cmd_lm_ppl(args) -> None:
    from .lm import perplexity, read_arpa

    ppl, oovs, words = perplexity(read_arpa(args.lm), _corpus(args.text), args.oov_policy)
    print(f"{ppl:.6f}")
    log.info("%d scored tokens, %d OOV", words, oovs)


def cmd_lm_tune(args) -> None:
    from .lm import read_arpa, tune_weight

    weight, ppl = tune_weight(read_arpa(args.lm_a), read_arpa(args.lm_b), _corpus(args.dev), args.grid_step)
    print(json.dumps({"weight": round(weight, 10), "perplexity": round(ppl, 6)}))


def cmd_lm_prune(args) -> None:
    from .lm import prune_entropy, read_arpa, serialize_arpa

    _emit(serialize_arpa(prune_entropy(read_arpa(args.lm), args.theta)), args.out)


# -- acoustic models -------------------------------------------------------------------


def _load_am(model_dir: str):
    from .am import GmmScorer, HmmGraph, TrainResult

    root = Path(model_dir)
    return TrainResult(GmmScorer.load(root / "am.npz"), HmmGraph.load(root / "graph.json"))


def cmd_am_train(args) -> None:
    from .am import read_lexicon, train_gmm_hmm
    from .eval import read_transcripts
    from .features import read_archive

    cfg = experiment_config(args)
    feats = dict(read_archive(args.features))
    trans = read_transcripts(args.trans)
    missing = sorted(set(feats) - set(trans))
    if missing:
        raise CliError(f"no transcript for {len(missing)} utterances, e.g. {missing[0]}")
    result = train_gmm_hmm([(fm, trans[u]) for u, fm in feats.items()], read_lexicon(args.lexicon), cfg.train)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    result.scorer.save(out / "am.npz")
    result.graph.save(out / "graph.json")
    print(json.dumps({"utterances": len(feats), "final_log_likelihood": result.history[-1].log_likelihood}))


def _write_decodes(out: Path, results) -> None:
    out.mkdir(parents=True, exist_ok=True)
    (out / "hyp.txt").write_text("".join(f"{r.utt_id} {' '.join(r.hyp)}\n" for r in results))
    (out / "hyp.ctm").write_text("".join(line + "\n" for r in results for line in r.ctm))


def cmd_am_decode(args) -> None:
    from .am import nbest_to_dict
    from .eval import read_transcripts
    from .experiment import decode_utterance
    from .features import read_archive
    from .lm import read_arpa

    cfg = experiment_config(args)
    am = _load_am(args.model)
    full = read_arpa(args.lm)
    first = full.truncate(min(2, full.order))
    refs = read_transcripts(args.ref) if args.ref else {}
    results = [decode_utterance(u, refs.get(u, []), fm, am, first, full, cfg.decode)
               for u, fm in read_archive(args.features)]
    out = Path(args.out)
    _write_decodes(out, results)
    with open(out / "nbest.jsonl", "w") as fh:
        for r in results:
            if r.first_pass is not None:
                fh.write(json.dumps({"utt_id": r.utt_id, **nbest_to_dict(r.first_pass)}) + "\n")
    print(json.dumps({"utterances": len(results), "failed": sum(r.failed for r in results)}))


def cmd_am_rescore(args) -> None:
    from .am import nbest_from_dict
    from .experiment import finish_decode
    from .lm import read_arpa

    lm = read_arpa(args.lm)
    results = []
    with open(args.nbest) as fh:
        for line in fh:
            if not line.strip():
                continue
            raw = json.loads(line)
            nb = nbest_from_dict(raw)
            if args.lm_scale is not None:
                nb = replace(nb, lm_scale=args.lm_scale)
            results.append(finish_decode(raw["utt_id"], [], nb, lm, args.frame_shift_ms))
    _write_decodes(Path(args.out), results)


# -- scoring ---------------------------------------------------------------------------


def _read_text_or_keyed(path):
    """A one-line file is a bare transcript; otherwise ``utt-id words`` per line."""
    from .eval import normalize_text, read_transcripts

    lines = [l for l in Path(path).read_text(encoding="utf-8").splitlines() if l.strip()]
    if len(lines) <= 1:
        return None, normalize_text(lines[0] if lines else "")
    return read_transcripts(path), None


def _paired(ref_path, hyp_path):
    from .eval import read_transcripts

    refs, hyps = read_transcripts(ref_path), read_transcripts(hyp_path)
    extra = sorted(set(hyps) - set(refs))
    if extra:
        raise CliError(f"hypotheses for unknown utterances, e.g. {extra[0]}")
    # a missing hypothesis scores as empty
    return {u: (refs[u], hyps.get(u, [])) for u in refs}


def _eval_report(pairs):
    from .eval import EvalReport, align_transcripts

    rep = EvalReport()
    for u, (r, h) in pairs.items():
        rep.add(u, align_transcripts(r, h))
    return rep


def cmd_score_align(args) -> None:
    from .eval import align_transcripts, format_alignment

    ref_keyed, ref_text = _read_text_or_keyed(args.ref)
    hyp_keyed, hyp_text = _read_text_or_keyed(args.hyp)
    if (ref_keyed is None) != (hyp_keyed is None):
        raise CliError("--ref and --hyp must both be single transcripts or both keyed files")
    items = [("", ref_text, hyp_text)] if ref_keyed is None else [
        (u, ref_keyed[u], hyp_keyed.get(u, [])) for u in ref_keyed]
    blocks = []
    for u, r, h in items:
        res = align_transcripts(r, h)
        c, s, i, d = res.csid
        head = f"{u} " if u else ""
        block = f"{head}csid {c} {s} {i} {d}\npattern {res.pattern}\n"
        if args.show:
            block += format_alignment(res) + "\n"
        blocks.append(block)
    _emit("".join(blocks), args.out)


def cmd_score_wer(args) -> None:
    from .eval import wer

    rep = _eval_report(_paired(args.ref, args.hyp))
    print(json.dumps({"correct": rep.correct, "substitutions": rep.substitutions, "insertions": rep.insertions,
                      "deletions": rep.deletions, "ref_words": rep.ref_words, "wer": round(wer(rep), 6)}))


def _named_paths(items) -> dict[str, str]:
    out = {}
    for item in items:
        name, sep, path = item.partition("=")
        if not sep:
            name, path = Path(item).stem, item
        if name in out:
            raise CliError(f"duplicate set name {name!r}")
        out[name] = path
    return out


def cmd_score_errors(args) -> None:
    from .eval import aggregate_errors, format_error_table

    refs = _named_paths(args.ref)
    hyps = _named_paths(args.hyp)
    if list(refs) != list(hyps):
        raise CliError("--ref and --hyp must name the same sets in the same order")
    rows = aggregate_errors({n: _eval_report(_paired(refs[n], hyps[n])) for n in refs})
    if args.csv:
        buf = [["set", "ins", "del", "sub", "ref_words", "ins_pct", "del_pct", "sub_pct"]]
        buf += [[r.name, r.insertions, r.deletions, r.substitutions, r.ref_words, *r.percentages] for r in rows]
        _emit("".join(",".join(map(str, row)) + "\n" for row in buf), args.out)
    else:
        _emit(format_error_table(rows) + "\n", args.out)


def _song_of(utt_id: str, sep: str) -> str:
    return utt_id.rsplit(sep, 1)[0] if sep in utt_id else utt_id


def cmd_score_genre(args) -> None:
    from .eval import EvalReport, genre_report, read_genre_map

    songs: dict[str, EvalReport] = {}
    rep = _eval_report(_paired(args.ref, args.hyp))
    for u, res in rep.utterances.items():
        songs.setdefault(_song_of(u, args.song_sep), EvalReport()).add(u, res)
    table = genre_report(songs, read_genre_map(args.genres))
    lines = ["genre,songs,wer"] + [
        f"{g},{table.song_totals[g]},{table.wer[g]:.2f}" for g in table.genres if table.song_totals[g]]
    _emit("\n".join(lines) + "\n", args.out)


def _read_ctm(path) -> dict[str, list[tuple[str, float]]]:
    out: dict[str, list[tuple[str, float]]] = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        f = line.split()
        if not f:
            continue
        if len(f) != 6:
            raise CliError(f"{path}:{lineno}: expected 6 CTM fields")
        out.setdefault(f[0], []).append((f[4], float(f[5])))
    return out


def cmd_score_confidence(args) -> None:
    from .eval import align_transcripts, bins_csv, confidence_bins, merge_bins, read_transcripts
    from .plots import confidence_histogram

    refs = read_transcripts(args.ref)
    ctm = _read_ctm(args.ctm)
    unknown = sorted(set(ctm) - set(refs))
    if unknown:
        raise CliError(f"CTM has unknown utterances, e.g. {unknown[0]}")
    tables = [confidence_bins(words, align_transcripts(refs[u], [w for w, _ in words]), args.bins)
              for u, words in ctm.items()]
    if not tables:
        raise CliError("CTM is empty")
    bins = merge_bins(tables)
    _emit(bins_csv(bins), args.out)
    if args.svg:
        confidence_histogram({Path(args.ctm).stem: bins}, args.svg)


# -- segmentation, data, experiments ---------------------------------------------------------


def cmd_segment(args) -> None:
    from .eval import LineAnnotation, segment_lines

    with open(args.lines, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    if rows and not {"start_sec", "end_sec", "text"} <= set(rows[0]):
        raise CliError("lines CSV needs start_sec, end_sec and text columns")
    groups: dict[str, list] = {}
    for r in rows:
        groups.setdefault(r.get("song_id", ""), []).append(
            LineAnnotation(r["text"], float(r["start_sec"]), float(r["end_sec"])))
    buf = ["song_id,index,start_sec,end_sec,span_sec,lines,flag,text"]
    for song, lines in groups.items():
        for k, seg in enumerate(segment_lines(lines, args.min_sec, args.max_sec)):
            flag = "oversize" if seg.oversize else "undersize" if seg.undersize else ""
            buf.append(f"{song},{k},{seg.start_sec:.3f},{seg.end_sec:.3f},{seg.span:.3f},{len(seg.lines)},"
                       f"{flag},{seg.text}")
    _emit("\n".join(buf) + "\n", args.out)


def cmd_synth(args) -> None:
    from .synth import synth_corpus

    cfg = experiment_config(args)
    ds = synth_corpus(replace(cfg.synth, seed=cfg.seed), args.out)
    print(json.dumps({split: len(utts) for split, utts in ds.utterances.items()}))


def cmd_experiment_run(args) -> None:
    from .experiment import format_report, run_experiment

    cfg = experiment_config(args)
    if args.data:
        cfg = replace(cfg, data_dir=args.data)
    out = args.out or f"runs/seed{cfg.seed}"
    report = run_experiment(cfg, out)
    sys.stdout.write(format_report(report))


# -- parser ----------------------------------------------------------------------------------


def _config_args(p) -> None:
    p.add_argument("--config", help="experiment TOML file (defaults apply when omitted)")
    p.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="override one config entry, e.g. decode.beam=40 (repeatable)")


def build_parser() -> argparse.ArgumentParser:
    raw = argparse.RawDescriptionHelpFormatter
    parser = argparse.ArgumentParser(prog="lyricsasr", description=__doc__, formatter_class=raw)
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    groups = parser.add_subparsers(dest="group", metavar="COMMAND", required=True)

    # features
    feat = groups.add_parser("features", help="MFCC extraction and stream stacking").add_subparsers(
        dest="cmd", required=True)
    p = feat.add_parser("extract", help="features for a dataset split (all configured streams) or one WAV")
    _config_args(p)
    p.add_argument("--seed", type=int, help="experiment seed (drives the separation distortion)")
    p.add_argument("--data", help="dataset directory")
    p.add_argument("--split", default="test", choices=("train", "dev", "test"))
    p.add_argument("--wav", help="single WAV file (poly stream) instead of a dataset")
    p.add_argument("--preset", default="align", choices=("align", "hires"), help="with --wav (default: align)")
    p.add_argument("--cmvn", action="store_true", help="with --wav: subtract the utterance mean")
    p.add_argument("--utt-id", help="with --wav: archive key (default: file stem)")
    p.add_argument("--out", help="output directory (dataset mode) or archive (WAV mode)")
    p.set_defaults(func=cmd_features_extract)
    p = feat.add_parser("stack", help="concatenate poly and vocal archives into the robust stream")
    p.add_argument("--poly", required=True)
    p.add_argument("--vocal", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_features_stack)

    p = groups.add_parser("separate", help="oracle-mask vocal separation with controlled distortion")
    _config_args(p)
    p.add_argument("--mixture", required=True)
    p.add_argument("--vocal-stem", required=True)
    p.add_argument("--music-stem", required=True)
    p.add_argument("--erosion", type=float, help="mask erosion probability (default: config)")
    p.add_argument("--blur", type=int, help="mask blur radius in cells (default: config)")
    p.add_argument("--residual", type=float, help="music power leaked back, 0..1 (default: config)")
    p.add_argument("--distortion-seed", type=int)
    p.add_argument("--out", required=True, help="separated vocal WAV")
    p.set_defaults(func=cmd_separate)

    # language models
    lm = groups.add_parser("lm", help="n-gram language models").add_subparsers(dest="cmd", required=True)
    p = lm.add_parser("count", help="n-gram counts of a text corpus")
    p.add_argument("--text", required=True)
    p.add_argument("--order", type=int, default=3)
    p.add_argument("--unk", action="store_true", help="add <unk> with count 1")
    p.add_argument("--out")
    p.set_defaults(func=cmd_lm_count)
    p = lm.add_parser("train", help="interpolated Kneser-Ney model, written as ARPA")
    p.add_argument("--text")
    p.add_argument("--counts")
    p.add_argument("--order", type=int, default=3)
    p.add_argument("--unk", action="store_true")
    p.add_argument("--discount", type=float, help="fixed discount (default: estimated per order)")
    p.add_argument("--out")
    p.set_defaults(func=cmd_lm_train)
    p = lm.add_parser("interpolate", help="static mixture weight*A + (1-weight)*B")
    p.add_argument("--lm-a", required=True)
    p.add_argument("--lm-b", required=True)
    p.add_argument("--weight", type=float, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_lm_interpolate)
    p = lm.add_parser("ppl", help="perplexity of a text (one sentence per line)")
    p.add_argument("--lm", required=True)
    p.add_argument("--text", required=True)
    p.add_argument("--oov-policy", default="require_unk", choices=("require_unk", "skip_oov"))
    p.set_defaults(func=cmd_lm_ppl)
    p = lm.add_parser("tune", help="grid-search the weight on A minimizing dev perplexity")
    p.add_argument("--lm-a", required=True)
    p.add_argument("--lm-b", required=True)
    p.add_argument("--dev", required=True)
    p.add_argument("--grid-step", type=float, default=0.01)
    p.set_defaults(func=cmd_lm_tune)
    p = lm.add_parser("prune", help="relative-entropy pruning")
    p.add_argument("--lm", required=True)
    p.add_argument("--theta", type=float, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_lm_prune)

    # acoustic models
    am = groups.add_parser("am", help="GMM-HMM training and decoding").add_subparsers(dest="cmd", required=True)
    p = am.add_parser("train", help="train from a feature archive and transcripts ([train] config)")
    _config_args(p)
    p.add_argument("--features", required=True)
    p.add_argument("--trans", required=True, help="utt-id WORD ... per line")
    p.add_argument("--lexicon", required=True)
    p.add_argument("--out", required=True, help="model directory (am.npz, graph.json)")
    p.set_defaults(func=cmd_am_train)
    p = am.add_parser("decode", help="bigram first pass + full-order rescoring ([decode] config)")
    _config_args(p)
    p.add_argument("--model", required=True, help="model directory from 'am train'")
    p.add_argument("--features", required=True)
    p.add_argument("--lm", required=True, help="ARPA model")
    p.add_argument("--ref", help="transcripts, only echoed into results")
    p.add_argument("--out", required=True, help="directory for hyp.txt, hyp.ctm, nbest.jsonl")
    p.set_defaults(func=cmd_am_decode)
    p = am.add_parser("rescore", help="rescore saved N-best lists with another LM")
    p.add_argument("--nbest", required=True, help="nbest.jsonl from 'am decode'")
    p.add_argument("--lm", required=True)
    p.add_argument("--lm-scale", type=float)
    p.add_argument("--frame-shift-ms", type=float, default=10.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_am_rescore)

    # scoring
    score = groups.add_parser("score", help="alignment, WER and report tables").add_subparsers(
        dest="cmd", required=True)
    p = score.add_parser("align", help="C/S/I/D alignment of one transcript pair or keyed files")
    p.add_argument("--ref", required=True)
    p.add_argument("--hyp", required=True)
    p.add_argument("--show", action="store_true", help="also print the aligned REF/HYP rows")
    p.add_argument("--out")
    p.set_defaults(func=cmd_score_align)
    p = score.add_parser("wer", help="pooled WER of keyed transcript files")
    p.add_argument("--ref", required=True)
    p.add_argument("--hyp", required=True)
    p.set_defaults(func=cmd_score_wer)
    p = score.add_parser("errors", help="insertion/deletion/substitution table with an All row")
    p.add_argument("--ref", action="append", required=True, metavar="NAME=PATH")
    p.add_argument("--hyp", action="append", required=True, metavar="NAME=PATH")
    p.add_argument("--csv", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_score_errors)
    p = score.add_parser("genre", help="WER pooled by genre")
    p.add_argument("--ref", required=True)
    p.add_argument("--hyp", required=True)
    p.add_argument("--genres", required=True, help="song_id,genre CSV")
    p.add_argument("--song-sep", default="_", help="utt-id = <song><sep><suffix> (default: _)")
    p.add_argument("--out")
    p.set_defaults(func=cmd_score_genre)
    p = score.add_parser("confidence", help="correct/incorrect histogram of CTM confidences")
    p.add_argument("--ref", required=True)
    p.add_argument("--ctm", required=True)
    p.add_argument("--bins", type=int, default=10)
    p.add_argument("--svg", help="also draw the histogram")
    p.add_argument("--out")
    p.set_defaults(func=cmd_score_confidence)

    p = groups.add_parser("segment", help="group timed lyric lines into 20-30 s segments")
    p.add_argument("--lines", required=True, help="CSV with start_sec,end_sec,text (song_id optional)")
    p.add_argument("--min-sec", type=float, default=20.0)
    p.add_argument("--max-sec", type=float, default=30.0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_segment)

    p = groups.add_parser("synth", help="generate a synthetic corpus ([synth] config)",
                          epilog=_defaults_epilog(), formatter_class=raw)
    _config_args(p)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    exp = groups.add_parser("experiment", help="end-to-end stream comparison").add_subparsers(
        dest="cmd", required=True)
    p = exp.add_parser("run", help="synthesize (or reuse) data, train, decode and write a report",
                       epilog=_defaults_epilog(), formatter_class=raw)
    _config_args(p)
    p.add_argument("--seed", type=int)
    p.add_argument("--data", help="reuse this dataset instead of synthesizing one")
    p.add_argument("--out", help="report directory (default: runs/seed<N>)")
    p.set_defaults(func=cmd_experiment_run)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # usage errors exit 2 with usage text
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except (CliError, ValueError, KeyError, OSError) as exc:
        print(f"lyricsasr: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
