"""Synthetic sung-lyrics corpus: sinusoid-template vocals over genre-styled music.

Every artifact is a pure function of the config (seed included). Layout::

    wav/<utt>.wav                 mixture (float32), exactly vocal + music
    stems/<utt>.vocal.wav         vocal stem
    stems/<utt>.music.wav         accompaniment stem
    trans/{train,dev,test}.txt    "utt-id WORD WORD ..."
    lex/lexicon.txt               pronunciation lexicon
    text/lyrics.txt               training transcripts plus text-only lyrics (lyrics LM corpus)
    text/general.txt              out-of-domain LM corpus
    meta/genres.csv, meta/splits.csv, meta/lines.csv, meta/synth.json
"""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from .audio import AudioBuffer, read_wav, write_wav
from .am.lexicon import SILENCE, Lexicon, read_lexicon
from .eval.reports import read_transcripts

SPLITS = ("train", "dev", "test")
PHONE_SET = ("AA", "AE", "AH", "EH", "IY", "OW", "UW", "ER", "B", "D",
             "G", "K", "L", "M", "N", "P", "R", "S", "T", "V", "Z", "F", "SH", "W")


@dataclass(frozen=True)
class MusicProfile:
    """Accompaniment style and vocal delivery for one pseudo-genre.

    The texture weights are power shares of a distorted harmonic drone,
    sustained chords, pink broadband noise, percussion and a melodic lead
    line whose tones fall in the same bands as the vocal phones.
    """

    snr_db: float
    drone: float = 0.0
    chords: float = 0.0
    noise: float = 0.0
    beat: float = 0.0
    lead: float = 0.0
    phone_ms: tuple[float, float] = (70.0, 140.0)
    gap_prob: float = 0.3  # chance of a short pause after each word

    def __post_init__(self):
        if not np.isfinite(self.snr_db):
            raise ValueError("snr_db must be finite")
        weights = (self.drone, self.chords, self.noise, self.beat, self.lead)
        if min(weights) < 0 or sum(weights) <= 0:
            raise ValueError("texture weights must be non-negative and not all zero")
        lo, hi = self.phone_ms
        if not 0 < lo <= hi:
            raise ValueError(f"bad phone duration range {self.phone_ms}")


DEFAULT_PROFILES = {
    # loud, dense, broadband accompaniment
    "metal": MusicProfile(-5.0, drone=0.4, noise=0.3, lead=0.3, phone_ms=(70.0, 140.0), gap_prob=0.3),
    "pop": MusicProfile(5.0, chords=0.5, noise=0.1, beat=0.2, lead=0.2, phone_ms=(70.0, 140.0), gap_prob=0.3),
    # quiet beat under fast, dense rap delivery
    "hiphop": MusicProfile(10.0, chords=0.2, noise=0.1, beat=0.6, lead=0.1, phone_ms=(45.0, 90.0), gap_prob=0.05),
}


def _default_songs():
    return {
        "train": {"metal": 8, "pop": 8, "hiphop": 8},
        "dev": {"metal": 2, "pop": 2, "hiphop": 2},
        "test": {"metal": 4, "pop": 4, "hiphop": 4},
    }


@dataclass(frozen=True)
class SynthConfig:
    seed: int = 0
    vocab_size: int = 50
    num_phones: int = 20
    word_phones: tuple[int, int] = (2, 4)
    line_words: tuple[int, int] = (3, 6)
    lines_per_song: int = 5
    songs: dict = field(default_factory=_default_songs)
    profiles: dict = field(default_factory=lambda: dict(DEFAULT_PROFILES))
    lyrics_concentration: float = 0.5  # Dirichlet alpha of the lyrics bigram chain
    general_concentration: float = 1.0
    general_lines: int = 2000
    lyrics_text_lines: int = 400  # text-only lyrics added to the lyrics LM corpus
    general_in_domain: float = 0.2  # share of general-corpus lines drawn from the lyrics chain
    freq_jitter: float = 0.4  # range of the per-note pitch shift (fraction)
    amp_jitter: float = 0.2
    sample_rate: int = 16000

    def __post_init__(self):
        if self.vocab_size < 2 or self.num_phones < 2:
            raise ValueError("need at least two words and two phones")
        if self.num_phones > len(PHONE_SET):
            raise ValueError(f"at most {len(PHONE_SET)} phones are available")
        if not 1 <= self.word_phones[0] <= self.word_phones[1]:
            raise ValueError("bad word_phones range")
        if not 1 <= self.line_words[0] <= self.line_words[1]:
            raise ValueError("bad line_words range")
        if set(self.songs) - set(SPLITS):
            raise ValueError(f"unknown split in {sorted(self.songs)}")
        for split, counts in self.songs.items():
            for genre in counts:
                if genre not in self.profiles:
                    raise ValueError(f"split {split} uses genre {genre!r} with no music profile")
        if not 0.0 <= self.general_in_domain <= 1.0:
            raise ValueError("general_in_domain must lie in [0, 1]")
        if self.general_lines < 0 or self.lyrics_text_lines < 0:
            raise ValueError("line counts must be >= 0")

    @classmethod
    def from_dict(cls, raw: dict) -> "SynthConfig":
        raw = dict(raw)
        if "profiles" in raw:
            profiles = dict(DEFAULT_PROFILES)
            for name, p in raw["profiles"].items():
                base = asdict(profiles[name]) if name in profiles else {}
                base.update(p)
                if "phone_ms" in base:
                    base["phone_ms"] = tuple(base["phone_ms"])
                profiles[name] = MusicProfile(**base)
            raw["profiles"] = profiles
        for key in ("word_phones", "line_words"):
            if key in raw:
                raw[key] = tuple(raw[key])
        return cls(**raw)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["profiles"] = {k: asdict(v) for k, v in self.profiles.items()}
        return out


@dataclass(frozen=True)
class PhoneTemplate:
    freqs: tuple[float, ...]
    amps: tuple[float, ...]
    attack: float  # fraction of the phone spent rising
    release: float


# -- lexicon and text ---------------------------------------------------------


def _phone_templates(cfg: SynthConfig, rng) -> dict[str, PhoneTemplate]:
    """One template per phone; each owns its own log-frequency band for the
    dominant partial so phones stay separable."""
    phones = PHONE_SET[: cfg.num_phones]
    edges = np.geomspace(180.0, 3800.0, cfg.num_phones + 1)
    bands = rng.permutation(cfg.num_phones)
    out = {}
    for ph, b in zip(phones, bands):
        f0 = float(np.exp(rng.uniform(np.log(edges[b]), np.log(edges[b + 1]))))
        extra = np.exp(rng.uniform(np.log(180.0), np.log(6000.0), size=rng.integers(1, 3)))
        freqs = (f0, *map(float, extra))
        amps = (1.0, *map(float, rng.uniform(0.2, 0.6, size=len(extra))))
        out[ph] = PhoneTemplate(freqs, amps, float(rng.uniform(0.05, 0.4)), float(rng.uniform(0.05, 0.4)))
    return out


def _lexicon(cfg: SynthConfig, rng) -> Lexicon:
    phones = PHONE_SET[: cfg.num_phones]
    entries: dict[str, list[tuple[str, ...]]] = {}
    seen = set()
    while len(entries) < cfg.vocab_size:
        n = int(rng.integers(cfg.word_phones[0], cfg.word_phones[1] + 1))
        pron = tuple(str(p) for p in rng.choice(phones, size=n))
        if pron in seen or any(a == b for a, b in zip(pron, pron[1:])):
            continue
        name = "".join(pron)
        if name in entries:
            continue
        seen.add(pron)
        entries[name] = [pron]
    return Lexicon(dict(sorted(entries.items())), SILENCE)


class BigramChain:
    """Word-level Markov chain used to draw lyric lines."""

    def __init__(self, words: list[str], concentration: float, rng):
        self.words = words
        v = len(words)
        self.start = rng.dirichlet(np.full(v, concentration))
        self.trans = rng.dirichlet(np.full(v, concentration), size=v)

    def line(self, rng, length: int) -> list[str]:
        i = rng.choice(len(self.words), p=self.start)
        out = [i]
        for _ in range(length - 1):
            i = rng.choice(len(self.words), p=self.trans[i])
            out.append(i)
        return [self.words[k] for k in out]


def _general_corpus(cfg: SynthConfig, words: list[str], lyrics: BigramChain, rng) -> list[list[str]]:
    generic = BigramChain(words, cfg.general_concentration, rng)
    lines = []
    for _ in range(cfg.general_lines):
        chain = lyrics if rng.random() < cfg.general_in_domain else generic
        lines.append(chain.line(rng, int(rng.integers(2, 11))))
    covered = {w for line in lines for w in line}
    for w in words:
        if w not in covered:
            lines.append([w])
    return lines


# -- audio --------------------------------------------------------------------


def _envelope(n: int, attack: float, release: float) -> np.ndarray:
    env = np.ones(n)
    a, r = max(1, int(attack * n)), max(1, int(release * n))
    env[:a] = 0.5 - 0.5 * np.cos(np.pi * np.arange(a) / a)
    env[n - r:] = np.minimum(env[n - r:], 0.5 + 0.5 * np.cos(np.pi * np.arange(1, r + 1) / r))
    return env


def _sing(words: list[str], lexicon: Lexicon, templates: dict[str, PhoneTemplate], profile: MusicProfile,
          cfg: SynthConfig, rng) -> np.ndarray:
    """One sung line: leading silence, phone tones with optional pauses, trailing silence."""
    sr = cfg.sample_rate
    pieces = [np.zeros(int(sr * rng.uniform(0.15, 0.35)))]
    lo, hi = profile.phone_ms
    for w in words:
        for ph in lexicon.pronunciations(w)[0]:
            n = int(sr * rng.uniform(lo, hi) / 1000.0)
            tpl = templates[ph]
            t = np.arange(n) / sr
            sig = np.zeros(n)
            # the sung note shifts every partial together; partials also detune slightly
            note = np.exp(rng.uniform(-np.log1p(cfg.freq_jitter), np.log1p(cfg.freq_jitter)))
            for f, a in zip(tpl.freqs, tpl.amps):
                f = f * note * (1.0 + rng.uniform(-0.01, 0.01))
                a = a * (1.0 + rng.uniform(-cfg.amp_jitter, cfg.amp_jitter))
                sig += a * np.sin(2 * np.pi * f * t + rng.uniform(0, 2 * np.pi))
            pieces.append(0.1 * sig * _envelope(n, tpl.attack, tpl.release))
        if rng.random() < profile.gap_prob:
            pieces.append(np.zeros(int(sr * rng.uniform(0.05, 0.2))))
    pieces.append(np.zeros(int(sr * rng.uniform(0.15, 0.35))))
    return np.concatenate(pieces)


def _unit_power(x: np.ndarray) -> np.ndarray:
    p = float(np.mean(x * x))
    return x / np.sqrt(p) if p > 0 else x


def _harmonic(f0: np.ndarray, sr: int, harmonics: int, rolloff: float, rng) -> np.ndarray:
    phase = 2 * np.pi * np.cumsum(f0) / sr
    out = np.zeros_like(f0)
    for k in range(1, harmonics + 1):
        if k * f0.max() >= sr / 2:
            break
        out += np.sin(k * phase + rng.uniform(0, 2 * np.pi)) / k ** rolloff
    return out


def _piecewise(n: int, sr: int, choices, hold_sec: tuple[float, float], rng) -> np.ndarray:
    out = np.empty(n)
    pos = 0
    while pos < n:
        hold = int(sr * rng.uniform(*hold_sec))
        out[pos:pos + hold] = rng.choice(choices)
        pos += hold
    return out


def _music(n: int, profile: MusicProfile, sr: int, rng) -> np.ndarray:
    """Accompaniment of ``n`` samples mixed from the profile's textures."""
    parts = []
    if profile.drone > 0:
        root = _piecewise(n, sr, [82.4, 98.0, 110.0, 123.5], (0.8, 1.5), rng)
        drone = sum(_harmonic(root * r, sr, 40, 1.0, rng) for r in (1.0, 1.5, 2.0))
        drone = np.tanh(3.0 * drone / np.abs(drone).max())
        parts.append((profile.drone, drone))
    if profile.chords > 0:
        root = _piecewise(n, sr, [196.0, 220.0, 261.6, 293.7, 329.6], (0.5, 1.0), rng)
        chords = sum(_harmonic(root * r, sr, 8, 1.5, rng) for r in (1.0, 1.26, 1.5))
        parts.append((profile.chords, chords))
    if profile.noise > 0:
        spec = np.fft.rfft(rng.standard_normal(n))
        spec[1:] /= np.sqrt(np.arange(1, spec.shape[0]))
        spec[0] = 0
        parts.append((profile.noise, np.fft.irfft(spec, n)))
    if profile.beat > 0:
        beat = np.zeros(n)
        step = int(0.25 * sr)
        kick = np.sin(2 * np.pi * 60 * np.arange(int(0.15 * sr)) / sr) * np.exp(-np.arange(int(0.15 * sr)) / (0.04 * sr))
        hat = rng.standard_normal(int(0.03 * sr)) * np.exp(-np.arange(int(0.03 * sr)) / (0.008 * sr))
        for i, start in enumerate(range(int(rng.integers(0, step)), n, step // 2)):
            burst = kick if i % 4 == 0 else hat * (0.5 if i % 2 else 1.0)
            end = min(n, start + len(burst))
            beat[start:end] += burst[: end - start]
        parts.append((profile.beat, beat))
    if profile.lead > 0:
        lead = np.zeros(n)
        pos = 0
        while pos < n:
            k = min(n - pos, int(sr * rng.uniform(0.08, 0.3)))
            f = np.exp(rng.uniform(np.log(180.0), np.log(4000.0)))
            t = np.arange(k) / sr
            lead[pos:pos + k] = np.sin(2 * np.pi * f * t) * _envelope(k, 0.1, 0.3)
            pos += k
        parts.append((profile.lead, lead))
    return sum(np.sqrt(w) * _unit_power(x) for w, x in parts)


def mix_at_snr(vocal: np.ndarray, music: np.ndarray, snr_db: float) -> tuple[np.ndarray, np.ndarray]:
    """Scale ``music`` so 10 log10(P_vocal / P_music) = ``snr_db``; returns
    float32-representable (music, mixture) with mixture = vocal + music."""
    p_v = float(np.mean(vocal ** 2))
    p_m = float(np.mean(music ** 2))
    if p_v <= 0 or p_m <= 0:
        raise ValueError("cannot set an SNR with a silent stem")
    music = (music * np.sqrt(p_v / (p_m * 10.0 ** (snr_db / 10.0)))).astype(np.float32).astype(np.float64)
    return music, vocal + music


# -- corpus -------------------------------------------------------------------


@dataclass
class Utterance:
    utt_id: str
    song_id: str
    genre: str
    split: str
    words: list[str]
    start_sec: float = 0.0
    end_sec: float = 0.0


def synth_corpus(cfg: SynthConfig, out_dir) -> "Dataset":
    """Generate the whole dataset under ``out_dir``."""
    out = Path(out_dir)
    try:
        for sub in ("wav", "stems", "trans", "lex", "text", "meta"):
            (out / sub).mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot write dataset to {out}: {exc}") from exc

    root = np.random.default_rng(cfg.seed)
    lex_rng, text_rng = (np.random.default_rng(s) for s in root.spawn(2))
    templates = _phone_templates(cfg, lex_rng)
    lexicon = _lexicon(cfg, lex_rng)
    words = lexicon.words
    lyrics = BigramChain(words, cfg.lyrics_concentration, text_rng)

    utts: list[Utterance] = []
    song_no = 0
    for split in SPLITS:
        for genre, count in cfg.songs.get(split, {}).items():
            for _ in range(count):
                song = f"s{song_no:03d}"
                song_no += 1
                for line in range(cfg.lines_per_song):
                    n = int(text_rng.integers(cfg.line_words[0], cfg.line_words[1] + 1))
                    utts.append(Utterance(f"{song}_{line:02d}", song, genre, split, lyrics.line(text_rng, n)))
    general = _general_corpus(cfg, words, lyrics, text_rng)
    extra_lyrics = [lyrics.line(text_rng, int(text_rng.integers(cfg.line_words[0], cfg.line_words[1] + 1)))
                    for _ in range(cfg.lyrics_text_lines)]

    clock: dict[str, float] = {}
    for utt in utts:
        rng = np.random.default_rng([cfg.seed, int(utt.song_id[1:]), int(utt.utt_id[-2:])])
        profile = cfg.profiles[utt.genre]
        vocal = _sing(utt.words, lexicon, templates, profile, cfg, rng)
        vocal = vocal.astype(np.float32).astype(np.float64)
        music, mixture = mix_at_snr(vocal, _music(len(vocal), profile, cfg.sample_rate, rng), profile.snr_db)
        write_wav(AudioBuffer(mixture, cfg.sample_rate), out / "wav" / f"{utt.utt_id}.wav", "float32")
        write_wav(AudioBuffer(vocal, cfg.sample_rate), out / "stems" / f"{utt.utt_id}.vocal.wav", "float32")
        write_wav(AudioBuffer(music, cfg.sample_rate), out / "stems" / f"{utt.utt_id}.music.wav", "float32")
        start = clock.get(utt.song_id, 0.0) + float(rng.uniform(0.5, 2.0))
        utt.start_sec = round(start, 3)
        utt.end_sec = round(start + len(vocal) / cfg.sample_rate, 3)
        clock[utt.song_id] = utt.end_sec

    (out / "lex" / "lexicon.txt").write_text(lexicon.to_text(), encoding="utf-8")
    for split in SPLITS:
        lines = [f"{u.utt_id} {' '.join(u.words)}\n" for u in utts if u.split == split]
        (out / "trans" / f"{split}.txt").write_text("".join(lines), encoding="utf-8")
    lyric_lines = [u.words for u in utts if u.split == "train"] + extra_lyrics
    (out / "text" / "lyrics.txt").write_text("".join(" ".join(l) + "\n" for l in lyric_lines), encoding="utf-8")
    (out / "text" / "general.txt").write_text("".join(" ".join(l) + "\n" for l in general), encoding="utf-8")
    songs = {}
    for u in utts:
        songs.setdefault(u.song_id, (u.genre, u.split))
    with open(out / "meta" / "genres.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["song_id", "genre"])
        w.writerows((s, g) for s, (g, _) in songs.items())
    with open(out / "meta" / "splits.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["song_id", "split"])
        w.writerows((s, sp) for s, (_, sp) in songs.items())
    with open(out / "meta" / "lines.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["utt_id", "song_id", "start_sec", "end_sec", "text"])
        w.writerows((u.utt_id, u.song_id, f"{u.start_sec:.3f}", f"{u.end_sec:.3f}", " ".join(u.words))
                    for u in utts)
    (out / "meta" / "synth.json").write_text(json.dumps(cfg.to_dict(), indent=1, sort_keys=True) + "\n")
    return Dataset(out)


class Dataset:
    """Read-side view of a corpus directory."""

    def __init__(self, root):
        self.root = Path(root)
        if not (self.root / "meta" / "splits.csv").exists():
            raise FileNotFoundError(f"{self.root} does not look like a dataset (meta/splits.csv missing)")
        with open(self.root / "meta" / "genres.csv", newline="") as fh:
            self.genres = {r["song_id"]: r["genre"] for r in csv.DictReader(fh)}
        with open(self.root / "meta" / "splits.csv", newline="") as fh:
            self.song_split = {r["song_id"]: r["split"] for r in csv.DictReader(fh)}
        with open(self.root / "meta" / "lines.csv", newline="") as fh:
            self.lines = list(csv.DictReader(fh))
        self.lexicon = read_lexicon(self.root / "lex" / "lexicon.txt")
        self.utterances: dict[str, list[Utterance]] = {s: [] for s in SPLITS}
        for split in SPLITS:
            path = self.root / "trans" / f"{split}.txt"
            if not path.exists():
                continue
            for utt_id, words in read_transcripts(path).items():
                song = utt_id.rsplit("_", 1)[0]
                self.utterances[split].append(Utterance(utt_id, song, self.genres[song], split, words))

    def mixture(self, utt_id: str) -> AudioBuffer:
        return read_wav(self.root / "wav" / f"{utt_id}.wav")

    def stems(self, utt_id: str) -> tuple[AudioBuffer, AudioBuffer]:
        return (read_wav(self.root / "stems" / f"{utt_id}.vocal.wav"),
                read_wav(self.root / "stems" / f"{utt_id}.music.wav"))

    def text(self, name: str) -> list[list[str]]:
        path = self.root / "text" / f"{name}.txt"
        return [line.split() for line in path.read_text(encoding="utf-8").splitlines() if line.strip()]

    def transcripts(self, split: str) -> list[list[str]]:
        return [u.words for u in self.utterances[split]]


def with_seed(cfg: SynthConfig, seed: int) -> SynthConfig:
    return replace(cfg, seed=seed)
