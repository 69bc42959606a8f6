"""End-to-end pipeline: signal ingestion, segmentation, event-file I/O,
and the synthetic benchmark.

Input formats: wav16 (mono or stereo 16-bit PCM, scaled to [-1, 1]),
csv (plain numbers, comma/whitespace/newline separated, passed through
unscaled), raw-f32 (little-endian float32, unscaled).

Event files are CSV with the exact header
``t_samples,channel,kernel,level,intensity_center`` (LF line endings,
intensities with 6 significant digits) or JSONL with the same fields. The
optional raw-intensity column appends the signed code intensity, which the
decoder needs for exact inversion; without it, decoding falls back to the
channel center magnitudes.
"""

from __future__ import annotations

import json
import time
import wave
from dataclasses import dataclass, field, replace

import numpy as np

from .dictionary import (
    Dictionary,
    DictionaryConfig,
    SpectralDictionary,
    build_dictionary,
    default_fft_len,
    kernel_spectra,
)
from .encoder import Code, CodeSet, EncoderConfig, Segment, encode_segment, shift_kernel
from .errors import CorruptFile, InvalidConfig, IoError, UnsupportedFormat
from .spikecoder import SpikeEvent

EVENT_HEADER = "t_samples,channel,kernel,level,intensity_center"


@dataclass
class RunConfig:
    input_path: str = ""
    input_format: str | None = None  # wav16 | csv | raw-f32; None = by extension
    sample_rate: float | None = None  # overrides/provides the rate
    encoder: EncoderConfig = field(default_factory=EncoderConfig)
    dictionary: DictionaryConfig = field(default_factory=DictionaryConfig)
    output_path: str = ""
    output_format: str = "csv"  # csv | jsonl
    seed: int = 0
    with_raw_intensity: bool = False
    itp_metric: str = "log"  # log | linear
    quantized: bool = False
    centers: tuple[float, ...] | None = None  # None = default channel table


def detect_format(path: str) -> str:
    lower = path.lower()
    if lower.endswith(".wav"):
        return "wav16"
    if lower.endswith(".csv"):
        return "csv"
    if lower.endswith(".f32") or lower.endswith(".raw"):
        return "raw-f32"
    raise UnsupportedFormat(f"cannot infer input format from {path!r}")


def read_input(cfg: RunConfig) -> tuple[np.ndarray, float | None]:
    """Load the configured input; returns (samples, sample_rate_or_None)."""
    fmt = cfg.input_format or detect_format(cfg.input_path)
    try:
        if fmt == "wav16":
            return _read_wav16(cfg.input_path)
        if fmt == "csv":
            with open(cfg.input_path) as fh:
                text = fh.read()
            values = [tok for tok in text.replace(",", " ").split() if tok]
            try:
                return np.array([float(v) for v in values]), cfg.sample_rate
            except ValueError as exc:
                raise CorruptFile(f"non-numeric csv value: {exc}")
        if fmt == "raw-f32":
            data = np.fromfile(cfg.input_path, dtype="<f4").astype(np.float64)
            return data, cfg.sample_rate
    except OSError as exc:
        raise IoError(f"cannot read {cfg.input_path!r}: {exc}")
    raise UnsupportedFormat(f"unknown input format {fmt!r}")


def _read_wav16(path: str) -> tuple[np.ndarray, float]:
    try:
        with wave.open(path, "rb") as wf:
            if wf.getsampwidth() != 2:
                raise UnsupportedFormat(
                    f"wav16 requires 16-bit PCM, got {8 * wf.getsampwidth()}-bit"
                )
            rate = wf.getframerate()
            channels = wf.getnchannels()
            frames = wf.readframes(wf.getnframes())
    except (wave.Error, EOFError) as exc:
        raise CorruptFile(f"bad wav file {path!r}: {exc}")
    data = np.frombuffer(frames, dtype="<i2").astype(np.float64)
    if channels > 1:
        data = data.reshape(-1, channels).mean(axis=1)
    return data / 32768.0, float(rate)


def write_waveform(samples: np.ndarray, path: str, sample_rate: float = 16000.0):
    """Write samples in the format implied by the path extension."""
    fmt = detect_format(path)
    if fmt == "raw-f32":
        np.asarray(samples, dtype="<f4").tofile(path)
    elif fmt == "csv":
        with open(path, "w", newline="\n") as fh:
            fh.write("\n".join(repr(float(v)) for v in samples) + "\n")
    else:
        pcm = np.clip(np.round(np.asarray(samples) * 32768.0), -32768, 32767)
        with wave.open(path, "wb") as wf:
            wf.setnchannels(1)
            wf.setsampwidth(2)
            wf.setframerate(int(sample_rate))
            wf.writeframes(pcm.astype("<i2").tobytes())


def segment_stream(samples: np.ndarray, width: int) -> list[Segment]:
    """Split into ceil(len/width) consecutive segments, zero-padding the tail."""
    if width < 1:
        raise InvalidConfig("segment width must be >= 1")
    samples = np.asarray(samples, dtype=np.float64)
    segments = []
    for index in range(-(-len(samples) // width)):
        chunk = samples[index * width : (index + 1) * width]
        if len(chunk) < width:
            chunk = np.concatenate([chunk, np.zeros(width - len(chunk))])
        segments.append(Segment(samples=chunk, segment_index=index, width=width))
    return segments


def _fmt_intensity(value: float) -> str:
    return format(value, "#.6g")  # 6 significant digits, trailing zeros kept


def write_events_csv(events: list[SpikeEvent], fh, with_raw: bool = False) -> None:
    header = EVENT_HEADER + (",raw_intensity" if with_raw else "")
    fh.write(header + "\n")
    for ev in events:
        line = (
            f"{ev.t},{ev.channel},{ev.m},{ev.level},"
            f"{_fmt_intensity(ev.magnitude_level_center)}"
        )
        if with_raw:
            line += f",{_fmt_intensity(ev.raw_intensity)}"
        fh.write(line + "\n")


def write_events_jsonl(events: list[SpikeEvent], fh, with_raw: bool = False) -> None:
    for ev in events:
        record = {
            "t_samples": ev.t,
            "channel": ev.channel,
            "kernel": ev.m,
            "level": ev.level,
            "intensity_center": ev.magnitude_level_center,
        }
        if with_raw:
            record["raw_intensity"] = ev.raw_intensity
        fh.write(json.dumps(record) + "\n")


def write_events(events: list[SpikeEvent], cfg: RunConfig) -> None:
    try:
        with open(cfg.output_path, "w", newline="\n") as fh:
            if cfg.output_format == "jsonl":
                write_events_jsonl(events, fh, cfg.with_raw_intensity)
            elif cfg.output_format == "csv":
                write_events_csv(events, fh, cfg.with_raw_intensity)
            else:
                raise UnsupportedFormat(f"unknown output format {cfg.output_format!r}")
    except OSError as exc:
        raise IoError(f"cannot write {cfg.output_path!r}: {exc}")


def parse_events(path: str) -> list[SpikeEvent]:
    """Read an event file (csv or jsonl) back into SpikeEvent records."""
    events = []
    try:
        with open(path) as fh:
            first = fh.readline()
            if not first:
                return events
            if first.lstrip().startswith("{"):
                for line in [first] + fh.readlines():
                    if not line.strip():
                        continue
                    rec = json.loads(line)
                    events.append(_event_from_fields(
                        rec["t_samples"], rec["channel"], rec["kernel"],
                        rec["level"], rec["intensity_center"],
                        rec.get("raw_intensity"),
                    ))
            else:
                if not first.startswith(EVENT_HEADER):
                    raise CorruptFile(f"unexpected event header in {path!r}")
                has_raw = "raw_intensity" in first
                for line in fh:
                    if not line.strip():
                        continue
                    parts = line.split(",")
                    events.append(_event_from_fields(
                        parts[0], parts[1], parts[2], parts[3], parts[4],
                        parts[5] if has_raw else None,
                    ))
    except OSError as exc:
        raise IoError(f"cannot read {path!r}: {exc}")
    except (ValueError, KeyError, IndexError) as exc:
        raise CorruptFile(f"bad event record in {path!r}: {exc}")
    return events


def _event_from_fields(t, channel, kernel, level, center, raw) -> SpikeEvent:
    center = float(center)
    return SpikeEvent(
        t=int(t),
        m=int(kernel),
        level=int(level),
        channel=int(channel),
        magnitude_level_center=center,
        # sign information only survives in the raw column
        raw_intensity=float(raw) if raw is not None else center,
    )


def codes_from_events(events: list[SpikeEvent], width: int) -> list[CodeSet]:
    """Rebuild per-segment code sets from parsed events (inverse of
    emit_stream up to intensity quantization when raw values are absent).

    A shift of exactly +W/2 shares its event time with the next segment's
    -W/2 and resolves to the latter; the schema carries no segment id.
    """
    by_segment: dict[int, list[Code]] = {}
    for ev in events:
        seg = ev.t // width
        tau = ev.t - seg * width - width // 2
        by_segment.setdefault(seg, []).append(
            Code(m=ev.m, tau=tau, s=ev.raw_intensity, segment_index=seg)
        )
    return [CodeSet(codes=by_segment[k]) for k in sorted(by_segment)]


def encode_signal(
    samples: np.ndarray,
    dictionary: Dictionary,
    cfg: EncoderConfig,
    sdict: SpectralDictionary | None = None,
) -> list[CodeSet]:
    """Segment and encode a whole signal; segment order is preserved."""
    if cfg.backend == "spectral" and sdict is None:
        sdict = kernel_spectra(
            dictionary,
            default_fft_len(cfg.width, dictionary.kernel_len),
            signal_len=cfg.width,
        )
    return [
        encode_segment(seg, dictionary, sdict, cfg)
        for seg in segment_stream(samples, cfg.width)
    ]


# ----- synthetic corpus and benchmark -----

def make_bench_corpus(
    dictionary: Dictionary, n_segments: int, width: int, seed: int = 0
) -> np.ndarray:
    """Seeded noise plus kernel mixtures; shipped as a generator rather than
    data files so runs stay reproducible without repository bloat."""
    rng = np.random.default_rng(seed)
    chunks = []
    for i in range(n_segments):
        x = 0.05 * rng.standard_normal(width)
        for _ in range(3):
            m = int(rng.integers(dictionary.num_kernels))
            tau = int(rng.integers(-(width // 2), width // 2 + 1))
            x += float(rng.uniform(0.2, 2.0)) * rng.choice([-1.0, 1.0]) * shift_kernel(
                dictionary.kernels[m], tau, width
            )
        chunks.append(x)
    return np.concatenate(chunks)


def make_audio_clip(
    n_samples: int, sample_rate: float = 16000.0, seed: int = 0
) -> np.ndarray:
    """Deterministic music-like test clip: decaying harmonic tone bursts over
    a low noise floor."""
    rng = np.random.default_rng(seed)
    t = np.arange(n_samples) / sample_rate
    x = 0.01 * rng.standard_normal(n_samples)
    for _ in range(6):
        f0 = float(rng.uniform(80.0, 1200.0))
        onset = float(rng.uniform(0.0, 0.8)) * n_samples / sample_rate
        amp = float(rng.uniform(0.1, 0.5))
        env = np.where(t >= onset, np.exp(-(t - onset) * rng.uniform(4.0, 20.0)), 0.0)
        for harmonic in (1, 2, 3):
            x += amp / harmonic * env * np.sin(2 * np.pi * f0 * harmonic * t)
    return 0.9 * x / np.max(np.abs(x))


@dataclass
class BenchReport:
    backend: str
    arithmetic: str
    wall_time_per_segment: float
    codes_per_second: float
    segments_per_second: float
    config: EncoderConfig
    # spectral run matches the direct run of the same arithmetic mode
    sequences_match_direct: bool = True


def run_bench(cfg: RunConfig, n_segments: int = 10) -> list[BenchReport]:
    """Encode the synthetic corpus under both backends and both arithmetic
    modes; reports timings and cross-checks code sequences as a side effect.

    Timings are wall-clock measurements on this host, reported for context
    only.
    """
    dictionary = build_dictionary(cfg.dictionary)
    width = cfg.encoder.width
    samples = make_bench_corpus(dictionary, n_segments, width, cfg.seed)
    sdict = kernel_spectra(
        dictionary, default_fft_len(width, dictionary.kernel_len), signal_len=width
    )

    reports = []
    reference: dict[str, list[tuple[int, int]]] = {}
    for backend in ("direct", "spectral"):
        for arithmetic in ("float", "fixed"):
            enc = replace(cfg.encoder, backend=backend, arithmetic=arithmetic)
            start = time.perf_counter()
            codesets = encode_signal(samples, dictionary, enc, sdict)
            elapsed = time.perf_counter() - start
            n_codes = sum(len(cs.codes) for cs in codesets)
            seq = [(c.m, c.tau) for cs in codesets for c in cs.codes]
            if backend == "direct":
                reference[arithmetic] = seq
            reports.append(
                BenchReport(
                    backend=backend,
                    arithmetic=arithmetic,
                    wall_time_per_segment=elapsed / max(n_segments, 1),
                    codes_per_second=n_codes / elapsed if elapsed > 0 else 0.0,
                    segments_per_second=n_segments / elapsed if elapsed > 0 else 0.0,
                    config=enc,
                    sequences_match_direct=(seq == reference[arithmetic]),
                )
            )
    return reports
