"""Clip captioning: frame sampling, feature pooling, pluggable decoders.

A clip is captioned by sampling every nth frame, extracting one feature
vector per sampled frame, meanpooling those into a single clip vector, and
handing that to a ``Captioner``. Three captioners ship: a deterministic
color-bucket mock, a dataset captioner backed by ground-truth sentences, and
an HTTP client for an external captioning service.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Mapping, NamedTuple, Protocol, Sequence

import numpy as np

from .errors import ClipSearchError, InvalidInputError, MissingCaptionError
from .meteor import tokenize
from .scenes import compute_histogram
from .video import Frame, VideoSource

logger = logging.getLogger(__name__)

DEFAULT_STRIDE = 10
DEFAULT_FEATURE_DIM = 64


@dataclass(frozen=True)
class Caption:
    """Caption text plus its tokenized form."""

    text: str
    tokens: tuple[str, ...]

    @classmethod
    def from_text(cls, text: str) -> "Caption":
        return cls(text=text, tokens=tuple(tokenize(text)))


@dataclass(frozen=True)
class ClipMetadata:
    """Identity of the clip being captioned (dataset and remote backends use it)."""

    video_id: str | None = None
    clip_path: str | None = None


class FeatureExtractor(Protocol):
    """Per-frame feature embedding; deterministic, fixed output length."""

    @property
    def dimension(self) -> int: ...

    def extract(self, frame: Frame) -> np.ndarray: ...


class Captioner(Protocol):
    """Decodes a pooled clip vector (plus clip metadata) into a caption."""

    def caption(self, pooled: np.ndarray, meta: ClipMetadata) -> Caption: ...


def sample_frames(source: VideoSource, stride: int = DEFAULT_STRIDE) -> list[Frame]:
    """Every nth frame of the clip: indices 0, n, ..., (k-1)*n with k = l // n.

    Clips shorter than one stride fall back to the single frame at index 0 so
    they stay captionable.
    """
    if stride < 1:
        raise InvalidInputError(f"stride must be >= 1, got {stride}")
    length = source.frame_count
    if length < 1:
        raise InvalidInputError("cannot sample frames from an empty source")
    k = length // stride
    if k == 0:
        return [source.frame(0)]
    return [source.frame(i * stride) for i in range(k)]


def meanpool(vectors: Sequence[np.ndarray]) -> np.ndarray:
    """Element-wise arithmetic mean of equal-length feature vectors."""
    if len(vectors) == 0:
        raise InvalidInputError("meanpool of an empty vector list")
    first_len = len(vectors[0])
    for v in vectors:
        if len(v) != first_len:
            raise InvalidInputError(
                f"ragged feature vectors: expected length {first_len}, got {len(v)}"
            )
    stacked = np.asarray(vectors, dtype=np.float64)
    if not np.isfinite(stacked).all():
        raise InvalidInputError("feature vectors must be finite")
    return stacked.mean(axis=0)


class ColorStatsExtractor:
    """Reference extractor: B=3 color histogram + channel means, zero-padded.

    The first 27 entries are the frame's L1-normalized 3-bins-per-channel
    histogram, followed by the three channel means scaled to [0, 1]; the rest
    of the vector is zero. Pure: equal frames give equal vectors.
    """

    HISTOGRAM_BINS = 3

    def __init__(self, dimension: int = DEFAULT_FEATURE_DIM):
        floor = self.HISTOGRAM_BINS**3 + 3
        if dimension < floor:
            raise InvalidInputError(f"dimension must be >= {floor}, got {dimension}")
        self._dimension = dimension

    @property
    def dimension(self) -> int:
        return self._dimension

    def extract(self, frame: Frame) -> np.ndarray:
        hist = compute_histogram(frame, self.HISTOGRAM_BINS)
        means = frame.pixels.reshape(-1, 3).mean(axis=0) / 255.0
        out = np.zeros(self._dimension, dtype=np.float64)
        out[: hist.size] = hist
        out[hist.size : hist.size + 3] = means
        return out


_LEVEL_NAMES = ("low", "medium", "high")


def _bucket_phrase(bucket: int) -> str:
    r, rest = divmod(bucket, 9)
    g, b = divmod(rest, 3)
    return (
        f"a scene with {_LEVEL_NAMES[r]} red, {_LEVEL_NAMES[g]} green "
        f"and {_LEVEL_NAMES[b]} blue"
    )


# Fixed phrase per dominant-color bucket, index = r*9 + g*3 + b over the
# 3-level histogram of ColorStatsExtractor.
BUCKET_PHRASES: tuple[str, ...] = tuple(_bucket_phrase(i) for i in range(27))


class ColorPhraseCaptioner:
    """Test captioner: maps the pooled vector's dominant color bucket to a phrase.

    The bucket is the argmax of the histogram section of the pooled vector
    (ties resolved to the lowest index by argmax).
    """

    def caption(self, pooled: np.ndarray, meta: ClipMetadata) -> Caption:
        bins = ColorStatsExtractor.HISTOGRAM_BINS**3
        if len(pooled) < bins:
            raise InvalidInputError(
                f"pooled vector too short for color buckets: {len(pooled)} < {bins}"
            )
        bucket = int(np.argmax(pooled[:bins]))
        return Caption.from_text(BUCKET_PHRASES[bucket])


class DatasetCaptioner:
    """Returns the first ground-truth sentence recorded for the clip's video."""

    def __init__(self, sentences_by_video: Mapping[str, Sequence[str]]):
        self._sentences = sentences_by_video

    @classmethod
    def from_manifest(cls, manifest) -> "DatasetCaptioner":
        return cls(manifest.sentences_by_video())

    def caption(self, pooled: np.ndarray, meta: ClipMetadata) -> Caption:
        if meta.video_id is None or meta.video_id not in self._sentences:
            raise MissingCaptionError(f"no ground-truth captions for video {meta.video_id!r}")
        sentences = self._sentences[meta.video_id]
        if not sentences:
            raise MissingCaptionError(f"no ground-truth captions for video {meta.video_id!r}")
        return Caption.from_text(sentences[0])


class RemoteCaptioner:
    """Posts the pooled vector to an external captioning service.

    Wire format: request ``{"features": [...], "clip": path}``, response
    ``{"caption": "..."}``.
    """

    def __init__(self, url: str, timeout: float = 30.0):
        self.url = url
        self.timeout = timeout

    def caption(self, pooled: np.ndarray, meta: ClipMetadata) -> Caption:
        import requests

        payload = {"features": [float(x) for x in pooled], "clip": meta.clip_path or ""}
        resp = requests.post(self.url, json=payload, timeout=self.timeout)
        resp.raise_for_status()
        body = resp.json()
        if not isinstance(body, dict) or not isinstance(body.get("caption"), str):
            raise ClipSearchError(f"captioning service returned malformed body: {body!r}")
        return Caption.from_text(body["caption"])


def caption_clip(
    source: VideoSource,
    extractor: FeatureExtractor,
    captioner: Captioner,
    stride: int = DEFAULT_STRIDE,
    meta: ClipMetadata = ClipMetadata(),
) -> Caption:
    """Caption one clip: sample frames, extract, meanpool, decode."""
    frames = sample_frames(source, stride)
    features = [extractor.extract(f) for f in frames]
    pooled = meanpool(features)
    return captioner.caption(pooled, meta)


@dataclass
class CaptionIndex:
    """The searchable clip-path -> caption map."""

    entries: dict[str, str] = field(default_factory=dict)
    _tokens: dict[str, list[str]] = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self) -> None:
        for path, text in self.entries.items():
            if not text:
                raise InvalidInputError(f"empty caption for clip {path!r}")

    def add(self, clip_path: str, text: str) -> None:
        if clip_path in self.entries:
            raise InvalidInputError(f"duplicate clip path {clip_path!r}")
        if not text:
            raise InvalidInputError(f"empty caption for clip {clip_path!r}")
        self.entries[clip_path] = text

    def tokens_for(self, clip_path: str) -> list[str]:
        cached = self._tokens.get(clip_path)
        if cached is None:
            cached = tokenize(self.entries[clip_path])
            self._tokens[clip_path] = cached
        return cached

    def warm_tokens(self) -> None:
        for path in self.entries:
            self.tokens_for(path)

    def __len__(self) -> int:
        return len(self.entries)


class ClipTask(NamedTuple):
    """One corpus entry awaiting captioning."""

    clip_path: str
    source: VideoSource
    meta: ClipMetadata


@dataclass
class CorpusResult:
    """Outcome of captioning a corpus: the index plus per-clip failures."""

    index: CaptionIndex
    failures: dict[str, str] = field(default_factory=dict)


def caption_corpus(
    clips: Iterable[ClipTask],
    extractor: FeatureExtractor,
    captioner: Captioner,
    stride: int = DEFAULT_STRIDE,
    workers: int = 1,
) -> CorpusResult:
    """Caption every clip, recording failures without aborting the run.

    Entries are inserted in clip-path-sorted order regardless of worker
    scheduling, so the resulting index content is order-independent.
    """
    tasks = list(clips)
    seen: set[str] = set()
    for task in tasks:
        if task.clip_path in seen:
            raise InvalidInputError(f"duplicate clip path {task.clip_path!r}")
        seen.add(task.clip_path)

    def run(task: ClipTask) -> tuple[str, str | None, str | None]:
        try:
            caption = caption_clip(task.source, extractor, captioner, stride, task.meta)
            return task.clip_path, caption.text, None
        except Exception as exc:
            return task.clip_path, None, str(exc)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(run, tasks))
    else:
        outcomes = [run(task) for task in tasks]

    index = CaptionIndex()
    failures: dict[str, str] = {}
    for clip_path, text, error in sorted(outcomes):
        if error is not None:
            logger.warning("captioning failed for %s: %s", clip_path, error)
            failures[clip_path] = error
        else:
            assert text is not None
            index.add(clip_path, text)
    return CorpusResult(index=index, failures=failures)
