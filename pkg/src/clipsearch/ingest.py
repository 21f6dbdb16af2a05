"""Dataset manifest parsing, category subsetting, and availability checks.

The manifest follows the MSR-VTT shape: a JSON object holding ``videos``
(id, URL, category, clip start/end time) and ``sentences`` (video id plus a
natural-language description). Field spellings vary across dataset releases,
so both ``start time`` and ``start_time`` forms are accepted, and categories
may be numeric codes (mapped through an optional ``category_names`` table)
or plain strings.
"""

from __future__ import annotations

import json
import logging
import shutil
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Protocol, Sequence

from .errors import InvalidInputError, ManifestError, MissingCaptionError

logger = logging.getLogger(__name__)

AVAILABLE = "available"
UNAVAILABLE = "unavailable"
ERROR = "error"

# MSR-VTT ships 20 descriptions per video; deviations are tolerated but flagged.
EXPECTED_SENTENCES_PER_VIDEO = 20


@dataclass(frozen=True)
class VideoRecord:
    video_id: str
    url: str
    category: str
    start_time: float
    end_time: float
    local_path: str | None = None


@dataclass(frozen=True)
class SentenceRecord:
    video_id: str
    caption: str


@dataclass
class Manifest:
    videos: list[VideoRecord] = field(default_factory=list)
    sentences: list[SentenceRecord] = field(default_factory=list)
    category_names: dict[str, str] | None = None

    def sentences_by_video(self) -> dict[str, list[str]]:
        grouped: dict[str, list[str]] = {v.video_id: [] for v in self.videos}
        for s in self.sentences:
            grouped[s.video_id].append(s.caption)
        return grouped

    def categories(self) -> set[str]:
        return {v.category for v in self.videos}


class Fetcher(Protocol):
    """Clip retrieval seam; ``probe`` must have no side effects."""

    def probe(self, url: str) -> str: ...

    def fetch(self, url: str, dest: str | Path) -> Path: ...


class FileSystemFetcher:
    """Treats URLs as local file paths; enables end-to-end runs without a network."""

    def probe(self, url: str) -> str:
        return AVAILABLE if Path(url).is_file() else UNAVAILABLE

    def fetch(self, url: str, dest: str | Path) -> Path:
        src = Path(url)
        if not src.is_file():
            raise InvalidInputError(f"no such file: {url}")
        dest = Path(dest)
        dest.parent.mkdir(parents=True, exist_ok=True)
        shutil.copyfile(src, dest)
        return dest


def _require(record: dict, keys: Sequence[str], position: str, record_id: str | None):
    for key in keys:
        if key in record:
            return record[key]
    label = f"{position}" + (f" (video_id {record_id!r})" if record_id else "")
    raise ManifestError(f"{label}: missing field {keys[0]!r}")


def _category_name(raw, category_names: dict[str, str] | None, position: str) -> str:
    if isinstance(raw, bool) or not isinstance(raw, (int, str)):
        raise ManifestError(f"{position}: category must be a string or integer, got {raw!r}")
    if isinstance(raw, int):
        code = str(raw)
        if category_names and code in category_names:
            return category_names[code]
        return code
    return raw


def parse_manifest(data: bytes | str) -> Manifest:
    """Parse and cross-check a manifest document.

    Raises ManifestError locating the bad record on missing fields, invalid
    time spans, duplicate video ids, or sentences referencing unknown videos.
    """
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise ManifestError(f"manifest is not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ManifestError(f"manifest must be a JSON object, got {type(doc).__name__}")
    for key in ("videos", "sentences"):
        if not isinstance(doc.get(key), list):
            raise ManifestError(f"manifest must contain a {key!r} array")

    category_names = doc.get("category_names")
    if category_names is not None and not isinstance(category_names, dict):
        raise ManifestError("'category_names' must be an object mapping code to name")

    videos: list[VideoRecord] = []
    seen_ids: set[str] = set()
    for i, rec in enumerate(doc["videos"]):
        position = f"videos[{i}]"
        if not isinstance(rec, dict):
            raise ManifestError(f"{position}: expected an object")
        video_id = _require(rec, ("video_id", "id"), position, None)
        if not isinstance(video_id, str) or not video_id:
            raise ManifestError(f"{position}: video_id must be a non-empty string")
        if video_id in seen_ids:
            raise ManifestError(f"{position}: duplicate video_id {video_id!r}")
        seen_ids.add(video_id)
        url = _require(rec, ("url",), position, video_id)
        category = _category_name(
            _require(rec, ("category",), position, video_id), category_names, position
        )
        start = _require(rec, ("start_time", "start time"), position, video_id)
        end = _require(rec, ("end_time", "end time"), position, video_id)
        try:
            start, end = float(start), float(end)
        except (TypeError, ValueError):
            raise ManifestError(f"{position} (video_id {video_id!r}): non-numeric time span") from None
        if start < 0:
            raise ManifestError(f"{position} (video_id {video_id!r}): start_time must be >= 0")
        if end <= start:
            raise ManifestError(
                f"{position} (video_id {video_id!r}): end_time must exceed start_time"
            )
        local_path = rec.get("local_path")
        videos.append(VideoRecord(video_id, url, category, start, end, local_path))

    sentences: list[SentenceRecord] = []
    dangling: list[str] = []
    for i, rec in enumerate(doc["sentences"]):
        position = f"sentences[{i}]"
        if not isinstance(rec, dict):
            raise ManifestError(f"{position}: expected an object")
        video_id = _require(rec, ("video_id",), position, None)
        caption = _require(rec, ("caption",), position, video_id)
        if not isinstance(caption, str) or not caption:
            raise ManifestError(f"{position}: caption must be a non-empty string")
        if video_id not in seen_ids and video_id not in dangling:
            dangling.append(video_id)
        sentences.append(SentenceRecord(video_id, caption))
    if dangling:
        raise ManifestError(
            "sentences reference unknown video ids: " + ", ".join(repr(v) for v in dangling)
        )

    manifest = Manifest(videos=videos, sentences=sentences, category_names=category_names)
    _warn_on_corpus_shape(manifest)
    return manifest


def _warn_on_corpus_shape(manifest: Manifest) -> None:
    counts = manifest.sentences_by_video()
    off = sum(1 for caps in counts.values() if len(caps) != EXPECTED_SENTENCES_PER_VIDEO)
    if off:
        logger.warning(
            "%d of %d videos do not have %d sentences each",
            off,
            len(counts),
            EXPECTED_SENTENCES_PER_VIDEO,
        )


def serialize_manifest(manifest: Manifest) -> str:
    """Canonical JSON form; parse_manifest(serialize_manifest(m)) == m."""
    doc: dict = {
        "videos": [
            {
                "video_id": v.video_id,
                "url": v.url,
                "category": v.category,
                "start_time": v.start_time,
                "end_time": v.end_time,
                **({"local_path": v.local_path} if v.local_path is not None else {}),
            }
            for v in manifest.videos
        ],
        "sentences": [
            {"video_id": s.video_id, "caption": s.caption} for s in manifest.sentences
        ],
    }
    if manifest.category_names is not None:
        doc["category_names"] = manifest.category_names
    return json.dumps(doc, ensure_ascii=False, indent=2) + "\n"


def load_manifest(path: str | Path) -> Manifest:
    with open(path, "rb") as f:
        return parse_manifest(f.read())


def filter_sample(
    manifest: Manifest, categories: Sequence[str], per_category: int
) -> list[VideoRecord]:
    """First ``per_category`` videos of each requested category, manifest order.

    Scarce categories return what they have with a warning; a category absent
    from the manifest entirely is an error.
    """
    if per_category < 1:
        raise InvalidInputError(f"per_category must be >= 1, got {per_category}")
    present = {v.category for v in manifest.videos}
    picked: list[VideoRecord] = []
    seen_request: set[str] = set()
    for category in categories:
        if category in seen_request:
            continue
        seen_request.add(category)
        if category not in present:
            raise InvalidInputError(f"unknown category {category!r}")
        matching = [v for v in manifest.videos if v.category == category]
        if len(matching) < per_category:
            logger.warning(
                "category %r has only %d videos (%d requested)",
                category,
                len(matching),
                per_category,
            )
        picked.extend(matching[:per_category])
    return picked


def check_availability(records: Iterable[VideoRecord], fetcher: Fetcher) -> dict[str, str]:
    """Probe each record's URL once; a failing probe marks that record 'error'."""
    statuses: dict[str, str] = {}
    for record in records:
        try:
            statuses[record.video_id] = fetcher.probe(record.url)
        except Exception as exc:
            logger.warning("availability probe failed for %s: %s", record.video_id, exc)
            statuses[record.video_id] = ERROR
    return statuses


def sentences_for(manifest: Manifest, video_id: str) -> list[str]:
    """Manifest-order captions for a video; unknown ids are an error."""
    known = {v.video_id for v in manifest.videos}
    if video_id not in known:
        raise MissingCaptionError(f"unknown video id {video_id!r}")
    return [s.caption for s in manifest.sentences if s.video_id == video_id]
