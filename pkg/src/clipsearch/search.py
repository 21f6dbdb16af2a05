"""Caption index persistence and METEOR-ranked retrieval."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

from .captioning import CaptionIndex
from .errors import IndexFormatError, InvalidInputError, InvalidQueryError
from .meteor import DEFAULT_CONFIG, MatcherConfig, ScoreBreakdown, meteor_score, tokenize

DEFAULT_TOP_K = 3


@dataclass(frozen=True)
class SearchResult:
    """One ranked hit: the clip, its caption, and the full score breakdown."""

    clip_path: str
    caption: str
    score: float
    breakdown: ScoreBreakdown


def save_index(index: CaptionIndex, path: str | os.PathLike) -> None:
    """Write the index as a UTF-8 JSON object with lexicographically sorted keys."""
    text = json.dumps(index.entries, ensure_ascii=False, sort_keys=True, indent=2)
    with open(path, "w", encoding="utf-8") as f:
        f.write(text + "\n")


def _reject_duplicate_keys(pairs: list[tuple[str, object]]) -> dict:
    obj: dict = {}
    for key, value in pairs:
        if key in obj:
            raise IndexFormatError(f"duplicate key {key!r}")
        obj[key] = value
    return obj


def load_index(path: str | os.PathLike) -> CaptionIndex:
    """Load an index file, pre-tokenizing captions for ranking.

    Rejects anything but a flat string-to-nonempty-string JSON object, naming
    the offending key.
    """
    with open(path, "rb") as f:
        raw = f.read()
    try:
        data = json.loads(raw.decode("utf-8"), object_pairs_hook=_reject_duplicate_keys)
    except UnicodeDecodeError as exc:
        raise IndexFormatError(f"{path}: not UTF-8: {exc}") from None
    except json.JSONDecodeError as exc:
        raise IndexFormatError(f"{path}: invalid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise IndexFormatError(f"{path}: expected a JSON object, got {type(data).__name__}")
    for key, value in data.items():
        if not isinstance(value, str):
            raise IndexFormatError(
                f"{path}: value for key {key!r} must be a string, got {type(value).__name__}"
            )
        if not value:
            raise IndexFormatError(f"{path}: empty caption for key {key!r}")
    index = CaptionIndex(entries=data)
    index.warm_tokens()
    return index


def rank(
    query: str,
    index: CaptionIndex,
    k: int = DEFAULT_TOP_K,
    config: MatcherConfig = DEFAULT_CONFIG,
) -> list[SearchResult]:
    """Score the query against every indexed caption and return the top k.

    Results are sorted by descending score, ties broken by ascending clip
    path; at most min(k, |index|) results come back.
    """
    if k < 1:
        raise InvalidInputError(f"k must be >= 1, got {k}")
    query_tokens = tokenize(query)
    if not query_tokens:
        raise InvalidQueryError("query is empty after tokenization")

    results = []
    for clip_path, caption in index.entries.items():
        breakdown = meteor_score(query_tokens, index.tokens_for(clip_path), config)
        results.append(
            SearchResult(
                clip_path=clip_path,
                caption=caption,
                score=breakdown.score,
                breakdown=breakdown,
            )
        )
    results.sort(key=lambda r: (-r.score, r.clip_path))
    return results[:k]
