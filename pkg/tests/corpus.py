"""Builders for on-disk test corpora: frame directories, manifests, clips."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from clipsearch.video import Frame, solid_frame, write_frame_dir

RED = (255, 0, 0)
GREEN = (0, 255, 0)
BLUE = (0, 0, 255)

FRAME_W = 64
FRAME_H = 48


def solid(color, w: int = FRAME_W, h: int = FRAME_H) -> Frame:
    return solid_frame(color, w, h)


def make_frame_dir(directory: Path, colors: list[tuple[int, int, int]]) -> Path:
    """One solid-color PPM frame per entry of ``colors``."""
    write_frame_dir(directory, [solid(c) for c in colors])
    return directory


def tricolor_colors(per_scene: int = 30) -> list[tuple[int, int, int]]:
    return [RED] * per_scene + [GREEN] * per_scene + [BLUE] * per_scene


def make_tricolor_dir(directory: Path, per_scene: int = 30) -> Path:
    return make_frame_dir(directory, tricolor_colors(per_scene))


def random_frame(rng: np.random.Generator, w: int = FRAME_W, h: int = FRAME_H) -> Frame:
    return Frame(rng.integers(0, 256, size=(h, w, 3), dtype=np.uint8))


# Six videos, one color each, with distinct single ground-truth sentences.
SIX_CLIP_VIDEOS = [
    ("v1", "sports", RED, "a man rides a horse"),
    ("v2", "people", GREEN, "a dog runs in the park"),
    ("v3", "travel", BLUE, "city traffic at night"),
    ("v4", "food", (200, 180, 40), "a chef cooks pasta in a kitchen"),
    ("v5", "sports", (30, 30, 30), "children play football on a field"),
    ("v6", "science", (250, 250, 250), "a rocket launches into space"),
]


def six_clip_manifest_doc() -> dict:
    return {
        "videos": [
            {
                "video_id": vid,
                "url": f"videos/{vid}.mp4",
                "category": category,
                "start_time": 0.0,
                "end_time": 10.0,
            }
            for vid, category, _, _ in SIX_CLIP_VIDEOS
        ],
        "sentences": [
            {"video_id": vid, "caption": caption} for vid, _, _, caption in SIX_CLIP_VIDEOS
        ],
    }


def write_six_clip_corpus(root: Path, frames_per_video: int = 30) -> tuple[Path, Path]:
    """Manifest JSON + per-video frame directories for the end-to-end fixture.

    Returns (manifest_path, frames_root). Each video is a single constant
    scene, so splitting yields exactly one clip per video.
    """
    frames_root = root / "frames"
    for vid, _, color, _ in SIX_CLIP_VIDEOS:
        make_frame_dir(frames_root / vid, [color] * frames_per_video)
    manifest_path = root / "manifest.json"
    manifest_path.write_text(json.dumps(six_clip_manifest_doc(), indent=2), encoding="utf-8")
    return manifest_path, frames_root


def ingest_manifest_doc() -> dict:
    """3 sports + 2 news + 1 travel video, two sentences for v1."""
    videos = [
        ("s1", "sports"),
        ("s2", "sports"),
        ("n1", "news"),
        ("s3", "sports"),
        ("n2", "news"),
        ("t1", "travel"),
    ]
    return {
        "videos": [
            {
                "video_id": vid,
                "url": f"clips/{vid}.mp4",
                "category": cat,
                "start_time": 1.0,
                "end_time": 5.0,
            }
            for vid, cat in videos
        ],
        "sentences": [
            {"video_id": "s1", "caption": "first sports sentence"},
            {"video_id": "s1", "caption": "second sports sentence"},
            {"video_id": "n1", "caption": "a news anchor speaks"},
        ],
    }
