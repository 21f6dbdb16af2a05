"""Scene detection via color-histogram differencing.

Each frame is reduced to a flattened 3D RGB histogram (B bins per channel,
B^3 entries, L1-normalized so thresholds are resolution-independent). A hard
cut is declared between consecutive frames whose histograms are more than
``threshold`` apart in Euclidean distance; 0.3 with B=8 is the calibrated
default.
"""

from __future__ import annotations

import json
import os
from typing import NamedTuple

import numpy as np

from .errors import InvalidInputError
from .video import Frame, VideoSource

DEFAULT_THRESHOLD = 0.3
DEFAULT_BINS_PER_CHANNEL = 8


class SceneBoundary(NamedTuple):
    """Inclusive frame span of one detected scene."""

    start_frame: int
    end_frame: int


def compute_histogram(frame: Frame, bins_per_channel: int = DEFAULT_BINS_PER_CHANNEL) -> np.ndarray:
    """Flattened, L1-normalized 3D color histogram of a frame.

    Channel value v falls into bin ``v * B // 256``; the joint (r, g, b) bin
    index is ``r_bin * B^2 + g_bin * B + b_bin``. Entries sum to 1.

    Args:
        frame: RGB frame to histogram.
        bins_per_channel: B, number of bins per channel (>= 1).

    Returns:
        float64 vector of length B^3.
    """
    if bins_per_channel < 1:
        raise InvalidInputError(f"bins_per_channel must be >= 1, got {bins_per_channel}")
    pixels = frame.pixels
    n = pixels.shape[0] * pixels.shape[1]
    if n == 0:
        raise InvalidInputError("cannot histogram a zero-area frame")
    b = bins_per_channel
    binned = (pixels.astype(np.int64) * b) >> 8  # v * B // 256 for maxval 255
    flat = (binned[..., 0] * b + binned[..., 1]) * b + binned[..., 2]
    counts = np.bincount(flat.ravel(), minlength=b * b * b)
    return counts.astype(np.float64) / n


def histogram_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Euclidean distance between two flattened histograms of equal length."""
    if a.shape != b.shape:
        raise InvalidInputError(f"histogram length mismatch: {a.shape} vs {b.shape}")
    return float(np.linalg.norm(a - b))


def detect_scenes(
    source: VideoSource,
    threshold: float = DEFAULT_THRESHOLD,
    bins_per_channel: int = DEFAULT_BINS_PER_CHANNEL,
) -> list[SceneBoundary]:
    """Split a video into scenes at hard cuts.

    Walks the source once, comparing each frame's histogram with the previous
    frame's; a new scene starts at frame i when their distance strictly
    exceeds ``threshold``. Only two histograms are live at any point.

    Args:
        source: video to split (must have at least one frame).
        threshold: cut threshold on the histogram distance (> 0).
        bins_per_channel: histogram resolution per channel.

    Returns:
        Boundaries tiling [0, frame_count - 1] with no gaps or overlaps.
    """
    if source.frame_count < 1:
        raise InvalidInputError("cannot detect scenes in an empty source")
    if threshold <= 0:
        raise InvalidInputError(f"threshold must be > 0, got {threshold}")

    boundaries: list[SceneBoundary] = []
    scene_start = 0
    prev_hist = compute_histogram(source.frame(0), bins_per_channel)
    for i in range(1, source.frame_count):
        hist = compute_histogram(source.frame(i), bins_per_channel)
        if histogram_distance(prev_hist, hist) > threshold:
            boundaries.append(SceneBoundary(scene_start, i - 1))
            scene_start = i
        prev_hist = hist
    boundaries.append(SceneBoundary(scene_start, source.frame_count - 1))
    return boundaries


def clip_name(video_id: str, scene_index: int) -> str:
    """Deterministic clip naming: ``<video_id>_s<scene_index>``."""
    return f"{video_id}_s{scene_index}"


def video_id_of_clip(name: str) -> str:
    """Inverse of clip_name; names without a scene suffix map to themselves."""
    stem, sep, suffix = name.rpartition("_s")
    if sep and suffix.isdigit():
        return stem
    return name


def materialize_clips(
    frames_dir: str | os.PathLike,
    boundaries: list[SceneBoundary],
    out_root: str | os.PathLike,
    video_id: str,
) -> list[str]:
    """Copy each scene's frames into its own clip directory.

    Produces ``<out_root>/<video_id>_s<i>/NNNNNN.ppm`` per boundary, frames
    renumbered from zero, and returns the clip names in scene order.
    """
    import shutil
    from pathlib import Path

    src = Path(frames_dir)
    frame_paths = sorted(p for p in src.iterdir() if p.suffix == ".ppm")
    names = []
    for i, bound in enumerate(boundaries):
        if bound.end_frame >= len(frame_paths):
            raise InvalidInputError(
                f"boundary {bound} exceeds frame count {len(frame_paths)} in {src}"
            )
        name = clip_name(video_id, i)
        clip_dir = Path(out_root) / name
        clip_dir.mkdir(parents=True, exist_ok=True)
        for k, frame_idx in enumerate(range(bound.start_frame, bound.end_frame + 1)):
            shutil.copyfile(frame_paths[frame_idx], clip_dir / f"{k:06d}.ppm")
        names.append(name)
    return names


def boundaries_to_json(boundaries: list[SceneBoundary]) -> str:
    """Serialize boundaries as a JSON array of {start_frame, end_frame}."""
    return json.dumps(
        [{"start_frame": b.start_frame, "end_frame": b.end_frame} for b in boundaries],
        indent=2,
    ) + "\n"


def save_boundaries(boundaries: list[SceneBoundary], path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(boundaries_to_json(boundaries))
