"""Frame access: the Frame type and the sources that deliver frames.

A ``VideoSource`` hands out decoded RGB frames by index. The directory-backed
source (one P6 PPM file per frame, lexicographic filename order) is the
deterministic path used throughout the tests; ``VideoFileSource`` wraps a real
codec via OpenCV when actual media files are involved.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol, runtime_checkable

import numpy as np

from .errors import InvalidInputError
from .ppm import read_ppm

DEFAULT_FRAME_RATE = 30.0


@dataclass(frozen=True)
class Frame:
    """One decoded video frame: row-major RGB, 8 bits per channel."""

    pixels: np.ndarray  # shape (height, width, 3), dtype uint8

    def __post_init__(self) -> None:
        arr = self.pixels
        if arr.ndim != 3 or arr.shape[2] != 3 or arr.dtype != np.uint8:
            raise InvalidInputError(
                f"frame pixels must be uint8 with shape (h, w, 3), got "
                f"{arr.dtype} {arr.shape}"
            )
        if arr.shape[0] == 0 or arr.shape[1] == 0:
            raise InvalidInputError("frame has zero area")

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


def solid_frame(rgb: tuple[int, int, int], width: int = 32, height: int = 24) -> Frame:
    """Build a single-color frame (fixture helper, also used by the CLI demo)."""
    arr = np.empty((height, width, 3), dtype=np.uint8)
    arr[:, :] = rgb
    return Frame(arr)


@runtime_checkable
class VideoSource(Protocol):
    """Indexed access to a video's frames.

    Implementations must return identical pixels for repeated reads of the
    same index; ``frame(i)`` is defined for 0 <= i < frame_count.
    """

    @property
    def frame_count(self) -> int: ...

    @property
    def frame_rate(self) -> float: ...

    def frame(self, index: int) -> Frame: ...


class ArraySource:
    """In-memory source over a list of frames."""

    def __init__(self, frames: list[Frame], frame_rate: float = DEFAULT_FRAME_RATE):
        self._frames = list(frames)
        self._frame_rate = frame_rate

    @property
    def frame_count(self) -> int:
        return len(self._frames)

    @property
    def frame_rate(self) -> float:
        return self._frame_rate

    def frame(self, index: int) -> Frame:
        if not 0 <= index < len(self._frames):
            raise InvalidInputError(f"frame index {index} out of range")
        return self._frames[index]


class FrameDirectorySource:
    """Frames stored as ``<dir>/*.ppm``; lexicographic filename order = frame order."""

    def __init__(self, directory: str | os.PathLike, frame_rate: float = DEFAULT_FRAME_RATE):
        self.directory = Path(directory)
        if not self.directory.is_dir():
            raise InvalidInputError(f"not a directory: {self.directory}")
        self._paths = sorted(p for p in self.directory.iterdir() if p.suffix == ".ppm")
        self._frame_rate = frame_rate

    @property
    def frame_count(self) -> int:
        return len(self._paths)

    @property
    def frame_rate(self) -> float:
        return self._frame_rate

    def frame(self, index: int) -> Frame:
        if not 0 <= index < len(self._paths):
            raise InvalidInputError(f"frame index {index} out of range")
        return Frame(read_ppm(self._paths[index]))


def write_frame_dir(directory: str | os.PathLike, frames: list[Frame]) -> None:
    """Write frames as zero-padded ``NNNNNN.ppm`` files (the on-disk clip format)."""
    from .ppm import write_ppm

    path = Path(directory)
    path.mkdir(parents=True, exist_ok=True)
    for i, frame in enumerate(frames):
        write_ppm(path / f"{i:06d}.ppm", frame.pixels)


class VideoFileSource:
    """Codec-backed source for real media files (requires opencv).

    Frames are decoded sequentially and positions cached, so strictly
    increasing access (the pipeline's pattern) decodes each frame once.
    """

    def __init__(self, path: str | os.PathLike):
        try:
            import cv2
        except ImportError as exc:  # pragma: no cover - optional dependency
            raise InvalidInputError(
                "opencv-python is required for VideoFileSource; install the "
                "'video' extra or use a frame directory"
            ) from exc
        self._cv2 = cv2
        self.path = str(path)
        self._cap = cv2.VideoCapture(self.path)
        if not self._cap.isOpened():
            raise InvalidInputError(f"cannot open video file: {self.path}")
        self._count = int(self._cap.get(cv2.CAP_PROP_FRAME_COUNT))
        rate = self._cap.get(cv2.CAP_PROP_FPS)
        self._frame_rate = float(rate) if rate and rate > 0 else DEFAULT_FRAME_RATE
        self._next = 0

    @property
    def frame_count(self) -> int:
        return self._count

    @property
    def frame_rate(self) -> float:
        return self._frame_rate

    def frame(self, index: int) -> Frame:
        if not 0 <= index < self._count:
            raise InvalidInputError(f"frame index {index} out of range")
        if index != self._next:
            self._cap.set(self._cv2.CAP_PROP_POS_FRAMES, index)
        ok, bgr = self._cap.read()
        if not ok:
            raise InvalidInputError(f"failed to decode frame {index} of {self.path}")
        self._next = index + 1
        rgb = self._cv2.cvtColor(bgr, self._cv2.COLOR_BGR2RGB)
        return Frame(np.ascontiguousarray(rgb, dtype=np.uint8))

    def close(self) -> None:
        self._cap.release()
