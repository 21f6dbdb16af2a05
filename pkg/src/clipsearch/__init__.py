"""clipsearch: a searchable video-clip database.

Videos are split into scenes by color-histogram differencing, each clip is
captioned through a pluggable captioner, captions live in a JSON index, and
voice or text queries are ranked against that index with the METEOR metric.
"""

__version__ = "0.1.0"

from .captioning import Caption, CaptionIndex, caption_clip, caption_corpus, meanpool, sample_frames
from .meteor import MatcherConfig, ScoreBreakdown, align, count_chunks, meteor_score, tokenize
from .scenes import SceneBoundary, compute_histogram, detect_scenes, histogram_distance
from .search import SearchResult, load_index, rank, save_index
from .video import Frame, FrameDirectorySource, VideoSource

__all__ = [
    "Caption",
    "CaptionIndex",
    "Frame",
    "FrameDirectorySource",
    "MatcherConfig",
    "SceneBoundary",
    "ScoreBreakdown",
    "SearchResult",
    "VideoSource",
    "align",
    "caption_clip",
    "caption_corpus",
    "compute_histogram",
    "count_chunks",
    "detect_scenes",
    "histogram_distance",
    "load_index",
    "meanpool",
    "meteor_score",
    "rank",
    "sample_frames",
    "save_index",
    "tokenize",
]
