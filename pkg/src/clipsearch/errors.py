"""Exception types shared across the pipeline."""


class ClipSearchError(Exception):
    """Base class for all clipsearch errors."""


class InvalidInputError(ClipSearchError, ValueError):
    """An argument violates an operation's preconditions."""


class InvalidQueryError(InvalidInputError):
    """A search query is empty after tokenization."""


class MissingCaptionError(ClipSearchError, KeyError):
    """No ground-truth caption exists for the requested video id."""

    def __str__(self) -> str:  # KeyError quotes its message; keep it readable
        return self.args[0] if self.args else ""


class IndexFormatError(ClipSearchError, ValueError):
    """A caption index file is malformed; message names the offending key."""


class ManifestError(ClipSearchError, ValueError):
    """A dataset manifest is malformed; message locates the bad record."""
