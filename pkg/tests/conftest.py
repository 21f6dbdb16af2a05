import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from corpus import make_frame_dir, make_tricolor_dir, RED  # noqa: E402


@pytest.fixture
def tricolor_dir(tmp_path):
    return make_tricolor_dir(tmp_path / "tricolor")


@pytest.fixture
def constant_dir(tmp_path):
    return make_frame_dir(tmp_path / "constant", [RED] * 50)
