import random
import sys
from pathlib import Path

import pytest
from hypothesis import settings

sys.path.insert(0, str(Path(__file__).parent))

from sentrack.detections import Clip, Detection  # noqa: E402
from sentrack.lexicon import stock_lexicon  # noqa: E402
from sentrack.predicates import ParameterSet  # noqa: E402

settings.register_profile("repo", derandomize=True, deadline=None, max_examples=200)
settings.load_profile("repo")


def det(cx=0.0, cy=0.0, w=100.0, h=100.0, cls="person", f=0.5, vx=0.0, vy=0.0, index=0):
    return Detection(cx, cy, w, h, cls, f, vx, vy, index)


def clip_of(frames, clip_id="c"):
    """Build a clip from a list of ``{class: [Detection, ...]}`` frames."""
    return Clip(clip_id, clip_id, 0, tuple({k: tuple(v) for k, v in fr.items()} for fr in frames))


@pytest.fixture
def params():
    return ParameterSet()


@pytest.fixture(scope="session")
def lexicon():
    return stock_lexicon()


@pytest.fixture
def rng():
    return random.Random(1234)
