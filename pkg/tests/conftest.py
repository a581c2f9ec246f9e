from __future__ import annotations

import pytest

from duocorpus import ReferenceTokenizer, StopwordScorer


@pytest.fixture
def tok() -> ReferenceTokenizer:
    return ReferenceTokenizer()


@pytest.fixture
def scorer() -> StopwordScorer:
    return StopwordScorer()
