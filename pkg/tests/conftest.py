import random
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from compred.relcore import PartitionSchedule, random_preorder, random_schedule

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

FIXTURES = Path(__file__).resolve().parents[1] / "src" / "compred" / "fixtures"


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


seeds = st.integers(min_value=0, max_value=2 ** 32 - 1)


@st.composite
def schedules(draw, max_n=10, max_stages=30) -> PartitionSchedule:
    seed = draw(seeds)
    n = draw(st.integers(1, max_n))
    stages = draw(st.integers(0, max_stages))
    return random_schedule(random.Random(seed), n, stages)


@st.composite
def preorders(draw, max_n=6):
    seed = draw(seeds)
    n = draw(st.integers(1, max_n))
    density = draw(st.sampled_from([0.0, 0.2, 0.4, 0.7]))
    return random_preorder(random.Random(seed), n, density)
