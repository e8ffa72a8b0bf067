import os

import pytest
from hypothesis import HealthCheck, settings

# derandomized so that every run explores the same examples
settings.register_profile(
    "repro",
    derandomize=True,
    deadline=None,
    max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "repro"))


@pytest.fixture(autouse=True)
def _default_rtol(monkeypatch):
    monkeypatch.delenv("CONECERT_RTOL", raising=False)
