import sys
from pathlib import Path

from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

sys.path.insert(0, str(Path(__file__).parent))

from hlsplit.hlpair import HLProfile, random_hl  # noqa: E402

settings.register_profile(
    "default",
    deadline=None,
    max_examples=30,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.load_profile("default")

# acceptance lines collected while the run is in progress
ACCEPTANCE_LINES: list[str] = []


@st.composite
def small_profiles(draw, max_r: int = 3, max_dim: int = 12):
    r = draw(st.integers(0, max_r))
    q = draw(st.lists(st.integers(0, 2), min_size=r + 1, max_size=r + 1))
    q[r] = max(q[r], 1)
    while sum(qi * (i + 1) for i, qi in enumerate(q)) > max_dim:
        k = max(i for i, qi in enumerate(q) if qi and (i < r or qi > 1))
        q[k] -= 1
    return HLProfile(
        tuple(q),
        density=draw(st.sampled_from((0.0, 0.3, 0.7))),
        coefficient_bound=draw(st.sampled_from((1, 3))),
        denominator_bound=draw(st.sampled_from((1, 2))),
        noise_max_degree=draw(st.integers(0, 1)),
        gauge=draw(st.booleans()),
        scramble=draw(st.booleans()),
    )


@st.composite
def small_pairs(draw, max_r: int = 3, max_dim: int = 12):
    seed = draw(st.integers(0, 10**6))
    return random_hl(seed, draw(small_profiles(max_r, max_dim)))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
