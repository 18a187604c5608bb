import numpy as np
import pytest

from lfcascade.lightfield import LightField
from lfcascade.synth import Layer, SceneSpec, generate_lf, square_mask


def random_lf(shape=(3, 3, 8, 8, 1), seed=0) -> LightField:
    rng = np.random.default_rng(seed)
    return LightField(rng.random(shape, dtype=np.float32))


@pytest.fixture
def small_lf():
    return random_lf((3, 3, 4, 4, 1))


@pytest.fixture(scope="session")
def ramp_plane():
    """Single ramp-textured plane at disparity 0.75, 5x5 views, 40x40."""
    return generate_lf(SceneSpec([Layer("ramp", 0.75)], angular=(5, 5), size=(40, 40), seed=1))


@pytest.fixture(scope="session")
def two_layer_small():
    size = (48, 48)
    spec = SceneSpec(
        [Layer("noise", 2.0, alpha=square_mask(size, 24)), Layer("noise", 0.0)],
        angular=(5, 5),
        size=size,
        seed=3,
    )
    return generate_lf(spec)


# Acceptance criteria report one line each; collected here and printed at the end of the run.
ACCEPTANCE_LINES: list[str] = []


def record_acceptance(number: int, title: str, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {title} | {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda l: int(l.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
