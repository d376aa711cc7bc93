import numpy as np
import pytest

from citefield import synth

# acceptance criterion id -> (passed, detail); filled by test_acceptance
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[cid]
        terminalreporter.write_line(f"criterion {cid:>2}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def planted5():
    return synth.generate_planted(synth.PlantedSpec(n_fields=5, journals_per_field=20, seed=7))


@pytest.fixture(scope="session")
def planted3():
    spec = synth.PlantedSpec(n_fields=3, journals_per_field=20, generalist_count=1, silent_count=2, seed=3)
    return synth.generate_planted(spec)


def random_counts(rng, n, density=0.5, hi=9):
    a = rng.integers(1, hi + 1, size=(n, n))
    return np.where(rng.random((n, n)) < density, a, 0)
