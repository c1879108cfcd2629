import numpy as np
import pytest

from multisne.affinity import AffinityMatrix


def make_affinity(P, active=None):
    """Wrap an arbitrary probability matrix as an AffinityMatrix."""
    P = np.asarray(P, dtype=float)
    n = P.shape[0]
    active = np.ones(n, dtype=bool) if active is None else np.asarray(active, dtype=bool)
    nan = np.full(n, np.nan)
    return AffinityMatrix(joint=P, conditional=P, sigmas=nan, achieved_perplexity=nan,
                          perplexity_target=float("nan"), active_mask=active,
                          clamped=np.zeros(n, dtype=bool))


def random_joint(rng, n, active=None):
    """Random symmetric zero-diagonal P summing to one over active pairs."""
    A = rng.random((n, n))
    P = A + A.T
    np.fill_diagonal(P, 0.0)
    if active is not None:
        P = P * np.outer(active, active)
    return P / P.sum()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_ACCEPTANCE = []


@pytest.fixture
def acceptance():
    """Record one PASS/FAIL line for an acceptance criterion."""
    def record(number, ok, detail):
        status = ok if isinstance(ok, str) else ("PASS" if ok else "FAIL")
        line = f"criterion {number}: {status} - {detail}"
        _ACCEPTANCE.append(line)
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE, key=lambda s: (len(s.split(":")[0]), s)):
            terminalreporter.write_line(line)
