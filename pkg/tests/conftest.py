"""Shared random-instance generators and the acceptance summary hook.

The generators build weights from eigenvalues without going through the
package's feasibility test, so the tests can use them as an independent check.
"""
import numpy as np
import pytest

_ACCEPTANCE: list[str] = []


def feasible_weights(rng, b, k):
    """Weights majorized by ``b`` padded with zeros to length ``k``.

    A convex mix of permutations (doubly stochastic map) applied to the padded
    eigenvalues, blended with the uniform vector so every weight is positive.
    """
    b = np.asarray(b, dtype=float)
    padded = np.concatenate([b, np.zeros(k - b.size)])
    mix = rng.dirichlet(np.full(int(rng.integers(1, 4)), 0.5))
    c = sum(m * padded[rng.permutation(k)] for m in mix)
    lam = rng.uniform(0.3, 0.98)
    c = lam * c + (1 - lam) * padded.mean()
    return c * (b.sum() / c.sum())


def partial_sum_margin(b, c):
    """Least ``sum_{i<=p} b_i - sum_{i<=p} c_i`` over ``p < len(b)`` (both sorted); inf if none."""
    bs = np.sort(b)[::-1]
    cs = np.sort(c)[::-1]
    n = min(bs.size - 1, cs.size)
    if n < 1:
        return np.inf
    return float(np.min(np.cumsum(bs[:n]) - np.cumsum(cs[:n])))


def violating_weights(rng, b, k, p):
    """Positive weights with the right total whose top-``p`` sum beats ``b``'s by a margin."""
    b = np.sort(np.asarray(b, dtype=float))[::-1]
    head, tail = b[:p].sum(), b[p:].sum()
    margin = max(tail * 10 ** rng.uniform(-6, np.log10(0.9)), 1e-6)
    if margin >= tail:
        return None
    top = rng.dirichlet(np.ones(p)) * (head + margin)
    rest = rng.dirichlet(np.ones(k - p)) * (tail - margin)
    c = np.concatenate([top, rest])
    if np.any(c <= 0):
        return None
    return rng.permutation(c)


def random_orthogonal(rng, n):
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.sign(np.diag(r))


def random_eigenvalues(rng, n):
    return 10.0 * (1.0 - rng.random(n))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def acceptance():
    """Record a one-line verdict for the end-of-run summary."""

    def record(criterion, ok, detail):
        line = f"criterion {criterion}: {'PASS' if ok else 'FAIL'} | {detail}"
        _ACCEPTANCE.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)
