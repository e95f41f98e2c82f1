import itertools
import os

from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", max_examples=200, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def brute_span(rows, q, ncols):
    """Every Z/q-combination of the rows, as a set of tuples."""
    span = {tuple([0] * ncols)}
    for r in rows:
        span = {tuple((a + c * b) % q for a, b in zip(v, r)) for v in span for c in range(q)}
    return span


def all_vectors(q, ncols):
    return itertools.product(range(q), repeat=ncols)


# one line per acceptance criterion, printed after the run
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[n])
