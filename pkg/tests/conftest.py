from collections import OrderedDict, deque

import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=100)
settings.load_profile("default")


def reference_misses(blocks, sets, ways, policy="FIFO"):
    """Dictionary-and-deque simulator; shares no code with the package."""
    if policy == "FIFO":
        contents = [deque() for _ in range(sets)]
    else:
        contents = [OrderedDict() for _ in range(sets)]
    misses = 0
    for b in blocks:
        cache = contents[b % sets]
        if b in cache:
            if policy == "LRU":
                cache.move_to_end(b)
            continue
        misses += 1
        if len(cache) == ways:
            if policy == "FIFO":
                cache.popleft()
            else:
                cache.popitem(last=False)
        if policy == "FIFO":
            cache.append(b)
        else:
            cache[b] = None
    return misses


@pytest.fixture
def reference():
    return reference_misses


BELADY = [1, 2, 3, 4, 1, 2, 5, 1, 2, 3, 4, 5]


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES: dict[int, str] = {}


def record_criterion(number: int, passed: bool, detail: str) -> None:
    ACCEPTANCE_LINES[number] = f"criterion {number}: {'PASS' if passed else 'FAIL'} - {detail}"


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])
