import itertools

import pytest

ACCEPTANCE_LINES: list[str] = []


def naive_step(cells, m):
    """Car-by-car update on a plain list; independent of the package code."""
    L = len(cells)
    cars = [i for i, c in enumerate(cells) if c]
    out = [0] * L
    for k, x in enumerate(cars):
        if len(cars) == 1:
            gap = L - 1
        else:
            gap = (cars[(k + 1) % len(cars)] - x - 1) % L
        out[(x + min(gap, m)) % L] = 1
    return out


def naive_cyclic_count(cells, block):
    L, b = len(cells), len(block)
    return sum(all(cells[(i + j) % L] == block[j] for j in range(b)) for i in range(L))


def all_words(p):
    return ["".join(w) for w in itertools.product("01", repeat=p)]


@pytest.fixture
def record_criterion():
    def record(number: int, passed: bool, detail: str) -> None:
        ACCEPTANCE_LINES.append(f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}")
        print(ACCEPTANCE_LINES[-1])

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
