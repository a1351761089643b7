import itertools
from functools import lru_cache

import numpy as np
import pytest

from ncca.ca import NC_RULES
from ncca.oracle import _conserving_mask

SAMPLE_NCCA_4 = (136, 252, 238, 192)
EXAMPLE_ACCEPTED = (192, 136, 184, 252, 204, 238)
EXAMPLE_REJECTED = (252, 204, 192, 136, 184, 238)

ACCEPTANCE_LINES: list[str] = []


@lru_cache(maxsize=None)
def all_nc_vectors(n: int) -> tuple[tuple[int, ...], ...]:
    return tuple(itertools.product(NC_RULES, repeat=n))


@lru_cache(maxsize=None)
def batch_oracle(vectors: tuple[tuple[int, ...], ...]) -> tuple[bool, ...]:
    """Brute-force verdicts for many equal-length vectors at once."""
    arr = np.array(vectors, dtype=np.int64)
    return tuple(bool(x) for x in _conserving_mask(arr, arr.shape[1]))


@pytest.fixture(scope="session")
def n5_suite():
    vectors = all_nc_vectors(5)
    return vectors, batch_oracle(vectors)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
