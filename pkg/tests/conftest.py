import random
from fractions import Fraction

import pytest

from nilfill.algebra import catalog

# every catalog algebra with n <= 10
CATALOG_ALL = [
    "abelian(1)", "abelian(2)", "abelian(3)", "abelian(10)",
    "heisenberg(3)", "heisenberg(5)", "heisenberg(7)", "heisenberg(9)",
    "filiform(3)", "filiform(4)", "filiform(5)", "filiform(6)", "filiform(8)", "filiform(10)",
    "unitriangular(2)", "unitriangular(3)", "unitriangular(4)", "unitriangular(5)",
]
# n <= 6, used where sampling cost grows with n
CATALOG_SMALL = [
    "abelian(2)", "abelian(3)", "heisenberg(3)", "heisenberg(5)",
    "filiform(4)", "filiform(5)", "filiform(6)", "unitriangular(3)", "unitriangular(4)",
]


def rand_frac(rng, lo=-3, hi=3, denom=6):
    return Fraction(rng.randint(lo * denom, hi * denom), denom)


def rand_vec(rng, n, lo=-3, hi=3, denom=6):
    return [rand_frac(rng, lo, hi, denom) for _ in range(n)]


@pytest.fixture
def rng():
    return random.Random(1234)


@pytest.fixture(scope="session")
def heis():
    return catalog("heisenberg(3)")
