import random

import pytest

from invfactors import glgroup as gg
from invfactors import records

from helpers import random_subgroup

# (m, p) pool with m * p <= 60, m >= 2
_PAIRS = [
    (m, p)
    for m in range(2, 31)
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29)
    if m * p <= 60
]


def build_preimage_corpus(count: int, seed: int = 20260810):
    """Randomized full-preimage subgroups: H0 mod m lifted to modulus m*p.

    Each entry is (m, p, H) where H is the full preimage of a random
    subgroup mod m inside GL2(Z/mpZ); by construction the level of the
    corresponding open group divides m.
    """
    rng = random.Random(seed)
    corpus = []
    for _ in range(count):
        m, p = rng.choice(_PAIRS)
        H0 = random_subgroup(rng, m)
        corpus.append((m, p, gg.full_preimage(H0, m * p)))
    return corpus


@pytest.fixture(scope="session")
def preimage_corpus():
    return build_preimage_corpus(50)


@pytest.fixture(scope="session")
def bundled_records():
    return records.load_bundled()


@pytest.fixture(scope="session")
def serre37_closure():
    return records.load_bundled("37.a1").closure()
