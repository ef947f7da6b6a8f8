import random

import pytest
from hypothesis import settings

from macell.core import RelationSymbol, Signature, Structure, make_structure

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


def directed_path(*names, bound=2):
    edges = list(zip(names, names[1:]))
    return Structure(Signature((RelationSymbol("E", 2, bound),)), names, {"E": edges})


@pytest.fixture
def path3():
    return directed_path("a", "b", "c")


@pytest.fixture
def five_edges():
    return make_structure(
        [e for i in range(5) for e in (f"a{i}", f"b{i}")],
        {"E": [(f"a{i}", f"b{i}") for i in range(5)]},
        bounds={"E": 1},
    )


@pytest.fixture
def two_blocks():
    from macell.generators import eqrel

    return eqrel(2, 3)


@pytest.fixture
def rng():
    return random.Random(0)
