import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from bundlekit.generators import (cycle_graph,
                                  generate_extension_bundle,
                                  generate_horocycle_bundle,
                                  generate_product_bundle, grid_graph,
                                  path_graph)
from bundlekit.graph import Graph


@pytest.fixture(scope="session")
def p3():
    return path_graph(3)


@pytest.fixture(scope="session")
def p5():
    return path_graph(5)


@pytest.fixture(scope="session")
def c4():
    return cycle_graph(4)


@pytest.fixture(scope="session")
def c8():
    return cycle_graph(8)


@pytest.fixture(scope="session")
def tree9():
    return Graph.from_edges([(0, 1), (0, 2), (0, 3), (1, 4), (1, 5),
                             (2, 6), (3, 7), (7, 8)])


@pytest.fixture(scope="session")
def grid4():
    return grid_graph(4, 4)


@pytest.fixture(scope="session")
def grid8():
    return grid_graph(8, 8)


@pytest.fixture(scope="session")
def product_bundle():
    """P4 base x P5 fiber."""
    return generate_product_bundle(path_graph(4), path_graph(5))


@pytest.fixture(scope="session")
def product_bundle_wide():
    """P6 base x P11 fiber (room for ladder decomposition)."""
    return generate_product_bundle(path_graph(6), path_graph(11))


@pytest.fixture(scope="session")
def horo_small():
    """Tiny horocycle wedge for unit tests."""
    return generate_horocycle_bundle(T=2, W=8, h=1.0)


@pytest.fixture(scope="session")
def horo_mid():
    return generate_horocycle_bundle(T=3, W=8, h=1.0)


@pytest.fixture(scope="session")
def ext_identity():
    return generate_extension_bundle(2, "interval", 3)


@pytest.fixture(scope="session")
def ext_fib():
    """Hyperbolic monodromy, word growth at the golden ratio."""
    return generate_extension_bundle(4, "interval", 4, "a->ab,b->a")


@pytest.fixture(scope="session")
def box_control():
    """Z^2-box base with free fiber: the non-flaring control."""
    return generate_extension_bundle(2, "box", 3)
