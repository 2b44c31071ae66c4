"""bundlekit: coarse geometry of metric graph bundles, executable at desk scale.

Core pieces: unit-edge graphs with an exact BFS metric, a
delta-hyperbolicity toolkit, metric graph bundles with axiom checking and
example generators, barycenter-flow quasi-isometric sections, ladders
with coarse Lipschitz retractions, empirical flaring estimation, and a
batch CLI producing deterministic JSON reports.
"""

from ._kernels import BACKEND
from .graph import Graph, GraphError, cone_off, dump_graph, load_graph

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "Graph",
    "GraphError",
    "MetricGraphBundle",
    "BundleError",
    "cone_off",
    "dump_graph",
    "load_bundle",
    "load_graph",
    "verify_bundle",
    "__version__",
]

from .bundle import BundleError, MetricGraphBundle, load_bundle, \
    verify_bundle  # noqa: E402  (graph must initialize first)
