"""Fully dynamic DFS tree maintenance by batched subtree rerooting."""

from .graph import PSEUDO_ROOT, DynamicGraph, GraphError, format_graph, parse_graph
from .harness import HarnessFailure, random_harness
from .metrics import Metrics, batch_bound, ceil_log2
from .reduction import Engine, RerootTask, Update, UpdateError, ValidityError, parse_updates, plan_update
from .reroot import Rerooter, RerootError
from .structure_d import EdgeQuery, MemoryBackend, StreamBackend, StructureD, query_one
from .tree import DfsTree, TreePath, static_dfs

__all__ = [
    "PSEUDO_ROOT", "DynamicGraph", "GraphError", "format_graph", "parse_graph",
    "HarnessFailure", "random_harness", "Metrics", "batch_bound", "ceil_log2",
    "Engine", "RerootTask", "Update", "UpdateError", "ValidityError", "parse_updates", "plan_update",
    "Rerooter", "RerootError", "EdgeQuery", "MemoryBackend", "StreamBackend", "StructureD", "query_one",
    "DfsTree", "TreePath", "static_dfs",
]
