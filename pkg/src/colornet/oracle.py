"""Centralized ground truth computed with full knowledge of the network.

Nothing here is used by the node program; tests compare the two.  The
explicit-tree helpers at the bottom are deliberately naive and refuse
inputs where the tree would be large.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Sequence

from .netmodel import Coloring, PortNetwork, QuotientGraph, bfs_distances, is_tree
from .protocol import LeaderPath, NodeOutcome, Topology, Unsolvable
from .views import INFINITY, build_view, view_key


@dataclass(frozen=True)
class Partition:
    classes: tuple[int, ...]  # class id per node
    count: int
    t: int

    def members(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.count)]
        for v, c in enumerate(self.classes):
            out[c].append(v)
        return out

    def sizes(self) -> list[int]:
        return [len(m) for m in self.members()]


def _relabel(keys: Sequence) -> tuple[int, ...]:
    ids: dict = {}
    return tuple(ids.setdefault(key, len(ids)) for key in keys)


def color_partition(col: Coloring) -> Partition:
    classes = _relabel(col.colors)
    return Partition(classes, len(set(classes)), 0)


def refine(net: PortNetwork, part: Partition) -> Partition:
    """One refinement step: split by own class and the (port, port, class) triples around a node."""
    keys = []
    for v, ports in enumerate(net.adjacency):
        triples = sorted((p, q, part.classes[u]) for p, (u, q) in enumerate(ports))
        keys.append((part.classes[v], tuple(triples)))
    classes = _relabel(keys)
    return Partition(classes, len(set(classes)), part.t + 1)


def partitions(net: PortNetwork, col: Coloring, upto: int) -> list[Partition]:
    """Pi_0 .. Pi_upto."""
    out = [color_partition(col)]
    for _ in range(upto):
        out.append(refine(net, out[-1]))
    return out


def stable_partition(net: PortNetwork, col: Coloring) -> tuple[Partition, int]:
    """The partition by full colored views and the first ``t`` with Pi_t = Pi_{t+1}."""
    part = color_partition(col)
    while True:
        nxt = refine(net, part)
        if nxt.count == part.count:
            return part, part.t
        part = nxt


def quotient(net: PortNetwork, col: Coloring) -> tuple[QuotientGraph, tuple[int, ...]]:
    """Colored quotient graph with canonical class ids, and the class of every node.

    Classes are numbered in ascending byte order of their views' encodings at
    the stabilization depth.
    """
    part, t_star = stable_partition(net, col)
    members = part.members()
    reps = [m[0] for m in members]
    order = sorted(range(part.count), key=lambda c: view_key(build_view(net, col, reps[c], t_star)))
    canon = {old: new for new, old in enumerate(order)}
    class_of = tuple(canon[c] for c in part.classes)

    port_maps: dict[int, tuple] = {}
    for v, ports in enumerate(net.adjacency):
        here = tuple((class_of[u], q) for u, q in ports)
        a = class_of[v]
        if port_maps.setdefault(a, here) != here:
            raise AssertionError(f"nodes of class {a} disagree on their edges")
    edges = set()
    for a, ports in port_maps.items():
        for p, (b, q) in enumerate(ports):
            edges.add((a, p, b, q) if (a, p) <= (b, q) else (b, q, a, p))
    colors = [0] * part.count
    for v, a in enumerate(class_of):
        colors[a] = col[v]
    return QuotientGraph(tuple(colors), tuple(edges)), class_of


def feasible(q: QuotientGraph, k: int, alpha: int) -> bool:
    if k < 1:
        raise ValueError("k must be at least 1")
    small = sum(c == alpha for c in q.class_color) <= k // 2
    return not small or is_tree(q)


def validate_k(col: Coloring, alpha: int, k: int) -> bool:
    return col.size(alpha) <= k


def shortest_port_path(net: PortNetwork, source: int, target: int) -> tuple[int, ...]:
    """Shortest path as local ports, lexicographically smallest among the shortest."""
    best: dict[int, tuple[int, ...]] = {source: ()}
    frontier = [source]
    while target not in best:
        nxt = []
        for v in frontier:  # frontier is in lexicographic order of paths
            for p, (u, _) in enumerate(net.adjacency[v]):
                if u not in best:
                    best[u] = best[v] + (p,)
                    nxt.append(u)
        if not nxt:
            raise ValueError("target unreachable")
        frontier = nxt
    return best[target]


@dataclass(frozen=True)
class OracleReport:
    quotient: QuotientGraph
    class_of: tuple[int, ...]
    t_star: int
    sigma: int
    feasible: bool
    leader: int | None


def analyze(net: PortNetwork, col: Coloring, k: int, alpha: int) -> OracleReport:
    q, class_of = quotient(net, col)
    _, t_star = stable_partition(net, col)
    sigma = net.node_count // q.class_count
    ok = feasible(q, k, alpha)
    leader = class_of.index(0) if ok else None
    return OracleReport(q, class_of, t_star, sigma, ok, leader)


def oracle_solve(net: PortNetwork, col: Coloring, k: int, alpha: int, task: str) -> list[NodeOutcome]:
    """Reference outcome of every node."""
    if task not in ("le", "top"):
        raise ValueError("task must be 'le' or 'top'")
    if not validate_k(col, alpha, k):
        raise ValueError(f"k={k} is below the size {col.size(alpha)} of color {alpha}")
    report = analyze(net, col, k, alpha)
    n = net.node_count
    if not report.feasible:
        return [Unsolvable()] * n
    if report.sigma != 1:
        raise AssertionError("a solvable instance must have singleton classes")
    if task == "top":
        return [Topology(report.quotient, report.class_of[v]) for v in range(n)]
    return [LeaderPath(shortest_port_path(net, v, report.leader)) for v in range(n)]


# -- brute-force checkers -----------------------------------------------------------


def walk_end(net: PortNetwork, root: int, walk: Sequence[int]) -> int:
    v = root
    for p in walk:
        v = net.adjacency[v][p][0]
    return v


def high_copy_brute(net: PortNetwork, col: Coloring, root: int, walk: Sequence[int], l: int) -> bool:
    """Whether the tree node reached by ``walk`` has a copy at a smaller depth of V^l(root).

    Enumerates every walk shorter than ``walk``; refuses n > 6 or l > 12.
    """
    if net.node_count > 6 or l > 12:
        raise ValueError("high_copy_brute is limited to n <= 6 and l <= 12")
    if len(walk) > l:
        raise ValueError("walk is longer than the view depth")
    target = walk_end(net, root, walk)
    return any(
        walk_end(net, root, prefix) == target
        for length in range(len(walk))
        for prefix in _walks(net, root, length)
    )


def _walks(net: PortNetwork, root: int, length: int):
    if length == 0:
        yield ()
        return
    for prefix in _walks(net, root, length - 1):
        v = walk_end(net, root, prefix)
        for p in range(net.degree(v)):
            yield prefix + (p,)


def explicit_view(net, colors: Sequence[int], v: int, l: int):
    """The truncated view as nested tuples ``(color, ((p, q, subtree), ...))``."""
    if l == 0:
        return (colors[v], ())
    return (
        colors[v],
        tuple((p, q, explicit_view(net, colors, u, l - 1)) for p, (u, q) in enumerate(net.adjacency[v])),
    )


def explicit_encode(tree) -> str:
    color, kids = tree
    return f"({color}" + "".join(f" {p}:{q}{explicit_encode(t)}" for p, q, t in kids) + ")"


def explicit_dist(tree, alpha: int) -> float:
    """BFS over the explicit tree."""
    queue = deque([(tree, 0)])
    while queue:
        (color, kids), d = queue.popleft()
        if color == alpha:
            return d
        for _, _, t in kids:
            queue.append((t, d + 1))
    return INFINITY


def explicit_uncovered_leaf_exists(tree, k: int, alpha: int) -> bool:
    """Reference for the covering guard: materialize M as the set of certified tree paths."""

    def walk(node, depth: int, d_run: float) -> bool:
        d_run = max(d_run, explicit_dist(node, alpha))
        if d_run != INFINITY and depth >= 2 * (k + 1) * (d_run + 1):
            return False  # this node and everything below is in M
        _, kids = node
        if not kids:
            return True
        return any(walk(t, depth + 1, d_run) for _, _, t in kids)

    return walk(tree, 0, 0)


def explicit_tree_size(net: PortNetwork, l: int) -> int:
    """Upper bound on the explicit tree size, to gate the naive helpers."""
    dmax = max(net.degree(v) for v in range(net.node_count))
    return sum(dmax**i for i in range(l + 1))


def all_walks(net: PortNetwork, root: int, l: int):
    """Every walk of length <= l from ``root`` (exponential)."""
    for length in range(l + 1):
        yield from _walks(net, root, length)


def nodes_within(net: PortNetwork, v: int, radius: int) -> set[int]:
    dist = bfs_distances(net.adjacency, v)
    return {u for u, d in enumerate(dist) if d <= radius}


def brute_equal_views(net: PortNetwork, col: Coloring, t: int) -> tuple[int, ...]:
    """Classes by explicit equality of depth-t views (for small inputs)."""
    encodings = [explicit_encode(explicit_view(net, col.colors, v, t)) for v in range(net.node_count)]
    return _relabel(encodings)
