"""Network families: rings, stretched rings, chordal rings, and small corpora."""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence

from .netmodel import Coloring, NetworkError, PortNetwork

Instance = tuple[PortNetwork, Coloring]


@dataclass(frozen=True)
class RingSpec:
    """Ring on ``v_0..v_{n-1}``; ``ports[i]`` is (port at v_i, port at v_{i+1 mod n})."""

    n: int
    ports: tuple[tuple[int, int], ...]
    colors: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "ports", tuple(tuple(p) for p in self.ports))
        object.__setattr__(self, "colors", tuple(self.colors))
        if self.n < 3:
            raise NetworkError("a ring needs at least 3 nodes")
        if len(self.ports) != self.n or len(self.colors) != self.n:
            raise NetworkError("ring spec needs one port pair and one color per node")
        for i in range(self.n):
            incoming = self.ports[i - 1][1]
            outgoing = self.ports[i][0]
            if {incoming, outgoing} != {0, 1}:
                raise NetworkError(f"ring node {i} gets ports {incoming} and {outgoing}, not 0 and 1")

    def color_sizes(self) -> tuple[int, ...]:
        count = max(self.colors)
        return tuple(self.colors.count(c) for c in range(1, count + 1))


def gen_ring(spec: RingSpec) -> Instance:
    edges = [(i, p, (i + 1) % spec.n, q) for i, (p, q) in enumerate(spec.ports)]
    return PortNetwork.from_edges(spec.n, edges), Coloring(spec.colors)


def oriented_spec(colors: Sequence[int]) -> RingSpec:
    """Port 0 leads forward and port 1 backward at every node."""
    return RingSpec(len(colors), ((0, 1),) * len(colors), tuple(colors))


def oriented_ring(colors: Sequence[int]) -> Instance:
    return gen_ring(oriented_spec(colors))


def alternating_ring(colors: Sequence[int]) -> Instance:
    """Even ring where each edge carries the same port at both ends (0,0 then 1,1 ...)."""
    n = len(colors)
    if n % 2:
        raise NetworkError("alternating ports need an even ring")
    return gen_ring(RingSpec(n, tuple((i % 2, i % 2) for i in range(n)), tuple(colors)))


def stretch_spec(base: RingSpec, T: int, x_prime: Sequence[int]) -> RingSpec:
    """A longer ring in which two nodes see the same depth-``T`` colored view as ``v_0`` of ``base``.

    The first ``2n*ceil(T/n) + n`` edges and colors repeat ``base``
    cyclically.  Later edges keep repeating the base pattern, the closing
    edge takes whichever port ``v'_0`` still lacks, and the leftover nodes
    are colored so that color ``j`` ends with ``x_prime[j-1]`` nodes.
    The first leftover node gets the color of ``v_0`` when that color has
    room, since the second witness sees it when ``n`` divides ``T``; the
    rest follow in ascending color order.
    """
    if T < 0:
        raise ValueError("T must be non-negative")
    n = base.n
    sizes = base.color_sizes()
    if len(x_prime) != len(sizes):
        raise ValueError(f"x_prime needs {len(sizes)} entries, one per color")
    laps = math.ceil(T / n)
    for j, (x, xp) in enumerate(zip(sizes, x_prime), start=1):
        if xp < 2 * x * laps + x:
            raise ValueError(f"color {j}: target {xp} is below {2 * x * laps + x}")
    copied = 2 * n * laps + n
    n_new = sum(x_prime)
    ports = [base.ports[i % n] for i in range(n_new)]
    ports[-1] = (ports[-1][0], 1 - ports[0][0])
    colors = [base.colors[i % n] for i in range(copied)]
    leftover = [j for j, xp in enumerate(x_prime, start=1) for _ in range(xp - colors.count(j))]
    if base.colors[0] in leftover:
        leftover.remove(base.colors[0])
        leftover.insert(0, base.colors[0])
    return RingSpec(n_new, tuple(ports), tuple(colors + leftover))


def gen_stretch(base: RingSpec, T: int, x_prime: Sequence[int]) -> Instance:
    return gen_ring(stretch_spec(base, T, x_prime))


def stretch_witnesses(n: int, T: int) -> tuple[int, int]:
    """The two nodes of the stretched ring whose depth-T views match ``v_0`` of the base.

    When ``n`` divides ``T`` the second one also sees the first leftover
    node, so its view matches only if that node carries the color of ``v_0``.
    """
    first = n * math.ceil(T / n)
    return first, first + n


def chordal_edges(n_prime: int, d: int) -> list[tuple[int, int, int, int]]:
    if not 1 <= d or not 2 * d < n_prime:
        raise NetworkError(f"chordal ring needs 1 <= d < n'/2, got n'={n_prime}, d={d}")
    return [(i, j - 1, (i + j) % n_prime, d + j - 1) for i in range(n_prime) for j in range(1, d + 1)]


def gen_chordal(n_prime: int, d: int) -> PortNetwork:
    """``v_i`` joins ``v_{i+j}`` for ``j = 1..d``; port ``j-1`` at ``v_i``, ``d+j-1`` at ``v_{i+j}``."""
    return PortNetwork.from_edges(n_prime, chordal_edges(n_prime, d))


def single_alpha(n: int, node: int = 0, alpha: int = 1, other: int = 2) -> Coloring:
    return Coloring(tuple(alpha if v == node else other for v in range(n)))


def gen_pendant_family(n: int, d: int, k: int, alpha: int = 1, other: int = 2) -> tuple[Instance, Instance]:
    """The small/large pair used for the lower bound in ``k * D``.

    Small: ``G(n, d)`` with ``v_0`` the only ``alpha`` node.  Large:
    ``G(kn, d)`` with ``alpha`` at every ``v'_{nj}`` plus a pendant node
    ``kn`` hanging off ``v'_0`` at its port ``2d`` (port 0 on the pendant).
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    small = (gen_chordal(n, d), single_alpha(n, 0, alpha, other))
    big_n = k * n
    edges = chordal_edges(big_n, d) + [(0, 2 * d, big_n, 0)]
    colors = tuple(alpha if v < big_n and v % n == 0 else other for v in range(big_n + 1))
    return small, (PortNetwork.from_edges(big_n + 1, edges), Coloring(colors))


def pendant_twin(n: int, k: int) -> int:
    """The node of the large network that mimics ``v_0`` of the small one."""
    return (k // 2) * n


# -- small corpora ----------------------------------------------------------------


def canonical_form(net: PortNetwork, col: Coloring) -> tuple:
    """Isomorphism-invariant key for a connected port-labeled colored network.

    A port-preserving isomorphism is fixed by the image of one node, so
    relabeling nodes in port-ordered BFS order from every root and taking
    the minimum gives a canonical key.
    """
    best = None
    adjacency = net.adjacency
    for root in range(net.node_count):
        label = {root: 0}
        order = [root]
        for v in order:
            for u, _ in adjacency[v]:
                if u not in label:
                    label[u] = len(order)
                    order.append(u)
        key = tuple((col[v], tuple((label[u], q) for u, q in adjacency[v])) for v in order)
        if best is None or key < best:
            best = key
    return best


def connected_graphs(n: int, max_edges: Optional[int] = None) -> Iterator[tuple[tuple[int, int], ...]]:
    """Every connected simple graph on nodes ``0..n-1`` as an edge list (labeled, not deduplicated)."""
    pairs = list(itertools.combinations(range(n), 2))
    top = len(pairs) if max_edges is None else min(max_edges, len(pairs))
    for m in range(n - 1, top + 1):
        for chosen in itertools.combinations(pairs, m):
            if _connected(n, chosen):
                yield chosen


def _connected(n: int, edges: Sequence[tuple[int, int]]) -> bool:
    parent = list(range(n))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in edges:
        parent[find(a)] = find(b)
    return len({find(v) for v in range(n)}) == 1


def colorings(n: int, max_colors: int) -> Iterator[tuple[int, ...]]:
    """Colorings onto ``1..c`` for every ``c <= max_colors``."""
    for c in range(1, max_colors + 1):
        for colors in itertools.product(range(1, c + 1), repeat=n):
            if len(set(colors)) == c:
                yield colors


def port_networks(n: int, graph: Sequence[tuple[int, int]]) -> Iterator[PortNetwork]:
    """Every port labeling of a simple graph."""
    incident: list[list[int]] = [[] for _ in range(n)]
    for e, (a, b) in enumerate(graph):
        incident[a].append(e)
        incident[b].append(e)
    for perms in itertools.product(*(itertools.permutations(range(len(inc))) for inc in incident)):
        port_of = {}
        for v, perm in enumerate(perms):
            for e, p in zip(incident[v], perm):
                port_of[(e, v)] = p
        yield PortNetwork.from_edges(n, [(a, port_of[(e, a)], b, port_of[(e, b)]) for e, (a, b) in enumerate(graph)])


def small_corpus(n: int, max_colors: int = 2, max_edges: Optional[int] = None) -> Iterator[Instance]:
    """Connected port-labeled colored networks on ``n`` nodes, one per isomorphism class."""
    seen: set = set()
    for graph in connected_graphs(n, max_edges):
        for net in port_networks(n, graph):
            for colors in colorings(n, max_colors):
                col = Coloring(colors)
                key = canonical_form(net, col)
                if key not in seen:
                    seen.add(key)
                    yield net, col


def random_network(rng: random.Random, n: int, extra_edges: int = 0, max_colors: int = 2) -> Instance:
    """Random spanning tree plus up to ``extra_edges`` chords, random ports, random surjective coloring."""
    if n < 2:
        raise ValueError("need at least 2 nodes")
    edges = {tuple(sorted((v, rng.randrange(v)))) for v in range(1, n)}
    missing = [p for p in itertools.combinations(range(n), 2) if p not in edges]
    edges |= set(rng.sample(missing, min(extra_edges, len(missing))))
    incident: list[list[int]] = [[] for _ in range(n)]
    edge_list = sorted(edges)
    for e, (a, b) in enumerate(edge_list):
        incident[a].append(e)
        incident[b].append(e)
    port_of = {}
    for v, inc in enumerate(incident):
        ports = list(range(len(inc)))
        rng.shuffle(ports)
        port_of.update({(e, v): p for e, p in zip(inc, ports)})
    net = PortNetwork.from_edges(n, [(a, port_of[(e, a)], b, port_of[(e, b)]) for e, (a, b) in enumerate(edge_list)])
    c = rng.randint(1, min(max_colors, n))
    colors = list(range(1, c + 1)) + [rng.randint(1, c) for _ in range(n - c)]
    rng.shuffle(colors)
    return net, Coloring(tuple(colors))
