"""Colored port-labeled networks, quotient multigraphs, and the text format.

A network on ``n`` nodes is stored as an adjacency table: ``adjacency[v][p]``
is the pair ``(u, q)`` meaning that port ``p`` of ``v`` leads to ``u``, where
the same edge arrives at port ``q``.  Ports at a node of degree ``d`` are
therefore exactly ``0..d-1`` by construction.

File format (line based, ``#`` starts a comment line)::

    n 3
    colors 1 1 1
    edge 0 0 1 1
    edge 1 0 2 1
    edge 2 0 0 1

An optional ``c <count>`` line may follow ``n`` to declare the number of
colors explicitly; otherwise it is the largest color used.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence, Union

Adjacency = tuple[tuple[tuple[int, int], ...], ...]


class NetworkError(ValueError):
    """An invalid network, coloring, or network file."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.message = message
        self.line = line
        self.column = column
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "")
            message = f"{where}: {message}"
        super().__init__(message)


def _components(adjacency: Adjacency) -> int:
    n = len(adjacency)
    if n == 0:
        return 0
    seen = [False] * n
    count = 0
    for start in range(n):
        if seen[start]:
            continue
        count += 1
        seen[start] = True
        queue = deque([start])
        while queue:
            v = queue.popleft()
            for u, _ in adjacency[v]:
                if not seen[u]:
                    seen[u] = True
                    queue.append(u)
    return count


def _check_pairing(adjacency: Adjacency) -> None:
    n = len(adjacency)
    for v, ports in enumerate(adjacency):
        for p, (u, q) in enumerate(ports):
            if not 0 <= u < n:
                raise NetworkError(f"node {v} port {p} points to unknown node {u}")
            if not 0 <= q < len(adjacency[u]):
                raise NetworkError(f"node {v} port {p} points to missing port {q} of node {u}")
            if adjacency[u][q] != (v, p):
                raise NetworkError(
                    f"asymmetric pairing: {v}:{p} -> {u}:{q} but {u}:{q} -> "
                    f"{adjacency[u][q][0]}:{adjacency[u][q][1]}"
                )


@dataclass(frozen=True)
class PortNetwork:
    """A simple connected undirected graph with a port numbering at every node."""

    adjacency: Adjacency

    def __post_init__(self) -> None:
        adjacency = tuple(tuple((int(u), int(q)) for u, q in ports) for ports in self.adjacency)
        object.__setattr__(self, "adjacency", adjacency)
        if len(adjacency) < 2:
            raise NetworkError("a network needs at least two nodes")
        _check_pairing(adjacency)
        for v, ports in enumerate(adjacency):
            targets = [u for u, _ in ports]
            if v in targets:
                raise NetworkError(f"self-loop at node {v}")
            if len(set(targets)) != len(targets):
                raise NetworkError(f"parallel edges at node {v}")
        if _components(adjacency) != 1:
            raise NetworkError("network is disconnected")

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int, int, int]]) -> "PortNetwork":
        """Build from ``(u, p_u, v, p_v)`` tuples, each undirected edge listed once."""
        slots: list[dict[int, tuple[int, int]]] = [{} for _ in range(n)]
        for u, pu, v, pv in edges:
            for a, pa in ((u, pu), (v, pv)):
                if not 0 <= a < n:
                    raise NetworkError(f"edge endpoint {a} out of range 0..{n - 1}")
                if pa < 0:
                    raise NetworkError(f"negative port {pa} at node {a}")
            if (u, pu) == (v, pv):
                raise NetworkError(f"self-loop at node {u}")
            for a, pa, b, pb in ((u, pu, v, pv), (v, pv, u, pu)):
                if pa in slots[a]:
                    raise NetworkError(f"port {pa} of node {a} used twice")
                slots[a][pa] = (b, pb)
        adjacency = []
        for v, ports in enumerate(slots):
            if sorted(ports) != list(range(len(ports))):
                raise NetworkError(
                    f"ports of node {v} are {sorted(ports)}, expected 0..{len(ports) - 1}"
                )
            adjacency.append(tuple(ports[p] for p in range(len(ports))))
        return cls(tuple(adjacency))

    @property
    def node_count(self) -> int:
        return len(self.adjacency)

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    def edges(self) -> list[tuple[int, int, int, int]]:
        """Each edge once as ``(u, p, v, q)`` with ``(u, p) < (v, q)``, sorted."""
        out = []
        for v, ports in enumerate(self.adjacency):
            for p, (u, q) in enumerate(ports):
                if (v, p) < (u, q):
                    out.append((v, p, u, q))
        out.sort()
        return out

    @property
    def edge_count(self) -> int:
        return sum(len(ports) for ports in self.adjacency) // 2


@dataclass(frozen=True)
class Coloring:
    """Node colors, surjective onto ``1..color_count``."""

    colors: tuple[int, ...]
    color_count: int = 0

    def __post_init__(self) -> None:
        colors = tuple(int(c) for c in self.colors)
        object.__setattr__(self, "colors", colors)
        if not colors:
            raise NetworkError("empty coloring")
        if min(colors) < 1:
            raise NetworkError(f"colors must be positive, got {min(colors)}")
        count = self.color_count or max(colors)
        object.__setattr__(self, "color_count", count)
        unused = sorted(set(range(1, count + 1)) - set(colors))
        if unused:
            raise NetworkError(f"coloring is not surjective: color {unused[0]} unused")
        if max(colors) > count:
            raise NetworkError(f"color {max(colors)} exceeds declared count {count}")

    def __len__(self) -> int:
        return len(self.colors)

    def __getitem__(self, v: int) -> int:
        return self.colors[v]

    def size(self, color: int) -> int:
        return self.colors.count(color)


def _is_connected_multigraph(adjacency: Adjacency) -> bool:
    return _components(adjacency) == 1


@dataclass(frozen=True)
class QuotientGraph:
    """Colored port-labeled multigraph; self-loops and multi-edges are allowed.

    ``edges`` holds ``(a, p, b, q)`` with ``(a, p) <= (b, q)``; a self-loop
    entered and left through the same port appears as ``(a, p, a, p)``.
    """

    class_color: tuple[int, ...]
    edges: tuple[tuple[int, int, int, int], ...]
    adjacency: Adjacency = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        colors = tuple(int(c) for c in self.class_color)
        norm = set()
        for a, p, b, q in self.edges:
            a, p, b, q = int(a), int(p), int(b), int(q)
            if (b, q) < (a, p):
                a, p, b, q = b, q, a, p
            norm.add((a, p, b, q))
        edges = tuple(sorted(norm))
        object.__setattr__(self, "class_color", colors)
        object.__setattr__(self, "edges", edges)
        k = len(colors)
        slots: list[dict[int, tuple[int, int]]] = [{} for _ in range(k)]
        for a, p, b, q in edges:
            if not (0 <= a < k and 0 <= b < k):
                raise NetworkError(f"quotient edge {(a, p, b, q)} names an unknown class")
            for x, px, y, py in {(a, p, b, q), (b, q, a, p)}:
                if px in slots[x]:
                    raise NetworkError(f"port {px} of class {x} used twice")
                slots[x][px] = (y, py)
        adjacency = []
        for a, ports in enumerate(slots):
            if sorted(ports) != list(range(len(ports))):
                raise NetworkError(f"ports of class {a} are {sorted(ports)}, not contiguous")
            adjacency.append(tuple(ports[p] for p in range(len(ports))))
        adjacency_t = tuple(adjacency)
        if k == 0 or not _is_connected_multigraph(adjacency_t):
            raise NetworkError("quotient graph is not connected")
        object.__setattr__(self, "adjacency", adjacency_t)

    @property
    def class_count(self) -> int:
        return len(self.class_color)

    @property
    def colors(self) -> tuple[int, ...]:
        return self.class_color

    def to_json(self) -> dict:
        return {
            "classes": [{"id": a, "color": c} for a, c in enumerate(self.class_color)],
            "edges": [list(e) for e in self.edges],
        }

    @classmethod
    def from_json(cls, data: dict) -> "QuotientGraph":
        classes = sorted(data["classes"], key=lambda c: c["id"])
        if [c["id"] for c in classes] != list(range(len(classes))):
            raise NetworkError("quotient class ids must be 0..m-1")
        return cls(tuple(c["color"] for c in classes), tuple(tuple(e) for e in data["edges"]))

    @classmethod
    def from_network(cls, net: PortNetwork, col: Coloring) -> "QuotientGraph":
        """The network itself viewed as a multigraph (one class per node)."""
        return cls(col.colors, tuple(net.edges()))


Graph = Union[PortNetwork, QuotientGraph]


def is_tree(q: QuotientGraph) -> bool:
    """True iff ``q`` is connected and has no self-loops, no multi-edges, and m = |Q| - 1."""
    pairs = set()
    for a, _, b, _ in q.edges:
        if a == b:
            return False
        key = (a, b) if a < b else (b, a)
        if key in pairs:
            return False
        pairs.add(key)
    return len(q.edges) == q.class_count - 1 and _is_connected_multigraph(q.adjacency)


def bfs_distances(adjacency: Adjacency, source: int) -> list[int]:
    dist = [-1] * len(adjacency)
    dist[source] = 0
    queue = deque([source])
    while queue:
        v = queue.popleft()
        for u, _ in adjacency[v]:
            if dist[u] < 0:
                dist[u] = dist[v] + 1
                queue.append(u)
    return dist


def diameter(net: Graph) -> int:
    """Exact diameter by BFS from every node."""
    return max(max(bfs_distances(net.adjacency, v)) for v in range(len(net.adjacency)))


# -- text format -------------------------------------------------------------


def _ints(tokens: Sequence[str], line: int, starts: Sequence[int]) -> list[int]:
    out = []
    for tok, col in zip(tokens, starts):
        try:
            value = int(tok)
        except ValueError:
            raise NetworkError(f"expected an integer, got {tok!r}", line, col) from None
        if value < 0:
            raise NetworkError(f"expected a non-negative integer, got {tok!r}", line, col)
        out.append(value)
    return out


def _tokenize(text: str) -> Iterator[tuple[int, list[str], list[int]]]:
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        tokens, starts = [], []
        pos = 0
        for tok in raw.split():
            pos = raw.index(tok, pos)
            tokens.append(tok)
            starts.append(pos + 1)
            pos += len(tok)
        yield lineno, tokens, starts


def parse_network(text: Union[str, bytes]) -> tuple[PortNetwork, Coloring]:
    """Parse and validate a network file.  Errors carry line/column positions."""
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise NetworkError(f"input is not UTF-8: {exc}") from None
    lines = list(_tokenize(text))
    if not lines:
        raise NetworkError("empty input", 1, 1)

    it = iter(lines)
    lineno, tokens, starts = next(it)
    if tokens[0] != "n" or len(tokens) != 2:
        raise NetworkError("first line must be 'n <count>'", lineno, starts[0])
    (n,) = _ints(tokens[1:], lineno, starts[1:])
    if n < 1:
        raise NetworkError("node count must be positive", lineno, starts[1])

    declared = 0
    lineno, tokens, starts = next(it, (lineno + 1, [""], [1]))
    if tokens[0] == "c":
        if len(tokens) != 2:
            raise NetworkError("expected 'c <count>'", lineno, starts[0])
        (declared,) = _ints(tokens[1:], lineno, starts[1:])
        lineno, tokens, starts = next(it, (lineno + 1, [""], [1]))
    if tokens[0] != "colors":
        raise NetworkError("expected 'colors <c_1> ... <c_n>'", lineno, starts[0])
    if len(tokens) - 1 != n:
        raise NetworkError(f"expected {n} colors, got {len(tokens) - 1}", lineno, starts[0])
    colors = _ints(tokens[1:], lineno, starts[1:])
    for value, col in zip(colors, starts[1:]):
        if value < 1:
            raise NetworkError("colors must be positive", lineno, col)
    coloring_line = lineno

    edges = []
    for lineno, tokens, starts in it:
        if tokens[0] != "edge":
            raise NetworkError(f"unexpected keyword {tokens[0]!r}", lineno, starts[0])
        if len(tokens) != 5:
            raise NetworkError("expected 'edge <u> <p_u> <v> <p_v>'", lineno, starts[0])
        u, pu, v, pv = _ints(tokens[1:], lineno, starts[1:])
        for node, col in ((u, starts[1]), (v, starts[3])):
            if node >= n:
                raise NetworkError(f"node {node} out of range 0..{n - 1}", lineno, col)
        edges.append((u, pu, v, pv, lineno))

    try:
        net = PortNetwork.from_edges(n, [e[:4] for e in edges])
    except NetworkError as exc:
        raise NetworkError(exc.message, _blame(edges, exc.message)) from None
    try:
        col = Coloring(tuple(colors), declared)
    except NetworkError as exc:
        raise NetworkError(exc.message, coloring_line) from None
    return net, col


def _blame(edges, message: str) -> int | None:
    # best effort: point at the last edge line mentioning the offending node
    words = message.replace(":", " ").split()
    for i, w in enumerate(words):
        if w == "node" and i + 1 < len(words) and words[i + 1].isdigit():
            node = int(words[i + 1])
            for u, _, v, _, lineno in reversed(edges):
                if node in (u, v):
                    return lineno
    return edges[-1][4] if edges else None


def serialize_network(net: PortNetwork, col: Coloring) -> str:
    """Canonical text form; ``parse_network(serialize_network(x)) == x``."""
    if len(col) != net.node_count:
        raise NetworkError("coloring size does not match the network")
    lines = [f"n {net.node_count}"]
    lines.append("colors " + " ".join(str(c) for c in col.colors))
    lines.extend(f"edge {u} {p} {v} {q}" for u, p, v, q in net.edges())
    return "\n".join(lines) + "\n"
