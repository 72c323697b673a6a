"""Truncated colored views stored as hash-consed DAGs.

A depth-``l`` view of a node is a port-labeled rooted tree of size up to
``deg**l``.  Here each distinct subtree is interned once, so a view is a
:class:`ViewRef` whose children are again interned records; two views are
equal iff they are the same object.  The tree text form produced by
:func:`encode` follows the grammar::

    view := "(" color { " " port ":" port view } ")"

with children in increasing local-port order.  Its length is exponential
in the depth, so everything that only needs to *compare* or *inspect* views
(:func:`compare_views`, :func:`dist_to_color`, :func:`uncovered_leaf_exists`)
works on the DAG directly.
"""

from __future__ import annotations

import math
import sys
import threading
import weakref
from functools import cmp_to_key, lru_cache
from typing import Iterable, Optional, Sequence, Union

from .netmodel import Adjacency, Coloring, Graph, QuotientGraph

INFINITY = math.inf

# view recursion follows depth, which reaches a few hundred on the larger families
if sys.getrecursionlimit() < 20000:
    sys.setrecursionlimit(20000)

ViewPath = tuple[tuple[int, int], ...]


class ViewError(ValueError):
    pass


class ViewRef:
    """Interned view record.  Construct through :func:`leaf` / :func:`assemble`."""

    __slots__ = ("color", "children", "depth", "uid", "_dist", "_trunc", "_cmp", "__weakref__")

    def __init__(self, color: int, children: tuple, depth: int, uid: int):
        self.color = color
        self.children = children
        self.depth = depth
        self.uid = uid
        self._dist: dict = {}
        self._trunc: dict = {}
        self._cmp: dict = {}

    def __repr__(self) -> str:
        if self.depth <= 2:
            return f"ViewRef{encode(self)}"
        return f"<ViewRef #{self.uid} color={self.color} depth={self.depth}>"

    def __lt__(self, other: "ViewRef") -> bool:
        return compare_views(self, other) < 0

    def __reduce__(self):
        # rebuild through the interning store so unpickled views stay canonical
        return (decode, (encode(self),))


class _Store:
    """Append-only interning table, safe to use from several threads."""

    def __init__(self) -> None:
        self._table: "weakref.WeakValueDictionary[tuple, ViewRef]" = weakref.WeakValueDictionary()
        self._lock = threading.Lock()
        self._next = 0

    def intern(self, color: int, children: tuple) -> ViewRef:
        key = (color, tuple([(q, c.uid) for q, c in children]))
        with self._lock:
            ref = self._table.get(key)
            if ref is None:
                depth = children[0][1].depth + 1 if children else 0
                ref = ViewRef(color, children, depth, self._next)
                self._next += 1
                self._table[key] = ref
            return ref

    def __len__(self) -> int:
        return len(self._table)


_STORE = _Store()


def leaf(color: int) -> ViewRef:
    """The depth-0 view: a single record carrying ``color``."""
    return _STORE.intern(int(color), ())


def assemble(color: int, neighbor_views: Sequence[tuple[int, ViewRef]]) -> ViewRef:
    """Own depth ``t+1`` view from the neighbors' depth ``t`` views.

    ``neighbor_views[p]`` is ``(q, view)``: the view received through local
    port ``p``, which left the neighbor through its port ``q``.
    """
    if not neighbor_views:
        raise ViewError("cannot assemble a view without neighbors")
    children = tuple(neighbor_views)
    depth = children[0][1].depth
    for q, v in children:
        if v.depth != depth or q < 0:
            raise ViewError(_child_problem(children, depth))
    return _STORE.intern(color, children)


def _child_problem(children: tuple, depth: int) -> str:
    for p, (q, v) in enumerate(children):
        if v.depth != depth:
            return f"child at port {p} has depth {v.depth}, expected {depth}"
        if q < 0:
            return f"negative incoming port {q} at port {p}"
    return "malformed children"


# -- building views of a graph ------------------------------------------------


def _parts(net: Graph, col: Union[Coloring, Sequence[int], None]) -> tuple[Adjacency, tuple[int, ...]]:
    if col is None:
        if not isinstance(net, QuotientGraph):
            raise ViewError("a coloring is required for a PortNetwork")
        return net.adjacency, net.class_color
    colors = col.colors if isinstance(col, Coloring) else tuple(col)
    if len(colors) != len(net.adjacency):
        raise ViewError("coloring size does not match the graph")
    return net.adjacency, colors


class ViewTower:
    """All views of all nodes of one graph, extended level by level on demand."""

    def __init__(self, adjacency: Adjacency, colors: tuple[int, ...]):
        self.adjacency = adjacency
        self.colors = colors
        self.levels: list[list[ViewRef]] = [[leaf(c) for c in colors]]
        self._lock = threading.Lock()

    def level(self, depth: int) -> list[ViewRef]:
        if depth < 0:
            raise ViewError("depth must be non-negative")
        with self._lock:
            while len(self.levels) <= depth:
                prev = self.levels[-1]
                self.levels.append(
                    [
                        assemble(self.colors[v], [(q, prev[u]) for u, q in ports])
                        for v, ports in enumerate(self.adjacency)
                    ]
                )
            return self.levels[depth]


@lru_cache(maxsize=64)
def _tower(adjacency: Adjacency, colors: tuple[int, ...]) -> ViewTower:
    return ViewTower(adjacency, colors)


def view_tower(net: Graph, col: Union[Coloring, Sequence[int], None] = None) -> ViewTower:
    return _tower(*_parts(net, col))


def build_view(net: Graph, col: Union[Coloring, Sequence[int], None], v: int, l: int) -> ViewRef:
    """Depth-``l`` truncated colored view of node ``v``.

    Works on quotient multigraphs too (pass ``col=None``); self-loops and
    multi-edges are walked like any other port.
    """
    return view_tower(net, col).level(l)[v]


# -- canonical text form ------------------------------------------------------


def encode(view: ViewRef) -> str:
    """Tree encoding of ``view`` (exponential size in the depth)."""
    memo: dict[int, str] = {}

    def enc(r: ViewRef) -> str:
        s = memo.get(r.uid)
        if s is None:
            parts = [f"({r.color}"]
            for p, (q, c) in enumerate(r.children):
                parts.append(f" {p}:{q}")
                parts.append(enc(c))
            parts.append(")")
            s = memo[r.uid] = "".join(parts)
        return s

    return enc(view)


def decode(text: Union[str, bytes]) -> ViewRef:
    """Inverse of :func:`encode`; rejects anything off the grammar."""
    if isinstance(text, bytes):
        text = text.decode("ascii")
    pos = 0
    n = len(text)

    def number() -> int:
        nonlocal pos
        start = pos
        while pos < n and text[pos].isdigit():
            pos += 1
        tok = text[start:pos]
        if not tok or (len(tok) > 1 and tok[0] == "0"):
            raise ViewError(f"bad integer at offset {start}")
        return int(tok)

    def expect(ch: str) -> None:
        nonlocal pos
        if pos >= n or text[pos] != ch:
            raise ViewError(f"expected {ch!r} at offset {pos}")
        pos += 1

    def view() -> ViewRef:
        nonlocal pos
        expect("(")
        color = number()
        children = []
        while pos < n and text[pos] == " ":
            pos += 1
            p = number()
            if p != len(children):
                raise ViewError(f"port {p} out of order at offset {pos}")
            expect(":")
            q = number()
            children.append((q, view()))
        expect(")")
        if color < 1:
            raise ViewError("colors are positive")
        return assemble(color, children) if children else leaf(color)

    result = view()
    if pos != n:
        raise ViewError(f"trailing data at offset {pos}")
    return result


def compare_views(a: ViewRef, b: ViewRef) -> int:
    """Three-way byte order of ``encode(a)`` and ``encode(b)``, without encoding.

    Encodings are prefix-free, so two different children decide the order
    of their parents at the first position where they differ.  Numbers are
    always followed by a separator that sorts below every digit, which makes
    digit-string comparison agree with the byte order.
    """
    if a is b:
        return 0
    hit = a._cmp.get(b.uid)
    if hit is not None:
        return hit
    result = _compare(a, b)
    a._cmp[b.uid] = result
    b._cmp[a.uid] = -result
    return result


def _compare(a: ViewRef, b: ViewRef) -> int:
    ca, cb = str(a.color), str(b.color)
    if ca != cb:
        return -1 if ca < cb else 1
    for (qa, xa), (qb, xb) in zip(a.children, b.children):
        sa, sb = str(qa), str(qb)
        if sa != sb:
            return -1 if sa < sb else 1
        c = compare_views(xa, xb)
        if c:
            return c
    # one child list is a prefix of the other: " " (more children) sorts before ")"
    if len(a.children) != len(b.children):
        return -1 if len(a.children) > len(b.children) else 1
    return 0


view_key = cmp_to_key(compare_views)


# -- inspection ---------------------------------------------------------------


def truncate(view: ViewRef, depth: int) -> ViewRef:
    """The same view cut down to ``depth`` (which must not exceed ``view.depth``)."""
    if depth > view.depth or depth < 0:
        raise ViewError(f"cannot truncate a depth-{view.depth} view to depth {depth}")
    if depth == view.depth:
        return view
    hit = view._trunc.get(depth)
    if hit is None:
        if depth == 0:
            hit = leaf(view.color)
        else:
            hit = assemble(view.color, [(q, truncate(c, depth - 1)) for q, c in view.children])
        view._trunc[depth] = hit
    return hit


def dist_to_color(view: ViewRef, alpha: int) -> float:
    """Depth of the shallowest record of color ``alpha``; ``INFINITY`` if none."""
    hit = view._dist.get(alpha)
    if hit is None:
        if view.color == alpha:
            hit = 0
        elif not view.children:
            hit = INFINITY
        else:
            hit = 1 + min(dist_to_color(c, alpha) for _, c in view.children)
        view._dist[alpha] = hit
    return hit


def resolve(view: ViewRef, path: ViewPath) -> tuple[ViewRef, int]:
    """Record at the end of ``path`` and its remaining depth."""
    node = view
    for step, (p, q) in enumerate(path):
        if not 0 <= p < len(node.children):
            raise ViewError(f"step {step}: port {p} not available (degree {len(node.children)})")
        q_actual, child = node.children[p]
        if q_actual != q:
            raise ViewError(f"step {step}: port {p} arrives at {q_actual}, not {q}")
        node = child
    return node, node.depth


def prefix_records(view: ViewRef, path: ViewPath) -> list[ViewRef]:
    """Records along ``path``, root first; ``len(path) + 1`` entries."""
    out = [view]
    node = view
    for p, q in path:
        node, _ = resolve(node, ((p, q),))
        out.append(node)
    return out


def records_at_least(view: ViewRef, depth: int) -> set[ViewRef]:
    """Distinct records with remaining depth >= ``depth`` (tree depth <= view.depth - depth)."""
    level = {view}
    found = set(level)
    for _ in range(view.depth - depth):
        level = {c for r in level for _, c in r.children}
        found |= level
    return found


def repetition_threshold(k: int, d: float) -> float:
    """Path length at which a prefix with running distance maximum ``d`` certifies a repeat."""
    return 2 * (k + 1) * (d + 1)


def uncovered_leaf_exists(
    view: ViewRef, k: int, alpha: int, memo: Optional[dict] = None
) -> bool:
    """Whether some leaf path of ``view`` avoids every repetition certificate.

    A tree node at depth ``j`` is certified when ``j >= 2(k+1)(d'+1)`` where
    ``d'`` is the maximum of :func:`dist_to_color` over the records on its
    root path (each taken in its own remaining-depth subtree).  The search
    keeps ``(record, j)`` states and, for each, the least running maximum
    that still admits an uncovered leaf below; that quantity is monotone,
    so one number per state suffices.  ``memo`` may be shared between
    calls on views of the same total depth with the same ``k`` and ``alpha``.
    """
    if view.depth < 1:
        raise ViewError("need a view of depth >= 1")
    if memo is None:
        memo = {}
    total = view.depth
    step = 2 * (k + 1)

    def need(r: ViewRef) -> float:
        # least incoming running max d_in with an uncovered leaf below r
        key = r.uid
        hit = memo.get(key)
        if hit is not None:
            return hit
        j = total - r.depth
        floor_here = j // step  # smallest d with j < 2(k+1)(d+1)
        if r.depth == 0:
            required = floor_here
        else:
            best = INFINITY
            for _, c in r.children:
                m = need(c)
                if m < best:
                    best = m
                    if best <= floor_here:
                        break
            required = max(floor_here, best)
        d_here = dist_to_color(r, alpha)
        result = 0 if d_here >= required else required
        memo[key] = result
        return result

    return need(view) == 0


def level_sets(view: ViewRef, upto: int) -> list[set[ViewRef]]:
    """Distinct records at tree depths ``0..upto``."""
    levels = [{view}]
    for _ in range(min(upto, view.depth)):
        levels.append({c for r in levels[-1] for _, c in r.children})
    return levels


def store_size() -> int:
    return len(_STORE)


def sorted_views(views: Iterable[ViewRef]) -> list[ViewRef]:
    return sorted(views, key=view_key)
