"""Leader election and topology recognition from a bound on one color's size.

Each node grows its truncated colored view one level per round until every
leaf path carries a repetition certificate (then the view covers the
network), keeps growing it until the partition of the covered records by
view equality stops refining, reads off the colored quotient graph, and
finally keeps communicating for Xi more rounds, where Xi is the longest
such computation over all nodes.  Xi is obtained by running the same two
phases on the quotient graph itself.

Messages carry the sender's current view in a per-link incremental form:
a record already shipped over the link is referenced by its index instead
of being resent.  See :func:`pack_view`.
"""

from __future__ import annotations

import enum
from collections import OrderedDict
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Union

from . import engine
from .netmodel import Coloring, PortNetwork, QuotientGraph, diameter, is_tree
from .views import (
    INFINITY,
    ViewPath,
    ViewRef,
    assemble,
    dist_to_color,
    leaf,
    prefix_records,
    records_at_least,
    repetition_threshold,
    truncate,
    uncovered_leaf_exists,
    view_key,
    view_tower,
)

TASKS = ("le", "top")


class ProtocolError(RuntimeError):
    """An internal inconsistency or a malformed message; never expected."""


# -- outcomes -----------------------------------------------------------------


@dataclass(frozen=True)
class Unsolvable:
    def to_json(self) -> dict:
        return {"unsolvable": True}


@dataclass(frozen=True)
class LeaderPath:
    ports: tuple[int, ...]

    def to_json(self) -> dict:
        return {"path": list(self.ports)}


@dataclass(frozen=True)
class Topology:
    graph: QuotientGraph
    own: int

    def to_json(self) -> dict:
        return {"topology": self.graph.to_json(), "self": self.own}


NodeOutcome = Union[Unsolvable, LeaderPath, Topology]


# -- the local tests ------------------------------------------------------------


def test_repetition(view: ViewRef, path: ViewPath, k: int, alpha: int) -> bool:
    """Certify that the tree node at ``path`` has a copy closer to the root.

    Takes the largest distance to color ``alpha`` over the records on the
    path (each within its own remaining subtree) and compares the path
    length against ``2(k+1)(d'+1)``.
    """
    if view.depth < 1:
        raise ValueError("need a view of depth >= 1")
    d_max = max(dist_to_color(r, alpha) for r in prefix_records(view, path))
    if d_max == INFINITY:
        return False
    return len(path) >= repetition_threshold(k, d_max)


test_repetition.__test__ = False  # not a pytest test despite the name

_cover_memos: "OrderedDict[tuple[int, int, int], dict]" = OrderedDict()


def _cover_memo(k: int, alpha: int, depth: int) -> dict:
    # shared between nodes that check views of the same depth in the same round
    key = (k, alpha, depth)
    memo = _cover_memos.get(key)
    if memo is None:
        memo = _cover_memos[key] = {}
        while len(_cover_memos) > 8:
            _cover_memos.popitem(last=False)
    return memo


def covers(view: ViewRef, k: int, alpha: int) -> bool:
    """Loop guard of the view phase: every leaf path is certified."""
    return not uncovered_leaf_exists(view, k, alpha, _cover_memo(k, alpha, view.depth))


def partition_count(view: ViewRef, i: int) -> int:
    """Number of classes among records of remaining depth >= i, keyed by their depth-i truncation."""
    return len({truncate(r, i) for r in records_at_least(view, i)})


@dataclass(frozen=True)
class Classification:
    quotient: QuotientGraph
    class_of: dict  # depth-i signature -> canonical class id
    stable_depth: int  # i - 1; canonical order uses encodings at this depth


def classify(view: ViewRef, i: int) -> Classification:
    """Quotient graph from a covering view once the partition is stable at ``i``.

    ``view`` has depth ``l + i``; its records of remaining depth >= ``i``
    are exactly the tree nodes within the covering depth ``l``.
    """
    if i < 1:
        raise ValueError("stability needs i >= 1")
    members: dict[ViewRef, list[ViewRef]] = {}
    for r in records_at_least(view, i):
        members.setdefault(truncate(r, i), []).append(r)
    by_prev: dict[ViewRef, ViewRef] = {}
    for sig in members:
        prev = truncate(sig, i - 1)
        if prev in by_prev:
            raise ProtocolError("partition at depth i-1 is coarser than at depth i")
        by_prev[prev] = sig
    order = sorted(members, key=lambda s: view_key(truncate(s, i - 1)))
    class_of = {sig: n for n, sig in enumerate(order)}
    prev_class = {truncate(sig, i - 1): class_of[sig] for sig in order}

    edges = set()
    for sig, recs in members.items():
        a = class_of[sig]
        ports = None
        for r in recs:
            try:
                here = tuple((prev_class[truncate(c, i - 1)], q) for q, c in r.children)
            except KeyError:
                raise ProtocolError("a neighbor record falls outside every class") from None
            if ports is None:
                ports = here
            elif here != ports:
                raise ProtocolError(f"representatives of class {a} disagree on their edges")
        for p, (b, q) in enumerate(ports):
            edges.add((a, p, b, q) if (a, p) <= (b, q) else (b, q, a, p))
    colors = tuple(sig.color for sig in order)
    return Classification(QuotientGraph(colors, tuple(edges)), class_of, i - 1)


def leader_path(view: ViewRef, i: int, class_of: dict, leader: int = 0) -> tuple[int, ...]:
    """Shortest, then lexicographically smallest, port walk to a record of class ``leader``."""
    frontier: dict[ViewRef, tuple[int, ...]] = {view: ()}
    for _ in range(view.depth - i + 1):
        hits = [path for r, path in frontier.items() if class_of[truncate(r, i)] == leader]
        if hits:
            return min(hits)
        nxt: dict[ViewRef, tuple[int, ...]] = {}
        for r, path in frontier.items():
            for p, (_, c) in enumerate(r.children):
                if c not in nxt:
                    nxt[c] = path + (p,)
        frontier = nxt
    raise ProtocolError("leader class not found within the covering depth")


def solvable(q: QuotientGraph, k: int, alpha: int) -> bool:
    alpha_classes = sum(1 for c in q.class_color if c == alpha)
    return not (alpha_classes <= k // 2 and not is_tree(q))


# -- node state -----------------------------------------------------------------


class Phase(enum.Enum):
    VIEWING = "viewing"
    REFINING = "refining"
    PADDING = "padding"
    DONE = "done"


@dataclass(eq=False)
class ProtocolState:
    degree: int
    color: int
    k: int
    alpha: int
    task: str
    view: ViewRef
    phase: Phase = Phase.VIEWING
    rounds: int = 0
    exit_depth: Optional[int] = None
    refine_steps: int = 0
    class_count: int = 0
    quotient: Optional[QuotientGraph] = None
    own_id: Optional[int] = None
    path: Optional[tuple[int, ...]] = None
    tau: Optional[int] = None
    xi: Optional[int] = None
    outcome: Optional[NodeOutcome] = None
    sent: list = field(default_factory=list)
    received: list = field(default_factory=list)


def advance(state: ProtocolState, with_quotient: bool = True) -> None:
    """Phase logic after the view was extended to depth ``state.rounds``."""
    view = state.view
    if state.phase is Phase.VIEWING:
        if covers(view, state.k, state.alpha):
            state.exit_depth = view.depth
            state.refine_steps = 0
            state.class_count = partition_count(view, 0)
            state.phase = Phase.REFINING
    elif state.phase is Phase.REFINING:
        state.refine_steps += 1
        count = partition_count(view, state.refine_steps)
        if count != state.class_count:
            state.class_count = count
            return
        state.tau = state.rounds
        state.phase = Phase.PADDING
        if not with_quotient:
            return
        found = classify(view, state.refine_steps)
        state.quotient = found.quotient
        state.own_id = found.class_of[truncate(view, state.refine_steps)]
        state.path = leader_path(view, state.refine_steps, found.class_of)
        state.xi = compute_xi(found.quotient, state.k, state.alpha)


def finalize(state: ProtocolState) -> NodeOutcome:
    q = state.quotient
    if q is None:
        raise ProtocolError("finalize before the quotient graph is known")
    if not solvable(q, state.k, state.alpha):
        return Unsolvable()
    if state.task == "le":
        return LeaderPath(state.path)
    return Topology(q, state.own_id)


def class_times(q: QuotientGraph, k: int, alpha: int) -> tuple[int, ...]:
    """Rounds the view and refinement phases take at each class, run on ``q`` itself."""
    tower = view_tower(q)
    shadows = [ProtocolState(0, c, k, alpha, "top", leaf(c)) for c in q.class_color]
    # lockstep, so that classes share the per-depth caches like real nodes do
    depth = 0
    while any(s.phase is not Phase.PADDING for s in shadows):
        depth += 1
        level = tower.level(depth)
        for a, shadow in enumerate(shadows):
            if shadow.phase is Phase.PADDING:
                continue
            shadow.rounds = depth
            shadow.view = level[a]
            advance(shadow, with_quotient=False)
    return tuple(s.tau for s in shadows)


@lru_cache(maxsize=256)
def compute_xi(q: QuotientGraph, k: int, alpha: int) -> int:
    """Largest combined view + refinement time over the classes of ``q``."""
    return max(class_times(q, k, alpha))


# -- wire format ----------------------------------------------------------------


def pack_view(view: ViewRef, port: int, table: dict) -> bytes:
    """``V<depth> <port> <root>`` then ``;color,q,ref,q,ref...`` for each record new to this link.

    ``table`` maps record uids already shipped over the link to their index
    and is updated in place; new records get consecutive indices in
    post-order, so every reference points backwards.
    """
    new: list[str] = []

    def visit(r: ViewRef) -> None:
        for _, c in r.children:
            if c.uid not in table:
                visit(c)
        table[r.uid] = len(table)
        new.append(str(r.color) + "".join([f",{q},{table[c.uid]}" for q, c in r.children]))

    if view.uid not in table:
        visit(view)
    root = table[view.uid]
    head = f"V{view.depth} {port} {root}"
    return (head + "".join(";" + rec for rec in new)).encode("ascii")


def unpack_view(msg: bytes, table: list) -> tuple[int, ViewRef]:
    """Inverse of :func:`pack_view`; returns the sender's port and its view."""
    try:
        head, *records = msg.decode("ascii").split(";")
        tag, port, root = head.split(" ")
        if tag[:1] != "V":
            raise ValueError("missing V tag")
        depth = int(tag[1:])
        get = table.__getitem__
        for rec in records:
            vals = list(map(int, rec.split(",")))
            if len(vals) == 1:
                table.append(leaf(vals[0]))
                continue
            refs = vals[2::2]
            if len(vals) % 2 == 0 or min(refs) < 0:
                raise ValueError(f"bad record {rec!r}")
            table.append(assemble(vals[0], tuple(zip(vals[1::2], map(get, refs)))))
        view = table[int(root)]
    except (ValueError, IndexError, UnicodeDecodeError) as exc:
        raise ProtocolError(f"malformed view message: {exc}") from None
    if view.depth != depth:
        raise ProtocolError(f"message claims depth {depth}, carries depth {view.depth}")
    return int(port), view


def encode_input(k: int, alpha: int, task: str) -> bytes:
    return f"k={k};alpha={alpha};task={task}".encode()


def decode_input(data: bytes) -> tuple[int, int, str]:
    fields = dict(item.split("=", 1) for item in data.decode().split(";"))
    return int(fields["k"]), int(fields["alpha"]), fields["task"]


class SolveProgram:
    """The node program run by :func:`colornet.engine.run`."""

    def init(self, degree: int, color: int, data: bytes):
        k, alpha, task = decode_input(data)
        state = ProtocolState(degree, color, k, alpha, task, leaf(color))
        state.sent = [{} for _ in range(degree)]
        state.received = [[] for _ in range(degree)]
        return state, self._outbox(state)

    def _outbox(self, state: ProtocolState) -> list[bytes]:
        return [pack_view(state.view, p, state.sent[p]) for p in range(state.degree)]

    def step(self, state: ProtocolState, inbox):
        incoming = []
        for p, msg in enumerate(inbox):
            incoming.append(None if msg is None else unpack_view(msg, state.received[p]))
        depth = state.view.depth
        if all(m is not None and m[1].depth == depth for m in incoming):
            state.view = assemble(state.color, incoming)
        elif state.phase in (Phase.VIEWING, Phase.REFINING):
            raise ProtocolError(f"round {state.rounds + 1}: missing or stale neighbor view")
        state.rounds += 1
        if state.phase in (Phase.VIEWING, Phase.REFINING):
            advance(state)
        if state.phase is Phase.PADDING and state.rounds >= state.tau + state.xi:
            state.outcome = finalize(state)
            state.phase = Phase.DONE
            return state, None, state.outcome
        return state, self._outbox(state), None

    def digest(self, state: ProtocolState) -> str:
        return f"{state.phase.value}/{state.view.depth}/{state.exit_depth}/{state.refine_steps}"


# -- driver ---------------------------------------------------------------------


def default_max_rounds(k: int, d: int, n: int) -> int:
    return 4 * (k + 1) * (d + 1) + 4 * d + 2 * n + 16


@dataclass
class ProtocolResult:
    outcomes: list[NodeOutcome]
    rounds: int
    transcript: engine.Transcript
    states: list[ProtocolState]


def run_protocol(
    net: PortNetwork,
    col: Coloring,
    k: int,
    alpha: int,
    task: str,
    max_rounds: Optional[int] = None,
    record: bool = False,
) -> ProtocolResult:
    """Run the node program on every node; ``k`` is trusted as a bound on the size of ``alpha``."""
    if k < 1:
        raise ValueError("k must be at least 1")
    if task not in TASKS:
        raise ValueError(f"task must be one of {TASKS}")
    if alpha not in col.colors:
        raise ValueError(f"color {alpha} does not occur in the network")
    if max_rounds is None:
        max_rounds = default_max_rounds(k, diameter(net), net.node_count)
    result = engine.run(
        net, col, SolveProgram(), encode_input(k, alpha, task), max_rounds=max_rounds, record=record
    )
    return ProtocolResult(result.outputs, result.rounds, result.transcript, result.states)
