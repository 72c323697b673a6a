"""Synchronous round executor for the LOCAL model.

All nodes wake up together.  A round is: every active node hands its outbox
to the links, messages are delivered stamped with the receiving port, then
every active node takes one step.  A node that has produced an output is
finished: it sends nothing afterwards and its neighbors see ``None`` on the
corresponding port.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Optional, Protocol, Sequence, TextIO

from .netmodel import Coloring, PortNetwork

Message = Optional[bytes]
Outbox = Optional[Sequence[Message]]


class NodeProgram(Protocol):
    """What a node runs.  Both methods must be deterministic.

    ``init`` returns the starting state and the messages for round 1 (one
    entry per port, ``None`` for silence, or ``None`` for the whole outbox).
    ``step`` consumes one round's inbox and returns the new state, the next
    outbox, and an output (``None`` while the node is still working).
    """

    def init(self, degree: int, color: int, data: bytes) -> tuple[Any, Outbox]: ...

    def step(self, state: Any, inbox: Sequence[Message]) -> tuple[Any, Outbox, Any]: ...


class RoundLimitExceeded(RuntimeError):
    def __init__(self, unfinished: list[int], rounds: int, transcript: "Transcript"):
        self.unfinished = unfinished
        self.rounds = rounds
        self.transcript = transcript
        shown = ", ".join(map(str, unfinished[:10])) + (" ..." if len(unfinished) > 10 else "")
        super().__init__(f"{len(unfinished)} node(s) unfinished after {rounds} rounds: {shown}")


@dataclass
class RoundRecord:
    inbox: dict[int, bytes]
    outbox: dict[int, bytes]
    done: bool
    output: Any = None
    digest: Optional[str] = None


@dataclass
class Transcript:
    """Per round, per node: what arrived, what was sent, and whether it finished.

    ``rounds[t-1][v]`` describes node ``v`` in round ``t``; finished nodes
    have no entry (``None``) in later rounds.
    """

    node_count: int
    rounds: list[list[Optional[RoundRecord]]] = field(default_factory=list)

    @property
    def round_count(self) -> int:
        return len(self.rounds)

    def record(self, t: int, v: int) -> Optional[RoundRecord]:
        if not 1 <= t <= len(self.rounds):
            return None
        row = self.rounds[t - 1]
        return row[v] if row else None

    def lines(self) -> list[str]:
        out = []
        for t, row in enumerate(self.rounds, start=1):
            for v, rec in enumerate(row):
                if rec is None:
                    continue
                entry = {
                    "t": t,
                    "v": v,
                    "in": {str(p): m.hex() for p, m in sorted(rec.inbox.items())},
                    "out": {str(p): m.hex() for p, m in sorted(rec.outbox.items())},
                    "done": rec.done,
                }
                if rec.digest is not None:
                    entry["state"] = rec.digest
                out.append(json.dumps(entry, separators=(",", ":")))
        return out

    def dump(self, fh: TextIO) -> None:
        for line in self.lines():
            fh.write(line + "\n")


@dataclass
class RunResult:
    outputs: list[Any]
    rounds: int
    transcript: Transcript
    states: list[Any]


def _normalize(outbox: Outbox, degree: int) -> list[Message]:
    if outbox is None:
        return [None] * degree
    if len(outbox) != degree:
        raise ValueError(f"outbox has {len(outbox)} entries for degree {degree}")
    return list(outbox)


def run(
    net: PortNetwork,
    col: Coloring,
    program: NodeProgram,
    data: bytes = b"",
    max_rounds: int = 1000,
    record: bool = True,
    order: Optional[Sequence[int]] = None,
) -> RunResult:
    """Run ``program`` on every node until all have output.

    ``order`` only changes the order in which nodes are stepped inside a
    round; results do not depend on it.
    """
    if max_rounds < 1:
        raise ValueError("max_rounds must be at least 1")
    n = net.node_count
    adjacency = net.adjacency
    nodes = list(order) if order is not None else list(range(n))
    if sorted(nodes) != list(range(n)):
        raise ValueError("order must be a permutation of the nodes")

    states: list[Any] = [None] * n
    outboxes: list[list[Message]] = [[] for _ in range(n)]
    for v in nodes:
        state, outbox = program.init(len(adjacency[v]), col[v], data)
        states[v] = state
        outboxes[v] = _normalize(outbox, len(adjacency[v]))

    done = [False] * n
    outputs: list[Any] = [None] * n
    transcript = Transcript(n)
    digest = getattr(program, "digest", None)
    t = 0
    while not all(done):
        if t >= max_rounds:
            raise RoundLimitExceeded([v for v in range(n) if not done[v]], t, transcript)
        t += 1
        inboxes: list[list[Message]] = [[None] * len(adjacency[v]) for v in range(n)]
        for v in range(n):
            if done[v]:
                continue
            for p, msg in enumerate(outboxes[v]):
                if msg is not None:
                    u, q = adjacency[v][p]
                    inboxes[u][q] = msg
        row: list[Optional[RoundRecord]] = [None] * n
        for v in nodes:
            if done[v]:
                continue
            sent = outboxes[v]
            state, outbox, output = program.step(states[v], inboxes[v])
            states[v] = state
            if output is not None:
                done[v] = True
                outputs[v] = output
                outboxes[v] = [None] * len(adjacency[v])
            else:
                outboxes[v] = _normalize(outbox, len(adjacency[v]))
            if record:
                row[v] = RoundRecord(
                    inbox={p: m for p, m in enumerate(inboxes[v]) if m is not None},
                    outbox={p: m for p, m in enumerate(sent) if m is not None},
                    done=done[v],
                    output=output,
                    digest=digest(state) if digest else None,
                )
        if record:
            transcript.rounds.append(row)
        else:
            transcript.rounds.append([])
    return RunResult(outputs, t, transcript, states)


def twin_check(
    t1: Transcript,
    net1: PortNetwork,
    u: int,
    t2: Transcript,
    net2: PortNetwork,
    u2: int,
    rounds: int,
) -> bool:
    """Whether ``u`` and ``u2`` received the same messages and gave the same outputs through ``rounds``."""
    if net1.degree(u) != net2.degree(u2):
        return False
    for t in range(1, rounds + 1):
        a = t1.record(t, u)
        b = t2.record(t, u2)
        if a is None or b is None:
            # finished (or never recorded): both must have stopped by now
            if (a is None) != (b is None):
                return False
            if _finish_round(t1, u) != _finish_round(t2, u2):
                return False
            continue
        if a.inbox != b.inbox or a.done != b.done or a.output != b.output:
            return False
    return True


def _finish_round(tr: Transcript, v: int) -> Optional[int]:
    for t, row in enumerate(tr.rounds, start=1):
        rec = row[v] if row else None
        if rec is not None and rec.done:
            return t
    return None

