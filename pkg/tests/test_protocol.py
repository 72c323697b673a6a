from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from colornet.engine import RoundLimitExceeded
from colornet.generators import alternating_ring, gen_chordal, oriented_ring, single_alpha
from colornet.netmodel import Coloring, PortNetwork, QuotientGraph, diameter
from colornet.oracle import oracle_solve, quotient, walk_end
from colornet.protocol import (
    LeaderPath,
    ProtocolError,
    SolveProgram,
    Topology,
    Unsolvable,
    class_times,
    classify,
    compute_xi,
    covers,
    decode_input,
    encode_input,
    pack_view,
    run_protocol,
    test_repetition as repetition,
    unpack_view,
)
from colornet.views import build_view, leaf

from .conftest import corpus, networks

PATH = PortNetwork.from_edges(2, [(0, 0, 1, 0)])
PATH_COL = Coloring((1, 2))
STAR = PortNetwork.from_edges(4, [(0, 0, 1, 0), (0, 1, 2, 0), (0, 2, 3, 0)])
STAR_COL = Coloring((1, 2, 2, 2))


def walk(length):
    return tuple((0, 0) for _ in range(length))


def test_repetition_examples():
    view = build_view(PATH, PATH_COL, 0, 8)
    assert not repetition(view, (), 1, 1)
    assert not repetition(view, walk(7), 1, 1)
    assert repetition(view, walk(8), 1, 1)  # running max 1, threshold 8
    no_alpha = build_view(*oriented_ring([1, 2, 2]), 0, 10)
    assert not repetition(no_alpha, ((0, 1),) * 10, 1, 3)
    with pytest.raises(ValueError):
        repetition(leaf(1), (), 1, 1)


def test_view_phase_exit_depths_on_path():
    result = run_protocol(PATH, PATH_COL, 1, 1, "le")
    assert [s.exit_depth for s in result.states] == [8, 9]
    assert [s.refine_steps for s in result.states] == [1, 1]


def test_symmetric_three_ring_exits_together():
    result = run_protocol(*oriented_ring([1, 1, 1]), 3, 1, "le")
    assert [s.exit_depth for s in result.states] == [8, 8, 8]


def test_exit_guard_is_false_at_the_bound():
    for n in (2, 3, 4):
        for net, col in corpus(n)[::7]:
            diam = diameter(net)
            for alpha in set(col.colors):
                for k in (1, 2):
                    bound = 2 * (k + 1) * (diam + 1) + diam
                    for v in range(n):
                        assert covers(build_view(net, col, v, bound), k, alpha)


def test_repetition_complete_at_the_bound_level():
    # every record on level 2(k+1)(D+1) of V^l, l = 2(k+1)(D+1)+D, is certified
    k = 1
    for net, col in corpus(3):
        diam = diameter(net)
        level = 2 * (k + 1) * (diam + 1)
        for alpha in set(col.colors):
            view = build_view(net, col, 0, level + diam)
            paths = [()]
            for _ in range(level):
                paths = [p + ((port, q),) for p in paths for port, (q, _) in enumerate(_record(view, p).children)]
            assert all(repetition(view, p, k, alpha) for p in paths)


def _record(view, path):
    for p, _ in path:
        view = view.children[p][1]
    return view


def test_distinct_colors_stop_after_one_refinement():
    net, col = oriented_ring([1, 2, 3, 4])
    result = run_protocol(net, col, 1, 1, "top")
    assert all(s.refine_steps == 1 for s in result.states)
    assert result.outcomes[0].graph == QuotientGraph.from_network(net, col)


def test_uniform_ring_quotient_matches_oracle():
    net, col = oriented_ring([1] * 6)
    result = run_protocol(net, col, 6, 1, "top")
    assert {s.quotient for s in result.states} == {quotient(net, col)[0]}
    assert result.outcomes == [Unsolvable()] * 6


def test_xi_on_path():
    q, _ = quotient(PATH, PATH_COL)
    assert class_times(q, 1, 1) == (9, 10)
    assert compute_xi(q, 1, 1) == 10
    result = run_protocol(PATH, PATH_COL, 1, 1, "le")
    assert [s.xi for s in result.states] == [10, 10]
    assert result.rounds == 20 <= 2 * 10


def test_xi_single_class():
    q = QuotientGraph((1,), ((0, 0, 0, 1),))
    (tau,) = class_times(q, 3, 1)
    assert compute_xi(q, 3, 1) == tau


def test_path_outcomes():
    le = run_protocol(PATH, PATH_COL, 1, 1, "le").outcomes
    assert le == [LeaderPath(()), LeaderPath((0,))]
    top = run_protocol(PATH, PATH_COL, 1, 1, "top").outcomes
    assert [t.own for t in top] == [0, 1]
    assert top[0].graph == QuotientGraph((1, 2), ((0, 0, 1, 0),))


def test_star_topology():
    outcomes = run_protocol(STAR, STAR_COL, 1, 1, "top").outcomes
    assert all(isinstance(o, Topology) for o in outcomes)
    graph = outcomes[0].graph
    assert all(o.graph == graph for o in outcomes)
    assert sorted(len(ports) for ports in graph.adjacency) == [1, 1, 1, 3]
    assert outcomes == oracle_solve(STAR, STAR_COL, 1, 1, "top")


def test_infeasible_rings_are_unsolvable():
    for colors in ([1] * 6, [1] * 4):
        net, col = oriented_ring(colors)
        for task in ("le", "top"):
            assert run_protocol(net, col, len(colors), 1, task).outcomes == [Unsolvable()] * len(colors)
    net, col = alternating_ring([1] * 4)
    assert run_protocol(net, col, 4, 1, "le").outcomes == [Unsolvable()] * 4


def test_run_protocol_argument_checks():
    with pytest.raises(ValueError):
        run_protocol(PATH, PATH_COL, 0, 1, "le")
    with pytest.raises(ValueError):
        run_protocol(PATH, PATH_COL, 1, 1, "vote")
    with pytest.raises(ValueError):
        run_protocol(PATH, PATH_COL, 1, 3, "le")


def test_round_limit_propagates():
    with pytest.raises(RoundLimitExceeded):
        run_protocol(PATH, PATH_COL, 1, 1, "le", max_rounds=5)


def test_pack_unpack_round_trip_over_a_link():
    net, col = oriented_ring([1, 2, 2, 3])
    sent: dict = {}
    received: list = []
    for depth in range(6):
        view = build_view(net, col, 0, depth)
        port, got = unpack_view(pack_view(view, 1, sent), received)
        assert port == 1 and got is view
    # a view already shipped costs only a header
    assert pack_view(view, 1, sent) == f"V5 1 {sent[view.uid]}".encode()


@pytest.mark.parametrize(
    "msg",
    [b"", b"X0 0 0;1", b"V0 0 3;1", b"V1 0 0;1", b"V0 0 0;1,0", b"V1 0 1;1;2,0,-1", b"\xff", b"V0 0 0;a"],
)
def test_malformed_messages_are_rejected(msg):
    with pytest.raises(ProtocolError):
        unpack_view(msg, [])


def test_input_encoding_round_trip():
    assert decode_input(encode_input(3, 2, "top")) == (3, 2, "top")


def test_missing_neighbor_view_is_an_error_while_viewing():
    program = SolveProgram()
    state, _ = program.init(1, 1, encode_input(1, 1, "le"))
    with pytest.raises(ProtocolError):
        program.step(state, [None])


def test_classify_requires_positive_step():
    with pytest.raises(ValueError):
        classify(build_view(PATH, PATH_COL, 0, 3), 0)


def test_views_track_rounds_while_viewing():
    result = run_protocol(*oriented_ring([1, 2, 2]), 2, 1, "le", record=True)
    for t in range(1, result.states[0].exit_depth + 1):
        assert result.transcript.record(t, 0).digest.split("/")[1] == str(t)


@given(networks(max_n=6, max_colors=3), st.integers(0, 2), st.sampled_from(["le", "top"]))
def test_protocol_matches_oracle(inst, extra_k, task):
    net, col = inst
    alpha = col[0]
    k = col.size(alpha) + extra_k
    result = run_protocol(net, col, k, alpha, task)
    assert result.outcomes == oracle_solve(net, col, k, alpha, task)
    assert len({s.xi for s in result.states}) == 1
    diam = diameter(net)
    assert result.rounds <= 2 * (2 * (k + 1) * (diam + 1) + diam) + net.node_count + 1
    assert result.rounds <= 2 * result.states[0].xi
    if task == "le" and not isinstance(result.outcomes[0], Unsolvable):
        ends = {walk_end(net, v, o.ports) for v, o in enumerate(result.outcomes)}
        assert len(ends) == 1
        (leader,) = ends
        assert result.outcomes[leader] == LeaderPath(())


def test_chordal_single_alpha_elects_the_alpha_node_class():
    net = gen_chordal(10, 2)
    col = single_alpha(10)
    outcomes = run_protocol(net, col, 1, 1, "le").outcomes
    assert outcomes == oracle_solve(net, col, 1, 1, "le")
