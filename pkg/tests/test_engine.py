from __future__ import annotations

import io
import random

import numpy as np
import pytest

from beepsim.engine import (
    BEEP,
    LISTEN,
    Graph,
    SimulationTimeout,
    diameter,
    distances,
    read_graph,
    simulate,
    verify_reception,
    write_graph,
    write_trace,
)
from beepsim.graphs import GraphSpec, generate

from conftest import random_connected_graph


def one_shot(action, then_listen: int = 0):
    def gen():
        yield action
        for _ in range(then_listen):
            yield LISTEN
    return gen()


def listener(rounds: int):
    def gen():
        heard = []
        for _ in range(rounds):
            fb = yield LISTEN
            heard.append(fb)
        return heard
    return gen()


def test_two_node_beep_is_heard():
    g = Graph.from_edges([(0, 1)])
    trace, report = simulate(g, {0: one_shot(BEEP), 1: listener(1)}, 10)
    assert report.total_rounds == 1
    assert trace[0].beepers == frozenset({0})
    assert trace[0].heard == frozenset({1})
    assert report.outputs[1] == [True]


def test_single_node_never_hears():
    g = Graph.from_edges([], nodes=[0])

    def forever_beeper():
        for _ in range(5):
            fb = yield BEEP
            assert fb is None  # beeping nodes receive nothing
    trace, report = simulate(g, {0: forever_beeper()}, 10)
    assert report.total_rounds == 5
    assert all(rec.heard == frozenset() for rec in trace)


def test_path_reception_is_one_hop():
    g = Graph.from_edges([(0, 1), (1, 2)])
    trace, report = simulate(
        g, {0: one_shot(BEEP, 2), 1: listener(3), 2: listener(3)}, 10
    )
    assert report.outputs[1] == [True, False, False]
    assert report.outputs[2] == [False, False, False]


def test_beeper_has_no_heard_flag():
    g = Graph.from_edges([(0, 1)])
    trace, _ = simulate(g, {0: one_shot(BEEP), 1: one_shot(BEEP)}, 10)
    assert trace[0].beepers == frozenset({0, 1})
    assert trace[0].heard == frozenset()


def test_determinism_bit_identical():
    def build():
        g = generate(GraphSpec("erConnected", 15, seed=3))
        rng = random.Random(42)

        def prog(u):
            def gen():
                for r in range(20):
                    fb = yield (BEEP if rng_map[u].random() < 0.3 else LISTEN)
            return gen()

        rng_map = {u: random.Random(u * 17) for u in g.nodes}
        return simulate(g, {u: prog(u) for u in g.nodes}, 50)

    t1, r1 = build()
    t2, r2 = build()
    assert t1 == t2
    assert r1.total_rounds == r2.total_rounds


def test_no_clairvoyance_prefix_replay():
    g = generate(GraphSpec("randomTree", 10, seed=5))

    def build_programs():
        def prog(u):
            def gen():
                heard_prev = False
                for r in range(30):
                    fb = yield (BEEP if heard_prev or (u == g.max_id and r == 0) else LISTEN)
                    heard_prev = fb is True
            return gen()
        return {u: prog(u) for u in g.nodes}

    full, _ = simulate(g, build_programs(), 50)
    with pytest.raises(SimulationTimeout) as err:
        simulate(g, build_programs(), 12)
    assert err.value.trace == full[:12]


def test_timeout_carries_partial_trace():
    g = Graph.from_edges([(0, 1)])

    def endless():
        while True:
            yield LISTEN
    with pytest.raises(SimulationTimeout) as err:
        simulate(g, {0: endless(), 1: endless()}, 7)
    assert len(err.value.trace) == 7
    assert err.value.live == {0, 1}


def test_reception_soundness_random_traffic(rng):
    for _ in range(10):
        g = random_connected_graph(rng, 20)

        def chatter(u):
            def gen():
                mine = random.Random(u ^ 0x5A5A)
                for _ in range(15):
                    yield (BEEP if mine.random() < 0.4 else LISTEN)
            return gen()

        trace, _ = simulate(g, {u: chatter(u) for u in g.nodes}, 20)
        verify_reception(trace, g)


def test_distances_examples():
    path = generate(GraphSpec("path", 5, seed=0))
    # endpoints of the path have eccentricity 4
    ends = [u for u in path.nodes if len(path.neighbors(u)) == 1]
    d = distances(path, ends[0])
    assert sorted(d.values()) == [0, 1, 2, 3, 4]
    star = Graph.from_edges([(9, 1), (9, 2), (9, 3), (9, 4)])
    d = distances(star, 9)
    assert d[9] == 0 and all(d[v] == 1 for v in (1, 2, 3, 4))


def test_distances_against_matrix_power_oracle():
    g = generate(GraphSpec("erConnected", 30, seed=11))
    idx = {u: i for i, u in enumerate(g.nodes)}
    a = np.zeros((g.n, g.n), dtype=bool)
    for e in g.edges:
        u, v = tuple(e)
        a[idx[u], idx[v]] = a[idx[v], idx[u]] = True
    reach = np.eye(g.n, dtype=bool)
    oracle = np.full((g.n, g.n), -1)
    np.fill_diagonal(oracle, 0)
    for step in range(1, g.n):
        reach = reach | (reach @ a)
        newly = (oracle == -1) & reach
        oracle[newly] = step
    for u in g.nodes:
        d = distances(g, u)
        for v in g.nodes:
            assert d[v] == oracle[idx[u], idx[v]]
    assert diameter(g) == oracle.max()


def test_graph_validation():
    with pytest.raises(ValueError):
        Graph.from_edges([(0, 0)])
    with pytest.raises(ValueError):
        Graph.from_edges([(0, 1), (1, 0)])
    with pytest.raises(ValueError):
        Graph.from_edges([(0, 1), (2, 3)])  # disconnected
    with pytest.raises(ValueError):
        Graph.from_edges([(0, 5)], label_range=4)


def test_graph_file_roundtrip():
    g = generate(GraphSpec("grid", 12, seed=2))
    buf = io.StringIO()
    write_graph(g, buf)
    buf.seek(0)
    g2 = read_graph(buf)
    assert g2.nodes == g.nodes
    assert g2.edges == g.edges


def test_trace_jsonl_format():
    g = Graph.from_edges([(0, 1)])
    trace, _ = simulate(g, {0: one_shot(BEEP), 1: listener(1)}, 5)
    buf = io.StringIO()
    write_trace(trace, buf)
    assert buf.getvalue() == '{"round": 1, "beepers": [0], "heard": [1]}\n'
