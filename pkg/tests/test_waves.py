from __future__ import annotations

import random

import pytest

from beepsim import codec
from beepsim.engine import BEEP, Graph, diameter, distances, verify_reception
from beepsim.graphs import GraphSpec, generate, or_oracle
from beepsim.waves import (
    WaveConfig,
    beep_wave_source,
    broadcast,
    codeword_rounds,
    collect_messages,
    elect_leader,
    election_len,
    estimate_diameter,
    get_message_length,
    wave_source_rounds,
)

from conftest import random_bits, random_connected_graph


# --- beep-wave source schedule -------------------------------------------

def collect_actions(program, rounds):
    acts = []
    try:
        acts.append(next(program))
        for _ in range(rounds - 1):
            acts.append(program.send(False))
    except StopIteration:
        pass
    return acts


def test_source_beep_rounds_m1():
    # codeword 101110: ones at slots 1, 3, 4, 5
    assert wave_source_rounds("1") == [3, 9, 12, 15]
    acts = collect_actions(beep_wave_source("1"), 50)
    assert [i + 1 for i, a in enumerate(acts) if a == BEEP] == [3, 9, 12, 15]
    assert len(acts) == 18  # terminates after 3|C(m)| rounds


def test_source_beep_rounds_m0():
    # codeword 100010: ones at slots 1, 5
    assert wave_source_rounds("0") == [3, 15]


def test_source_start_round_offset():
    assert wave_source_rounds("1", WaveConfig(start_round=7)) == [9, 15, 18, 21]


def test_source_rejects_empty_message():
    with pytest.raises(ValueError):
        beep_wave_source("")


# --- broadcast ------------------------------------------------------------

def test_relay_decodes_on_path_and_heard_rounds():
    g = Graph.from_edges([(0, 1), (1, 2)])
    run = broadcast(g, 0, "1")
    # distance-2 node hears each slot beep one hop-delay later
    heard_at_2 = sorted(rec.round for rec in run.trace if 2 in rec.heard)
    assert heard_at_2 == [4, 10, 13, 16]
    assert run.report.outputs[2].message == "1"


def test_single_node_broadcast():
    g = Graph.from_edges([], nodes=[4], label_range=8)
    run = broadcast(g, 4, "101")
    assert run.report.total_rounds == codeword_rounds("101")


def test_star_broadcast_all_leaves_decode():
    g = Graph.from_edges([(9, 1), (9, 2), (9, 3), (9, 4)])
    run = broadcast(g, 9, "0110")
    for leaf in (1, 2, 3, 4):
        assert run.report.outputs[leaf].message == "0110"
        assert run.report.outputs[leaf].completed_round == codeword_rounds("0110") + 2


def test_layer_discipline_and_completion(rng):
    for _ in range(12):
        g = random_connected_graph(rng, 28)
        source = rng.choice(list(g.nodes))
        m = random_bits(rng, rng.randint(1, 9))
        run = broadcast(g, source, m)
        verify_reception(run.trace, g)
        dist = distances(g, source)
        cw = codec.encode(m)
        for rec in run.trace:
            for u in rec.beepers:
                lag = rec.round - dist[u]
                assert lag > 0 and lag % 3 == 0, (u, rec.round)
                assert cw[lag // 3 - 1] == "1"
        for u in g.nodes:
            if u == source:
                continue
            out = run.report.outputs[u]
            assert out.message == m
            assert out.completed_round == codeword_rounds(m) + dist[u] + 1


# --- leader election --------------------------------------------------------

def test_elect_single_node_exact_rounds():
    g = Graph.from_edges([], nodes=[5], label_range=8)
    run = elect_leader(g, dhat=1, lhat=8)
    assert run.report.outputs[5] == 5
    assert run.report.total_rounds == 6


def test_elect_path_small():
    g = Graph.from_edges([(1, 2), (2, 3)])
    run = elect_leader(g, dhat=2, lhat=4)
    assert set(run.report.outputs.values()) == {3}
    assert run.report.total_rounds == election_len(2, 2)


def test_elect_random_graphs_match_max_oracle(rng):
    for _ in range(10):
        g = random_connected_graph(rng, 24)
        run = elect_leader(g)
        assert set(run.report.outputs.values()) == {g.max_id}
        width = (run.report.extras["lhat"] - 1).bit_length()
        assert run.report.total_rounds == election_len(width, run.report.extras["dhat"])


def test_elect_wide_label_range(rng):
    g = generate(GraphSpec("randomTree", 12, seed=9, label_range=500))
    run = elect_leader(g)
    assert set(run.report.outputs.values()) == {g.max_id}


def test_elect_rejects_bad_lhat():
    g = Graph.from_edges([(1, 2), (2, 3)])
    with pytest.raises(ValueError):
        elect_leader(g, lhat=3)


def test_elect_with_undersized_dhat_is_flagged():
    # dhat below the true diameter can elect the wrong node; the report's
    # max-ID oracle check turns that into a visible configuration failure.
    g = Graph.from_edges([(i, i + 1) for i in range(7)])  # path, D = 7
    run = elect_leader(g, dhat=1, lhat=8)
    leader_check = next(c for c in run.report.bound_checks if c.name == "leader_is_max_id")
    assert not leader_check.passed
    assert not run.report.all_passed


# --- diameter estimation ----------------------------------------------------

def test_estimate_two_node_golden():
    g = Graph.from_edges([(0, 1)])
    run = estimate_diameter(g, leader=1)
    assert set(run.report.outputs.values()) == {5}


def test_estimate_single_node_golden():
    g = Graph.from_edges([], nodes=[0])
    run = estimate_diameter(g, leader=0)
    assert run.report.outputs[0] == 3


def test_estimate_star_center_golden():
    g = Graph.from_edges([(5, 0), (5, 1), (5, 2), (5, 3)])
    run = estimate_diameter(g, leader=5)
    values = set(run.report.outputs.values())
    assert values == {5}  # frozen from the first simulation
    assert 2 <= values.pop() <= 2 * 2 + 7


def test_estimate_sandwich_across_families(rng):
    for family in ("path", "cycle", "star", "complete", "grid", "randomTree", "erConnected"):
        for n in (3, 9, 30):
            g = generate(GraphSpec(family, n, seed=n))
            run = estimate_diameter(g)
            d = diameter(g)
            values = set(run.report.outputs.values())
            assert len(values) == 1
            assert d <= values.pop() <= 2 * d + 7


# --- message collection -----------------------------------------------------

def test_collect_examples():
    g = Graph.from_edges([(2, 1), (1, 0)])
    run = collect_messages(g, 2, {1, 0}, {1: "10", 0: "01"}, p=2)
    assert run.report.outputs[2]["or"] == "11"
    run = collect_messages(g, 2, {2}, {2: "1101"}, p=4)
    assert run.report.outputs[2]["or"] == "1101"
    run = collect_messages(g, 2, {0, 1}, {0: "101", 1: "011"}, p=3)
    assert run.report.outputs[2]["or"] == "111"


def test_collect_rejects_oversized_message():
    g = Graph.from_edges([(0, 1)])
    with pytest.raises(ValueError):
        collect_messages(g, 1, {0}, {0: "1111"}, p=2)


def test_collect_randomized_or_and_residue_rule(rng):
    for _ in range(10):
        g = random_connected_graph(rng, 16)
        k = rng.randint(1, min(4, g.n))
        sources = set(rng.sample(list(g.nodes), k))
        msgs = {s: random_bits(rng, rng.randint(1, 6)) for s in sources}
        p = max(len(m) for m in msgs.values())
        leader = g.max_id
        run = collect_messages(g, leader, sources, msgs, p)
        assert run.report.outputs[leader]["or"] == or_oracle(list(msgs.values()), p)
        # residue rule: during collection, a node at distance d beeps only in
        # the class of distance d, never in the class of distance d + 1
        dt = run.report.extras["dtilde"]
        start = run.report.extras["collection_start"]
        length = run.report.extras["collection_rounds"]
        dist = distances(g, leader)
        for rec in run.trace:
            local = rec.round - start
            if not 1 <= local <= length:
                continue
            for u in rec.beepers:
                assert local % 3 == (dt - dist[u]) % 3
                assert local % 3 != (dt - dist[u] - 1) % 3


def test_collect_phase_budget(rng):
    for _ in range(5):
        g = random_connected_graph(rng, 12)
        sources = {g.nodes[0]}
        msgs = {g.nodes[0]: random_bits(rng, 4)}
        run = collect_messages(g, g.max_id, sources, msgs, 4)
        dt = run.report.extras["dtilde"]
        assert run.report.extras["collection_rounds"] <= dt + 3 * 4 + 12


# --- message length ----------------------------------------------------------

def test_msglen_examples():
    star = Graph.from_edges([(9, 1), (9, 2), (9, 3), (9, 4)])
    run = get_message_length(star, 9, {1, 2, 3}, {1: "11", 2: "11", 3: "1111"})
    assert set(run.report.outputs.values()) == {4}
    run = get_message_length(star, 9, {4}, {4: "1"})
    assert set(run.report.outputs.values()) == {1}


def test_msglen_mixed_lengths(rng):
    for _ in range(8):
        g = random_connected_graph(rng, 14)
        k = rng.randint(1, min(5, g.n))
        sources = set(rng.sample(list(g.nodes), k))
        msgs = {s: random_bits(rng, rng.randint(1, 7)) for s in sources}
        run = get_message_length(g, g.max_id, sources, msgs)
        assert set(run.report.outputs.values()) == {max(len(m) for m in msgs.values())}
