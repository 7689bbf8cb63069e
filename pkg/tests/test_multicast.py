from __future__ import annotations

import random

import pytest

from beepsim import codec
from beepsim.engine import Graph
from beepsim.graphs import GraphSpec, generate
from beepsim.multicast import (
    PhaseSpan,
    compute_schedule,
    lower_bound,
    multi_broadcast,
    multi_broadcast_noprov,
    multi_broadcast_prov,
)
from beepsim.waves import (
    ProtocolRecorder,
    calibration_len,
    election_len,
    estimate_len,
)

from conftest import random_bits


def true_prefix_sets(source_ids: set[int], width: int):
    """Round-by-round oracle: the set of i-bit prefixes of the source IDs."""
    out = {}
    for i in range(1, width + 1):
        out[i] = tuple(sorted({codec.fixed_width_bits(s, width)[:i] for s in source_ids}))
    return out


def recorded_prefixes(recorder, event="id_prefixes"):
    per_round: dict[int, set] = {}
    for _, node, _, data in recorder.of_kind(event):
        per_round.setdefault(data["round"], set()).add(data["value"])
    return per_round


# --- lower bounds -----------------------------------------------------------

def test_lower_bound_examples():
    assert lower_bound("broadcast", 8, 2, 16, 1) == 4
    assert lower_bound("mbNoProv", 4, 16, 8, 9) == 3
    assert lower_bound("broadcast", 0, 2, 2, 1) == 1


def test_lower_bound_domain_errors():
    with pytest.raises(ValueError):
        lower_bound("mbProv", 3, 8, 4, 1)
    with pytest.raises(ValueError):
        lower_bound("mbNoProv", 3, 8, 1, 4)
    with pytest.raises(ValueError):
        lower_bound("nonsense", 1, 2, 2, 2)


def test_lower_bound_prov_formula():
    import math

    d, l, m, k = 6, 64, 16, 4
    assert lower_bound("mbProv", d, l, m, k) == math.ceil(
        (d + k * math.log2(l * m / k)) / 8
    )


# --- schedule ---------------------------------------------------------------

def test_schedule_setup_only():
    spans = compute_schedule(dhat=5, lhat=8)
    assert [s.name for s in spans] == ["elect"]
    assert spans[0] == PhaseSpan("elect", 1, election_len(3, 5))
    spans = compute_schedule(dhat=5, lhat=8, dtilde=7)
    assert [s.name for s in spans] == ["elect", "estimate"]
    assert spans[1].length == estimate_len(7)


def test_schedule_phases_abut():
    spans = compute_schedule(
        dhat=4, lhat=8, dtilde=5, p=3, id_round_ks=(1, 2, 4), final_k=4
    )
    for a, b in zip(spans, spans[1:]):
        assert b.start_round == a.end_round + 1
    # first prefix round's collection phase: calibration + 3*(2 k_1) + dtilde
    first_collect = next(s for s in spans if s.name == "id_collect_1")
    assert first_collect.length == calibration_len(5) + 3 * 2 + 5


def test_schedule_growth_per_new_prefix():
    base = compute_schedule(dhat=4, lhat=8, dtilde=5, p=3, id_round_ks=(2,))
    grown = compute_schedule(dhat=4, lhat=8, dtilde=5, p=3, id_round_ks=(4,))
    b = next(s for s in base if s.name == "id_collect_1")
    g = next(s for s in grown if s.name == "id_collect_1")
    assert g.length - b.length == 6 * 2  # six slots per new prefix


# --- multi-broadcast with provenance ----------------------------------------

def test_prov_two_source_prefix_walkthrough():
    g = Graph.from_edges([(0, 1), (1, 2), (2, 3)])
    rec = ProtocolRecorder()
    run = multi_broadcast_prov(g, {2, 3}, {2: "10", 3: "01"}, lhat=4, recorder=rec)
    assert run.report.all_passed
    per_round = recorded_prefixes(rec)
    assert per_round[1] == {("1",)}
    assert per_round[2] == {("10", "11")}
    for u in g.nodes:
        assert run.report.outputs[u].result == frozenset({(2, "10"), (3, "01")})


def test_prov_single_source():
    g = generate(GraphSpec("randomTree", 8, seed=1))
    s = g.nodes[0]
    run = multi_broadcast_prov(g, {s}, {s: "1011"})
    assert run.report.all_passed
    assert run.report.outputs[g.max_id].result == frozenset({(s, "1011")})


def test_prov_random_tree_prefix_oracle(rng):
    g = generate(GraphSpec("randomTree", 20, seed=6))
    sources = set(rng.sample(list(g.nodes), 3))
    msgs = {s: random_bits(rng, 3) for s in sources}
    rec = ProtocolRecorder()
    run = multi_broadcast_prov(g, sources, msgs, recorder=rec)
    assert run.report.all_passed
    width = g.max_id.bit_length()
    oracle = true_prefix_sets(sources, width)
    per_round = recorded_prefixes(rec)
    assert set(per_round) == set(oracle)
    for i, values in per_round.items():
        assert values == {oracle[i]}, f"round {i}"


def test_prov_doubling_cap(rng):
    g = generate(GraphSpec("erConnected", 16, seed=13))
    sources = set(rng.sample(list(g.nodes), 6))
    msgs = {s: random_bits(rng, 2) for s in sources}
    rec = ProtocolRecorder()
    run = multi_broadcast_prov(g, sources, msgs, recorder=rec)
    assert run.report.all_passed
    per_round = recorded_prefixes(rec)
    ks = [1] + [len(next(iter(per_round[i]))) for i in sorted(per_round)]
    for a, b in zip(ks, ks[1:]):
        assert b <= 2 * a
        assert b <= len(sources)


def test_prov_leader_is_source():
    g = Graph.from_edges([(0, 1), (1, 2)])
    run = multi_broadcast_prov(g, {2, 0}, {2: "11", 0: "01"})
    assert run.report.all_passed  # leader 2 merges its own indicator locally


def test_mb_input_validation():
    g = Graph.from_edges([(0, 1)])
    with pytest.raises(ValueError):
        multi_broadcast(g, set(), {})
    with pytest.raises(ValueError):
        multi_broadcast(g, {0}, {0: "1", 1: "0"})
    with pytest.raises(ValueError):
        multi_broadcast(g, {0, 1}, {0: "1", 1: "10"})  # mixed widths
    with pytest.raises(ValueError):
        multi_broadcast(g, {0}, {0: ""})


# --- multi-broadcast without provenance --------------------------------------

def test_noprov_duplicate_collapse():
    g = Graph.from_edges([(0, 1), (1, 2), (2, 3)])
    run = multi_broadcast_noprov(g, {2, 3}, {2: "101", 3: "101"})
    assert run.report.all_passed
    assert run.report.outputs[0].result == frozenset({"101"})


def test_noprov_two_bits_on_path():
    g = Graph.from_edges([(0, 1), (1, 2), (2, 3)])
    run = multi_broadcast_noprov(g, {0, 2}, {0: "0", 2: "1"})
    assert run.report.all_passed
    assert run.report.outputs[1].result == frozenset({"0", "1"})


def test_noprov_abort_runs_message_search(rng):
    g = Graph.from_edges([(8, i) for i in range(8)])
    msgs = {i: random_bits(rng, 4) for i in range(8)}
    rec = ProtocolRecorder()
    run = multi_broadcast_noprov(g, set(range(8)), msgs, recorder=rec)
    assert run.report.all_passed
    assert rec.of_kind("msg_prefixes"), "abort branch should have run"
    assert run.report.outputs[8].result == frozenset(msgs.values())
    width = 4  # p
    rounds = {d["round"] for _, _, _, d in rec.of_kind("msg_prefixes")}
    assert rounds == set(range(1, width + 1))


def test_noprov_without_abort_projects_prov(rng):
    g = generate(GraphSpec("path", 12, seed=2))
    sources = set(rng.sample(list(g.nodes), 2))
    msgs = {s: random_bits(rng, 3) for s in sources}
    rec = ProtocolRecorder()
    run = multi_broadcast_noprov(g, sources, msgs, recorder=rec)
    assert run.report.all_passed
    assert not rec.of_kind("msg_prefixes")
    assert run.report.outputs[g.nodes[0]].result == frozenset(msgs.values())


def test_schedule_agreement_recorded(rng):
    g = generate(GraphSpec("erConnected", 12, seed=3))
    sources = set(rng.sample(list(g.nodes), 3))
    msgs = {s: random_bits(rng, 2) for s in sources}
    rec = ProtocolRecorder()
    run = multi_broadcast_prov(g, sources, msgs, recorder=rec)
    schedules = {node: data["spans"] for _, node, _, data in rec.of_kind("schedule")}
    assert len(schedules) == g.n
    assert len(set(schedules.values())) == 1
    names = [s.name for s in run.report.extras["schedule"]]
    assert names[:3] == ["elect", "estimate", "msglen"]
    assert names[-2:] == ["table_collect", "table_wave"]
