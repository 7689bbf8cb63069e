"""Multi-broadcast with and without provenance, the common phase scheduler,
and the explicit-constant lower-bound floors.

Both variants run the same set-up (leader election, diameter estimation,
message-length determination) and then iterative prefix search: per round,
each source marks the child of its known-prefix list that matches its own
ID (or message) in a 2k-wide indicator string, the leader collects the OR,
and broadcasts it back, doubling the community's prefix knowledge.  With
provenance the ID search runs to full width and a final k*p-bit table wave
ships the messages in ID order; without provenance the ID search aborts as
soon as the prefix count exceeds the diameter estimate and the same search
re-runs over message bits, whose surviving prefixes after p rounds are
exactly the distinct messages.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Generator

from . import codec
from .engine import Graph, ProtocolError, simulate
from .waves import (
    Phase,
    ProtocolRecorder,
    ProtocolRun,
    _pump,
    broadcast_value_phase,
    ceil_log2,
    collect_phase,
    collect_phase_len,
    default_bounds,
    diameter_phase,
    election_len,
    election_phase,
    estimate_len,
    msglen_phase,
    msglen_phase_len,
    wave_phase_len,
)

TASKS = ("broadcast", "mbProv", "mbNoProv")


@dataclass(frozen=True)
class PhaseSpan:
    name: str
    start_round: int
    length: int

    @property
    def end_round(self) -> int:
        return self.start_round + self.length - 1


@dataclass(frozen=True)
class MbOutput:
    result: frozenset
    decode_count: int


def lower_bound(task: str, d: int, l: int, m: int, k: int) -> int:
    """Round floors with the explicit constants from the counting arguments.

    broadcast: max(ceil(D/2), ceil(log2 M)); with-provenance:
    ceil((D + k log2(LM/k))/8); without: ceil((D + k log2(M/k))/8) when
    M > k, else ceil((D + M)/4).  k=1 multi-broadcast reduces to broadcast,
    and M=1 without provenance needs no communication at all, so both are
    domain errors here.
    """
    if task not in TASKS:
        raise ValueError(f"unknown task {task!r}; choose from {TASKS}")
    if min(d, l, m, k) < 0 or l < 1 or m < 1 or k < 1:
        raise ValueError("parameters must be positive (D may be 0)")
    if task == "broadcast":
        return max(math.ceil(d / 2), math.ceil(math.log2(m)))
    if k <= 1:
        raise ValueError("multi-broadcast floors assume k > 1")
    if task == "mbProv":
        return math.ceil((d + k * math.log2(l * m / k)) / 8)
    if m == 1:
        raise ValueError("without provenance the floor assumes M > 1")
    if m > k:
        return math.ceil((d + k * math.log2(m / k)) / 8)
    return math.ceil((d + m) / 4)


def compute_schedule(
    dhat: int,
    lhat: int,
    dtilde: int | None = None,
    p: int | None = None,
    id_round_ks: tuple[int, ...] = (),
    final_k: int | None = None,
    msg_round_ks: tuple[int, ...] = (),
) -> list[PhaseSpan]:
    """Pure phase timetable from whatever a node has learned so far.

    ``id_round_ks[i]`` is the prefix count k_i at the start of ID round
    i+1; ``msg_round_ks`` likewise for the message-prefix rounds of the
    no-provenance fallback; ``final_k`` schedules the closing table wave.
    Identical inputs yield identical schedules, which is the whole point.
    """
    elect_width = ceil_log2(lhat) if lhat > 1 else 0
    spans: list[PhaseSpan] = []
    cursor = 1

    def add(name: str, length: int) -> None:
        nonlocal cursor
        spans.append(PhaseSpan(name, cursor, length))
        cursor += length

    add("elect", election_len(elect_width, dhat))
    if dtilde is None:
        return spans
    add("estimate", estimate_len(dtilde))
    if p is None:
        return spans
    add("msglen", msglen_phase_len(p, dtilde))
    for i, k_i in enumerate(id_round_ks, 1):
        add(f"id_collect_{i}", collect_phase_len(2 * k_i, dtilde))
        add(f"id_wave_{i}", wave_phase_len(2 * k_i, dtilde))
    if final_k is not None:
        add("table_collect", collect_phase_len(final_k * p, dtilde))
        add("table_wave", wave_phase_len(final_k * p, dtilde))
    for i, k_i in enumerate(msg_round_ks, 1):
        add(f"msg_collect_{i}", collect_phase_len(2 * k_i, dtilde))
        add(f"msg_wave_{i}", wave_phase_len(2 * k_i, dtilde))
    return spans


def _indicator(prefixes: list[str], own: str) -> str:
    """2k-bit string with the single 1 naming own = some prefix + one bit."""
    parent, last = own[:-1], own[-1]
    j = prefixes.index(parent)
    bits = ["0"] * (2 * len(prefixes))
    bits[2 * j + (1 if last == "1" else 0)] = "1"
    return "".join(bits)


def _expand(prefixes: list[str], z: str) -> list[str]:
    out = []
    for j, px in enumerate(prefixes):
        if z[2 * j] == "1":
            out.append(px + "0")
        if z[2 * j + 1] == "1":
            out.append(px + "1")
    return out


def _prefix_round(
    node: int,
    is_leader: bool,
    dtilde: int,
    prefixes: list[str],
    own_prefix: str | None,
) -> Generator[Any, Any, str]:
    """One collect-and-rebroadcast step; returns the OR indicator Z."""
    width = 2 * len(prefixes)
    own_ind = _indicator(prefixes, own_prefix) if own_prefix is not None else None
    if is_leader:
        z = yield from collect_phase(node, dtilde, width, None, True, own_ind)
        z = yield from broadcast_value_phase(node, dtilde, width, z)
    else:
        yield from collect_phase(node, dtilde, width, own_ind, False)
        z = yield from broadcast_value_phase(node, dtilde, width, None)
    return z


def _mb_program(
    node: int,
    is_source: bool,
    my_msg: str | None,
    dhat: int,
    lhat: int,
    provenance: bool,
    recorder: ProtocolRecorder,
    clock: list[int],
) -> Generator[Any, Any, MbOutput]:
    elect_width = ceil_log2(lhat) if lhat > 1 else 0
    leader = yield from election_phase(node, elect_width, dhat)
    is_leader = node == leader
    dtilde = yield from diameter_phase(node, is_leader)
    own_len = len(my_msg) if is_source else 0
    p = yield from msglen_phase(node, dtilde, own_len, is_leader)
    if is_source and len(my_msg) != p:
        raise ProtocolError(node, clock[0], "multi-broadcast needs uniform-width messages")
    id_width = leader.bit_length()
    my_id_bits = codec.fixed_width_bits(node, id_width) if is_source else None

    prefixes = [""]
    id_round_ks: list[int] = []
    decode_count = 0
    aborted = False
    for i in range(1, id_width + 1):
        id_round_ks.append(len(prefixes))
        own = my_id_bits[:i] if is_source else None
        z = yield from _prefix_round(node, is_leader, dtilde, prefixes, own)
        decode_count += 1
        new_prefixes = _expand(prefixes, z)
        if not 0 < len(new_prefixes) <= 2 * len(prefixes):
            raise ProtocolError(node, clock[0], "prefix count outside the doubling cap")
        prefixes = new_prefixes
        recorder.log("id_prefixes", node, clock[0], round=i, value=tuple(prefixes))
        if not provenance and len(prefixes) > dtilde:
            aborted = True
            break

    if provenance or not aborted:
        ids = [codec.bits_to_int(px) for px in prefixes] if id_width else [node]
        k = len(ids)
        table_width = k * p
        own_table = None
        if is_source:
            rank = ids.index(node)
            own_table = "0" * (rank * p) + my_msg + "0" * ((k - rank - 1) * p)
        if is_leader:
            table = yield from collect_phase(node, dtilde, table_width, None, True, own_table)
            table = yield from broadcast_value_phase(node, dtilde, table_width, table)
        else:
            yield from collect_phase(node, dtilde, table_width, own_table, False)
            table = yield from broadcast_value_phase(node, dtilde, table_width, None)
        decode_count += 1
        pairs = frozenset(
            (ids[j], table[j * p : (j + 1) * p]) for j in range(k)
        )
        result = pairs if provenance else frozenset(m for _, m in pairs)
        recorder.log(
            "schedule",
            node,
            clock[0],
            spans=tuple(
                compute_schedule(dhat, lhat, dtilde, p, tuple(id_round_ks), final_k=k)
            ),
        )
        return MbOutput(result, decode_count)

    msg_prefixes = [""]
    msg_round_ks: list[int] = []
    for i in range(1, p + 1):
        msg_round_ks.append(len(msg_prefixes))
        own = my_msg[:i] if is_source else None
        z = yield from _prefix_round(node, is_leader, dtilde, msg_prefixes, own)
        decode_count += 1
        msg_prefixes = _expand(msg_prefixes, z)
        recorder.log("msg_prefixes", node, clock[0], round=i, value=tuple(msg_prefixes))
    recorder.log(
        "schedule",
        node,
        clock[0],
        spans=tuple(
            compute_schedule(
                dhat, lhat, dtilde, p, tuple(id_round_ks), None, tuple(msg_round_ks)
            )
        ),
    )
    return MbOutput(frozenset(msg_prefixes), decode_count)


def multi_broadcast(
    graph: Graph,
    sources: set[int],
    msgs: dict[int, str],
    dhat: int | None = None,
    lhat: int | None = None,
    provenance: bool = True,
    max_rounds: int | None = None,
    recorder: ProtocolRecorder | None = None,
) -> ProtocolRun:
    """Run the full multi-broadcast stack; every node outputs the result set."""
    sources = set(sources)
    if not sources:
        raise ValueError("sources must be nonempty")
    unknown = sources - set(graph.nodes)
    if unknown:
        raise ValueError(f"unknown sources {sorted(unknown)}")
    if set(msgs) != sources:
        raise ValueError("msgs must cover exactly the source set")
    widths = {len(m) for m in msgs.values()}
    for s, m in msgs.items():
        codec.check_bits(m, f"message of {s}")
    if len(widths) != 1 or widths == {0}:
        raise ValueError(
            "multi-broadcast treats messages as fixed-width words; "
            "provide nonempty messages of one common width"
        )
    p = widths.pop()
    dhat0, lhat0 = default_bounds(graph)
    dhat = dhat if dhat is not None else dhat0
    lhat = lhat if lhat is not None else lhat0
    if lhat < graph.max_id + 1:
        raise ValueError(f"lhat {lhat} below max id {graph.max_id} + 1")
    recorder = recorder if recorder is not None else ProtocolRecorder()

    programs = {}
    for u in graph.nodes:
        clock = [0]
        inner = _mb_program(
            u, u in sources, msgs.get(u), dhat, lhat, provenance, recorder, clock
        )
        programs[u] = _pump(inner, clock)

    k = len(sources)
    dt_cap = 2 * max(1, graph.n) + 9
    est = (
        election_len(ceil_log2(lhat) if lhat > 1 else 0, dhat)
        + estimate_len(dt_cap)
        + msglen_phase_len(p, dt_cap)
        + (graph.max_id.bit_length() + p + 1)
        * (collect_phase_len(2 * k, dt_cap) + wave_phase_len(2 * k, dt_cap))
        + collect_phase_len(k * p, dt_cap)
        + wave_phase_len(k * p, dt_cap)
        + 200
    )
    trace, report = simulate(graph, programs, max_rounds if max_rounds else 4 * est)

    if provenance:
        expected: frozenset = frozenset((s, msgs[s]) for s in sources)
    else:
        expected = frozenset(msgs.values())
    ok = all(report.outputs[u].result == expected for u in graph.nodes)
    report.check("mb_output_exactness", 0 if ok else 1, 0)
    schedules = {e[1]: e[3]["spans"] for e in recorder.of_kind("schedule")}
    report.check(
        "mb_schedule_agreement", 0 if len(set(schedules.values())) == 1 else 1, 0
    )
    report.extras.update(
        sources=sorted(sources),
        k=k,
        p=p,
        dhat=dhat,
        lhat=lhat,
        provenance=provenance,
        recorder=recorder,
        expected=expected,
        schedule=next(iter(schedules.values())) if schedules else (),
    )
    return ProtocolRun(trace, report)


def multi_broadcast_prov(graph: Graph, sources: set[int], msgs: dict[int, str],
                         dhat: int | None = None, lhat: int | None = None,
                         **kw: Any) -> ProtocolRun:
    return multi_broadcast(graph, sources, msgs, dhat, lhat, provenance=True, **kw)


def multi_broadcast_noprov(graph: Graph, sources: set[int], msgs: dict[int, str],
                           dhat: int | None = None, lhat: int | None = None,
                           **kw: Any) -> ProtocolRun:
    return multi_broadcast(graph, sources, msgs, dhat, lhat, provenance=False, **kw)
