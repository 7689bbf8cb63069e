"""Wave-based primitives: broadcast, leader election, diameter estimation,
message collection, and message-length determination.

All multi-phase protocols here are built from phase generators that operate
in *phase-relative* rounds (their first yield is phase round 1) and return
the values a node learns plus the rounds they consumed, so compositions can
keep every node's schedule in lockstep.

Slot arithmetic (same-round OR reception):
  * a wave source beeps codeword bit i at phase round 3i;
  * a node at hop distance d first hears the wave at round d + 2 and hears
    bit i at round 3i + d - 1, so a 3-round slot absorbs the one-round
    echo jitter from same-layer and deeper-layer relays;
  * upward collection reverses this: bit i leaves a source at round
    3i + D' - dist and every residue class (2 + D' - dist) mod 3 admits
    only leaderward relays.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Generator

from . import codec
from .engine import (
    BEEP,
    LISTEN,
    Action,
    Graph,
    ProtocolError,
    RunReport,
    Trace,
    distances,
    diameter,
    simulate,
)
from .graphs import or_oracle

SLOT_PERIOD = 3
CALIBRATION_PAYLOAD = "1"

Phase = Generator[Action, "bool | None", Any]


@dataclass(frozen=True)
class WaveConfig:
    """Placement of a single beep-wave: 3-round slots from start_round."""

    start_round: int = 1
    slot_period: int = SLOT_PERIOD

    def __post_init__(self) -> None:
        if self.slot_period != SLOT_PERIOD:
            raise ValueError("slot period is fixed at 3 by the relay arithmetic")
        if self.start_round < 1:
            raise ValueError("start_round must be >= 1")


@dataclass
class ProtocolRecorder:
    """Optional side-channel protocols use to expose internal events to
    invariant tests (token tenures, decoded words, per-node schedules)."""

    events: list[tuple] = field(default_factory=list)

    def log(self, event: str, node: int, round_: int, **data: Any) -> None:
        self.events.append((event, node, round_, data))

    def of_kind(self, event: str) -> list[tuple]:
        return [e for e in self.events if e[0] == event]


@dataclass
class ProtocolRun:
    trace: Trace
    report: RunReport


@dataclass(frozen=True)
class BroadcastOutput:
    message: str
    completed_round: int


def ceil_log2(x: int) -> int:
    if x < 1:
        raise ValueError("ceil_log2 needs a positive argument")
    return (x - 1).bit_length()


def codeword_rounds(payload: str) -> int:
    return SLOT_PERIOD * len(codec.encode(payload))


def value_codeword_rounds(value: int) -> int:
    return codeword_rounds(codec.int_to_bits(value))


# Phase length formulas.  Every node evaluates these from values it has
# already learned, which is what keeps schedules identical network-wide.

def election_len(bit_width: int, dhat: int) -> int:
    return bit_width * (dhat + 1)


def estimate_len(dtilde: int) -> int:
    return 2 * dtilde + value_codeword_rounds(dtilde) + 1


def calibration_len(dtilde: int) -> int:
    return dtilde + codeword_rounds(CALIBRATION_PAYLOAD) + 1


def collection_len(width: int, dtilde: int) -> int:
    return 3 * width + dtilde


def collect_phase_len(width: int, dtilde: int) -> int:
    return calibration_len(dtilde) + collection_len(width, dtilde)


def wave_phase_len(nbits: int, dtilde: int) -> int:
    return 3 * (2 * nbits + 4) + dtilde + 2


def msglen_phase_len(p: int, dtilde: int) -> int:
    return calibration_len(dtilde) + 3 * p + 2 * dtilde + value_codeword_rounds(p) + 4


# ---------------------------------------------------------------------------
# Building-block phase generators.


def _pump(inner: Phase, clock: list[int]) -> Phase:
    """Drive a node program while advancing its per-node round clock."""
    try:
        action = next(inner)
        while True:
            clock[0] += 1
            fb = yield action
            action = inner.send(fb)
    except StopIteration as stop:
        return stop.value


def idle_rounds(rounds: int) -> Phase:
    if rounds < 0:
        raise ProtocolError(-1, -1, f"negative idle of {rounds} rounds")
    for _ in range(rounds):
        yield LISTEN


def source_wave_phase(m: str) -> Phase:
    """Transmit one codeword: bit i of encode(m) in phase round 3i."""
    cw = codec.encode(m)
    for bit in cw:
        yield LISTEN
        yield LISTEN
        yield BEEP if bit == "1" else LISTEN


def relay_decode_one(node: int = -1) -> Generator[Action, "bool | None", tuple[str, int, int]]:
    """Relay-and-decode a single wave codeword.

    Arms on the first heard beep (slot alignment re-locks per message),
    relays every heard beep one round later unless this node beeped two
    rounds before the relay round, and feeds 3-round slot values into the
    incremental codeword parser.  Returns (payload, rounds_consumed,
    first_heard_round) in phase-relative rounds.
    """
    r = 0
    heard_prev = False
    beeped_prev = False
    beeped_prev2 = False
    r0 = 0
    flags: set[int] = set()
    parser: codec.CodewordParser | None = None
    next_pos = 1
    while True:
        r += 1
        will_beep = heard_prev and not beeped_prev2
        fb = yield (BEEP if will_beep else LISTEN)
        heard = fb is True
        beeped_prev2, beeped_prev = beeped_prev, will_beep
        heard_prev = heard
        if parser is None:
            if heard:
                r0 = r
                parser = codec.CodewordParser()
                flags.add(1)
            continue
        if heard:
            flags.add(1 + (r - r0) // SLOT_PERIOD)
        # position q is fully observed at round r0 + 3q - 1
        while r == r0 + SLOT_PERIOD * next_pos - 1:
            try:
                done = parser.push(1 if next_pos in flags else 0)
            except codec.MalformedWord as bad:
                raise ProtocolError(node, r, f"wave decode failed: {bad}") from None
            next_pos += 1
            if done is not None:
                return done, r, r0


def beep_wave_source(m: str, cfg: WaveConfig = WaveConfig()) -> Phase:
    """Source program: beeps at absolute round start_round - 1 + 3i for
    every 1 bit of encode(m); terminates after 3|encode(m)| phase rounds."""
    if not m:
        raise ValueError("wave payload must be nonempty")
    codec.check_bits(m, "message")

    def program() -> Phase:
        yield from idle_rounds(cfg.start_round - 1)
        yield from source_wave_phase(m)

    return program()


def beep_wave_relay(cfg: WaveConfig = WaveConfig(), node: int = -1) -> Phase:
    """Relay program: forwards the wave and returns its decoded message."""

    def program():
        yield from idle_rounds(cfg.start_round - 1)
        payload, consumed, _ = yield from relay_decode_one(node)
        return BroadcastOutput(payload, cfg.start_round - 1 + consumed)

    return program()


def wave_source_rounds(m: str, cfg: WaveConfig = WaveConfig()) -> list[int]:
    """Absolute beep rounds of a source wave (handy in tests and demos)."""
    cw = codec.encode(m)
    return [cfg.start_round - 1 + 3 * i for i, bit in enumerate(cw, 1) if bit == "1"]


# ---------------------------------------------------------------------------
# Leader election: binary search over ID bits, one network flood per bit.


def election_phase(my_id: int, bit_width: int, dhat: int) -> Generator[Action, "bool | None", int]:
    """Vote on each ID bit MSB-first; every node flood-relays each phase.

    Consumes exactly bit_width * (dhat + 1) rounds and returns the max ID.
    """
    in_running = True
    verdicts: list[str] = []
    for b in range(bit_width):
        my_bit = (my_id >> (bit_width - 1 - b)) & 1
        candidate = in_running and my_bit == 1
        heard_any = False
        heard_prev = False
        beeped_prev = False
        beeped_prev2 = False
        for t in range(1, dhat + 2):
            will_beep = candidate if t == 1 else (heard_prev and not beeped_prev2)
            fb = yield (BEEP if will_beep else LISTEN)
            heard = fb is True
            heard_any = heard_any or heard
            beeped_prev2, beeped_prev = beeped_prev, will_beep
            heard_prev = heard
        verdict = heard_any or candidate
        verdicts.append("1" if verdict else "0")
        if verdict and my_bit == 0:
            in_running = False
    return codec.bits_to_int("".join(verdicts))


# ---------------------------------------------------------------------------
# Diameter estimation: leader pulse, mod-3 gated echo, broadcast of the
# estimate.  Every node consumes estimate_len(dtilde) rounds.


def diameter_phase(node: int, is_leader: bool) -> Generator[Action, "bool | None", int]:
    if is_leader:
        yield BEEP  # round 1
        r = 1
        last_recv = 0
        while True:
            r += 1
            fb = yield LISTEN
            if fb is True:
                last_recv = r
            if r > 2 and last_recv <= r - 3:
                break
        dtilde = r
        yield from source_wave_phase(codec.int_to_bits(dtilde))
        consumed = r + value_codeword_rounds(dtilde)
    else:
        r = 0
        j = 0
        while not j:
            r += 1
            fb = yield LISTEN
            if fb is True:
                j = r
        ack = j + 1 + ((-j - (j + 1)) % 3)  # next round > j in class (-j) mod 3
        trigger = (2 - j) % 3
        last_heard = j
        heard_prev = True
        while True:
            r += 1
            will_beep = r == j + 1 or r == ack or (heard_prev and (r - 1) % 3 == trigger)
            fb = yield (BEEP if will_beep else LISTEN)
            heard_prev = fb is True
            if heard_prev:
                last_heard = r
            if r >= j + 3 and last_heard <= r - 3:
                break
        # Quiesce before arming the wave decoder: relays of this node's own
        # acknowledgment (and late echoes passing its neighbors) may still
        # arrive; once the node stops beeping, live echo streams are heard
        # at gaps of at most two silent rounds, so three fully quiet rounds
        # mean the estimate traffic is over locally.
        quiet = 0
        while quiet < 3:
            r += 1
            fb = yield LISTEN
            quiet = 0 if fb is True else quiet + 1
        payload, consumed_relay, _ = yield from relay_decode_one(node)
        dtilde = codec.bits_to_int(payload)
        consumed = r + consumed_relay
    yield from idle_rounds(estimate_len(dtilde) - consumed)
    return dtilde


# ---------------------------------------------------------------------------
# Message collection (fixed width) and message length determination.


def _collection_slots(bits: str, dtilde: int, dist: int) -> set[int]:
    return {3 * i + dtilde - dist for i, b in enumerate(bits, 1) if b == "1"}


def _calibrate(node: int, dtilde: int, is_leader: bool) -> Generator[Action, "bool | None", int]:
    """Run the calibration wave; returns this node's hop distance to the
    leader (arrival round of the wave's first beep fixes it)."""
    cal = calibration_len(dtilde)
    if is_leader:
        yield from source_wave_phase(CALIBRATION_PAYLOAD)
        yield from idle_rounds(cal - codeword_rounds(CALIBRATION_PAYLOAD))
        return 0
    payload, consumed, r0 = yield from relay_decode_one(node)
    if payload != CALIBRATION_PAYLOAD:
        raise ProtocolError(node, consumed, f"bad calibration payload {payload!r}")
    dist = r0 - 2
    if not 1 <= dist <= dtilde:
        raise ProtocolError(node, r0, f"calibration distance {dist} out of range")
    yield from idle_rounds(cal - consumed)
    return dist


def collect_phase(
    node: int,
    dtilde: int,
    width: int,
    transmit_bits: str | None,
    is_leader: bool,
    leader_local_bits: str | None = None,
) -> Generator[Action, "bool | None", str | None]:
    """Calibration wave + one fixed-width upward OR collection.

    Sources transmit ``transmit_bits`` (right-padded to width); everyone
    except the leader relays leaderward inside its residue class.  The
    leader returns the OR string (its own contribution, if any, comes in
    via leader_local_bits).  Consumes collect_phase_len(width, dtilde).
    """
    if transmit_bits is not None and len(transmit_bits) > width:
        raise ProtocolError(node, 0, "transmit bits wider than collection width")
    dist = yield from _calibrate(node, dtilde, is_leader)
    my_slots = _collection_slots(transmit_bits or "", dtilde, dist) if not is_leader else set()
    trigger = (2 + dtilde - dist) % 3
    leader_class = (dtilde + 2) % 3
    ones: set[int] = set()
    heard_prev = False
    for local in range(1, collection_len(width, dtilde) + 1):
        relay = not is_leader and heard_prev and (local - 1) % 3 == trigger
        fb = yield (BEEP if local in my_slots or relay else LISTEN)
        heard_prev = fb is True
        if is_leader and heard_prev:
            if local % 3 != leader_class:
                raise ProtocolError(node, local, "collection beep outside leader class")
            slot = (local - dtilde + 1) // 3
            if not 1 <= slot <= width:
                raise ProtocolError(node, local, f"collection slot {slot} out of range")
            ones.add(slot)
    if not is_leader:
        return None
    merged = ["1" if i in ones else "0" for i in range(1, width + 1)]
    for i, b in enumerate(leader_local_bits or ""):
        if b == "1":
            merged[i] = "1"
    return "".join(merged)


def msglen_phase(
    node: int,
    dtilde: int,
    own_len: int,
    is_leader: bool,
) -> Generator[Action, "bool | None", int]:
    """All-ones collection with open width; the leader reads off the max
    length p at the first silent slot and broadcasts it.  Every node
    consumes msglen_phase_len(p, dtilde) rounds."""
    dist = yield from _calibrate(node, dtilde, is_leader)
    if is_leader:
        local = 0
        q = 1
        while True:
            local += 1
            fb = yield LISTEN
            if local == 3 * q + dtilde - 1:
                if fb is True or q <= own_len:
                    q += 1
                else:
                    p = q - 1
                    break
        if p < 1:
            raise ProtocolError(node, local, "no source transmitted any bit")
        yield from source_wave_phase(codec.int_to_bits(p))
        consumed = local + value_codeword_rounds(p)
    else:
        my_slots = _collection_slots("1" * own_len, dtilde, dist)
        trigger = (2 + dtilde - dist) % 3
        eligible = dtilde - dist + 5
        heard_prev = False
        quiet = 0
        local = 0
        while True:
            local += 1
            beep = local in my_slots or (heard_prev and (local - 1) % 3 == trigger)
            fb = yield (BEEP if beep else LISTEN)
            heard_prev = fb is True
            # A round spent beeping proves nothing about neighbors, so only
            # fully quiet rounds count toward the switch window.
            quiet = 0 if (beep or heard_prev) else quiet + 1
            if local >= eligible and quiet >= 3:
                break
        payload, consumed_relay, _ = yield from relay_decode_one(node)
        p = codec.bits_to_int(payload)
        consumed = local + consumed_relay
    yield from idle_rounds(msglen_phase_len(p, dtilde) - calibration_len(dtilde) - consumed)
    return p


def broadcast_value_phase(
    node: int,
    dtilde: int,
    expected_bits: int,
    value_bits: str | None,
) -> Generator[Action, "bool | None", str]:
    """Scheduled network-wide wave of a known-width bit string.  The single
    source passes value_bits; everyone else relays, decodes, and validates
    the width.  Consumes wave_phase_len(expected_bits, dtilde)."""
    total = wave_phase_len(expected_bits, dtilde)
    if value_bits is not None:
        if len(value_bits) != expected_bits:
            raise ProtocolError(node, 0, "source value has unexpected width")
        yield from source_wave_phase(value_bits)
        yield from idle_rounds(total - codeword_rounds(value_bits))
        return value_bits
    payload, consumed, _ = yield from relay_decode_one(node)
    if len(payload) != expected_bits:
        raise ProtocolError(
            node, consumed, f"expected {expected_bits}-bit wave, decoded {len(payload)}"
        )
    yield from idle_rounds(total - consumed)
    return payload


# ---------------------------------------------------------------------------
# Public single-protocol runners.


def default_bounds(graph: Graph) -> tuple[int, int]:
    """(dhat, lhat) defaults: dhat = n, lhat = least power of two > max ID."""
    return graph.n, 1 << graph.max_id.bit_length()


def _cap(estimate: int, override: int | None) -> int:
    return override if override is not None else max(1000, 10 * estimate)


def broadcast(
    graph: Graph,
    source: int,
    message: str,
    start_round: int = 1,
    max_rounds: int | None = None,
) -> ProtocolRun:
    """Beep-wave broadcast of ``message`` from ``source`` to every node."""
    if source not in graph.nodes:
        raise ValueError(f"unknown source {source}")
    if not message:
        raise ValueError("message must be nonempty")
    cfg = WaveConfig(start_round=start_round)
    programs = {
        u: beep_wave_source(message, cfg) if u == source else beep_wave_relay(cfg, u)
        for u in graph.nodes
    }
    est = start_round + codeword_rounds(message) + graph.n + 4
    trace, report = simulate(graph, programs, _cap(est, max_rounds))
    dist = distances(graph, source)
    ok = True
    for u in graph.nodes:
        if u == source:
            continue
        out = report.outputs[u]
        expected_round = (start_round - 1) + codeword_rounds(message) + dist[u] + 1
        if out.message != message or out.completed_round != expected_round:
            ok = False
    report.check("broadcast_exactness", 0 if ok else 1, 0)
    report.extras.update(source=source, message=message, distances=dist)
    return ProtocolRun(trace, report)


def elect_leader(
    graph: Graph,
    dhat: int | None = None,
    lhat: int | None = None,
    max_rounds: int | None = None,
) -> ProtocolRun:
    """Binary-search leader election; every node outputs the max ID."""
    dhat0, lhat0 = default_bounds(graph)
    dhat = dhat if dhat is not None else dhat0
    lhat = lhat if lhat is not None else lhat0
    if lhat < graph.max_id + 1:
        raise ValueError(f"lhat {lhat} below max id {graph.max_id} + 1")
    if dhat < 1 and graph.n > 1:
        raise ValueError("dhat must be >= 1")
    width = ceil_log2(lhat) if lhat > 1 else 0

    def program(u: int) -> Phase:
        leader = yield from election_phase(u, width, dhat)
        return leader

    programs = {u: program(u) for u in graph.nodes}
    expected = election_len(width, dhat)
    trace, report = simulate(graph, programs, _cap(expected + 1, max_rounds))
    report.check("election_round_count", report.total_rounds, expected)
    report.check("election_round_count_lower", report.total_rounds, expected, lower=True)
    agreed = {report.outputs[u] for u in graph.nodes}
    report.check("leader_is_max_id", 0 if agreed == {graph.max_id} else 1, 0)
    report.extras.update(dhat=dhat, lhat=lhat, leader=graph.max_id, bit_width=width)
    return ProtocolRun(trace, report)


def estimate_diameter(
    graph: Graph,
    leader: int | None = None,
    max_rounds: int | None = None,
) -> ProtocolRun:
    """Leader-coordinated diameter estimate; every node outputs D-tilde."""
    leader = leader if leader is not None else graph.max_id
    if leader not in graph.nodes:
        raise ValueError(f"unknown leader {leader}")
    programs = {u: diameter_phase(u, u == leader) for u in graph.nodes}
    d = diameter(graph)
    trace, report = simulate(graph, programs, _cap(6 * d + 60, max_rounds))
    values = {report.outputs[u] for u in graph.nodes}
    dtilde = report.outputs[leader]
    report.check("estimate_agreement", 0 if len(values) == 1 else 1, 0)
    report.check("estimate_lower", dtilde, d, lower=True)
    report.check("estimate_upper", dtilde, 2 * d + 7)
    report.extras.update(leader=leader, dtilde=dtilde, true_diameter=d)
    return ProtocolRun(trace, report)


def _validated_collect_inputs(
    graph: Graph, leader: int, sources: set[int], msgs: dict[int, str], p: int | None
) -> int:
    if not sources:
        raise ValueError("sources must be nonempty")
    unknown = sources - set(graph.nodes)
    if unknown:
        raise ValueError(f"unknown sources {sorted(unknown)}")
    if set(msgs) != sources:
        raise ValueError("msgs must cover exactly the source set")
    for s, m in msgs.items():
        codec.check_bits(m, f"message of {s}")
        if not m:
            raise ValueError(f"source {s} has an empty message")
    max_len = max(len(m) for m in msgs.values())
    if p is None:
        p = max_len
    if max_len > p:
        raise ValueError(f"a source message exceeds p={p}")
    return p


def collect_messages(
    graph: Graph,
    leader: int,
    sources: set[int],
    msgs: dict[int, str],
    p: int | None = None,
    dtilde: int | None = None,
    max_rounds: int | None = None,
) -> ProtocolRun:
    """Leader collects the OR-superimposition of all source messages.

    If dtilde is None a diameter-estimation phase runs first, exactly as in
    the composed protocols.
    """
    sources = set(sources)
    p = _validated_collect_inputs(graph, leader, sources, msgs, p)
    run_estimate = dtilde is None

    def program(u: int) -> Phase:
        dt = dtilde
        if dt is None:
            dt = yield from diameter_phase(u, u == leader)
        if u == leader:
            local = msgs.get(u)
            result = yield from collect_phase(u, dt, p, None, True, leader_local_bits=local)
            return {"or": result, "dtilde": dt}
        transmit = msgs.get(u) if u in sources else None
        yield from collect_phase(u, dt, p, transmit, False)
        return {"dtilde": dt}

    programs = {u: program(u) for u in graph.nodes}
    d = diameter(graph)
    est = (estimate_len(2 * d + 7) if run_estimate else 0) + collect_phase_len(p, 2 * d + 7)
    trace, report = simulate(graph, programs, _cap(est + 10, max_rounds))
    dt = report.outputs[leader]["dtilde"]
    collected = report.outputs[leader]["or"]
    expected = or_oracle([msgs[s] for s in sources], p)
    report.check("collect_equals_or_oracle", 0 if collected == expected else 1, 0)
    report.check("collection_rounds", collection_len(p, dt), dt + 3 * p + 12)
    offset = estimate_len(dt) if run_estimate else 0
    report.extras.update(
        leader=leader,
        dtilde=dt,
        p=p,
        or_string=collected,
        collection_start=offset + calibration_len(dt),
        collection_rounds=collection_len(p, dt),
        phase_offset=offset,
    )
    return ProtocolRun(trace, report)


def get_message_length(
    graph: Graph,
    leader: int,
    sources: set[int],
    msgs: dict[int, str],
    dtilde: int | None = None,
    max_rounds: int | None = None,
) -> ProtocolRun:
    """Inform every node of p = max source message length."""
    sources = set(sources)
    _validated_collect_inputs(graph, leader, sources, msgs, None)
    run_estimate = dtilde is None

    def program(u: int) -> Phase:
        dt = dtilde
        if dt is None:
            dt = yield from diameter_phase(u, u == leader)
        own = len(msgs[u]) if u in sources else 0
        p = yield from msglen_phase(u, dt, own, u == leader)
        return p

    programs = {u: program(u) for u in graph.nodes}
    d = diameter(graph)
    pmax = max(len(m) for m in msgs.values())
    est = (estimate_len(2 * d + 7) if run_estimate else 0) + msglen_phase_len(pmax, 2 * d + 7)
    trace, report = simulate(graph, programs, _cap(est + 10, max_rounds))
    values = {report.outputs[u] for u in graph.nodes}
    report.check("msglen_agreement", 0 if values == {pmax} else 1, 0)
    report.extras.update(leader=leader, p=pmax)
    return ProtocolRun(trace, report)
