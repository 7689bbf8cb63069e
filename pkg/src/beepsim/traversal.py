"""Token-based distributed depth-first search and pipelined gossip.

DFS runs entirely token-locally: the active node exchanges fixed-format
control words with its neighbors at one round per codeword bit (no relay
framing is needed since every participant is adjacent).  Presence votes and
ID-bit bids are two-round ``11`` pulses: a lone pulse overheard two hops
away malforms immediately in a stream decoder, which is what keeps
bystanders from ever assembling a phantom control word.

Control codebook (payload layouts inside one self-delimiting codeword):

    000                       child-acknowledge (probe for unvisited)
    001                       child-search (start ID bidding)
    010 / 011                 bit verdict 0 / 1
    100 sender target count   token handoff  (IDs fixed-width, count minimal)
    101 sender count          count returned to parent

Global termination: visited nodes cannot locally rule out the token's
return, so the root announces completion with an all-beep burst longer than
any 1-run a control exchange can produce; each node re-broadcasts the burst
once, flooding the signal in O(K) rounds per hop.  Gossip then runs the
count broadcast and the pipelined per-node waves on top of this: a node
starts its own wave three rounds after decoding its predecessor's message,
which provably keeps consecutive waves from ever overlapping in anyone's
decoder window.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Generator

from . import codec
from .engine import (
    BEEP,
    LISTEN,
    Graph,
    ProtocolError,
    simulate,
)
from .graphs import reference_dfs
from .waves import (
    Phase,
    ProtocolRecorder,
    ProtocolRun,
    _pump,
    ceil_log2,
    codeword_rounds,
    default_bounds,
    election_phase,
    election_len,
    relay_decode_one,
    source_wave_phase,
)

OPCODES = {
    "CHILD_ACK": "000",
    "CHILD_SEARCH": "001",
    "ACK0": "010",
    "ACK1": "011",
    "HANDOFF": "100",
    "RETURN": "101",
}
_KIND_OF = {v: k for k, v in OPCODES.items()}

ARM_SILENCE = 4  # silent rounds between the last flood burst and the count wave


def flood_threshold(bit_width: int) -> int:
    """Beep-burst length strictly above any audible control-word 1-run."""
    return 6 * bit_width + 16


def control_word(kind: str, bit_width: int = 0, sender: int | None = None,
                 target: int | None = None, count: int | None = None) -> str:
    payload = OPCODES[kind]
    if kind == "HANDOFF":
        payload += codec.fixed_width_bits(sender, bit_width)
        payload += codec.fixed_width_bits(target, bit_width)
        payload += codec.int_to_bits(count)
    elif kind == "RETURN":
        payload += codec.fixed_width_bits(sender, bit_width)
        payload += codec.int_to_bits(count)
    return codec.encode(payload)


def parse_control_payload(payload: str, bit_width: int) -> tuple[str, dict[str, int]]:
    if len(payload) < 3:
        raise ValueError(f"control payload too short: {payload!r}")
    kind = _KIND_OF.get(payload[:3])
    rest = payload[3:]
    if kind is None:
        raise ValueError(f"unknown opcode {payload[:3]}")
    if kind == "HANDOFF":
        if len(rest) < 2 * bit_width + 1:
            raise ValueError("handoff payload truncated")
        return kind, {
            "sender": codec.bits_to_int(rest[:bit_width]),
            "target": codec.bits_to_int(rest[bit_width : 2 * bit_width]),
            "count": codec.bits_to_int(rest[2 * bit_width :]),
        }
    if kind == "RETURN":
        if len(rest) < bit_width + 1:
            raise ValueError("return payload truncated")
        return kind, {
            "sender": codec.bits_to_int(rest[:bit_width]),
            "count": codec.bits_to_int(rest[bit_width:]),
        }
    if rest:
        raise ValueError(f"{kind} carries unexpected payload bits")
    return kind, {}


def _transmit(bits: str) -> Phase:
    for b in bits:
        yield BEEP if b == "1" else LISTEN


def _listen_word(node: int, bit_width: int) -> Generator[Any, Any, tuple[str, dict[str, int]]]:
    """Decode one control word that is guaranteed to start next round."""
    parser = codec.CodewordParser()
    r = 0
    while True:
        r += 1
        fb = yield LISTEN
        try:
            done = parser.push(1 if fb is True else 0)
        except codec.MalformedWord as bad:
            raise ProtocolError(node, r, f"control word parse: {bad}") from None
        if done is not None:
            try:
                return parse_control_payload(done, bit_width)
            except ValueError as bad:
                raise ProtocolError(node, r, str(bad)) from None


@dataclass
class _DfsShared:
    """Per-node wiring the DFS sub-generators need."""

    node: int
    bit_width: int
    recorder: ProtocolRecorder
    clock: list[int]  # [current absolute round], advanced by the pump


def _token_script(ctx: _DfsShared, my_count: int, is_root: bool) -> Generator[Any, Any, int]:
    """Run the token at this node; returns the count after its subtree.

    A non-root's tenure extends through the RETURN word it transmits after
    this script ends, so its final release is logged by the caller."""
    ctx.recorder.log("token_acquire", ctx.node, ctx.clock[0])
    count = my_count
    while True:
        yield from _transmit(control_word("CHILD_ACK"))
        h1 = yield LISTEN
        h2 = yield LISTEN
        if not (h1 is True or h2 is True):
            break
        yield from _transmit(control_word("CHILD_SEARCH"))
        verdict: list[str] = []
        for _ in range(ctx.bit_width):
            b1 = yield LISTEN
            b2 = yield LISTEN
            bit = b1 is True or b2 is True
            verdict.append("1" if bit else "0")
            yield from _transmit(control_word("ACK1" if bit else "ACK0"))
        target = codec.bits_to_int("".join(verdict))
        yield from _transmit(
            control_word("HANDOFF", ctx.bit_width, sender=ctx.node, target=target,
                         count=count + 1)
        )
        ctx.recorder.log("token_release", ctx.node, ctx.clock[0])
        count = yield from _await_return(ctx, target)
        ctx.recorder.log("token_acquire", ctx.node, ctx.clock[0])
    if is_root:
        ctx.recorder.log("token_release", ctx.node, ctx.clock[0])
    return count


def _await_return(ctx: _DfsShared, child: int) -> Generator[Any, Any, int]:
    """Parent waits for RETURN(child); ignores the child's own exchanges."""
    parser: codec.CodewordParser | None = None
    while True:
        fb = yield LISTEN
        heard = fb is True
        if parser is None:
            if heard:
                parser = codec.CodewordParser()
                parser.push(1)
            continue
        try:
            done = parser.push(1 if heard else 0)
        except codec.MalformedWord:
            parser = None
            continue
        if done is None:
            continue
        parser = None
        try:
            kind, fields = parse_control_payload(done, ctx.bit_width)
        except ValueError as bad:
            raise ProtocolError(ctx.node, ctx.clock[0], str(bad)) from None
        ctx.recorder.log("word", ctx.node, ctx.clock[0], kind=kind, **fields)
        if kind == "RETURN" and fields["sender"] == child:
            return fields["count"]


def _candidate_block(ctx: _DfsShared, my_bits: str) -> Generator[Any, Any, tuple[bool, int, int]]:
    """Respond to a child-acknowledge and run the ID bidding.

    Returns (won, my_number_if_won, parent_id)."""
    yield BEEP
    yield BEEP
    kind, _ = yield from _listen_word(ctx.node, ctx.bit_width)
    if kind != "CHILD_SEARCH":
        raise ProtocolError(ctx.node, ctx.clock[0], f"expected CHILD_SEARCH, got {kind}")
    in_running = True
    for i in range(ctx.bit_width):
        my_bit = my_bits[i] == "1"
        bid = in_running and my_bit
        yield BEEP if bid else LISTEN
        yield BEEP if bid else LISTEN
        kind, _ = yield from _listen_word(ctx.node, ctx.bit_width)
        if kind == "ACK1":
            if not my_bit:
                in_running = False
        elif kind == "ACK0":
            if bid:
                raise ProtocolError(ctx.node, ctx.clock[0], "token missed an adjacent bid")
        else:
            raise ProtocolError(ctx.node, ctx.clock[0], f"expected verdict word, got {kind}")
    kind, fields = yield from _listen_word(ctx.node, ctx.bit_width)
    if kind != "HANDOFF":
        raise ProtocolError(ctx.node, ctx.clock[0], f"expected HANDOFF, got {kind}")
    ctx.recorder.log("word", ctx.node, ctx.clock[0], kind=kind, **fields)
    won = fields["target"] == ctx.node
    if won != in_running:
        raise ProtocolError(ctx.node, ctx.clock[0], "handoff target disagrees with bidding")
    return won, fields["count"], fields["sender"]


def _dfs_root(ctx: _DfsShared, threshold: int) -> Generator[Any, Any, tuple[int, int]]:
    """Root side: run the token from count 1, then start the done-flood."""
    final_count = yield from _token_script(ctx, 1, is_root=True)
    yield LISTEN  # one quiet boundary round after the last silent probe
    ctx.recorder.log("flood_start", ctx.node, ctx.clock[0])
    for _ in range(threshold):
        yield BEEP
    return 1, final_count


def _dfs_non_root(ctx: _DfsShared, my_bits: str, threshold: int) -> Generator[Any, Any, int]:
    """Passive/candidate/token life of a non-root node.

    Returns this node's DFS number once the done-flood has been detected
    and re-broadcast."""
    visited = False
    number = -1
    parser: codec.CodewordParser | None = None
    streak = 0
    while True:
        fb = yield LISTEN
        heard = fb is True
        streak = streak + 1 if heard else 0
        if streak >= threshold:
            break
        if parser is None:
            if heard:
                parser = codec.CodewordParser()
                parser.push(1)
            continue
        try:
            done = parser.push(1 if heard else 0)
        except codec.MalformedWord:
            parser = None
            continue
        if done is None:
            continue
        parser = None
        try:
            kind, fields = parse_control_payload(done, ctx.bit_width)
        except ValueError as bad:
            raise ProtocolError(ctx.node, ctx.clock[0], str(bad)) from None
        ctx.recorder.log("word", ctx.node, ctx.clock[0], kind=kind, **fields)
        if kind == "CHILD_ACK" and not visited:
            won, cnt, _parent = yield from _candidate_block(ctx, my_bits)
            if won:
                visited = True
                number = cnt
                final = yield from _token_script(ctx, cnt, is_root=False)
                yield from _transmit(
                    control_word("RETURN", ctx.bit_width, sender=ctx.node, count=final)
                )
                ctx.recorder.log("token_release", ctx.node, ctx.clock[0])
            streak = 0
    if number < 0:
        raise ProtocolError(ctx.node, ctx.clock[0], "done-flood before this node was visited")
    for _ in range(threshold):
        yield BEEP
    return number


# ---------------------------------------------------------------------------
# Public operations.


@dataclass(frozen=True)
class GossipOutput:
    pairs: tuple[tuple[int, str], ...]
    decoded_count: int


def dfs(
    graph: Graph,
    leader: int | None = None,
    lhat: int | None = None,
    max_rounds: int | None = None,
    recorder: ProtocolRecorder | None = None,
) -> ProtocolRun:
    """Distributed DFS from the leader; every node outputs its number."""
    leader = leader if leader is not None else graph.max_id
    if leader not in graph.nodes:
        raise ValueError(f"unknown leader {leader}")
    _, lhat0 = default_bounds(graph)
    lhat = lhat if lhat is not None else lhat0
    if lhat < graph.max_id + 1:
        raise ValueError(f"lhat {lhat} below max id {graph.max_id} + 1")
    width = ceil_log2(lhat) if lhat > 1 else 0
    threshold = flood_threshold(width)
    recorder = recorder if recorder is not None else ProtocolRecorder()

    programs = {}
    for u in graph.nodes:
        clock = [0]
        ctx = _DfsShared(u, width, recorder, clock)
        if u == leader:
            inner = _dfs_root(ctx, threshold)
        else:
            inner = _dfs_non_root(ctx, codec.fixed_width_bits(u, width), threshold)
        programs[u] = _pump(inner, clock)

    est = _dfs_round_estimate(graph.n, width, graph.n)
    trace, report = simulate(graph, programs, _cap_rounds(est, max_rounds))
    numbering = {
        u: (out[0] if u == leader else out) for u, out in report.outputs.items()
    }
    expected = reference_dfs(graph, leader)
    report.check("dfs_matches_reference", 0 if numbering == expected else 1, 0)
    final_count = report.outputs[leader][1]
    report.check("dfs_count_equals_n", final_count, graph.n)
    report.check("dfs_count_equals_n_lower", final_count, graph.n, lower=True)
    report.extras.update(
        leader=leader,
        lhat=lhat,
        bit_width=width,
        numbering=numbering,
        recorder=recorder,
        flood_threshold=threshold,
    )
    return ProtocolRun(trace, report)


def _dfs_round_estimate(n: int, width: int, dhat: int) -> int:
    per_move = 40 + 16 * width + 2 * (n.bit_length() + 1)
    return 2 * n * per_move + flood_threshold(width) * (dhat + 4) + 100


def _cap_rounds(estimate: int, override: int | None) -> int:
    return override if override is not None else max(2000, 4 * estimate)


def _gossip_root(
    ctx: _DfsShared, threshold: int, dhat: int, message: str
) -> Generator[Any, Any, GossipOutput]:
    _, n = yield from _dfs_root(ctx, threshold)
    yield from (LISTEN for _ in range((dhat + 1) * threshold + 3))
    yield from source_wave_phase(codec.int_to_bits(n))
    yield LISTEN  # slack so every trailing-zero window closes before our wave
    yield from source_wave_phase(message)
    decoded: list[str] = []
    for _ in range(n - 1):
        payload, _, _ = yield from relay_decode_one(ctx.node)
        ctx.recorder.log("gossip_decode", ctx.node, ctx.clock[0], bits=payload)
        decoded.append(payload)
    pairs = [(1, message)] + [(i + 2, m) for i, m in enumerate(decoded)]
    return GossipOutput(tuple(pairs), len(decoded))


def _gossip_non_root(
    ctx: _DfsShared, my_bits: str, threshold: int, message: str
) -> Generator[Any, Any, GossipOutput]:
    g = yield from _dfs_non_root(ctx, my_bits, threshold)
    silent = 0
    while silent < ARM_SILENCE:
        fb = yield LISTEN
        silent = silent + 1 if fb is not True else 0
    count_bits, _, _ = yield from relay_decode_one(ctx.node)
    ctx.recorder.log("gossip_decode", ctx.node, ctx.clock[0], bits=count_bits)
    n = codec.bits_to_int(count_bits)
    if not 1 <= g <= n:
        raise ProtocolError(ctx.node, ctx.clock[0], f"number {g} outside 1..{n}")
    before: list[str] = []
    for _ in range(g - 1):
        payload, _, _ = yield from relay_decode_one(ctx.node)
        ctx.recorder.log("gossip_decode", ctx.node, ctx.clock[0], bits=payload)
        before.append(payload)
    yield from source_wave_phase(message)
    after: list[str] = []
    for _ in range(n - g):
        payload, _, _ = yield from relay_decode_one(ctx.node)
        ctx.recorder.log("gossip_decode", ctx.node, ctx.clock[0], bits=payload)
        after.append(payload)
    pairs = (
        [(i + 1, m) for i, m in enumerate(before)]
        + [(g, message)]
        + [(g + 1 + i, m) for i, m in enumerate(after)]
    )
    return GossipOutput(tuple(pairs), 1 + len(before) + len(after))


def gossip(
    graph: Graph,
    msgs: dict[int, str],
    dhat: int | None = None,
    lhat: int | None = None,
    max_rounds: int | None = None,
    recorder: ProtocolRecorder | None = None,
) -> ProtocolRun:
    """All-to-all message dissemination: election, DFS, count broadcast,
    then one pipelined wave per node in DFS order."""
    if set(msgs) != set(graph.nodes):
        raise ValueError("gossip needs a message for every node")
    for u, m in msgs.items():
        codec.check_bits(m, f"message of {u}")
        if not m:
            raise ValueError(f"node {u} has an empty message")
    dhat0, lhat0 = default_bounds(graph)
    dhat = dhat if dhat is not None else dhat0
    lhat = lhat if lhat is not None else lhat0
    if lhat < graph.max_id + 1:
        raise ValueError(f"lhat {lhat} below max id {graph.max_id} + 1")
    elect_width = ceil_log2(lhat) if lhat > 1 else 0
    recorder = recorder if recorder is not None else ProtocolRecorder()

    def program(u: int, ctx: _DfsShared) -> Phase:
        leader = yield from election_phase(u, elect_width, dhat)
        width = leader.bit_length()
        threshold = flood_threshold(width)
        ctx.bit_width = width
        if u == leader:
            out = yield from _gossip_root(ctx, threshold, dhat, msgs[u])
        else:
            out = yield from _gossip_non_root(
                ctx, codec.fixed_width_bits(u, width), threshold, msgs[u]
            )
        return out

    programs = {}
    for u in graph.nodes:
        clock = [0]
        ctx = _DfsShared(u, 0, recorder, clock)
        programs[u] = _pump(program(u, ctx), clock)

    width_eff = graph.max_id.bit_length()
    p = max(len(m) for m in msgs.values())
    est = (
        election_len(elect_width, dhat)
        + _dfs_round_estimate(graph.n, width_eff, dhat)
        + graph.n * (codeword_rounds("1" * p) + graph.n + 6)
        + 200
    )
    trace, report = simulate(graph, programs, _cap_rounds(est, max_rounds))

    leader = graph.max_id
    numbering = reference_dfs(graph, leader)
    expected_pairs = tuple(sorted((num, msgs[u]) for u, num in numbering.items()))
    ok = all(
        tuple(sorted(report.outputs[u].pairs)) == expected_pairs for u in graph.nodes
    )
    report.check("gossip_outputs_match_oracle", 0 if ok else 1, 0)
    decode_ok = all(
        report.outputs[u].decoded_count == (graph.n - 1 if u == leader else graph.n)
        for u in graph.nodes
    )
    report.check("gossip_decode_counts", 0 if decode_ok else 1, 0)
    report.extras.update(
        leader=leader,
        dhat=dhat,
        lhat=lhat,
        numbering=numbering,
        recorder=recorder,
        p=p,
    )
    return ProtocolRun(trace, report)
