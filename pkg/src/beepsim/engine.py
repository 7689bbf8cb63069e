"""Round-synchronous beep-model simulation kernel.

Each round every live node either beeps or listens; a listener hears a
beep iff at least one neighbor beeped that same round, with no sender
identification (OR reception).  A beeping node learns nothing that round.

Node programs are Python generators: they yield an action for the current
round and receive back what they heard (True/False for listeners, None for
beepers).  A program terminates by returning; the return value is its
terminal output.  The kernel is single-threaded and bit-deterministic.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Generator, Iterable, TextIO

# Per-round node action.  Plain ints keep the hot send loop cheap.
Action = int
LISTEN: Action = 0
BEEP: Action = 1

# A node program yields Actions and receives heard-feedback each round.
NodeProgram = Generator[Action, "bool | None", Any]


class SimulationError(RuntimeError):
    pass


class ProtocolError(SimulationError):
    """A node program observed something its protocol forbids."""

    def __init__(self, node: int, round_: int, reason: str):
        self.node = node
        self.round = round_
        self.reason = reason
        super().__init__(f"node {node}, round {round_}: {reason}")


class SimulationTimeout(SimulationError):
    """maxRounds elapsed before every program terminated.

    Carries the partial trace and the set of still-running nodes.
    """

    def __init__(self, max_rounds: int, trace: "Trace", live: set[int]):
        self.max_rounds = max_rounds
        self.trace = trace
        self.live = live
        super().__init__(
            f"{len(live)} node(s) still running after {max_rounds} rounds: "
            f"{sorted(live)[:8]}{'...' if len(live) > 8 else ''}"
        )


@dataclass(frozen=True)
class Graph:
    """Undirected connected graph with unique non-negative node labels."""

    nodes: tuple[int, ...]
    edges: frozenset[frozenset[int]]
    label_range: int

    @staticmethod
    def from_edges(
        edges: Iterable[tuple[int, int]],
        nodes: Iterable[int] | None = None,
        label_range: int | None = None,
    ) -> "Graph":
        edge_set: set[frozenset[int]] = set()
        seen: set[int] = set(nodes) if nodes is not None else set()
        for u, v in edges:
            if u == v:
                raise ValueError(f"self-loop at node {u}")
            key = frozenset((u, v))
            if key in edge_set:
                raise ValueError(f"duplicate edge {u}-{v}")
            edge_set.add(key)
            seen.add(u)
            seen.add(v)
        if not seen:
            raise ValueError("graph has no nodes")
        if any(n < 0 for n in seen):
            raise ValueError("node labels must be non-negative")
        lr = label_range if label_range is not None else max(seen) + 1
        if lr <= max(seen):
            raise ValueError(f"label range {lr} does not cover max id {max(seen)}")
        g = Graph(tuple(sorted(seen)), frozenset(edge_set), lr)
        if not g.is_connected():
            raise ValueError("graph is not connected")
        return g

    @property
    def n(self) -> int:
        return len(self.nodes)

    @property
    def max_id(self) -> int:
        return self.nodes[-1]

    def adjacency(self) -> dict[int, tuple[int, ...]]:
        adj: dict[int, list[int]] = {u: [] for u in self.nodes}
        for e in self.edges:
            u, v = tuple(e)
            adj[u].append(v)
            adj[v].append(u)
        return {u: tuple(sorted(vs)) for u, vs in adj.items()}

    def neighbors(self, u: int) -> tuple[int, ...]:
        return self.adjacency()[u]

    def is_connected(self) -> bool:
        return len(distances(self, self.nodes[0], _validate=False)) == self.n


def distances(graph: Graph, source: int, _validate: bool = True) -> dict[int, int]:
    """Exact BFS hop distances from ``source`` (the protocol oracle)."""
    if _validate and source not in graph.nodes:
        raise ValueError(f"unknown source node {source}")
    adj = graph.adjacency()
    dist = {source: 0}
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for v in adj[u]:
            if v not in dist:
                dist[v] = dist[u] + 1
                queue.append(v)
    return dist


def diameter(graph: Graph) -> int:
    """Max eccentricity over all nodes (0 for a single-node graph)."""
    return max(max(distances(graph, u).values()) for u in graph.nodes)


@dataclass(frozen=True)
class RoundRecord:
    round: int
    beepers: frozenset[int]
    heard: frozenset[int]


Trace = list[RoundRecord]


@dataclass(frozen=True)
class BoundCheck:
    name: str
    measured: float
    bound: float
    passed: bool


@dataclass
class RunReport:
    outputs: dict[int, Any] = field(default_factory=dict)
    total_rounds: int = 0
    bound_checks: list[BoundCheck] = field(default_factory=list)
    extras: dict[str, Any] = field(default_factory=dict)

    def check(self, name: str, measured: float, bound: float, lower: bool = False) -> None:
        passed = measured >= bound if lower else measured <= bound
        self.bound_checks.append(BoundCheck(name, measured, bound, passed))

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.bound_checks)


def simulate(
    graph: Graph,
    programs: dict[int, NodeProgram],
    max_rounds: int,
) -> tuple[Trace, RunReport]:
    """Run programs round-synchronously until all terminate.

    Raises SimulationTimeout (carrying the partial trace) if any program is
    still live after ``max_rounds`` rounds.
    """
    if max_rounds <= 0:
        raise ValueError("max_rounds must be positive")
    missing = set(graph.nodes) - set(programs)
    if missing:
        raise ValueError(f"nodes without a program: {sorted(missing)}")

    adj = graph.adjacency()
    report = RunReport()
    trace: Trace = []

    # Prime every generator to obtain its round-1 action; a program may
    # terminate immediately, contributing an output but no rounds.
    actions: dict[int, Action] = {}
    live: dict[int, NodeProgram] = {}
    for node in graph.nodes:
        gen = programs[node]
        try:
            actions[node] = _checked_action(next(gen), node, 1)
        except StopIteration as stop:
            report.outputs[node] = stop.value
        else:
            live[node] = gen

    round_no = 0
    while live:
        if round_no >= max_rounds:
            report.total_rounds = round_no
            raise SimulationTimeout(max_rounds, trace, set(live))
        round_no += 1
        beepers = frozenset(u for u, a in actions.items() if a == BEEP)
        heard: set[int] = set()
        for b in beepers:
            heard.update(adj[b])
        heard -= beepers
        trace.append(RoundRecord(round_no, beepers, frozenset(heard)))

        next_actions: dict[int, Action] = {}
        for node, gen in list(live.items()):
            feedback = None if node in beepers else (node in heard)
            try:
                next_actions[node] = _checked_action(gen.send(feedback), node, round_no + 1)
            except StopIteration as stop:
                report.outputs[node] = stop.value
                del live[node]
        actions = next_actions

    report.total_rounds = round_no
    return trace, report


def _checked_action(action: Any, node: int, round_no: int) -> Action:
    if action is not BEEP and action is not LISTEN and action not in (0, 1):
        raise ProtocolError(node, round_no, f"invalid action {action!r}")
    return action


def verify_reception(trace: Trace, graph: Graph) -> None:
    """Re-derive every heard flag from adjacency; raises on any mismatch."""
    adj = graph.adjacency()
    for rec in trace:
        expected = set()
        for b in rec.beepers:
            expected.update(adj[b])
        expected -= rec.beepers
        if frozenset(expected) != rec.heard:
            raise SimulationError(
                f"round {rec.round}: heard set {sorted(rec.heard)} != OR-reception "
                f"{sorted(expected)}"
            )
        if rec.beepers & rec.heard:
            raise SimulationError(f"round {rec.round}: beeping node carries a heard flag")


# ---------------------------------------------------------------------------
# External formats: edge-list graph files and line-delimited trace records.

def write_graph(graph: Graph, fh: TextIO) -> None:
    fh.write(f"n {graph.n}\n")
    for e in sorted(tuple(sorted(edge)) for edge in graph.edges):
        fh.write(f"{e[0]} {e[1]}\n")


def read_graph(fh: TextIO, label_range: int | None = None) -> Graph:
    header = fh.readline().split()
    if len(header) != 2 or header[0] != "n":
        raise ValueError("graph file must start with a 'n <count>' header line")
    count = int(header[1])
    edges: list[tuple[int, int]] = []
    nodes: set[int] = set()
    for line in fh:
        line = line.strip()
        if not line:
            continue
        u, v = (int(tok) for tok in line.split())
        edges.append((u, v))
        nodes.update((u, v))
    if len(nodes) != count:
        raise ValueError(f"header says {count} nodes, edge list mentions {len(nodes)}")
    return Graph.from_edges(edges, nodes=nodes, label_range=label_range)


def write_trace(trace: Trace, fh: TextIO) -> None:
    for rec in trace:
        fh.write(
            json.dumps(
                {
                    "round": rec.round,
                    "beepers": sorted(rec.beepers),
                    "heard": sorted(rec.heard),
                }
            )
            + "\n"
        )
