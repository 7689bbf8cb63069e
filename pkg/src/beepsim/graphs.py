"""Graph family generators and the independent oracles used by tests.

All generation is driven by ``random.Random(seed)`` so a GraphSpec is a
complete, reproducible description of a topology.  Node IDs are a seeded
permutation drawn from ``range(label_range)`` (default label_range == n),
so the max ID and the label-range bound stay decoupled for L >> n tests.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .engine import Graph

FAMILIES = ("path", "cycle", "star", "complete", "grid", "randomTree", "erConnected")

_ER_RETRIES = 200


class GenerationError(RuntimeError):
    pass


@dataclass(frozen=True)
class GraphSpec:
    family: str
    n: int
    seed: int = 0
    edge_probability: float | None = None  # erConnected only
    label_range: int | None = None

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; choose from {FAMILIES}")
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.family == "cycle" and self.n < 3:
            raise ValueError("cycle needs n >= 3")
        if self.label_range is not None and self.label_range < self.n:
            raise ValueError("label_range must be >= n")

    def cli_string(self) -> str:
        parts = [f"n={self.n}", f"seed={self.seed}"]
        if self.edge_probability is not None:
            parts.insert(1, f"p={self.edge_probability}")
        if self.label_range is not None:
            parts.append(f"range={self.label_range}")
        return f"{self.family}:" + ",".join(parts)


def parse_graph_spec(text: str) -> GraphSpec:
    """Parse a spec string like ``er:n=25,p=0.2,seed=7`` or ``path:n=10``."""
    family, _, argstr = text.partition(":")
    family = {"er": "erConnected", "tree": "randomTree"}.get(family, family)
    kwargs: dict[str, object] = {}
    if argstr:
        for item in argstr.split(","):
            key, _, value = item.partition("=")
            key = key.strip()
            if key == "n":
                kwargs["n"] = int(value)
            elif key == "seed":
                kwargs["seed"] = int(value)
            elif key == "p":
                kwargs["edge_probability"] = float(value)
            elif key == "range":
                kwargs["label_range"] = int(value)
            else:
                raise ValueError(f"unknown graph parameter {key!r}")
    if "n" not in kwargs:
        raise ValueError("graph spec needs n=<count>")
    return GraphSpec(family=family, **kwargs)  # type: ignore[arg-type]


def generate(spec: GraphSpec) -> Graph:
    """Deterministically build the requested family."""
    rng = random.Random(spec.seed)
    lr = spec.label_range if spec.label_range is not None else spec.n
    ids = rng.sample(range(lr), spec.n)
    n = spec.n

    pairs: list[tuple[int, int]]
    if spec.family == "path":
        pairs = [(i, i + 1) for i in range(n - 1)]
    elif spec.family == "cycle":
        pairs = [(i, (i + 1) % n) for i in range(n)]
    elif spec.family == "star":
        pairs = [(0, i) for i in range(1, n)]
    elif spec.family == "complete":
        pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    elif spec.family == "grid":
        pairs = _grid_pairs(n)
    elif spec.family == "randomTree":
        pairs = [(i, rng.randrange(i)) for i in range(1, n)]
    elif spec.family == "erConnected":
        pairs = _er_pairs(n, spec.edge_probability, rng)
    else:  # pragma: no cover - guarded by GraphSpec
        raise AssertionError(spec.family)

    return Graph.from_edges(
        [(ids[a], ids[b]) for a, b in pairs],
        nodes=ids,
        label_range=lr,
    )


def _grid_pairs(n: int) -> list[tuple[int, int]]:
    cols = max(1, int(n**0.5))
    pairs = []
    for k in range(n):
        if (k + 1) % cols != 0 and k + 1 < n:
            pairs.append((k, k + 1))
        if k + cols < n:
            pairs.append((k, k + cols))
    return pairs


def _er_pairs(n: int, p: float | None, rng: random.Random) -> list[tuple[int, int]]:
    if n == 1:
        return []
    if p is None:
        # Dense enough that connected draws dominate at small n.
        p = min(1.0, 2.0 * max(1.0, _log2(n)) / n)
    for _ in range(_ER_RETRIES):
        pairs = [
            (i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < p
        ]
        if _connected(n, pairs):
            return pairs
    raise GenerationError(f"no connected G({n}, {p}) draw in {_ER_RETRIES} tries")


def _connected(n: int, pairs: list[tuple[int, int]]) -> bool:
    adj: dict[int, list[int]] = {i: [] for i in range(n)}
    for a, b in pairs:
        adj[a].append(b)
        adj[b].append(a)
    seen = {0}
    stack = [0]
    while stack:
        u = stack.pop()
        for v in adj[u]:
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return len(seen) == n


def _log2(x: float) -> float:
    import math

    return math.log2(x)


def reference_dfs(graph: Graph, root: int) -> dict[int, int]:
    """Sequential depth-first numbering, descending to the highest-ID
    unvisited neighbor first.  Oracle for the distributed traversal."""
    adj = graph.adjacency()
    number = {root: 1}
    stack = [root]
    count = 1
    while stack:
        x = stack[-1]
        unvisited = [v for v in adj[x] if v not in number]
        if not unvisited:
            stack.pop()
            continue
        y = max(unvisited)
        count += 1
        number[y] = count
        stack.append(y)
    return number


def or_oracle(msgs: list[str], p: int) -> str:
    """Bitwise OR after right-padding every message with 0s to width p."""
    if any(len(m) > p for m in msgs):
        raise ValueError("message longer than p")
    out = [0] * p
    for m in msgs:
        for i, b in enumerate(m):
            if b == "1":
                out[i] = 1
    return "".join("1" if b else "0" for b in out)
