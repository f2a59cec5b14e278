"""Min-cut sufficiency checks for sources, a helper and a terminal on a
capacitated DAG."""

from __future__ import annotations

import json
import math
from collections import defaultdict, deque
from itertools import combinations
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from .dist import JointDistribution, conditional_entropy_matrix, entropy
from .labeling import LabelingPair
from .objectives import cut_sets, label_joint, residual_entropy

ROLES = ("s_X", "s_Y", "s_H")
TERMINAL = "t"
FLOW_EPS = 1e-12
SLACK = 1e-9


class NetworkError(ValueError):
    pass


@dataclass(frozen=True)
class Edge:
    src: str
    dst: str
    capacity: float


@dataclass(frozen=True)
class CapacitatedNetwork:
    nodes: tuple[str, ...]
    edges: tuple[Edge, ...]
    roles: dict  # role -> node id, for s_X, s_Y, s_H
    terminals: tuple[str, ...] = ()

    def __post_init__(self):
        ids = set(self.nodes)
        if len(ids) != len(self.nodes):
            raise NetworkError("duplicate node id")
        for e in self.edges:
            if e.src not in ids or e.dst not in ids:
                raise NetworkError(f"edge {e.src}->{e.dst} references an unknown node")
            if not (e.capacity >= 0 and math.isfinite(e.capacity)):
                raise NetworkError(f"edge {e.src}->{e.dst} has invalid capacity {e.capacity}")
        for role, node in self.roles.items():
            if role not in ROLES:
                raise NetworkError(f"unknown role {role!r}")
            if node not in ids:
                raise NetworkError(f"role {role} assigned to unknown node {node!r}")
        if "s_H" in self.roles and self.roles["s_H"] in (self.roles.get("s_X"), self.roles.get("s_Y")):
            raise NetworkError("the helper must be distinct from both sources")
        for t in self.terminals:
            if t not in ids:
                raise NetworkError(f"terminal {t!r} is not a node")
        if not _is_acyclic(self.nodes, self.edges):
            raise NetworkError("network has a directed cycle")

    @classmethod
    def from_dict(cls, doc: dict) -> "CapacitatedNetwork":
        try:
            nodes, roles, terminals = [], {}, []
            for nd in doc["nodes"]:
                nid = str(nd["id"])
                nodes.append(nid)
                role = nd.get("role")
                if role == TERMINAL:
                    terminals.append(nid)
                elif role is not None:
                    if role in roles:
                        raise NetworkError(f"role {role} assigned twice")
                    roles[role] = nid
            edges = [Edge(str(e["from"]), str(e["to"]), float(e["capacity"])) for e in doc["edges"]]
        except (KeyError, TypeError) as exc:
            raise NetworkError(f"malformed network description: {exc}") from None
        return cls(tuple(nodes), tuple(edges), roles, tuple(terminals))

    def with_capacity(self, src: str, dst: str, capacity: float) -> "CapacitatedNetwork":
        edges = tuple(Edge(e.src, e.dst, capacity) if (e.src, e.dst) == (src, dst) else e for e in self.edges)
        return CapacitatedNetwork(self.nodes, edges, dict(self.roles), self.terminals)


def _is_acyclic(nodes, edges) -> bool:
    indeg = {n: 0 for n in nodes}
    out = defaultdict(list)
    for e in edges:
        out[e.src].append(e.dst)
        indeg[e.dst] += 1
    queue = deque(n for n, d in indeg.items() if d == 0)
    seen = 0
    while queue:
        u = queue.popleft()
        seen += 1
        for v in out[u]:
            indeg[v] -= 1
            if indeg[v] == 0:
                queue.append(v)
    return seen == len(nodes)


def load_network(path) -> CapacitatedNetwork:
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise NetworkError(f"{path}:{exc.lineno}: {exc.msg}") from None
    return CapacitatedNetwork.from_dict(doc)


def max_flow(net: CapacitatedNetwork, sources: Iterable[str], sink: str) -> tuple[float, frozenset]:
    """Edmonds-Karp max flow from a set of sources to ``sink``.

    Several sources are joined through a super-source with unbounded edges.
    Returns the flow value and the source side of a minimum cut.
    """
    sources = list(dict.fromkeys(sources))
    for node in [*sources, sink]:
        if node not in net.nodes:
            raise NetworkError(f"unknown node {node!r}")
    if sink in sources:
        raise NetworkError("sink cannot be one of the sources")
    super_src = object()
    cap: dict = defaultdict(lambda: defaultdict(float))
    for e in net.edges:
        cap[e.src][e.dst] += e.capacity
        cap[e.dst][e.src] += 0.0
    for s in sources:
        cap[super_src][s] = math.inf
        cap[s][super_src] += 0.0

    flow = 0.0
    while True:
        parent = {super_src: None}
        queue = deque([super_src])
        while queue and sink not in parent:
            u = queue.popleft()
            for v, c in cap[u].items():
                if c > FLOW_EPS and v not in parent:
                    parent[v] = u
                    queue.append(v)
        if sink not in parent:
            break
        push, v = math.inf, sink
        while parent[v] is not None:
            push = min(push, cap[parent[v]][v])
            v = parent[v]
        if math.isinf(push):
            raise NetworkError("unbounded flow: a source is the sink")
        v = sink
        while parent[v] is not None:
            u = parent[v]
            cap[u][v] -= push
            cap[v][u] += push
            v = u
        flow += push
    side = frozenset(n for n in parent if n is not super_src)
    return flow, side


def min_cut(net: CapacitatedNetwork, sources, sink: str) -> float:
    if isinstance(sources, str):
        sources = [sources]
    return max_flow(net, sources, sink)[0]


def cut_capacity(net: CapacitatedNetwork, side) -> float:
    return sum(e.capacity for e in net.edges if e.src in side and e.dst not in side)


def _reachable(edges, sources, sink) -> bool:
    out = defaultdict(list)
    for e in edges:
        out[e.src].append(e.dst)
    seen, stack = set(sources), list(sources)
    while stack:
        u = stack.pop()
        if u == sink:
            return True
        for v in out[u]:
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return False


def brute_force_min_cut(net: CapacitatedNetwork, sources, sink: str, max_edges: int = 16) -> float:
    """Cheapest edge set whose removal disconnects every source from ``sink``,
    by exhaustive enumeration. Exponential; meant as a test oracle."""
    if isinstance(sources, str):
        sources = [sources]
    m = len(net.edges)
    if m > max_edges:
        raise NetworkError(f"{m} edges exceeds the enumeration limit {max_edges}")
    best = math.inf
    idx = range(m)
    for r in range(m + 1):
        for removed in combinations(idx, r):
            gone = set(removed)
            cost = sum(net.edges[i].capacity for i in gone)
            if cost >= best:
                continue
            kept = [e for i, e in enumerate(net.edges) if i not in gone]
            if not _reachable(kept, sources, sink):
                best = cost
    return best


@dataclass(frozen=True)
class ConditionRow:
    name: str
    required: float
    achieved: float

    @property
    def passed(self) -> bool:
        return self.achieved >= self.required - SLACK


@dataclass(frozen=True)
class FeasibilityReport:
    rows: tuple[ConditionRow, ...]
    terminal: str
    limited: bool = False

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    def failing(self) -> list[str]:
        return [r.name for r in self.rows if not r.passed]

    def table(self) -> str:
        width = max(len(r.name) for r in self.rows)
        lines = [f"{'condition':<{width}}  {'required':>10}  {'min-cut':>10}  result"]
        for r in self.rows:
            lines.append(f"{r.name:<{width}}  {r.required:10.6f}  {r.achieved:10.6f}  {'pass' if r.passed else 'FAIL'}")
        lines.append(f"overall: {'pass' if self.passed else 'FAIL'} (terminal {self.terminal})")
        return "\n".join(lines)

    def as_rows(self) -> list[dict]:
        return [
            {"name": r.name, "required": r.required, "achieved": r.achieved, "pass": r.passed} for r in self.rows
        ]


def _roles(net: CapacitatedNetwork, terminal: str | None):
    missing = [r for r in ROLES if r not in net.roles]
    if missing:
        raise NetworkError(f"missing role(s): {', '.join(missing)}")
    if terminal is None:
        if len(net.terminals) != 1:
            raise NetworkError("missing role: t" if not net.terminals else "several terminals; pick one")
        terminal = net.terminals[0]
    return net.roles["s_X"], net.roles["s_Y"], net.roles["s_H"], terminal


def requirements(J: JointDistribution, L: LabelingPair, limited: bool = False) -> list[tuple[str, float]]:
    """The seven (condition, required bits) pairs in their canonical order."""
    m = label_joint(J, L)
    h_x, h_y = entropy(J.p_x), entropy(J.p_y)
    if limited:
        _, _, h_x, h_y = cut_sets(J, L)
        to_h = ("H(X_cut)", "H(Y_cut)")
    else:
        to_h = ("H(X)", "H(Y)")
    h_x_fx = residual_entropy(J.p_x, L.phi_x)
    h_y_fy = residual_entropy(J.p_y, L.phi_y)
    return [
        (f"rho(s_X;s_H) >= {to_h[0]}", h_x),
        (f"rho(s_Y;s_H) >= {to_h[1]}", h_y),
        (f"rho(s_X,s_Y;s_H) >= {to_h[0]}+{to_h[1]}", h_x + h_y),
        ("rho(s_X;t) >= H(X|phi_X)", h_x_fx),
        ("rho(s_Y;t) >= H(Y)", entropy(J.p_y)),
        ("rho(s_H;t) >= H(phi_X|phi_Y)", conditional_entropy_matrix(m)),
        ("rho(s_X,s_Y,s_H;t) >= H(X|phi_X)+H(Y|phi_Y)+H(phi_X,phi_Y)", h_x_fx + h_y_fy + entropy(m)),
    ]


def check_feasibility(
    net: CapacitatedNetwork, J: JointDistribution, L: LabelingPair, terminal: str | None = None, limited: bool = False
) -> FeasibilityReport:
    """Evaluate the sufficient min-cut conditions. The last row uses the joint
    label entropy H(phi_X, phi_Y), not the conditional helper rate."""
    sx, sy, sh, t = _roles(net, terminal)
    cuts = [
        min_cut(net, [sx], sh),
        min_cut(net, [sy], sh),
        min_cut(net, [sx, sy], sh),
        min_cut(net, [sx], t),
        min_cut(net, [sy], t),
        min_cut(net, [sh], t),
        min_cut(net, [sx, sy, sh], t),
    ]
    rows = tuple(ConditionRow(name, req, cut) for (name, req), cut in zip(requirements(J, L, limited), cuts))
    return FeasibilityReport(rows, t, limited)


def check_feasibility_limited(net, J, L, terminal=None) -> FeasibilityReport:
    """Same conditions with the source-to-helper requirements lowered to the
    cut-set entropies H(X_cut), H(Y_cut) and their sum."""
    return check_feasibility(net, J, L, terminal, limited=True)
