"""Session dependency graphs and the transparency check.

The graph of a process has one node per thread, labelled with the
thread's free channels minus the restrictions above it, and one edge
per channel shared by two threads.  Edges are recorded even for
channels that a restriction later strips from the labels.  Because a
channel shared by m threads contributes an edge for every pair, three
threads on one channel already close a cycle; the fast path used by the
transparency check exploits this instead of materialising quadratically
many edges.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from . import congruence, syntax as sx, typecheck
from .surface import display_names, print_process
from .syntax import Name, Process, Sort


@dataclass(frozen=True)
class DepGraph:
    """Nodes are thread positions in the normal form, left to right;
    `texts` keeps each thread's printed form for witnesses and DOT."""
    labels: tuple[frozenset[Name], ...]
    edges: tuple[tuple[int, int, Name], ...]
    texts: tuple[str, ...] = ()

    @property
    def node_count(self) -> int:
        return len(self.labels)

    @property
    def edge_count(self) -> int:
        return len(self.edges)


@dataclass(frozen=True)
class Cycle:
    """nodes[i] -- channels[i] -- nodes[i+1], closing back to nodes[0]."""
    nodes: tuple[int, ...]
    channels: tuple[Name, ...]


class _DSU:
    def __init__(self) -> None:
        self.parent: dict[int, int] = {}

    def find(self, x: int) -> int:
        p = self.parent.setdefault(x, x)
        while p != x:
            self.parent[x] = p = self.parent[p]
            x = p
            p = self.parent[x]
        return x

    def union(self, a: int, b: int) -> bool:
        """Merge; False when already in the same component."""
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parent[ra] = rb
        return True


def _region(p: Process) -> tuple[list[Name], list[Process]]:
    """Binders and threads of the parallel region at the top of p."""
    nf = congruence.normal_form(p)
    return list(nf.binders), list(nf.threads)


def build_graph(p: Process) -> DepGraph:
    binders, threads = _region(p)
    removed = set(binders)
    fscs = [sx.free_session_channels(t) for t in threads]
    labels = tuple(frozenset(f - removed) for f in fscs)
    names = display_names(p)
    texts = tuple(print_process(t, names) for t in threads)

    occ: dict[Name, list[int]] = {}
    for i, f in enumerate(fscs):
        for c in f:
            occ.setdefault(c, []).append(i)

    edges: list[tuple[int, int, Name]] = []
    for c, nodes in occ.items():
        for x in range(len(nodes)):
            for y in range(x + 1, len(nodes)):
                edges.append((nodes[x], nodes[y], c))
    edges.sort(key=lambda e: (e[0], e[1], e[2].base, e[2].uid or 0))
    return DepGraph(labels, tuple(edges), texts)


def _tree_path(adj: dict[int, list[tuple[int, Name]]], u: int,
               v: int) -> tuple[list[int], list[Name]]:
    """Path u .. v through accepted forest edges (u, v connected)."""
    prev: dict[int, tuple[int, Name]] = {}
    seen = {u}
    queue = deque([u])
    while queue:
        x = queue.popleft()
        if x == v:
            break
        for y, c in adj.get(x, ()):
            if y not in seen:
                seen.add(y)
                prev[y] = (x, c)
                queue.append(y)
    nodes = [v]
    chans: list[Name] = []
    while nodes[-1] != u:
        x, c = prev[nodes[-1]]
        chans.append(c)
        nodes.append(x)
    nodes.reverse()
    chans.reverse()
    return nodes, chans


def find_cycle(g: DepGraph) -> Cycle | None:
    dsu = _DSU()
    adj: dict[int, list[tuple[int, Name]]] = {}
    for u, v, c in g.edges:
        if dsu.union(u, v):
            adj.setdefault(u, []).append((v, c))
            adj.setdefault(v, []).append((u, c))
            continue
        nodes, chans = _tree_path(adj, u, v)
        return Cycle(tuple(nodes), tuple(chans + [c]))
    return None


def is_acyclic(g: DepGraph) -> bool:
    return find_cycle(g) is None


def _cluster_cycle(p: Process) -> Cycle | None:
    """find_cycle(build_graph(p)), but without enumerating all pairs: a
    channel on three threads is already a triangle."""
    _, threads = _region(p)
    occ: dict[Name, list[int]] = {}
    for i, t in enumerate(threads):
        for c in sx.free_session_channels(t):
            occ.setdefault(c, []).append(i)

    dsu = _DSU()
    adj: dict[int, list[tuple[int, Name]]] = {}
    for c, nodes in occ.items():
        if len(nodes) >= 3:
            a, b, d = nodes[:3]
            return Cycle((a, b, d), (c, c, c))
        if len(nodes) == 2:
            u, v = nodes
            if dsu.union(u, v):
                adj.setdefault(u, []).append((v, c))
                adj.setdefault(v, []).append((u, c))
            else:
                path, chans = _tree_path(adj, u, v)
                return Cycle(tuple(path), tuple(chans + [c]))
    return None


def leads_to(g: DepGraph, a: Name, b: Name) -> bool | None:
    """Is there a path between a node labelled `a` and one labelled `b`?

    None when either channel labels no node (it is absent or only occurs
    under a restriction), which callers should read as vacuous.
    """
    na = [i for i, ls in enumerate(g.labels) if a in ls]
    nb = [i for i, ls in enumerate(g.labels) if b in ls]
    if not na or not nb:
        return None
    dsu = _DSU()
    for u, v, _ in g.edges:
        dsu.union(u, v)
    reach = {dsu.find(i) for i in na}
    return any(dsu.find(j) in reach for j in nb)


@dataclass
class Transparency:
    ok: bool
    reason: str  # "transparent", "ill-typed" or "cyclic"
    detail: str
    subterm: Process | None = None
    cycle: Cycle | None = None

    def __bool__(self) -> bool:
        return self.ok

    @property
    def verdict(self) -> str:
        if self.ok:
            return "Transparent"
        return "NotWellTyped" if self.reason == "ill-typed" else "NotTransparent"


def is_transparent(gamma: dict[str, Sort], p: Process) -> Transparency:
    """Well-typed, and every parallel cluster's graph is a forest."""
    try:
        typecheck.check(gamma, p)
    except typecheck.TypingError as e:
        return Transparency(False, "ill-typed", str(e))
    for q in congruence.maximal_parallel_subterms(p):
        cyc = _cluster_cycle(q)
        if cyc is not None:
            chans = ", ".join(sorted({c.base for c in cyc.channels}))
            return Transparency(
                False, "cyclic",
                f"threads form a dependency cycle through {chans}",
                subterm=q, cycle=cyc)
    return Transparency(True, "transparent", "")


def _dot_escape(s: str) -> str:
    return s.replace("\\", "\\\\").replace('"', '\\"')


def to_dot(g: DepGraph, names: dict[Name, str] | None = None,
           title: str = "deps") -> str:
    def nm(c: Name) -> str:
        if names and c in names:
            return names[c]
        return c.base

    lines = [f'graph "{_dot_escape(title)}" {{']
    for i, ls in enumerate(g.labels):
        parts = []
        if i < len(g.texts):
            text = g.texts[i]
            if len(text) > 60:
                text = text[:57] + "..."
            parts.append(_dot_escape(text))
        parts.append(_dot_escape("{" + ", ".join(sorted(nm(c) for c in ls)) + "}"))
        body = "\\n".join(parts)  # a DOT line break, not a real newline
        lines.append(f'  n{i} [label="{body}"];')
    for u, v, c in g.edges:
        lines.append(f'  n{u} -- n{v} [label="{_dot_escape(nm(c))}"];')
    lines.append("}")
    return "\n".join(lines)
