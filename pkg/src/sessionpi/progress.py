"""Progress: type inhabitation, partner construction, certification.

A transparent process has progress outright, so the checker's positive
answer is the transparency certificate.  For everything else it hunts
for a refutation: it walks the reachable states, carves each state's
thread list into sub-multisets (the surrounding restrictions and the
remaining threads form the reduction context), and asks whether each
piece that still has live channels can either move on its own or be
completed by a canonical partner process.  A piece with no such partner
witnesses a stuck decomposition.  The search is bounded, so its only
verdicts are a counterexample or "nothing found within the bounds";
certificates come from transparency alone.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import reduce

from . import congruence, depgraph, semantics, syntax as sx, typecheck
from .syntax import Name, Process, SessionType, Sort


# --------------------------------------------------------------- inhabitation

_CANONICAL = {
    "int": sx.IntLit(1),
    "bool": sx.BoolLit(True),
    "string": sx.StrLit("1"),
}


def inhabit(a: SessionType, k: Name,
            avoid: set[str] | None = None) -> tuple[Process, dict[str, Sort]]:
    """The canonical process driving k exactly as `a` prescribes.

    Returns the process and the service declarations it invents: every
    service-typed output emits a fresh '#inh<n>' name, unusable in
    source files, whose sort lands in the returned extension.  Received
    values and services are never used; basic outputs send the sort's
    canonical value (1, true, "1"); a selection takes the first label;
    a delegated channel is served by a restricted helper session.
    """
    taken = set(avoid or ())
    ext: dict[str, Sort] = {}
    counters = {"svc": 0, "var": 0, "chan": 0}

    def fresh_service() -> Name:
        while True:
            base = f"#inh{counters['svc']}"
            counters["svc"] += 1
            if base not in taken:
                taken.add(base)
                return sx.svc(base)

    def fresh_var() -> str:
        n = counters["var"]
        counters["var"] += 1
        return "x" if n == 0 else f"x{n}"

    def fresh_chan() -> Name:
        n = counters["chan"]
        counters["chan"] += 1
        return sx.bound_chan("m" if n == 0 else f"m{n}")

    def go(a: SessionType, k: Name) -> Process:
        match a:
            case sx.End():
                return sx.Stop()
            case sx.In(payload, cont):
                if isinstance(payload, Sort):
                    return sx.Receive(k, fresh_var(), go(cont, k))
                m = fresh_chan()
                return sx.ReceiveSession(k, m, sx.Par(go(cont, k),
                                                      go(payload, m)))
            case sx.Out(payload, cont):
                if isinstance(payload, sx.Basic):
                    return sx.Send(k, _CANONICAL[payload.name], go(cont, k))
                if isinstance(payload, sx.ServiceSort):
                    svc = fresh_service()
                    ext[svc.base] = payload
                    m = fresh_chan()
                    server = sx.Serve(svc, m, go(payload.session, m))
                    return sx.Send(k, sx.SvcRef(svc.base),
                                   sx.Par(go(cont, k), server))
                # delegation: hand over a helper channel and serve its
                # other end ourselves, sequenced so k stays linear
                m = fresh_chan()
                return sx.New(m, sx.Par(
                    sx.SendSession(k, m, go(cont, k)),
                    go(typecheck.dual(payload), m)))
            case sx.BranchT(opts):
                return sx.Offer(k, tuple((l, go(t, k)) for l, t in opts))
            case sx.SelectT(opts):
                label, t = opts[0]
                return sx.Choose(k, label, go(t, k))
        raise ValueError(f"cannot inhabit {a!r}")

    return go(a, k), ext


# ---------------------------------------------------------- partner processes

def _head_channel(t: Process) -> Name | None:
    """The session channel an in-session prefix is waiting on."""
    match t:
        case (sx.Receive(c, _, _) | sx.Send(c, _, _)
              | sx.ReceiveSession(c, _, _) | sx.SendSession(c, _, _)
              | sx.Offer(c, _) | sx.Choose(c, _, _)):
            return c
    return None


def construct_partner(
        gamma: dict[str, Sort],
        p: Process) -> tuple[Process, dict[str, Sort]] | None:
    """A stuck process completing irreducible p so the pair reduces.

    Requires p irreducible with live channels (ValueError otherwise).
    A request-headed thread gets its service accepted; failing that, a
    channel still typed at a session type gets its dual inhabited,
    preferring channels some thread is actually waiting on.  Returns
    None when every session is already closed on both ends inside p —
    unreachable for transparent processes.
    """
    if semantics.redexes(p):
        raise ValueError("process still reduces on its own")
    if not congruence.has_live_channels(p):
        raise ValueError("process has no live channels to complete")

    threads = congruence.normal_form(p).threads
    avoid = set(gamma)

    for t in threads:
        if isinstance(t, sx.Request):
            sort = gamma.get(t.service.base)
            if isinstance(sort, sx.ServiceSort):
                k = sx.bound_chan(t.chan.base)
                body, ext = inhabit(sort.session, k, avoid)
                return sx.Accept(t.service, k, body), ext

    delta = typecheck.check(gamma, p)
    open_chans = [c for c, ty in delta.items() if not isinstance(ty, sx.Bot)]
    heads = [c for t in threads
             if (c := _head_channel(t)) is not None and c in open_chans]
    ordered = heads + sorted((c for c in open_chans if c not in heads),
                             key=lambda c: (c.base, c.uid or 0))
    for c in ordered:
        body, ext = inhabit(typecheck.dual(delta[c]), c, avoid)
        return body, ext
    return None


# ----------------------------------------------------------- the certifier

@dataclass
class ProgressResult:
    verdict: str  # "certificate" | "counterexample" | "inconclusive"
    reason: str
    state: Process | None = None  # reachable state the refutation lives in
    cut: tuple[Process, ...] = ()  # its stuck sub-multiset of threads
    partner: Process | None = None
    failed: str | None = None  # "no-partner" or the violated condition a-d
    states_seen: int = 0
    bound_hit: bool = False

    def __bool__(self) -> bool:
        return self.verdict == "certificate"


_CONDITIONS = {
    "no-partner": "no stuck well-typed partner exists",
    "a": "the constructed partner is not stuck",
    "b": "the completed composition is not well-typed",
    "c": "the completed composition does not reduce",
    "d": "no reduct of the completed composition is transparent",
}


def _cut_failure(gamma: dict[str, Sort],
                 piece: Process) -> tuple[str, Process | None] | None:
    """None when the piece passes; else (failed condition, partner)."""
    if not congruence.has_live_channels(piece):
        return None
    if semantics.redexes(piece):
        return None
    got = construct_partner(gamma, piece)
    if got is None:
        return ("no-partner", None)
    partner, ext = got
    if semantics.redexes(partner):
        return ("a", partner)
    genv = {**gamma, **ext}
    pair = sx.Par(piece, partner)
    try:
        typecheck.check(genv, pair)
    except typecheck.TypingError:
        return ("b", partner)
    rs = semantics.redexes(pair)
    if not rs:
        return ("c", partner)
    if not any(depgraph.is_transparent(genv, semantics.step(pair, r)).ok
               for r in rs):
        return ("d", partner)
    return None


def check_progress(gamma: dict[str, Sort], p: Process, depth: int = 10,
                   subset_budget: int = 512,
                   max_states: int = 2000) -> ProgressResult:
    """Certify or refute progress, within bounds.

    Transparency certifies outright.  Otherwise reachable states up to
    `depth` steps (at most `max_states` of them) are decomposed into
    sub-multisets of their threads, smallest first, at most
    `subset_budget` per state; a decomposition with live channels that
    neither reduces nor accepts a canonical partner refutes progress.
    A clean but bounded search stays inconclusive: certificates never
    come from the search.
    """
    typecheck.check(gamma, p)  # propagate ill-typedness to the caller

    verdict = depgraph.is_transparent(gamma, p)
    if verdict.ok:
        return ProgressResult(
            "certificate",
            "transparent: every reachable decomposition stays completable")

    bound_hit = False
    start = congruence.normal_form(p).process()
    seen = {congruence.canonical_key(start)}
    frontier = [start]
    visited = 0

    while frontier:
        nxt: list[Process] = []
        for state in frontier:
            visited += 1
            nf = congruence.normal_form(state)
            threads = nf.threads
            budget = subset_budget
            for size in range(1, len(threads) + 1):
                for pick in itertools.combinations(range(len(threads)), size):
                    if budget == 0:
                        bound_hit = True
                        break
                    budget -= 1
                    piece = reduce(sx.Par, (threads[i] for i in pick))
                    bad = _cut_failure(gamma, piece)
                    if bad is not None:
                        failed, partner = bad
                        return ProgressResult(
                            "counterexample",
                            f"stuck decomposition: {_CONDITIONS[failed]}",
                            state=state,
                            cut=tuple(threads[i] for i in pick),
                            partner=partner, failed=failed,
                            states_seen=visited, bound_hit=bound_hit)
                if budget == 0:
                    break
            succs = semantics.redexes(state)
            if depth <= 0:
                if succs:
                    bound_hit = True
                continue
            for r in succs:
                q = semantics.step(state, r)
                key = congruence.canonical_key(q)
                if key in seen:
                    continue
                if len(seen) >= max_states:
                    bound_hit = True
                    continue
                seen.add(key)
                nxt.append(q)
        depth -= 1
        frontier = nxt

    return ProgressResult(
        "inconclusive",
        "no refutation within the search bounds; only transparency "
        "certifies", states_seen=visited, bound_hit=bound_hit)
