"""Structural rearrangement: normal forms and parallel decomposition.

A process is brought to the shape `new k1, .., kn . (t1 | .. | tm)`
where every thread `ti` starts with a prefix or a conditional.  Stopped
threads are dropped, parallel composition is flattened, and restrictions
are hoisted to the front; restrictions guarding nothing are erased.
Hoisting never captures because binder ids are globally unique.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

from . import syntax as sx
from .surface import print_process
from .syntax import Name, Process


@dataclass(frozen=True)
class NormalForm:
    binders: tuple[Name, ...]
    threads: tuple[Process, ...]

    def process(self) -> Process:
        """Rebuild an ordinary process from the normal form."""
        if not self.threads:
            return sx.Stop()
        body = reduce(sx.Par, self.threads)
        for c in reversed(self.binders):
            body = sx.New(c, body)
        return body


def normal_form(p: Process) -> NormalForm:
    binders: list[Name] = []
    threads: list[Process] = []
    todo: list[Process] = [p]
    while todo:
        q = todo.pop()
        match q:
            case sx.Stop():
                pass
            case sx.Par(l, r):
                todo.append(r)
                todo.append(l)
            case sx.New(c, body):
                binders.append(c)
                todo.append(body)
            case _:
                threads.append(q)
    if not threads:
        return NormalForm((), ())
    return NormalForm(tuple(binders), tuple(threads))


def threads_of(p: Process) -> tuple[Process, ...]:
    return normal_form(p).threads


def _continuations(t: Process) -> list[Process]:
    """The immediate continuation subterms of a thread."""
    match t:
        case sx.Offer(_, arms):
            return [a for _, a in arms]
        case sx.If(_, a, b):
            return [a, b]
        case (sx.Serve(_, _, b) | sx.Accept(_, _, b) | sx.Request(_, _, b)
              | sx.Receive(_, _, b) | sx.Send(_, _, b)
              | sx.ReceiveSession(_, _, b) | sx.SendSession(_, _, b)
              | sx.Choose(_, _, b)):
            return [b]
    return []


def maximal_parallel_subterms(p: Process) -> list[Process]:
    """The process itself plus every maximal parallel cluster nested
    under a prefix, in outside-in order.

    A cluster is a maximal region built from `|`, `new` and `0`; its
    threads' continuations are walked to find the clusters below.
    """
    out: list[Process] = []

    def cluster(p: Process) -> None:
        nf = normal_form(p)
        out.append(nf.process())
        for t in nf.threads:
            into(t)

    def into(t: Process) -> None:
        for c in _continuations(t):
            if isinstance(c, (sx.Par, sx.New)):
                cluster(c)
            elif not isinstance(c, sx.Stop):
                into(c)

    cluster(p)
    return out


def has_live_channels(p: Process) -> bool:
    """True when a session channel is mentioned outside every service
    prefix.

    Sessions under `serve` or accept only exist after an init step, so
    those scopes are skipped wholesale.  Anywhere else, any mention
    counts: a prefix subject, a delegated channel, or a channel bound by
    `new`, a request or a session receive.
    """
    todo: list[Process] = [p]
    while todo:
        match todo.pop():
            case sx.Serve() | sx.Accept():
                pass  # dormant scope
            case sx.Stop():
                pass
            case sx.Par(l, r):
                todo.append(l)
                todo.append(r)
            case sx.If(_, a, b):
                todo.append(a)
                todo.append(b)
            case _:
                return True  # every remaining form mentions a channel
    return False


def canonical_key(p: Process) -> str:
    """A printable key equal for structurally congruent alpha-variants.

    Threads are sorted under a bound-name-blind print, then every binder
    is numbered in traversal order and the term is re-printed.  Equal
    keys imply congruent processes; the converse can fail on ties, which
    only costs duplicate work in state exploration, never wrong answers.
    """
    nf = normal_form(p)

    blind: dict[Name, str] = {}

    def collect(p: Process, names: dict[Name, str], tag) -> None:
        b = sx.binder(p)
        if b is not None and b[0] not in names:
            names[b[0]] = tag(len(names))
        for q in _children_all(p):
            collect(q, names, tag)

    for t in nf.threads:
        collect(t, blind, lambda _: "#x")
    for c in nf.binders:
        blind.setdefault(c, "#x")

    order = sorted(nf.threads, key=lambda t: print_process(t, blind))

    numbered: dict[Name, str] = {}
    for t in order:
        collect(t, numbered, lambda i: f"b{i}")
    for c in nf.binders:
        numbered.setdefault(c, f"b{len(numbered)}")

    used = sorted({numbered[c] for c in nf.binders})
    head = f"new {', '.join(used)} . " if used else ""
    return head + " | ".join(print_process(t, numbered) for t in order)


def _children_all(p: Process) -> list[Process]:
    match p:
        case sx.Stop():
            return []
        case sx.Par(l, r):
            return [l, r]
        case sx.New(_, b):
            return [b]
        case sx.If(_, a, b):
            return [a, b]
        case sx.Offer(_, arms):
            return [a for _, a in arms]
        case _:
            return _continuations(p)
