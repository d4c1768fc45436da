"""Generators for the property suites.

Session types come from a hypothesis strategy.  Processes come from
seeded samplers built on the inhabitation machinery, driven through
hypothesis as @given(st.integers(...)) so failures shrink to small
seeds: generating well-typed processes directly is far cheaper than
filtering random terms.
"""
from __future__ import annotations

import dataclasses
import random
from functools import reduce

from hypothesis import strategies as st

import sessionpi.progress as pg
import sessionpi.syntax as sx
import sessionpi.typecheck as tc

LABELS = ("go", "stop", "ok", "no", "more")

_basic = st.sampled_from([sx.INT, sx.BOOL, sx.STRING])


def _arms(child, build):
    return st.lists(st.tuples(st.sampled_from(LABELS), child),
                    min_size=1, max_size=3,
                    unique_by=lambda kv: kv[0]).map(build)


session_types = st.recursive(
    st.just(sx.End()),
    lambda child: st.one_of(
        st.builds(sx.In, _basic, child),
        st.builds(sx.Out, _basic, child),
        st.builds(sx.In, child, child),
        st.builds(sx.Out, child, child),
        st.builds(sx.In, st.builds(sx.ServiceSort, child), child),
        st.builds(sx.Out, st.builds(sx.ServiceSort, child), child),
        _arms(child, sx.branch),
        _arms(child, sx.select)),
    max_leaves=6)


# ------------------------------------------------------------ seeded samplers

_BASICS = (sx.INT, sx.BOOL, sx.STRING)


def rand_type(rng: random.Random, depth: int = 3,
              deleg: bool = True) -> sx.SessionType:
    # deleg=False leaves out session payloads in both directions: dual
    # flips them, and an outgoing delegation inhabits to a restriction
    if depth <= 0 or rng.random() < 0.25:
        return sx.End()
    case = rng.randrange(8 if deleg else 6)
    sub = lambda: rand_type(rng, depth - 1, deleg)
    if case == 0:
        return sx.In(rng.choice(_BASICS), sub())
    if case == 1:
        return sx.Out(rng.choice(_BASICS), sub())
    if case == 2:
        return sx.In(sx.ServiceSort(sub()), sub())
    if case == 3:
        return sx.Out(sx.ServiceSort(sub()), sub())
    if case in (4, 5):
        labels = rng.sample(LABELS, rng.randint(1, 3))
        build = sx.branch if case == 4 else sx.select
        return build([(l, sub()) for l in labels])
    return sx.In(sub(), sub()) if case == 6 else sx.Out(sub(), sub())


def _nonend_type(rng: random.Random, **kw) -> sx.SessionType:
    while True:
        t = rand_type(rng, **kw)
        if not isinstance(t, sx.End):
            return t


def _inhabit_into(gamma: dict, a: sx.SessionType, k: sx.Name) -> sx.Process:
    p, ext = pg.inhabit(a, k, avoid=set(gamma))
    gamma.update(ext)
    return p


def well_typed(rng: random.Random) -> tuple[dict, sx.Process]:
    """A well-typed process: dual inhabitant pairs on distinct channels,
    some restricted, sometimes a service with a client."""
    gamma: dict = {}
    threads: list[sx.Process] = []
    bound: list[sx.Name] = []
    for i in range(rng.randint(1, 3)):
        a = rand_type(rng)
        if rng.random() < 0.4:
            k = sx.bound_chan(f"k{i}")
            bound.append(k)
        else:
            k = sx.chan(f"k{i}")
        threads.append(_inhabit_into(gamma, a, k))
        threads.append(_inhabit_into(gamma, tc.dual(a), k))
    if rng.random() < 0.4:
        a = rand_type(rng)
        name = "svc"
        gamma[name] = sx.ServiceSort(a)
        k = sx.bound_chan("k")
        threads.append(sx.Serve(sx.svc(name), k, _inhabit_into(gamma, a, k)))
        k2 = sx.bound_chan("k")
        threads.append(sx.Request(sx.svc(name), k2,
                                  _inhabit_into(gamma, tc.dual(a), k2)))
    rng.shuffle(threads)
    p = reduce(sx.Par, threads)
    for k in bound:
        p = sx.New(k, p)
    return gamma, p


def transparent(rng: random.Random) -> tuple[dict, sx.Process]:
    """A transparent process: a forwarding chain, independent dual
    pairs, sometimes a service invocation; the dependency graph is a
    disjoint union of paths."""
    gamma: dict = {}
    threads: list[sx.Process] = []
    c = rng.randint(2, 4)
    ks = [sx.chan(f"c{i}") for i in range(c)]
    threads.append(sx.Send(ks[0], sx.IntLit(rng.randrange(100)), sx.Stop()))
    for i in range(c - 1):
        threads.append(sx.Receive(ks[i], "x",
                                  sx.Send(ks[i + 1], sx.Var("x"), sx.Stop())))
    threads.append(sx.Receive(ks[-1], "y", sx.Stop()))
    for i in range(rng.randint(0, 2)):
        a = rand_type(rng, depth=2)
        k = sx.chan(f"p{i}")
        threads.append(_inhabit_into(gamma, a, k))
        threads.append(_inhabit_into(gamma, tc.dual(a), k))
    if rng.random() < 0.5:
        a = rand_type(rng, depth=2)
        gamma["svc"] = sx.ServiceSort(a)
        k = sx.bound_chan("k")
        threads.append(sx.Serve(sx.svc("svc"), k,
                                _inhabit_into(gamma, a, k)))
        k2 = sx.bound_chan("k")
        threads.append(sx.Request(sx.svc("svc"), k2,
                                  _inhabit_into(gamma, tc.dual(a), k2)))
    rng.shuffle(threads)
    return gamma, reduce(sx.Par, threads)


def irreducible_live(rng: random.Random) -> tuple[dict, sx.Process]:
    """Transparent, irreducible, with live channels: lone inhabitants
    on distinct channels, sometimes a pending request or a dormant
    server."""
    gamma: dict = {}
    threads: list[sx.Process] = []
    for i in range(rng.randint(1, 3)):
        a = _nonend_type(rng, depth=2)
        threads.append(_inhabit_into(gamma, a, sx.chan(f"k{i}")))
    if rng.random() < 0.4:
        a = rand_type(rng, depth=2)
        gamma["req"] = sx.ServiceSort(a)
        k = sx.bound_chan("k")
        threads.append(sx.Request(sx.svc("req"), k,
                                  _inhabit_into(gamma, tc.dual(a), k)))
    if rng.random() < 0.3:
        a = rand_type(rng, depth=2)
        gamma["dorm"] = sx.ServiceSort(a)
        k = sx.bound_chan("k")
        threads.append(sx.Serve(sx.svc("dorm"), k,
                                _inhabit_into(gamma, a, k)))
    rng.shuffle(threads)
    return gamma, reduce(sx.Par, threads)


def program(rng: random.Random) -> tuple[dict, sx.Process]:
    """A well-typed program: services plus clients, no free sessions,
    no restrictions (so no delegation outputs in the types)."""
    gamma: dict = {}
    threads: list[sx.Process] = []
    for i in range(rng.randint(1, 2)):
        a = rand_type(rng, depth=2, deleg=False)
        name = f"s{i}"
        gamma[name] = sx.ServiceSort(a)
        k = sx.bound_chan("k")
        threads.append(sx.Serve(sx.svc(name), k,
                                _inhabit_into(gamma, a, k)))
        if rng.random() < 0.3:
            k = sx.bound_chan("k")
            threads.append(sx.Accept(sx.svc(name), k,
                                     _inhabit_into(gamma, a, k)))
        for _ in range(rng.randint(0, 2)):
            k = sx.bound_chan("k")
            threads.append(sx.Request(sx.svc(name), k,
                                      _inhabit_into(gamma, tc.dual(a), k)))
    rng.shuffle(threads)
    return gamma, reduce(sx.Par, threads)


# ------------------------------------------------- scaling family + AST size

def forwarding_family(c: int, pad_to: int = 0) -> sx.Process:
    """c channels relaying one value, padded with inert conditionals
    to roughly pad_to AST nodes."""
    ks = [sx.chan(f"k{i}") for i in range(c)]
    threads = [sx.Send(ks[0], sx.IntLit(1), sx.Stop())]
    for i in range(c - 1):
        threads.append(sx.Receive(ks[i], "x",
                                  sx.Send(ks[i + 1], sx.Var("x"), sx.Stop())))
    threads.append(sx.Receive(ks[-1], "x", sx.Stop()))
    pad = sx.If(sx.BoolLit(True), sx.Stop(), sx.Stop())
    base = sum(size(t) for t in threads)
    for _ in range(max(0, (pad_to - base) // size(pad))):
        threads.append(pad)
    return reduce(sx.Par, threads)


def size(p: sx.Process) -> int:
    """AST node count over processes and expressions."""
    n = 0
    todo: list = [p]
    while todo:
        x = todo.pop()
        n += 1
        for f in dataclasses.fields(x):
            v = getattr(x, f.name)
            for u in v if isinstance(v, tuple) else (v,):
                if isinstance(u, (sx.Process, sx.Expr)):
                    todo.append(u)
                elif isinstance(u, tuple):
                    todo.extend(w for w in u
                                if isinstance(w, (sx.Process, sx.Expr)))
    return n
