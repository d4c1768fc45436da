"""Abstract syntax for a pi-calculus with binary sessions.

Names are split into two kinds.  Service names stand for public entry
points; they are never bound by the process syntax and are typed by an
environment mapping them to service sorts.  Session channels are created
fresh at every connection and are bound by `New`, by the accept/request
prefixes, and by session reception.

Every binder allocates a globally unique id, so distinct binders are
distinct `Name` values even when they share a spelling.  Free channels
have uid None and are identified by their spelling alone.  This keeps
substitution capture-free without on-the-fly renaming; `refresh` renews
the ids of a term that is about to be duplicated.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

_uids = itertools.count(1)

CHAN = "chan"
SERVICE = "service"


@dataclass(frozen=True)
class Name:
    base: str
    kind: str = CHAN
    uid: int | None = None

    def fresh(self) -> Name:
        """A new bound instance with the same spelling."""
        return Name(self.base, self.kind, next(_uids))


def chan(base: str) -> Name:
    return Name(base, CHAN, None)


def svc(base: str) -> Name:
    return Name(base, SERVICE, None)


def bound_chan(base: str) -> Name:
    return Name(base, CHAN, next(_uids))


# ---------------------------------------------------------------- expressions

class Expr:
    pass


@dataclass(frozen=True)
class IntLit(Expr):
    value: int


@dataclass(frozen=True)
class BoolLit(Expr):
    value: bool


@dataclass(frozen=True)
class StrLit(Expr):
    value: str


@dataclass(frozen=True)
class Var(Expr):
    name: str


@dataclass(frozen=True)
class SvcRef(Expr):
    """A service name used as a value, e.g. sent over a channel."""
    name: str


@dataclass(frozen=True)
class Unop(Expr):
    op: str  # "-" or "not"
    arg: Expr


@dataclass(frozen=True)
class Binop(Expr):
    op: str  # + - * = != < <= > >= and or
    left: Expr
    right: Expr


# ---------------------------------------------------------------- sorts/types

class SessionType:
    pass


class Sort:
    pass


@dataclass(frozen=True)
class Basic(Sort):
    name: str


INT = Basic("int")
BOOL = Basic("bool")
STRING = Basic("string")


@dataclass(frozen=True)
class ServiceSort(Sort):
    session: SessionType


@dataclass(frozen=True)
class End(SessionType):
    pass


@dataclass(frozen=True)
class Bot(SessionType):
    """Both endpoints of the channel are used; occurs only in typings."""


@dataclass(frozen=True)
class In(SessionType):
    payload: Sort | SessionType
    then: SessionType


@dataclass(frozen=True)
class Out(SessionType):
    payload: Sort | SessionType
    then: SessionType


@dataclass(frozen=True)
class BranchT(SessionType):
    options: tuple[tuple[str, SessionType], ...]


@dataclass(frozen=True)
class SelectT(SessionType):
    options: tuple[tuple[str, SessionType], ...]


def _options(pairs) -> tuple[tuple[str, SessionType], ...]:
    pairs = tuple(sorted(pairs, key=lambda p: p[0]))
    labels = [l for l, _ in pairs]
    if len(set(labels)) != len(labels):
        raise ValueError(f"duplicate label in {labels}")
    if not pairs:
        raise ValueError("empty label set")
    return pairs


def branch(pairs) -> BranchT:
    """A branch type with its options in canonical (sorted) order."""
    return BranchT(_options(pairs))


def select(pairs) -> SelectT:
    """A select type with its options in canonical (sorted) order."""
    return SelectT(_options(pairs))


# ------------------------------------------------------------------ processes

class Process:
    pass


@dataclass(frozen=True)
class Stop(Process):
    pass


@dataclass(frozen=True)
class Par(Process):
    left: Process
    right: Process


@dataclass(frozen=True)
class New(Process):
    chan: Name
    body: Process


@dataclass(frozen=True)
class Serve(Process):
    """Replicated accept: stays in place and spawns one body per request."""
    service: Name
    chan: Name
    body: Process


@dataclass(frozen=True)
class Accept(Process):
    """One-shot accept: consumed by the connection it serves."""
    service: Name
    chan: Name
    body: Process


@dataclass(frozen=True)
class Request(Process):
    service: Name
    chan: Name
    body: Process


@dataclass(frozen=True)
class Receive(Process):
    chan: Name
    var: str
    body: Process


@dataclass(frozen=True)
class Send(Process):
    chan: Name
    expr: Expr
    body: Process


@dataclass(frozen=True)
class ReceiveSession(Process):
    chan: Name
    bound: Name
    body: Process


@dataclass(frozen=True)
class SendSession(Process):
    chan: Name
    sent: Name
    body: Process


@dataclass(frozen=True)
class Offer(Process):
    chan: Name
    arms: tuple[tuple[str, Process], ...]


@dataclass(frozen=True)
class Choose(Process):
    chan: Name
    label: str
    body: Process


@dataclass(frozen=True)
class If(Process):
    test: Expr
    then: Process
    els: Process


# binder accessors: (bound name, subterm it scopes over)

def binder(p: Process) -> tuple[Name, Process] | None:
    match p:
        case New(c, body) | ReceiveSession(_, c, body):
            return c, body
        case Serve(_, c, body) | Accept(_, c, body) | Request(_, c, body):
            return c, body
    return None


# ----------------------------------------------------------------- traversals

def free_session_channels(p: Process) -> set[Name]:
    """Free session channels of a process.

    Binder ids are globally unique, so a bound channel's occurrences can
    only sit under its own binder: the free channels are the occurring
    names minus the bound ones, collected in one non-recursive sweep.
    """
    occurring: set[Name] = set()
    bound: set[Name] = set()
    todo: list[Process] = [p]
    while todo:
        q = todo.pop()
        b = binder(q)
        if b is not None:
            bound.add(b[0])
        match q:
            case Receive(c, _, _) | Send(c, _, _) | Choose(c, _, _) \
                    | ReceiveSession(c, _, _) | Offer(c, _):
                occurring.add(c)
            case SendSession(c, s, _):
                occurring.add(c)
                occurring.add(s)
            case _:
                pass
        match q:
            case Par(l, r):
                todo.append(l)
                todo.append(r)
            case If(_, t, e):
                todo.append(t)
                todo.append(e)
            case Offer(_, arms):
                todo.extend(a for _, a in arms)
            case Stop():
                pass
            case _:
                todo.append(q.body)  # type: ignore[attr-defined]
    return occurring - bound


def free_service_names(p: Process) -> set[str]:
    out: set[str] = set()

    def go_expr(e: Expr) -> None:
        match e:
            case SvcRef(n):
                out.add(n)
            case Unop(_, a):
                go_expr(a)
            case Binop(_, l, r):
                go_expr(l)
                go_expr(r)
            case _:
                pass

    def go(p: Process) -> None:
        match p:
            case Stop():
                pass
            case Par(l, r):
                go(l)
                go(r)
            case New(_, body) | Receive(_, _, body) | ReceiveSession(_, _, body):
                go(body)
            case Serve(a, _, body) | Accept(a, _, body) | Request(a, _, body):
                out.add(a.base)
                go(body)
            case Send(_, e, body):
                go_expr(e)
                go(body)
            case SendSession(_, _, body) | Choose(_, _, body):
                go(body)
            case Offer(_, arms):
                for _, arm in arms:
                    go(arm)
            case If(e, t, el):
                go_expr(e)
                go(t)
                go(el)

    go(p)
    return out


def expr_vars(e: Expr) -> set[str]:
    match e:
        case Var(n):
            return {n}
        case Unop(_, a):
            return expr_vars(a)
        case Binop(_, l, r):
            return expr_vars(l) | expr_vars(r)
        case _:
            return set()


def free_vars(p: Process) -> set[str]:
    """Free expression variables of a process."""
    out: set[str] = set()

    def go(p: Process, bound: frozenset[str]) -> None:
        match p:
            case Stop():
                pass
            case Par(l, r):
                go(l, bound)
                go(r, bound)
            case New(_, body) | ReceiveSession(_, _, body) | SendSession(_, _, body):
                go(body, bound)
            case Serve(_, _, body) | Accept(_, _, body) | Request(_, _, body):
                go(body, bound)
            case Receive(_, x, body):
                go(body, bound | {x})
            case Send(_, e, body):
                out.update(expr_vars(e) - bound)
                go(body, bound)
            case Choose(_, _, body):
                go(body, bound)
            case Offer(_, arms):
                for _, arm in arms:
                    go(arm, bound)
            case If(e, t, el):
                out.update(expr_vars(e) - bound)
                go(t, bound)
                go(el, bound)

    go(p, frozenset())
    return out


def _map_body(p: Process, f) -> Process:
    """Rebuild p with every immediate subprocess replaced by f(subprocess)."""
    match p:
        case Stop():
            return p
        case Par(l, r):
            return Par(f(l), f(r))
        case New(c, b):
            return New(c, f(b))
        case Serve(a, c, b):
            return Serve(a, c, f(b))
        case Accept(a, c, b):
            return Accept(a, c, f(b))
        case Request(a, c, b):
            return Request(a, c, f(b))
        case Receive(c, x, b):
            return Receive(c, x, f(b))
        case Send(c, e, b):
            return Send(c, e, f(b))
        case ReceiveSession(c, n, b):
            return ReceiveSession(c, n, f(b))
        case SendSession(c, n, b):
            return SendSession(c, n, f(b))
        case Offer(c, arms):
            return Offer(c, tuple((l, f(a)) for l, a in arms))
        case Choose(c, l, b):
            return Choose(c, l, f(b))
        case If(e, t, el):
            return If(e, f(t), f(el))
    raise TypeError(f"not a process: {p!r}")


def subst_chan(p: Process, old: Name, new: Name) -> Process:
    """p with free occurrences of channel `old` replaced by `new`.

    Binders are globally unique, so no capture check is needed; a binder
    equal to `old` still stops the walk for safety.
    """
    def sub(n: Name) -> Name:
        return new if n == old else n

    def go(p: Process) -> Process:
        b = binder(p)
        if b is not None and b[0] == old:
            return p
        match p:
            case Receive(c, x, body):
                return Receive(sub(c), x, go(body))
            case Send(c, e, body):
                return Send(sub(c), e, go(body))
            case ReceiveSession(c, n, body):
                return ReceiveSession(sub(c), n, go(body))
            case SendSession(c, n, body):
                return SendSession(sub(c), sub(n), go(body))
            case Offer(c, arms):
                return Offer(sub(c), tuple((l, go(a)) for l, a in arms))
            case Choose(c, l, body):
                return Choose(sub(c), l, go(body))
            case _:
                return _map_body(p, go)

    return go(p)


def substitute_expr(e: Expr, name: str, value: Expr) -> Expr:
    match e:
        case Var(n) if n == name:
            return value
        case Unop(op, a):
            return Unop(op, substitute_expr(a, name, value))
        case Binop(op, l, r):
            return Binop(op, substitute_expr(l, name, value),
                         substitute_expr(r, name, value))
        case _:
            return e


def substitute(p: Process, name: str, value: Expr) -> Process:
    """p with free occurrences of expression variable `name` replaced."""
    def go(p: Process) -> Process:
        match p:
            case Receive(c, x, body):
                if x == name:
                    return p
                return Receive(c, x, go(body))
            case Send(c, e, body):
                return Send(c, substitute_expr(e, name, value), go(body))
            case If(e, t, el):
                return If(substitute_expr(e, name, value), go(t), go(el))
            case _:
                return _map_body(p, go)

    return go(p)


def refresh(p: Process) -> Process:
    """A copy of p whose bound channels all carry new unique ids.

    Use before putting a copy of a term (e.g. a replicated service body)
    next to the original, so binder ids stay globally unique.
    """
    def go(p: Process, env: dict[Name, Name]) -> Process:
        def sub(n: Name) -> Name:
            return env.get(n, n)

        match p:
            case Stop():
                return p
            case Par(l, r):
                return Par(go(l, env), go(r, env))
            case New(c, body):
                c2 = c.fresh()
                return New(c2, go(body, env | {c: c2}))
            case Serve(a, c, body):
                c2 = c.fresh()
                return Serve(a, c2, go(body, env | {c: c2}))
            case Accept(a, c, body):
                c2 = c.fresh()
                return Accept(a, c2, go(body, env | {c: c2}))
            case Request(a, c, body):
                c2 = c.fresh()
                return Request(a, c2, go(body, env | {c: c2}))
            case Receive(c, x, body):
                return Receive(sub(c), x, go(body, env))
            case Send(c, e, body):
                return Send(sub(c), e, go(body, env))
            case ReceiveSession(c, n, body):
                n2 = n.fresh()
                return ReceiveSession(sub(c), n2, go(body, env | {n: n2}))
            case SendSession(c, n, body):
                return SendSession(sub(c), sub(n), go(body, env))
            case Offer(c, arms):
                return Offer(sub(c), tuple((l, go(a, env)) for l, a in arms))
            case Choose(c, l, body):
                return Choose(sub(c), l, go(body, env))
            case If(e, t, el):
                return If(e, go(t, env), go(el, env))
        raise TypeError(f"not a process: {p!r}")

    return go(p, {})


def alpha_equivalent(p: Process, q: Process) -> bool:
    """Structural equality up to renaming of bound channels."""
    def names_eq(n: Name, m: Name, env: dict[Name, Name]) -> bool:
        if n in env:
            return env[n] == m
        return n == m and m not in env.values()

    def go(p: Process, q: Process, env: dict[Name, Name]) -> bool:
        match p, q:
            case Stop(), Stop():
                return True
            case Par(a, b), Par(c, d):
                return go(a, c, env) and go(b, d, env)
            case New(n, b1), New(m, b2):
                return go(b1, b2, env | {n: m})
            case Serve(a1, n, b1), Serve(a2, m, b2):
                return a1 == a2 and go(b1, b2, env | {n: m})
            case Accept(a1, n, b1), Accept(a2, m, b2):
                return a1 == a2 and go(b1, b2, env | {n: m})
            case Request(a1, n, b1), Request(a2, m, b2):
                return a1 == a2 and go(b1, b2, env | {n: m})
            case Receive(c1, x1, b1), Receive(c2, x2, b2):
                if not names_eq(c1, c2, env):
                    return False
                if x1 != x2:
                    # expression variables are not renamed; require equality
                    return False
                return go(b1, b2, env)
            case Send(c1, e1, b1), Send(c2, e2, b2):
                return names_eq(c1, c2, env) and e1 == e2 and go(b1, b2, env)
            case ReceiveSession(c1, n, b1), ReceiveSession(c2, m, b2):
                return names_eq(c1, c2, env) and go(b1, b2, env | {n: m})
            case SendSession(c1, n1, b1), SendSession(c2, n2, b2):
                return (names_eq(c1, c2, env) and names_eq(n1, n2, env)
                        and go(b1, b2, env))
            case Offer(c1, arms1), Offer(c2, arms2):
                if not names_eq(c1, c2, env) or len(arms1) != len(arms2):
                    return False
                return all(l1 == l2 and go(a1, a2, env)
                           for (l1, a1), (l2, a2) in zip(arms1, arms2))
            case Choose(c1, l1, b1), Choose(c2, l2, b2):
                return names_eq(c1, c2, env) and l1 == l2 and go(b1, b2, env)
            case If(e1, t1, el1), If(e2, t2, el2):
                return e1 == e2 and go(t1, t2, env) and go(el1, el2, env)
        return False

    return go(p, q, {})
