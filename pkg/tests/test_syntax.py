import random

from hypothesis import given, strategies as st

import sessionpi.syntax as sx
import strategies as S


def test_free_names_compare_by_spelling():
    assert sx.chan("k") == sx.chan("k")
    assert sx.chan("k") != sx.chan("k2")
    assert sx.chan("k") != sx.svc("k")  # kind matters


def test_bound_names_are_distinct():
    a, b = sx.bound_chan("k"), sx.bound_chan("k")
    assert a != b
    assert a.base == b.base == "k"


def test_fresh_keeps_base_and_kind():
    k = sx.chan("k")
    f = k.fresh()
    assert (f.base, f.kind) == (k.base, k.kind)
    assert f != k


def test_free_session_channels():
    k, k2 = sx.chan("k"), sx.chan("k2")
    p = sx.Send(k, sx.IntLit(1), sx.Receive(k2, "x", sx.Stop()))
    assert sx.free_session_channels(p) == {k, k2}
    # a restriction binds
    assert sx.free_session_channels(sx.New(k, p)) == {k2}
    # delegation argument counts as an occurrence
    q = sx.SendSession(k, k2, sx.Stop())
    assert sx.free_session_channels(q) == {k, k2}
    # the received session is bound in the body
    m = sx.bound_chan("m")
    r = sx.ReceiveSession(k, m, sx.Send(m, sx.IntLit(1), sx.Stop()))
    assert sx.free_session_channels(r) == {k}


def test_service_prefixes_bind_their_channel():
    a = sx.svc("a")
    k = sx.bound_chan("k")
    body = sx.Send(k, sx.IntLit(1), sx.Stop())
    for mk in (sx.Serve, sx.Accept, sx.Request):
        assert sx.free_session_channels(mk(a, k, body)) == set()
    assert sx.free_service_names(sx.Request(a, k, body)) == {"a"}


def test_binder_exposes_binding_forms():
    a, k, m = sx.svc("a"), sx.bound_chan("k"), sx.bound_chan("m")
    body = sx.Stop()
    for p in (sx.New(k, body), sx.Serve(a, k, body), sx.Accept(a, k, body),
              sx.Request(a, k, body)):
        got = sx.binder(p)
        assert got is not None and got[0] == k
    assert sx.binder(sx.ReceiveSession(sx.chan("k"), m, body)) == (m, body)
    assert sx.binder(sx.Stop()) is None
    assert sx.binder(sx.Par(body, body)) is None


def test_substitute_replaces_free_variable():
    k = sx.chan("k")
    p = sx.Send(k, sx.Binop("+", sx.Var("x"), sx.IntLit(1)), sx.Stop())
    q = sx.substitute(p, "x", sx.IntLit(4))
    assert q == sx.Send(k, sx.Binop("+", sx.IntLit(4), sx.IntLit(1)),
                        sx.Stop())


def test_substitute_stops_at_shadowing_receive():
    k = sx.chan("k")
    inner = sx.Receive(k, "x", sx.Send(k, sx.Var("x"), sx.Stop()))
    p = sx.Send(k, sx.Var("x"), inner)
    q = sx.substitute(p, "x", sx.IntLit(7))
    assert q.expr == sx.IntLit(7)
    assert q.body == inner  # rebinding shields the inner x


def test_subst_chan_renames_only_free_occurrences():
    k, k2 = sx.chan("k"), sx.chan("k2")
    p = sx.Send(k, sx.IntLit(1), sx.New(k, sx.Send(k, sx.IntLit(2),
                                                   sx.Stop())))
    q = sx.subst_chan(p, k, k2)
    assert q.chan == k2
    assert q.body.chan == k  # the restricted k is a different binding
    assert q.body.body.chan == k


def test_refresh_renames_every_binder():
    src = sx.New(sx.bound_chan("k"),
                 sx.ReceiveSession(sx.chan("c"), sx.bound_chan("m"),
                                   sx.Stop()))
    out = sx.refresh(src)
    assert sx.alpha_equivalent(src, out)
    assert out.chan != src.chan
    assert out.body.bound != src.body.bound


def test_alpha_equivalent_ignores_binder_identity():
    k1, k2 = sx.bound_chan("k"), sx.bound_chan("j")
    p = sx.New(k1, sx.Send(k1, sx.IntLit(1), sx.Stop()))
    q = sx.New(k2, sx.Send(k2, sx.IntLit(1), sx.Stop()))
    assert sx.alpha_equivalent(p, q)
    r = sx.New(k2, sx.Send(k2, sx.IntLit(2), sx.Stop()))
    assert not sx.alpha_equivalent(p, r)


def test_alpha_equivalent_distinguishes_free_names():
    p = sx.Send(sx.chan("k"), sx.IntLit(1), sx.Stop())
    q = sx.Send(sx.chan("k2"), sx.IntLit(1), sx.Stop())
    assert not sx.alpha_equivalent(p, q)


@given(st.integers(0, 10_000))
def test_refresh_is_alpha_invariant(seed):
    _, p = S.well_typed(random.Random(seed))
    assert sx.alpha_equivalent(p, sx.refresh(p))


@given(st.integers(0, 10_000))
def test_refresh_preserves_free_channels(seed):
    _, p = S.well_typed(random.Random(seed))
    assert sx.free_session_channels(sx.refresh(p)) == \
        sx.free_session_channels(p)


@given(st.integers(0, 10_000))
def test_substituting_an_unused_variable_is_identity(seed):
    _, p = S.well_typed(random.Random(seed))
    assert sx.substitute(p, "zz_unused", sx.IntLit(0)) == p
