import random

import pytest
from hypothesis import given, strategies as st

import sessionpi.surface as sf
import sessionpi.syntax as sx
import sessionpi.typecheck as tc
import strategies as S
from sessionpi.examples import SOURCES


def parse(s, sessions=(), gamma=None):
    return sf.parse_process(s, sessions=sessions, gamma=gamma)


def delta_of(s, sessions=(), gamma=None, **kw):
    return tc.check(gamma or {}, parse(s, sessions, gamma), **kw)


def shown(delta):
    return sf.print_delta(delta)


# ------------------------------------------------------------------- goldens

def test_single_send():
    assert shown(delta_of("k!(5).0", ("k",))) == "k : ![int].end"


def test_dualized_pair_closes_the_channel():
    assert shown(delta_of("k!(5).0 | k?(x).0", ("k",))) == "k : bot"


def test_relay_typing():
    d = delta_of("k?(x).k1!(x).0 | k!(5).0 | k1?(y).0", ("k", "k1"))
    assert shown(d) == "k : bot, k1 : bot"


def test_buyer_seller_types_to_empty():
    src = sf.parse_source(SOURCES["buyer_seller"])
    assert tc.check(src.gamma, src.process) == {}


def test_received_value_flows_into_the_next_send():
    d = delta_of("k?(x).k1!(x and true).0", ("k", "k1"))
    assert shown(d) == "k : ?[bool].end, k1 : ![bool].end"


def test_branch_arms_may_split_the_remaining_usage():
    d = delta_of("k >> {yes: k!(1).0, no: k?(x).0}", ("k",))
    assert shown(d) == "k : &{no: ?[int].end, yes: ![int].end}"


def test_select_synthesizes_a_single_label():
    d = delta_of("k << go . k!(1).0", ("k",))
    assert shown(d) == "k : +{go: ![int].end}"


def test_delegation_types_both_channels():
    d = delta_of("k!((k1)).0", ("k", "k1"))
    assert shown(d) == "k : ![end].end, k1 : end"


def test_received_session_is_consumed_in_the_body():
    d = delta_of("k?((m)).m?(x).0", ("k",))
    assert shown(d) == "k : ?[?[int].end].end"


def test_restriction_hides_a_closed_channel():
    d = delta_of("new m . (m!(1).0 | m?(x).0)")
    assert d == {}


# -------------------------------------------------------------------- errors

@pytest.mark.parametrize("src,sessions,tag", [
    ("k!(1).0 | k!(2).0", ("k",), "T-Par"),
    ("if 5 then 0 else 0", (), "T-Cond"),
    ("new m . m!(1).0", (), "T-Res"),
])
def test_rule_tagged_errors(src, sessions, tag):
    with pytest.raises(tc.TypingError) as e:
        delta_of(src, sessions)
    assert tag in str(e.value)


def test_errors_on_terms_the_parser_cannot_produce():
    # the parser rejects these shapes up front, the checker still must
    k = sx.chan("k")
    with pytest.raises(tc.TypingError, match="T-Out"):
        tc.check({}, sx.Send(k, sx.Var("x"), sx.Stop()))
    with pytest.raises(tc.TypingError, match="T-Bra"):
        tc.check({}, sx.Offer(k, (("a", sx.Stop()), ("a", sx.Stop()))))
    with pytest.raises(tc.TypingError, match="T-Req"):
        tc.check({}, sx.Request(sx.svc("b"), sx.bound_chan("k"), sx.Stop()))


def test_serve_body_must_close_its_session():
    g = {"a": sx.ServiceSort(sx.End())}
    with pytest.raises(tc.TypingError) as e:
        delta_of("*a(k).k1!(1).0", ("k1",), g)
    assert "body uses open session k1" in str(e.value)


def test_relax_services_allows_open_sessions_in_bodies():
    g = {"a": sx.ServiceSort(sx.End())}
    d = delta_of("*a(k).k1!(1).0", ("k1",), g, relax_services=True)
    assert shown(d) == "k1 : ![int].end"


def test_branch_against_declared_service_type():
    g = {"a": sx.ServiceSort(sf.parse_type("![int].end"))}
    with pytest.raises(tc.TypingError):
        delta_of("*a(k).k?(x).0", (), g)  # server must send, not receive


def test_conditional_arms_must_agree():
    with pytest.raises(tc.TypingError) as e:
        delta_of("if true then k!(1).0 else k!(true).0", ("k",))
    assert "T-Cond" in str(e.value) or "unify" in str(e.value)


# ---------------------------------------------------------------- check_against

def test_check_against_accepts_the_exact_typing():
    p = parse("k?(x).0", ("k",))
    tc.check_against({}, p, {sx.chan("k"): sf.parse_type("?[bool].end")})


def test_check_against_rejects_other_typings():
    p = parse("k?(x).0", ("k",))
    with pytest.raises(tc.TypingError):
        tc.check_against({}, p, {sx.chan("k"): sf.parse_type("![int].end")})
    with pytest.raises(tc.TypingError):
        tc.check_against({}, p, {})


# ------------------------------------------------------------------ is_program

def test_is_program():
    src = sf.parse_source(SOURCES["buyer_seller"])
    assert tc.is_program(src.process)
    # free sessions disqualify
    assert not tc.is_program(parse("k!(1).0", ("k",)))
    # real restrictions disqualify
    assert not tc.is_program(parse("new m . (m!(1).0 | m?(x).0)"))
    # vacuous restrictions are erasable, so they do not
    assert tc.is_program(parse("new m . 0"))


# ------------------------------------------------------------------ properties

def test_dual_is_an_involution_golden():
    t = sf.parse_type("?[int].![<end>].+{a: end}")
    assert tc.dual(tc.dual(t)) == t


@given(S.session_types)
def test_dual_is_an_involution(t):
    assert tc.dual(tc.dual(t)) == t


@given(S.session_types)
def test_dual_swaps_polarity_keeps_payload(t):
    d = tc.dual(t)
    match t:
        case sx.In(p, _):
            assert d == sx.Out(p, tc.dual(t.then))
        case sx.Out(p, _):
            assert d == sx.In(p, tc.dual(t.then))
        case sx.BranchT(_):
            assert isinstance(d, sx.SelectT)
        case sx.SelectT(_):
            assert isinstance(d, sx.BranchT)
        case sx.End():
            assert d == t


@given(st.integers(0, 10_000))
def test_generated_well_typed_processes_check(seed):
    g, p = S.well_typed(random.Random(seed))
    tc.check(g, p)  # must not raise


@given(st.integers(0, 10_000))
def test_typing_is_alpha_invariant(seed):
    g, p = S.well_typed(random.Random(seed))
    assert tc.check(g, p) == tc.check(g, sx.refresh(p))


@given(st.integers(0, 10_000))
def test_relax_accepts_everything_strict_accepts(seed):
    g, p = S.well_typed(random.Random(seed))
    strict = tc.check(g, p)
    relaxed = tc.check(g, p, relax_services=True)
    assert strict == relaxed
