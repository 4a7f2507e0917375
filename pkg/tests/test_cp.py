import random

import pytest

from mellweb.cp import (
    CombinatorialProof,
    Derivation,
    DerivationError,
    check_cp,
    check_derivation,
    cp_equal,
    sequentialize,
    system_guess,
    translate_derivation,
)
from mellweb.formula import Atom, NegAtom, parse_sequent, render_sequent
from mellweb.gen import (
    d_ax,
    d_bot,
    d_contr,
    d_deep,
    d_der,
    d_one,
    d_par,
    d_tens,
    d_weak,
    d_wprom,
    random_derivation,
)
from mellweb.formula import TargetAddress
from mellweb.rgb import RgbCograph


def test_axiom_translation():
    cp = translate_derivation(d_ax("a"))
    assert render_sequent(cp.target) == "a, ~a"
    assert len(cp.source.web) == 2
    assert len(cp.source.classes) == 1
    assert check_cp(cp, "mll").ok


def test_check_derivation_rejects_bad_schema():
    bad = Derivation("ax_j", parse_sequent("a, ~b"))
    with pytest.raises(DerivationError):
        check_derivation(bad)
    good = d_ax("a")
    broken = Derivation("par", parse_sequent("a | ~a"), {"index": 1}, (good,))
    with pytest.raises(DerivationError):
        check_derivation(broken)


def test_double_dereliction():
    d = d_der(d_der(d_ax("a"), 0), 1)
    cp = translate_derivation(d)
    assert render_sequent(cp.target) == "?a, ?~a"
    assert len(cp.source.web) == 2  # both why-nots are non-image
    assert check_cp(cp, "mell").ok
    assert not check_cp(cp, "mll").ok


def test_wprom_translation():
    d = d_wprom(d_ax("a"), 0)  # !a, ?~a
    cp = translate_derivation(d)
    assert render_sequent(cp.target) == "!a, ?~a"
    assert len(cp.source.web) == 4
    assert len(cp.source.classes) == 2
    assert check_cp(cp, "mell").ok
    v = check_cp(cp, "mll")
    assert not v.ok


def test_weakening_translation():
    ax = d_ax("a", jumps=1)  # a, ~a, o
    d = d_weak(ax, 2, Atom("b"))
    cp = translate_derivation(d)
    assert render_sequent(cp.target) == "a, ~a, ?b"
    assert check_cp(cp, "mell").ok


def test_bot_and_one():
    d = d_bot(d_one(jumps=1), 1)
    cp = translate_derivation(d)
    assert render_sequent(cp.target) == "1, bot"
    assert check_cp(cp, "mllu").ok


def test_contraction_translation():
    # two weakenings onto equal why-nots, folded by contraction
    base = d_ax("a", jumps=2)  # a, ~a, o, o
    d = d_contr(d_weak(d_weak(base, 2, NegAtom("b")), 3, NegAtom("b")), 2)
    cp = translate_derivation(d)
    assert render_sequent(cp.target) == "a, ~a, ?~b"
    fibers = {}
    for v, a in cp.mapping.items():
        fibers.setdefault(str(a), []).append(v)
    assert len(fibers["2"]) == 2  # both jumps share the contracted why-not
    assert check_cp(cp, "mell").ok


def test_deep_rules_translation():
    # deep dereliction inside a par
    d0 = d_par(d_ax("a"), 0)  # a | ~a
    d1 = d_deep("deep_der", d0, TargetAddress(0, (1,)))
    cp = translate_derivation(d1)
    assert render_sequent(cp.target) == "a | ?~a"
    assert check_cp(cp, "mell").ok


def test_fig_style_jump_reassignment_pair_not_equal():
    # a, ~a * ~b, b, bot with the bottom anchored to either axiom
    left1 = d_bot(d_ax("a", jumps=1), 2)  # a, ~a, bot
    right1 = d_ax("b", order=(1, 0))  # ~b, b
    p1 = d_tens(left1, right1, pos1=1, pos2=0, k=1,
                order=[(1, 0), (2, 1), (1, 2)])
    # conclusion: a, ~a*~b, b, bot
    assert render_sequent(p1.conclusion) == "a, ~a * ~b, b, bot"

    left2 = d_ax("a", order=(0, 1))  # a, ~a
    right2 = d_bot(d_ax("b", jumps=1, order=(1, 0, 2)), 2)  # ~b, b, bot
    p2 = d_tens(left2, right2, pos1=1, pos2=0, k=1,
                order=[(1, 0), (2, 1), (2, 2)])
    assert render_sequent(p2.conclusion) == "a, ~a * ~b, b, bot"

    cp1 = translate_derivation(p1)
    cp2 = translate_derivation(p2)
    assert check_cp(cp1, "mllu").ok and check_cp(cp2, "mllu").ok
    assert cp_equal(cp1, cp1)
    assert not cp_equal(cp1, cp2)


def test_cp_equal_tens_permutations():
    # (a, b*c dance): permuting independent tensor rules gives equal proofs
    da = d_ax("a")
    db = d_ax("b")
    dc = d_ax("c")
    # ((a x b) x c) built in two rule orders over the same conclusion
    t1 = d_tens(da, db)  # a, ~a*b?? -- actives: ~a (last of da) and b
    # conclusion: a, ~a*b, ~b
    t2 = d_tens(t1, dc, pos1=2, pos2=0, k=2)  # a, ~a*b, ~b*c, ~c
    u1 = d_tens(db, dc)  # b, ~b*c, ~c
    u2 = d_tens(da, u1, pos1=1, pos2=0, k=1,
                order=[(1, 0), (2, 1), (2, 2)])
    # u2 actives: ~a and b: conclusion a, ~a*b, ~b*c, ~c
    assert render_sequent(t2.conclusion) == render_sequent(u2.conclusion)
    cp_t = translate_derivation(t2)
    cp_u = translate_derivation(u2)
    assert cp_equal(cp_t, cp_u)


def test_cp_equal_renamed_sources():
    d = d_wprom(d_ax("a"), 0)
    p = translate_derivation(d)
    ren = {v: f"x{v}" for v in p.source.web.labels}
    web2 = p.source.web.induced(p.source.web.labels)
    relabeled = type(p.source.web)(
        {ren[v]: l for v, l in web2.labels.items()},
        [(ren[u], ren[v]) for u, v in web2.r_edges()],
        [(ren[u], ren[v]) for u, v in web2.d_edges()],
        close=False,
    )
    q = CombinatorialProof(
        RgbCograph(relabeled, [{ren[v] for v in c} for c in p.source.classes]),
        p.target,
        {ren[v]: a for v, a in p.mapping.items()},
    )
    assert cp_equal(p, q)


def test_sequentialize_axiom():
    p = translate_derivation(d_ax("a"))
    d = sequentialize(p)
    assert d.rule == "ax_j"
    q = translate_derivation(d)
    assert cp_equal(p, q)


def test_sequentialize_promotion():
    d = d_wprom(d_ax("a"), 0)
    p = translate_derivation(d)
    back = sequentialize(p)
    q = translate_derivation(back)
    assert cp_equal(p, q)


def test_sequentialize_dereliction_weakening():
    ax = d_ax("a", jumps=1, order=(2, 0, 1))
    d = d_weak(ax, 0, NegAtom("b"))
    p = translate_derivation(d)
    back = sequentialize(p)
    q = translate_derivation(back)
    assert cp_equal(p, q)


def test_roundtrip_random_corpus():
    rng = random.Random(2024)
    done = 0
    for _ in range(120):
        d = random_derivation(rng, max_rules=10)
        try:
            p = translate_derivation(d)
        except DerivationError as exc:
            raise AssertionError(f"translation failed on {d}: {exc}") from exc
        assert check_cp(p, "mell").ok, (render_sequent(p.target),)
        back = sequentialize(p)
        check_derivation(back)
        q = translate_derivation(back)
        assert cp_equal(p, q), render_sequent(p.target)
        done += 1
    assert done == 120


def test_system_guess():
    assert system_guess(d_ax("a")) == "mll"
    assert system_guess(d_one()) == "mllu"
    assert system_guess(d_wprom(d_ax("a"), 0)) == "mell"
