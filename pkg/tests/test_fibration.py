import pytest

from mellweb.fibration import (
    FibrationError,
    VertexMap,
    check_allegiant,
    check_linear_fibration,
    check_mell_fibration,
    check_wn_map,
    decompose_fibration,
)
from mellweb.formula import parse_sequent
from mellweb.relweb import web_of_sequent
from mellweb.rgb import RgbCograph


def vmap(src_text, tgt_text, mapping):
    src = web_of_sequent(parse_sequent(src_text))
    tgt = web_of_sequent(parse_sequent(tgt_text))
    return VertexMap(src, tgt, mapping)


def ident(text):
    web = web_of_sequent(parse_sequent(text))
    return VertexMap(web, web, {v: v for v in web.labels})


def test_allegiant():
    f = vmap("a, ~a", "a | ~a", {"0": "0.0", "1": "0.1"})
    g = RgbCograph(f.source, [["0", "1"]])
    assert check_allegiant(g, f).ok

    f = vmap("a, ~a", "a | a", {"0": "0.0", "1": "0.1"})
    g = RgbCograph(f.source, [["0", "1"]])
    # the source labels no longer match the targets pointwise either, so build
    # a same-label pair mapped onto two equal atoms
    f2 = vmap("a, a", "a | a", {"0": "0.0", "1": "0.1"})
    g2 = RgbCograph(f2.source, [["0", "1"]])
    v = check_allegiant(g2, f2)
    assert not v.ok and v.condition == "allegiant-dual"

    f = vmap("o, a, ~a", "!b, a, ~a", {"0": "0", "1": "1", "2": "2"})
    g = RgbCograph(f.source, [["0", "1", "2"]])
    v = check_allegiant(g, f)
    assert not v.ok and v.condition == "allegiant-jump"


def test_linear_fibration_identity_and_contraction():
    assert check_linear_fibration(ident("a | ~a")).ok
    assert check_linear_fibration(ident("!(a * b), ?~a")).ok

    f = vmap("?a | ?a", "?a", {"0.0": "0", "0.0.0": "0.0", "0.1": "0", "0.1.0": "0.0"})
    assert check_linear_fibration(f).ok

    f = vmap("a | a", "a", {"0.0": "0", "0.1": "0"})
    v = check_linear_fibration(f)
    assert not v.ok and v.condition == "why-domination"


def test_linear_fibration_rejects_partitioned_copies():
    # ?a | ?b onto ?(a | b): conditions alone admit it, copy structure must not
    f = vmap(
        "?a | ?b",
        "?(a | b)",
        {"0.0": "0", "0.0.0": "0.0.0", "0.1": "0", "0.1.0": "0.0.1"},
    )
    v = check_linear_fibration(f)
    assert not v.ok


def test_wn_map_cases():
    f = vmap("a", "?a", {"0": "0.0"})
    assert check_wn_map(f).ok

    f = vmap("??a", "?a", {"0": "0", "0.0": "0", "0.0.0": "0.0"})
    assert check_wn_map(f).ok

    f = vmap("a * a", "a", {"0.0": "0", "0.1": "0"})
    v = check_wn_map(f)
    assert not v.ok


def test_decompose_identity():
    f = ident("!a, ?~a")
    dec = decompose_fibration(f)
    assert set(dec.gprime.labels) == set(f.source.labels)
    for v in f.source.vertices():
        assert dec.wn_part(v) == v
        assert dec.linear_part(v) == v


def test_decompose_der_contr_composite():
    # a | ?a mapped onto ?a: the bare atom is embedded under a fresh why-not,
    # then the two copies contract
    f = vmap("a | ?a", "?a", {"0.0": "0.0", "0.1": "0", "0.1.0": "0.0"})
    dec = decompose_fibration(f)
    assert len(dec.gprime.labels) == 4  # two why-nots, two atoms
    assert check_wn_map(dec.wn_part).ok
    assert check_linear_fibration(dec.linear_part).ok
    for v in f.source.vertices():
        assert dec.linear_part(dec.wn_part(v)) == f(v)
    assert check_mell_fibration(f).ok


def test_decompose_rejects_non_clone_merge():
    f = vmap("a * a", "a", {"0.0": "0", "0.1": "0"})
    with pytest.raises(FibrationError):
        decompose_fibration(f)
    assert not check_mell_fibration(f).ok


def test_mell_fibration_systems():
    f = ident("a | ~a")
    assert check_mell_fibration(f, "mll").ok

    f = vmap("o", "?b", {"0": "0"})
    assert check_mell_fibration(f, "mell").ok
    assert not check_mell_fibration(f, "mll").ok

    f = vmap("a, a", "a * a", {"0": "0.0", "1": "0.0"})
    v = check_mell_fibration(f, "mll")
    assert not v.ok and v.condition == "mll-bijection"


def test_weakening_region_must_be_free():
    # something else maps inside the weakened region
    f = vmap("o, b", "?(a | b)", {"0": "0", "1": "0.0.1"})
    assert not check_mell_fibration(f).ok


def test_composition_closure():
    f = vmap("?a | ?a", "?a", {"0.0": "0", "0.0.0": "0.0", "0.1": "0", "0.1.0": "0.0"})
    g_src = web_of_sequent(parse_sequent("(?a | ?a) | (?a | ?a)"))
    g_tgt = f.source
    mapping = {}
    for v in g_src.labels:
        # 0.0.0.* -> 0.0*, 0.0.1.* -> 0.0*, 0.1.0.* -> 0.1*, 0.1.1.* -> 0.1*
        rest = v.split(".")
        tgt = "0." + rest[1] + ("" if len(rest) == 3 else "." + ".".join(rest[3:]))
        mapping[v] = tgt
    g = VertexMap(g_src, g_tgt, mapping)
    assert check_linear_fibration(g).ok
    composed = g.compose(f)
    assert check_linear_fibration(composed).ok


def test_digging_chain_through_mell_check():
    f = vmap("??a", "?a", {"0": "0", "0.0": "0", "0.0.0": "0.0"})
    assert check_mell_fibration(f).ok
    dec = decompose_fibration(f)
    # the chain is merged by the wn part, the linear part is an iso
    assert len(dec.gprime.labels) == 2


def test_inner_contraction_under_outer_dereliction():
    # the contracted material sits below a derelicted why-not: the branch
    # grouping must resolve the overlap at the inner target, keeping one
    # outer copy
    from mellweb.cp import check_cp, translate_derivation
    from mellweb.formula import NegAtom
    from mellweb.gen import d_ax, d_contr, d_cut, d_der, d_par, d_tens, d_wprom

    t1 = d_tens(d_ax("b", order=(1, 0)), d_ax("b"), k=2)  # ~b, ~b, b * b
    c = d_contr(d_der(d_der(t1, 0), 1), 0)  # ?~b, b * b
    t2 = d_tens(c, d_ax("a", order=(1, 0)), pos1=1, pos2=1, k=2,
                order=[(1, 0), (2, 0)])  # ?~b, ~a, (b*b)*a
    m = d_der(d_par(t2, 0), 0)  # ?(?~b | ~a), (b*b)*a
    w1 = d_wprom(d_ax("b", order=(1, 0)), 1)  # ?~b, !b
    t3 = d_tens(w1, d_ax("a", order=(1, 0)), pos1=1, pos2=1, k=2,
                order=[(1, 0), (2, 0)])  # ?~b, ~a, !b * a
    p2 = d_wprom(t3, 2)  # ??~b, ?~a, !(!b * a)
    cut = d_cut(p2, m, pos1=2, pos2=0)
    from mellweb.hpn import normalize, translate_with_cuts

    h = translate_with_cuts(cut)
    proof, _ = normalize(h)
    assert check_cp(proof, "mell").ok


def test_nested_contraction_copies_coalesce():
    # four copies of a par, two contraction layers under two diggings: the
    # components of one inner copy must travel together through the split
    import random

    from mellweb.cp import check_cp
    from mellweb.gen import d_cut, d_dig, d_tens, d_wprom, random_cut_derivation
    from mellweb.hpn import normalize, translate_with_cuts

    for seed in range(600, 620):
        rng = random.Random(seed)
        for i in range(25):
            d = random_cut_derivation(rng, depth=rng.choice((2, 3)), wrap=(i % 3 == 0))
            if rng.random() < 0.4:
                d = d_tens(d, random_cut_derivation(rng, depth=rng.choice((1, 2))))
            h = translate_with_cuts(d)
            proof, _ = normalize(h)
            assert check_cp(proof, "mell").ok, (seed, i)


def test_weakened_copy_contracted_with_real_copy():
    # one contraction copy is real (derelicted), the other was weakened at an
    # inner why-not: the weakening jump must ride into an outer copy and let
    # the inner split resolve it
    from mellweb.cp import check_cp, translate_derivation
    from mellweb.formula import NegAtom
    from mellweb.gen import d_ax, d_bot, d_contr, d_der, d_par, d_tens, d_weak

    e1 = d_ax("b", jumps=1, order=(0, 2, 1))  # b, o, ~b
    e2 = d_weak(e1, 1, NegAtom("b"))  # b, ?~b, ~b
    e3 = d_par(e2, 0)  # b | ?~b, ~b
    f1 = d_der(d_ax("b", jumps=1), 1)  # b, ?~b, o
    f2 = d_bot(d_par(f1, 0), 1)  # b | ?~b, bot
    t = d_tens(e3, f2, pos1=1, pos2=1, k=2, order=[(1, 0), (2, 0)])
    # (b | ?~b), (b | ?~b), ~b * bot
    d = d_contr(d_der(d_der(t, 0), 1), 0)  # ?(b | ?~b), ~b * bot
    p = translate_derivation(d)
    assert check_cp(p, "mell").ok
