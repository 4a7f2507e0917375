from mellweb.formula import parse_sequent
from mellweb.oracle import (
    SearchBudget,
    count_atom_matchings,
    deep_reachable,
    enumerate_linkings,
    exists_linear_fibration,
    exists_mell_fibration,
    exists_wn_map,
    prove_sequent,
)
from mellweb.rgb import check_correct


def test_prove_basic_sequents():
    assert prove_sequent(parse_sequent("a, ~a")) == "provable"
    assert prove_sequent(parse_sequent("a * ~a")) == "unprovable"
    assert prove_sequent(parse_sequent("a * b, ~a, ~b")) == "provable"


def test_prove_budget_unknown():
    big = ", ".join(["a | ~a"] * 20)
    assert prove_sequent(parse_sequent(big), budget=SearchBudget(max_size=10)) == "unknown"


def test_enumerate_linkings_counts():
    assert len(list(enumerate_linkings(parse_sequent("a, ~a")))) == 1
    assert len(list(enumerate_linkings(parse_sequent("a, a, ~a, ~a")))) == 2
    assert count_atom_matchings(parse_sequent("a, a, ~a, ~a")) == 2
    # a jump in play always anchors somewhere
    links = list(enumerate_linkings(parse_sequent("1, o")))
    assert len(links) == 1
    cls = links[0].classes
    assert any(len(c) == 2 for c in cls)


def test_enumeration_matches_provability_small():
    corpus = [
        ("a, ~a", "mll"),
        ("a * ~a", "mll"),
        ("a | ~a", "mll"),
        ("a * b, ~a, ~b", "mll"),
        ("(a | ~a) * (b | ~b)", "mll"),
        ("a | b, ~a * ~b", "mll"),
        ("a, ~a, o", "mllu"),
        ("1", "mllu"),
        ("1 * o", "mllu"),
        ("o | 1", "mllu"),
        ("1, 1", "mllu"),
    ]
    for text, system in corpus:
        s = parse_sequent(text)
        p = prove_sequent(s, system) == "provable"
        c = any(check_correct(g, system).ok for g in enumerate_linkings(s))
        assert p == c, text


def test_deep_reachability_linear():
    src = parse_sequent("?a | ?a")
    tgt = parse_sequent("?a")
    assert deep_reachable(src, tgt, "linear")
    assert exists_linear_fibration(src, tgt)

    src = parse_sequent("o")
    tgt = parse_sequent("?b")
    assert deep_reachable(src, tgt, "linear")
    assert exists_linear_fibration(src, tgt)

    src = parse_sequent("a | a")
    tgt = parse_sequent("a")
    assert not deep_reachable(src, tgt, "linear")
    assert not exists_linear_fibration(src, tgt)

    # the partitioned-copy gap case: not derivable, not accepted
    src = parse_sequent("?a | ?b")
    tgt = parse_sequent("?(a | b)")
    assert not deep_reachable(src, tgt, "linear")
    assert not exists_linear_fibration(src, tgt)


def test_deep_reachability_wn():
    src = parse_sequent("a")
    tgt = parse_sequent("?a")
    assert deep_reachable(src, tgt, "wn")
    assert exists_wn_map(src, tgt)

    src = parse_sequent("??a")
    tgt = parse_sequent("?a")
    assert deep_reachable(src, tgt, "wn")
    assert exists_wn_map(src, tgt)

    src = parse_sequent("a | a")
    tgt = parse_sequent("?a")
    assert not deep_reachable(src, tgt, "wn")
    assert not exists_wn_map(src, tgt)


def test_mell_fibration_search():
    src = parse_sequent("a | ?a")
    tgt = parse_sequent("?a")
    assert exists_mell_fibration(src, tgt)
    assert not exists_linear_fibration(src, tgt)
