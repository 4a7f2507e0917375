"""Acceptance suite: one test per criterion, each printing a PASS line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines and timings.
"""

import itertools
import math
import random
import time

import pytest

from mellweb.cp import (
    check_cp,
    cp_equal,
    sequentialize,
    translate_derivation,
)
from mellweb.formula import (
    Atom,
    NegAtom,
    Par,
    Sequent,
    TargetAddress,
    Tens,
    WhyNot,
    parse_sequent,
    render_formula,
    render_sequent,
    sequent_size,
)
from mellweb.gen import (
    d_ax,
    d_bot,
    d_contr,
    d_cut,
    d_deep,
    d_der,
    d_dig,
    d_digj,
    d_one,
    d_par,
    d_tens,
    d_weak,
    d_wprom,
    _dual_bang,
    _dual_tens,
    random_cut_derivation,
    random_derivation,
)
from mellweb.hpn import normalize, translate_with_cuts
from mellweb.oracle import (
    canon,
    deep_reachable,
    enumerate_linkings,
    exists_linear_fibration,
    exists_wn_map,
    prove_sequent,
)
from mellweb.rgb import (
    check_correct,
    find_chordless_ae_cycle,
    is_ae_connected,
    rb_translate,
)

PASS = "[acceptance] criterion {n} ({name}): PASS — {detail}"


# --- corpora ---------------------------------------------------------------------


def _pool_by_size(literals, max_size, consts=()):
    base = {render_formula(f): f for f in literals}
    for c in consts:
        base[render_formula(c)] = c
    by_size = {1: base}
    for n in range(2, max_size + 1):
        new = {}
        for i in range(1, n // 2 + 1):
            for f in by_size[i].values():
                for g in by_size[n - i].values():
                    for op in (Par, Tens):
                        h = canon(op(f, g))
                        new[render_formula(h)] = h
        by_size[n] = new
    return {n: sorted(v.values(), key=render_formula) for n, v in by_size.items()}


def _sequents(pool, total_max, members_max, exhaustive_total, stride=17):
    """All AC-distinct sequents up to `exhaustive_total`, plus every
    `stride`-th one between that and `total_max`."""
    seen = set()
    picked = []
    counter = 0
    sizes = sorted(pool)
    for k in range(1, members_max + 1):
        for parts in itertools.combinations_with_replacement(sizes, k):
            total = sum(parts)
            if total > total_max:
                continue
            for combo in itertools.product(*(range(len(pool[p])) for p in parts)):
                fs = tuple(pool[p][i] for p, i in zip(parts, combo))
                key = tuple(sorted(render_formula(f) for f in fs))
                if key in seen:
                    continue
                seen.add(key)
                counter += 1
                if total <= exhaustive_total or counter % stride == 0:
                    picked.append(Sequent(fs))
    return picked


def _random_sequent(rng, pool, max_total):
    fs = []
    total = 0
    while True:
        size = rng.choice(sorted(pool))
        if total + size > max_total:
            break
        fs.append(rng.choice(pool[size]))
        total += size
        if len(fs) >= 2 and rng.random() < 0.4:
            break
    if not fs:
        fs = [rng.choice(pool[1])]
    return Sequent(tuple(fs))


def _agree(s, system):
    p = prove_sequent(s, system) == "provable"
    c = any(check_correct(g, system, method="split").ok for g in enumerate_linkings(s))
    return p == c


def test_criterion_1_mll_oracle_equivalence():
    t0 = time.time()
    lits = [Atom("a"), NegAtom("a"), Atom("b"), NegAtom("b")]
    pool = _pool_by_size(lits, 4)
    corpus = _sequents(pool, total_max=8, members_max=3, exhaustive_total=6, stride=41)
    rng = random.Random(11)
    randoms = [_random_sequent(rng, pool, 10) for _ in range(500)]
    mismatches = [s for s in corpus + randoms if not _agree(s, "mll")]
    elapsed = time.time() - t0
    assert not mismatches, mismatches[:3]
    assert elapsed <= 120, f"took {elapsed:.1f}s"
    print(
        PASS.format(
            n=1,
            name="oracle equivalence",
            detail=f"{len(corpus)} exhaustive + {len(randoms)} random sequents, "
            f"0 mismatches, {elapsed:.1f}s",
        )
    )


def test_criterion_2_mllu_jump_handling():
    from mellweb.formula import JUMP, ONE

    t0 = time.time()
    lits = [Atom("a"), NegAtom("a")]
    pool = _pool_by_size(lits, 4, consts=(ONE, JUMP))
    corpus = _sequents(pool, total_max=7, members_max=3, exhaustive_total=5)

    def bounded(s):
        text = render_sequent(s)
        return text.count("1") <= 2 and text.count("o") <= 2

    corpus = [s for s in corpus if bounded(s)]
    mismatches = [s for s in corpus if not _agree(s, "mllu")]
    elapsed = time.time() - t0
    assert not mismatches, mismatches[:3]
    print(
        PASS.format(
            n=2,
            name="unit/jump handling",
            detail=f"{len(corpus)} sequents, 0 mismatches, {elapsed:.1f}s",
        )
    )


CORPUS_SEED = 20260808


@pytest.fixture(scope="module")
def derivation_corpus():
    rng = random.Random(CORPUS_SEED)
    out = []
    while len(out) < 200:
        d = random_derivation(rng, max_rules=15)
        if d.size() <= 15:
            out.append(d)
    return out


@pytest.fixture(scope="module")
def translated_corpus(derivation_corpus):
    return [translate_derivation(d, validate=False) for d in derivation_corpus]


def test_criterion_3_translation_soundness(derivation_corpus, translated_corpus):
    failures = []
    for d, p in zip(derivation_corpus, translated_corpus):
        v = check_cp(p, "mell")
        if not v.ok:
            failures.append((render_sequent(d.conclusion), v.condition))
    assert not failures, failures[:3]
    print(
        PASS.format(
            n=3,
            name="translation soundness",
            detail=f"{len(derivation_corpus)} random derivations translate and check",
        )
    )


# --- criterion 4: canonicity pairs ------------------------------------------------


def _axj(jumps, name="a"):
    return d_ax(name, jumps=jumps)


def _spend_jumps(d):
    """Bottom out every leftover jump placeholder, shallow or deep."""
    from mellweb.formula import Jump
    from mellweb.gen import _subformulas

    while True:
        spots = [
            (i, p)
            for i, f in enumerate(d.conclusion)
            for sf, p in _subformulas(f)
            if isinstance(sf, Jump)
        ]
        if not spots:
            return d
        i, p = spots[0]
        d = d_bot(d, i) if not p else d_deep("deep_bot", d, TargetAddress(i, p))


def _pairs_for_schemas():
    """At least three permutation pairs per rule schema; every pair concludes
    the same sequent by construction.  Leftover jumps are spent identically on
    both sides, so equality still tests the permuted rules."""
    x = Atom("x")
    y = Atom("y")
    pairs = []

    def add(label, da, db):
        da, db = _spend_jumps(da), _spend_jumps(db)
        assert render_sequent(da.conclusion) == render_sequent(db.conclusion), label
        pairs.append((label, da, db))

    # bot_j
    base = _axj(2)
    add("bot/w", d_weak(d_bot(base, 2), 3, x), d_bot(d_weak(base, 3, x), 2))
    base = _axj(1)
    add("bot/par", d_par(d_bot(base, 2), 0), d_bot(d_par(base, 0), 1))
    add("bot/der", d_der(d_bot(base, 2), 0), d_bot(d_der(base, 0), 2))
    # w_j
    base = _axj(2)
    add("w/w", d_weak(d_weak(base, 2, x), 3, y), d_weak(d_weak(base, 3, y), 2, x))
    base = _axj(1)
    add("w/par", d_par(d_weak(base, 2, x), 0), d_weak(d_par(base, 0), 1, x))
    add("w/der", d_der(d_weak(base, 2, x), 0), d_weak(d_der(base, 0), 2, x))
    # par
    triple = d_tens(d_tens(d_ax("a"), d_ax("b")), d_ax("c"))
    add("par/par", d_par(d_par(triple, 0), 1), d_par(d_par(triple, 2), 0))
    add("par/der", d_der(d_par(triple, 0), 2), d_par(d_der(triple, 3), 0))
    base = d_der(_axj(1), 2)  # a, ~a, ?o
    add("par/digj", d_digj(d_par(base, 0), 1), d_par(d_digj(base, 2), 0))
    # der
    ax = d_ax("a")
    add("der/der", d_der(d_der(ax, 0), 1), d_der(d_der(ax, 1), 0))
    base = _axj(1)
    add("der/bot", d_bot(d_der(base, 1), 2), d_der(d_bot(base, 2), 1))
    add("der/w", d_weak(d_der(base, 1), 2, x), d_der(d_weak(base, 2, x), 1))
    # dig
    base = d_weak(_axj(2), 2, WhyNot(x))  # a, ~a, ??x, o
    add("dig/bot", d_bot(d_dig(base, 2), 3), d_dig(d_bot(base, 3), 2))
    add("dig/der", d_der(d_dig(base, 2), 0), d_dig(d_der(base, 0), 2))
    add("dig/par", d_par(d_dig(base, 2), 0), d_dig(d_par(base, 0), 1))
    # dig_j
    base = d_der(_axj(2), 2)  # a, ~a, ?o, o
    add("digj/bot", d_bot(d_digj(base, 2), 3), d_digj(d_bot(base, 3), 2))
    add("digj/der", d_der(d_digj(base, 2), 0), d_digj(d_der(base, 0), 2))
    add("digj/par", d_par(d_digj(base, 2), 0), d_digj(d_par(base, 0), 1))
    # contr
    base = d_weak(d_weak(_axj(2), 2, x), 3, x)  # a, ~a, ?x, ?x
    add("contr/par", d_par(d_contr(base, 2), 0), d_contr(d_par(base, 0), 1))
    add("contr/der", d_der(d_contr(base, 2), 0), d_contr(d_der(base, 0), 2))
    base2 = d_weak(d_weak(_axj(2, "b"), 2, y), 3, y)
    add("contr/der2", d_der(d_contr(base2, 2), 1), d_contr(d_der(base2, 1), 2))
    # associativity of contraction
    for name in ("a", "b", "c"):
        b3 = d_weak(d_weak(d_weak(_axj(3, name), 2, x), 3, x), 4, x)
        add(
            f"contr-assoc-{name}",
            d_contr(d_contr(b3, 2), 2),
            d_contr(d_contr(b3, 3), 2),
        )
    return pairs


def test_criterion_4_canonicity():
    pairs = _pairs_for_schemas()
    assert len(pairs) >= 24
    bad = []
    for label, da, db in pairs:
        pa = translate_derivation(da)
        pb = translate_derivation(db)
        if not cp_equal(pa, pb):
            bad.append(label)
    assert not bad, bad

    # the jump-reassignment pair separates
    left1 = d_bot(d_ax("a", jumps=1), 2)
    right1 = d_ax("b", order=(1, 0))
    p1 = d_tens(left1, right1, pos1=1, pos2=0, k=1, order=[(1, 0), (2, 1), (1, 2)])
    left2 = d_ax("a")
    right2 = d_bot(d_ax("b", jumps=1, order=(1, 0, 2)), 2)
    p2 = d_tens(left2, right2, pos1=1, pos2=0, k=1, order=[(1, 0), (2, 1), (2, 2)])
    assert not cp_equal(translate_derivation(p1), translate_derivation(p2))
    print(
        PASS.format(
            n=4,
            name="canonicity",
            detail=f"{len(pairs)} permutation pairs equal, jump pair separates",
        )
    )


def test_criterion_5_sequentialization_roundtrip(translated_corpus):
    failures = 0
    for p in translated_corpus:
        back = sequentialize(p)
        q = translate_derivation(back, validate=False)
        if not cp_equal(p, q):
            failures += 1
    assert failures == 0
    print(
        PASS.format(
            n=5,
            name="sequentialization round trip",
            detail=f"{len(translated_corpus)} proofs round-trip equal",
        )
    )


def test_criterion_6_rb_translation_preserves_correctness(translated_corpus):
    checked = 0
    for p in translated_corpus:
        if len(p.source.web) > 16:
            continue  # path search stays tractable
        g = rb_translate(p.source)
        assert find_chordless_ae_cycle(g) is None, render_sequent(p.target)
        assert is_ae_connected(g).ok, render_sequent(p.target)
        checked += 1
    assert checked >= 60
    print(
        PASS.format(
            n=6,
            name="modal-to-RB preservation",
            detail=f"{checked} correct graphs stay acyclic and connected",
        )
    )


# --- criterion 7: cut elimination --------------------------------------------------


def _forced_case_derivations():
    """Two deterministic cut derivations per key case, five via repetition."""
    rng = random.Random(5)
    out = []
    for rep in range(5):
        r = random.Random(100 + rep)
        # ax and unit cases
        out.append(d_cut(d_ax("a", order=(1, 0)), d_ax("a", order=(1, 0))))
        out.append(d_cut(d_one(), d_bot(d_one(jumps=1, order=(1, 0)), 0)))
        # tensor against par
        plus, minus = _dual_tens(r, 1, ("a", "b"))
        out.append(d_cut(plus, minus, pos1=len(plus.conclusion) - 1, pos2=0))
        # the five promotion cases
        for mode in ("der", "weak", "dig", "contr", "wprom"):
            plus, minus = _dual_bang(r, 1, ("a", "b"), mode)
            out.append(d_cut(plus, minus, pos1=len(plus.conclusion) - 1, pos2=0))
        # a promotion against a promotion: box inside another cut side
        plus, minus = _dual_bang(r, 2, ("a",), "der")
        out.append(d_wprom(d_cut(plus, minus, pos1=len(plus.conclusion) - 1, pos2=0), 0))
    return out


def test_criterion_7_cut_elimination():
    rng = random.Random(99)
    corpus = _forced_case_derivations()
    while len(corpus) < 100:
        wrap = rng.random() < 0.3
        d = random_cut_derivation(rng, depth=rng.choice((1, 2, 2, 3)), wrap=wrap)
        if rng.random() < 0.35:  # multi-cut: join two cut derivations
            d2 = random_cut_derivation(rng, depth=1)
            d = d_tens(d, d2)
        corpus.append(d)
    case_tally: dict[str, int] = {}
    for i, d in enumerate(corpus):
        h = translate_with_cuts(d)
        assert len(h.cuts) <= 3
        proof, trace = normalize(h)
        for t in trace:
            assert t.slots_after < t.slots_before, (i, t.case)
            case_tally[t.case] = case_tally.get(t.case, 0) + 1
        v = check_cp(proof, "mell")
        assert v.ok, (i, v.condition)
        assert render_sequent(proof.target) == render_sequent(h.conclusion()), i
    for case in (
        "ax-vs-ax",
        "bot-vs-one",
        "tens-vs-par",
        "wprom-vs-wprom",
        "wprom-vs-der",
        "wprom-vs-weak",
        "wprom-vs-dig",
        "wprom-vs-contr",
    ):
        assert case_tally.get(case, 0) >= 5, (case, case_tally)

    # the running example normalizes to its hand-written reference
    from test_hpn import fig1_lower_derivation, fig1_reference

    h = translate_with_cuts(fig1_lower_derivation())
    proof, _ = normalize(h)
    assert cp_equal(proof, translate_derivation(fig1_reference()))
    print(
        PASS.format(
            n=7,
            name="cut elimination",
            detail=f"{len(corpus)} nets normalized, cases {case_tally}, "
            "running example matches its reference",
        )
    )


# --- criterion 8: polynomial checking ----------------------------------------------


def _balanced_proof(depth: int):
    def build(d: int, salt: int):
        if d == 0:
            return d_ax("a")
        p1 = build(d - 1, 2 * salt)
        p2 = build(d - 1, 2 * salt + 1)
        t = d_tens(p1, p2, pos1=1, pos2=0, k=1)
        return d_par(t, 1)

    return build(depth, 1)


def test_criterion_8_polynomial_checking():
    points = []
    for depth in (8, 9, 10):
        d = _balanced_proof(depth)
        p = translate_derivation(d, validate=False)
        n = len(p.source.web)
        t0 = time.time()
        v = check_cp(p, "mell")
        dt = time.time() - t0
        assert v.ok
        assert dt < 5.0, f"{n} vertices took {dt:.2f}s"
        points.append((n, dt))
    # log-log slope by least squares
    xs = [math.log(n) for n, _ in points]
    ys = [math.log(max(t, 1e-4)) for _, t in points]
    mean_x = sum(xs) / len(xs)
    mean_y = sum(ys) / len(ys)
    slope = sum((x - mean_x) * (y - mean_y) for x, y in zip(xs, ys)) / sum(
        (x - mean_x) ** 2 for x in xs
    )
    assert slope <= 4.3, (points, slope)
    print(
        PASS.format(
            n=8,
            name="polynomial checking",
            detail=", ".join(f"{n}v:{t * 1000:.0f}ms" for n, t in points)
            + f", log-log slope {slope:.2f}",
        )
    )


# --- criterion 9: fibration characterizations --------------------------------------


_SOURCES = [
    "a",
    "~a",
    "o",
    "?a",
    "??a",
    "?o",
    "o | o",
    "?a | ?a",
    "a | ?a",
    "?a | ?b",
    "a | a",
    "bot",
    "o | a",
    "?(a | b)",
    "??a | o",
]

_TARGETS = [
    "a",
    "o",
    "bot",
    "?a",
    "??a",
    "?o",
    "?b",
    "?(a | b)",
    "?a | ?a",
    "?(a | a)",
    "?~a",
    "?(?a)",
    "?a | o",
]


def test_criterion_9_fibration_characterizations():
    t0 = time.time()
    mismatches = []
    pairs = 0
    for src_text in _SOURCES:
        for tgt_text in _TARGETS:
            src = parse_sequent(src_text)
            tgt = parse_sequent(tgt_text)
            if sequent_size(tgt) > 6 or len(src) != len(tgt):
                continue
            pairs += 1
            reach = deep_reachable(src, tgt, "linear")
            found = exists_linear_fibration(src, tgt)
            if reach != found:
                mismatches.append(("linear", src_text, tgt_text, reach, found))
            reach = deep_reachable(src, tgt, "wn")
            found = exists_wn_map(src, tgt)
            if reach != found:
                mismatches.append(("wn", src_text, tgt_text, reach, found))
    assert not mismatches, mismatches[:5]
    print(
        PASS.format(
            n=9,
            name="fibration characterizations",
            detail=f"{pairs} sequent pairs, deep-rewrite reachability matches "
            f"map existence for both families, {time.time() - t0:.1f}s",
        )
    )
