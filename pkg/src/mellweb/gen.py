"""Derivation builders and random corpus generators for tests and batch runs.

The `d_*` helpers apply one rule downward, computing the conclusion from the
premises; the random generators grow rule-valid derivations, and `dual_pair`
produces derivations of a formula and of its dual so that cut corpora can be
assembled constructively.
"""

from __future__ import annotations

import random
from typing import Optional

from .cp import Derivation
from .formula import (
    Atom,
    Bot,
    Formula,
    JUMP,
    Jump,
    NegAtom,
    OfCourse,
    ONE,
    Par,
    Path,
    Sequent,
    TargetAddress,
    Tens,
    WhyNot,
    negate,
    render_formula,
    replace_at,
    subformula_at,
)


def d_ax(name: str = "a", jumps: int = 0, order: Optional[tuple[int, ...]] = None) -> Derivation:
    members: list[Formula] = [Atom(name), NegAtom(name)] + [JUMP] * jumps
    if order is not None:
        members = [members[i] for i in order]
    return Derivation("ax_j", Sequent(tuple(members)))


def d_one(jumps: int = 0, order: Optional[tuple[int, ...]] = None) -> Derivation:
    members: list[Formula] = [ONE] + [JUMP] * jumps
    if order is not None:
        members = [members[i] for i in order]
    return Derivation("one_j", Sequent(tuple(members)))


def d_par(p: Derivation, k: int) -> Derivation:
    s = p.conclusion
    f = Par(s[k], s[k + 1])
    conclusion = Sequent(s.formulas[:k] + (f,) + s.formulas[k + 2 :])
    return Derivation("par", conclusion, {"index": k}, (p,))


def _placed(
    p1: Derivation,
    p2: Derivation,
    pos1: int,
    pos2: int,
    order: Optional[list[tuple[int, int]]],
) -> tuple[list, list, list]:
    """Conclusion member list for tens/cut: `order` lists (side, premise_index)
    pairs for the context; defaults to premise order, side 1 then side 2."""
    ctx1 = [i for i in range(len(p1.conclusion)) if i != pos1]
    ctx2 = [i for i in range(len(p2.conclusion)) if i != pos2]
    if order is None:
        order = [(1, i) for i in ctx1] + [(2, i) for i in ctx2]
    return ctx1, ctx2, order


def d_tens(
    p1: Derivation,
    p2: Derivation,
    pos1: Optional[int] = None,
    pos2: int = 0,
    k: Optional[int] = None,
    order: Optional[list[tuple[int, int]]] = None,
) -> Derivation:
    if pos1 is None:
        pos1 = len(p1.conclusion) - 1
    a = p1.conclusion[pos1]
    b = p2.conclusion[pos2]
    ctx1, ctx2, order = _placed(p1, p2, pos1, pos2, order)
    members: list[Formula] = []
    slots: list[Optional[tuple[int, int]]] = []
    if k is None:
        k = len(ctx1)
        order = order[: len(ctx1)] + [None] + order[len(ctx1) :]  # type: ignore[list-item]
    else:
        order = list(order)
        order.insert(k, None)  # type: ignore[arg-type]
    left, right = [], []
    for pos, slot in enumerate(order):
        if slot is None:
            members.append(Tens(a, b))
        else:
            side, i = slot
            members.append((p1 if side == 1 else p2).conclusion[i])
            (left if side == 1 else right).append(pos)
    conclusion = Sequent(tuple(members))
    params = {"index": order.index(None), "left": left, "right": right,
              "pos1": pos1, "pos2": pos2}
    return Derivation("tens", conclusion, params, (p1, p2))


def d_cut(
    p1: Derivation,
    p2: Derivation,
    pos1: Optional[int] = None,
    pos2: int = 0,
    order: Optional[list[tuple[int, int]]] = None,
) -> Derivation:
    if pos1 is None:
        pos1 = len(p1.conclusion) - 1
    a = p1.conclusion[pos1]
    assert p2.conclusion[pos2] == negate(a), "cut actives must be dual"
    ctx1, ctx2, order = _placed(p1, p2, pos1, pos2, order)
    members, left, right = [], [], []
    for pos, (side, i) in enumerate(order):
        members.append((p1 if side == 1 else p2).conclusion[i])
        (left if side == 1 else right).append(pos)
    conclusion = Sequent(tuple(members))
    params = {
        "left": left,
        "right": right,
        "pos1": pos1,
        "pos2": pos2,
        "formula": render_formula(a),
    }
    return Derivation("cut", conclusion, params, (p1, p2))


def d_wprom(p: Derivation, k: int) -> Derivation:
    s = p.conclusion
    members = tuple(
        OfCourse(f) if i == k else WhyNot(f) for i, f in enumerate(s)
    )
    return Derivation("wprom", Sequent(members), {"index": k}, (p,))


def d_der(p: Derivation, k: int) -> Derivation:
    s = p.conclusion
    return Derivation("der", s.replace(k, WhyNot(s[k])), {"index": k}, (p,))


def d_dig(p: Derivation, k: int) -> Derivation:
    s = p.conclusion
    f = s[k]
    assert isinstance(f, WhyNot) and isinstance(f.child, WhyNot)
    return Derivation("dig", s.replace(k, f.child), {"index": k}, (p,))


def d_digj(p: Derivation, k: int) -> Derivation:
    s = p.conclusion
    assert s[k] == WhyNot(JUMP)
    return Derivation("dig_j", s.replace(k, JUMP), {"index": k}, (p,))


def d_bot(p: Derivation, k: int) -> Derivation:
    s = p.conclusion
    assert isinstance(s[k], Jump)
    return Derivation("bot_j", s.replace(k, Bot()), {"index": k}, (p,))


def d_weak(p: Derivation, k: int, a: Formula) -> Derivation:
    s = p.conclusion
    assert isinstance(s[k], Jump)
    return Derivation("w_j", s.replace(k, WhyNot(a)), {"index": k}, (p,))


def d_contr(p: Derivation, k: int) -> Derivation:
    s = p.conclusion
    assert s[k] == s[k + 1] and isinstance(s[k], WhyNot)
    conclusion = Sequent(s.formulas[:k] + (s[k],) + s.formulas[k + 2 :])
    return Derivation("contr", conclusion, {"index": k}, (p,))


_DEEP_DOWN = {
    "deep_der": lambda f, a: WhyNot(f),
    "deep_dig": lambda f, a: f.child,
    "deep_dig_j": lambda f, a: JUMP,
    "deep_bot": lambda f, a: Bot(),
    "deep_w": lambda f, a: WhyNot(a),
    "deep_contr": lambda f, a: f.left,
}


def d_deep(rule: str, p: Derivation, addr: TargetAddress, a: Optional[Formula] = None) -> Derivation:
    s = p.conclusion
    f = subformula_at(s, addr.index, addr.path)
    repl = _DEEP_DOWN[rule](f, a)
    conclusion = replace_at(s, addr.index, addr.path, repl)
    return Derivation(rule, conclusion, {"addr": str(addr)}, (p,))


# --- random cut-free derivations ------------------------------------------------


def random_derivation(
    rng: random.Random, max_rules: int = 15, atoms: tuple[str, ...] = ("a", "b")
) -> Derivation:
    """A rule-valid cut-free derivation with at most `max_rules` rule nodes."""
    pool: list[Derivation] = [_random_axiom(rng, atoms)]
    budget = max_rules - 1
    while budget > 0:
        moves = _possible_moves(rng, pool, atoms)
        if not moves:
            break
        name, apply = rng.choice(moves)
        cost = 1
        out = apply()
        if out is None:
            continue
        pool_index, new = out
        if pool_index is None:
            pool.append(new)
        else:
            pool[pool_index] = new
        budget -= cost
    # join everything into one derivation so nothing is wasted
    while len(pool) > 1 and budget >= 0:
        p2 = pool.pop()
        p1 = pool.pop()
        pool.append(d_tens(p1, p2))
    out = pool[0]
    # leftover jump placeholders must be spent before the proof ends, deep
    # ones included
    while True:
        spots = [
            (i, p)
            for i, f in enumerate(out.conclusion)
            for sf, p in _subformulas(f)
            if isinstance(sf, Jump)
        ]
        if not spots:
            return out
        i, p = spots[0]
        if not p:
            if rng.random() < 0.5:
                out = d_bot(out, i)
            else:
                out = d_weak(out, i, _random_formula(rng, atoms, 1))
        else:
            addr = TargetAddress(i, p)
            if rng.random() < 0.5:
                out = d_deep("deep_bot", out, addr)
            else:
                out = d_deep("deep_w", out, addr, _random_formula(rng, atoms, 1))


def _subformulas(f: Formula, prefix: Path = ()):
    yield f, prefix
    if isinstance(f, (Par, Tens)):
        yield from _subformulas(f.left, prefix + (0,))
        yield from _subformulas(f.right, prefix + (1,))
    elif isinstance(f, (OfCourse, WhyNot)):
        yield from _subformulas(f.child, prefix + (0,))


def _random_axiom(rng: random.Random, atoms) -> Derivation:
    if rng.random() < 0.15:
        return d_one(jumps=rng.choice((0, 1)))
    return d_ax(rng.choice(atoms), jumps=rng.choice((0, 0, 1)))


def _possible_moves(rng, pool, atoms):
    moves = []

    def fresh():
        return None, _random_axiom(rng, atoms)

    moves.append(("ax", fresh))
    for pi, p in enumerate(pool):
        s = p.conclusion
        n = len(s)
        if n >= 2:
            k = rng.randrange(n - 1)
            moves.append(("par", lambda pi=pi, p=p, k=k: (pi, d_par(p, k))))
        k = rng.randrange(n)
        moves.append(("der", lambda pi=pi, p=p, k=k: (pi, d_der(p, k))))
        if n <= 4 and rng.random() < 0.6:
            moves.append(("wprom", lambda pi=pi, p=p, k=k: (pi, d_wprom(p, k))))
        for k2, f in enumerate(s):
            if isinstance(f, WhyNot) and isinstance(f.child, WhyNot):
                moves.append(("dig", lambda pi=pi, p=p, k=k2: (pi, d_dig(p, k))))
                break
        for k2, f in enumerate(s):
            if f == WhyNot(JUMP):
                moves.append(("dig_j", lambda pi=pi, p=p, k=k2: (pi, d_digj(p, k))))
                break
        for k2, f in enumerate(s):
            if isinstance(f, Jump):
                moves.append(("bot_j", lambda pi=pi, p=p, k=k2: (pi, d_bot(p, k))))
                moves.append(
                    (
                        "w_j",
                        lambda pi=pi, p=p, k=k2: (
                            pi,
                            d_weak(p, k, _random_formula(rng, atoms, 2)),
                        ),
                    )
                )
                break
        for k2 in range(n - 1):
            if s[k2] == s[k2 + 1] and isinstance(s[k2], WhyNot):
                moves.append(("contr", lambda pi=pi, p=p, k=k2: (pi, d_contr(p, k))))
                break
    if len(pool) >= 2:
        i, j = rng.sample(range(len(pool)), 2)

        def join(i=i, j=j):
            p1, p2 = pool[i], pool[j]
            hi, lo = max(i, j), min(i, j)
            pool.pop(hi)
            pool.pop(lo)
            return None, d_tens(p1, p2)

        moves.append(("tens", join))
    return moves


def _random_formula(rng: random.Random, atoms, depth: int) -> Formula:
    if depth == 0 or rng.random() < 0.4:
        name = rng.choice(atoms)
        return rng.choice((Atom(name), NegAtom(name)))
    kind = rng.randrange(4)
    if kind == 0:
        return Par(_random_formula(rng, atoms, depth - 1), _random_formula(rng, atoms, depth - 1))
    if kind == 1:
        return Tens(_random_formula(rng, atoms, depth - 1), _random_formula(rng, atoms, depth - 1))
    if kind == 2:
        return WhyNot(_random_formula(rng, atoms, depth - 1))
    return OfCourse(_random_formula(rng, atoms, depth - 1))


# --- dual pairs and cut corpora ---------------------------------------------------
#
# dual_pair(A) returns derivations (plus, minus) with
#   plus  |-  ..context.., A           (A last)
#   minus |-  ~A, ..context..          (~A first)
# so that d_cut(plus, minus) is immediately well-formed.


def dual_pair(rng: random.Random, depth: int, atoms=("a", "b"), bang_mode: Optional[str] = None,
              need_context: bool = False):
    """Derivations (plus |- ..,A) and (minus |- ~A,..) for a random formula A."""
    if depth <= 0:
        return _dual_base(rng, atoms, need_context)
    kind = rng.choice(("atom", "tens", "par", "bang"))
    if kind == "atom":
        return _dual_base(rng, atoms, need_context)
    if kind == "tens":
        return _dual_tens(rng, depth, atoms)
    if kind == "par":
        return _dual_par(rng, depth, atoms)
    return _dual_bang(rng, depth, atoms, bang_mode)


def _dual_base(rng: random.Random, atoms, need_context: bool = False):
    if not need_context and rng.random() < 0.2:
        plus = d_one()
        minus = d_bot(d_one(jumps=1, order=(1, 0)), 0)
        return plus, minus
    name = rng.choice(atoms)
    return d_ax(name, order=(1, 0)), d_ax(name, order=(1, 0))


def _dual_tens(rng: random.Random, depth: int, atoms):
    """Pair for A = X * Y: the minus side needs context members to join on."""
    px, mx = dual_pair(rng, depth - 1, atoms, need_context=True)
    py, my = dual_pair(rng, depth - 1, atoms, need_context=True)
    nx, ny = len(px.conclusion), len(py.conclusion)
    plus = d_tens(px, py, pos1=nx - 1, pos2=ny - 1, k=nx + ny - 2)
    # minus: tensor a context member of each side, then par ~X with ~Y in front
    gx, gy = len(mx.conclusion) - 1, len(my.conclusion) - 1
    minus_t = d_tens(
        mx, my, pos1=gx, pos2=gy, k=2,
        order=[(1, 0), (2, 0)]
        + [(1, i) for i in range(1, gx)]
        + [(2, i) for i in range(1, gy)],
    )
    minus = d_par(minus_t, 0)
    return plus, minus


def _dual_par(rng: random.Random, depth: int, atoms):
    """Pair for A = X | Y."""
    px, mx = dual_pair(rng, depth - 1, atoms, need_context=True)
    py, my = dual_pair(rng, depth - 1, atoms, need_context=True)
    nx, ny = len(px.conclusion), len(py.conclusion)
    # plus: tensor a context member of each side, keep X and Y adjacent last
    plus_t = d_tens(
        px, py, pos1=0, pos2=0, k=0,
        order=[(1, i) for i in range(1, nx - 1)]
        + [(2, i) for i in range(1, ny - 1)]
        + [(1, nx - 1), (2, ny - 1)],
    )
    n = len(plus_t.conclusion)
    plus = d_par(plus_t, n - 2)
    # minus: ~X * ~Y in front
    minus = d_tens(mx, my, pos1=0, pos2=0, k=0)
    return plus, minus


def _dual_bang(rng: random.Random, depth: int, atoms, mode: Optional[str]):
    """Pair for A = !X, with the minus side built by a chosen resource rule."""
    px, mx = dual_pair(rng, depth - 1, atoms, need_context=True)
    plus = d_wprom(px, len(px.conclusion) - 1)
    mode = mode or rng.choice(("der", "contr", "dig", "weak", "wprom"))
    if mode == "der":
        minus = d_der(mx, 0)
    elif mode == "wprom":
        # promote a context member so ~X sits under a real box door
        minus = d_wprom(mx, len(mx.conclusion) - 1)
    elif mode == "weak":
        ax = d_ax(rng.choice(atoms), jumps=1, order=(2, 0, 1))  # o, a, ~a
        x = px.conclusion[len(px.conclusion) - 1]
        minus = d_weak(ax, 0, negate(x))
    elif mode == "dig":
        # two nested promotions put two real doors over ~X, merged by digging
        prom1 = d_wprom(mx, len(mx.conclusion) - 1)
        prom2 = d_wprom(prom1, len(prom1.conclusion) - 1)
        minus = d_dig(prom2, 0)
    else:  # contraction: two copies joined, derelicted twice, contracted
        import copy

        mx2 = copy.deepcopy(mx)
        gx, gy = len(mx.conclusion) - 1, len(mx2.conclusion) - 1
        joined = d_tens(
            mx, mx2, pos1=gx, pos2=gy, k=2,
            order=[(1, 0), (2, 0)]
            + [(1, i) for i in range(1, gx)]
            + [(2, i) for i in range(1, gy)],
        )
        minus = d_contr(d_der(d_der(joined, 0), 1), 0)
    return plus, minus


def random_cut_derivation(rng: random.Random, depth: int = 1, wrap: bool = False) -> Derivation:
    """One cut over a generated dual pair, optionally inside a promotion."""
    plus, minus = dual_pair(rng, depth)
    cut = d_cut(plus, minus, pos1=len(plus.conclusion) - 1, pos2=0)
    if wrap:
        cut = d_wprom(cut, rng.randrange(len(cut.conclusion)))
    return cut
