"""Independent brute-force provers and enumerators for cross-validation.

Everything here is deliberately naive: exhaustive backward proof search for
the multiplicative systems, enumeration of all linkings of a sequent's web,
exhaustive vertex-map searches, and deep-rewrite reachability — the oracles
the test suite compares the structural checkers against.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, Optional

from .fibration import (
    VertexMap,
    check_linear_fibration,
    check_mell_fibration,
    check_wn_map,
)
from .formula import (
    Atom,
    Bot,
    Formula,
    JUMP,
    Jump,
    NegAtom,
    OfCourse,
    One,
    Par,
    Sequent,
    Tens,
    WhyNot,
    formula_size,
    render_formula,
    sequent_size,
)
from .relweb import (
    L_BANG,
    L_BOT,
    L_JUMP,
    L_ONE,
    L_WHY,
    MixedGraph,
    is_atom_label,
    is_negatom_label,
    web_of_sequent,
)
from .rgb import RgbCograph


@dataclass
class SearchBudget:
    max_size: int = 24
    max_nodes: int = 200000

    def spent(self, nodes: int) -> bool:
        return nodes >= self.max_nodes


class _Exhausted(Exception):
    pass


def prove_sequent(s: Sequent, system: str = "mll", budget: Optional[SearchBudget] = None) -> str:
    """Exhaustive backward search; complete for mll / mllu at small sizes.
    Returns "provable", "unprovable", or "unknown" on budget exhaustion."""
    if system not in ("mll", "mllu"):
        raise ValueError("the brute-force prover covers mll and mllu only")
    budget = budget or SearchBudget()
    if sequent_size(s) > budget.max_size:
        return "unknown"
    memo: dict[tuple, bool] = {}
    nodes = [0]
    try:
        ok = _prove(tuple(s.formulas), system, memo, nodes, budget)
    except _Exhausted:
        return "unknown"
    return "provable" if ok else "unprovable"


def _key(ms: tuple[Formula, ...]) -> tuple:
    return tuple(sorted(render_formula(f) for f in ms))


def _prove(ms, system, memo, nodes, budget) -> bool:
    key = _key(ms)
    if key in memo:
        return memo[key]
    nodes[0] += 1
    if budget.spent(nodes[0]):
        raise _Exhausted
    memo[key] = False  # cycle guard; multiplicative rules only shrink
    result = _closable(ms, system) or _expand(ms, system, memo, nodes, budget)
    memo[key] = result
    return result


def _closable(ms, system) -> bool:
    atoms = [f for f in ms if isinstance(f, (Atom, NegAtom))]
    ones = [f for f in ms if isinstance(f, One)]
    jumps = [f for f in ms if isinstance(f, Jump)]
    if len(atoms) + len(ones) + len(jumps) != len(ms):
        return False
    if system == "mll" and jumps:
        return False
    if len(atoms) == 2 and not ones:
        a, b = atoms
        return type(a) is not type(b) and a.name == b.name
    if not atoms and len(ones) == 1:
        return system == "mllu"
    return False


def _expand(ms, system, memo, nodes, budget) -> bool:
    for i, f in enumerate(ms):
        if isinstance(f, Par):
            rest = ms[:i] + (f.left, f.right) + ms[i + 1 :]
            if _prove(rest, system, memo, nodes, budget):
                return True
    if system == "mllu":
        for i, f in enumerate(ms):
            if isinstance(f, Bot):
                rest = ms[:i] + (JUMP,) + ms[i + 1 :]
                if _prove(rest, system, memo, nodes, budget):
                    return True
    for i, f in enumerate(ms):
        if not isinstance(f, Tens):
            continue
        others = [x for j, x in enumerate(ms) if j != i]
        for pick in itertools.product((0, 1), repeat=len(others)):
            left = tuple(x for x, side in zip(others, pick) if side == 0)
            right = tuple(x for x, side in zip(others, pick) if side == 1)
            if _prove(left + (f.left,), system, memo, nodes, budget) and _prove(
                (f.right,) + right, system, memo, nodes, budget
            ):
                return True
    return False


# --- linking enumeration --------------------------------------------------------


def enumerate_linkings(s: Sequent, limit: int = 200000) -> Iterator[RgbCograph]:
    """Every linking of the sequent's web satisfying the class conditions:
    dual-atom matchings, jump anchorings, and why-not-to-bang groupings."""
    web = web_of_sequent(s)
    pos: dict[str, list[str]] = {}
    neg: dict[str, list[str]] = {}
    ones, jumps, bangs, whys, bots = [], [], [], [], []
    for v in web.vertices():
        lab = web.labels[v]
        if lab == L_ONE:
            ones.append(v)
        elif lab == L_JUMP:
            jumps.append(v)
        elif lab == L_BANG:
            bangs.append(v)
        elif lab == L_WHY:
            whys.append(v)
        elif lab == L_BOT:
            bots.append(v)
        elif is_negatom_label(lab):
            neg.setdefault(lab[1:], []).append(v)
        else:
            pos.setdefault(lab, []).append(v)
    if set(pos) != set(neg) or any(len(pos[x]) != len(neg[x]) for x in pos):
        return
    if whys and not bangs:
        return
    names = sorted(pos)
    matchings = itertools.product(
        *(itertools.permutations(neg[x]) for x in names)
    )
    count = 0
    for matching in matchings:
        pairs: list[list[str]] = []
        for x, perm in zip(names, matching):
            pairs.extend([a, b] for a, b in zip(pos[x], perm))
        anchors = pairs + [[u] for u in ones]
        if jumps and not anchors:
            return
        for jump_pick in itertools.product(range(max(len(anchors), 1)), repeat=len(jumps)):
            for why_pick in itertools.product(range(max(len(bangs), 1)), repeat=len(whys)):
                classes = [list(c) for c in anchors]
                for o, ai in zip(jumps, jump_pick):
                    classes[ai].append(o)
                boxes = [[b] for b in bangs]
                for w, bi in zip(whys, why_pick):
                    boxes[bi].append(w)
                classes += boxes
                classes += [[u] for u in bots]
                count += 1
                if count > limit:
                    raise _Exhausted
                yield RgbCograph(web, classes)


def count_atom_matchings(s: Sequent) -> int:
    """Closed form for atom-only sequents: product of multiplicity factorials."""
    import math

    web = web_of_sequent(s)
    pos: dict[str, int] = {}
    neg: dict[str, int] = {}
    for v in web.vertices():
        lab = web.labels[v]
        if is_negatom_label(lab):
            neg[lab[1:]] = neg.get(lab[1:], 0) + 1
        elif is_atom_label(lab):
            pos[lab] = pos.get(lab, 0) + 1
    if set(pos) != set(neg) or any(pos[x] != neg[x] for x in pos):
        return 0
    return int(math.prod(math.factorial(pos[x]) for x in pos))


# --- exhaustive map searches ------------------------------------------------------


def _label_candidates(src_lab: str, tgt: MixedGraph, kind: str) -> list[str]:
    out = []
    for w in tgt.vertices():
        lab = tgt.labels[w]
        if src_lab == L_JUMP and kind in ("linear", "mell"):
            if lab in (L_JUMP, L_BOT, L_WHY):
                out.append(w)
        elif src_lab == L_WHY and kind == "mell":
            if lab in (L_WHY, L_BOT, L_JUMP):
                out.append(w)
        elif src_lab == L_WHY and kind == "wn":
            if lab in (L_WHY, L_JUMP):  # digging chains may end on a jump
                out.append(w)
        elif lab == src_lab:
            out.append(w)
    return out


def _search_maps(src: MixedGraph, tgt: MixedGraph, kind: str) -> Iterator[VertexMap]:
    vs = src.vertices()
    cands = [_label_candidates(src.labels[v], tgt, kind) for v in vs]
    if any(not c for c in cands):
        return
    for pick in itertools.product(*cands):
        yield VertexMap(src, tgt, dict(zip(vs, pick)))


def exists_linear_fibration(src_seq: Sequent, tgt_seq: Sequent) -> bool:
    src, tgt = web_of_sequent(src_seq), web_of_sequent(tgt_seq)
    return any(check_linear_fibration(f).ok for f in _search_maps(src, tgt, "linear"))


def exists_wn_map(src_seq: Sequent, tgt_seq: Sequent) -> bool:
    src, tgt = web_of_sequent(src_seq), web_of_sequent(tgt_seq)
    return any(check_wn_map(f).ok for f in _search_maps(src, tgt, "wn"))


def exists_mell_fibration(src_seq: Sequent, tgt_seq: Sequent) -> bool:
    src, tgt = web_of_sequent(src_seq), web_of_sequent(tgt_seq)
    return any(check_mell_fibration(f).ok for f in _search_maps(src, tgt, "mell"))


# --- deep-rewrite reachability ----------------------------------------------------


def canon(f: Formula) -> Formula:
    """AC-canonical representative: commutative children sorted, left-nested."""
    from .cp import _ac_key

    if isinstance(f, (Par, Tens)):
        cls = type(f)
        flat: list[Formula] = []

        def go(g: Formula) -> None:
            if isinstance(g, cls):
                go(g.left)
                go(g.right)
            else:
                flat.append(canon(g))

        go(f)
        flat.sort(key=_ac_key)
        out = flat[0]
        for c in flat[1:]:
            out = cls(out, c)
        return out
    if isinstance(f, (OfCourse, WhyNot)):
        return type(f)(canon(f.child))
    return f


def _canon_key(ms: tuple[Formula, ...]) -> tuple:
    return tuple(render_formula(canon(f)) for f in ms)


def _positions(f: Formula, path=()):
    yield f, path
    if isinstance(f, (Par, Tens)):
        yield from _positions(f.left, path + (0,))
        yield from _positions(f.right, path + (1,))
    elif isinstance(f, (OfCourse, WhyNot)):
        yield from _positions(f.child, path + (0,))


def _replace(f: Formula, path, repl) -> Formula:
    if not path:
        return repl
    c = path[0]
    if isinstance(f, (Par, Tens)):
        if c == 0:
            return type(f)(_replace(f.left, path[1:], repl), f.right)
        return type(f)(f.left, _replace(f.right, path[1:], repl))
    return type(f)(_replace(f.child, path[1:], repl))


def _up_linear(ms: tuple[Formula, ...]) -> Iterator[tuple[Formula, ...]]:
    """Premises one deep weakening / bottom / contraction step above."""
    for i, f in enumerate(ms):
        for sub, path in _positions(f, ()):
            if isinstance(sub, WhyNot):
                yield ms[:i] + (_replace(f, path, JUMP),) + ms[i + 1 :]
                yield ms[:i] + (_replace(f, path, Par(sub, sub)),) + ms[i + 1 :]
            elif isinstance(sub, Bot):
                yield ms[:i] + (_replace(f, path, JUMP),) + ms[i + 1 :]


def _up_wn(ms: tuple[Formula, ...]) -> Iterator[tuple[Formula, ...]]:
    """Premises one dereliction / digging step above."""
    for i, f in enumerate(ms):
        for sub, path in _positions(f, ()):
            if isinstance(sub, WhyNot):
                yield ms[:i] + (_replace(f, path, sub.child),) + ms[i + 1 :]
                yield ms[:i] + (_replace(f, path, WhyNot(sub)),) + ms[i + 1 :]
            elif isinstance(sub, Jump):
                yield ms[:i] + (_replace(f, path, WhyNot(JUMP)),) + ms[i + 1 :]


def deep_reachable(
    src: Sequent, tgt: Sequent, rules: str, budget: Optional[SearchBudget] = None
) -> bool:
    """Whether `src` derives `tgt` with the named deep rule family
    ("linear" for weakening/bottom/contraction, "wn" for dereliction/digging),
    modulo associativity and commutativity."""
    if budget is None:
        budget = SearchBudget(
            max_size=max(sequent_size(src), 2 * sequent_size(tgt)) + 2,
            max_nodes=400000,
        )
    if len(src) != len(tgt):
        return False
    up = _up_linear if rules == "linear" else _up_wn
    goal = _canon_key(src.formulas)
    seen = {_canon_key(tgt.formulas)}
    frontier = [tuple(tgt.formulas)]
    nodes = 0
    while frontier:
        state = frontier.pop()
        if _canon_key(state) == goal:
            return True
        for nxt in up(state):
            if sum(formula_size(f) for f in nxt) > budget.max_size:
                continue
            key = _canon_key(nxt)
            if key in seen:
                continue
            nodes += 1
            if budget.spent(nodes):
                return False
            seen.add(key)
            frontier.append(nxt)
    return False
