"""Exponentially handsome proof nets: proofs whose target carries extra
contradiction formulas standing for cuts, plus the graph rewriting that
removes them.

A live cut is addressed by its contradiction core: a tensor of dual formulas
reachable from a cut formula's root through why-not, bang and par nodes only.
Reduction consumes one core per step; its products (smaller cores, copies)
occupy fresh occurrence slots, so the alive-slot vector drops strictly at
every step, which is the termination bookkeeping the normalizer asserts.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .cp import (
    CombinatorialProof,
    Derivation,
    _Counter,
    _finish,
    _translate,
    check_cp,
    check_derivation,
)
from .formula import (
    Atom,
    Bot,
    Formula,
    NegAtom,
    OfCourse,
    One,
    Par,
    Path,
    Sequent,
    TargetAddress,
    Tens,
    WhyNot,
    formula_size,
    negate,
    render_formula,
    replace_at,
    subformula_at,
)
from .relweb import L_BANG, L_JUMP, MixedGraph, VertexId
from .rgb import RgbCograph


class HpnError(ValueError):
    pass


@dataclass
class Hpn:
    proof: CombinatorialProof
    cuts: tuple[int, ...]  # indices of the cut formulas within the target

    def target(self) -> Sequent:
        return self.proof.target

    def conclusion(self) -> Sequent:
        drop = set(self.cuts)
        keep = [f for i, f in enumerate(self.proof.target) if i not in drop]
        return Sequent(tuple(keep))


def translate_with_cuts(d: Derivation) -> Hpn:
    """Each cut becomes an extra tensor conclusion; promotions below a cut
    wrap it in a why-not."""
    check_derivation(d, allow_cut=True)
    b = _translate(d, _Counter())
    cuts = tuple(range(b.n_user, len(b.aug)))
    cp = _finish(b, d, validate=True, system="mell")
    return Hpn(cp, cuts)


# --- cut cores ---------------------------------------------------------------


def cut_cores(s: Sequent, index: int) -> list[Path]:
    """Paths of the contradiction tensors inside one cut formula, leftmost
    first; the search descends through why-not, bang and par nodes."""
    out: list[Path] = []

    def go(f: Formula, p: Path) -> None:
        if isinstance(f, (WhyNot, OfCourse)):
            go(f.child, p + (0,))
        elif isinstance(f, Tens) and _is_contradiction(f):
            out.append(p)
        elif isinstance(f, Par):
            go(f.left, p + (0,))
            go(f.right, p + (1,))

    go(s[index], ())
    return out


def _is_contradiction(f: Tens) -> bool:
    try:
        return negate(f.left) == f.right
    except Exception:
        return False


def measure(h: Hpn) -> tuple[int, tuple[int, ...]]:
    """(selected cut's web size, occurrence counts per distinct live cut
    formula in first-appearance order)."""
    live = [i for i in h.cuts if cut_cores(h.target(), i)]
    sel = formula_size(h.target()[live[0]]) if live else 0
    counts: dict[str, int] = {}
    order: list[str] = []
    for i in h.cuts:
        n = len(cut_cores(h.target(), i))
        if not n:
            continue
        key = render_formula(h.target()[i])
        if key not in counts:
            counts[key] = 0
            order.append(key)
        counts[key] += n
    return (sel, tuple(counts[k] for k in order))


# --- one reduction step --------------------------------------------------------


class _Surgeon:
    """Mutable copy of an Hpn for one reduction step; records which target
    formulas it removed or appended so the caller can track occurrences."""

    def __init__(self, h: Hpn):
        web = h.proof.source.web
        self.labels = dict(web.labels)
        self.radj = {v: set(s) for v, s in web.radj.items()}
        self.dout = {v: set(s) for v, s in web.dout.items()}
        self.din = {v: set(s) for v, s in web.din.items()}
        self.classes = [set(c) for c in h.proof.source.classes]
        self.mu: dict[VertexId, TargetAddress] = dict(h.proof.mapping)
        self.seq: list[Formula] = list(h.proof.target.formulas)
        self.cuts = list(h.cuts)
        self.removed: list[int] = []  # original indices of dropped formulas
        self.appended: list[int] = []  # final indices of fresh formulas
        self._shift: dict[int, int] = {}  # original index -> current index

    # -- source side

    def fresh_copy_id(self, base: VertexId, ordinal: int) -> VertexId:
        n = ordinal
        while f"{base}.c{n}" in self.labels:
            n += 1
        return f"{base}.c{n}"

    def fiber(self, addr: TargetAddress) -> list[VertexId]:
        return sorted(v for v, a in self.mu.items() if a == addr)

    def region(self, addr: TargetAddress) -> list[VertexId]:
        i, p = addr.index, addr.path
        n = len(p)
        return sorted(
            v for v, a in self.mu.items() if a.index == i and a.path[:n] == p
        )

    def class_of(self, v: VertexId) -> set[VertexId]:
        for c in self.classes:
            if v in c:
                return c
        raise HpnError(f"vertex {v} in no class")

    def delete(self, vs: Iterable[VertexId]) -> None:
        for v in list(vs):
            for u in self.radj.pop(v):
                self.radj[u].discard(v)
            for u in self.dout.pop(v):
                self.din[u].discard(v)
            for u in self.din.pop(v):
                self.dout[u].discard(v)
            del self.labels[v]
            self.mu.pop(v, None)
            c = self.class_of(v)
            c.discard(v)
            if not c:
                self.classes.remove(c)

    def merge_classes(self, u: VertexId, v: VertexId) -> None:
        cu, cv = self.class_of(u), self.class_of(v)
        if cu is cv:
            return
        cu |= cv
        self.classes.remove(cv)

    def add_r(self, u: VertexId, v: VertexId) -> None:
        if u != v:
            self.radj[u].add(v)
            self.radj[v].add(u)

    def drop_r(self, u: VertexId, v: VertexId) -> None:
        self.radj[u].discard(v)
        self.radj[v].discard(u)

    def add_d(self, u: VertexId, v: VertexId) -> None:
        if u != v:
            self.dout[u].add(v)
            self.din[v].add(u)

    # -- target side

    def retarget(self, fn) -> None:
        self.mu = {v: fn(a) for v, a in self.mu.items()}

    def replace_subformula(self, addr: TargetAddress, repl: Formula) -> None:
        s = Sequent(tuple(self.seq))
        self.seq = list(replace_at(s, addr.index, addr.path, repl).formulas)

    def append_formula(self, f: Formula, is_cut: bool) -> int:
        self.seq.append(f)
        idx = len(self.seq) - 1
        self.appended.append(idx)
        if is_cut:
            self.cuts.append(idx)
        return idx

    def remove_formula(self, index: int) -> None:
        if any(a.index == index for a in self.mu.values()):
            raise HpnError(f"dangling map into removed formula {index}")
        del self.seq[index]
        self.removed.append(index)
        self.cuts = [c - (c > index) for c in self.cuts if c != index]
        self.appended = [i - (i > index) for i in self.appended if i != index]

        def fn(a: TargetAddress) -> TargetAddress:
            return TargetAddress(a.index - 1, a.path) if a.index > index else a

        self.retarget(fn)

    def finish(self) -> Hpn:
        g = MixedGraph(self.labels, close=False)
        g.radj = self.radj
        g.dout = self.dout
        g.din = self.din
        rgb = RgbCograph(g, [frozenset(c) for c in self.classes])
        cp = CombinatorialProof(rgb, Sequent(tuple(self.seq)), dict(self.mu))
        return Hpn(cp, tuple(sorted(self.cuts)))


@dataclass
class StepReport:
    case: str
    cut: int
    result: Hpn
    removed: list[int]
    appended: list[int]


def reduce_step(h: Hpn, cut: int, dup_mode: str = "kingdom") -> Hpn:
    return reduce_step_report(h, cut, dup_mode).result


def reduce_step_report(h: Hpn, cut: int, dup_mode: str = "kingdom") -> StepReport:
    """Apply one case to the first live core of the cut formula at `cut`."""
    if cut not in h.cuts:
        raise HpnError(f"index {cut} is not a live cut")
    cores = cut_cores(h.target(), cut)
    if not cores:
        raise HpnError(f"cut {cut} has no live core")
    core = cores[0]
    s = _Surgeon(h)
    case = _dispatch(s, cut, core, dup_mode)
    return StepReport(case, cut, s.finish(), s.removed, s.appended)


def _core_parts(s: _Surgeon, cut: int, core: Path) -> tuple[Formula, Formula]:
    f = subformula_at(Sequent(tuple(s.seq)), cut, core)
    assert isinstance(f, Tens)
    return f.left, f.right


def _dispatch(s: _Surgeon, cut: int, core: Path, dup_mode: str) -> str:
    left, right = _core_parts(s, cut, core)
    la = TargetAddress(cut, core + (0,))
    ra = TargetAddress(cut, core + (1,))

    if isinstance(left, (Atom, NegAtom)):
        _case_atomic(s, cut, core, la, ra)
        return "ax-vs-ax"
    if isinstance(left, (One, Bot)):
        _case_atomic(s, cut, core, la, ra)
        return "bot-vs-one"
    if isinstance(left, (Par, Tens)):
        _case_multiplicative(s, cut, core, left, right)
        return "tens-vs-par"
    if isinstance(left, WhyNot):  # normalize the box to the left child
        la, ra = ra, la
        left, right = right, left
    if not (isinstance(left, OfCourse) and isinstance(right, WhyNot)):
        raise HpnError(f"core at {cut}:{core} is not reducible")
    qpos = ra.path[-1]
    branches = _why_branches(s, cut, core, qpos)
    if len(branches) >= 2:
        _case_contraction(s, cut, core, la, branches, dup_mode)
        return "wprom-vs-contr"
    fiber = s.fiber(ra)
    if not fiber:
        _case_dereliction(s, cut, core)
        return "wprom-vs-der"
    if len(fiber) == 1 and s.labels[fiber[0]] == L_JUMP:
        _case_weakening(s, cut, core, la, fiber[0])
        return "wprom-vs-weak"
    if len(fiber) == 1:
        _case_promotion(s, cut, core, la, fiber[0])
        return "wprom-vs-wprom"
    chain = sorted(fiber, key=lambda v: len(s.dout[v] & set(fiber)), reverse=True)
    for i in range(len(chain) - 1):
        if chain[i + 1] not in s.dout[chain[i]]:
            raise HpnError(f"cut fiber at {ra} is neither a chain nor branched")
    _case_digging(s, cut, core, la, chain)
    return "wprom-vs-dig"


def _source_components(s: _Surgeon, region: list[VertexId]) -> list[list[VertexId]]:
    rest = set(region)
    comps: list[list[VertexId]] = []
    while rest:
        seed = min(rest)
        comp = {seed}
        rest.discard(seed)
        frontier = [seed]
        while frontier:
            v = frontier.pop()
            nbrs = (s.radj[v] | s.dout[v] | s.din[v]) & rest
            rest -= nbrs
            comp |= nbrs
            frontier.extend(nbrs)
        comps.append(sorted(comp))
    return comps


def _why_branches(s: _Surgeon, cut: int, core: Path, qpos: int) -> list[list[VertexId]]:
    """Contraction branches of the why-not side: source components merged
    while their target footprints stay disjoint.  Material under a deeper
    multi-branch why-not is footprinted by that target's branch index, so an
    inner contraction below a single dereliction stays one branch."""
    seq = Sequent(tuple(s.seq))
    top = core + (qpos,)
    whys = [
        TargetAddress(cut, top + p)
        for sub, p in _positions(subformula_at(seq, cut, top))
        if isinstance(sub, WhyNot)
    ]
    whys.sort(key=lambda a: len(a.path), reverse=True)  # deepest first
    out: dict[TargetAddress, list[list[VertexId]]] = {}
    assign: dict[TargetAddress, dict[VertexId, int]] = {}
    for t in whys:
        material = s.region(t)
        if not material:
            continue
        inner = [
            t2
            for t2 in out
            if len(t2.path) > len(t.path)
            and t2.path[: len(t.path)] == t.path
            and len(out[t2]) >= 2
        ]
        inner.sort(key=lambda a: len(a.path), reverse=True)

        def tag(v, t=t, inner=inner):
            a = s.mu[v]
            if a == t:
                return "*"
            for t2 in inner:
                if a.path[: len(t2.path)] == t2.path:
                    return ("branch", t2, assign[t2][v])
            return a

        from .fibration import _coalesce_by_tag, _group_by_footprint

        def compatible(branch_vs, comp_vs):
            for x in branch_vs:
                ax = s.mu[x]
                for y in comp_vs:
                    ay = s.mu[y]
                    if ax != ay and _addr_related(seq, ax, ay):
                        return False
            return True

        units = _coalesce_by_tag(_source_components(s, material), tag)
        out[t] = _group_by_footprint(units, lambda u: u[1], compatible)
        assign[t] = {v: i for i, br in enumerate(out[t]) for v in br}
    return out.get(TargetAddress(cut, top), [])


def _addr_related(seq: Sequent, a: TargetAddress, b: TargetAddress) -> bool:
    """Whether two sequent addresses carry an R- or D-edge in the web: a
    tensor at their meet, or a modal ancestor relationship."""
    if a.index != b.index:
        return False
    pa, pb = a.path, b.path
    n = 0
    while n < len(pa) and n < len(pb) and pa[n] == pb[n]:
        n += 1
    if n == len(pa) or n == len(pb):  # one is an ancestor of the other
        anc = a if len(pa) < len(pb) else b
        node = subformula_at(seq, anc.index, anc.path)
        return isinstance(node, (OfCourse, WhyNot))
    node = subformula_at(seq, a.index, pa[:n])
    return isinstance(node, Tens)


def _positions(f: Formula, path: Path = ()):
    yield f, path
    if isinstance(f, (Par, Tens)):
        yield from _positions(f.left, path + (0,))
        yield from _positions(f.right, path + (1,))
    elif isinstance(f, (OfCourse, WhyNot)):
        yield from _positions(f.child, path + (0,))


def _single(s: _Surgeon, addr: TargetAddress) -> VertexId:
    fib = s.fiber(addr)
    if len(fib) != 1:
        raise HpnError(f"expected a single pre-image at {addr}, got {fib}")
    return fib[0]


def _bang_sides(s: _Surgeon, cut: int, core: Path):
    left, right = _core_parts(s, cut, core)
    if isinstance(left, OfCourse):
        return left, right, 0, 1
    return right, left, 1, 0


def _cleanup_core(s: _Surgeon, cut: int, core: Path) -> None:
    """Remove the emptied core position: drop empty wrappers (with their
    sources), collapse a par onto the sibling, or delete the formula."""
    path = core
    while path:
        parent = path[:-1]
        f = subformula_at(Sequent(tuple(s.seq)), cut, parent)
        if isinstance(f, Par):
            keep = f.right if path[-1] == 0 else f.left
            kept = 1 if path[-1] == 0 else 0

            def collapse(a: TargetAddress, parent=parent, kept=kept) -> TargetAddress:
                m = len(parent)
                if a.index == cut and a.path[: m + 1] == parent + (kept,):
                    return TargetAddress(cut, parent + a.path[m + 1 :])
                return a

            s.replace_subformula(TargetAddress(cut, parent), keep)
            s.retarget(collapse)
            return
        fib = s.fiber(TargetAddress(cut, parent))
        if len(fib) > 1:
            raise HpnError(f"wrapper at {parent} has several pre-images")
        if fib:
            w = fib[0]
            if s.labels[w] == L_BANG:
                s.delete(set(s.class_of(w)))
            else:
                s.delete([w])
        path = parent
    s.remove_formula(cut)


def _case_atomic(s: _Surgeon, cut: int, core: Path, la, ra) -> None:
    x = _single(s, la)
    y = _single(s, ra)
    s.merge_classes(x, y)
    s.delete([x, y])
    _cleanup_core(s, cut, core)


def _case_multiplicative(s: _Surgeon, cut: int, core: Path, left, right) -> None:
    if isinstance(left, Tens):
        ts, ps = 0, 1
        x_f, y_f = left.left, left.right
    else:
        ts, ps = 1, 0
        x_f, y_f = right.left, right.right
    vx = s.region(TargetAddress(cut, core + (ts, 0)))
    vy = s.region(TargetAddress(cut, core + (ts, 1)))
    vnx = s.region(TargetAddress(cut, core + (ps, 0)))
    vny = s.region(TargetAddress(cut, core + (ps, 1)))
    for u in vx:
        for v in vy:
            s.drop_r(u, v)
    for u in vy:
        for v in vnx:
            s.drop_r(u, v)
    for u in vx:
        for v in vny:
            s.drop_r(u, v)
    new_core = Par(Tens(x_f, negate(x_f)), Tens(y_f, negate(y_f)))
    s.replace_subformula(TargetAddress(cut, core), new_core)
    moves = {
        core + (ts, 0): core + (0, 0),
        core + (ts, 1): core + (1, 0),
        core + (ps, 0): core + (0, 1),
        core + (ps, 1): core + (1, 1),
    }

    def fn(a: TargetAddress) -> TargetAddress:
        if a.index != cut:
            return a
        for old, new in moves.items():
            if a.path[: len(old)] == old:
                return TargetAddress(cut, new + a.path[len(old) :])
        return a

    s.retarget(fn)


def _case_dereliction(s: _Surgeon, cut: int, core: Path) -> None:
    bang_side, why_side, bpos, qpos = _bang_sides(s, cut, core)
    b = _single(s, TargetAddress(cut, core + (bpos,)))
    s.delete(set(s.class_of(b)))
    s.replace_subformula(
        TargetAddress(cut, core), Tens(bang_side.child, why_side.child)
    )
    n = len(core)

    def fn(a: TargetAddress) -> TargetAddress:
        if a.index == cut and len(a.path) > n + 1 and a.path[:n] == core:
            side = 0 if a.path[n] == bpos else 1
            return TargetAddress(cut, core + (side,) + a.path[n + 2 :])
        return a

    s.retarget(fn)


def _case_weakening(s: _Surgeon, cut: int, core: Path, la, o: VertexId) -> None:
    b = _single(s, la)
    box_class = set(s.class_of(b))
    doors = sorted(box_class - {b})
    scope: set[VertexId] = set()
    for w in box_class:
        scope |= s.dout[w]
    dead = box_class | scope
    jump_class = s.class_of(o)
    for q in doors:
        nid = f"{q}.j"
        s.labels[nid] = L_JUMP
        s.radj[nid] = set(s.radj[q]) - dead
        for u in s.radj[nid]:
            s.radj[u].add(nid)
        s.dout[nid] = set()
        s.din[nid] = set(s.din[q]) - dead
        for u in s.din[nid]:
            s.dout[u].add(nid)
        s.mu[nid] = s.mu[q]
        jump_class.add(nid)
    touched = {
        a.index
        for v in dead
        if v in s.mu
        for a in (s.mu[v],)
        if a.index in s.cuts and a.index != cut
    }
    s.delete(dead)
    s.delete([o])
    # erased inner cuts (and our own core) leave empty core positions behind
    for j in sorted(touched | {cut}, reverse=True):
        while True:
            before = len(s.seq)
            empty = [
                p
                for p in cut_cores(Sequent(tuple(s.seq)), j)
                if not s.region(TargetAddress(j, p))
            ]
            if not empty:
                break
            _cleanup_core(s, j, empty[0])
            if len(s.seq) != before:
                break  # the whole formula went away


def _case_promotion(s: _Surgeon, cut: int, core: Path, la, w: VertexId) -> None:
    bang_side, why_side, bpos, qpos = _bang_sides(s, cut, core)
    b = _single(s, la if bpos == 0 else TargetAddress(cut, core + (bpos,)))
    vb = s.region(TargetAddress(cut, core + (bpos, 0)))
    s.merge_classes(b, w)
    for u in vb:
        s.drop_r(w, u)
        s.add_d(w, u)
    s.delete([b])
    s.replace_subformula(
        TargetAddress(cut, core), WhyNot(Tens(bang_side.child, why_side.child))
    )
    n = len(core)

    def fn(a: TargetAddress) -> TargetAddress:
        if a.index != cut or a.path[:n] != core or len(a.path) == n:
            return a
        if a.path == core + (qpos,):
            return TargetAddress(cut, core)  # the surviving why-not wrapper
        side = 0 if a.path[n] == bpos else 1
        return TargetAddress(cut, core + (0, side) + a.path[n + 2 :])

    s.retarget(fn)


def _case_digging(s: _Surgeon, cut: int, core: Path, la, chain: list[VertexId]) -> None:
    """The box opens and is re-formed once per chain layer: its bang
    dissolves, its doors are cloned per layer, the chain why-nots become the
    core's wrappers, and each layer joins the class of its chain member so
    that every new box pairs the wrapper with the material it closes over."""
    bang_side, why_side, bpos, qpos = _bang_sides(s, cut, core)
    b = _single(s, TargetAddress(cut, core + (bpos,)))
    m = len(chain)  # outermost first: chain[0] dominates the rest
    left_doors = sorted(s.class_of(b) - {b})
    vb = s.region(TargetAddress(cut, core + (bpos, 0)))
    vn = [v for v in s.region(TargetAddress(cut, core + (qpos,))) if v not in chain]
    for u in s.region(TargetAddress(cut, core + (bpos,))):
        for v in s.region(TargetAddress(cut, core + (qpos,))):
            s.drop_r(u, v)
    layers: list[list[VertexId]] = [left_doors]
    for i in range(1, m):
        fresh = {q: s.fresh_copy_id(q, i) for q in left_doors}
        for q, nid in fresh.items():
            s.labels[nid] = s.labels[q]
            s.radj[nid] = set()
            s.dout[nid] = set()
            s.din[nid] = set()
            s.mu[nid] = s.mu[q]
            s.classes.append({nid})
        for q, nid in fresh.items():
            for u in s.radj[q]:
                s.add_r(nid, fresh.get(u, u))
            for u in s.dout[q]:
                s.add_d(nid, fresh.get(u, u))
            for u in s.din[q]:
                if u not in fresh:
                    s.add_d(u, nid)
        layers.append([fresh[q] for q in left_doors])
    for q_chain in zip(*layers):  # nest each door's copies below the original
        for i, qi in enumerate(q_chain):
            for qj in q_chain[i + 1 :]:
                s.add_d(qi, qj)
    s.delete([b])
    for i, w in enumerate(chain):
        for q in layers[i]:
            s.merge_classes(w, q)
        for v in vb:
            s.add_d(w, v)
    for u in vb:
        for v in vn:
            s.add_r(u, v)
    new_core: Formula = Tens(bang_side.child, why_side.child)
    for _ in range(m):
        new_core = WhyNot(new_core)
    s.replace_subformula(TargetAddress(cut, core), new_core)
    wrap = (0,) * m
    n = len(core)

    def fn(a: TargetAddress) -> TargetAddress:
        if a.index != cut or a.path[:n] != core or len(a.path) == n:
            return a
        side = 0 if a.path[n] == bpos else 1
        return TargetAddress(cut, core + wrap + (side,) + a.path[n + 2 :])

    s.retarget(fn)
    for i, w in enumerate(chain):
        s.mu[w] = TargetAddress(cut, core + (0,) * i)


def _case_contraction(
    s: _Surgeon, cut: int, core: Path, la, branches: list[list[VertexId]], dup_mode: str
) -> None:
    bang_side, why_side, bpos, qpos = _bang_sides(s, cut, core)
    b = _single(s, TargetAddress(cut, core + (bpos,)))
    core_f = subformula_at(Sequent(tuple(s.seq)), cut, core)
    k = len(branches)
    p_bang = set(s.region(TargetAddress(cut, core + (bpos,))))
    p_why = set(s.region(TargetAddress(cut, core + (qpos,))))
    for u in sorted(p_bang):
        for v in sorted(p_why):
            s.drop_r(u, v)

    zone = _duplication_zone(s, b, dup_mode)
    if zone & p_why:
        raise HpnError("duplication zone touches the other side of the cut")

    regions = [set(br) for br in branches]
    if set().union(*regions) != p_why:
        raise HpnError("why-not branches do not partition the region")

    new_core: Formula = core_f
    for _ in range(k - 1):
        new_core = Par(new_core, core_f)
    s.replace_subformula(TargetAddress(cut, core), new_core)

    def copy_path(i: int) -> Path:
        return core + ((0,) * (k - 1) if i == 0 else (0,) * (k - 1 - i) + (1,))

    inner_cuts = sorted(
        {
            a.index
            for v in zone
            for a in (s.mu[v],)
            if a.index in s.cuts and a.index != cut
        }
    )

    clones: list[dict[VertexId, VertexId]] = [{v: v for v in zone}]
    for i in range(1, k):
        fresh = {v: s.fresh_copy_id(v, i) for v in zone}
        for v, nv in fresh.items():
            s.labels[nv] = s.labels[v]
            s.radj[nv] = set()
            s.dout[nv] = set()
            s.din[nv] = set()
            s.mu[nv] = s.mu[v]
        for v, nv in fresh.items():
            for u in s.radj[v]:
                s.add_r(nv, fresh.get(u, u))
            for u in s.dout[v]:
                s.add_d(nv, fresh.get(u, u))
            for u in s.din[v]:
                if u not in fresh:
                    s.add_d(u, nv)
        for cls in list(s.classes):
            inside = cls & zone
            if inside:
                if inside != cls:
                    raise HpnError("duplication zone cuts a linking class")
                s.classes.append({fresh[v] for v in cls})
        # inner cuts duplicated inside the zone become fresh occurrences
        for j in inner_cuts:
            nj = s.append_formula(s.seq[j], is_cut=True)
            for v, nv in fresh.items():
                a = s.mu[nv]
                if a.index == j:
                    s.mu[nv] = TargetAddress(nj, a.path)
        clones.append(fresh)

    for i, (branch, fresh) in enumerate(zip(branches, clones)):
        cp = copy_path(i)
        n = len(core)
        for v in zone:
            nv = fresh[v]
            a = s.mu[nv]
            if a.index == cut and a.path[:n] == core:
                s.mu[nv] = TargetAddress(cut, cp + a.path[n:])
        for v in sorted(regions[i]):
            a = s.mu[v]
            s.mu[v] = TargetAddress(cut, cp + a.path[n:])
        bang_copy = sorted(fresh[v] for v in (zone & p_bang))
        for u in bang_copy:
            for v in sorted(regions[i]):
                s.add_r(u, v)


def _duplication_zone(s: _Surgeon, b: VertexId, dup_mode: str) -> set[VertexId]:
    box_class = set(s.class_of(b))
    if dup_mode == "kingdom":
        zone = set(box_class)
        changed = True
        while changed:
            changed = False
            for v in list(zone):
                new = (s.dout[v] | s.class_of(v)) - zone
                if new:
                    zone |= new
                    changed = True
        return zone
    if dup_mode != "component":
        raise ValueError(f"unknown duplication mode {dup_mode!r}")
    zone = set(box_class)
    frontier = list(zone)
    while frontier:
        v = frontier.pop()
        new = (s.radj[v] | s.dout[v] | s.din[v] | s.class_of(v)) - zone
        zone |= new
        frontier.extend(new)
    return zone


# --- normalization ---------------------------------------------------------------


@dataclass
class TraceEntry:
    case: str
    cut: int
    measure_before: tuple
    measure_after: tuple
    slots_before: tuple[int, ...]
    slots_after: tuple[int, ...]


def normalize(
    h: Hpn, dup_mode: str = "kingdom", max_steps: int = 20000
) -> tuple[CombinatorialProof, list[TraceEntry]]:
    """Reduce the lowest-index live cut until none remains.

    Occurrence slots are append-only: each step kills the selected core's
    slots and appends fresh ones for its products, so the alive vector
    decreases strictly in lexicographic order; any violation aborts."""
    trace: list[TraceEntry] = []
    cur = h
    # per-formula slot ids; each formula's cores share its slot entry
    slot_of: dict[int, int] = {}
    alive: list[int] = []
    for i in cur.cuts:
        slot_of[i] = len(alive)
        alive.append(len(cut_cores(cur.target(), i)))
    steps = 0
    while True:
        live = [i for i in cur.cuts if cut_cores(cur.target(), i)]
        if not live:
            break
        if steps >= max_steps:
            raise HpnError("normalization exceeded the step budget")
        target = min(live)
        before = measure(cur)
        slots_before = tuple(alive)
        rep = reduce_step_report(cur, target, dup_mode)
        # maintain the slot registry: removals drop, appends get fresh slots,
        # and the reduced formula's cores are re-slotted fresh
        sel_slot = slot_of[target]
        index_map: dict[int, int] = {}
        kept = [i for i in range(len(cur.target())) if i not in rep.removed]
        for new_i, old_i in enumerate(kept):
            index_map[old_i] = new_i
        new_slot_of: dict[int, int] = {}
        for old_i, slot in slot_of.items():
            if old_i in rep.removed or old_i == target:
                continue
            new_slot_of[index_map[old_i]] = slot
        alive[sel_slot] = 0
        if target not in rep.removed:
            new_i = index_map[target]
            new_slot_of[new_i] = len(alive)
            alive.append(len(cut_cores(rep.result.target(), new_i)))
        for idx in rep.appended:
            new_slot_of[idx] = len(alive)
            alive.append(len(cut_cores(rep.result.target(), idx)))
        for i in rep.result.cuts:
            if i not in new_slot_of:
                raise HpnError(f"cut {i} lost its occurrence slot")
        slot_of = new_slot_of
        slots_after = tuple(alive)
        if not slots_after < slots_before:
            raise HpnError(
                f"occurrence bookkeeping did not decrease at step {steps} ({rep.case})"
            )
        trace.append(
            TraceEntry(rep.case, target, before, measure(rep.result), slots_before, slots_after)
        )
        cur = rep.result
        steps += 1
    if cur.cuts:
        raise HpnError(f"dead cut formulas remain: {cur.cuts}")
    v = check_cp(cur.proof, "mell")
    if not v:
        raise HpnError(
            f"normalization produced an invalid proof: {v.condition} at {v.witness}"
        )
    return cur.proof, trace
