"""Mixed graphs, the formula encoding, and relation-web recognition.

A mixed graph carries a symmetric edge relation R and a strict-order edge
relation D over labeled vertices.  Relation webs are the mixed graphs built
from single vertices by par / tensor / before composition; recognition works
by attempting that decomposition, which also yields the canonical formula
shape used for equality checks.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Iterable, Optional

from .formula import (
    Atom,
    Bot,
    Formula,
    Jump,
    NegAtom,
    OfCourse,
    One,
    Par,
    Sequent,
    TargetAddress,
    Tens,
    WhyNot,
)

VertexId = str
Label = str

L_BANG = "!"
L_WHY = "?"
L_ONE = "1"
L_BOT = "bot"
L_JUMP = "o"

_CONSTS = {L_BANG, L_WHY, L_ONE, L_BOT, L_JUMP}


def is_atom_label(lab: Label) -> bool:
    return lab not in _CONSTS and not lab.startswith("~")


def is_negatom_label(lab: Label) -> bool:
    return lab.startswith("~")


def is_atomic_label(lab: Label) -> bool:
    return lab not in _CONSTS


def is_modal_label(lab: Label) -> bool:
    return lab == L_BANG or lab == L_WHY


def dual_atom_labels(a: Label, b: Label) -> bool:
    if not (is_atomic_label(a) and is_atomic_label(b)):
        return False
    return a == "~" + b or b == "~" + a


def label_of_formula(f: Formula) -> Label:
    if isinstance(f, Atom):
        return f.name
    if isinstance(f, NegAtom):
        return "~" + f.name
    if isinstance(f, OfCourse):
        return L_BANG
    if isinstance(f, WhyNot):
        return L_WHY
    if isinstance(f, One):
        return L_ONE
    if isinstance(f, Bot):
        return L_BOT
    if isinstance(f, Jump):
        return L_JUMP
    raise TypeError(f"{f!r} bears no vertex")


class GraphError(ValueError):
    pass


class MixedGraph:
    """Labeled vertex set with R (symmetric) and D (strict order) adjacency.

    D is transitively closed on construction; a warning is emitted whenever
    closure adds edges.  Treated as immutable after construction.
    """

    def __init__(
        self,
        labels: dict[VertexId, Label],
        r_edges: Iterable[tuple[VertexId, VertexId]] = (),
        d_edges: Iterable[tuple[VertexId, VertexId]] = (),
        close: bool = True,
    ):
        self.labels: dict[VertexId, Label] = dict(labels)
        self.radj: dict[VertexId, set[VertexId]] = {v: set() for v in self.labels}
        self.dout: dict[VertexId, set[VertexId]] = {v: set() for v in self.labels}
        self.din: dict[VertexId, set[VertexId]] = {v: set() for v in self.labels}
        for u, v in r_edges:
            self._check_pair(u, v, "R")
            self.radj[u].add(v)
            self.radj[v].add(u)
        for u, v in d_edges:
            self._check_pair(u, v, "D")
            self.dout[u].add(v)
            self.din[v].add(u)
        if close:
            added = self._close_d()
            if added:
                warnings.warn(f"D closure added {added} edge(s)", stacklevel=2)
        for v in self.labels:
            both = self.radj[v] & (self.dout[v] | self.din[v])
            if both:
                raise GraphError(f"pair ({v},{both.pop()}) is in both R and D")

    def _check_pair(self, u: VertexId, v: VertexId, kind: str) -> None:
        if u not in self.labels or v not in self.labels:
            raise GraphError(f"{kind}-edge ({u},{v}) uses an unknown vertex")
        if u == v:
            raise GraphError(f"{kind}-edge ({u},{v}) is reflexive")

    def _close_d(self) -> int:
        added = 0
        queue = [(u, v) for u in self.dout for v in self.dout[u]]
        while queue:
            u, v = queue.pop()
            for w in list(self.dout[v]):
                if w != u and w not in self.dout[u]:
                    self.dout[u].add(w)
                    self.din[w].add(u)
                    queue.append((u, w))
                    added += 1
        return added

    # -- queries --------------------------------------------------------

    def vertices(self) -> list[VertexId]:
        return sorted(self.labels)

    def __len__(self) -> int:
        return len(self.labels)

    def __contains__(self, v: VertexId) -> bool:
        return v in self.labels

    def r(self, u: VertexId, v: VertexId) -> bool:
        return v in self.radj[u]

    def d(self, u: VertexId, v: VertexId) -> bool:
        return v in self.dout[u]

    def adjacent(self, u: VertexId, v: VertexId) -> bool:
        return v in self.radj[u] or v in self.dout[u] or v in self.din[u]

    def r_edges(self) -> list[tuple[VertexId, VertexId]]:
        return sorted((u, v) for u in self.radj for v in self.radj[u] if u < v)

    def d_edges(self) -> list[tuple[VertexId, VertexId]]:
        return sorted((u, v) for u in self.dout for v in self.dout[u])

    def relabel(self, mapping: dict[VertexId, Label]) -> "MixedGraph":
        labels = dict(self.labels)
        labels.update(mapping)
        g = MixedGraph(labels, close=False)
        g.radj = {v: set(s) for v, s in self.radj.items()}
        g.dout = {v: set(s) for v, s in self.dout.items()}
        g.din = {v: set(s) for v, s in self.din.items()}
        return g

    def induced(self, keep: Iterable[VertexId]) -> "MixedGraph":
        ks = set(keep)
        g = MixedGraph({v: self.labels[v] for v in ks}, close=False)
        for v in ks:
            g.radj[v] = self.radj[v] & ks
            g.dout[v] = self.dout[v] & ks
            g.din[v] = self.din[v] & ks
        return g

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MixedGraph):
            return NotImplemented
        return (
            self.labels == other.labels
            and self.radj == other.radj
            and self.dout == other.dout
        )

    def __repr__(self) -> str:
        return (
            f"MixedGraph({len(self.labels)} vertices, "
            f"{len(self.r_edges())} R, {len(self.d_edges())} D)"
        )


@dataclass(frozen=True)
class Verdict:
    ok: bool
    condition: str = ""
    witness: tuple = ()

    def __bool__(self) -> bool:
        return self.ok

    @staticmethod
    def passed() -> "Verdict":
        return Verdict(True)

    @staticmethod
    def failed(condition: str, witness: tuple = ()) -> "Verdict":
        return Verdict(False, condition, witness)


OK = Verdict.passed()


# --- graph composition -------------------------------------------------------


def graph_compose(op: str, g: MixedGraph, h: MixedGraph) -> MixedGraph:
    """par: disjoint union; tens: all R-pairs across; seq: all D-pairs g -> h."""
    overlap = set(g.labels) & set(h.labels)
    if overlap:
        raise GraphError(f"overlapping vertex ids: {sorted(overlap)[:3]}")
    out = MixedGraph({**g.labels, **h.labels}, close=False)
    for src in (g, h):
        for v in src.labels:
            out.radj[v] |= src.radj[v]
            out.dout[v] |= src.dout[v]
            out.din[v] |= src.din[v]
    if op == "tens":
        for u in g.labels:
            out.radj[u] |= set(h.labels)
        for v in h.labels:
            out.radj[v] |= set(g.labels)
    elif op == "seq":
        for u in g.labels:
            out.dout[u] |= set(h.labels)
        for v in h.labels:
            out.din[v] |= set(g.labels)
    elif op != "par":
        raise GraphError(f"unknown operation {op!r}")
    return out


def web_of_sequent(s: Sequent) -> MixedGraph:
    """Vertices are the vertex-bearing nodes of `s`, keyed by address."""
    webs = [_web_of(f, i, ()) for i, f in enumerate(s)]
    out = webs[0]
    for w in webs[1:]:
        out = graph_compose("par", out, w)
    return out


def web_of_formula(f: Formula) -> MixedGraph:
    return _web_of(f, 0, ())


def _web_of(f: Formula, index: int, prefix: tuple[int, ...]) -> MixedGraph:
    addr = str(TargetAddress(index, prefix))
    if isinstance(f, (Par, Tens)):
        left = _web_of(f.left, index, prefix + (0,))
        right = _web_of(f.right, index, prefix + (1,))
        return graph_compose("par" if isinstance(f, Par) else "tens", left, right)
    if isinstance(f, (OfCourse, WhyNot)):
        head = MixedGraph({addr: label_of_formula(f)}, close=False)
        child = _web_of(f.child, index, prefix + (0,))
        return graph_compose("seq", head, child)
    return MixedGraph({addr: label_of_formula(f)}, close=False)


# --- formula shapes ---------------------------------------------------------


@dataclass(frozen=True)
class SLeaf:
    vertex: VertexId
    label: Label


@dataclass(frozen=True)
class SPar:
    children: tuple["FormulaShape", ...]


@dataclass(frozen=True)
class STens:
    children: tuple["FormulaShape", ...]


@dataclass(frozen=True)
class SSeq:
    children: tuple["FormulaShape", ...]


FormulaShape = SLeaf | SPar | STens | SSeq


def shape_key(s: FormulaShape):
    """Canonical structural key: commutative children sorted, seq kept in order."""
    if isinstance(s, SLeaf):
        return ("v", s.label)
    if isinstance(s, SSeq):
        return ("s", tuple(shape_key(c) for c in s.children))
    tag = "p" if isinstance(s, SPar) else "t"
    return (tag, tuple(sorted(shape_key(c) for c in s.children)))


def eval_shape(s: FormulaShape) -> MixedGraph:
    if isinstance(s, SLeaf):
        return MixedGraph({s.vertex: s.label}, close=False)
    op = {"SPar": "par", "STens": "tens", "SSeq": "seq"}[type(s).__name__]
    out = eval_shape(s.children[0])
    for c in s.children[1:]:
        out = graph_compose(op, out, eval_shape(c))
    return out


def shape_vertices(s: FormulaShape) -> list[VertexId]:
    if isinstance(s, SLeaf):
        return [s.vertex]
    return [v for c in s.children for v in shape_vertices(c)]


class DecomposeError(GraphError):
    def __init__(self, stuck: frozenset):
        self.stuck = stuck
        super().__init__(f"no parallel/series/tensor split of {len(stuck)} vertices")


def _components(universe: set[VertexId], adj) -> list[set[VertexId]]:
    comps = []
    left = set(universe)
    while left:
        seed = left.pop()
        comp = {seed}
        frontier = [seed]
        while frontier:
            v = frontier.pop()
            new = adj(v) & left
            left -= new
            comp |= new
            frontier.extend(new)
        comps.append(comp)
    return comps


def decompose_web(g: MixedGraph, vertices: Optional[set[VertexId]] = None) -> FormulaShape:
    """Recover the par/tensor/before shape of a relation web.

    Raises DecomposeError (carrying the stuck vertex set) when the graph is
    not a relation web.
    """
    vs = set(g.labels) if vertices is None else set(vertices)
    if not vs:
        raise GraphError("empty graph has no shape")
    return _decompose(g, vs)


def _sorted_shapes(shapes: list[FormulaShape]) -> tuple[FormulaShape, ...]:
    return tuple(sorted(shapes, key=lambda s: (shape_key(s), shape_vertices(s))))


def _decompose(g: MixedGraph, vs: set[VertexId]) -> FormulaShape:
    if len(vs) == 1:
        v = next(iter(vs))
        return SLeaf(v, g.labels[v])

    comps = _components(vs, lambda v: (g.radj[v] | g.dout[v] | g.din[v]) & vs)
    if len(comps) > 1:
        return SPar(_sorted_shapes([_decompose(g, c) for c in comps]))

    # series split: blocks are components of the D-incomparability graph
    blocks = _components(vs, lambda v: vs - g.dout[v] - g.din[v] - {v})
    if len(blocks) > 1:
        blocks = _order_blocks(g, blocks)
        if blocks is not None:
            return SSeq(tuple(_decompose(g, b) for b in blocks))

    # tensor split: components of the complement of R
    comps = _components(vs, lambda v: vs - g.radj[v] - {v})
    if len(comps) > 1:
        if not any(g.dout[v] & (vs - c) for c in comps for v in c):
            return STens(_sorted_shapes([_decompose(g, c) for c in comps]))

    raise DecomposeError(frozenset(vs))


def _order_blocks(g: MixedGraph, blocks: list[set[VertexId]]) -> Optional[list[set[VertexId]]]:
    """Order series blocks by D; None when cross pairs are not uniformly ordered."""
    reps = [next(iter(b)) for b in blocks]
    idx = list(range(len(blocks)))

    def before(i: int, j: int) -> bool:
        return reps[j] in g.dout[reps[i]]

    order = sorted(idx, key=lambda i: sum(before(j, i) for j in idx))
    ordered = [blocks[i] for i in order]
    for i in range(len(ordered)):
        for x in ordered[i]:
            for j in range(i + 1, len(ordered)):
                for y in ordered[j]:
                    if y not in g.dout[x] or x in g.dout[y] or y in g.radj[x]:
                        return None
    return ordered


# --- recognition -------------------------------------------------------------


def recognize_web(g: MixedGraph) -> Verdict:
    """Non-empty, D strict order, R a cograph, D series-parallel, mixed-triangle free."""
    if not g.labels:
        return Verdict.failed("non-empty", ())
    bad = _d_order_violation(g)
    if bad is not None:
        return Verdict.failed("d-strict-order", bad)
    try:
        decompose_web(g)
    except DecomposeError as exc:
        return _witness_in(g, exc.stuck)
    return OK


def _d_order_violation(g: MixedGraph) -> Optional[tuple]:
    for u in g.dout:
        if u in g.dout[u]:
            return (u,)
        for v in g.dout[u]:
            if u in g.dout[v]:
                return (u, v)
            missing = g.dout[v] - g.dout[u] - {u}
            if missing:
                return (u, v, sorted(missing)[0])
    return None


def _witness_in(g: MixedGraph, stuck: frozenset) -> Verdict:
    """Locate a forbidden configuration inside a non-decomposable vertex set."""
    vs = sorted(stuck)
    rs = {v: g.radj[v] & stuck for v in vs}
    ds = {v: g.dout[v] & stuck for v in vs}
    din = {v: g.din[v] & stuck for v in vs}

    def unrelated(a, b):
        return b not in rs[a] and b not in ds[a] and a not in ds[b]

    for w in vs:  # mixed triangles: w-R-v, u and v D-related, u-w unrelated
        for v in rs[w]:
            for u in ds[v] | din[v]:
                if u != w and unrelated(u, w):
                    kind = "triangle-dv" if u in ds[v] else "triangle-vd"
                    return Verdict.failed(kind, (u, v, w))
    for a in vs:  # P4 in R: a-b-c-d induced
        for b in rs[a]:
            for c in rs[b]:
                if c == a or c in rs[a]:
                    continue
                for d in rs[c]:
                    if d not in (a, b) and d not in rs[a] and d not in rs[b]:
                        return Verdict.failed("p4", (a, b, c, d))
    for y in vs:  # N in D: u<v, y<v, y<z induced
        for v in ds[y]:
            for z in ds[y]:
                if z == v or not unrelated(z, v):
                    continue
                for u in din[v]:
                    if u not in (y, z) and unrelated(u, y) and unrelated(u, z):
                        return Verdict.failed("n-poset", (u, v, y, z))
    return Verdict.failed("not-series-parallel", tuple(vs))


def recognize_modal(g: MixedGraph) -> Verdict:
    """Properly labeled (D-sources are exactly the modal vertices) and
    D-predecessor sets totally ordered."""
    for v in g.vertices():
        has_out = bool(g.dout[v])
        if has_out != is_modal_label(g.labels[v]):
            return Verdict.failed("properly-labeled", (v,))
    for w in g.vertices():
        preds = sorted(g.din[w])
        for i, u in enumerate(preds):
            for v in preds[i + 1 :]:
                if u not in g.dout[v] and v not in g.dout[u]:
                    return Verdict.failed("modal-total-order", (u, v, w))
    return OK


def webs_equal(g: MixedGraph, h: MixedGraph) -> bool:
    """Label-preserving isomorphism, decided by canonical decomposition."""
    if len(g) != len(h):
        return False
    if sorted(g.labels.values()) != sorted(h.labels.values()):
        return False
    try:
        return shape_key(decompose_web(g)) == shape_key(decompose_web(h))
    except GraphError:
        return False
