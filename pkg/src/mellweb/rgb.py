"""RGB-cographs: linking validation, alternating-path correctness, the
modal-to-RB reduction, and tensor splittings.

Correctness is the usual alternating-elementary condition: every two vertices
joined by some chordless path alternating between linking edges and R/D
edges, and no chordless alternating cycle, plus a box-closure condition
relating D-edges and linking classes.  Two deciders are provided: a direct
backtracking path search (exponential worst case, good witnesses) and a
polynomial splitting-based check used for large graphs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

from .relweb import (
    L_BANG,
    L_JUMP,
    L_ONE,
    L_WHY,
    GraphError,
    MixedGraph,
    OK,
    Verdict,
    VertexId,
    is_atomic_label,
    is_modal_label,
)


class RgbCograph:
    """A modal relation web plus a linking (partition of the vertex set)."""

    def __init__(self, web: MixedGraph, classes: Iterable[Iterable[VertexId]]):
        self.web = web
        self.classes: tuple[frozenset[VertexId], ...] = tuple(
            sorted((frozenset(c) for c in classes), key=lambda c: sorted(c))
        )
        self.class_of: dict[VertexId, frozenset[VertexId]] = {}
        for cls in self.classes:
            if not cls:
                raise GraphError("empty linking class")
            for v in cls:
                if v not in web:
                    raise GraphError(f"linking mentions unknown vertex {v}")
                if v in self.class_of:
                    raise GraphError(f"linking classes overlap at {v}")
                self.class_of[v] = cls
        missing = set(web.labels) - set(self.class_of)
        if missing:
            raise GraphError(f"linking misses vertices {sorted(missing)[:3]}")

    def label(self, v: VertexId) -> str:
        return self.web.labels[v]

    def linked(self, u: VertexId, v: VertexId) -> bool:
        return v in self.class_of[u]

    def __repr__(self) -> str:
        return f"RgbCograph({self.web!r}, {len(self.classes)} classes)"


def validate_linking(g: RgbCograph) -> Verdict:
    """The four class conditions: atomic pairs, unit classes, jump anchoring,
    one bang per modal class."""
    for cls in g.classes:
        labels = {v: g.label(v) for v in cls}
        atoms = [v for v, l in labels.items() if is_atomic_label(l)]
        ones = [v for v, l in labels.items() if l == L_ONE]
        jumps = [v for v, l in labels.items() if l == L_JUMP]
        bangs = [v for v, l in labels.items() if l == L_BANG]
        whys = [v for v, l in labels.items() if l == L_WHY]
        witness = tuple(sorted(cls))
        if ones and (len(ones) > 1 or atoms or bangs or whys):
            return Verdict.failed("unit-class", witness)
        if (bangs or whys) and (len(bangs) != 1 or jumps):
            return Verdict.failed("modal-class", witness)
        if atoms and len(atoms) != 2:
            return Verdict.failed("atomic-class", witness)
        if jumps and not (atoms or ones):
            return Verdict.failed("jump-class", witness)
    return OK


# --- alternating paths -------------------------------------------------------


@dataclass(frozen=True)
class AePath:
    vertices: tuple[VertexId, ...]
    kinds: tuple[str, ...]  # per edge: "link" or "rd"

    def is_cycle(self) -> bool:
        return len(self.vertices) > 1 and self.vertices[0] == self.vertices[-1]


def _rd_adj(web: MixedGraph, v: VertexId) -> set[VertexId]:
    return web.radj[v] | web.dout[v] | web.din[v]


def _rd_out(web: MixedGraph, v: VertexId) -> set[VertexId]:
    # R/D steps follow D-edges forward only; R is symmetric
    return web.radj[v] | web.dout[v]


def ae_path_valid(g: RgbCograph, path: AePath) -> bool:
    """Re-check the elementary/alternating/chordless invariants."""
    vs, kinds = path.vertices, path.kinds
    if len(kinds) != len(vs) - 1:
        return False
    inner = vs[:-1] if path.is_cycle() else vs
    if len(set(inner)) != len(inner):
        return False
    for i, kind in enumerate(kinds):
        u, v = vs[i], vs[i + 1]
        if kind == "link" and not (g.linked(u, v) and u != v):
            return False
        if kind == "rd" and v not in _rd_out(g.web, u):
            return False
        if i and kinds[i - 1] == kind:
            return False
    if path.is_cycle() and (len(kinds) % 2 or kinds[0] == kinds[-1]):
        return False
    cyc = path.is_cycle()
    core = vs[:-1] if cyc else vs
    n = len(core)
    for i in range(n):
        for j in range(i + 2, n):
            if cyc and i == 0 and j == n - 1:
                continue  # cyclically adjacent
            if core[j] in _rd_adj(g.web, core[i]):
                return False
    return True


def find_chordless_ae_cycle(g: RgbCograph) -> Optional[AePath]:
    """First chordless alternating cycle in sorted vertex order, or None."""
    web = g.web
    for x0 in web.vertices():
        found = _cycle_dfs(g, x0)
        if found is not None:
            return found
    return None


def _cycle_dfs(g: RgbCograph, x0: VertexId) -> Optional[AePath]:
    web = g.web
    path = [x0]
    on_path = {x0}
    x0_rd = _rd_adj(web, x0)

    def extend(kind: str) -> Optional[AePath]:
        last = path[-1]
        if kind == "rd":
            # close the cycle: x0's chord pairs (0, 2..k-1) checked here since
            # position 0 is exempt from the insertion check
            if (
                len(path) % 2 == 0
                and x0 in _rd_out(web, last)
                and not (x0_rd & set(path[2:-1]))
            ):
                kinds = tuple("link" if i % 2 == 0 else "rd" for i in range(len(path)))
                return AePath(tuple(path) + (x0,), kinds)
            nbrs = _rd_out(web, last)
        else:
            nbrs = g.class_of[last] - {last}
        blocked = set(path[1:-1])
        for y in sorted(nbrs):
            if y in on_path:
                continue
            if _rd_adj(web, y) & blocked:
                continue  # chord against the prefix
            path.append(y)
            on_path.add(y)
            res = extend("rd" if kind == "link" else "link")
            if res is not None:
                return res
            on_path.discard(y)
            path.pop()
        return None

    return extend("link")


def find_chordless_ae_path(
    g: RgbCograph, src: VertexId, dst: VertexId
) -> Optional[AePath]:
    if src == dst:
        return AePath((src,), ())
    web = g.web
    path = [src]
    on_path = {src}

    def extend(kind: str, kinds: tuple[str, ...]) -> Optional[AePath]:
        last = path[-1]
        nbrs = g.class_of[last] - {last} if kind == "link" else _rd_out(web, last)
        blocked = set(path[:-1])
        for y in sorted(nbrs):
            if y in on_path or (_rd_adj(web, y) & blocked):
                continue
            path.append(y)
            if y == dst:
                res: Optional[AePath] = AePath(tuple(path), kinds + (kind,))
            else:
                on_path.add(y)
                res = extend("rd" if kind == "link" else "link", kinds + (kind,))
                on_path.discard(y)
            path.pop()
            if res is not None:
                return res
        return None

    return extend("link", ()) or extend("rd", ())


def is_ae_connected(g: RgbCograph) -> Verdict:
    vs = g.web.vertices()
    for i, u in enumerate(vs):
        for v in vs[i + 1 :]:
            if (
                find_chordless_ae_path(g, u, v) is None
                and find_chordless_ae_path(g, v, u) is None
            ):
                return Verdict.failed("ae-connected", (u, v))
    return OK


# --- correctness -------------------------------------------------------------

_SYSTEMS = ("mll", "mllu", "mell")


def _vertex_restriction(g: RgbCograph, system: str) -> Verdict:
    for v in g.web.vertices():
        lab = g.label(v)
        if system == "mll" and not is_atomic_label(lab):
            return Verdict.failed("vertex-restriction", (v,))
        if system == "mllu" and not (
            is_atomic_label(lab) or lab in (L_ONE, L_JUMP)
        ):
            return Verdict.failed("vertex-restriction", (v,))
    return OK


def box_closure(g: RgbCograph) -> Verdict:
    """For every w D v with v linked to v', some w' linked to w has w' D v'."""
    web = g.web
    for w in web.vertices():
        for v in web.dout[w]:
            for v2 in g.class_of[v]:
                if not (g.class_of[w] & web.din[v2]):
                    return Verdict.failed("box-closure", (w, v, v2))
    return OK


def check_correct(g: RgbCograph, system: str = "mell", method: str = "auto") -> Verdict:
    """Non-empty, alternating-connected and -acyclic, box-closed, plus the
    per-system vertex restriction.

    method: "paths" searches chordless paths directly (witnesses, exponential
    worst case); "split" uses splitting-based sequentializability (polynomial);
    "auto" picks by size.
    """
    if system not in _SYSTEMS:
        raise ValueError(f"unknown system {system!r}")
    if not g.web.labels:
        return Verdict.failed("non-empty", ())
    v = validate_linking(g)
    if not v:
        return v
    v = _vertex_restriction(g, system)
    if not v:
        return v
    v = box_closure(g)
    if not v:
        return v
    if method == "auto":
        method = "paths" if len(g.web) <= 24 else "split"
    if method == "paths":
        cycle = find_chordless_ae_cycle(g)
        if cycle is not None:
            return Verdict.failed("ae-acyclic", tuple(cycle.vertices))
        return is_ae_connected(g)
    rb = g if not _modal_vertices(g.web) else rb_translate(g)
    return _rb_sequentializable(rb)


def _modal_vertices(web: MixedGraph) -> list[VertexId]:
    return [v for v in web.vertices() if is_modal_label(web.labels[v])]


# --- the modal-to-RB reduction ----------------------------------------------


def rb_translate(g: RgbCograph) -> RgbCograph:
    """Replace every modal vertex v by a linked dual atomic pair v.p / v.n.

    Positive copies keep the context position of their box; negative copies
    sit with the extracted box contents, tensored with everything dominated by
    the vertex's class.  Modal-free graphs are returned unchanged.
    """
    web = g.web
    modal = set(_modal_vertices(web))
    if not modal:
        return g
    keep = [v for v in web.vertices() if v not in modal]

    labels: dict[VertexId, str] = {v: web.labels[v] for v in keep}
    for v in modal:
        labels[v + ".p"] = "bx_" + v
        labels[v + ".n"] = "~bx_" + v

    def aux(x: VertexId, y: VertexId) -> bool:
        # R-edge not explained by a modal vertex covering the other endpoint
        if y not in web.radj[x]:
            return False
        for m in modal:
            if (m in web.radj[x] and y in web.dout[m]) or (
                m in web.radj[y] and x in web.dout[m]
            ):
                return False
        return True

    def class_dominates(v: VertexId, y: VertexId) -> bool:
        return any(is_modal_label(web.labels[u]) and y in web.dout[u] for u in g.class_of[v])

    r_edges: list[tuple[VertexId, VertexId]] = []
    for i, x in enumerate(keep):
        for y in keep[i + 1 :]:
            if aux(x, y):
                r_edges.append((x, y))
    for x in keep:
        for v in sorted(modal):
            if aux(x, v):
                r_edges.append((x, v + ".p"))
            if class_dominates(v, x):
                r_edges.append((x, v + ".n"))
    ms = sorted(modal)
    for i, v in enumerate(ms):
        for w in ms[i + 1 :]:
            if aux(v, w):
                r_edges.append((v + ".p", w + ".p"))
            if class_dominates(v, w):
                r_edges.append((v + ".n", w + ".p"))
                r_edges.append((v + ".n", w + ".n"))
            if class_dominates(w, v):
                r_edges.append((w + ".n", v + ".p"))
                r_edges.append((w + ".n", v + ".n"))
            if g.linked(v, w):
                r_edges.append((v + ".n", w + ".n"))

    classes: list[frozenset[VertexId]] = []
    for cls in g.classes:
        rest = cls - modal
        if rest:
            classes.append(rest)
    for v in ms:
        classes.append(frozenset({v + ".p", v + ".n"}))

    out = MixedGraph(labels, r_edges, (), close=False)
    return RgbCograph(out, classes)


# --- splittings ---------------------------------------------------------------


@dataclass(frozen=True)
class AxiomClass:
    members: frozenset


@dataclass(frozen=True)
class Split:
    left: frozenset
    right: frozenset


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


def _tens_split(
    g: RgbCograph, S: set[VertexId], children: list[set[VertexId]], others: list[set[VertexId]]
) -> Optional[tuple[set[VertexId], set[VertexId]]]:
    """Linking-closed bipartition separating the tensor children, if any."""
    units = children + others
    parent = list(range(len(units)))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def union(i: int, j: int) -> None:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[ri] = rj

    where: dict[VertexId, int] = {}
    for i, u in enumerate(units):
        for v in u:
            where[v] = i
    seen: set[int] = set()
    for v in S:
        cls = g.class_of[v]
        ids = {where[w] for w in cls if w in where}
        ids = sorted(ids)
        for j in ids[1:]:
            union(ids[0], j)
    child_groups = {find(i) for i in range(len(children))}
    if len(child_groups) < 2:
        return None
    g0 = find(0)
    left = set().union(*(units[i] for i in range(len(units)) if find(i) == g0))
    right = S - left
    return left, right


def _edge_free(web: MixedGraph, S: set[VertexId]) -> bool:
    return all(not (_rd_adj(web, v) & S) for v in S)


def find_splitting(g: RgbCograph):
    """AxiomClass when the graph is one edge-free linking class; otherwise a
    linking-closed tensor split, or None for incorrect graphs.

    Expects a graph without modal vertices whose root is not a par module.
    """
    S = set(g.web.labels)
    if not S:
        return None
    first = next(iter(S))
    if g.class_of[first] == frozenset(S):
        return AxiomClass(frozenset(S)) if _edge_free(g.web, S) else None
    units = _components(S, lambda v: S - g.web.radj[v] - {v})
    if len(units) < 2:
        return None
    res = _tens_split(g, S, units, [])
    if res is None:
        return None
    return Split(frozenset(res[0]), frozenset(res[1]))


def _rb_sequentializable(g: RgbCograph) -> Verdict:
    """Polynomial correctness for RB graphs: recursively strip pars, peel
    axiom classes, and follow linking-closed tensor splits."""
    web = g.web

    def check(S: set[VertexId]) -> Verdict:
        first = next(iter(S))
        if g.class_of[first] == frozenset(S) and _edge_free(web, S):
            return OK
        members = _components(S, lambda v: _rd_adj(web, v) & S)
        if len(members) == 1:
            children = _components(S, lambda v: S - web.radj[v] - {v})
            if len(children) < 2:
                return Verdict.failed("no-splitting", tuple(sorted(S)))
            candidates = [(children, [])]
        else:
            candidates = []
            for m in members:
                kids = _components(m, lambda v: m - web.radj[v] - {v})
                if len(kids) >= 2:
                    candidates.append((kids, [x for x in members if x is not m]))
            if not candidates:
                return Verdict.failed("no-splitting", tuple(sorted(S)))
        for children, others in candidates:
            res = _tens_split(g, S, children, others)
            if res is not None:
                left, right = res
                v = check(left)
                if v.ok:
                    v = check(right)
                return v
        return Verdict.failed("no-splitting", tuple(sorted(S)))

    if not web.labels:
        return Verdict.failed("non-empty", ())
    return check(set(web.labels))
