"""Vertex maps between modal relation webs: allegiant maps, linear
fibrations, ?-maps, and the two-stage decomposition.

A linear fibration captures deep weakening / bottom / ?-contraction steps; a
?-map captures dereliction and digging.  `decompose_fibration` factors a map
into a ?-map followed by a linear fibration by un-applying contractions and
weakenings on the target until the residue is either an isomorphism (pure
linear case) or a ?-map.  The six numbered conditions are checked literally
as stated; the extraction additionally pins down the copy structure that the
conditions alone do not see (contraction copies must be whole subtrees).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

from .relweb import (
    L_BANG,
    L_BOT,
    L_JUMP,
    L_WHY,
    GraphError,
    MixedGraph,
    OK,
    Verdict,
    VertexId,
    dual_atom_labels,
    is_atomic_label,
)
from .rgb import RgbCograph


class VertexMap:
    """Total function between the vertex sets of two mixed graphs."""

    def __init__(self, source: MixedGraph, target: MixedGraph, mapping: dict[VertexId, VertexId]):
        self.source = source
        self.target = target
        self.mapping = dict(mapping)
        missing = set(source.labels) - set(self.mapping)
        if missing:
            raise GraphError(f"map is not total: missing {sorted(missing)[:3]}")
        bad = [v for v, w in self.mapping.items() if w not in target.labels]
        if bad:
            raise GraphError(f"map hits unknown target ids: {sorted(bad)[:3]}")

    def __call__(self, v: VertexId) -> VertexId:
        return self.mapping[v]

    def image(self) -> set[VertexId]:
        return set(self.mapping.values())

    def fibers(self) -> dict[VertexId, list[VertexId]]:
        out: dict[VertexId, list[VertexId]] = {}
        for v in sorted(self.mapping):
            out.setdefault(self.mapping[v], []).append(v)
        return out

    def compose(self, outer: "VertexMap") -> "VertexMap":
        """outer after self (self: G->G', outer: G'->H)."""
        return VertexMap(
            self.source, outer.target, {v: outer.mapping[w] for v, w in self.mapping.items()}
        )


@dataclass
class FibrationDecomposition:
    gprime: MixedGraph
    wn_part: VertexMap
    linear_part: VertexMap


class FibrationError(GraphError):
    def __init__(self, condition: str, witness: tuple = ()):
        self.condition = condition
        self.witness = witness
        super().__init__(f"{condition}: {witness}")


# --- allegiance ---------------------------------------------------------------


def check_allegiant(g: RgbCograph, f: VertexMap) -> Verdict:
    """Linked atomic pairs land on dual atoms; non-jump labels preserved;
    jumps land on bottom or why-not."""
    web = g.web
    for cls in g.classes:
        atoms = sorted(v for v in cls if is_atomic_label(web.labels[v]))
        if len(atoms) == 2:
            la, lb = f.target.labels[f(atoms[0])], f.target.labels[f(atoms[1])]
            if not dual_atom_labels(la, lb):
                return Verdict.failed("allegiant-dual", (atoms[0], atoms[1]))
    for v in web.vertices():
        lab = web.labels[v]
        tlab = f.target.labels[f(v)]
        if lab == L_JUMP:
            if tlab not in (L_BOT, L_WHY):
                return Verdict.failed("allegiant-jump", (v,))
        elif lab == L_WHY:
            # a why-not may follow its jump-ended clone chain onto a bottom;
            # the fibration check enforces the chain itself
            if tlab not in (L_WHY, L_BOT):
                return Verdict.failed("allegiant-label", (v,))
        elif tlab != lab:
            return Verdict.failed("allegiant-label", (v,))
    return OK


# --- the six linear-fibration conditions --------------------------------------


def _preserves(f: VertexMap) -> Optional[Verdict]:
    src, tgt = f.source, f.target
    for v in src.vertices():
        fv = f(v)
        for w in src.radj[v]:
            if v < w and f(w) not in tgt.radj[fv]:
                return Verdict.failed("preserve-r", (v, w))
        for w in src.dout[v]:
            if f(w) not in tgt.dout[fv]:
                return Verdict.failed("preserve-d", (v, w))
    return None


def _skew_lifting(f: VertexMap) -> Optional[Verdict]:
    src, tgt = f.source, f.target
    fibers = f.fibers()

    def lifted(w: VertexId, candidates: set[VertexId]) -> bool:
        for u in fibers.get(w, ()):  # f(u) = w is never adjacent to w
            if u in candidates:
                return True
        for u in candidates:
            fu = f(u)
            if fu not in tgt.radj[w] and fu not in tgt.dout[w]:
                return True
        return False

    for v in src.vertices():
        fv = f(v)
        for w in tgt.radj[fv]:
            if not lifted(w, src.radj[v]):
                return Verdict.failed("lifting-r", (v, w))
        for w in tgt.din[fv]:
            if not lifted(w, src.din[v]):
                return Verdict.failed("lifting-d", (v, w))
    return None


def _modal_condition(f: VertexMap) -> Optional[Verdict]:
    # u and v R-unrelated with f(u) above f(v): some w rescues on either side
    src, tgt = f.source, f.target
    vs = src.vertices()
    for u in vs:
        fu = f(u)
        below = tgt.dout[fu]
        if not below:
            continue
        for v in vs:
            if u == v or v in src.radj[u] or f(v) not in below:
                continue
            fv = f(v)
            ok = any(f(w) == fu for w in src.din[v]) or any(
                f(w) == fv for w in src.dout[u]
            )
            if not ok:
                return Verdict.failed("modal-condition", (u, v))
    return None


def _label_condition(f: VertexMap) -> Optional[Verdict]:
    for v in f.source.vertices():
        lab = f.source.labels[v]
        tlab = f.target.labels[f(v)]
        if lab == L_JUMP:
            if tlab not in (L_JUMP, L_BOT, L_WHY):
                return Verdict.failed("label-jump", (v,))
        elif tlab != lab:
            return Verdict.failed("label-preserve", (v,))
    return None


def _jump_domination(f: VertexMap) -> Optional[Verdict]:
    src, tgt = f.source, f.target
    image = f.image()
    jumps = [u for u in src.vertices() if src.labels[u] == L_JUMP]
    for w in tgt.vertices():
        if w in image:
            continue
        if not any(_dominates_region(f, u, w) for u in jumps):
            return Verdict.failed("jump-domination", (w,))
    return None


def _dominates_region(f: VertexMap, u: VertexId, w: VertexId) -> bool:
    tgt = f.target
    fu = f(u)
    if tgt.labels[fu] != L_WHY or w not in tgt.dout[fu]:
        return False
    for v in f.source.vertices():
        fv = f(v)
        if fv == fu or fv == w:
            continue
        if (fv in tgt.radj[fu]) != (fv in tgt.radj[w]):
            return False
        if (fu in tgt.dout[fv]) != (w in tgt.dout[fv]):
            return False
    return True


def _why_domination(f: VertexMap) -> Optional[Verdict]:
    src, tgt = f.source, f.target
    for fiber in f.fibers().values():
        if len(fiber) < 2:
            continue
        w = f(fiber[0])
        for i, v1 in enumerate(fiber):
            for v2 in fiber[i + 1 :]:
                if tgt.labels[w] == L_WHY:
                    continue  # the merged vertices themselves map to a why-not
                found = False
                for w1 in sorted(src.din[v1]):
                    for w2 in src.din[v2]:
                        if (
                            w1 != w2
                            and f(w1) == f(w2)
                            and tgt.labels[f(w1)] == L_WHY
                        ):
                            found = True
                            break
                    if found:
                        break
                if not found:
                    return Verdict.failed("why-domination", (v1, v2))
    return None


def check_linear_fibration(f: VertexMap) -> Verdict:
    """The six conditions (preservation, skew lifting, modal, labels,
    jump-domination, why-domination) plus whole-subtree copy structure."""
    for checker in (
        _preserves,
        _skew_lifting,
        _modal_condition,
        _label_condition,
        _jump_domination,
        _why_domination,
    ):
        bad = checker(f)
        if bad is not None:
            return bad
    try:
        _extract(f, allow_wn=False)
    except FibrationError as exc:
        return Verdict.failed(exc.condition, exc.witness)
    return OK


# --- ?-maps -------------------------------------------------------------------


def _clones(g: MixedGraph, v: VertexId, w: VertexId, exempt: frozenset = frozenset()) -> bool:
    """Clones up to `exempt`: merged chain members do not witness differences."""
    for u in g.labels:
        if u in (v, w) or u in exempt:
            continue
        if (u in g.radj[v]) != (u in g.radj[w]):
            return False
        if (u in g.dout[v]) != (u in g.dout[w]):
            return False
        if (v in g.dout[u]) != (w in g.dout[u]):
            return False
    return True


def check_wn_map(f: VertexMap) -> Verdict:
    """Merged vertices are D-related clones with why-not/jump label; distinct
    images preserve all four relations; non-image targets are dominating
    why-nots."""
    src, tgt = f.source, f.target
    fibers = f.fibers()
    for fiber in fibers.values():
        if len(fiber) < 2:
            continue
        exempt = frozenset(fiber)
        chain = sorted(fiber, key=lambda v: len(src.dout[v] & exempt), reverse=True)
        for a, b in zip(chain, chain[1:]):
            if b not in src.dout[a]:
                return Verdict.failed("wn-d-related", (a, b))
            if not _clones(src, a, b, exempt):
                return Verdict.failed("wn-clones", (a, b))
        # everything above the chain's bottom is a why-not; the image carries
        # the bottom's label
        for v in chain[:-1]:
            if src.labels[v] != L_WHY:
                return Verdict.failed("wn-label", (v, chain[-1]))
        bottom = chain[-1]
        if src.labels[bottom] not in (L_WHY, L_JUMP) or tgt.labels[
            f(bottom)
        ] != src.labels[bottom]:
            return Verdict.failed("wn-label", (bottom,))
    for v in src.vertices():  # unmerged vertices keep their labels
        fv = f(v)
        if len(fibers[fv]) == 1 and tgt.labels[fv] != src.labels[v]:
            return Verdict.failed("wn-label", (v,))
    bad = _reflects(f.mapping, src, tgt, fibers)
    if bad is not None:
        return Verdict.failed("wn-reflect-" + bad[0], bad[1])
    image = f.image()
    for w in tgt.vertices():
        if w not in image:
            if tgt.labels[w] != L_WHY or not tgt.dout[w]:
                return Verdict.failed("wn-nonimage", (w,))
    return OK


def _reflects(mapping, src: MixedGraph, tgt, fibers) -> Optional[tuple[str, tuple]]:
    """Edges preserved both ways on distinct-image pairs, by edge scan.

    `tgt` needs radj/dout dicts only, so a _Work also qualifies.
    """
    for v in src.vertices():
        fv = mapping[v]
        for w in src.radj[v]:
            if v < w and mapping[w] != fv and mapping[w] not in tgt.radj[fv]:
                return ("r", (v, w))
        for w in src.dout[v]:
            if mapping[w] != fv and mapping[w] not in tgt.dout[fv]:
                return ("d", (v, w))
    for x in sorted(tgt.radj):
        for y in tgt.radj[x]:
            if x < y:
                for v in fibers.get(x, ()):
                    for w in fibers.get(y, ()):
                        if w not in src.radj[v]:
                            return ("r", (v, w))
    for x in sorted(tgt.dout):
        for y in tgt.dout[x]:
            for v in fibers.get(x, ()):
                for w in fibers.get(y, ()):
                    if w not in src.dout[v]:
                        return ("d", (v, w))
    return None


# --- extraction ---------------------------------------------------------------
#
# Working state for un-applying contraction/weakening/bottom steps on the
# target.  `origin` sends every working vertex to the target vertex it copies;
# `mu` is the evolving map from the source into the working graph.


@dataclass
class ExtractStep:
    kind: str  # "contr" | "weak" | "bot"
    vertex: VertexId  # working-graph vertex the step acts at
    copies: tuple[tuple[VertexId, VertexId], ...] = ()  # contr: (original, fresh)


class _Work:
    def __init__(self, f: VertexMap):
        tgt = f.target
        self.labels = dict(tgt.labels)
        self.radj = {v: set(s) for v, s in tgt.radj.items()}
        self.dout = {v: set(s) for v, s in tgt.dout.items()}
        self.din = {v: set(s) for v, s in tgt.din.items()}
        self.origin = {v: v for v in tgt.labels}
        self.mu = dict(f.mapping)
        self.steps: list[ExtractStep] = []
        self._fresh = 0

    def graph(self) -> MixedGraph:
        g = MixedGraph(self.labels, close=False)
        g.radj = {v: set(s) for v, s in self.radj.items()}
        g.dout = {v: set(s) for v, s in self.dout.items()}
        g.din = {v: set(s) for v, s in self.din.items()}
        return g

    def subtree(self, t: VertexId) -> set[VertexId]:
        return {t} | self.dout[t]

    def fibers(self) -> dict[VertexId, list[VertexId]]:
        out: dict[VertexId, list[VertexId]] = {}
        for v in sorted(self.mu):
            out.setdefault(self.mu[v], []).append(v)
        return out

    def delete(self, vs: Iterable[VertexId]) -> None:
        for v in vs:
            for u in self.radj.pop(v):
                self.radj[u].discard(v)
            for u in self.dout.pop(v):
                self.din[u].discard(v)
            for u in self.din.pop(v):
                self.dout[u].discard(v)
            del self.labels[v]
            del self.origin[v]

    def copy_subtree(self, t: VertexId) -> dict[VertexId, VertexId]:
        """Duplicate the module {t} + scope(t) as a parallel sibling."""
        self._fresh += 1
        suffix = f".k{self._fresh}"
        module = self.subtree(t)
        fresh = {v: v + suffix for v in module}
        for v, v2 in fresh.items():
            self.labels[v2] = self.labels[v]
            self.origin[v2] = self.origin[v]
            self.radj[v2] = set()
            self.dout[v2] = set()
            self.din[v2] = set()
        for v, v2 in fresh.items():
            for u in self.radj[v]:
                u2 = fresh.get(u, u)
                self.radj[v2].add(u2)
                self.radj[u2].add(v2)
            for u in self.dout[v]:
                u2 = fresh.get(u, u)
                self.dout[v2].add(u2)
                self.din[u2].add(v2)
            for u in self.din[v]:
                if u not in module:  # outside dominators cover the copy too
                    self.dout[u].add(v2)
                    self.din[v2].add(u)
        # no edges between copy and original: the copies sit in parallel
        for v, v2 in fresh.items():
            for u in module:
                self.radj[v2].discard(u)
                self.radj[u].discard(v2)
        return fresh


def _branch_components(f_src: MixedGraph, material: list[VertexId]) -> list[list[VertexId]]:
    left = set(material)
    comps = []
    while left:
        seed = min(left)
        comp = {seed}
        left.discard(seed)
        frontier = [seed]
        while frontier:
            v = frontier.pop()
            nbrs = (f_src.radj[v] | f_src.dout[v] | f_src.din[v]) & left
            left -= nbrs
            comp |= nbrs
            frontier.extend(nbrs)
        comps.append(sorted(comp))
    return comps


def _extract(f: VertexMap, allow_wn: bool) -> tuple[_Work, Optional[Verdict]]:
    """Un-apply contractions, weakenings and bottoms on the target.

    With allow_wn the residue may still merge D-clone chains and leave
    dominating why-nots non-image (the ?-map part); without it the residue
    must be an isomorphism.
    """
    src = f.source
    work = _Work(f)

    # contraction phase: split every why-not whose pre-image material falls
    # into several branches, outermost first
    while True:
        t = _find_split_target(src, work)
        if t is None:
            break
        _split(src, work, t)

    # weakening / bottom phase
    for o in sorted(work.mu):
        if src.labels[o] != L_JUMP:
            continue
        t = work.mu[o]
        lab = work.labels[t]
        if lab == L_BOT:
            work.labels[t] = L_JUMP
            work.steps.append(ExtractStep("bot", t))
        elif lab == L_WHY:
            region = work.subtree(t) - {t}
            touched = set(work.mu.values()) & region
            if touched:
                raise FibrationError("weakened-region-not-free", (t, sorted(touched)[0]))
            work.delete(region)
            work.labels[t] = L_JUMP
            work.steps.append(ExtractStep("weak", t))
        elif lab != L_JUMP:
            raise FibrationError("label-jump", (o,))

    # residue validation
    fibers = work.fibers()
    for t, fiber in fibers.items():
        if len(fiber) < 2:
            continue
        if not allow_wn:
            raise FibrationError("contraction-structure", tuple(fiber[:2]))
        exempt = frozenset(fiber)
        chain = sorted(fiber, key=lambda v: len(src.dout[v] & exempt), reverse=True)
        for i in range(len(chain) - 1):
            a, b = chain[i], chain[i + 1]
            if b not in src.dout[a] or not _clones(src, a, b, exempt):
                raise FibrationError("wn-clones", (a, b))
    image = set(work.mu.values())
    for w in sorted(work.labels):
        if w not in image:
            if not allow_wn:
                raise FibrationError("contraction-structure", (w,))
            if work.labels[w] != L_WHY or not work.dout[w]:
                raise FibrationError("wn-nonimage", (w,))
    # label and edge faithfulness of the residue on distinct images
    for v in src.vertices():
        lab = src.labels[v]
        tlab = work.labels[work.mu[v]]
        if lab != tlab and not (lab == L_WHY and len(fibers[work.mu[v]]) > 1):
            raise FibrationError("residue-label", (v,))
    bad = _reflects(work.mu, src, work, fibers)
    if bad is not None:
        raise FibrationError("residue-" + bad[0], bad[1])
    return work, None


def _group_by_footprint(comps, footprint_of, compatible=None) -> list[list]:
    """Merge components while their footprints stay disjoint and their image
    positions are mutually unrelated.

    Components holding a whole-copy marker ("*") never merge.  Components
    whose footprint is a single inner-branch tag are distributed round-robin
    over the branches formed by everything else, so no copy is starved of the
    inner material it must cover.  `compatible(branch_vertices, comp)` vetoes
    merges whose image positions are R/D-related: such material would need
    source edges the separate components lack."""
    if compatible is None:
        compatible = lambda vs, comp: True
    anchored, floating = [], []
    for comp in comps:
        images = footprint_of(comp)
        comp = comp[0] if isinstance(comp, tuple) else comp
        if "*" not in images and all(
            isinstance(i, tuple) and i and i[0] == "branch" for i in images
        ) and len({i[1] for i in images}) == 1 and len(images) == 1:
            floating.append((sorted(comp)[0], comp, images))
        else:
            anchored.append((comp, images))

    branches: list[tuple[set, set]] = []

    def try_merge(comp, images) -> bool:
        for vs, imgs in branches:
            if (
                "*" not in imgs
                and "*" not in images
                and not (imgs & images)
                and compatible(vs, comp)
            ):
                vs.update(comp)
                imgs.update(images)
                return True
        return False

    for comp, images in anchored:
        if not try_merge(comp, images):
            branches.append((set(comp), set(images)))
    if not branches and floating:
        branches.append((set(), set()))
    slots = [i for i, (_, imgs) in enumerate(branches) if "*" not in imgs]
    if not slots and floating:
        branches.append((set(), set()))
        slots = [len(branches) - 1]
    for n, (_, comp, images) in enumerate(sorted(floating)):
        # floats are never vetoed: a deeper split inside the receiving copy
        # resolves any image relation they carry
        for probe in range(len(slots)):
            vs, imgs = branches[slots[(n + probe) % len(slots)]]
            if not (imgs & images):
                vs.update(comp)
                imgs.update(images)
                break
        else:
            branches.append((set(comp), set(images)))
    return [sorted(vs) for vs, _ in branches if vs]


def _branch_structure(src: MixedGraph, work: _Work) -> dict[VertexId, list[list[VertexId]]]:
    """Contraction branches of every why-not target, deepest first.

    Material mapping under a deeper multi-branch why-not is footprinted by
    that target's branch index, so an inner contraction below a single
    dereliction does not force an outer split."""
    whys = [t for t in work.labels if work.labels[t] == L_WHY]
    whys.sort(key=lambda t: (len(work.subtree(t)), t))
    out: dict[VertexId, list[list[VertexId]]] = {}
    assign: dict[VertexId, dict[VertexId, int]] = {}
    for t in whys:
        sub = work.subtree(t)
        material = [v for v in sorted(work.mu) if work.mu[v] in sub]
        if not material:
            continue
        inner = [
            t2
            for t2 in out
            if t2 != t and t2 in sub and len(out[t2]) >= 2
        ]
        inner.sort(key=lambda t2: len(work.subtree(t2)))

        def tag(v, t=t, inner=inner):
            a = work.mu[v]
            if a == t:
                return "*"
            for t2 in inner:  # deepest first
                if a in work.subtree(t2):
                    return ("branch", t2, assign[t2][v])
            return a

        def compatible(branch_vs, comp_vs):
            for x in branch_vs:
                ax = work.mu[x]
                for y in comp_vs:
                    ay = work.mu[y]
                    if ax == ay:
                        continue
                    if ay in work.radj[ax] or ay in work.dout[ax] or ax in work.dout[ay]:
                        return False
            return True

        comps = _branch_components(src, material)
        units = _coalesce_by_tag(comps, tag)
        branches = _group_by_footprint(units, lambda u: u[1], compatible)
        out[t] = branches
        assign[t] = {v: i for i, br in enumerate(branches) for v in br}
    return out


def _coalesce_by_tag(comps, tag):
    """Components sharing an inner-branch tag belong to the same copy and
    merge into one unit: (vertices, footprint) pairs."""
    units: list[tuple[set, set]] = []
    for comp in comps:
        tags = {tag(v) for v in comp}
        if "*" in tags:
            tags = {"*"}
        shared = [
            u
            for u in units
            if any(isinstance(x, tuple) and x in u[1] for x in tags)
        ]
        vs, fp = set(comp), set(tags)
        for u in shared:
            vs |= u[0]
            fp |= u[1]
            units.remove(u)
        units.append((vs, fp))
    return [(sorted(vs), fp) for vs, fp in units]


def _find_split_target(src: MixedGraph, work: _Work) -> Optional[VertexId]:
    """Outermost why-not target whose pre-image material forms >= 2 branches."""
    structure = _branch_structure(src, work)
    candidates = [t for t, branches in structure.items() if len(branches) >= 2]
    for t in sorted(candidates):
        if not any(t in work.dout[t2] for t2 in candidates if t2 != t):
            return t
    return None


def _split(src: MixedGraph, work: _Work, t: VertexId) -> None:
    branches = _branch_structure(src, work)[t]
    # first branch keeps the original subtree; the rest get fresh copies
    for branch in branches[1:]:
        fresh = work.copy_subtree(t)
        for v in branch:
            work.mu[v] = fresh.get(work.mu[v], work.mu[v])
        work.steps.append(
            ExtractStep("contr", t, tuple(sorted(fresh.items())))
        )


# --- decomposition and the combined check --------------------------------------


def decompose_fibration(f: VertexMap) -> FibrationDecomposition:
    """Factor f as a ?-map into an intermediate graph followed by a linear
    fibration; raises FibrationError when no factorization exists."""
    work, _ = _extract(f, allow_wn=True)
    gprime = work.graph()
    wn_part = VertexMap(f.source, gprime, dict(work.mu))
    linear_part = VertexMap(gprime, f.target, dict(work.origin))
    for v in f.source.vertices():
        if linear_part(wn_part(v)) != f(v):
            raise FibrationError("decomposition-mismatch", (v,))
    return FibrationDecomposition(gprime, wn_part, linear_part)


def check_mell_fibration(f: VertexMap, system: str = "mell") -> Verdict:
    """MELL: f factors as ?-map then linear fibration; MLLu additionally bars
    modal targets; MLL wants a bijection and no jump/modal targets."""
    if system == "mll":
        if len(set(f.mapping.values())) != len(f.mapping) or len(f.mapping) != len(
            f.target.labels
        ):
            return Verdict.failed("mll-bijection", ())
        for w in f.target.vertices():
            if f.target.labels[w] in (L_JUMP, L_BANG, L_WHY):
                return Verdict.failed("mll-target", (w,))
    if system == "mllu":
        for w in f.target.vertices():
            if f.target.labels[w] in (L_BANG, L_WHY):
                return Verdict.failed("mllu-target", (w,))
    try:
        dec = decompose_fibration(f)
    except FibrationError as exc:
        return Verdict.failed(exc.condition, exc.witness)
    v = check_wn_map(dec.wn_part)
    if not v:
        return v
    return check_linear_fibration(dec.linear_part)
