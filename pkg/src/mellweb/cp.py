"""Combinatorial proofs: rule-checked derivations, their translation into
linked graphs over the conclusion's web, proof equality, and
sequentialization back to a derivation.

A derivation node carries its conclusion sequent explicitly; rule parameters
name the occurrence positions a rule touches, so no multiset guessing is ever
needed.  Translation builds the source graph bottom-up: the linear rules grow
the graph, the resource rules only rewrite the vertex-to-address map.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .fibration import (
    FibrationError,
    VertexMap,
    _extract,
    check_allegiant,
    check_mell_fibration,
)
from .formula import (
    Atom,
    Bot,
    Formula,
    FormulaError,
    Jump,
    JUMP,
    NegAtom,
    OfCourse,
    One,
    Par,
    Path,
    Sequent,
    TargetAddress,
    Tens,
    WhyNot,
    negate,
    parse_address,
    render_sequent,
    replace_at,
    subformula_at,
)
from .relweb import (
    L_BANG,
    L_WHY,
    MixedGraph,
    Verdict,
    VertexId,
    label_of_formula,
    recognize_modal,
    recognize_web,
    web_of_sequent,
)
from .rgb import RgbCograph, check_correct, validate_linking

LINEAR_RULES = ("ax_j", "one_j", "par", "tens", "wprom")
SHALLOW_RULES = ("der", "dig", "dig_j", "bot_j", "w_j", "contr")
DEEP_RULES = ("deep_der", "deep_dig", "deep_dig_j", "deep_bot", "deep_w", "deep_contr")
ALL_RULES = LINEAR_RULES + SHALLOW_RULES + DEEP_RULES + ("eq", "cut")


class DerivationError(ValueError):
    def __init__(self, message: str, node: tuple[int, ...] = ()):
        self.node = node
        super().__init__(f"{message} (at node {'.'.join(map(str, node)) or 'root'})")


@dataclass
class Derivation:
    rule: str
    conclusion: Sequent
    params: dict = field(default_factory=dict)
    premises: tuple["Derivation", ...] = ()

    def __repr__(self) -> str:
        return f"Derivation({self.rule}, {render_sequent(self.conclusion)!r})"

    def size(self) -> int:
        return 1 + sum(p.size() for p in self.premises)


def _addr_param(params: dict) -> TargetAddress:
    raw = params["addr"]
    return raw if isinstance(raw, TargetAddress) else parse_address(str(raw))


def _leaf_multiset(s: Sequent):
    atoms = [f for f in s if isinstance(f, (Atom, NegAtom))]
    ones = [f for f in s if isinstance(f, One)]
    jumps = [f for f in s if isinstance(f, Jump)]
    return atoms, ones, jumps, len(atoms) + len(ones) + len(jumps) == len(s)


def premises_of(rule: str, params: dict, conclusion: Sequent, allow_cut: bool = False):
    """The premise sequents a rule instance demands, or raise DerivationError."""
    n = len(conclusion)

    def idx() -> int:
        k = params["index"]
        if not 0 <= k < n:
            raise DerivationError(f"index {k} out of range")
        return k

    if rule == "ax_j":
        atoms, ones, jumps, flat = _leaf_multiset(conclusion)
        if not flat or ones or len(atoms) != 2:
            raise DerivationError("ax_j concludes an atom, its dual, and jumps")
        a, b = atoms
        if {type(a), type(b)} != {Atom, NegAtom} or a.name != b.name:
            raise DerivationError("ax_j atoms must be dual")
        return ()
    if rule == "one_j":
        atoms, ones, jumps, flat = _leaf_multiset(conclusion)
        if not flat or atoms or len(ones) != 1:
            raise DerivationError("one_j concludes a one and jumps")
        return ()
    if rule == "par":
        k = idx()
        f = conclusion[k]
        if not isinstance(f, Par):
            raise DerivationError("par principal is not a par")
        return (conclusion.replace(k, f.left, f.right),)
    if rule == "tens" or (rule == "cut" and allow_cut):
        left = list(params["left"])
        right = list(params["right"])
        if rule == "tens":
            k = idx()
            f = conclusion[k]
            if not isinstance(f, Tens):
                raise DerivationError("tens principal is not a tensor")
            a, b = f.left, f.right
            used = sorted(left + right + [k])
        else:
            a = params["formula"]
            a = a if not isinstance(a, str) else _parse_formula_cached(a)
            try:
                b = negate(a)
            except FormulaError as exc:
                raise DerivationError(str(exc)) from exc
            used = sorted(left + right)
        if used != list(range(n)):
            raise DerivationError("left/right do not partition the context")
        pos1 = params.get("pos1", len(left))
        pos2 = params.get("pos2", 0)
        m1 = [conclusion[i] for i in left]
        m2 = [conclusion[i] for i in right]
        if not (0 <= pos1 <= len(m1) and 0 <= pos2 <= len(m2)):
            raise DerivationError("active position out of range")
        m1.insert(pos1, a)
        m2.insert(pos2, b)
        return (Sequent(tuple(m1)), Sequent(tuple(m2)))
    if rule == "cut":
        raise DerivationError("cut is not allowed here")
    if rule == "wprom":
        k = idx()
        if not isinstance(conclusion[k], OfCourse):
            raise DerivationError("wprom principal is not a bang")
        children = []
        for i, f in enumerate(conclusion):
            if i != k and not isinstance(f, WhyNot):
                raise DerivationError("wprom context must be why-nots")
            children.append(f.child)
        return (Sequent(tuple(children)),)

    shallow = {
        "der": ("whynot", lambda f: f.child),
        "dig": ("whynot", lambda f: WhyNot(f)),
        "dig_j": ("jump", lambda f: WhyNot(JUMP)),
        "bot_j": ("bot", lambda f: JUMP),
        "w_j": ("whynot", lambda f: JUMP),
    }
    if rule in shallow:
        k = idx()
        f = conclusion[k]
        kind, make = shallow[rule]
        if kind == "whynot" and not isinstance(f, WhyNot):
            raise DerivationError(f"{rule} principal is not a why-not")
        if kind == "jump" and not isinstance(f, Jump):
            raise DerivationError(f"{rule} principal is not a jump")
        if kind == "bot" and not isinstance(f, Bot):
            raise DerivationError(f"{rule} principal is not a bottom")
        return (conclusion.replace(k, make(f)),)
    if rule == "contr":
        k = idx()
        f = conclusion[k]
        if not isinstance(f, WhyNot):
            raise DerivationError("contr principal is not a why-not")
        return (conclusion.replace(k, f, f),)

    if rule in DEEP_RULES:
        addr = _addr_param(params)
        k, path = addr.index, addr.path
        if not 0 <= k < n:
            raise DerivationError(f"address {addr} out of range")
        try:
            f = subformula_at(conclusion, k, path)
        except FormulaError as exc:
            raise DerivationError(str(exc)) from exc
        if rule == "deep_der":
            if not isinstance(f, WhyNot):
                raise DerivationError("deep_der target is not a why-not")
            repl: Formula = f.child
        elif rule == "deep_dig":
            if not isinstance(f, WhyNot):
                raise DerivationError("deep_dig target is not a why-not")
            repl = WhyNot(f)
        elif rule == "deep_dig_j":
            if not isinstance(f, Jump):
                raise DerivationError("deep_dig_j target is not a jump")
            repl = WhyNot(JUMP)
        elif rule == "deep_bot":
            if not isinstance(f, Bot):
                raise DerivationError("deep_bot target is not a bottom")
            repl = JUMP
        elif rule == "deep_w":
            if not isinstance(f, WhyNot):
                raise DerivationError("deep_w target is not a why-not")
            repl = JUMP
        else:  # deep_contr
            if not isinstance(f, WhyNot):
                raise DerivationError("deep_contr target is not a why-not")
            repl = Par(f, f)
        return (replace_at(conclusion, k, path, repl),)

    if rule == "eq":
        k = idx()
        prem = params["premise"]
        prem = prem if not isinstance(prem, str) else _parse_formula_cached(prem)
        if _ac_key(prem) != _ac_key(conclusion[k]):
            raise DerivationError("eq premise is not AC-equivalent")
        return (conclusion.replace(k, prem),)

    raise DerivationError(f"unknown rule {rule!r}")


def _parse_formula_cached(text: str) -> Formula:
    from .formula import parse_formula

    return parse_formula(text)


def check_derivation(d: Derivation, allow_cut: bool = False, node: tuple = ()) -> None:
    try:
        expected = premises_of(d.rule, d.params, d.conclusion, allow_cut)
    except DerivationError as exc:
        raise DerivationError(str(exc).rsplit(" (at node", 1)[0], node) from None
    except KeyError as exc:
        raise DerivationError(f"missing rule parameter {exc}", node) from None
    if len(expected) != len(d.premises):
        raise DerivationError(
            f"{d.rule} wants {len(expected)} premise(s), got {len(d.premises)}", node
        )
    for i, (want, got) in enumerate(zip(expected, d.premises)):
        if want.formulas != got.conclusion.formulas:
            raise DerivationError(
                f"premise {i} of {d.rule} should conclude "
                f"{render_sequent(want)!r}, concludes {render_sequent(got.conclusion)!r}",
                node,
            )
        check_derivation(got, allow_cut, node + (i,))


# --- AC canonical keys and alignment ------------------------------------------


def _ac_key(f: Formula):
    if isinstance(f, (Par, Tens)):
        tag = "p" if isinstance(f, Par) else "t"
        return (tag, tuple(sorted(_ac_key(c) for c, _ in _flatten(f))))
    if isinstance(f, (OfCourse, WhyNot)):
        return ("m", label_of_formula(f), _ac_key(f.child))
    return ("v", label_of_formula(f))


def _flatten(f: Formula, prefix: Path = ()):
    cls = type(f)
    out: list[tuple[Formula, Path]] = []

    def go(g: Formula, p: Path) -> None:
        if isinstance(g, cls):
            go(g.left, p + (0,))
            go(g.right, p + (1,))
        else:
            out.append((g, p))

    go(f, prefix)
    return out


def _ac_align(src: Formula, dst: Formula, p_src: Path = (), p_dst: Path = ()) -> dict:
    """Map vertex-bearing paths of `src` onto `dst` (AC-equivalent trees)."""
    out: dict[Path, Path] = {}
    if isinstance(src, (OfCourse, WhyNot)):
        if type(dst) is not type(src):
            raise DerivationError("eq alignment shape mismatch")
        out[p_src] = p_dst
        out.update(_ac_align(src.child, dst.child, p_src + (0,), p_dst + (0,)))
        return out
    if isinstance(src, (Par, Tens)):
        if type(dst) is not type(src):
            raise DerivationError("eq alignment shape mismatch")
        ls = sorted(_flatten(src, p_src), key=lambda cp: _ac_key(cp[0]))
        ld = sorted(_flatten(dst, p_dst), key=lambda cp: _ac_key(cp[0]))
        if len(ls) != len(ld):
            raise DerivationError("eq alignment shape mismatch")
        for (cs, ps), (cd, pd) in zip(ls, ld):
            if _ac_key(cs) != _ac_key(cd):
                raise DerivationError("eq alignment shape mismatch")
            out.update(_ac_align(cs, cd, ps, pd))
        return out
    if label_of_formula(src) != label_of_formula(dst):
        raise DerivationError("eq alignment shape mismatch")
    out[p_src] = p_dst
    return out


# --- translation ---------------------------------------------------------------


class _Builder:
    """Mutable graph/linking/map over the augmented sequent (user members
    followed by the synthetic cut members)."""

    def __init__(self):
        self.labels: dict[VertexId, str] = {}
        self.radj: dict[VertexId, set[VertexId]] = {}
        self.dout: dict[VertexId, set[VertexId]] = {}
        self.din: dict[VertexId, set[VertexId]] = {}
        self.classes: list[set[VertexId]] = []
        self.mu: dict[VertexId, TargetAddress] = {}
        self.aug: list[Formula] = []
        self.n_user: int = 0

    def add_vertex(self, vid: VertexId, label: str, addr: TargetAddress) -> None:
        self.labels[vid] = label
        self.radj[vid] = set()
        self.dout[vid] = set()
        self.din[vid] = set()
        self.mu[vid] = addr

    def remap(self, fn) -> None:
        self.mu = {v: fn(a) for v, a in self.mu.items()}

    def members(self, index: int) -> list[VertexId]:
        return [v for v, a in self.mu.items() if a.index == index]

    def merge(self, other: "_Builder") -> None:
        self.labels.update(other.labels)
        self.radj.update(other.radj)
        self.dout.update(other.dout)
        self.din.update(other.din)
        self.classes.extend(other.classes)
        self.mu.update(other.mu)

    def graph(self) -> MixedGraph:
        g = MixedGraph(self.labels, close=False)
        g.radj = {v: set(s) for v, s in self.radj.items()}
        g.dout = {v: set(s) for v, s in self.dout.items()}
        g.din = {v: set(s) for v, s in self.din.items()}
        return g


@dataclass
class CombinatorialProof:
    source: RgbCograph
    target: Sequent
    mapping: dict[VertexId, TargetAddress]

    def target_web(self) -> MixedGraph:
        return web_of_sequent(self.target)

    def vertex_map(self) -> VertexMap:
        return VertexMap(
            self.source.web,
            self.target_web(),
            {v: str(a) for v, a in self.mapping.items()},
        )

    def __repr__(self) -> str:
        return f"CombinatorialProof({render_sequent(self.target)!r}, {self.source!r})"


def check_cp(p: CombinatorialProof, system: str = "mell", method: str = "auto") -> Verdict:
    """All component checks: webs, linking, correctness, allegiance, fibration."""
    v = recognize_web(p.source.web)
    if not v:
        return Verdict.failed("source-web-" + v.condition, v.witness)
    v = recognize_modal(p.source.web)
    if not v:
        return Verdict.failed("source-web-" + v.condition, v.witness)
    v = validate_linking(p.source)
    if not v:
        return v
    v = check_correct(p.source, system, method)
    if not v:
        return v
    try:
        vm = p.vertex_map()
    except Exception as exc:
        return Verdict.failed("map-malformed", (str(exc),))
    v = check_allegiant(p.source, vm)
    if not v:
        return v
    return check_mell_fibration(vm, system)


def translate_derivation(d: Derivation, validate: bool = True) -> CombinatorialProof:
    """Cut-free translation; raises DerivationError on rule violations."""
    check_derivation(d, allow_cut=False)
    b = _translate(d, _Counter())
    return _finish(b, d, validate, system_guess(d))


def system_guess(d: Derivation) -> str:
    """Smallest system whose rules and vocabulary cover the derivation."""
    rules = set()

    def go(n: Derivation) -> None:
        rules.add(n.rule)
        for p in n.premises:
            go(p)

    go(d)
    if rules & set(SHALLOW_RULES + DEEP_RULES + ("wprom", "eq", "cut")):
        return "mell"
    consts = any(
        isinstance(sf, (One, Bot, Jump))
        for f in d.conclusion
        for sf, _ in _flatten_all(f)
    )
    return "mllu" if ("one_j" in rules or consts) else "mll"


def _flatten_all(f: Formula):
    stack = [(f, ())]
    while stack:
        g, p = stack.pop()
        yield g, p
        if isinstance(g, (Par, Tens)):
            stack.append((g.left, p + (0,)))
            stack.append((g.right, p + (1,)))
        elif isinstance(g, (OfCourse, WhyNot)):
            stack.append((g.child, p + (0,)))


class _Counter:
    def __init__(self):
        self.n = 0

    def next(self) -> str:
        self.n += 1
        return f"n{self.n}"


def _finish(
    b: _Builder, d: Derivation, validate: bool, system: str
) -> CombinatorialProof:
    target = Sequent(tuple(b.aug))
    cp = CombinatorialProof(RgbCograph(b.graph(), b.classes), target, dict(b.mu))
    if validate:
        v = check_cp(cp, system)
        if not v:
            raise DerivationError(
                f"translated proof failed validation: {v.condition} at {v.witness}"
            )
    return cp


def _translate(d: Derivation, counter: _Counter) -> _Builder:
    rule = d.rule
    nid = counter.next()
    conclusion = d.conclusion
    n = len(conclusion)

    if rule in ("ax_j", "one_j"):
        b = _Builder()
        b.aug = list(conclusion.formulas)
        b.n_user = n
        cls = set()
        for i, f in enumerate(conclusion):
            vid = f"{nid}.{i}"
            b.add_vertex(vid, label_of_formula(f), TargetAddress(i))
            cls.add(vid)
        b.classes.append(cls)
        return b

    if rule in ("tens", "cut"):
        b1 = _translate(d.premises[0], counter)
        b2 = _translate(d.premises[1], counter)
        left = list(d.params["left"])
        right = list(d.params["right"])
        pos1 = d.params.get("pos1", len(left))
        pos2 = d.params.get("pos2", 0)
        n1u, n2u = b1.n_user, b2.n_user
        c1 = len(b1.aug) - n1u
        c2 = len(b2.aug) - n2u
        if rule == "tens":
            k = d.params["index"]
            new_cut = None
        else:
            k = n + c1 + c2  # the fresh contradiction member
            new_cut = k
        part_a = [v for v in b1.mu if b1.mu[v].index == pos1]
        part_b = [v for v in b2.mu if b2.mu[v].index == pos2]

        def fn1(a: TargetAddress) -> TargetAddress:
            if a.index == pos1:
                return TargetAddress(k, (0,) + a.path)
            if a.index < n1u:
                ctx = a.index if a.index < pos1 else a.index - 1
                return TargetAddress(left[ctx], a.path)
            return TargetAddress(n + (a.index - n1u), a.path)

        def fn2(a: TargetAddress) -> TargetAddress:
            if a.index == pos2:
                return TargetAddress(k, (1,) + a.path)
            if a.index < n2u:
                ctx = a.index if a.index < pos2 else a.index - 1
                return TargetAddress(right[ctx], a.path)
            return TargetAddress(n + c1 + (a.index - n2u), a.path)

        tail = b1.aug[n1u:] + b2.aug[n2u:]
        b1.remap(fn1)
        b2.remap(fn2)
        b1.merge(b2)
        for u in part_a:
            for v in part_b:
                b1.radj[u].add(v)
                b1.radj[v].add(u)
        b = b1
        b.n_user = n
        b.aug = list(conclusion.formulas) + tail
        if new_cut is not None:
            a_formula = d.premises[0].conclusion[pos1]
            b.aug.append(Tens(a_formula, d.premises[1].conclusion[pos2]))
        return b

    b = _translate(d.premises[0], counter)
    n_prem = len(d.premises[0].conclusion)
    cuts = len(b.aug) - b.n_user

    if rule == "par":
        k = d.params["index"]

        def fn(a: TargetAddress) -> TargetAddress:
            if a.index == k:
                return TargetAddress(k, (0,) + a.path)
            if a.index == k + 1:
                return TargetAddress(k, (1,) + a.path)
            return TargetAddress(a.index - 1, a.path) if a.index > k + 1 else a

        b.remap(fn)
        b.aug = list(conclusion.formulas) + b.aug[n_prem:]
        b.n_user = n
        return b

    if rule == "wprom":
        k = d.params["index"]
        b.remap(lambda a: TargetAddress(a.index, (0,) + a.path))
        cls = set()
        new_aug = []
        for i, f in enumerate(b.aug):
            vid = f"{nid}.bang" if i == k else f"{nid}.wn{i}"
            scope = b.members(i)
            lab = L_BANG if i == k else L_WHY
            b.add_vertex(vid, lab, TargetAddress(i))
            cls.add(vid)
            for w in scope:
                if w != vid:
                    b.dout[vid].add(w)
                    b.din[w].add(vid)
            new_aug.append(OfCourse(f) if i == k else WhyNot(f))
        b.classes.append(cls)
        b.aug = new_aug
        return b

    # map-only rules
    if rule in ("bot_j", "deep_bot", "w_j", "deep_w"):
        pass  # the jump keeps its address; only the target node changes
    elif rule in ("der", "dig", "dig_j"):
        k = d.params["index"]
        b.remap(_prefix_fn(k, ()) if rule == "der" else _merge_fn(k, ()))
    elif rule in ("deep_der", "deep_dig", "deep_dig_j"):
        at = _addr_param(d.params)
        b.remap(
            _prefix_fn(at.index, at.path)
            if rule == "deep_der"
            else _merge_fn(at.index, at.path)
        )
    elif rule == "contr":
        k = d.params["index"]

        def fold(a: TargetAddress) -> TargetAddress:
            if a.index == k + 1:
                return TargetAddress(k, a.path)
            return TargetAddress(a.index - 1, a.path) if a.index > k + 1 else a

        b.remap(fold)
    elif rule == "deep_contr":
        addr = _addr_param(d.params)
        k, path = addr.index, addr.path
        m = len(path)

        def fold_deep(a: TargetAddress) -> TargetAddress:
            if a.index == k and a.path[:m] == path and len(a.path) > m:
                return TargetAddress(k, path + a.path[m + 1 :])
            return a

        b.remap(fold_deep)
    elif rule == "eq":
        k = d.params["index"]
        align = _ac_align(d.premises[0].conclusion[k], conclusion[k])

        def eq_fn(a: TargetAddress) -> TargetAddress:
            if a.index == k:
                return TargetAddress(k, align[a.path])
            return a

        b.remap(eq_fn)
    else:
        raise DerivationError(f"unknown rule {rule!r}")

    b.aug = list(conclusion.formulas) + b.aug[n_prem:]
    b.n_user = n
    return b


def _prefix_fn(k: int, path: Path):
    m = len(path)

    def fn(a: TargetAddress) -> TargetAddress:
        if a.index == k and a.path[:m] == path:
            return TargetAddress(k, path + (0,) + a.path[m:])
        return a

    return fn


def _merge_fn(k: int, path: Path):
    # outer and inner vertex at `path` collapse onto `path`
    m = len(path)

    def fn(a: TargetAddress) -> TargetAddress:
        if a.index == k and a.path[:m] == path:
            rest = a.path[m:]
            if rest == () or rest == (0,):
                return TargetAddress(k, path)
            return TargetAddress(k, path + rest[1:])
        return a

    return fn


# --- proof equality -------------------------------------------------------------


def cp_equal(p: CombinatorialProof, q: CombinatorialProof) -> bool:
    """Source isomorphism over the shared target: label-, R-, D-, linking-
    preserving bijection commuting with the two maps."""
    if render_sequent(p.target) != render_sequent(q.target):
        raise ValueError("proofs have different target sequents")
    gp, gq = p.source, q.source
    if len(gp.web) != len(gq.web) or len(gp.classes) != len(gq.classes):
        return False

    def key(g: RgbCograph, mapping, v):
        return (g.web.labels[v], str(mapping[v]))

    cand: dict[VertexId, list[VertexId]] = {}
    by_key: dict[tuple, list[VertexId]] = {}
    for w in gq.web.vertices():
        by_key.setdefault(key(gq, q.mapping, w), []).append(w)
    for v in gp.web.vertices():
        cand[v] = by_key.get(key(gp, p.mapping, v), [])
        if not cand[v]:
            return False

    order = sorted(gp.web.vertices(), key=lambda v: (len(cand[v]), v))
    assign: dict[VertexId, VertexId] = {}
    used: set[VertexId] = set()

    def consistent(v: VertexId, w: VertexId) -> bool:
        for v2, w2 in assign.items():
            if (v2 in gp.web.radj[v]) != (w2 in gq.web.radj[w]):
                return False
            if (v2 in gp.web.dout[v]) != (w2 in gq.web.dout[w]):
                return False
            if (v2 in gp.web.din[v]) != (w2 in gq.web.din[w]):
                return False
            if (v2 in gp.class_of[v]) != (w2 in gq.class_of[w]):
                return False
        return True

    def go(i: int) -> bool:
        if i == len(order):
            return True
        v = order[i]
        for w in cand[v]:
            if w in used or not consistent(v, w):
                continue
            assign[v] = w
            used.add(w)
            if go(i + 1):
                return True
            del assign[v]
            used.discard(w)
        return False

    return go(0)


# --- sequentialization ------------------------------------------------------------


class SequentializeError(ValueError):
    pass


def sequentialize(p: CombinatorialProof) -> Derivation:
    """A cut-free derivation translating back to a proof equal to `p`:
    resource phase from the map extraction, linear phase from splittings."""
    f = p.vertex_map()
    try:
        work, _ = _extract(f, allow_wn=True)
    except FibrationError as exc:
        raise SequentializeError(f"map does not extract: {exc}") from exc

    seq = p.target
    addr_of: dict[VertexId, TargetAddress] = {v: parse_address(v) for v in p.target_web().labels}
    nodes: list[tuple[str, dict, Sequent]] = []  # recorded bottom-up

    def shift_into(base: TargetAddress, extra: Path):
        m = len(base.path)

        def fn(a: TargetAddress) -> TargetAddress:
            if a.index == base.index and a.path[:m] == base.path:
                return TargetAddress(a.index, base.path + extra + a.path[m:])
            return a

        return fn

    # replay the contraction / weakening / bottom steps on the sequent
    for step in work.steps:
        t = step.vertex
        alpha = addr_of[t]
        here = subformula_at(seq, alpha.index, alpha.path)
        if step.kind == "contr":
            nodes.append(("deep_contr", {"addr": str(alpha)}, seq))
            seq = replace_at(seq, alpha.index, alpha.path, Par(here, here))
            fn = shift_into(alpha, (0,))
            moved = dict(step.copies)
            addr_of = {v: fn(a) for v, a in addr_of.items() if v not in moved.values()}
            for orig, fresh in step.copies:
                addr_of[fresh] = TargetAddress(
                    alpha.index, alpha.path + (1,) + addr_of[orig].path[len(alpha.path) + 1 :]
                )
        elif step.kind == "weak":
            nodes.append(("deep_w", {"addr": str(alpha)}, seq))
            seq = replace_at(seq, alpha.index, alpha.path, JUMP)
            addr_of = {v: a for v, a in addr_of.items() if not _under(a, alpha) or a == alpha}
        elif step.kind == "bot":
            nodes.append(("deep_bot", {"addr": str(alpha)}, seq))
            seq = replace_at(seq, alpha.index, alpha.path, JUMP)

    src = p.source.web
    src_addr: dict[VertexId, TargetAddress] = {v: addr_of[work.mu[v]] for v in src.labels}

    # digging: re-split merged clone chains
    fibers: dict[VertexId, list[VertexId]] = {}
    for v in sorted(work.mu):
        fibers.setdefault(work.mu[v], []).append(v)
    for t in sorted(fibers):
        chain = fibers[t]
        if len(chain) < 2:
            continue
        chain = sorted(chain, key=lambda v: len(src.dout[v] & set(chain)), reverse=True)
        alpha = addr_of[t]
        bottom = subformula_at(seq, alpha.index, alpha.path)
        for i in range(len(chain) - 1):
            here = subformula_at(seq, alpha.index, alpha.path)
            rule = "deep_dig_j" if isinstance(here, Jump) else "deep_dig"
            nodes.append((rule, {"addr": str(alpha)}, seq))
            seq = replace_at(seq, alpha.index, alpha.path, WhyNot(here))
            fn = shift_into(alpha, (0,))
            src_addr = {v: fn(a) for v, a in src_addr.items()}
            addr_of = {v: fn(a) for v, a in addr_of.items()}
        for i, v in enumerate(chain):
            src_addr[v] = TargetAddress(alpha.index, alpha.path + (0,) * i)

    # dereliction: strip non-image why-nots, innermost first
    image = set(work.mu.values())
    loose = [w for w in sorted(work.labels) if w not in image]
    loose.sort(key=lambda w: len(addr_of[w].path), reverse=True)
    for w in loose:
        alpha = addr_of[w]
        here = subformula_at(seq, alpha.index, alpha.path)
        if not isinstance(here, WhyNot):
            raise SequentializeError(f"non-image vertex {w} is not a why-not")
        nodes.append(("deep_der", {"addr": str(alpha)}, seq))
        seq = replace_at(seq, alpha.index, alpha.path, here.child)

        def strip(a: TargetAddress, alpha=alpha) -> TargetAddress:
            m = len(alpha.path)
            if a.index == alpha.index and a.path[:m] == alpha.path and len(a.path) > m:
                return TargetAddress(a.index, alpha.path + a.path[m + 1 :])
            return a

        src_addr = {v: strip(a) for v, a in src_addr.items()}
        addr_of = {v: strip(a) for v, a in addr_of.items() if v != w}

    _assert_iso(p.source, seq, src_addr)

    top = _seqize(p.source, seq, src_addr)
    for rule, params, conclusion in reversed(nodes):
        top = Derivation(rule, conclusion, params, (top,))
    return top


def _under(a: TargetAddress, base: TargetAddress) -> bool:
    return a.index == base.index and a.path[: len(base.path)] == base.path


def _assert_iso(g: RgbCograph, seq: Sequent, src_addr: dict) -> None:
    web = web_of_sequent(seq)
    if len(web) != len(src_addr) or len(src_addr) != len(g.web):
        raise SequentializeError("resource phase did not reach an isomorphism")
    for v, a in src_addr.items():
        if str(a) not in web.labels or web.labels[str(a)] != g.web.labels[v]:
            raise SequentializeError(f"vertex {v} lands on a different label")
    for v in g.web.labels:
        fa = src_addr[v]
        for w in g.web.radj[v]:
            if str(src_addr[w]) not in web.radj[str(fa)]:
                raise SequentializeError("R-edges do not match after extraction")
        if {str(src_addr[w]) for w in g.web.dout[v]} != web.dout[str(fa)]:
            raise SequentializeError("D-edges do not match after extraction")
    redges = sum(len(s) for s in web.radj.values())
    sedges = sum(len(s) for s in g.web.radj.values())
    if redges != sedges:
        raise SequentializeError("R-edges do not match after extraction")


def _seqize(g: RgbCograph, seq: Sequent, src_addr: dict) -> Derivation:
    members = []
    for i, f in enumerate(seq):
        paths = {v: a.path for v, a in src_addr.items() if a.index == i}
        members.append((f, paths))
    return _seqize_go(g, members)


def _seqize_go(g: RgbCograph, members: list[tuple[Formula, dict]]) -> Derivation:
    seq_here = Sequent(tuple(f for f, _ in members))

    # par: split the first par-rooted member
    for idx, (f, paths) in enumerate(members):
        if isinstance(f, Par):
            lvs = {v: p[1:] for v, p in paths.items() if p[:1] == (0,)}
            rvs = {v: p[1:] for v, p in paths.items() if p[:1] == (1,)}
            premise = members[:idx] + [(f.left, lvs), (f.right, rvs)] + members[idx + 1 :]
            return Derivation(
                "par", seq_here, {"index": idx}, (_seqize_go(g, premise),)
            )

    all_vs = [v for _, paths in members for v in paths]
    cls0 = g.class_of[all_vs[0]]

    # axiom / one
    if all(not p for _, paths in members for p in paths.values()) and frozenset(
        all_vs
    ) == cls0:
        if all(isinstance(f, (Atom, NegAtom, Jump)) for f, _ in members):
            return Derivation("ax_j", seq_here, {})
        if all(isinstance(f, (One, Jump)) for f, _ in members):
            return Derivation("one_j", seq_here, {})

    # weak promotion: every member modal-rooted, roots one full class
    roots = {}
    for idx, (f, paths) in enumerate(members):
        for v, p in paths.items():
            if p == () and isinstance(f, (OfCourse, WhyNot)):
                roots[idx] = v
    if len(roots) == len(members) and members:
        root_set = frozenset(roots.values())
        if root_set and g.class_of[roots[0]] == root_set:
            bang = [i for i, (f, _) in enumerate(members) if isinstance(f, OfCourse)]
            if len(bang) == 1:
                premise = []
                for idx, (f, paths) in enumerate(members):
                    inner = {v: p[1:] for v, p in paths.items() if p != ()}
                    premise.append((f.child, inner))
                return Derivation(
                    "wprom", seq_here, {"index": bang[0]}, (_seqize_go(g, premise),)
                )

    # tensor: find a splitting member
    for idx, (f, paths) in enumerate(members):
        if not isinstance(f, Tens):
            continue
        split = _member_split(g, members, idx)
        if split is None:
            continue
        left_side, right_side = split
        lvs = {v: p[1:] for v, p in paths.items() if p[:1] == (0,)}
        rvs = {v: p[1:] for v, p in paths.items() if p[:1] == (1,)}
        p1_members = [members[i] for i in left_side] + [(f.left, lvs)]
        p2_members = [(f.right, rvs)] + [members[i] for i in right_side]
        return Derivation(
            "tens",
            seq_here,
            {"index": idx, "left": left_side, "right": right_side},
            (_seqize_go(g, p1_members), _seqize_go(g, p2_members)),
        )

    raise SequentializeError(f"no rule applies to {render_sequent(seq_here)!r}")


def _member_split(
    g: RgbCograph, members: list[tuple[Formula, dict]], idx: int
) -> Optional[tuple[list[int], list[int]]]:
    """Linking-closed assignment of the context members to the two tensor
    halves of member idx, or None."""
    f, paths = members[idx]
    unit_of: dict[VertexId, int] = {}
    for v, p in paths.items():
        unit_of[v] = 0 if p[:1] == (0,) else 1
    for j, (_, ps) in enumerate(members):
        if j != idx:
            for v in ps:
                unit_of[v] = 2 + j
    n_units = 2 + len(members)
    parent = list(range(n_units))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def union(i: int, j: int) -> None:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[ri] = rj

    for v in unit_of:
        for w in g.class_of[v]:
            if w in unit_of and unit_of[w] != unit_of[v]:
                union(unit_of[v], unit_of[w])
    if find(0) == find(1):
        return None
    left_side, right_side = [], []
    for j in range(len(members)):
        if j == idx:
            continue
        grp = find(2 + j)
        if grp == find(0):
            left_side.append(j)
        elif grp == find(1):
            right_side.append(j)
        else:
            # members tied to neither half would disconnect the premises
            return None
    # positions are conclusion indices
    return left_side, right_side