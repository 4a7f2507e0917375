"""JSON file formats for graphs, proofs, and derivations."""

from __future__ import annotations

from .cp import CombinatorialProof, Derivation
from .formula import Sequent, parse_address, parse_sequent, render_sequent
from .hpn import Hpn
from .relweb import GraphError, MixedGraph
from .rgb import RgbCograph


def web_to_json(g: MixedGraph) -> dict:
    return {
        "vertices": [{"id": v, "label": g.labels[v]} for v in g.vertices()],
        "r": [[u, v] for u, v in g.r_edges()],
        "d": [[u, v] for u, v in g.d_edges()],
    }


def web_from_json(d: dict) -> MixedGraph:
    labels = {v["id"]: v["label"] for v in d["vertices"]}
    return MixedGraph(labels, [tuple(e) for e in d.get("r", [])], [tuple(e) for e in d.get("d", [])])


def rgb_to_json(g: RgbCograph) -> dict:
    out = web_to_json(g.web)
    out["linking"] = [sorted(c) for c in g.classes]
    return out


def rgb_from_json(d: dict) -> RgbCograph:
    return RgbCograph(web_from_json(d), d["linking"])


def cp_to_json(p: CombinatorialProof) -> dict:
    return {
        "sequent": render_sequent(p.target),
        "rgb": rgb_to_json(p.source),
        "map": {v: str(a) for v, a in sorted(p.mapping.items())},
    }


def cp_from_json(d: dict) -> CombinatorialProof:
    target = parse_sequent(d["sequent"])
    source = rgb_from_json(d["rgb"])
    mapping = {v: parse_address(a) for v, a in d["map"].items()}
    return CombinatorialProof(source, target, mapping)


def hpn_to_json(h: Hpn) -> dict:
    out = cp_to_json(h.proof)
    out["cuts"] = list(h.cuts)
    return out


def hpn_from_json(d: dict) -> Hpn:
    return Hpn(cp_from_json(d), tuple(d.get("cuts", ())))


def _principal_addresses(d: Derivation) -> list[str]:
    p = d.params
    if "addr" in p:
        return [str(p["addr"])]
    if "index" in p:
        return [str(p["index"])]
    return []


def derivation_to_json(d: Derivation) -> dict:
    return {
        "rule": d.rule,
        "params": dict(d.params),
        "conclusion": render_sequent(d.conclusion),
        "addresses": _principal_addresses(d),
        "premises": [derivation_to_json(q) for q in d.premises],
    }


def derivation_from_json(d: dict) -> Derivation:
    return Derivation(
        d["rule"],
        parse_sequent(d["conclusion"]),
        dict(d.get("params", {})),
        tuple(derivation_from_json(q) for q in d.get("premises", [])),
    )


def load_object(d: dict):
    """Classify a loaded JSON document by its fields."""
    if "rule" in d:
        return ("derivation", derivation_from_json(d))
    if "cuts" in d:
        return ("hpn", hpn_from_json(d))
    if "sequent" in d and "rgb" in d:
        return ("cp", cp_from_json(d))
    if "linking" in d:
        return ("rgb", rgb_from_json(d))
    if "vertices" in d:
        return ("web", web_from_json(d))
    raise GraphError("unrecognized document shape")
