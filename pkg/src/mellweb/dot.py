"""Deterministic DOT rendering: R-edges red undirected, D-edges green
directed, linking classes bold blue spanning chains, cut regions gray
clusters.  Identical inputs yield identical bytes."""

from __future__ import annotations

from dataclasses import dataclass

from .cp import CombinatorialProof
from .hpn import Hpn
from .relweb import MixedGraph
from .rgb import RgbCograph


@dataclass(frozen=True)
class RenderOptions:
    shade_cuts: bool = True
    color_r: str = "red"
    color_d: str = "green"
    color_link: str = "blue"
    link_layout: str = "chain"  # or "star"


def _quote(s: str) -> str:
    return '"' + s.replace('"', '\\"') + '"'


def _node_lines(g: MixedGraph, skip=()) -> list[str]:
    return [
        f"  {_quote(v)} [label={_quote(g.labels[v])}];"
        for v in g.vertices()
        if v not in skip
    ]


def _edge_lines(g: MixedGraph, opts: RenderOptions) -> list[str]:
    out = []
    for u, v in g.r_edges():
        out.append(f"  {_quote(u)} -> {_quote(v)} [color={opts.color_r}, dir=none];")
    for u, v in g.d_edges():
        out.append(f"  {_quote(u)} -> {_quote(v)} [color={opts.color_d}];")
    return out


def _link_lines(classes, opts: RenderOptions) -> list[str]:
    out = []
    for cls in sorted(classes, key=lambda c: sorted(c)):
        members = sorted(cls)
        if len(members) < 2:
            continue
        if opts.link_layout == "star":
            pairs = [(members[0], m) for m in members[1:]]
        else:
            pairs = list(zip(members, members[1:]))
        for u, v in pairs:
            out.append(
                f"  {_quote(u)} -> {_quote(v)} "
                f"[color={opts.color_link}, style=bold, dir=none];"
            )
    return out


def render_dot(obj, opts: RenderOptions = RenderOptions()) -> str:
    lines = ["graph [ordering=out];"]
    if isinstance(obj, MixedGraph):
        body = _node_lines(obj) + _edge_lines(obj, opts)
    elif isinstance(obj, RgbCograph):
        body = _node_lines(obj.web) + _edge_lines(obj.web, opts)
        body += _link_lines(obj.classes, opts)
    elif isinstance(obj, CombinatorialProof):
        body = _node_lines(obj.source.web) + _edge_lines(obj.source.web, opts)
        body += _link_lines(obj.source.classes, opts)
    elif isinstance(obj, Hpn):
        g = obj.proof.source.web
        in_cut: dict[int, list[str]] = {i: [] for i in obj.cuts}
        cut_set = set(obj.cuts)
        for v in g.vertices():
            idx = obj.proof.mapping[v].index
            if idx in cut_set:
                in_cut[idx].append(v)
        shaded = {v for vs in in_cut.values() for v in vs} if opts.shade_cuts else set()
        body = _node_lines(g, skip=shaded)
        if opts.shade_cuts:
            for i in sorted(in_cut):
                body.append(f"  subgraph cluster_cut{i} {{")
                body.append('    style=filled; color=lightgray; label="cut";')
                for v in sorted(in_cut[i]):
                    body.append(f"    {_quote(v)} [label={_quote(g.labels[v])}];")
                body.append("  }")
        body += _edge_lines(g, opts)
        body += _link_lines(obj.proof.source.classes, opts)
    else:
        raise TypeError(f"cannot render {type(obj).__name__}")
    return "digraph {\n" + "\n".join(["  " + lines[0]] + body) + "\n}\n"
