"""Command-line surface.

Machine output is line-delimited JSON on stdout; human summaries go to
stderr.  Exit codes: 0 accepted / success, 1 well-formed input with a
negative verdict (witness printed as JSON), 2 malformed input.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional

from . import jsonio
from .cp import (
    DerivationError,
    SequentializeError,
    check_cp,
    sequentialize,
    translate_derivation,
)
from .dot import RenderOptions, render_dot
from .formula import FormulaError, parse_sequent, render_sequent
from .hpn import Hpn, HpnError, normalize, translate_with_cuts
from .oracle import SearchBudget, prove_sequent
from .relweb import GraphError, recognize_modal, recognize_web, web_of_sequent
from .rgb import check_correct, validate_linking

OK_EXIT, FAIL_EXIT, BAD_EXIT = 0, 1, 2


class _Bad(Exception):
    pass


def _load(path: str):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise _Bad(f"{path}: {exc}") from exc


def _emit(doc: dict, out: Optional[str]) -> None:
    text = json.dumps(doc, sort_keys=True)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _verdict_doc(v) -> dict:
    return {"ok": v.ok, "condition": v.condition, "witness": list(v.witness)}


def cmd_check(args) -> int:
    kind, obj = jsonio.load_object(_load(args.file))
    if kind == "hpn":
        proof = obj.proof
    elif kind == "cp":
        proof = obj
    elif kind == "rgb":
        v = validate_linking(obj)
        if v.ok:
            v = check_correct(obj, args.system)
        _emit(_verdict_doc(v), args.output)
        return OK_EXIT if v.ok else FAIL_EXIT
    elif kind == "web":
        v = recognize_web(obj)
        if v.ok:
            v = recognize_modal(obj)
        _emit(_verdict_doc(v), args.output)
        return OK_EXIT if v.ok else FAIL_EXIT
    else:
        raise _Bad("check expects a proof, graph, or net document")
    v = check_cp(proof, args.system)
    _emit(_verdict_doc(v), args.output)
    print(f"check: {'ok' if v.ok else v.condition}", file=sys.stderr)
    return OK_EXIT if v.ok else FAIL_EXIT


def _has_cut(d) -> bool:
    return d.rule == "cut" or any(_has_cut(p) for p in d.premises)


def cmd_translate(args) -> int:
    kind, obj = jsonio.load_object(_load(args.file))
    if kind != "derivation":
        raise _Bad("translate expects a derivation document")
    if _has_cut(obj):
        h = translate_with_cuts(obj)
        _emit(jsonio.hpn_to_json(h), args.output)
    else:
        p = translate_derivation(obj)
        _emit(jsonio.cp_to_json(p), args.output)
    return OK_EXIT


def cmd_sequentialize(args) -> int:
    kind, obj = jsonio.load_object(_load(args.file))
    if kind != "cp":
        raise _Bad("sequentialize expects a combinatorial-proof document")
    v = check_cp(obj, args.system)
    if not v.ok:
        _emit(_verdict_doc(v), None)
        return FAIL_EXIT
    d = sequentialize(obj)
    _emit(jsonio.derivation_to_json(d), args.output)
    return OK_EXIT


def cmd_normalize(args) -> int:
    kind, obj = jsonio.load_object(_load(args.file))
    if kind == "cp":
        obj = Hpn(obj, ())
    elif kind != "hpn":
        raise _Bad("normalize expects a proof-net document")
    proof, trace = normalize(obj, dup_mode=args.dup_mode)
    if args.trace:
        with open(args.trace, "w", encoding="utf-8") as fh:
            for t in trace:
                fh.write(
                    json.dumps(
                        {
                            "case": t.case,
                            "cut": t.cut,
                            "measure_before": list(t.measure_before),
                            "measure_after": list(t.measure_after),
                            "slots_before": list(t.slots_before),
                            "slots_after": list(t.slots_after),
                        }
                    )
                    + "\n"
                )
    _emit(jsonio.cp_to_json(proof), args.output)
    print(f"normalize: {len(trace)} step(s)", file=sys.stderr)
    return OK_EXIT


def cmd_render(args) -> int:
    kind, obj = jsonio.load_object(_load(args.file))
    if kind == "derivation":
        raise _Bad("render expects a graph-like document")
    opts = RenderOptions(shade_cuts=not args.no_shade)
    text = render_dot(obj, opts)
    if args.dot:
        with open(args.dot, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return OK_EXIT


def cmd_oracle(args) -> int:
    budget = SearchBudget(max_size=args.max_size)
    if args.file:
        with open(args.file, "r", encoding="utf-8") as fh:
            lines = [ln.strip() for ln in fh if ln.strip()]
        for ln in lines:
            try:
                verdict = prove_sequent(parse_sequent(ln), args.system, budget)
            except FormulaError as exc:
                raise _Bad(f"{ln!r}: {exc}") from exc
            print(f"{ln},{verdict}")
        return OK_EXIT
    s = parse_sequent(args.sequent)
    verdict = prove_sequent(s, args.system, budget)
    _emit({"sequent": render_sequent(s), "verdict": verdict}, None)
    return OK_EXIT if verdict == "provable" else FAIL_EXIT


def cmd_web(args) -> int:
    s = parse_sequent(args.sequent)
    g = web_of_sequent(s)
    if args.dot:
        text = render_dot(g)
        with open(args.dot, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        _emit(jsonio.web_to_json(g), args.output)
    return OK_EXIT


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mellweb")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, output=True):
        p.add_argument("--system", choices=("mll", "mllu", "mell"), default="mell")
        if output:
            p.add_argument("-o", "--output", default=None)

    p = sub.add_parser("check", help="verify a proof or graph document")
    p.add_argument("file")
    common(p)
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("translate", help="derivation to combinatorial proof")
    p.add_argument("file")
    common(p)
    p.set_defaults(fn=cmd_translate)

    p = sub.add_parser("sequentialize", help="combinatorial proof to derivation")
    p.add_argument("file")
    common(p)
    p.set_defaults(fn=cmd_sequentialize)

    p = sub.add_parser("normalize", help="eliminate the cuts of a proof net")
    p.add_argument("file")
    p.add_argument("--trace", default=None)
    p.add_argument("--dup-mode", choices=("component", "kingdom"), default="kingdom")
    common(p)
    p.set_defaults(fn=cmd_normalize)

    p = sub.add_parser("render", help="emit DOT for a graph-like document")
    p.add_argument("file")
    p.add_argument("--dot", default=None)
    p.add_argument("--no-shade", action="store_true")
    p.set_defaults(fn=cmd_render)

    p = sub.add_parser("oracle", help="brute-force provability")
    p.add_argument("sequent", nargs="?")
    p.add_argument("--system", choices=("mll", "mllu"), default="mll")
    p.add_argument("--file", default=None)
    p.add_argument("--max-size", type=int, default=24)
    p.set_defaults(fn=cmd_oracle)

    p = sub.add_parser("web", help="formula/sequent to its relation web")
    p.add_argument("sequent")
    p.add_argument("--dot", default=None)
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(fn=cmd_web)

    return ap


def main(argv: Optional[list[str]] = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.fn(args)
    except _Bad as exc:
        print(f"error: {exc}", file=sys.stderr)
        return BAD_EXIT
    except (FormulaError, GraphError, DerivationError, HpnError, SequentializeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return BAD_EXIT


if __name__ == "__main__":
    sys.exit(main())
