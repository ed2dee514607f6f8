"""``dihom`` command-line front end.

Exit codes: 0 ok/true, 1 false, 2 parse error or invalid input, 3 non-conservative program,
4 unknown, 5 hypothesis violated, 6 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import NamedTuple

from . import gms, lang, paths, twocells
from .corpus import fixture_names, load_fixture
from .npc import npc_verdict
from .pcs_core import DimensionBoundError, PrecubicalSet, from_json, to_dot, to_json

EXIT_OK, EXIT_FALSE, EXIT_PARSE, EXIT_NONCONS, EXIT_UNKNOWN, EXIT_HYPOTHESIS, EXIT_IO = range(7)


class CliError(Exception):
    def __init__(self, code: int, msg: str):
        super().__init__(msg)
        self.code = code


class Input(NamedTuple):
    pcs: PrecubicalSet
    beg: int | None
    end: int | None
    program: lang.Program | None


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot read {path}: {exc.strerror}") from None


def _complex_from_data(data) -> PrecubicalSet:
    try:
        return from_json(data)
    except (KeyError, TypeError, ValueError) as exc:
        raise CliError(EXIT_PARSE, f"invalid complex JSON: {exc}") from None


def _program_input(text: str) -> Input:
    try:
        prog = lang.parse(text)
    except lang.ParseError as exc:
        raise CliError(EXIT_PARSE, str(exc)) from None
    try:
        pp = lang.semantics(prog)
    except (lang.NonConservative, lang.InconsistentPotential, lang.BegForbidden) as exc:
        raise CliError(EXIT_NONCONS, str(exc)) from None
    return Input(pp.pcs, pp.beg, pp.end, prog)


def load_input(args) -> Input:
    if args.expr is not None:
        return _program_input(args.expr)
    if args.fixture is not None:
        try:
            return Input(load_fixture(args.fixture), None, None, None)
        except KeyError:
            names = ", ".join(fixture_names())
            raise CliError(EXIT_IO, f"unknown fixture {args.fixture!r} (known: {names}, cube-N, hollow-cube-N)") from None
    if args.file is not None:
        text = _read(args.file)
        if args.file.endswith(".json"):
            try:
                data = json.loads(text)
            except json.JSONDecodeError as exc:
                raise CliError(EXIT_PARSE, f"{args.file}: {exc}") from None
            return Input(_complex_from_data(data), None, None, None)
        return _program_input(text)
    raise CliError(EXIT_IO, "no input: give -e PROGRAM, -f FILE or --fixture NAME")


def _vertex(inp: Input, name: str) -> int:
    if name == "beg" and inp.beg is not None:
        return inp.beg
    if name == "end" and inp.end is not None:
        return inp.end
    try:
        if name.startswith("#"):
            v = int(name[1:])
            if not 0 <= v < inp.pcs.count(0):
                raise KeyError(name)
            return v
        return inp.pcs.lookup(0, name)
    except (KeyError, ValueError):
        raise CliError(EXIT_PARSE, f"unknown vertex {name!r}") from None


def _path(inp: Input, text: str) -> paths.PathT:
    try:
        return paths.parse_path(inp.pcs, text)
    except paths.InvalidPath as exc:
        raise CliError(EXIT_PARSE, f"bad path {text!r}: {exc}") from None


def _move_json(C: PrecubicalSet, m: paths.Move) -> dict:
    return {"rule": m.rule, "position": m.position, "steps": [[C.name(1, s.edge), s.reversed] for s in m.steps]}


def _counts(C: PrecubicalSet) -> list[int]:
    return [C.count(n) for n in range(C.dim + 1)]


def _emit(args, payload: dict, text: list[str]) -> None:
    if args.format == "json":
        print(json.dumps(payload, sort_keys=True, indent=2))
    else:
        print("\n".join(text))


# ---------------------------------------------------------------------------
# commands


def cmd_analyze(args) -> int:
    inp = load_input(args)
    C = inp.pcs
    verdict = npc_verdict(C)
    payload = {"cells": _counts(C), "npc": verdict.to_json()}
    text = [f"cells: {' '.join(map(str, payload['cells']))}"]
    if inp.program is not None:
        full = lang.cs_semantics(inp.program)
        pot = lang.potential(full)
        ranges = {}
        for m in sorted(lang.mutexes(inp.program)):
            vals = [vec.get(m, 0) for vec in pot.values()]
            ranges[m] = (min(vals), max(vals))
        payload.update(
            conservative=True,
            delta=dict(sorted(lang.delta(inp.program).items())),
            potentials={m: list(ranges[m]) for m in sorted(ranges)},
            forbidden=len(lang.forbidden_vertices(full)),
        )
        text.append("conservative: true")
        text.append("delta: " + (" ".join(f"{m}:{x:+d}" for m, x in payload["delta"].items()) or "0"))
        text.append("potentials: " + (" ".join(f"{m}:[{lo},{hi}]" for m, (lo, hi) in payload["potentials"].items()) or "none"))
        text.append(f"forbidden vertices removed: {payload['forbidden']}")
    text.append(f"npc: {str(verdict.npc).lower()}")
    text.append(json.dumps(verdict.to_json(), sort_keys=True))
    _emit(args, payload, text)
    return EXIT_OK if verdict.npc else EXIT_FALSE


def cmd_equiv(args) -> int:
    inp = load_input(args)
    C = inp.pcs
    s, t = _path(inp, args.path1), _path(inp, args.path2)
    if args.mode == "di":
        witness = paths.dihomotopy_witness(C, s, t)
        verdict = "true" if witness is not None else "false"
        reason = "" if witness is not None else "exhausted the dihomotopy class of the first path"
    else:
        res = paths.are_homotopic(C, s, t, budget=args.budget)
        witness = res.witness
        verdict = {"yes": "true", "no": "false", "unknown": "unknown"}[res.verdict]
        reason = res.reason
    moves = [_move_json(C, m) for m in witness or []]
    payload = {"mode": args.mode, "verdict": verdict, "reason": reason, "witness": moves if witness is not None else None}
    text = [verdict]
    if reason:
        text.append(f"reason: {reason}")
    if witness is not None:
        cur = s
        text.append(paths.format_path(C, cur))
        for m in witness:
            cur = paths.replay(C, cur, [m])
            text.append(f"  {m.rule}@{m.position}: {paths.format_path(C, cur)}")
    _emit(args, payload, text)
    return {"true": EXIT_OK, "false": EXIT_FALSE, "unknown": EXIT_UNKNOWN}[verdict]


def cmd_classes(args) -> int:
    inp = load_input(args)
    C = inp.pcs
    if args.source is None or args.to is None:
        if inp.beg is None:
            raise CliError(EXIT_PARSE, "--from and --to are required for complexes")
    x = _vertex(inp, args.source or "beg")
    y = _vertex(inp, args.to or "end")
    classes = paths.dihomotopy_classes(C, x, y, args.bound)
    fmt = [[paths.format_path(C, p) for p in cls] for cls in classes]
    payload = {"from": C.name(0, x), "to": C.name(0, y), "bound": args.bound, "count": len(classes), "classes": fmt}
    text = [f"classes: {len(classes)}"]
    for i, cls in enumerate(fmt):
        text.append(f"class {i} ({len(cls)} dipaths)")
        text.extend(f"  {p}" for p in cls)
    _emit(args, payload, text)
    return EXIT_OK


def cmd_canonicalize(args) -> int:
    try:
        data = json.loads(_read(args.cell))
    except json.JSONDecodeError as exc:
        raise CliError(EXIT_PARSE, f"{args.cell}: {exc}") from None
    if "complex" in data:
        C = _complex_from_data(data["complex"])
    else:
        C = load_input(args).pcs
    try:
        phi = twocells.cell_from_json(C, data)
    except (KeyError, TypeError, ValueError) as exc:
        raise CliError(EXIT_PARSE, f"invalid cell: {exc}") from None
    try:
        cf = twocells.normalize_canonical(C, twocells.rewrite_to_canonical(C, phi))
        moves = None
        if phi.source.is_dipath and phi.target.is_dipath:
            moves = twocells.extract_dihomotopy(C, phi)
    except twocells.HypothesisViolated as exc:
        raise CliError(EXIT_HYPOTHESIS, str(exc)) from None
    sexpr = twocells.to_sexpr(C, cf)
    payload = {"canonical": sexpr, "moves": None if moves is None else [_move_json(C, m) for m in moves]}
    text = [sexpr]
    if moves is not None:
        cur = phi.source
        text.append(paths.format_path(C, cur))
        for m in moves:
            cur = paths.replay(C, cur, [m])
            text.append(f"  tile@{m.position}: {paths.format_path(C, cur)}")
    _emit(args, payload, text)
    return EXIT_OK


def cmd_realize(args) -> int:
    inp = load_input(args)
    C = inp.pcs
    try:
        rg = gms.realize_grid(C, args.k, per_cube_metric=args.metric, directed=args.directed)
    except gms.NotGeometric as exc:
        raise CliError(EXIT_HYPOTHESIS, str(exc)) from None
    payload = {"k": args.k, "metric": args.metric, "directed": args.directed, "nodes": len(rg.nodes)}
    text = [f"nodes: {len(rg.nodes)}"]
    code = EXIT_OK
    if args.cat0 is not None:
        names = args.cat0.split(",")
        if len(names) != 3:
            raise CliError(EXIT_PARSE, "--cat0 takes three comma-separated vertices")
        x, y, z = (rg.vertex(_vertex(inp, n)) for n in names)
        try:
            res = gms.cat0_triangle_check(rg, x, y, z, sample_count=args.samples, tol=args.tol, seed=args.seed)
        except ValueError as exc:
            raise CliError(EXIT_UNKNOWN, str(exc)) from None
        payload["cat0"] = {"ok": res.ok, "pairs": res.pairs, "max_gap": round(float(res.max_gap), 9)}
        text.append(f"cat0: {'Pass' if res.ok else 'Fail'} pairs={res.pairs} max_gap={float(res.max_gap):.6f}")
        code = EXIT_OK if res.ok else EXIT_FALSE
    if args.csv:
        try:
            Path(args.csv).write_text(gms.to_csv(rg.space), encoding="utf-8")
        except OSError as exc:
            raise CliError(EXIT_IO, f"cannot write {args.csv}: {exc.strerror}") from None
    _emit(args, payload, text)
    return code


def cmd_export(args) -> int:
    inp = load_input(args)
    out = (to_dot(inp.pcs) if args.dot else json.dumps(to_json(inp.pcs), sort_keys=True, indent=2)).rstrip("\n")
    if args.output:
        try:
            Path(args.output).write_text(out + "\n", encoding="utf-8")
        except OSError as exc:
            raise CliError(EXIT_IO, f"cannot write {args.output}: {exc.strerror}") from None
    else:
        print(out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing


def _add_input(p: argparse.ArgumentParser, required: bool = True) -> None:
    g = p.add_mutually_exclusive_group(required=required)
    g.add_argument("-e", dest="expr", metavar="PROGRAM", help="inline program text")
    g.add_argument("-f", dest="file", metavar="FILE", help="program file, or a .json complex")
    g.add_argument("--fixture", metavar="NAME", help="bundled complex (cube-N, hollow-cube-N, ...)")


def _at_least(lo, kind):
    def conv(text):
        v = kind(text)
        if v < lo:
            raise argparse.ArgumentTypeError(f"must be >= {lo}")
        return v
    return conv


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dihom", description="Directed homotopy of precubical sets and mutex programs.")
    parser.add_argument("--format", choices=("text", "json"), default="text")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="cell counts, conservativity and NPC verdict")
    _add_input(p)
    p.set_defaults(run=cmd_analyze)

    p = sub.add_parser("equiv", help="decide (di)homotopy of two paths")
    _add_input(p)
    p.add_argument("path1")
    p.add_argument("path2")
    p.add_argument("--mode", choices=("di", "ho"), default="di")
    p.add_argument("--budget", type=_at_least(0, int), default=6)
    p.set_defaults(run=cmd_equiv)

    p = sub.add_parser("classes", help="dihomotopy classes of bounded dipaths")
    _add_input(p)
    p.add_argument("--from", dest="source", metavar="VERTEX", help="vertex name or #ID (default beg)")
    p.add_argument("--to", metavar="VERTEX", help="vertex name or #ID (default end)")
    p.add_argument("--bound", type=_at_least(0, int), default=8)
    p.set_defaults(run=cmd_classes)

    p = sub.add_parser("canonicalize", help="canonical form of a 2-cell")
    p.add_argument("cell", help="cell JSON, optionally with an embedded \"complex\"")
    _add_input(p, required=False)
    p.set_defaults(run=cmd_canonicalize)

    p = sub.add_parser("realize", help="grid realization and comparison-triangle check")
    _add_input(p)
    p.add_argument("--k", type=_at_least(1, int), default=8)
    p.add_argument("--metric", choices=("linf", "l2"), default="linf")
    p.add_argument("--directed", action="store_true")
    p.add_argument("--cat0", metavar="X,Y,Z", help="vertex names, or #ID for vertex ids")
    p.add_argument("--tol", type=_at_least(0, float), default=0.05)
    p.add_argument("--samples", type=_at_least(0, int), default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--csv", metavar="FILE", help="write the distance matrix as CSV")
    p.set_defaults(run=cmd_realize)

    p = sub.add_parser("export", help="serialize the complex")
    _add_input(p)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--dot", action="store_true")
    g.add_argument("--json", action="store_true")
    p.add_argument("-o", dest="output", metavar="FILE")
    p.set_defaults(run=cmd_export)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.run(args)
    except DimensionBoundError as exc:
        print(f"dihom: {exc} (raise it with DIHOM_MAX_DIM)", file=sys.stderr)
        return EXIT_PARSE
    except CliError as exc:
        print(f"dihom: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
