"""Command-line front end: ``roabp-pit {pit,gen,expand,parse,align}``.

Exit codes: 0 when the command ran (whatever the verdict), 2 when a field-size
precondition or a configured cap stops a pit/gen run, 3 when an input fails to
parse or validate (and for any error raised by expand, parse or align).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field as dc_field
from pathlib import Path
from typing import Sequence

from .field import DEFAULT_MODULUS, FieldError, PrimeField
from .formula import FormulaError, build_chain, build_fn, parse, product_program, to_roabp
from .oracle import (DEFAULT_ALIGN_CAP, DEFAULT_TERM_CAP, CapExceeded, from_roabp, is_aligned)
from .pit import (DEFAULT_PROBE_CAP, BlackBox, BlackBoxHandle, StructuralHandle, find_alignment,
                  pit_single_blackbox, pit_single_structural, sum_pit_blackbox,
                  sum_pit_nonblackbox, sum_pit_semiblackbox)
from .roabp import ROABP, Const, Edge, ROABPError, Var, validate
from .svgen import SVGenerator, generator_image, low_weight_set

EXIT_OK = 0
EXIT_PRECONDITION = 2
EXIT_INVALID = 3

MODES = ("single-structural", "single-blackbox", "sum-nonblackbox", "sum-semiblackbox",
         "sum-blackbox")


class InputError(ValueError):
    """A program file or command argument could not be read."""


@dataclass
class RunConfig:
    modulus: int | None = None
    mode: str | None = None
    k: int | None = None
    cap_terms: int = DEFAULT_TERM_CAP
    cap_probes: int = DEFAULT_PROBE_CAP
    cap_align_vars: int = DEFAULT_ALIGN_CAP
    full_cube_shortcut: bool = True
    blackbox_handles: bool = False
    inputs: list[str] = dc_field(default_factory=list)
    output: str | None = None

    def check_field(self, n: int, p: int) -> None:
        """Raise FieldError unless GF(p) is large enough for this mode on n variables."""
        k = self.k or 1
        need = {
            "single-structural": 0,
            "single-blackbox": max(n, (n - 1) * n),
            "sum-nonblackbox": k * n * n,
            "sum-semiblackbox": k * n * n,
            "sum-blackbox": k * n**4,
        }[self.mode]
        if p <= need:
            raise FieldError(f"mode {self.mode} on n={n}, k={k} needs p > {need}, got p = {p}")


# ---------------------------------------------------------------------------
# program files


def program_to_dict(A: ROABP) -> dict:
    edges = []
    for e in A.edges:
        lab = {"var": e.label.index} if isinstance(e.label, Var) else {"const": e.label.value}
        edges.append({"from": e.src, "to": e.dst, "label": lab})
    return {"modulus": A.field.modulus, "num_vars": A.num_vars,
            "levels": [list(level) for level in A.levels], "edges": edges}


def dumps_program(A: ROABP) -> str:
    d = program_to_dict(A)
    lines = ["{",
             f'  "modulus": {d["modulus"]},',
             f'  "num_vars": {d["num_vars"]},',
             f'  "levels": {json.dumps(d["levels"])},',
             '  "edges": [']
    lines += [f"    {json.dumps(e)}" + ("," if j < len(d["edges"]) - 1 else "")
              for j, e in enumerate(d["edges"])]
    lines += ["  ]", "}"]
    return "\n".join(lines) + "\n"


def _int(obj, what: str) -> int:
    if isinstance(obj, bool) or not isinstance(obj, int):
        raise InputError(f"{what} must be an integer, got {obj!r}")
    return obj


def program_from_dict(d: dict) -> ROABP:
    if not isinstance(d, dict):
        raise InputError("a program file holds a JSON object")
    missing = {"modulus", "num_vars", "levels", "edges"} - set(d)
    if missing:
        raise InputError(f"program file lacks keys: {', '.join(sorted(missing))}")
    try:
        F = PrimeField(_int(d["modulus"], "modulus"))
    except FieldError as exc:
        raise InputError(str(exc)) from exc
    levels = tuple(tuple(_int(v, "node id") for v in level) for level in d["levels"])
    edges = []
    for e in d["edges"]:
        lab = e.get("label")
        if not isinstance(lab, dict) or len(lab) != 1:
            raise InputError(f"bad edge label {lab!r}")
        if "var" in lab:
            label = Var(_int(lab["var"], "variable index"))
        elif "const" in lab:
            label = Const(_int(lab["const"], "constant") % F.modulus)
        else:
            raise InputError(f"bad edge label {lab!r}")
        edges.append(Edge(_int(e.get("from"), "edge source"), _int(e.get("to"), "edge target"), label))
    A = ROABP(_int(d["num_vars"], "num_vars"), F, levels, tuple(edges))
    validate(A)
    return A


def loads_program(text: str) -> ROABP:
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"not valid JSON: {exc}") from exc
    return program_from_dict(d)


def load_program(path: str) -> ROABP:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    return loads_program(text)


# ---------------------------------------------------------------------------
# commands


def _emit(cfg: RunConfig, text: str) -> None:
    if cfg.output:
        Path(cfg.output).write_text(text)
    else:
        sys.stdout.write(text)


def _load_all(cfg: RunConfig) -> list[ROABP]:
    programs = [load_program(path) for path in cfg.inputs]
    if cfg.modulus is not None:
        for path, A in zip(cfg.inputs, programs):
            if A.field.modulus != cfg.modulus:
                raise InputError(f"{path} is over GF({A.field.modulus}), --modulus says {cfg.modulus}")
    if len({(A.num_vars, A.field.modulus) for A in programs}) > 1:
        raise InputError("input programs disagree on num_vars or modulus")
    return programs


def cmd_pit(cfg: RunConfig) -> int:
    programs = _load_all(cfg)
    A0 = programs[0]
    n, p = A0.num_vars, A0.field.modulus
    if cfg.mode.startswith("single") and len(programs) != 1:
        raise InputError("single mode takes exactly one program")
    if cfg.mode == "sum-blackbox":
        cfg.k = cfg.k or len(programs)
    else:
        cfg.k = len(programs)
    cfg.check_field(n, p)
    if cfg.mode == "single-structural":
        rep = pit_single_structural(A0)
    elif cfg.mode == "single-blackbox":
        rep = pit_single_blackbox(BlackBox.from_roabp(A0))
    elif cfg.mode == "sum-nonblackbox":
        rep = sum_pit_nonblackbox(programs)
    elif cfg.mode == "sum-semiblackbox":
        rep = sum_pit_semiblackbox([BlackBox.from_roabp(A) for A in programs])
    else:
        box = BlackBox.sum([BlackBox.from_roabp(A) for A in programs])
        rep = sum_pit_blackbox(box, cfg.k, cfg.cap_probes, cfg.full_cube_shortcut)
    lines = [f"mode: {cfg.mode}", f"inputs: {len(programs)}"] + rep.lines()
    _emit(cfg, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_gen(cfg: RunConfig, args) -> int:
    F = PrimeField(cfg.modulus or DEFAULT_MODULUS)
    if args.family in ("fn", "chain", "product"):
        if args.size is None or args.size < 1:
            raise InputError(f"gen {args.family} needs a size N >= 1")
        builder = {"fn": build_fn, "chain": build_chain, "product": product_program}[args.family]
        _emit(cfg, dumps_program(builder(args.size, F)))
        return EXIT_OK
    n, w = args.n, args.weight
    if n is None or n < 1:
        raise InputError("gen hitset needs --n >= 1")
    if args.order:
        V = list(range(args.values))
        pts = generator_image(SVGenerator.default(args.order, n, F), V, cfg.cap_probes)
    else:
        if w is None or not 0 <= w <= n:
            raise InputError("gen hitset needs 0 <= --weight <= --n")
        pts = low_weight_set(n, w, F)
        if len(pts) > cfg.cap_probes:
            raise CapExceeded(f"point set has {len(pts)} points, cap is {cfg.cap_probes}", "--cap-probes")
    head = f"# n={n} p={F.modulus} provenance={pts.provenance} size={len(pts)}"
    _emit(cfg, "\n".join([head] + [",".join(map(str, q)) for q in pts]) + "\n")
    return EXIT_OK


def cmd_expand(cfg: RunConfig) -> int:
    (A,) = _load_all(cfg)
    f = from_roabp(A, cfg.cap_terms)
    _emit(cfg, "".join(line + "\n" for line in f.dump()))
    return EXIT_OK


def cmd_parse(cfg: RunConfig, args) -> int:
    F = PrimeField(cfg.modulus or DEFAULT_MODULUS)
    tree = parse(args.expr)
    _emit(cfg, dumps_program(to_roabp(tree, F, args.num_vars)))
    return EXIT_OK


def cmd_align(cfg: RunConfig) -> int:
    programs = _load_all(cfg)
    n, p = programs[0].num_vars, programs[0].field.modulus
    cfg.mode, cfg.k = "sum-nonblackbox", len(programs)
    cfg.check_field(n, p)
    handles = ([StructuralHandle(A) for A in programs] if not cfg.blackbox_handles
               else [BlackBoxHandle(BlackBox.from_roabp(A)) for A in programs])
    al = find_alignment(handles, n)
    lines = [f"shift: {','.join(map(str, al.shift))}",
             f"constraints: {al.constraint_count}",
             f"pit_calls: {al.pit_calls}"]
    lines += [f"x{j}: value={c} tried={t}" for j, c, t in al.choices]
    try:
        verdicts = [is_aligned(from_roabp(A, cfg.cap_terms).shift(al.shift), cap=cfg.cap_align_vars)
                    for A in programs]
        lines.append(f"aligned: {'true' if all(verdicts) else 'false'}")
    except CapExceeded as exc:
        lines.append(f"aligned: unchecked ({exc})")
    _emit(cfg, "\n".join(lines) + "\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--modulus", type=int, default=None,
                        help=f"prime modulus (generators default to {DEFAULT_MODULUS}; "
                             "for input files it must match the file)")
    common.add_argument("--cap-terms", type=int, default=DEFAULT_TERM_CAP,
                        help="largest symbolic expansion, in terms (default %(default)s)")
    common.add_argument("--cap-probes", type=int, default=DEFAULT_PROBE_CAP,
                        help="largest point enumeration (default %(default)s)")
    common.add_argument("--cap-align-vars", type=int, default=DEFAULT_ALIGN_CAP,
                        help="most variables for the recursive alignment check (default %(default)s)")
    common.add_argument("--output", "-o", default=None, help="write to this file instead of stdout")

    ap = argparse.ArgumentParser(prog="roabp-pit",
                                 description="Deterministic identity tests for read-once ABPs.")
    sub = ap.add_subparsers(dest="command", required=True)

    pit = sub.add_parser("pit", help="run an identity test")
    pit_sub = pit.add_subparsers(dest="shape", required=True)
    single = pit_sub.add_parser("single", parents=[common], help="test one program")
    single.add_argument("--mode", choices=["structural", "blackbox"], default="structural")
    single.add_argument("inputs", nargs=1, metavar="FILE")
    summ = pit_sub.add_parser("sum", parents=[common], help="test the sum of several programs")
    summ.add_argument("--mode", choices=["nonblackbox", "semiblackbox", "blackbox"],
                      default="nonblackbox")
    summ.add_argument("--k", type=int, default=None,
                      help="promised number of summands for blackbox mode (default: file count)")
    summ.add_argument("--no-shortcut", action="store_true",
                      help="blackbox mode: sweep the shift set even when the weight-7k cube is the whole cube")
    summ.add_argument("inputs", nargs="+", metavar="FILE")

    gen = sub.add_parser("gen", parents=[common], help="write a program or point set")
    gen.add_argument("family", choices=["fn", "chain", "product", "hitset"])
    gen.add_argument("size", nargs="?", type=int, default=None)
    gen.add_argument("--n", type=int, default=None, help="hitset dimension")
    gen.add_argument("--weight", type=int, default=None, help="hitset: largest Hamming weight")
    gen.add_argument("--order", type=int, default=0,
                     help="hitset: emit a generator image of this order instead")
    gen.add_argument("--values", type=int, default=2, help="generator image: inputs range over 0..values-1")

    exp = sub.add_parser("expand", parents=[common], help="print a program's monomials")
    exp.add_argument("inputs", nargs=1, metavar="FILE")

    prs = sub.add_parser("parse", parents=[common], help="compile a read-once formula")
    prs.add_argument("expr")
    prs.add_argument("--num-vars", type=int, default=None)

    aln = sub.add_parser("align", parents=[common], help="find a simultaneous alignment shift")
    aln.add_argument("--blackbox", action="store_true", help="use query-only handles")
    aln.add_argument("inputs", nargs="+", metavar="FILE")
    return ap


def config_from_args(args) -> RunConfig:
    cfg = RunConfig(modulus=args.modulus, cap_terms=args.cap_terms, cap_probes=args.cap_probes,
                    cap_align_vars=args.cap_align_vars, output=args.output,
                    inputs=list(getattr(args, "inputs", []) or []))
    if args.command == "pit":
        cfg.mode = f"{args.shape}-{args.mode}"
        cfg.k = getattr(args, "k", None)
        cfg.full_cube_shortcut = not getattr(args, "no_shortcut", False)
    cfg.blackbox_handles = getattr(args, "blackbox", False)
    return cfg


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    cfg = config_from_args(args)
    plumbing = args.command in ("expand", "parse", "align")
    try:
        if args.command == "pit":
            return cmd_pit(cfg)
        if args.command == "gen":
            return cmd_gen(cfg, args)
        if args.command == "expand":
            return cmd_expand(cfg)
        if args.command == "parse":
            return cmd_parse(cfg, args)
        return cmd_align(cfg)
    except (InputError, ROABPError, FormulaError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (FieldError, CapExceeded) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID if plumbing else EXIT_PRECONDITION


if __name__ == "__main__":
    sys.exit(main())
