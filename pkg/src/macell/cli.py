"""Command-line interface: `macell analyze|decompose|verify|rewrite|extend|gen`.

Exit codes: 0 success, 1 a check ran and failed, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass

from macell import generators
from macell.analysis import degree_profile, is_ma_presented
from macell.cellular import (
    CellularError, CellularPartition, StructureCatalog, cellular_decompose,
    refine_indecomposable, verify_cellular,
)
from macell.components import decompose
from macell.core import StructureError, dump_structure, load_structure
from macell.extension import ExtensionError, synthesize_extension
from macell.logic import FormulaSyntaxError, RewriteError, parse, qe_rewrite, shape_of, to_text

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    inputs: tuple
    threshold: int = 3
    seed: int = 0
    fmt: str = "json"

    def __post_init__(self):
        if self.threshold < 2:
            raise UsageError("--threshold must be at least 2")


def _read(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from exc


def _json(doc) -> str:
    return json.dumps(doc, indent=2) + "\n"


# -- commands -------------------------------------------------------------------


def cmd_analyze(cfg, args):
    m = load_structure(_read(args.structure))
    prof = degree_profile(m)
    ma = is_ma_presented(m)
    dec = decompose(m)
    doc = {
        "universe": len(m),
        "degree_profile": prof.to_dict(),
        "ma_presented": ma.to_dict(),
        "components": len(dec.components),
        "iso_classes": len(dec.classes),
        "decomposition": dec.to_dict(),
    }
    if cfg.fmt == "json":
        return EXIT_OK, _json(doc)
    lines = [f"universe: {len(m)}"]
    lines += [f"deg({name})={d}" + (f" (witness {prof.witnesses[name]})"
                                     if prof.witnesses[name] is not None else "")
              for name, d in prof.degrees.items()]
    lines.append(ma.text())
    lines.append(f"components: {len(dec.components)}, iso classes: {len(dec.classes)}")
    for c in dec.classes:
        lines.append(f"  class {c.id}: size {c.size}, count {c.count}, "
                     f"representative {' '.join(c.representative)}")
    return EXIT_OK, "\n".join(lines) + "\n"


def cmd_decompose(cfg, args):
    m = load_structure(_read(args.structure))
    p = cellular_decompose(m, cfg.threshold)
    if args.refine:
        p = refine_indecomposable(m, p)
    if cfg.fmt == "json":
        return EXIT_OK, p.dumps()
    lines = [f"K: {' '.join(p.K) if p.K else '(empty)'}"]
    for i, band in enumerate(p.bands, start=1):
        lines.append(f"band {i}: k={band.k}, {len(band.cells)} cells")
        lines += [f"  {' '.join(c)}" for c in band.cells]
    return EXIT_OK, "\n".join(lines) + "\n"


def cmd_verify(cfg, args):
    m = load_structure(_read(args.structure))
    try:
        p = CellularPartition.loads(_read(args.partition))
    except json.JSONDecodeError as exc:
        raise UsageError(f"parse error in partition: {exc}") from exc
    report = verify_cellular(m, p)
    code = EXIT_OK if report.passed else EXIT_FAIL
    if cfg.fmt == "json":
        return code, _json(report.to_dict())
    if report.passed:
        return code, "cellular: pass\n"
    return code, f"cellular: FAIL condition {report.condition}: {report.message}\n"


def cmd_rewrite(cfg, args):
    cat = StructureCatalog.loads(_read(args.catalog))
    phi = parse(args.formula, cat.signature)
    try:
        psi, report = qe_rewrite(phi, cat)
    except RewriteError as exc:
        return EXIT_FAIL, _json({"error": str(exc)}) if cfg.fmt == "json" else f"error: {exc}\n"
    doc = {"input": to_text(phi), "formula": to_text(psi),
           "shape": str(shape_of(psi, cat.signature)), "validity": report.to_dict()}
    if cfg.fmt == "json":
        return EXIT_OK, _json(doc)
    return EXIT_OK, (f"{doc['formula']}\nshape: {doc['shape']}\n"
                     f"valid on realizations with budget >= {report.threshold}\n")


def cmd_extend(cfg, args):
    cat = StructureCatalog.loads(_read(args.catalog))
    try:
        out = synthesize_extension(cat, args.copies, args.new_size)
    except ExtensionError as exc:
        return EXIT_FAIL, _json({"error": str(exc)}) if cfg.fmt == "json" else f"error: {exc}\n"
    if cfg.fmt == "json":
        return EXIT_OK, out.dumps()
    added = len(out.entries) - len(cat.entries)
    return EXIT_OK, f"added {added} components of size {args.new_size} or more\n"


def _sizes(text):
    try:
        if ".." in text:
            lo, hi = text.split("..")
            return list(range(int(lo), int(hi) + 1))
        return [int(s) for s in text.split(",") if s]
    except ValueError as exc:
        raise UsageError(f"bad size list {text!r}") from exc


def cmd_gen(cfg, args):
    kind = args.kind
    if kind == "paths":
        m = generators.paths(_sizes(args.sizes))
    elif kind == "matching":
        m = generators.matching(args.count)
    elif kind == "grid":
        m = generators.grid(args.width, args.height)
    elif kind == "eqrel":
        m = generators.eqrel(args.blocks, args.size)
    elif kind == "chain-cut":
        m = generators.chain_cut(args.chains, args.length, cfg.seed)
    elif kind == "random":
        import random

        m = generators.random_bounded_structure(random.Random(cfg.seed), args.size)
    else:
        raise UsageError(f"unknown generator {kind!r}")
    if cfg.fmt == "json":
        return EXIT_OK, dump_structure(m)
    lines = [f"{kind}: {len(m)} elements"]
    lines += [f"{name}{list(t)}" for name, t in m.tuples()]
    return EXIT_OK, "\n".join(lines) + "\n"


COMMANDS = {
    "analyze": cmd_analyze,
    "decompose": cmd_decompose,
    "verify": cmd_verify,
    "rewrite": cmd_rewrite,
    "extend": cmd_extend,
    "gen": cmd_gen,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threshold", type=int, default=3,
                        help="occurrences needed for an iso class to form a band (>= 2)")
    common.add_argument("--seed", type=int, default=0, help="seed for generators")
    common.add_argument("--format", choices=("json", "text"), default="json")
    common.add_argument("--output", help="write to this file instead of stdout")

    parser = argparse.ArgumentParser(prog="macell", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", parents=[common], help="degree profile and component census")
    p.add_argument("structure")
    p = sub.add_parser("decompose", parents=[common], help="extract a cellular partition")
    p.add_argument("structure")
    p.add_argument("--refine", action="store_true", help="refine to an indecomposable partition")
    p = sub.add_parser("verify", parents=[common], help="check a cellular partition")
    p.add_argument("structure")
    p.add_argument("partition")
    p = sub.add_parser("rewrite", parents=[common], help="rewrite a formula into E* form")
    p.add_argument("formula")
    p.add_argument("catalog")
    p = sub.add_parser("extend", parents=[common], help="add new components to a catalog")
    p.add_argument("catalog")
    p.add_argument("--copies", type=int, default=1)
    p.add_argument("--new-size", type=int, required=True)
    p = sub.add_parser("gen", parents=[common], help="generate a fixture structure")
    p.add_argument("kind", choices=sorted(generators.GENERATORS) + ["random"])
    p.add_argument("--sizes", default="1..5")
    p.add_argument("--count", type=int, default=4)
    p.add_argument("--width", type=int, default=3)
    p.add_argument("--height", type=int, default=3)
    p.add_argument("--blocks", type=int, default=2)
    p.add_argument("--size", type=int, default=3)
    p.add_argument("--chains", type=int, default=3)
    p.add_argument("--length", type=int, default=5)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = RunConfig(args.command, (), args.threshold, args.seed, args.format)
        code, text = COMMANDS[args.command](cfg, args)
    except (UsageError, StructureError, CellularError, FormulaSyntaxError) as exc:
        print(f"macell: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.output:
        try:
            with open(args.output, "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"macell: cannot write {args.output}: {exc.strerror}", file=sys.stderr)
            return EXIT_USAGE
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
