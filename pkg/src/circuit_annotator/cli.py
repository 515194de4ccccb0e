"""Command-line front end: ``convert``, ``annotate``, ``dot`` and ``rules check``."""

from __future__ import annotations

import argparse
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .dot import to_dot
from .errors import CircuitAnnotatorError, InputError, ValidationError
from .ingest.jsongraph import load_json_graph
from .ingest.kicad import load_kicad
from .library import AnnotationRuleFile, load_rule_dir, load_rule_file, reason
from .links import load_links
from .model import CircuitGraph, from_triples, to_triples
from .report import build_report, dump_report
from .turtle import parse_turtle, serialize_turtle

FORMATS = {".kicad_sch": "kicad", ".json": "json", ".ttl": "turtle"}


@dataclass
class RunConfig:
    inputs: list[Path]
    fmt: str | None = None
    rule_dirs: list[Path] = field(default_factory=list)
    output: Path | None = None
    report: Path | None = None
    keep_derived_connects: bool = False
    explain: bool = False
    strict: bool = False
    links: Path | None = None
    wikidata: bool = False


def detect_format(path: Path, override: str | None) -> str:
    if override:
        return override
    for suffix, fmt in FORMATS.items():
        if path.name.endswith(suffix):
            return fmt
    raise InputError(f"{path}: cannot tell the input format from the extension, use --from")


def load_graph(path: Path, fmt: str | None = None, strict: bool = False) -> CircuitGraph:
    fmt = detect_format(path, fmt)
    try:
        text = path.read_text("utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise InputError(f"cannot read {path}: {getattr(exc, 'strerror', None) or exc}") from None
    if fmt == "kicad":
        g = load_kicad(text, source=str(path))
    elif fmt == "json":
        g = load_json_graph(text, source=str(path))
    else:
        g = from_triples(parse_turtle(text))
    if strict and g.warnings:
        raise ValidationError(f"{path}: " + "; ".join(g.warnings))
    return g


def write_atomic(path: Path, text: str) -> None:
    """Write via a temporary file in the same directory, so a failed run leaves nothing behind."""
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise


def _rule_files(cfg: RunConfig) -> list[AnnotationRuleFile]:
    return [rf for d in cfg.rule_dirs for rf in load_rule_dir(d)]


def _links(cfg: RunConfig):
    if cfg.links:
        return load_links(cfg.links)
    return load_links() if cfg.wikidata else None


# each command turns one input into {suffix: text}


def _convert(path: Path, cfg: RunConfig) -> tuple[dict[str, str], tuple[str, ...]]:
    g = load_graph(path, cfg.fmt, cfg.strict)
    return {".ttl": serialize_turtle(to_triples(g, links=_links(cfg)))}, g.warnings


def _annotate(path: Path, cfg: RunConfig, extra: list[AnnotationRuleFile]):
    g = load_graph(path, cfg.fmt, cfg.strict)
    r = reason(g, extra)
    out = {".ttl": serialize_turtle(r.output_triples(cfg.keep_derived_connects, links=_links(cfg)))}
    out[".report.json"] = dump_report(build_report(r.annotated, cfg.explain, g.warnings))
    return out, g.warnings


def _dot(path: Path, cfg: RunConfig, extra: list[AnnotationRuleFile]):
    g = load_graph(path, cfg.fmt, cfg.strict)
    return {".dot": to_dot(reason(g, extra).annotated, name=path.name.split(".")[0])}, g.warnings


def _stem(path: Path) -> str:
    for suffix in FORMATS:
        if path.name.endswith(suffix):
            return path.name[: -len(suffix)]
    return path.stem


def _run(cfg: RunConfig, job, main_suffix: str) -> int:
    if len(cfg.inputs) > 1 and cfg.output is not None and cfg.output.exists() and not cfg.output.is_dir():
        raise InputError(f"-o {cfg.output}: several inputs need an output directory")
    with ThreadPoolExecutor(max_workers=min(8, len(cfg.inputs))) as pool:
        results = list(pool.map(job, cfg.inputs))  # re-raises the first failure
    multi = len(cfg.inputs) > 1
    for path, (outputs, warnings) in zip(cfg.inputs, results):
        for w in warnings:
            print(f"warning: {path}: {w}", file=sys.stderr)
        main = outputs[main_suffix]
        if cfg.output is None:
            sys.stdout.write(main)
        else:
            target = cfg.output / (_stem(path) + main_suffix) if multi else cfg.output
            write_atomic(target, main)
        if ".report.json" in outputs and cfg.report is not None:
            target = cfg.report / (_stem(path) + ".report.json") if multi else cfg.report
            write_atomic(target, outputs[".report.json"])
    return 0


def cmd_convert(cfg: RunConfig) -> int:
    return _run(cfg, lambda p: _convert(p, cfg), ".ttl")


def cmd_annotate(cfg: RunConfig) -> int:
    extra = _rule_files(cfg)
    return _run(cfg, lambda p: _annotate(p, cfg, extra), ".ttl")


def cmd_dot(cfg: RunConfig) -> int:
    extra = _rule_files(cfg)
    return _run(cfg, lambda p: _dot(p, cfg, extra), ".dot")


def cmd_rules_check(paths: list[Path]) -> int:
    total = 0
    for p in paths:
        files = load_rule_dir(p) if p.is_dir() else [load_rule_file(p)]
        for rf in files:
            fns = ", ".join(sorted(f.local for f in rf.functions)) or "-"
            print(f"{p / rf.name if p.is_dir() else p}: {len(rf.rules)} rules ({fns})")
            total += len(rf.rules)
    print(f"ok: {total} rules")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="circuit-annotator",
        description="Annotate circuit schematics with component functions using forward-chaining rules.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, annotating: bool):
        p.add_argument("inputs", nargs="+", type=Path, metavar="INPUT")
        p.add_argument("--from", dest="fmt", choices=sorted(set(FORMATS.values())), help="input format")
        p.add_argument("-o", dest="output", type=Path, help="output file (directory for several inputs)")
        p.add_argument("--strict", action="store_true", help="treat ingest warnings as errors")
        if annotating:
            p.add_argument(
                "--rules", dest="rule_dirs", action="append", type=Path, default=[], metavar="DIR",
                help="extra annotation rule directory (repeatable)",
            )

    p = sub.add_parser("convert", help="input -> raw Turtle")
    common(p, False)
    p.add_argument("--wikidata", action="store_true", help="add class links from the bundled Wikidata table")
    p.add_argument("--links", type=Path, help="add class links from this TSV table")

    p = sub.add_parser("annotate", help="input -> Turtle with function annotations")
    common(p, True)
    p.add_argument("--report", type=Path, help="write a JSON report (directory for several inputs)")
    p.add_argument("--explain", action="store_true", help="list rules and bindings in the report")
    p.add_argument("--keep-derived-connects", action="store_true", help="keep connections derived during preprocessing")
    p.add_argument("--wikidata", action="store_true", help="add class links from the bundled Wikidata table")
    p.add_argument("--links", type=Path, help="add class links from this TSV table")

    p = sub.add_parser("dot", help="input -> Graphviz DOT of the annotated circuit")
    common(p, True)

    p = sub.add_parser("rules", help="rule file utilities")
    rsub = p.add_subparsers(dest="rules_command", required=True)
    c = rsub.add_parser("check", help="parse and validate rule files or directories")
    c.add_argument("paths", nargs="+", type=Path, metavar="PATH")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "rules":
            return cmd_rules_check(args.paths)
        cfg = RunConfig(
            inputs=args.inputs,
            fmt=args.fmt,
            rule_dirs=getattr(args, "rule_dirs", []),
            output=args.output,
            report=getattr(args, "report", None),
            keep_derived_connects=getattr(args, "keep_derived_connects", False),
            explain=getattr(args, "explain", False),
            strict=args.strict,
            links=getattr(args, "links", None),
            wikidata=getattr(args, "wikidata", False),
        )
        return {"convert": cmd_convert, "annotate": cmd_annotate, "dot": cmd_dot}[args.command](cfg)
    except CircuitAnnotatorError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
