"""Command-line front end: import, check, show, export and batch processing.

Exit codes are a stable contract: 0 = the input is an expansion proof,
1 = imported but not a proof, 2 = parse or import error.
"""
from __future__ import annotations

import argparse
import json
import os
import re
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import count
from pathlib import Path
from typing import Optional

from .check import deep_sequent, verdict
from .core import ExproofError, Polarity
from .expansion import (
    ETAtom,
    ETBin,
    ETNeg,
    ETStrong,
    ETWeak,
    ExpansionSequent,
    sequent_to_json,
    shallow_sequent,
)
from .leancop import ImportConfig, import_leancop, parse_leancop
from .notation import ParseError, sequent_text, term_text
from .verit import TraceSyntaxError, import_verit, parse_verit

EXIT_PROOF = 0
EXIT_NOT_PROOF = 1
EXIT_ERROR = 2


@dataclass(frozen=True)
class RunConfig:
    command: str
    inputs: tuple[str, ...]
    format: str = "auto"
    out: Optional[str] = None
    show_deep: bool = False
    export_dot: bool = False
    skolem_prefix: str = "sk"
    definitional_threshold: int = 4
    jobs: int = 1


def detect_format(text: str) -> str:
    """First non-blank token `(set` means a resolution trace, `fof(`/`cnf(`
    a connection trace."""
    head = text.lstrip()
    if re.match(r"\(\s*set\b", head):
        return "verit"
    if re.match(r"(fof|cnf)\s*\(", head):
        return "leancop"
    raise ExproofError("cannot detect trace format: expected '(set', 'fof(' or 'cnf('")


def load_sequent(path: str, config: RunConfig) -> tuple[ExpansionSequent, dict, str]:
    text = Path(path).read_text(encoding="utf-8")
    fmt = config.format if config.format != "auto" else detect_format(text)
    if fmt == "verit":
        es, report = import_verit(parse_verit(text))
    else:
        cfg = ImportConfig(config.skolem_prefix, config.definitional_threshold)
        es, report = import_leancop(parse_leancop(text), cfg)
    return es, report, fmt


# ---------------------------------------------------------------------------
# check


def cmd_check(config: RunConfig) -> int:
    status = EXIT_PROOF
    for path in config.inputs:
        try:
            es, _report, _fmt = load_sequent(path, config)
        except ExproofError as e:
            print(f"{path}: {e}", file=sys.stderr)
            return EXIT_ERROR
        v = verdict(es)
        print(json.dumps(v.to_json(), sort_keys=True))
        if not v.is_proof:
            status = EXIT_NOT_PROOF
    return status


# ---------------------------------------------------------------------------
# show


def _ansi(enabled: bool, code: str, text: str) -> str:
    return f"\x1b[{code}m{text}\x1b[0m" if enabled else text


def _collect_weak_instances(tree, out: list[tuple[str, list[str]]]) -> None:
    if isinstance(tree, ETAtom):
        return
    if isinstance(tree, ETNeg):
        _collect_weak_instances(tree.child, out)
    elif isinstance(tree, ETBin):
        _collect_weak_instances(tree.left, out)
        _collect_weak_instances(tree.right, out)
    elif isinstance(tree, ETWeak):
        out.append((tree.var, [term_text(t) for t, _ in tree.instances]))
        for _, child in tree.instances:
            _collect_weak_instances(child, out)
    elif isinstance(tree, ETStrong):
        _collect_weak_instances(tree.child, out)


def render_show(es: ExpansionSequent, deep_mode: bool, color: bool) -> str:
    if deep_mode:
        return sequent_text(deep_sequent(es))
    lines = [sequent_text(shallow_sequent(es))]
    weak: list[tuple[str, list[str]]] = []
    for tree in es.antecedent + es.succedent:
        _collect_weak_instances(tree, weak)
    for var, terms in weak:
        rendered = ", ".join(_ansi(color, "36", t) for t in terms)
        lines.append(f"instances: {_ansi(color, '1', var)} ∈ {{{rendered}}}")
    return "\n".join(lines)


def cmd_show(config: RunConfig) -> int:
    color = os.environ.get("EXPROOF_COLOR", "0") == "1"
    for path in config.inputs:
        try:
            es, _report, _fmt = load_sequent(path, config)
        except ExproofError as e:
            print(f"{path}: {e}", file=sys.stderr)
            return EXIT_ERROR
        print(render_show(es, config.show_deep, color))
    return EXIT_PROOF


# ---------------------------------------------------------------------------
# export


def _dot_escape(s: str) -> str:
    return s.replace("\\", "\\\\").replace('"', '\\"')


def _dot_tree(tree, polarity: Polarity, ids, lines: list[str]) -> int:
    me = next(ids)
    name = f"n{me}"
    if isinstance(tree, ETAtom):
        lines.append(f'    {name} [label="{_dot_escape(str(tree.atom))}"];')
    elif isinstance(tree, ETNeg):
        lines.append(f'    {name} [label="~"];')
        child = _dot_tree(tree.child, polarity.flip(), ids, lines)
        lines.append(f"    {name} -> n{child};")
    elif isinstance(tree, ETBin):
        symbol = {"and": "&", "or": "|", "imp": "=>"}[tree.conn]
        lines.append(f'    {name} [label="{_dot_escape(symbol)}"];')
        left_pol = polarity.flip() if tree.conn == "imp" else polarity
        left = _dot_tree(tree.left, left_pol, ids, lines)
        right = _dot_tree(tree.right, polarity, ids, lines)
        lines.append(f"    {name} -> n{left};")
        lines.append(f"    {name} -> n{right};")
    elif isinstance(tree, ETWeak):
        mark = "!" if polarity is Polarity.NEG else "?"
        lines.append(f'    {name} [label="{mark}[{_dot_escape(tree.var)}]"];')
        for term, child in tree.instances:
            c = _dot_tree(child, polarity, ids, lines)
            lines.append(f'    {name} -> n{c} [label="{_dot_escape(term_text(term))}"];')
    else:  # strong
        mark = "?" if polarity is Polarity.NEG else "!"
        label = f"{mark}[{tree.var}]\\neigen: {tree.eigenvariable}"
        lines.append(f'    {name} [label="{_dot_escape_keep(label)}"];')
        child = _dot_tree(tree.child, polarity, ids, lines)
        lines.append(f"    {name} -> n{child};")
    return me


def _dot_escape_keep(s: str) -> str:
    # like _dot_escape but preserving intentional \n label breaks
    return s.replace('"', '\\"')


def sequent_to_dot(es: ExpansionSequent) -> str:
    ids = iter(count())
    lines = ["digraph expansion_sequent {", "  rankdir=TB;"]
    for side, trees, pol in (
        ("ant", es.antecedent, Polarity.NEG),
        ("suc", es.succedent, Polarity.POS),
    ):
        for i, tree in enumerate(trees):
            lines.append(f"  subgraph cluster_{side}{i} {{")
            lines.append(f'    label="{side}[{i}]";')
            _dot_tree(tree, pol, ids, lines)
            lines.append("  }")
    lines.append("}")
    return "\n".join(lines) + "\n"


def cmd_export(config: RunConfig) -> int:
    path = config.inputs[0]
    try:
        es, _report, _fmt = load_sequent(path, config)
        if config.export_dot:
            payload = sequent_to_dot(es)
        else:
            payload = json.dumps(sequent_to_json(es), indent=2, sort_keys=True) + "\n"
        if config.out:
            Path(config.out).write_text(payload, encoding="utf-8")
        else:
            sys.stdout.write(payload)
    except (ExproofError, OSError) as e:
        print(f"{path}: {e}", file=sys.stderr)
        return EXIT_ERROR
    return EXIT_PROOF


# ---------------------------------------------------------------------------
# batch


def _batch_one(path: Path, config: RunConfig) -> dict:
    started = time.perf_counter()
    entry: dict = {"format": None}
    try:
        es, _report, fmt = load_sequent(str(path), config)
        entry["format"] = fmt
        entry["status"] = "proof" if verdict(es).is_proof else "not-proof"
    except ExproofError as e:
        kind = "parse" if isinstance(e, (ParseError, TraceSyntaxError)) else "import"
        entry["status"] = f"error:{kind}"
        entry["error"] = str(e)
    except OSError as e:
        entry["status"] = "error:io"
        entry["error"] = str(e)
    entry["seconds"] = round(time.perf_counter() - started, 6)
    return entry


def cmd_batch(config: RunConfig) -> int:
    files: list[Path] = []
    for raw in config.inputs:
        p = Path(raw)
        if p.is_dir():
            files.extend(sorted(q for q in p.iterdir() if q.is_file()))
        else:
            files.append(p)
    results: dict[str, dict] = {}
    if config.jobs > 1 and files:
        with ThreadPoolExecutor(max_workers=config.jobs) as pool:
            for path, entry in zip(files, pool.map(lambda f: _batch_one(f, config), files)):
                results[path.name] = entry
    else:
        for path in files:
            results[path.name] = _batch_one(path, config)
    summary = {
        "files": {name: results[name] for name in sorted(results)},
        "imported": sum(1 for e in results.values() if e["status"] in ("proof", "not-proof")),
        "proof": sum(1 for e in results.values() if e["status"] == "proof"),
        "not_proof": sum(1 for e in results.values() if e["status"] == "not-proof"),
        "errors": sum(1 for e in results.values() if e["status"].startswith("error")),
        "total": len(results),
    }
    payload = json.dumps(summary, indent=2, sort_keys=True) + "\n"
    if config.out:
        Path(config.out).write_text(payload, encoding="utf-8")
    else:
        sys.stdout.write(payload)
    return EXIT_PROOF


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="exproof",
        description="Import prover traces as expansion sequents and check them.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, many_inputs: bool = True) -> None:
        p.add_argument("--format", choices=("verit", "leancop", "auto"), default="auto")
        p.add_argument("--skolem-prefix", default="sk", metavar="STR")
        p.add_argument("--def-threshold", type=int, default=4, metavar="N")
        p.add_argument("inputs", nargs="+" if many_inputs else 1, metavar="INPUT")

    check_p = sub.add_parser("check", help="verdict JSON; exit 0 proof / 1 not / 2 error")
    common(check_p)

    show_p = sub.add_parser("show", help="print the shallow or deep sequent")
    mode = show_p.add_mutually_exclusive_group()
    mode.add_argument("--deep", action="store_true")
    mode.add_argument("--shallow", action="store_true")
    common(show_p)

    export_p = sub.add_parser("export", help="write the expansion sequent as JSON or DOT")
    fmt = export_p.add_mutually_exclusive_group()
    fmt.add_argument("--json", action="store_true")
    fmt.add_argument("--dot", action="store_true")
    export_p.add_argument("--out", metavar="PATH")
    common(export_p, many_inputs=False)

    batch_p = sub.add_parser("batch", help="summarise a directory of trace files")
    batch_p.add_argument("--jobs", type=int, default=1, metavar="N")
    batch_p.add_argument("--out", metavar="PATH")
    common(batch_p)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        command=args.command,
        inputs=tuple(args.inputs),
        format=args.format,
        out=getattr(args, "out", None),
        show_deep=getattr(args, "deep", False),
        export_dot=getattr(args, "dot", False),
        skolem_prefix=args.skolem_prefix,
        definitional_threshold=args.def_threshold,
        jobs=getattr(args, "jobs", 1),
    )


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    config = config_from_args(args)
    handler = {
        "check": cmd_check,
        "show": cmd_show,
        "export": cmd_export,
        "batch": cmd_batch,
    }[config.command]
    return handler(config)


if __name__ == "__main__":
    sys.exit(main())
