"""Command line entry points."""

from __future__ import annotations

import argparse
import io
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from . import onesided
from . import typing as two
from .parser import ParseError, parse_script, parse_term, parse_type, write_script
from .reduction import Converged, OpenTermError, WentWrong, classify_nf, evaluate
from .subtyping import MalformedDerivationError, legacy_failure, subtype
from .syntax import SyntaxErrorBase, show_term
from .sequent import show_path

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise InputError(f"cannot read {path}: {e.strerror}")


def _term_file(path: str):
    try:
        return parse_term(_read(path))
    except (ParseError, SyntaxErrorBase) as e:
        raise InputError(f"{path}: {e}")


def _type_arg(arg: str):
    src = _read(arg) if arg.endswith(".ty") and os.path.exists(arg) else arg
    try:
        return parse_type(src)
    except ParseError as e:
        raise InputError(f"cannot parse type {arg!r}: {e}")


def _script(path: str):
    try:
        return parse_script(_read(path), Path(path).name)
    except (ParseError, SyntaxErrorBase) as e:
        raise InputError(f"{path}: {e}")


def show_outcome(r) -> str:
    if isinstance(r, Converged):
        return f"Converged: {show_term(r.value)} ({r.steps} steps)"
    if isinstance(r, WentWrong):
        return f"WentWrong: {show_term(r.stuck)} ({r.steps} steps)"
    return f"FuelExhausted: {show_term(r.last)} ({r.steps} steps)"


@dataclass
class Verdict:
    accepted: bool
    tag: str = ""
    path: tuple = ()
    message: str = ""
    elaborated: object = None


def check_script(sc) -> Verdict:
    d = sc.derivation
    if sc.system == "legacy-subtyping":
        try:
            bad = legacy_failure(d)
        except MalformedDerivationError as e:
            return Verdict(False, "malformed", e.path, str(e))
        if bad is not None:
            return Verdict(False, "invalid", bad, f"invalid rule instance at {show_path(bad)}")
        return Verdict(True, message="accepted")
    if sc.system == "one-sided":
        r = onesided.check_one_sided(d)
        return Verdict(r.ok, "" if r.ok else two.reason_tag(r.reason), r.path, r.describe(), d)
    try:
        e = two.elaborate(d)
    except two.ElaborationError as err:
        return Verdict(False, "elaboration", err.path, str(err))
    r = two.check(e)
    return Verdict(r.ok, "" if r.ok else two.reason_tag(r.reason), r.path, r.describe(), e)


def dynamic_status(sc, v: Verdict, fuel=None) -> str:
    if sc.system == "legacy-subtyping" or not v.accepted:
        return "-"
    try:
        return two.dynamic_soundness_check(v.elaborated, fuel)
    except (ValueError, OpenTermError):
        return "-"


# subcommands


def cmd_eval(args, out) -> int:
    t = _term_file(args.file)
    try:
        r = evaluate(t, args.fuel)
    except OpenTermError as e:
        raise InputError(str(e))
    print(show_outcome(r), file=out)
    return EXIT_OK


def cmd_classify(args, out) -> int:
    t = _term_file(args.file)
    try:
        print(classify_nf(t), file=out)
    except OpenTermError as e:
        raise InputError(str(e))
    return EXIT_OK


def cmd_sub(args, out) -> int:
    a, b = _type_arg(args.lhs), _type_arg(args.rhs)
    ok = subtype(a, b)
    print("true" if ok else "false", file=out)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_check(args, out) -> int:
    sc = _script(args.script)
    v = check_script(sc)
    print(v.message if v.message else ("accepted" if v.accepted else "rejected"), file=out)
    if v.accepted:
        status = dynamic_status(sc, v)
        if status != "-":
            print(f"dynamic check: {status}", file=out)
    return EXIT_OK if v.accepted else EXIT_FAIL


def cmd_translate(args, out) -> int:
    sc = _script(args.script)
    v = check_script(sc)
    if not v.accepted:
        print(v.message, file=out)
        return EXIT_FAIL
    try:
        if args.to == "one-sided":
            if sc.system != "two-sided":
                raise InputError("translation to one-sided needs a two-sided script")
            d = onesided.translate_two_to_one(v.elaborated)
        else:
            if sc.system != "one-sided":
                raise InputError("translation to two-sided needs a one-sided script")
            d = onesided.translate_one_to_two(sc.derivation)
    except (onesided.TranslationError, onesided.FreshnessError) as e:
        print(str(e), file=out)
        return EXIT_FAIL
    out.write(write_script(d, args.to, comment=f"translated from {sc.name}"))
    return EXIT_OK


def cmd_synth(args, out) -> int:
    t = _term_file(args.file)
    try:
        tag, d = two.classify_and_derive(t)
    except two.NotNormalFormError as e:
        print(str(e), file=out)
        return EXIT_FAIL
    out.write(write_script(d, "two-sided", comment=f"{tag}: {show_term(t)}"))
    return EXIT_OK


def run_script_file(path: str) -> dict:
    start = time.perf_counter()
    row = {"name": Path(path).name, "system": "?", "expect": "?", "verdict": "fail",
           "status": "", "dynamic": "-", "path": ""}
    try:
        sc = parse_script(_read(path), Path(path).name)
    except (InputError, ParseError, SyntaxErrorBase) as e:
        row["status"] = "parse-error"
        row["detail"] = str(e)
        row["time"] = time.perf_counter() - start
        return row
    row["system"] = sc.system
    row["expect"] = sc.expect + (f" {sc.reject_tag}" if sc.reject_tag else "")
    v = check_script(sc)
    row["status"] = "accepted" if v.accepted else f"rejected {v.tag}"
    row["path"] = show_path(v.path) if not v.accepted else ""
    row["detail"] = v.message
    if sc.expect == "accept":
        good = v.accepted
    else:
        good = not v.accepted and (sc.reject_tag is None or sc.reject_tag == v.tag)
    dyn = dynamic_status(sc, v)
    row["dynamic"] = dyn
    if not good or dyn == "violated":
        row["verdict"] = "fail"
    elif dyn == "inconclusive":
        row["verdict"] = "inconclusive"
    else:
        row["verdict"] = "pass"
    row["time"] = time.perf_counter() - start
    return row


def corpus_files(directory: str) -> list:
    p = Path(directory)
    if not p.is_dir():
        raise InputError(f"not a directory: {directory}")
    return sorted(str(f) for f in p.glob("*.script"))


def run_corpus(directory: str, jobs: int = 1) -> list:
    files = corpus_files(directory)
    if jobs > 1 and len(files) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            rows = list(ex.map(run_script_file, files))
    else:
        rows = [run_script_file(f) for f in files]
    return sorted(rows, key=lambda r: r["name"])


def format_rows(rows, timing: bool = True) -> str:
    cols = ["name", "system", "expect", "status", "path", "dynamic", "verdict"]
    table = [cols] + [[str(r[c]) for c in cols] for r in rows]
    widths = [max(len(row[i]) for row in table) for i in range(len(cols))]
    lines = []
    for k, row in enumerate(table):
        line = "  ".join(x.ljust(w) for x, w in zip(row, widths)).rstrip()
        if timing:
            t = "time" if k == 0 else f"{rows[k - 1]['time']:.3f}s"
            line = "  ".join(x.ljust(w) for x, w in zip(row, widths)) + "  " + t
        lines.append(line)
    counts = {}
    for r in rows:
        counts[r["verdict"]] = counts.get(r["verdict"], 0) + 1
    summary = ", ".join(f"{counts.get(k, 0)} {k}" for k in ("pass", "fail", "inconclusive"))
    lines.append(f"{len(rows)} scripts: {summary}")
    return "\n".join(lines) + "\n"


def cmd_corpus(args, out) -> int:
    rows = run_corpus(args.dir, args.jobs)
    out.write(format_rows(rows, timing=not args.no_timing))
    return EXIT_FAIL if any(r["verdict"] == "fail" for r in rows) else EXIT_OK


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    p = _ArgumentParser(prog="incortype", description="Two-sided incorrectness typing toolkit")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_ArgumentParser)
    e = sub.add_parser("eval", help="evaluate a closed term")
    e.add_argument("file")
    e.add_argument("--fuel", type=int, default=None)
    e.set_defaults(fn=cmd_eval)
    c = sub.add_parser("classify", help="value, stuck or reducible")
    c.add_argument("file")
    c.set_defaults(fn=cmd_classify)
    s = sub.add_parser("sub", help="decide a subtyping query")
    s.add_argument("lhs")
    s.add_argument("rhs")
    s.set_defaults(fn=cmd_sub)
    k = sub.add_parser("check", help="elaborate and check a proof script")
    k.add_argument("script")
    k.set_defaults(fn=cmd_check)
    t = sub.add_parser("translate", help="translate between the two systems")
    t.add_argument("script")
    t.add_argument("--to", required=True, choices=["one-sided", "two-sided"])
    t.set_defaults(fn=cmd_translate)
    y = sub.add_parser("synth", help="derive the classification of a normal form")
    y.add_argument("file")
    y.set_defaults(fn=cmd_synth)
    r = sub.add_parser("corpus", help="check every script in a directory")
    r.add_argument("dir")
    r.add_argument("--jobs", type=int, default=1)
    r.add_argument("--no-timing", action="store_true")
    r.set_defaults(fn=cmd_corpus)
    return p


def run_command(argv, out=None, err=None):
    """Run the CLI; returns (exit code, output text)."""
    out_buf = io.StringIO()
    err_buf = err or io.StringIO()
    try:
        args = build_parser().parse_args(list(argv))
        code = args.fn(args, out_buf)
    except InputError as e:
        print(f"error: {e}", file=err_buf)
        code = EXIT_INPUT
    text = out_buf.getvalue()
    if out is not None:
        out.write(text)
    return code, text


def main(argv=None) -> int:
    code, _ = run_command(sys.argv[1:] if argv is None else argv, sys.stdout, sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
