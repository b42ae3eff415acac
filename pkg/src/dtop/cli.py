"""Command-line front end.

Exit codes: 0 success / YES / Equal, 1 NO / Counterexample / undefined,
2 parse, validation or usage errors.
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field

from . import equiv as eq
from .earliest import canonical_earliest
from .homdef import decide_hom
from .lineardef import decide_linear
from .lookahead import difference_bound, domain_subalphabet, la_uniformize
from .syntax import format_dtop, load
from .transducer import UNDEFINED, evaluate, validate
from .trees import DtopError, ParseError, parse_term

EXIT_OK, EXIT_NO, EXIT_ERROR = 0, 1, 2


@dataclass
class Report:
    command: str
    verdict: str
    fields: list = field(default_factory=list)   # (key, value) pairs
    transducer: str | None = None

    def human(self) -> str:
        lines = [self.verdict] if self.verdict else []
        lines += [f"{k}: {v}" for k, v in self.fields]
        if self.transducer is not None:
            lines.append(self.transducer.rstrip("\n"))
        return "\n".join(lines)

    def porcelain(self) -> str:
        lines = [f"command: {self.command}", f"verdict: {self.verdict.lower()}"]
        lines += [f"{k}: {v}" for k, v in self.fields]
        if self.transducer is not None:
            lines += [f"transducer: {line}" for line in self.transducer.splitlines()]
        return "\n".join(lines)


class _UsageError(Exception):
    pass


def _load(path, total=False):
    try:
        T = load(path)
    except OSError as e:
        raise _UsageError(f"cannot read {path}: {e.strerror}") from None
    diags = validate(T, total=total)
    if diags:
        raise ParseError(f"{path}: " + "; ".join(diags))
    return T


def cmd_run(args):
    T = _load(args.file)
    s = parse_term(args.input, la_states=T.la.states if T.has_lookahead else (),
                   symbols=T.input_alphabet)
    out = evaluate(T, s)
    if out is UNDEFINED:
        return Report("run", "undefined", [("input", s)]), EXIT_NO
    return Report("run", str(out)), EXIT_OK


def cmd_earliest(args):
    C = canonical_earliest(_load(args.file))
    return Report("earliest", "", transducer=format_dtop(C)), EXIT_OK


def _linear(args):
    v = decide_linear(_load(args.file))
    if v.ok:
        return v, None
    w = v.witness
    if v.property == "zero-output-twinned":
        fields = [("property", v.property), ("witness", w.context),
                  ("states", f"{w.pair[0]} {w.pair[1]}")]
    else:
        fields = [("property", v.property), ("letter", w.letter),
                  ("witness", f"{w.letter}: {'; '.join(map(str, w.rhs))}"),
                  ("leaves", " ".join(map(str, w.leaves)))]
    return v, fields


def cmd_check_linear(args):
    v, fields = _linear(args)
    if v.ok:
        return Report("check-linear", "YES", [("states", len(v.result.states))]), EXIT_OK
    return Report("check-linear", "NO", fields), EXIT_NO


def cmd_linearize(args):
    v, fields = _linear(args)
    if v.ok:
        return Report("linearize", "", transducer=format_dtop(v.result)), EXIT_OK
    return Report("linearize", "NO", fields), EXIT_NO


def cmd_check_hom(args):
    v = decide_hom(_load(args.file, total=True))
    if v.ok:
        return Report("check-hom", "YES"), EXIT_OK
    return Report("check-hom", "NO", [("reason", v.witness)]), EXIT_NO


def cmd_homify(args):
    v = decide_hom(_load(args.file, total=True))
    if v.ok:
        return Report("homify", "", transducer=format_dtop(v.result)), EXIT_OK
    return Report("homify", "NO", [("reason", v.witness)]), EXIT_NO


def cmd_uniformize(args):
    N = la_uniformize(_load(args.file))
    return Report("uniformize", "", transducer=format_dtop(N)), EXIT_OK


def cmd_diffbound(args):
    T = canonical_earliest(_load(args.file))
    return Report("diffbound", str(difference_bound(T))), EXIT_OK


def cmd_restrict_domain(args):
    r = domain_subalphabet(_load(args.file))
    if not r.ok:
        fields = [("reason", r.reason)]
        if r.witness is not None:
            fields.append(("witness", r.witness))
        return Report("restrict-domain", "NO", fields), EXIT_NO
    return Report("restrict-domain", "YES", [("alphabet", r.symbols)],
                  transducer=format_dtop(r.restricted)), EXIT_OK


def cmd_equiv(args):
    T1, T2 = _load(args.file1), _load(args.file2)
    if args.canonical:
        same = eq.canonical_equiv(T1, T2)
        note = "exact: canonical earliest forms compared"
        if same:
            return Report("equiv", "Equal", [("note", note)]), EXIT_OK
    r = eq.brute_force_equiv(T1, T2, args.max_height, args.budget)
    if r.equal:
        scope = "all" if r.complete else "the first"
        note = (f"bounded: agreement on {scope} {r.checked} inputs of height <= "
                f"{args.max_height}; not a proof of equivalence")
        if args.canonical:
            note = "exact: canonical earliest forms differ, but no counterexample found within bound"
            return Report("equiv", "Different", [("note", note)]), EXIT_NO
        return Report("equiv", "Equal", [("checked", r.checked), ("note", note)]), EXIT_OK
    fields = [("input", r.counterexample), ("output1", _show(r.out1)), ("output2", _show(r.out2))]
    return Report("equiv", "Counterexample", fields), EXIT_NO


def _show(o):
    return "undefined" if o is UNDEFINED else str(o)


def build_parser():
    p = argparse.ArgumentParser(prog="dtop", description="Top-down tree transducer toolkit")
    p.add_argument("--porcelain", action="store_true", help="key: value output")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help_, files=("file",)):
        sp = sub.add_parser(name, help=help_)
        for f in files:
            sp.add_argument(f)
        sp.set_defaults(fn=fn)
        return sp

    sp = add("run", cmd_run, "apply a transducer to an input tree")
    sp.add_argument("input")
    add("earliest", cmd_earliest, "print the canonical earliest transducer")
    add("check-linear", cmd_check_linear, "decide linear definability")
    add("linearize", cmd_linearize, "print an equivalent linear transducer")
    add("check-hom", cmd_check_hom, "decide homomorphism definability")
    add("homify", cmd_homify, "print an equivalent homomorphism")
    add("uniformize", cmd_uniformize, "print an la-uniform equivalent")
    add("diffbound", cmd_diffbound, "print the difference bound")
    add("restrict-domain", cmd_restrict_domain, "find a sub-alphabet equal to the domain")
    sp = add("equiv", cmd_equiv, "compare two transducers", ("file1", "file2"))
    sp.add_argument("--max-height", type=int, default=5)
    sp.add_argument("--budget", type=int, default=eq.DEFAULT_BUDGET)
    sp.add_argument("--canonical", action="store_true",
                    help="exact comparison of canonical forms (same look-ahead only)")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_ERROR if e.code else EXIT_OK
    try:
        report, code = args.fn(args)
    except (_UsageError, DtopError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR
    text = report.porcelain() if args.porcelain else report.human()
    if text:
        print(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
