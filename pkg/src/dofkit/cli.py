"""Command-line front end.

Every command prints a human-readable section followed by ``# records`` and
one JSON object per line. ``--machine`` prints only the records. Exit codes:

    0  success
    1  scan found incoherent facts
    2  parse error or unreadable scan root
    3  invariant violation (cycles, forest/domain violations, lattice mismatch)
    4  unknown fact id
    5  unary value domain (no witness possible)
    6  invalid edit during simulation
    7  bounds argument outside the calculator's domain
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import bounds
from .dof import UNDEFINED, Regime, compute_dof, lattice_join, lattice_meet, minimal_dof1_extension
from .errors import (
    CapacityAchieving,
    ConfigParseError,
    DofkitError,
    EditStepError,
    InvariantViolation,
    LocationSetMismatch,
    ScanIoError,
    SpecSyntaxError,
    UnaryDomain,
    UnknownFact,
    ValueOutOfDomain,
)
from .scan import DEFAULT_EXTENSIONS, scan_directory
from .simulate import construct_incoherence_witness, random_edit_script, run_edit_sequence
from .specio import SystemSpec, parse_script, parse_spec, serialize_script, serialize_spec

EXIT_OK = 0
EXIT_INCOHERENT = 1
EXIT_PARSE = 2
EXIT_INVARIANT = 3
EXIT_UNKNOWN_FACT = 4
EXIT_UNARY = 5
EXIT_BAD_EDIT = 6
EXIT_DOMAIN = 7

RECORDS_MARKER = "# records"

REGIME_LABELS = {
    Regime.NOT_ENCODED: "not_encoded (fact not encoded)",
    Regime.OPTIMAL: "optimal (capacity-achieving)",
    Regime.ABOVE_CAPACITY: "above_capacity (incoherence reachable)",
}


def fmt(x: float) -> str:
    return f"{x:.6f}"


@dataclass
class Report:
    human: list[str] = field(default_factory=list)
    records: list[dict] = field(default_factory=list)
    code: int = EXIT_OK

    def say(self, line: str = "") -> None:
        self.human.append(line)

    def record(self, **fields) -> None:
        self.records.append(fields)

    def render(self, machine: bool) -> str:
        lines = [] if machine else [*self.human, RECORDS_MARKER]
        lines += [json.dumps(r, sort_keys=True, separators=(",", ":")) for r in self.records]
        return "\n".join(lines) + "\n" if lines else ""


def parse_records(text: str) -> list[dict]:
    """Extract the machine records from rendered output (with or without the human section)."""
    lines = text.splitlines()
    if RECORDS_MARKER in lines:
        lines = lines[lines.index(RECORDS_MARKER) + 1 :]
    return [json.loads(l) for l in lines if l.startswith("{")]


class CliError(Exception):
    def __init__(self, code: int, message: str) -> None:
        super().__init__(message)
        self.code = code


def _load_spec(path: str) -> SystemSpec:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(EXIT_PARSE, f"{path}: {exc.strerror or exc}") from exc
    try:
        return parse_spec(text)
    except SpecSyntaxError as exc:
        raise CliError(EXIT_PARSE, f"{path}: {type(exc).__name__}: {exc}") from exc
    except (InvariantViolation, ValueOutOfDomain, UnknownFact) as exc:
        raise CliError(EXIT_INVARIANT, f"{path}: {type(exc).__name__}: {exc}") from exc


def cmd_analyze(args: argparse.Namespace) -> Report:
    spec = _load_spec(args.spec)
    rep = Report()
    rep.say(f"system {spec.name}")
    for fact in spec.facts:
        dr = compute_dof(spec.graph.restrict(fact.id))
        rr = bounds.regime_report(spec.graph, fact)
        side = bounds.side_info_requirement(dr.dof) if dr.dof else None
        rep.say(f"fact {fact.id} domain {fact.domain_size}")
        rep.say(f"  dof: {dr.dof}")
        rep.say(f"  sources: {' '.join(dr.sources) if dr.sources else '-'}")
        rep.say(f"  redundancy: {dr.redundancy if dr.redundancy is not None else 'undefined'}")
        rep.say(f"  regime: {REGIME_LABELS[dr.regime]}")
        coherence = "undefined" if rr.coherence is None else rr.coherence
        rep.say(f"  rcp: R={rr.rate} C={rr.complexity} P={coherence}")
        rep.say(f"  pareto_optimal: {'yes' if rr.pareto_optimal else 'no'}")
        rep.say(f"  side_info_bits: {fmt(side) if side is not None else 'undefined'}")
        rep.record(
            fact=fact.id,
            domain_size=fact.domain_size,
            dof=dr.dof,
            sources=list(dr.sources),
            redundancy=dr.redundancy,
            regime=dr.regime.value,
            complexity=rr.complexity,
            coherence=rr.coherence,
            pareto_optimal=rr.pareto_optimal,
            side_info_bits=side,
        )
    return rep


def cmd_witness(args: argparse.Namespace) -> Report:
    spec = _load_spec(args.spec)
    try:
        fact = spec.fact(args.fact)
    except UnknownFact:
        raise CliError(EXIT_UNKNOWN_FACT, f"unknown fact {args.fact!r}") from None
    rep = Report()
    try:
        w = construct_incoherence_witness(spec.graph, fact, start=spec.state)
    except CapacityAchieving:
        dof = compute_dof(spec.graph.restrict(fact.id)).dof
        rep.say(f"capacity-achieving: no witness exists (fact {fact.id}, dof {dof})")
        rep.record(fact=fact.id, dof=dof, witness=None)
        return rep
    except UnaryDomain as exc:
        raise CliError(EXIT_UNARY, f"UnaryDomain: {exc}") from None
    dof = compute_dof(spec.graph.restrict(fact.id)).dof
    rep.say(f"# incoherence witness for fact {fact.id} (dof {dof})")
    rep.human += serialize_script(w.edits).splitlines()
    a, b = w.disagreeing_pair
    rep.say(f"# disagreeing pair: {a}={w.final_state.values[a]} {b}={w.final_state.values[b]}")
    rep.record(
        fact=fact.id,
        dof=dof,
        witness=[[e.target, e.new_value] for e in w.edits],
        disagreeing_pair=[a, b],
    )
    return rep


def cmd_simulate(args: argparse.Namespace) -> Report:
    spec = _load_spec(args.spec)
    if args.script:
        try:
            script = parse_script(Path(args.script).read_text(encoding="utf-8"))
        except OSError as exc:
            raise CliError(EXIT_PARSE, f"{args.script}: {exc.strerror or exc}") from exc
        except SpecSyntaxError as exc:
            raise CliError(EXIT_PARSE, f"{args.script}: {exc}") from exc
    elif args.random is not None:
        script = random_edit_script(random.Random(args.seed), spec.state, args.random)
    else:
        raise CliError(EXIT_PARSE, "simulate needs a script file or --random N")
    try:
        traj = run_edit_sequence(spec.state, script)
    except EditStepError as exc:
        raise CliError(EXIT_BAD_EDIT, f"invalid edit at step {exc.step}: {type(exc.cause).__name__}: {exc.cause}")
    rep = Report()
    rep.say(f"{'step':>4}  {'edit':<24} {'manual':>6}  coherent")
    for n, step in enumerate(traj.steps, start=1):
        flags = " ".join(f"{f}={'yes' if ok else 'no'}" for f, ok in step.coherent)
        edit = f"{step.edit.target} <- {step.edit.new_value}"
        rep.say(f"{n:>4}  {edit:<24} {step.manual_edits:>6}  {flags}")
        rep.record(
            step=n,
            target=step.edit.target,
            value=step.edit.new_value,
            manual_edits=step.manual_edits,
            coherent=dict(step.coherent),
        )
    final = {f: len(set(traj.final_state.values_of(f).values())) == 1 for f in spec.graph.facts}
    rep.say(f"manual_edits: {traj.manual_edits}")
    rep.say("final coherent: " + (" ".join(f"{f}={'yes' if ok else 'no'}" for f, ok in sorted(final.items())) or "-"))
    rep.record(summary=True, steps=len(traj.steps), manual_edits=traj.manual_edits, final_coherent=final)
    return rep


def cmd_extend(args: argparse.Namespace) -> Report:
    spec = _load_spec(args.spec)
    rep = Report()
    added: list[tuple[str, str]] = []
    for fact in spec.facts:
        sub = spec.graph.restrict(fact.id)
        if not sub.locations:
            continue
        edges = sorted(minimal_dof1_extension(sub), key=lambda e: (e[1], e[0]))
        before = compute_dof(sub).dof
        added += edges
        rep.record(fact=fact.id, dof_before=before, dof_after=1, added=[list(e) for e in edges])
    if not added:
        rep.say("no extension needed")
        return rep
    extended = spec.with_derivations(added)
    rep.say(f"# added derivations ({len(added)})")
    rep.human += [f"derive {d} from {s}" for s, d in added]
    rep.say("# extended spec")
    rep.human += serialize_spec(extended).splitlines()
    return rep


def cmd_bounds(args: argparse.Namespace) -> Report:
    rep = Report()
    try:
        if args.query == "fano":
            value = bounds.fano_min_error(bounds.FanoQuery(args.k, args.info))
            rep.say(f"fano_min_error(K={args.k}, I={fmt(args.info)}) = {fmt(value)}")
            rep.record(query="fano", k=args.k, info=args.info, value=value)
        elif args.query == "sideinfo":
            value = bounds.side_info_requirement(args.dof)
            rep.say(f"side_info_requirement(dof={args.dof}) = {fmt(value)}")
            rep.record(query="sideinfo", dof=args.dof, value=value)
        elif args.query == "compound":
            value = bounds.error_compounding(args.p, args.n)
            rep.say(f"error_compounding(p={fmt(args.p)}, n={args.n}) = {fmt(value)}")
            rep.record(query="compound", p=args.p, n=args.n, value=value)
        elif args.query == "amortize":
            value = bounds.amortized_cost(args.m, args.n, args.dof)
            rep.say(f"amortized_cost(m={args.m}, n={args.n}, dof={args.dof}) = {value}")
            rep.record(query="amortize", m=args.m, n=args.n, dof=args.dof, value=value)
        elif args.query == "clique":
            edges = _parse_edge_list(args.edges)
            value = bounds.confusability_required_bits(range(args.vertices), edges)
            rep.say(f"confusability_required_bits(|V|={args.vertices}, |E|={len(edges)}) = {fmt(value)}")
            rep.record(query="clique", vertices=args.vertices, edges=[list(e) for e in edges], value=value)
    except (ValueError, DofkitError) as exc:
        raise CliError(EXIT_DOMAIN, f"{type(exc).__name__}: {exc}") from None
    return rep


def _parse_edge_list(text: str) -> list[tuple[int, int]]:
    out = []
    for part in filter(None, (p.strip() for p in text.split(","))):
        a, sep, b = part.partition("-")
        if not sep:
            raise ValueError(f"edge {part!r} is not of the form u-v")
        out.append((int(a), int(b)))
    return out


def cmd_lattice(args: argparse.Namespace) -> Report:
    g1 = _load_spec(args.left).graph
    g2 = _load_spec(args.right).graph
    op = lattice_meet if args.op == "meet" else lattice_join
    try:
        result = op(g1, g2)
    except LocationSetMismatch as exc:
        raise CliError(EXIT_INVARIANT, f"LocationSetMismatch: {exc}") from None
    rep = Report()
    if result is UNDEFINED:
        rep.say("join undefined: the union of derivations is cyclic")
        rep.record(op=args.op, defined=False)
        return rep
    edges = sorted(result.edges, key=lambda e: (e[1], e[0]))
    rep.say(f"# {args.op}: {len(edges)} derivation edge(s)")
    rep.human += [f"derive {d} from {s}" for s, d in edges]
    dofs = {f: compute_dof(result.restrict(f)).dof for f in result.facts}
    rep.say("dof: " + " ".join(f"{f}={n}" for f, n in dofs.items()))
    rep.record(op=args.op, defined=True, edges=[list(e) for e in edges], dof=dofs)
    return rep


def cmd_scan(args: argparse.Namespace) -> Report:
    try:
        report = scan_directory(args.directory, args.ext or DEFAULT_EXTENSIONS, lenient=args.lenient)
    except ScanIoError as exc:
        raise CliError(EXIT_PARSE, f"IoError: {exc}") from None
    except ConfigParseError as exc:
        raise CliError(EXIT_PARSE, f"ParseError: {exc}") from None
    rep = Report()
    rep.say(f"scanned {len(report.files)} file(s) under {args.directory}")
    rep.say(f"assumption: {report.assumption}")
    for r in report.results:
        status = "coherent" if r.coherent else "incoherent"
        derived = [loc for loc in r.locations if loc.derived_from]
        if r.coherent and derived:
            status += " (by derivation)"
        rep.say(f"{r.key}: k={r.k} dof={r.dof} {status} side_info_bits={fmt(r.side_info_bits)}")
        for loc in r.locations:
            note = f" (derived from {loc.derived_from})" if loc.derived_from else ""
            rep.say(f"  {loc.path}:{loc.line} = {loc.value}{note}")
        for path in r.stale:
            rep.say(f"  stale derivation: {path}")
        rep.record(**r.record())
    for path, why in report.unparsed:
        rep.say(f"unparsed: {why}")
    rep.say(f"facts: {len(report.results)} incoherent: {len(report.incoherent)}")
    rep.record(
        summary=True,
        facts=len(report.results),
        incoherent=len(report.incoherent),
        unparsed=[p for p, _ in report.unparsed],
    )
    rep.code = EXIT_INCOHERENT if report.incoherent else EXIT_OK
    return rep


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--machine", action="store_true", default=argparse.SUPPRESS, help="print machine records only")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="seed for randomised commands")

    parser = argparse.ArgumentParser(prog="dofkit", description="Encoding-coherence analysis toolkit.")
    parser.add_argument("--machine", action="store_true", help="print machine records only")
    parser.add_argument("--seed", type=int, default=0, help="seed for randomised commands")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", parents=[common], help="DOF, regime and side-information report per fact")
    p.add_argument("spec")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("witness", parents=[common], help="two-edit incoherence witness for a fact")
    p.add_argument("spec")
    p.add_argument("fact")
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser("simulate", parents=[common], help="replay an edit script")
    p.add_argument("spec")
    p.add_argument("script", nargs="?")
    p.add_argument("--random", type=int, metavar="N", help="replay N seeded random edits instead of a script")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("extend", parents=[common], help="minimal derivations reaching dof 1")
    p.add_argument("spec")
    p.set_defaults(func=cmd_extend)

    p = sub.add_parser("bounds", parents=[common], help="information-theoretic calculators")
    bsub = p.add_subparsers(dest="query", required=True)
    q = bsub.add_parser("fano", parents=[common])
    q.add_argument("--k", type=int, required=True)
    q.add_argument("--info", type=float, required=True)
    q = bsub.add_parser("sideinfo", parents=[common])
    q.add_argument("--dof", type=int, required=True)
    q = bsub.add_parser("compound", parents=[common])
    q.add_argument("--p", type=float, required=True)
    q.add_argument("--n", type=int, required=True)
    q = bsub.add_parser("amortize", parents=[common])
    q.add_argument("--m", type=int, required=True)
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--dof", type=int, required=True)
    q = bsub.add_parser("clique", parents=[common])
    q.add_argument("--vertices", type=int, required=True)
    q.add_argument("--edges", default="", help="comma-separated u-v pairs over 0..vertices-1")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("scan", parents=[common], help="find keys encoded in several config files")
    p.add_argument("directory")
    p.add_argument("--ext", action="append", help="file extension to include (repeatable)")
    p.add_argument("--lenient", action="store_true", help="record unparsable files instead of failing")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("lattice", parents=[common], help="meet or join of two derivation relations")
    p.add_argument("op", choices=("meet", "join"))
    p.add_argument("left")
    p.add_argument("right")
    p.set_defaults(func=cmd_lattice)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        rep = args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    sys.stdout.write(rep.render(args.machine))
    return rep.code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
