"""Command-line front end: ``advised-automata <command> ...``.

Every command prints one JSON document on stdout. Exit status is 0 on
success, 1 on domain errors (invalid machine, failed precondition, negative
synthesis result) and 2 on schema or usage errors.
"""

from __future__ import annotations

import argparse
import sys

from . import analysis, formats, synthesis, transforms, zoo
from .advice import (AdviceError, DeterministicAdvice, QuantumAdvice, RandomizedAdvice,
                     classify, run_with_advice)
from .formats import SchemaError
from .machines import Dfa, MachineError, Qfa, qfa_validate, rfa_check, run_machine
from .rewritable import RewritableQfa, TensorRqfa, rqfa_run, rqfa_validate

EXIT_OK, EXIT_DOMAIN, EXIT_SCHEMA = 0, 1, 2

PASSES = ("drop-right-endmarker", "drop-left-endmarker", "defer-measure", "amplify", "product",
          "complement", "union", "rand-to-quantum", "quantum-to-rand", "lift-dfa")


class DomainFailure(Exception):
    """A well-formed request whose answer is negative; carries the JSON payload."""

    def __init__(self, payload):
        super().__init__(str(payload))
        self.payload = payload


def _emit(obj) -> None:
    sys.stdout.write(formats.dumps(obj) + "\n")


def _machine(path):
    return formats.machine_from_json(formats.load_json(path))


def _advice(path):
    return formats.advice_from_json(formats.load_json(path)) if path else None


def _input_word(text: str, sep: str | None) -> tuple:
    if sep:
        return tuple(s for s in text.split(sep) if s) if text else ()
    return tuple(text)


def _lengths(max_n: int) -> range:
    return range(max_n + 1)


# --------------------------------------------------------------------------
# commands


def cmd_validate(args) -> int:
    data = formats.load_json(args.machine)
    try:
        m = formats.machine_from_json(data)
    except MachineError as exc:
        _emit({"valid": False, "defects": [str(exc)]})
        return EXIT_DOMAIN
    if isinstance(m, Qfa):
        defects = qfa_validate(m)
    elif isinstance(m, RewritableQfa):
        defects = rqfa_validate(m)
    elif isinstance(m, Dfa) and data.get("kind") == "rfa":
        defects = [f"reversibility: {s!r} maps {list(src)} to {t!r}" for t, s, src in rfa_check(m)]
    else:
        defects = []
    report = {"valid": not defects, "defects": defects, "kind": data["kind"]}
    if args.advice:
        a = _advice(args.advice)
        try:
            for n in _lengths(args.max_n):
                a.at(n)
        except AdviceError as exc:
            report["valid"] = False
            report["defects"].append(f"advice: {exc}")
    _emit(report)
    return EXIT_OK if report["valid"] else EXIT_DOMAIN


def cmd_run(args) -> int:
    m = _machine(args.machine)
    a = _advice(args.advice)
    x = _input_word(args.input, args.sep)
    if isinstance(m, (RewritableQfa, TensorRqfa)):
        if not isinstance(a, QuantumAdvice):
            raise AdviceError("rewritable machines need quantum advice")
        out = rqfa_run(m, x, a)
    elif a is None:
        out = run_machine(m, x)
    else:
        out = run_with_advice(m, a, x)
    report = out.as_dict()
    if args.epsilon is not None:
        report["verdict"] = classify(out, args.epsilon)
    _emit(report)
    return EXIT_OK


def _write_pair(args, m, a) -> dict:
    formats.write_json(args.out, formats.machine_to_json(m))
    written = {"machine": args.out}
    if a is not None:
        if not args.advice_out:
            raise SchemaError("this pass produces advice; pass --advice-out")
        lengths = None if a.table is not None or a.builtin is not None else _lengths(args.max_n)
        formats.write_json(args.advice_out, formats.advice_to_json(a, lengths))
        written["advice"] = args.advice_out
    return written


def cmd_transform(args) -> int:
    p = args.pass_name
    if p in ("rand-to-quantum", "quantum-to-rand"):
        a = _advice(args.advice)
        if p == "rand-to-quantum":
            if not isinstance(a, RandomizedAdvice):
                raise AdviceError("rand-to-quantum needs randomized advice")
            out = transforms.randomized_to_quantum(a)
        else:
            if not isinstance(a, QuantumAdvice):
                raise AdviceError("quantum-to-rand needs quantum advice")
            out = transforms.quantum_to_randomized(a)
        target = args.advice_out or args.out
        formats.write_json(target, formats.advice_to_json(out, _lengths(args.max_n)))
        _emit({"pass": p, "written": {"advice": target}})
        return EXIT_OK

    m = _machine(args.machine)
    a = _advice(args.advice)
    new_a = None
    if p == "drop-right-endmarker":
        if not isinstance(a, DeterministicAdvice):
            raise AdviceError("drop-right-endmarker needs deterministic advice")
        new_m, new_a = transforms.drop_right_endmarker(m, a)
    elif p == "drop-left-endmarker":
        new_m = transforms.drop_left_endmarker(m)
    elif p == "defer-measure":
        new_m, new_a = transforms.defer_measurement(m, a)
    elif p == "amplify":
        new_m, new_a = transforms.amplify(m, a, args.eps0, args.eps)
    elif p == "lift-dfa":
        if not isinstance(a, RandomizedAdvice):
            raise AdviceError("lift-dfa needs randomized advice")
        new_m, new_a = transforms.lift_dfa_to_rqfa(m, a)
    elif p == "complement":
        new_m = transforms.rqfa_complement(m)
    else:  # product / union
        if not args.machine2:
            raise SchemaError(f"{p} needs --machine2")
        m2 = _machine(args.machine2)
        new_m = (transforms.rqfa_product if p == "product" else transforms.rqfa_union)(m, m2)
        if a is not None and args.advice2:
            new_a = transforms.tensor_advice(a, _advice(args.advice2))
    _emit({"pass": p, "written": _write_pair(args, new_m, new_a)})
    return EXIT_OK


def cmd_analyze(args) -> int:
    if args.what == "norms":
        dims = range(args.dims[0], args.dims[1] + 1)
        lens = range(args.lens[0], args.lens[1] + 1)
        report = analysis.norm_property_suite(dims, lens, args.trials, args.seed)
        _emit(report)
        return EXIT_OK
    m = _machine(args.machine)
    h = _advice(args.advice)
    if not isinstance(m, Qfa) or not isinstance(h, DeterministicAdvice):
        raise AdviceError("analyze thm1 needs a qfa machine and deterministic advice")
    rep = analysis.compute_relations(m, h, args.epsilon, args.mu, args.max_n, args.d_bound)
    verdicts = analysis.check_conditions(rep)
    _emit({"summary": rep.summary(), "verdicts": verdicts})
    return EXIT_OK


def _oracle(spec: str, horizon: int) -> synthesis.LanguageOracle:
    if spec.startswith("builtin:"):
        return synthesis.LanguageOracle.builtin(spec.split(":", 1)[1], horizon)
    data = formats.load_json(spec)
    if "builtin" in data:
        return synthesis.LanguageOracle.builtin(data["builtin"], horizon)
    alphabet = data.get("alphabet")
    table = data.get("table")
    if not isinstance(alphabet, list) or not isinstance(table, dict):
        raise SchemaError("oracle file needs 'builtin' or both 'alphabet' and 'table'")
    return synthesis.LanguageOracle.from_table(alphabet, table, horizon)


def cmd_synthesize(args) -> int:
    oracle = _oracle(args.oracle, args.horizon)
    table = synthesis.build_classes(oracle, args.horizon)
    cex = synthesis.check_condition_a(table)
    if cex is not None:
        x, y, sigma, n = cex
        raise DomainFailure({
            "status": "counterexample", "x": x, "y": y, "sigma": sigma, "n": n,
            "validated": synthesis.validate_counterexample(oracle, cex),
            "classes": table.summary()})
    res = synthesis.synthesize_rfa(table)
    report = {"status": "ok", "states": len(res.machine.states),
              "advice_symbols": len(res.advice.alphabet), "classes": table.summary(),
              "mismatches": synthesis.agrees_with(res.machine, res.advice, oracle,
                                                  oracle.alphabet, args.horizon)}
    if args.out:
        data = formats.machine_to_json(res.machine)
        data["kind"] = "rfa"
        formats.write_json(args.out, data)
        report["machine"] = args.out
    if args.advice_out:
        formats.write_json(args.advice_out, formats.advice_to_json(res.advice))
        report["advice"] = args.advice_out
    _emit(report)
    return EXIT_OK


def cmd_fixtures(args) -> int:
    if not args.name:
        _emit({"fixtures": list(zoo.FIXTURES), "languages": sorted(zoo.LANGUAGES)})
        return EXIT_OK
    members = None
    if args.members:
        members = formats.load_json(args.members)
        members = {int(k): v for k, v in members.items()}
    fx = zoo.fixture(args.name, members)
    written = {}
    if args.out:
        formats.write_json(args.out, formats.machine_to_json(fx.machine))
        written["machine"] = args.out
    if args.advice_out:
        a = fx.advice
        lengths = None if a.table is not None or a.builtin is not None else _lengths(args.max_n)
        formats.write_json(args.advice_out, formats.advice_to_json(a, lengths))
        written["advice"] = args.advice_out
    _emit({"fixture": fx.name, "language": fx.language, "written": written})
    return EXIT_OK


# --------------------------------------------------------------------------
# parser


def _pair(text: str) -> tuple[int, int]:
    try:
        lo, hi = (int(v) for v in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError("expected LO,HI") from exc
    return lo, hi


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="advised-automata",
                                description="Simulate and analyze finite automata with advice.")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("validate", help="structural checks of a machine (and advice)")
    v.add_argument("--machine", required=True)
    v.add_argument("--advice")
    v.add_argument("--max-n", type=int, default=6, help="advice lengths to check")
    v.set_defaults(func=cmd_validate)

    r = sub.add_parser("run", help="acceptance/rejection probabilities on one input")
    r.add_argument("--machine", required=True)
    r.add_argument("--advice")
    r.add_argument("--input", required=True, default="")
    r.add_argument("--sep", help="symbol separator (default: one character per symbol)")
    r.add_argument("--epsilon", type=float)
    r.set_defaults(func=cmd_run)

    t = sub.add_parser("transform", help="apply a machine/advice transformation")
    t.add_argument("pass_name", choices=PASSES)
    t.add_argument("--machine")
    t.add_argument("--machine2")
    t.add_argument("--advice")
    t.add_argument("--advice2")
    t.add_argument("--out")
    t.add_argument("--advice-out")
    t.add_argument("--eps0", type=float, default=0.25)
    t.add_argument("--eps", type=float, default=0.1)
    t.add_argument("--max-n", type=int, default=6, help="lengths written for generated advice")
    t.set_defaults(func=cmd_transform)

    a = sub.add_parser("analyze", help="bounded checks of closeness conditions / norm suite")
    a.add_argument("what", choices=("thm1", "norms"))
    a.add_argument("--machine")
    a.add_argument("--advice")
    a.add_argument("--epsilon", type=float, default=0.0)
    a.add_argument("--mu", type=float, default=0.14)
    a.add_argument("--max-n", type=int, default=5)
    a.add_argument("--d-bound", type=int)
    a.add_argument("--trials", type=int, default=10_000)
    a.add_argument("--seed", type=int, default=0)
    a.add_argument("--dims", type=_pair, default=(2, 8))
    a.add_argument("--lens", type=_pair, default=(0, 6))
    a.set_defaults(func=cmd_analyze)

    s = sub.add_parser("synthesize", help="build a reversible automaton with advice")
    s.add_argument("what", choices=("rfa",))
    s.add_argument("--oracle", required=True, help="oracle JSON file or builtin:NAME")
    s.add_argument("--horizon", type=int, required=True)
    s.add_argument("--out")
    s.add_argument("--advice-out")
    s.set_defaults(func=cmd_synthesize)

    f = sub.add_parser("fixtures", help="list or export built-in fixtures")
    f.add_argument("--name")
    f.add_argument("--members", help="JSON length -> member list (for ALL)")
    f.add_argument("--out")
    f.add_argument("--advice-out")
    f.add_argument("--max-n", type=int, default=6, help="lengths written for generated advice")
    f.set_defaults(func=cmd_fixtures)
    return p


def _needs(args) -> None:
    required = {"transform": ("out",) if args.command == "transform" and args.pass_name not in
                ("rand-to-quantum", "quantum-to-rand") else (),
                "analyze": ("machine", "advice") if getattr(args, "what", "") == "thm1" else ()}
    for name in required.get(args.command, ()):
        if getattr(args, name, None) is None:
            raise SchemaError(f"--{name.replace('_', '-')} is required here")
    if args.command == "transform":
        p = args.pass_name
        if p in ("rand-to-quantum", "quantum-to-rand"):
            if not args.advice or not (args.advice_out or args.out):
                raise SchemaError("--advice and --advice-out are required here")
        elif not args.machine:
            raise SchemaError("--machine is required here")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        _needs(args)
        return args.func(args)
    except SchemaError as exc:
        _emit({"error": "schema", "message": str(exc)})
        return EXIT_SCHEMA
    except DomainFailure as exc:
        _emit(exc.payload)
        return EXIT_DOMAIN
    except (MachineError, AdviceError, analysis.AnalysisError, synthesis.SynthesisError,
            KeyError, ValueError) as exc:
        _emit({"error": "domain", "message": str(exc)})
        return EXIT_DOMAIN


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
