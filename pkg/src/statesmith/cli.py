"""Batch front door: plan, compile, and verify target specs.

Exit codes: 0 success, 1 verification failure, 2 input error, 3 budget or
cap exceeded.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import formats
from .circuits import compile_plan
from .classes import GeneralClassSpec, NotNormalized
from .errors import (
    IterationBudgetExceeded,
    QubitCapExceeded,
    SpecFormatError,
    StateSmithError,
)
from .planner import default_rpid_budget, plan_reduce, reverse_plan
from .simulator import (
    DEFAULT_QUBIT_CAP,
    Statevector,
    dump_amplitudes,
    fidelity,
    general_target_vector,
    run_circuit,
    symmetric_target_vector,
)

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_INPUT_ERROR = 2
EXIT_BUDGET_EXCEEDED = 3


def _read_target(path: Path):
    try:
        return formats.parse_target_spec(path.read_text())
    except OSError as exc:
        raise SpecFormatError(f"cannot read {path}: {exc}") from exc


def cmd_plan(args) -> int:
    spec_path = Path(args.spec)
    target = _read_target(spec_path)
    reduce_plan = plan_reduce(target, max_rpid=args.max_rpid)
    build_plan = reverse_plan(reduce_plan)

    out_dir = Path(args.out_dir) if args.out_dir else spec_path.parent
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = spec_path.stem
    reduce_path = out_dir / f"{stem}.reduce.plan"
    build_path = out_dir / f"{stem}.build.plan"
    trace_path = out_dir / f"{stem}.trace.txt"
    reduce_path.write_text(formats.format_plan(reduce_plan))
    build_path.write_text(formats.format_plan(build_plan))
    trace_path.write_text(formats.format_trace(reduce_plan))

    counts = reduce_plan.step_counts()
    print(
        f"planned {stem}: {counts['rdr']} merge, {counts['rpid']} balancing,"
        f" {counts['piflip']} pi-flip, {counts['classphase']} phase steps"
    )
    print(f"wrote {reduce_path}, {build_path}, {trace_path}")
    return EXIT_OK


def cmd_compile(args) -> int:
    plan_path = Path(args.plan)
    plan = formats.parse_plan(plan_path.read_text())
    if plan.direction != "build":
        raise SpecFormatError(f"{plan_path} is a {plan.direction}-direction plan; compile wants build")
    circuit = compile_plan(plan)
    counts = plan.step_counts()
    summary = {"rdr_steps": counts["rdr"], "rpid_steps": counts["rpid"]}

    out_path = Path(args.output) if args.output else plan_path.with_suffix(".circuit")
    out_path.write_text(formats.format_circuit(circuit, summary))
    audit = formats.audit_table(circuit)
    if args.audit:
        Path(args.audit).write_text(json.dumps(audit, indent=2) + "\n")
    print(f"compiled {plan_path.name}: {audit['tallies']['total']} gates on {audit['qubits']} qubits")
    print(f"wrote {out_path}" + (f", {args.audit}" if args.audit else ""))
    return EXIT_OK


def cmd_verify(args) -> int:
    spec_path = Path(args.spec)
    target = _read_target(spec_path)
    circuit = formats.parse_circuit(Path(args.circuit).read_text())
    if circuit.layout.n_main != target.n:
        raise SpecFormatError(
            f"circuit has {circuit.layout.n_main} main qubits, target has {target.n}"
        )
    if circuit.layout.total > args.qubit_cap:
        raise QubitCapExceeded(
            f"{circuit.layout.total} qubits exceeds the cap of {args.qubit_cap}"
        )

    start = time.perf_counter()
    state = Statevector.zero(circuit.layout.total, cap=args.qubit_cap)
    run_circuit(state, circuit)
    if isinstance(target, GeneralClassSpec):
        want = general_target_vector(target)
    else:
        want = symmetric_target_vector(target)
    report = fidelity(state, want, target.n)
    elapsed = time.perf_counter() - start

    if args.dump_amps:
        with open(args.dump_amps, "w") as fh:
            dump_amplitudes(state, fh)

    passed = report.fidelity >= args.fidelity_threshold
    header = getattr(circuit, "header", {})
    run_report = {
        "target_digest": hashlib.sha256(spec_path.read_bytes()).hexdigest(),
        "n": target.n,
        "qubits": circuit.layout.total,
        "plan_summary": {
            key: int(header[key]) for key in ("rdr_steps", "rpid_steps") if key in header
        },
        "gate_tallies": formats.audit_table(circuit)["tallies"],
        "fidelity": report.fidelity,
        "ancilla_leakage": report.leakage,
        "fidelity_threshold": args.fidelity_threshold,
        "passed": bool(passed),
        "wall_time_s": elapsed,
    }
    text = json.dumps(run_report, indent=2)
    if args.report:
        Path(args.report).write_text(text + "\n")
    print(text)
    return EXIT_OK if passed else EXIT_VERIFY_FAILED


def cmd_gen(args) -> int:
    """Emit a random normalized symmetric target spec (test-data helper)."""
    from .classes import SymmetricTarget, weight_multiplicity

    rng = np.random.default_rng(args.seed)
    n = args.n
    count = n // 2 + 1
    if args.complex:
        raw = rng.normal(size=count) + 1j * rng.normal(size=count)
    else:
        raw = np.abs(rng.normal(size=count))
    mults = np.array([weight_multiplicity(n, k) for k in range(count)])
    raw = raw / np.sqrt(np.sum(mults * np.abs(raw) ** 2))
    target = SymmetricTarget(n, tuple(raw))
    text = formats.format_target_spec(target)
    if args.output:
        Path(args.output).write_text(text)
        print(f"wrote {args.output}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="statesmith",
        description="Compile symmetric entangled target states into gate circuits and verify them.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_plan = sub.add_parser("plan", help="solve a target spec into reduce/build plans")
    p_plan.add_argument("spec", help="target spec file")
    p_plan.add_argument("-o", "--out-dir", help="output directory (default: beside the spec)")
    p_plan.add_argument(
        "--max-rpid",
        type=int,
        default=None,
        help="cap on balancing iterations (default: ceil(4*n*2^(n/2)))",
    )
    p_plan.set_defaults(func=cmd_plan)

    p_compile = sub.add_parser("compile", help="lower a build plan to a gate circuit")
    p_compile.add_argument("plan", help="build-direction plan file")
    p_compile.add_argument("-o", "--output", help="circuit file (default: <plan>.circuit)")
    p_compile.add_argument("--audit", help="write the gate-count audit JSON here")
    p_compile.set_defaults(func=cmd_compile)

    p_verify = sub.add_parser("verify", help="simulate a circuit against its target spec")
    p_verify.add_argument("spec", help="target spec file")
    p_verify.add_argument("circuit", help="circuit file")
    p_verify.add_argument(
        "--fidelity-threshold", type=float, default=1 - 1e-8, help="pass/fail cutoff"
    )
    p_verify.add_argument("--qubit-cap", type=int, default=DEFAULT_QUBIT_CAP)
    p_verify.add_argument("--dump-amps", help="write index/real/imag amplitude dump here")
    p_verify.add_argument("--report", help="write the run report JSON here")
    p_verify.set_defaults(func=cmd_verify)

    p_gen = sub.add_parser("gen", help="generate a random normalized symmetric target spec")
    p_gen.add_argument("n", type=int)
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--complex", action="store_true", help="draw complex coefficients")
    p_gen.add_argument("-o", "--output")
    p_gen.set_defaults(func=cmd_gen)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (IterationBudgetExceeded, QubitCapExceeded) as exc:
        bound_note = ""
        if isinstance(exc, IterationBudgetExceeded):
            bound_note = " (balancing iterations scale as O(n * 2^(n/2)) in the worst case)"
        print(f"error: {exc}{bound_note}", file=sys.stderr)
        return EXIT_BUDGET_EXCEEDED
    except (SpecFormatError, NotNormalized, StateSmithError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
