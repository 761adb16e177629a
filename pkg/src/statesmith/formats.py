"""Text formats: target specs, plans, circuits, and report tables.

Target spec grammar (one item per line, '#' comments allowed):

    n = 4
    mode = symmetric            # or general
    a0 = 0.5                    # symmetric coefficient a_k, real or "re,im"
    a1 = 0.25,-0.1
    ...
    M = 1                       # general mode only
    c0 = 0.25                   # general coefficient c_k
    0010 1 +                    # general class table rows: bitstring k sign

Bitstrings are written X_n..X_1 (leftmost character is the highest main
qubit).  Plan files carry angles as hexadecimal floats so runs are
bit-reproducible; circuit files use "GATE q[,q[,q]][,angle]" lines with
angles at 17 significant digits.
"""

from __future__ import annotations

import json
import math

from .circuits import Gate, GateCircuit, RegisterLayout, gate_count
from .classes import GeneralClassSpec, SymmetricTarget
from .errors import SpecFormatError
from .planner import ClassPhases, PiFlip, Plan, RdrMerge, RpiD

PLAN_HEADER = "# statesmith plan v1"
CIRCUIT_HEADER = "# statesmith circuit v1"


def _parse_complex(text: str, line_no: int) -> complex:
    parts = text.split(",")
    try:
        if len(parts) == 1:
            return complex(float(parts[0]), 0.0)
        if len(parts) == 2:
            return complex(float(parts[0]), float(parts[1]))
    except ValueError:
        pass
    raise SpecFormatError(f"bad coefficient {text!r} (want 're' or 're,im')", line_no)


def parse_target_spec(text: str):
    """Parse a target-spec file body into a SymmetricTarget or GeneralClassSpec."""
    keys: dict[str, tuple[str, int]] = {}
    table_rows: list[tuple[str, int, int, int]] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" in line:
            key, _, value = line.partition("=")
            key, value = key.strip(), value.strip()
            if not key or not value:
                raise SpecFormatError(f"malformed assignment {raw.strip()!r}", line_no)
            if key in keys:
                raise SpecFormatError(f"duplicate key {key!r}", line_no)
            keys[key] = (value, line_no)
            continue
        tokens = line.split()
        if len(tokens) == 3:
            bits, k_text, sign_text = tokens
            if set(bits) - {"0", "1"}:
                raise SpecFormatError(f"bad bitstring {bits!r}", line_no)
            if sign_text not in ("+", "-"):
                raise SpecFormatError(f"bad sign {sign_text!r} (want + or -)", line_no)
            try:
                k = int(k_text)
            except ValueError:
                raise SpecFormatError(f"bad class index {k_text!r}", line_no) from None
            table_rows.append((bits, k, 1 if sign_text == "+" else -1, line_no))
            continue
        raise SpecFormatError(f"unrecognized line {raw.strip()!r}", line_no)

    def take_int(key):
        if key not in keys:
            raise SpecFormatError(f"missing required key {key!r}")
        value, line_no = keys.pop(key)
        try:
            return int(value)
        except ValueError:
            raise SpecFormatError(f"{key} must be an integer, got {value!r}", line_no) from None

    n = take_int("n")
    if "mode" not in keys:
        raise SpecFormatError("missing required key 'mode'")
    mode, mode_line = keys.pop("mode")
    if mode not in ("symmetric", "general"):
        raise SpecFormatError(f"mode must be symmetric or general, got {mode!r}", mode_line)

    if mode == "symmetric":
        if table_rows:
            raise SpecFormatError("class table rows only belong in general mode", table_rows[0][3])
        coeffs = []
        for k in range(n // 2 + 1):
            if f"a{k}" not in keys:
                raise SpecFormatError(f"missing coefficient a{k}")
            value, line_no = keys.pop(f"a{k}")
            coeffs.append(_parse_complex(value, line_no))
        if keys:
            key, (_, line_no) = next(iter(keys.items()))
            raise SpecFormatError(f"unexpected key {key!r}", line_no)
        try:
            return SymmetricTarget(n, tuple(coeffs))
        except ValueError as exc:
            raise SpecFormatError(str(exc)) from exc

    m_classes = take_int("M")
    coeffs = []
    for k in range(m_classes + 1):
        if f"c{k}" not in keys:
            raise SpecFormatError(f"missing coefficient c{k}")
        value, line_no = keys.pop(f"c{k}")
        coeffs.append(_parse_complex(value, line_no))
    if keys:
        key, (_, line_no) = next(iter(keys.items()))
        raise SpecFormatError(f"unexpected key {key!r}", line_no)
    table: list[tuple[int, int] | None] = [None] * (1 << n)
    for bits, k, sign, line_no in table_rows:
        if len(bits) != n:
            raise SpecFormatError(f"bitstring {bits!r} is not {n} bits", line_no)
        x = int(bits, 2)
        if table[x] is not None:
            raise SpecFormatError(f"duplicate table row for {bits!r}", line_no)
        table[x] = (k, sign)
    missing = [x for x, entry in enumerate(table) if entry is None]
    if missing:
        raise SpecFormatError(f"table is missing {len(missing)} strings (first: {missing[0]:0{n}b})")
    try:
        return GeneralClassSpec(n, m_classes, tuple(coeffs), tuple(table))
    except ValueError as exc:
        raise SpecFormatError(str(exc)) from exc


def format_target_spec(target) -> str:
    """Render a target back into spec-file text."""

    def fmt(z: complex) -> str:
        if z.imag == 0:
            return f"{z.real:.17g}"
        return f"{z.real:.17g},{z.imag:.17g}"

    lines = [f"n = {target.n}"]
    if isinstance(target, SymmetricTarget):
        lines.append("mode = symmetric")
        lines += [f"a{k} = {fmt(a)}" for k, a in enumerate(target.coeffs)]
    else:
        lines.append("mode = general")
        lines.append(f"M = {target.M}")
        lines += [f"c{k} = {fmt(c)}" for k, c in enumerate(target.coeffs)]
        lines += [
            f"{x:0{target.n}b} {k} {'+' if s > 0 else '-'}"
            for x, (k, s) in enumerate(target.table)
        ]
    return "\n".join(lines) + "\n"


def _cid_text(cid) -> str:
    return ",".join(str(k) for k in sorted(cid))


def _cid_parse(text: str):
    return frozenset(int(tok) for tok in text.split(","))


def _cids_text(cids) -> str:
    return "|".join(_cid_text(c) for c in cids)


def _cids_parse(text: str):
    if not text:
        return ()
    return tuple(_cid_parse(tok) for tok in text.split("|"))


def format_plan(plan: Plan) -> str:
    """Serialize a plan; angles as hexadecimal floats for bit-reproducibility."""
    lines = [PLAN_HEADER, f"n = {plan.n}", f"mode = {plan.mode}", f"direction = {plan.direction}"]
    if plan.mode == "general":
        lines.append(f"M = {plan.general.M}")
    for step in plan.steps:
        if isinstance(step, RdrMerge):
            lines.append(
                "step rdr"
                f" lo={_cid_text(step.lo)} hi={_cid_text(step.hi)}"
                f" theta={step.theta.hex()} phi={step.phi.hex()}"
                f" flips={_cids_text(step.flips)}"
            )
        elif isinstance(step, RpiD):
            lines.append(f"step rpid flips={_cids_text(step.flips)}")
        elif isinstance(step, PiFlip):
            lines.append(f"step piflip classes={_cids_text(step.classes)}")
        elif isinstance(step, ClassPhases):
            body = "|".join(f"{_cid_text(cid)}:{ang.hex()}" for cid, ang in step.phases)
            lines.append(f"step classphase phases={body}")
        else:
            raise TypeError(f"unknown plan step {step!r}")
    if plan.mode == "general":
        lines += [
            f"{x:0{plan.n}b} {k} {'+' if s > 0 else '-'}"
            for x, (k, s) in enumerate(plan.general.table)
        ]
    return "\n".join(lines) + "\n"


def parse_plan(text: str) -> Plan:
    lines = text.splitlines()
    if not lines or lines[0].strip() != PLAN_HEADER:
        raise SpecFormatError("not a statesmith plan file", 1)
    keys: dict[str, str] = {}
    steps = []
    table_rows = []
    for line_no, raw in enumerate(lines[1:], start=2):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("step "):
            steps.append(_parse_step(line, line_no))
            continue
        if "=" in line:
            key, _, value = line.partition("=")
            keys[key.strip()] = value.strip()
            continue
        tokens = line.split()
        if len(tokens) == 3:
            table_rows.append((tokens, line_no))
            continue
        raise SpecFormatError(f"unrecognized line {raw.strip()!r}", line_no)
    try:
        n = int(keys["n"])
        mode = keys["mode"]
        direction = keys["direction"]
    except KeyError as exc:
        raise SpecFormatError(f"missing plan header key {exc}") from exc
    general = None
    if mode == "general":
        m_classes = int(keys["M"])
        table: list[tuple[int, int] | None] = [None] * (1 << n)
        for (bits, k_text, sign_text), line_no in table_rows:
            table[int(bits, 2)] = (int(k_text), 1 if sign_text == "+" else -1)
        if any(entry is None for entry in table):
            raise SpecFormatError("general plan is missing class table rows")
        counts = [0] * (m_classes + 1)
        for k, s in table:
            if s > 0:
                counts[k] += 1
        total = 1 << n
        # rebuild a spec shell with placeholder coefficients of the right norm
        coeffs = []
        for k in range(m_classes + 1):
            lk = counts[k]
            coeffs.append(math.sqrt(1.0 / (2 * lk * (m_classes + 1))) if lk else 0.0)
        norm = sum(2 * counts[k] * abs(c) ** 2 for k, c in enumerate(coeffs))
        coeffs = [c / math.sqrt(norm) for c in coeffs]
        general = GeneralClassSpec(n, m_classes, tuple(coeffs), tuple(table))
        assert sum(2 * counts[k] for k in range(m_classes + 1)) == total
    plan = Plan(n=n, mode=mode, direction=direction, steps=steps, general=general)
    return plan


def _parse_step(line: str, line_no: int):
    tokens = line.split()
    kind = tokens[1]
    fields = {}
    for tok in tokens[2:]:
        key, _, value = tok.partition("=")
        fields[key] = value
    try:
        if kind == "rdr":
            return RdrMerge(
                lo=_cid_parse(fields["lo"]),
                hi=_cid_parse(fields["hi"]),
                theta=float.fromhex(fields["theta"]),
                phi=float.fromhex(fields["phi"]),
                flips=_cids_parse(fields.get("flips", "")),
            )
        if kind == "rpid":
            return RpiD(flips=_cids_parse(fields["flips"]))
        if kind == "piflip":
            return PiFlip(classes=_cids_parse(fields["classes"]))
        if kind == "classphase":
            phases = []
            for tok in fields["phases"].split("|"):
                cid_text, _, ang_text = tok.rpartition(":")
                phases.append((_cid_parse(cid_text), float.fromhex(ang_text)))
            return ClassPhases(tuple(phases))
    except (KeyError, ValueError) as exc:
        raise SpecFormatError(f"bad step field: {exc}", line_no) from exc
    raise SpecFormatError(f"unknown step kind {kind!r}", line_no)


def format_trace(plan: Plan) -> str:
    """Human-readable class snapshots alongside each plan step."""
    lines = ["# statesmith trace v1", f"# n = {plan.n} mode = {plan.mode} direction = {plan.direction}"]

    def state_text(state):
        parts = [
            f"{{{_cid_text(c.labels)}}} value={c.value:.12g} mult={c.multiplicity}"
            + (" flip" if c.needs_flip else "")
            for c in state.classes
        ]
        return "; ".join(parts)

    if plan.trace:
        lines.append(f"state 0: {state_text(plan.trace[0])}")
    for i, step in enumerate(plan.steps, start=1):
        lines.append(f"step {i}: {type(step).__name__}")
        if i < len(plan.trace):
            lines.append(f"state {i}: {state_text(plan.trace[i])}")
    return "\n".join(lines) + "\n"


def format_circuit(circuit: GateCircuit, plan_summary: dict | None = None) -> str:
    """Serialize a circuit: header comments, then one gate per line."""
    layout = circuit.layout
    lines = [
        CIRCUIT_HEADER,
        f"# n = {layout.n_main}",
        f"# m = {layout.m_sum}",
        f"# qubits = {layout.total}",
        f"# global_phase_pi = {circuit.global_phase_pi % 2}",
    ]
    if plan_summary:
        for key in sorted(plan_summary):
            lines.append(f"# {key} = {plan_summary[key]}")
    for g in circuit.ops:
        qubits = ",".join(str(q) for q in g.qubits)
        if g.angle is None:
            lines.append(f"{g.name} {qubits}")
        else:
            lines.append(f"{g.name} {qubits},{g.angle:.17g}")
    return "\n".join(lines) + "\n"


def parse_circuit(text: str) -> GateCircuit:
    lines = text.splitlines()
    if not lines or lines[0].strip() != CIRCUIT_HEADER:
        raise SpecFormatError("not a statesmith circuit file", 1)
    header: dict[str, str] = {}
    ops = []
    for line_no, raw in enumerate(lines[1:], start=2):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line.lstrip("#").strip()
            if "=" in body:
                key, _, value = body.partition("=")
                header[key.strip()] = value.strip()
            continue
        try:
            name, _, rest = line.partition(" ")
            parts = rest.split(",")
            arity = {"H": 1, "X": 1, "RZ": 1, "CX": 2, "CCX": 3}[name]
            qubits = tuple(int(p) for p in parts[:arity])
            angle = float(parts[arity]) if len(parts) > arity else None
            ops.append(Gate(name, qubits, angle))
        except (KeyError, ValueError, IndexError) as exc:
            raise SpecFormatError(f"bad gate line {line!r}: {exc}", line_no) from exc
    try:
        n_main = int(header["n"])
        m_sum = int(header["m"])
        phase_pi = int(header.get("global_phase_pi", "0"))
    except (KeyError, ValueError) as exc:
        raise SpecFormatError(f"bad circuit header: {exc}") from exc
    circuit = GateCircuit(RegisterLayout(n_main, m_sum), ops, global_phase_pi=phase_pi)
    circuit.header = header  # plan summary and friends ride along
    return circuit


def audit_table(circuit: GateCircuit) -> dict:
    """Machine-readable gate-count audit: totals plus per-block formula checks."""
    rows = []
    for kind, count, expected in circuit.blocks:
        rows.append(
            {
                "kind": kind,
                "count": count,
                "expected": expected,
                "match": (count == expected) if expected is not None else None,
            }
        )
    return {
        "n": circuit.layout.n_main,
        "m": circuit.layout.m_sum,
        "qubits": circuit.layout.total,
        "tallies": gate_count(circuit),
        "blocks": rows,
    }


def format_audit(circuit: GateCircuit) -> str:
    return json.dumps(audit_table(circuit), indent=2) + "\n"
