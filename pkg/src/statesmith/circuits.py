"""Lower build plans to elementary one/two/three-qubit gate circuits.

Registers: the n main qubits hold the state; an m-qubit sum register
receives the class label of each basis string (Hamming weight in symmetric
mode), computed by a ripple-carry adder network; m-1 carry qubits serve
the adder; one kickback qubit, held at |0>, turns multi-controlled
Rz rotations into selective phase shifts on the sum register.

Every network restores the sum, carry, and kickback registers to |0> at
step boundaries.  The diffusion network realizes the negative of the
inversion-about-average operator; the compiler tracks the accumulated -1
as circuit metadata instead of spending gates on it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import NoIdleQubit, UnknownClass
from .planner import ClassPhases, PiFlip, Plan, RdrMerge, RpiD

GATE_ARITY = {"H": 1, "X": 1, "RZ": 1, "CX": 2, "CCX": 3}


@dataclass(frozen=True)
class Gate:
    """One elementary gate: H, X, RZ(angle), CX, or CCX on distinct qubits."""

    name: str
    qubits: tuple[int, ...]
    angle: float | None = None

    def __post_init__(self):
        if self.name not in GATE_ARITY:
            raise ValueError(f"unknown gate {self.name}")
        if len(self.qubits) != GATE_ARITY[self.name]:
            raise ValueError(f"{self.name} needs {GATE_ARITY[self.name]} qubits")
        if len(set(self.qubits)) != len(self.qubits):
            raise ValueError(f"{self.name} qubits must be distinct: {self.qubits}")
        if (self.angle is None) != (self.name != "RZ"):
            raise ValueError(f"angle is for RZ gates only, got {self}")


def _h(q):
    return Gate("H", (q,))


def _x(q):
    return Gate("X", (q,))


def _rz(q, angle):
    return Gate("RZ", (q,), float(angle))


def _cx(c, t):
    return Gate("CX", (c, t))


def _ccx(c1, c2, t):
    return Gate("CCX", (c1, c2, t))


@dataclass(frozen=True)
class RegisterLayout:
    """Qubit numbering: main 0..n-1 (X_1 is qubit 0), then sum S_0..S_{m-1},
    then carries C_1..C_{m-1}, then the kickback qubit."""

    n_main: int
    m_sum: int

    def __post_init__(self):
        if self.n_main < 1 or self.m_sum < 0:
            raise ValueError("need n_main >= 1 and m_sum >= 0")

    @classmethod
    def for_symmetric(cls, n: int) -> "RegisterLayout":
        return cls(n, n.bit_length())  # ceil(log2(n+1)) sum bits hold weights 0..n

    @classmethod
    def for_general(cls, n: int, M: int) -> "RegisterLayout":
        return cls(n, M.bit_length() + 1)  # ceil(log2(M+1)) label bits plus a sign bit

    @property
    def n_carry(self) -> int:
        return max(self.m_sum - 1, 0)

    @property
    def total(self) -> int:
        if self.m_sum == 0:
            return self.n_main
        return self.n_main + 2 * self.m_sum  # n + m + (m-1) carries + kickback

    def main(self, i: int) -> int:
        """Main qubit X_i, 1-based."""
        if not 1 <= i <= self.n_main:
            raise IndexError(f"main qubit {i} out of range")
        return i - 1

    def sum_q(self, j: int) -> int:
        """Sum qubit S_j, 0-based."""
        if not 0 <= j < self.m_sum:
            raise IndexError(f"sum qubit {j} out of range")
        return self.n_main + j

    def carry(self, j: int) -> int:
        """Carry qubit C_j, 1-based."""
        if not 1 <= j <= self.n_carry:
            raise IndexError(f"carry qubit {j} out of range")
        return self.n_main + self.m_sum + j - 1

    @property
    def kickback(self) -> int:
        if self.m_sum == 0:
            raise IndexError("main-only layout has no kickback qubit")
        return self.n_main + 2 * self.m_sum - 1


@dataclass
class GateCircuit:
    """An ordered gate list over a layout, with block-level count records."""

    layout: RegisterLayout
    ops: list = field(default_factory=list)
    global_phase_pi: int = 0  # state picks up (-1)**global_phase_pi
    blocks: list = field(default_factory=list)  # (kind, count, expected-or-None)

    @property
    def counts(self) -> dict[str, int]:
        return gate_count(self)

    def add_block(self, kind: str, ops, expected: int | None = None):
        self.ops.extend(ops)
        self.blocks.append((kind, len(ops), expected))


def gate_count(circuit: GateCircuit) -> dict[str, int]:
    """Tally gates per variant plus a grand total."""
    tally = {name: 0 for name in GATE_ARITY}
    for g in circuit.ops:
        tally[g.name] += 1
    tally["total"] = len(circuit.ops)
    return tally


# Count formulas for the counted constructions (valid at the stated sizes).


def adder1_formula(n: int) -> int:
    m = RegisterLayout.for_symmetric(n).m_sum
    return n * (3 * m - 2)


def lambda_rz_formula(n_controls: int) -> int:
    return 8 * (2 * n_controls - 7)  # n_controls >= 6


def selective_phase_formula(m: int) -> int:
    return 2 * (9 * m - 28)  # m >= 6, worst-case all-zero pattern


def d_network_formula(n: int) -> int:
    return 4 * (5 * n - 14)  # n >= 6


def build_ghz(n: int) -> GateCircuit:
    """Maximally entangled state: H on X_1, then CNOT fan-out to X_2..X_n."""
    if n < 2:
        raise ValueError("need n >= 2")
    layout = RegisterLayout(n, 0)
    circuit = GateCircuit(layout)
    ops = [_h(layout.main(1))]
    ops += [_cx(layout.main(1), layout.main(k)) for k in range(2, n + 1)]
    circuit.add_block("ghz", ops, expected=n)
    return circuit


def _vchain(controls, target, pool):
    """Toffoli ladder for an AND over >= 3 controls using len-2 borrowed
    (dirty) ancillas, each restored; 4*(k-2) Toffolis."""
    k = len(controls)
    anc = pool[: k - 2]
    if len(anc) < k - 2:
        raise NoIdleQubit(f"need {k - 2} borrowable qubits, have {len(pool)}")
    ladder = [_ccx(controls[0], controls[1], anc[0])]
    for j in range(1, k - 2):
        ladder.append(_ccx(controls[j + 1], anc[j - 1], anc[j]))
    ladder.append(_ccx(controls[k - 1], anc[k - 3], target))
    # down the ladder, bounce at the bottom, back up; twice over
    half = ladder[::-1] + ladder[1:-1]
    return half + half


def _lambda_x(total: int, controls, target):
    """Multi-controlled NOT from Toffolis, borrowing idle qubits as dirty
    ancillas.  Three or four controls use one ladder; five or more split
    into two alternating ladders around a borrowed qubit, which matches
    the published 8*(c-3) Toffoli count."""
    controls = list(controls)
    c = len(controls)
    if c == 0:
        return [_x(target)]
    if c == 1:
        return [_cx(controls[0], target)]
    if c == 2:
        return [_ccx(controls[0], controls[1], target)]
    free = sorted(set(range(total)) - set(controls) - {target})
    if c <= 4:
        if len(free) < c - 2:
            raise NoIdleQubit(f"need {c - 2} idle qubits for {c} controls")
        return _vchain(controls, target, free)
    if not free:
        raise NoIdleQubit(f"need an idle qubit for {c} controls")
    borrow = free[0]
    m1 = (c + 2) // 2
    lower, upper = controls[:m1], controls[m1:]
    pool1 = sorted(set(range(total)) - set(upper) - {borrow, target})
    inner1 = _vchain(upper + [borrow], target, pool1)
    pool2 = sorted(set(range(total)) - set(lower) - {borrow})
    inner2 = _vchain(lower, borrow, pool2)
    return inner1 + inner2 + inner1 + inner2


def _lambda_rz(total: int, controls, target, alpha: float):
    """Multi-controlled Rz(alpha), Rz(a) = diag(e^{ia/2}, e^{-ia/2}).

    For c >= 2 controls: two multi-controlled NOTs over the first c-1
    controls interleaved with singly-controlled Rz(-a/2) and Rz(+a/2) off
    the last control; a singly-controlled Rz is two CNOTs and two Rz.
    """
    controls = list(controls)
    c = len(controls)
    if c == 0:
        return [_rz(target, alpha)]
    if c == 1:
        ctl = controls[0]
        return [
            _rz(target, alpha / 2),
            _cx(ctl, target),
            _rz(target, -alpha / 2),
            _cx(ctl, target),
        ]
    lamx = _lambda_x(total, controls[:-1], target)
    return (
        lamx
        + _lambda_rz(total, [controls[-1]], target, -alpha / 2)
        + lamx
        + _lambda_rz(total, [controls[-1]], target, alpha / 2)
    )


def lambda_n_rz(layout: RegisterLayout, controls, target: int, alpha: float) -> GateCircuit:
    """Controlled-Rz over the given controls as a standalone circuit."""
    controls = list(controls)
    used = set(controls) | {target}
    if len(used) != len(controls) + 1 or any(not 0 <= q < layout.total for q in used):
        raise ValueError("controls and target must be distinct in-layout qubits")
    if len(controls) >= 2 and len(used) == layout.total:
        raise NoIdleQubit("decomposition needs a qubit outside controls and target")
    circuit = GateCircuit(layout)
    nc = len(controls)
    expected = lambda_rz_formula(nc) if nc >= 6 else None
    circuit.add_block("lambda_rz", _lambda_rz(layout.total, controls, target, alpha), expected)
    return circuit


def adder2(layout: RegisterLayout, x_index: int) -> GateCircuit:
    """Add main qubit X_k into the sum register mod 2^m (ripple carry)."""
    circuit = GateCircuit(layout)
    circuit.add_block("adder2", _adder2_ops(layout, x_index), expected=3 * layout.m_sum - 2)
    return circuit


def _adder2_ops(layout: RegisterLayout, k: int):
    m = layout.m_sum
    if m < 2:
        raise ValueError("adder needs a sum register of at least 2 qubits")
    xk = layout.main(k)
    s = [layout.sum_q(j) for j in range(m)]
    c = [None] + [layout.carry(j) for j in range(1, m)]  # 1-based carries
    ops = [_ccx(s[0], xk, c[1])]
    for j in range(2, m):
        ops.append(_ccx(c[j - 1], s[j - 1], c[j]))
    for j in range(m - 1, 1, -1):
        ops.append(_cx(c[j], s[j]))
        ops.append(_ccx(c[j - 1], s[j - 1], c[j]))
    ops.append(_cx(c[1], s[1]))
    ops.append(_ccx(s[0], xk, c[1]))
    ops.append(_cx(xk, s[0]))
    return ops


def _adder1_ops(layout: RegisterLayout):
    ops = []
    for k in range(1, layout.n_main + 1):
        ops.extend(_adder2_ops(layout, k))
    return ops


def adder1_uf(layout: RegisterLayout) -> GateCircuit:
    """Write the Hamming weight of the main register into the sum register:
    |x>|0> -> |x>|popcount(x)>, one ripple add per main qubit."""
    circuit = GateCircuit(layout)
    circuit.add_block("adder1", _adder1_ops(layout), expected=adder1_formula(layout.n_main))
    return circuit


def _inverse_ops(ops):
    """Adjoint of a gate list (every gate here is self-inverse except RZ)."""
    out = []
    for g in reversed(ops):
        if g.name == "RZ":
            out.append(_rz(g.qubits[0], -g.angle))
        else:
            out.append(g)
    return out


def _pattern_phase_ops(layout: RegisterLayout, value: int, theta: float, extra=None):
    """Multiply the sum-register basis state |value> by e^{i*theta}.

    NOT-conjugation maps the pattern (and the optional (qubit, bit) extra
    control) to all-ones, then a controlled Rz(2*theta) kicks the phase
    back off the |0> kickback qubit.
    """
    m = layout.m_sum
    if not 0 <= value < (1 << m):
        raise ValueError(f"pattern {value} does not fit in {m} sum qubits")
    controls = [layout.sum_q(j) for j in range(m)]
    conjugate = [layout.sum_q(j) for j in range(m) if not (value >> j) & 1]
    if extra is not None:
        q, bit = extra
        controls.append(q)
        if not bit:
            conjugate.append(q)
    wrap = [_x(q) for q in conjugate]
    core = _lambda_rz(layout.total, controls, layout.kickback, 2 * theta)
    return wrap + core + wrap


def selective_phase(layout: RegisterLayout, pattern: str, theta: float) -> GateCircuit:
    """Phase-shift one sum-register basis state, given as an MSB-first bit string."""
    if len(pattern) != layout.m_sum or set(pattern) - {"0", "1"}:
        raise ValueError(f"pattern must be {layout.m_sum} bits, got {pattern!r}")
    value = int(pattern, 2)
    circuit = GateCircuit(layout)
    expected = selective_phase_formula(layout.m_sum) if layout.m_sum >= 6 else None
    circuit.add_block("selective_phase", _pattern_phase_ops(layout, value, theta), expected)
    return circuit


def _d_network_ops(layout: RegisterLayout):
    mains = [layout.main(i) for i in range(1, layout.n_main + 1)]
    ops = [_h(q) for q in mains]
    ops += [_x(q) for q in mains]
    ops += _lambda_rz(layout.total, mains, layout.kickback, 2 * math.pi)
    ops += [_x(q) for q in mains]
    ops += [_h(q) for q in mains]
    return ops


def grover_d_network(layout: RegisterLayout) -> GateCircuit:
    """Inversion about average on the main register, up to a global -1.

    Hadamards conjugate a pi phase on |0...0>, realized by NOT-conjugation
    around a controlled Rz(2*pi) onto the kickback qubit.  The tracked
    global_phase_pi of 1 accounts for the sign.
    """
    if layout.n_main < 2:
        raise ValueError("need n >= 2")
    n = layout.n_main
    circuit = GateCircuit(layout, global_phase_pi=1)
    expected = d_network_formula(n) if n >= 6 else None
    circuit.add_block("d_network", _d_network_ops(layout), expected)
    return circuit


def _general_uf_ops(layout: RegisterLayout, plan: Plan):
    """Table-driven class labeling: XOR (label, sign) into the sum register
    for every main-register basis string.  Self-inverse.  Gate count is
    exponential in n; arbitrary class tables admit nothing cheaper."""
    spec = plan.general
    n, m = layout.n_main, layout.m_sum
    sign_bit = 1 << (m - 1)
    ops = []
    for x, (k, s) in enumerate(spec.table):
        value = k | (sign_bit if s < 0 else 0)
        if value == 0:
            continue
        conjugate = [layout.main(i) for i in range(1, n + 1) if not (x >> (i - 1)) & 1]
        wrap = [_x(q) for q in conjugate]
        body = []
        controls = [layout.main(i) for i in range(1, n + 1)]
        for j in range(m):
            if (value >> j) & 1:
                body += _lambda_x(layout.total, controls, layout.sum_q(j))
        ops += wrap + body + wrap
    return ops


def _label_patterns(plan: Plan, label: int):
    """Sum-register patterns for one class label's halves.

    Returns (plus, minus) where each is (pattern_value, extra_control).
    Symmetric weight classes use patterns k and n-k; the self-complementary
    weight n/2 splits on main qubit X_1 (plus half: X_1 = 1).  General
    classes put the half sign in the top sum bit.
    """
    if plan.mode == "general":
        sign_bit = 1 << (plan.general.M.bit_length())  # top sum bit
        return (label, None), (label | sign_bit, None)
    n = plan.n
    if 2 * label == n:
        x1 = 0  # main qubit X_1
        return (label, (x1, 1)), (label, (x1, 0))
    return (label, None), (n - label, None)


def _split_phase_ops(layout, plan, cid, ang_plus, ang_minus):
    """Opposite angles on the two halves of every label in a class."""
    ops = []
    for label in sorted(cid):
        (pv, pe), (mv, me) = _label_patterns(plan, label)
        ops += _pattern_phase_ops(layout, pv, ang_plus, pe)
        ops += _pattern_phase_ops(layout, mv, ang_minus, me)
    return ops


def _equal_phase_ops(layout, plan, cid, ang):
    """The same angle on every member of a class."""
    ops = []
    for label in sorted(cid):
        if plan.mode == "symmetric" and 2 * label == plan.n:
            ops += _pattern_phase_ops(layout, label, ang)  # one pattern covers both halves
            continue
        (pv, pe), (mv, me) = _label_patterns(plan, label)
        ops += _pattern_phase_ops(layout, pv, ang, pe)
        ops += _pattern_phase_ops(layout, mv, ang, me)
    return ops


def layout_for_plan(plan: Plan) -> RegisterLayout:
    if plan.mode == "general":
        return RegisterLayout.for_general(plan.n, plan.general.M)
    return RegisterLayout.for_symmetric(plan.n)


def compile_plan(plan: Plan, mode: str | None = None) -> GateCircuit:
    """Lower a build-direction plan to gates.

    Each phase-bearing step becomes: label the classes into the sum
    register, kick back the step's selective phases, unlabel.  Equalizing
    merge steps sandwich a diffusion network between their counter-rotation
    and rotation phase blocks; balancing iterations are a pi-phase block
    followed by diffusion.  The opening block is a Hadamard on every main
    qubit (the uniform superposition).
    """
    if plan.direction != "build":
        raise ValueError("compiler consumes build-direction plans; reverse it first")
    if mode is not None and mode != plan.mode:
        raise ValueError(f"plan mode is {plan.mode!r}, not {mode!r}")
    layout = layout_for_plan(plan)
    circuit = GateCircuit(layout)
    circuit.add_block(
        "hadamard_init",
        [_h(layout.main(i)) for i in range(1, plan.n + 1)],
        expected=plan.n,
    )

    if plan.mode == "general":
        uf_fwd = _general_uf_ops(layout, plan)
        uf_inv = uf_fwd  # XOR writes are an involution
        uf_expected = None
    else:
        uf_fwd = _adder1_ops(layout)
        uf_inv = _inverse_ops(uf_fwd)
        uf_expected = adder1_formula(plan.n)

    def phase_block(ops):
        circuit.add_block("uf_forward", uf_fwd, uf_expected)
        circuit.add_block("phase_shift", ops)
        circuit.add_block("uf_inverse", uf_inv, uf_expected)

    def d_block():
        expected = d_network_formula(plan.n) if plan.n >= 6 else None
        circuit.add_block("d_network", _d_network_ops(layout), expected)
        circuit.global_phase_pi = (circuit.global_phase_pi + 1) % 2

    for step in plan.steps:
        if isinstance(step, ClassPhases):
            ops = []
            for cid, ang in step.phases:
                ops += _equal_phase_ops(layout, plan, cid, ang)
            phase_block(ops)
        elif isinstance(step, PiFlip):
            ops = []
            for cid in step.classes:
                ops += _equal_phase_ops(layout, plan, cid, math.pi)
            phase_block(ops)
        elif isinstance(step, RpiD):
            ops = []
            for cid in step.flips:
                ops += _equal_phase_ops(layout, plan, cid, math.pi)
            phase_block(ops)
            d_block()
        elif isinstance(step, RdrMerge):
            phase_block(_split_phase_ops(layout, plan, step.hi, -step.phi, step.phi))
            d_block()
            phase_block(_split_phase_ops(layout, plan, step.hi, step.theta, -step.theta))
        else:
            raise TypeError(f"unknown plan step {step!r}")
    return circuit
