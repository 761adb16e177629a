"""Dense complex statevector simulation over all registers.

Qubit q is bit q of the basis index (little endian), so the main register
occupies the low n bits and index arithmetic matches the layout's qubit
numbering.  This simulator is the ground-truth oracle: it applies gate
lists from the compiler as well as the abstract selective-phase and
inversion-about-average operators directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NotNormalized, QubitCapExceeded

DEFAULT_QUBIT_CAP = 22
_SQRT_HALF = 1 / math.sqrt(2)


@dataclass
class Statevector:
    """Dense amplitudes over 2**q_total basis states."""

    q_total: int
    amps: np.ndarray

    def __init__(self, q_total: int, amps: np.ndarray | None = None, cap: int = DEFAULT_QUBIT_CAP):
        if q_total > cap:
            raise QubitCapExceeded(f"{q_total} qubits exceeds the cap of {cap}")
        self.q_total = q_total
        if amps is None:
            amps = np.zeros(1 << q_total, dtype=np.complex128)
            amps[0] = 1.0
        else:
            amps = np.asarray(amps, dtype=np.complex128)
            if amps.shape != (1 << q_total,):
                raise ValueError(f"expected {1 << q_total} amplitudes, got {amps.shape}")
            norm = float(np.sum(np.abs(amps) ** 2))
            if abs(norm - 1.0) > 1e-9:
                raise NotNormalized(f"statevector norm {norm} drifted from 1")
        self.amps = amps

    @classmethod
    def zero(cls, q_total: int, cap: int = DEFAULT_QUBIT_CAP) -> "Statevector":
        return cls(q_total, None, cap)

    def copy(self) -> "Statevector":
        out = object.__new__(Statevector)
        out.q_total = self.q_total
        out.amps = self.amps.copy()
        return out

    def _view(self):
        return self.amps.reshape((2,) * self.q_total)

    def _slot(self, q: int, b: int, extra: dict | None = None):
        idx = [slice(None)] * self.q_total
        idx[self.q_total - 1 - q] = b
        if extra:
            for qq, bb in extra.items():
                idx[self.q_total - 1 - qq] = bb
        return tuple(idx)


def apply_gate(state: Statevector, gate) -> Statevector:
    """Apply one elementary gate in place; returns the state."""
    a = state._view()
    name, qs = gate.name, gate.qubits
    for q in qs:
        if not 0 <= q < state.q_total:
            raise IndexError(f"qubit {q} out of range for {state.q_total}-qubit state")
    if name == "H":
        i0, i1 = state._slot(qs[0], 0), state._slot(qs[0], 1)
        lo = a[i0].copy()
        hi = a[i1]
        a[i0] = (lo + hi) * _SQRT_HALF
        a[i1] = (lo - hi) * _SQRT_HALF
    elif name == "X":
        i0, i1 = state._slot(qs[0], 0), state._slot(qs[0], 1)
        tmp = a[i0].copy()
        a[i0] = a[i1]
        a[i1] = tmp
    elif name == "RZ":
        half = gate.angle / 2
        a[state._slot(qs[0], 0)] *= complex(math.cos(half), math.sin(half))
        a[state._slot(qs[0], 1)] *= complex(math.cos(half), -math.sin(half))
    elif name == "CX":
        c, t = qs
        i0 = state._slot(t, 0, {c: 1})
        i1 = state._slot(t, 1, {c: 1})
        tmp = a[i0].copy()
        a[i0] = a[i1]
        a[i1] = tmp
    elif name == "CCX":
        c1, c2, t = qs
        i0 = state._slot(t, 0, {c1: 1, c2: 1})
        i1 = state._slot(t, 1, {c1: 1, c2: 1})
        tmp = a[i0].copy()
        a[i0] = a[i1]
        a[i1] = tmp
    else:
        raise ValueError(f"unknown gate {name}")
    return state


def apply_diag_phase(state: Statevector, selector, theta: float, n_main: int | None = None) -> Statevector:
    """Reference selective phase shift: amps[x] *= e^{i*theta} where
    selector(x) holds over the low n_main bits of the index."""
    n = state.q_total if n_main is None else n_main
    mask = np.fromiter(
        (bool(selector(x)) for x in range(1 << n)), dtype=bool, count=1 << n
    )
    phase = complex(math.cos(theta), math.sin(theta))
    a = state.amps.reshape(-1, 1 << n)
    a[:, mask] *= phase
    return state


def apply_inversion_about_average(state: Statevector, qubits=None) -> Statevector:
    """amps <- 2*mean - amps over the given qubits (default: all), for every
    fixed configuration of the remaining qubits."""
    if qubits is None:
        qubits = list(range(state.q_total))
    qubits = sorted(qubits)
    if qubits == list(range(len(qubits))):
        # contiguous low qubits: a plain reshape suffices
        a = state.amps.reshape(-1, 1 << len(qubits))
        mean = a.mean(axis=1, keepdims=True)
        np.subtract(2 * mean, a, out=a)
        return state
    view = state._view()
    axes = tuple(state.q_total - 1 - q for q in qubits)
    mean = view.mean(axis=axes, keepdims=True)
    np.subtract(2 * mean, view, out=view)
    return state


def run_circuit(state: Statevector, circuit) -> Statevector:
    """Apply every gate of a compiled circuit, then its global-phase metadata."""
    if circuit.layout.total != state.q_total:
        raise ValueError(
            f"circuit wants {circuit.layout.total} qubits, state has {state.q_total}"
        )
    for gate in circuit.ops:
        apply_gate(state, gate)
    if circuit.global_phase_pi % 2:
        state.amps *= -1
    return state


@dataclass(frozen=True)
class FidelityReport:
    fidelity: float
    leakage: float


def fidelity(state: Statevector, target_main: np.ndarray, n_main: int) -> FidelityReport:
    """Overlap with a main-register target, ancillas projected onto |0>.

    fidelity = |<target, 0_anc | state>|^2; leakage = probability of any
    ancilla qubit being found outside |0>.
    """
    target = np.asarray(target_main, dtype=np.complex128)
    if target.shape != (1 << n_main,):
        raise ValueError(f"target must have {1 << n_main} amplitudes")
    block = state.amps.reshape(-1, 1 << n_main)[0]
    fid = abs(np.vdot(target, block)) ** 2
    leakage = 1.0 - float(np.sum(np.abs(block) ** 2))
    return FidelityReport(float(fid), max(leakage, 0.0))


def dump_amplitudes(state: Statevector, fh) -> None:
    """One line per basis state: binary index, real, imaginary."""
    q = state.q_total
    for x, amp in enumerate(state.amps):
        fh.write(f"{x:0{q}b} {amp.real:.17g} {amp.imag:.17g}\n")


def circuit_unitary(circuit, cap: int = 10) -> np.ndarray:
    """Full 2^Q x 2^Q matrix of a circuit (global phase included); Q <= cap."""
    q = circuit.layout.total
    if q > cap:
        raise QubitCapExceeded(f"unitary construction capped at {cap} qubits")
    dim = 1 << q
    cols = np.eye(dim, dtype=np.complex128)
    view = cols.reshape((2,) * q + (dim,))  # leading axes index the state space

    for gate in circuit.ops:
        shaped = view
        name, qs = gate.name, gate.qubits

        def slot(qubit, bit, extra=()):
            idx = [slice(None)] * (q + 1)
            idx[q - 1 - qubit] = bit
            for qq, bb in extra:
                idx[q - 1 - qq] = bb
            return tuple(idx)

        if name == "H":
            lo = shaped[slot(qs[0], 0)].copy()
            hi = shaped[slot(qs[0], 1)]
            shaped[slot(qs[0], 0)] = (lo + hi) * _SQRT_HALF
            shaped[slot(qs[0], 1)] = (lo - hi) * _SQRT_HALF
        elif name == "X":
            tmp = shaped[slot(qs[0], 0)].copy()
            shaped[slot(qs[0], 0)] = shaped[slot(qs[0], 1)]
            shaped[slot(qs[0], 1)] = tmp
        elif name == "RZ":
            half = gate.angle / 2
            shaped[slot(qs[0], 0)] *= complex(math.cos(half), math.sin(half))
            shaped[slot(qs[0], 1)] *= complex(math.cos(half), -math.sin(half))
        elif name == "CX":
            c, t = qs
            tmp = shaped[slot(t, 0, ((c, 1),))].copy()
            shaped[slot(t, 0, ((c, 1),))] = shaped[slot(t, 1, ((c, 1),))]
            shaped[slot(t, 1, ((c, 1),))] = tmp
        elif name == "CCX":
            c1, c2, t = qs
            extra = ((c1, 1), (c2, 1))
            tmp = shaped[slot(t, 0, extra)].copy()
            shaped[slot(t, 0, extra)] = shaped[slot(t, 1, extra)]
            shaped[slot(t, 1, extra)] = tmp
    if circuit.global_phase_pi % 2:
        cols *= -1
    return cols


def symmetric_target_vector(target) -> np.ndarray:
    """Dense 2^n amplitude vector of a symmetric target."""
    n = target.n
    vec = np.empty(1 << n, dtype=np.complex128)
    for x in range(1 << n):
        w = bin(x).count("1")
        vec[x] = target.coeffs[min(w, n - w)]
    return vec


def general_target_vector(spec) -> np.ndarray:
    """Dense 2^n amplitude vector of a general class-structured target."""
    vec = np.empty(1 << spec.n, dtype=np.complex128)
    for x, (k, _sign) in enumerate(spec.table):
        vec[x] = spec.coeffs[k]
    return vec
