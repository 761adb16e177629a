"""Coefficient-class model of highly symmetric target states.

An n-qubit state whose amplitudes take only a few distinct values can be
tracked through selective phase shifts and inversion-about-average steps
entirely at the level of one representative value per class.  This module
holds the target types, the classifiers, and the classical update rules
that the planner drives.

Conventions used throughout:

* A symmetric target is given by coefficients ``a_k`` for ``k = 0..n//2``,
  where class ``k`` collects every basis string of Hamming weight ``k`` or
  ``n - k``.  Class multiplicities are ``2*C(n, k)``, except ``C(n, n/2)``
  for even ``n`` at ``k = n/2``.
* Every class splits into two equal halves (the ``+`` half and the ``-``
  half) that selective phase shifts address with opposite angles.  For a
  weight class ``{k, n-k}`` the ``+`` half is the weight-``k`` strings;
  for even ``n`` and ``k = n/2`` the ``+`` half is the weight-``n/2``
  strings whose first main qubit is 1.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, replace

from .errors import NotNormalized, PreconditionViolated, UnknownClass

TARGET_NORM_TOL = 1e-12
STATE_NORM_TOL = 1e-9
MERGE_REL_TOL = 1e-9


def merge_tolerance(value: float) -> float:
    """Two class values within this distance are treated as equal."""
    return MERGE_REL_TOL * max(1.0, abs(value))


def weight_multiplicity(n: int, k: int) -> int:
    """Number of basis strings in the weight class {k, n-k}."""
    if 2 * k == n:
        return math.comb(n, k)
    return 2 * math.comb(n, k)


def _as_complex_tuple(values) -> tuple[complex, ...]:
    return tuple(complex(v) for v in values)


@dataclass(frozen=True)
class SymmetricTarget:
    """Target state: coefficients a_k over Hamming-weight classes {k, n-k}."""

    n: int
    coeffs: tuple[complex, ...]

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _as_complex_tuple(self.coeffs))
        if self.n < 2:
            raise ValueError(f"need n >= 2, got {self.n}")
        want = self.n // 2 + 1
        if len(self.coeffs) != want:
            raise ValueError(f"expected {want} coefficients for n={self.n}, got {len(self.coeffs)}")
        norm = sum(weight_multiplicity(self.n, k) * abs(a) ** 2 for k, a in enumerate(self.coeffs))
        if abs(norm - 1.0) > TARGET_NORM_TOL:
            raise NotNormalized(f"sum of mult*|a_k|^2 = {norm!r}, expected 1")

    @property
    def labels(self) -> tuple[int, ...]:
        return tuple(range(self.n // 2 + 1))

    def multiplicity(self, k: int) -> int:
        return weight_multiplicity(self.n, k)


@dataclass(frozen=True)
class GeneralClassSpec:
    """Target state over arbitrary coefficient classes defined by a table.

    ``table[x]`` gives ``(k, sign)`` for each basis string ``x``, with
    ``sign`` +1 or -1 selecting the half of class ``k``.  Each class must
    have equally many +1 and -1 members.
    """

    n: int
    M: int
    coeffs: tuple[complex, ...]
    table: tuple[tuple[int, int], ...]

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _as_complex_tuple(self.coeffs))
        object.__setattr__(self, "table", tuple((int(k), int(s)) for k, s in self.table))
        if self.n < 2:
            raise ValueError(f"need n >= 2, got {self.n}")
        if len(self.coeffs) != self.M + 1:
            raise ValueError(f"expected {self.M + 1} coefficients, got {len(self.coeffs)}")
        if len(self.table) != 1 << self.n:
            raise ValueError(f"table must map all {1 << self.n} strings, got {len(self.table)}")
        counts: dict[tuple[int, int], int] = {}
        for k, s in self.table:
            if not (0 <= k <= self.M) or s not in (1, -1):
                raise ValueError(f"bad table entry ({k}, {s})")
            counts[(k, s)] = counts.get((k, s), 0) + 1
        for k in range(self.M + 1):
            plus, minus = counts.get((k, 1), 0), counts.get((k, -1), 0)
            if plus < 1 or plus != minus:
                raise ValueError(f"class {k} has {plus} '+' and {minus} '-' members")
        norm = sum(2 * self.class_size(k) * abs(c) ** 2 for k, c in enumerate(self.coeffs))
        if abs(norm - 1.0) > TARGET_NORM_TOL:
            raise NotNormalized(f"sum of 2*l_k*|c_k|^2 = {norm!r}, expected 1")

    def class_size(self, k: int) -> int:
        """l_k: the number of basis strings in one half of class k."""
        return sum(1 for kk, s in self.table if kk == k and s == 1)

    @property
    def labels(self) -> tuple[int, ...]:
        return tuple(range(self.M + 1))

    def multiplicity(self, k: int) -> int:
        return 2 * self.class_size(k)


@dataclass(frozen=True)
class CoefficientClass:
    """One coefficient class: a shared nonnegative value and its members.

    ``labels`` is the set of original class labels collected by merges.
    ``needs_flip`` marks a class whose physical amplitude is currently the
    negative of ``value``; a pi phase step clears it.
    """

    value: float
    multiplicity: int
    labels: frozenset[int]
    needs_flip: bool = False

    def __post_init__(self):
        if self.multiplicity <= 0 or self.multiplicity % 2:
            raise ValueError(f"multiplicity must be even and positive, got {self.multiplicity}")
        if self.value < 0:
            raise ValueError("class values are stored as magnitudes")


@dataclass(frozen=True)
class ClassifiedState:
    """The working representation: distinct coefficient classes of an n-qubit state."""

    n: int
    classes: tuple[CoefficientClass, ...]

    @property
    def dim(self) -> int:
        return 1 << self.n

    def norm_sq(self) -> float:
        return sum(c.multiplicity * c.value**2 for c in self.classes)

    def coeff_sum(self) -> float:
        """S: the sum of all amplitudes (requires a flip-free state)."""
        self._require_flip_free()
        return sum(c.multiplicity * c.value for c in self.classes)

    def find(self, labels) -> CoefficientClass:
        key = frozenset(labels) if not isinstance(labels, frozenset) else labels
        for c in self.classes:
            if c.labels == key:
                return c
        raise UnknownClass(f"no class with labels {sorted(key)}")

    def is_uniform(self) -> bool:
        return len(self.classes) == 1 and not self.classes[0].needs_flip

    def has_flips(self) -> bool:
        return any(c.needs_flip for c in self.classes)

    def _require_flip_free(self):
        if self.has_flips():
            raise PreconditionViolated("state has pending sign flips; apply the pi step first")

    def validate(self) -> "ClassifiedState":
        total = sum(c.multiplicity for c in self.classes)
        if total != self.dim:
            raise ValueError(f"multiplicities sum to {total}, expected {self.dim}")
        norm = self.norm_sq()
        if abs(norm - 1.0) > STATE_NORM_TOL:
            raise NotNormalized(f"class norm {norm!r} drifted from 1")
        return self


def _merged(n: int, entries) -> ClassifiedState:
    """Build a ClassifiedState, merging classes equal in (value, flip)."""
    entries = sorted(entries, key=lambda e: (e[0], e[3], min(e[2])))
    groups: list[list] = []
    for value, mult, labels, flip in entries:
        if groups:
            rep_value, _, _, rep_flip = groups[-1][0]
            if flip == rep_flip and value - rep_value <= merge_tolerance(rep_value):
                groups[-1].append((value, mult, labels, flip))
                continue
        groups.append([(value, mult, labels, flip)])
    classes = []
    for group in groups:
        mult = sum(m for _, m, _, _ in group)
        value = sum(v * m for v, m, _, _ in group) / mult
        labels = frozenset().union(*(ls for _, _, ls, _ in group))
        classes.append(CoefficientClass(value, mult, labels, group[0][3]))
    classes.sort(key=lambda c: (c.value, min(c.labels)))
    return ClassifiedState(n, tuple(classes))


def phase_canonicalize(target):
    """Strip complex phases from a target's coefficients.

    Returns a copy with coefficients |a_k| plus the per-class phase angles
    phi_k (in [0, 2pi)) with a_k = |a_k| * exp(i*phi_k).  The reducer's
    first step cancels these phases; the reversed build plan re-applies
    them as its final selective phase shift.
    """
    phases = []
    magnitudes = []
    for a in target.coeffs:
        r = abs(a)
        phi = cmath.phase(a) % (2 * math.pi) if r > 0 else 0.0
        magnitudes.append(r)
        phases.append(phi)
    canonical = replace(target, coeffs=tuple(complex(r) for r in magnitudes))
    return canonical, tuple(phases)


def _require_real_nonneg(coeffs):
    for k, a in enumerate(coeffs):
        if abs(a.imag) > 1e-15 or a.real < -1e-15:
            raise ValueError(
                f"coefficient {k} is {a!r}; run phase_canonicalize before classifying"
            )


def classify_symmetric(target: SymmetricTarget) -> ClassifiedState:
    """Group a symmetric target into weight classes, merging equal values."""
    _require_real_nonneg(target.coeffs)
    entries = [
        (max(a.real, 0.0), weight_multiplicity(target.n, k), frozenset([k]), False)
        for k, a in enumerate(target.coeffs)
    ]
    return _merged(target.n, entries).validate()


def classify_general(spec: GeneralClassSpec) -> ClassifiedState:
    """Group a general class-structured target, merging equal values."""
    _require_real_nonneg(spec.coeffs)
    entries = [
        (max(c.real, 0.0), spec.multiplicity(k), frozenset([k]), False)
        for k, c in enumerate(spec.coeffs)
    ]
    return _merged(spec.n, entries).validate()


def classify(target) -> ClassifiedState:
    if isinstance(target, SymmetricTarget):
        return classify_symmetric(target)
    if isinstance(target, GeneralClassSpec):
        return classify_general(target)
    raise TypeError(f"cannot classify {type(target).__name__}")


def sufficient_condition(state: ClassifiedState, lo, hi) -> float:
    """S - 2^(n-2) * (a_lo + a_hi); a nonnegative value means an equalizing
    rotation angle exists for this pair."""
    lo_c = state.find(lo)
    hi_c = state.find(hi)
    if lo_c is hi_c:
        raise UnknownClass("lo and hi must be distinct classes")
    return state.coeff_sum() - (state.dim // 4) * (lo_c.value + hi_c.value)


def apply_rdr_classes(state: ClassifiedState, lo, hi, theta: float):
    """Rotate, diffuse, counter-rotate: the class-level coefficient update.

    The hi class's two halves are phase-shifted by +theta and -theta, the
    inversion about average is applied, and the residual phase phi of the
    hi class is cancelled.  With ``half = 2^(n-1)`` and ``s = 2l*a0 +
    2m*a1*cos(theta) + C`` (C summing every other class) the new values are

        A_lo = s/half - a_lo
        A_hi = |s/half - a_hi * exp(i*theta)|      (phi = the cancelled phase)
        A_j  = s/half - a_j                        (every other class)

    Returns ``(new_state, phi)``.  Negative real values are stored as
    magnitudes with ``needs_flip`` set; classes equal in (value, flip) are
    merged, so a solved theta fuses lo and hi into one class.
    """
    state.validate()
    state._require_flip_free()
    lo_c = state.find(lo)
    hi_c = state.find(hi)
    if lo_c is hi_c:
        raise UnknownClass("lo and hi must be distinct classes")
    if not 0 <= theta < math.pi / 2:
        raise ValueError(f"theta must lie in [0, pi/2), got {theta}")

    half = state.dim // 2
    others = [c for c in state.classes if c.labels not in (lo_c.labels, hi_c.labels)]
    c_rest = sum(c.multiplicity * c.value for c in others)
    s_theta = (
        lo_c.multiplicity * lo_c.value
        + hi_c.multiplicity * hi_c.value * math.cos(theta)
        + c_rest
    )  # amplitude sum after the +/-theta split

    mean2 = s_theta / half
    a_lo = mean2 - lo_c.value
    a_hi = mean2 - hi_c.value * cmath.exp(1j * theta)
    mag_hi = abs(a_hi)
    phi = cmath.phase(a_hi) % (2 * math.pi) if mag_hi > 0 else 0.0

    entries = [
        (abs(a_lo), lo_c.multiplicity, lo_c.labels, a_lo < 0),
        (mag_hi, hi_c.multiplicity, hi_c.labels, False),
    ]
    for c in others:
        a_j = mean2 - c.value
        entries.append((abs(a_j), c.multiplicity, c.labels, a_j < 0))
    new_state = _merged(state.n, entries).validate()
    return new_state, phi


def apply_rpid_classes(state: ClassifiedState):
    """One amplitude-balancing iteration: diffuse, then flip negative signs.

    Requires the sign pattern (+, -, -, ...) of ``S - 2^(n-1) * a_k`` over
    the value-sorted classes; then

        B_min = S/half - a_min          (stays positive)
        B_k   = a_k - S/half            (sign flipped back positive)

    Returns ``(new_state, flipped)`` where ``flipped`` lists the labels of
    every class other than the minimum (the ones the pi shift acted on).
    """
    state.validate()
    state._require_flip_free()
    classes = state.classes
    half = state.dim // 2
    s = state.coeff_sum()
    mean2 = s / half
    if len(classes) < 2:
        raise PreconditionViolated("need at least two classes for a pi-flip diffusion step")
    if not mean2 - classes[0].value > 0:
        raise PreconditionViolated("diffusion would not keep the minimum class positive")
    for c in classes[1:]:
        if not mean2 - c.value < 0:
            raise PreconditionViolated(
                "diffusion would not make every non-minimum class negative"
            )

    entries = [(mean2 - classes[0].value, classes[0].multiplicity, classes[0].labels, False)]
    flipped = []
    for c in classes[1:]:
        entries.append((c.value - mean2, c.multiplicity, c.labels, False))
        flipped.append(c.labels)
    new_state = _merged(state.n, entries).validate()
    return new_state, tuple(flipped)


def clear_flips(state: ClassifiedState) -> ClassifiedState:
    """Materialize pending pi flips: drop the flags and re-merge."""
    entries = [(c.value, c.multiplicity, c.labels, False) for c in state.classes]
    return _merged(state.n, entries).validate()
