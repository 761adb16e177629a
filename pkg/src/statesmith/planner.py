"""Plan construction: drive a target's coefficient classes to uniformity.

The reducer repeatedly picks the two smallest classes, merges them with an
equalizing rotate-diffuse-rotate step when the pair admits one, and falls
back to pi-flip diffusion iterations (Grover-style amplitude balancing)
when it does not.  Reversing the finished plan yields the gate-level
recipe that builds the target from the uniform superposition.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .classes import (
    ClassifiedState,
    GeneralClassSpec,
    SymmetricTarget,
    apply_rdr_classes,
    apply_rpid_classes,
    classify,
    clear_flips,
    phase_canonicalize,
    sufficient_condition,
)
from .errors import (
    AlreadyUniform,
    IterationBudgetExceeded,
    NoRoot,
    NotTwoClass,
    UnknownClass,
)

ClassId = frozenset


@dataclass(frozen=True)
class RdrMerge:
    """Equalize classes lo and hi: rotate hi's halves by +/-theta, diffuse,
    cancel the residual phase phi.  ``flips`` records classes left negative."""

    lo: ClassId
    hi: ClassId
    theta: float
    phi: float
    flips: tuple[ClassId, ...] = ()


@dataclass(frozen=True)
class RpiD:
    """Diffuse, then flip the sign of every listed class (all but the minimum)."""

    flips: tuple[ClassId, ...]


@dataclass(frozen=True)
class PiFlip:
    """Shift the phase of every member of the listed classes by pi."""

    classes: tuple[ClassId, ...]


@dataclass(frozen=True)
class ClassPhases:
    """Per-class selective phase shifts (both halves get the same angle)."""

    phases: tuple[tuple[ClassId, float], ...]


PlanStep = RdrMerge | RpiD | PiFlip | ClassPhases


@dataclass
class Plan:
    """An ordered sequence of class-level steps plus per-step state snapshots.

    ``direction`` is ``"reduce"`` (target -> uniform; the order the steps
    were solved in) or ``"build"`` (uniform -> target; what the compiler
    consumes).  ``trace[0]`` is the initial classified state and
    ``trace[i]`` the state after step i (reduce order; reversed for build).
    """

    n: int
    mode: str
    direction: str
    steps: list = field(default_factory=list)
    trace: list = field(default_factory=list)
    general: GeneralClassSpec | None = None

    def step_counts(self) -> dict[str, int]:
        counts = {"rdr": 0, "rpid": 0, "piflip": 0, "classphase": 0}
        for s in self.steps:
            if isinstance(s, RdrMerge):
                counts["rdr"] += 1
            elif isinstance(s, RpiD):
                counts["rpid"] += 1
            elif isinstance(s, PiFlip):
                counts["piflip"] += 1
            else:
                counts["classphase"] += 1
        return counts


def default_rpid_budget(n: int) -> int:
    """Default cap on pi-flip diffusion steps per plan: ceil(4 * n * 2^(n/2))."""
    return math.ceil(4 * n * 2 ** (n / 2))


def find_min_pair(state: ClassifiedState):
    """Labels of the smallest and second-smallest classes."""
    if len(state.classes) < 2:
        raise AlreadyUniform("single-class state has no pair to merge")
    ordered = sorted(state.classes, key=lambda c: (c.value, min(c.labels)))
    return ordered[0].labels, ordered[1].labels


def solve_theta(state: ClassifiedState, lo, hi) -> float:
    """Rotation angle that equalizes |A_lo| and |A_hi| after the merge step.

    The defect f(theta) = (2l*a0 + 2m*a1*cos(theta) + C) * (a1*cos(theta)
    - a0) - 2^(n-2) * (a1^2 - a0^2) is quadratic in cos(theta); f(0) >= 0
    whenever the pair condition holds and f(pi/2) < 0, so a root with
    cos(theta) in (0, 1] always exists.  Of two admissible roots the larger
    cosine (smaller rotation) is returned.
    """
    lo_c = state.find(lo)
    hi_c = state.find(hi)
    a0, a1 = lo_c.value, hi_c.value
    if a0 > a1:
        raise NoRoot("lo must be the smaller-valued class")
    if a1 - a0 <= 1e-15 * max(1.0, a1):
        return 0.0
    if sufficient_condition(state, lo, hi) < 0:
        raise NoRoot("pair does not satisfy the equalization condition")

    quarter = state.dim // 4
    c_rest = sum(
        c.multiplicity * c.value
        for c in state.classes
        if c.labels not in (lo_c.labels, hi_c.labels)
    )
    p = lo_c.multiplicity * a0 + c_rest
    qa = hi_c.multiplicity * a1 * a1
    qb = a1 * (p - hi_c.multiplicity * a0)
    qc = -(p * a0 + quarter * (a1 * a1 - a0 * a0))
    disc = qb * qb - 4 * qa * qc  # qc < 0, qa > 0: always positive
    root = math.sqrt(disc)
    if qb > 0:
        cos_theta = -2 * qc / (qb + root)
    else:
        cos_theta = (-qb + root) / (2 * qa)
    cos_theta = min(cos_theta, 1.0)
    if cos_theta <= 0:
        raise NoRoot(f"no admissible cosine, got {cos_theta}")
    theta = math.acos(cos_theta)

    s_theta = p + hi_c.multiplicity * a1 * cos_theta
    residual = s_theta * (a1 * cos_theta - a0) - quarter * (a1 * a1 - a0 * a0)
    if abs(residual) > 1e-9 * state.dim:
        raise NoRoot(f"residual {residual} too large")
    return theta


def plan_reduce(target, max_rpid: int | None = None) -> Plan:
    """Run the full reduction: target classes down to the uniform state.

    Loop: stop when uniform; otherwise take the minimum pair, merge it when
    the pair condition holds (recording any sign flips as an explicit pi
    step), else apply one pi-flip diffusion iteration and re-check.
    """
    if max_rpid is None:
        max_rpid = default_rpid_budget(target.n)
    mode = "general" if isinstance(target, GeneralClassSpec) else "symmetric"
    canonical, phases = phase_canonicalize(target)
    state = classify(canonical)
    plan = Plan(
        n=target.n,
        mode=mode,
        direction="reduce",
        general=target if mode == "general" else None,
    )
    plan.trace.append(state)

    nonzero = tuple(
        (frozenset([k]), -phi) for k, phi in enumerate(phases) if phi != 0.0
    )
    if nonzero:
        plan.steps.append(ClassPhases(nonzero))
        plan.trace.append(state)  # phase cancellation leaves magnitudes alone

    rpid_used = 0
    while not state.is_uniform():
        lo, hi = find_min_pair(state)
        if sufficient_condition(state, lo, hi) >= 0:
            theta = solve_theta(state, lo, hi)
            new_state, phi = apply_rdr_classes(state, lo, hi, theta)
            flips = tuple(c.labels for c in new_state.classes if c.needs_flip)
            plan.steps.append(RdrMerge(lo, hi, theta, phi, flips))
            plan.trace.append(new_state)
            if flips:
                new_state = clear_flips(new_state)
                plan.steps.append(PiFlip(flips))
                plan.trace.append(new_state)
            state = new_state
        else:
            if rpid_used >= max_rpid:
                raise IterationBudgetExceeded(
                    f"needed more than {max_rpid} pi-flip diffusion steps"
                )
            state, flipped = apply_rpid_classes(state)
            rpid_used += 1
            plan.steps.append(RpiD(flipped))
            plan.trace.append(state)
    return plan


def reverse_plan(plan: Plan) -> Plan:
    """Invert a reduce plan into the build plan the compiler consumes.

    Step order reverses and every phase angle is negated; diffusion is its
    own inverse, so pi-flip steps keep their class lists.  The complex
    target phases, when present, end up as the final build step.
    """
    if plan.direction != "reduce":
        raise ValueError("can only reverse a reduce-direction plan")
    steps = []
    for step in reversed(plan.steps):
        if isinstance(step, RdrMerge):
            steps.append(replace(step, theta=-step.theta, phi=-step.phi))
        elif isinstance(step, ClassPhases):
            steps.append(ClassPhases(tuple((cid, -ang) for cid, ang in step.phases)))
        else:
            steps.append(step)  # pi flips are self-inverse
    return Plan(
        n=plan.n,
        mode=plan.mode,
        direction="build",
        steps=steps,
        trace=list(reversed(plan.trace)),
        general=plan.general,
    )


@dataclass(frozen=True)
class IterationForecast:
    """Closed-form trajectory of pi-flip diffusion on a two-class state.

    With t members at the larger value, written as a0 = sin(alpha) /
    sqrt(2^n - t) and a1 = cos(alpha)/sqrt(t), and the angle theta_g with
    sin^2(theta_g) = t / 2^n, the k-th iterate is

        B0(k) = sin(alpha + 2k*theta_g) / sqrt(2^n - t)
        B1(k) = cos(alpha + 2k*theta_g) / sqrt(t)

    and the pair condition holds once cos(alpha + (2k+3)*theta_g) <= 0.
    """

    n: int
    t: int
    grover_angle: float
    alpha: float
    k_max: float

    def b0(self, k: int) -> float:
        return math.sin(self.alpha + 2 * k * self.grover_angle) / math.sqrt(
            (1 << self.n) - self.t
        )

    def b1(self, k: int) -> float:
        return math.cos(self.alpha + 2 * k * self.grover_angle) / math.sqrt(self.t)

    def sign_functional(self, k: int) -> float:
        """Negative or zero exactly when the k-th iterate satisfies the pair condition."""
        return math.cos(self.alpha + (2 * k + 3) * self.grover_angle)

    def iterations_needed(self) -> int:
        if self.sign_functional(0) <= 0:
            return 0
        need = (math.pi / 2 - self.alpha - 3 * self.grover_angle) / (
            2 * self.grover_angle
        )
        return max(0, math.ceil(need))


def forecast_rpid(state: ClassifiedState) -> IterationForecast:
    """Fit the closed-form iteration model to a two-class state."""
    state.validate()
    if len(state.classes) != 2 or state.has_flips():
        raise NotTwoClass("forecast needs exactly two flip-free classes")
    lo_c, hi_c = state.classes
    if not lo_c.value < hi_c.value:
        raise NotTwoClass("class values must be distinct")
    t = hi_c.multiplicity
    dim = state.dim
    grover_angle = math.asin(math.sqrt(t / dim))
    alpha = math.asin(min(1.0, lo_c.value * math.sqrt(dim - t)))
    k_max = (math.pi / 2 - 3 * grover_angle) / (2 * grover_angle)
    forecast = IterationForecast(state.n, t, grover_angle, alpha, k_max)
    # the two parametrizations must agree
    if abs(forecast.b1(0) - hi_c.value) > 1e-9:
        raise NotTwoClass("state is not normalized for the two-class model")
    return forecast


def _ceil_sqrt(x: int) -> int:
    r = math.isqrt(x)
    return r if r * r == x else r + 1


def rpid_bound(state: ClassifiedState) -> int:
    """Upper bound on the pi-flip diffusion steps needed before the minimum
    pair satisfies the equalization condition: (n-2)*ceil(sqrt(2^(n-3))) + 1,
    or 0 when the condition already holds."""
    if state.is_uniform():
        return 0
    lo, hi = find_min_pair(state)
    if sufficient_condition(state, lo, hi) >= 0:
        return 0
    n = state.n
    if n < 3:
        return 1
    return (n - 2) * _ceil_sqrt(1 << (n - 3)) + 1


def execute_plan_classes(plan: Plan, initial: dict[int, complex]) -> dict[int, tuple[complex, complex]]:
    """Replay a plan on per-label complex half-amplitudes.

    ``initial`` maps each original class label to its starting amplitude
    (both halves equal).  This executor applies phase shifts and the
    inversion about average directly, without the merged-class update
    formulas, so it serves as an independent check of a plan; it returns
    the final (plus-half, minus-half) amplitude per label.
    """
    if plan.mode == "general":
        half_mults = {k: plan.general.class_size(k) for k in plan.general.labels}
    else:
        from .classes import weight_multiplicity

        half_mults = {
            k: weight_multiplicity(plan.n, k) // 2 for k in range(plan.n // 2 + 1)
        }
    if set(initial) != set(half_mults):
        raise UnknownClass("initial values must cover exactly the original labels")
    plus = {k: complex(v) for k, v in initial.items()}
    minus = {k: complex(v) for k, v in initial.items()}
    half_dim = (1 << plan.n) // 2

    def diffuse():
        s = sum(half_mults[k] * (plus[k] + minus[k]) for k in half_mults)
        mean2 = s / half_dim
        for k in half_mults:
            plus[k] = mean2 - plus[k]
            minus[k] = mean2 - minus[k]

    def rotate(labels, angle):  # +angle on plus half, -angle on minus half
        for k in labels:
            plus[k] *= complex(math.cos(angle), math.sin(angle))
            minus[k] *= complex(math.cos(angle), -math.sin(angle))

    def shift(labels, angle):  # same angle on both halves
        w = complex(math.cos(angle), math.sin(angle))
        for k in labels:
            plus[k] *= w
            minus[k] *= w

    build = plan.direction == "build"
    for step in plan.steps:
        if isinstance(step, ClassPhases):
            for cid, ang in step.phases:
                shift(cid, ang)
        elif isinstance(step, PiFlip):
            for cid in step.classes:
                shift(cid, math.pi)
        elif isinstance(step, RpiD):
            if build:
                for cid in step.flips:
                    shift(cid, math.pi)
                diffuse()
            else:
                diffuse()
                for cid in step.flips:
                    shift(cid, math.pi)
        elif isinstance(step, RdrMerge):
            if build:
                rotate(step.hi, -step.phi)  # counter-rotation first when building
                diffuse()
                rotate(step.hi, step.theta)
            else:
                rotate(step.hi, step.theta)
                diffuse()
                rotate(step.hi, -step.phi)
        else:
            raise TypeError(f"unknown plan step {step!r}")
    return {k: (plus[k], minus[k]) for k in half_mults}
