"""Acceptance suite: one test per shipping criterion, one pass line each.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the pass lines
and the complexity-audit table.
"""

import math

import numpy as np
import pytest
from scipy.optimize import curve_fit

from statesmith.circuits import (
    RegisterLayout,
    adder1_formula,
    adder1_uf,
    compile_plan,
    d_network_formula,
    gate_count,
    grover_d_network,
    lambda_n_rz,
    lambda_rz_formula,
    selective_phase,
    selective_phase_formula,
)
from statesmith.classes import (
    ClassifiedState,
    CoefficientClass,
    SymmetricTarget,
    apply_rdr_classes,
    apply_rpid_classes,
    classify,
    phase_canonicalize,
    sufficient_condition,
    weight_multiplicity,
)
from statesmith.planner import (
    ClassPhases,
    PiFlip,
    RdrMerge,
    RpiD,
    find_min_pair,
    forecast_rpid,
    plan_reduce,
    reverse_plan,
    rpid_bound,
    solve_theta,
)
from statesmith.simulator import (
    Statevector,
    apply_diag_phase,
    apply_inversion_about_average,
    fidelity,
    run_circuit,
    symmetric_target_vector,
)

SQRT_HALF = 1 / math.sqrt(2)
TARGETS_PER_N = 200
END_TO_END_NS = range(2, 9)


def random_target(rng, n, want_complex=False):
    count = n // 2 + 1
    if want_complex:
        raw = rng.normal(size=count) + 1j * rng.normal(size=count)
    else:
        raw = np.abs(rng.normal(size=count))
    mults = np.array([weight_multiplicity(n, k) for k in range(count)])
    raw /= np.sqrt(np.sum(mults * np.abs(raw) ** 2))
    return SymmetricTarget(n, tuple(raw))


def random_classified(rng, n, max_classes=5):
    """Random flip-free classified state with distinct values."""
    dim = 1 << n
    k = int(rng.integers(2, min(max_classes, dim // 2) + 1))
    while True:
        extra = rng.multinomial(dim // 2 - k, [1 / k] * k)
        mults = 2 + 2 * extra
        values = np.sort(np.abs(rng.normal(size=k)))
        if np.any(np.diff(values) < 1e-6):
            continue
        values /= np.sqrt(np.sum(mults * values**2))
        classes = tuple(
            CoefficientClass(float(v), int(m), frozenset([i]))
            for i, (v, m) in enumerate(zip(values, mults))
        )
        return ClassifiedState(n, classes)


def lemma2_regime_state(rng):
    """Random state violating the pair condition (huge minimum class)."""
    while True:
        n = int(rng.integers(4, 10))
        dim = 1 << n
        extra = int(rng.integers(1, 4))
        mults = [2 * int(rng.integers(1, 4)) for _ in range(extra + 1)]
        if sum(mults) >= dim // 4:
            continue
        values = np.sort(rng.uniform(0.2, 1.0, size=extra + 1))
        if np.any(np.diff(values) < 1e-6):
            continue
        a_min = float(rng.uniform(0, 0.02))
        all_values = np.concatenate([[a_min], values])
        all_mults = np.array([dim - sum(mults)] + mults)
        all_values /= np.sqrt(np.sum(all_mults * all_values**2))
        classes = tuple(
            CoefficientClass(float(v), int(m), frozenset([i]))
            for i, (v, m) in enumerate(zip(all_values, all_mults))
        )
        state = ClassifiedState(n, classes)
        lo, hi = find_min_pair(state)
        if sufficient_condition(state, lo, hi) < 0:
            return state


@pytest.fixture(scope="module")
def end_to_end_runs():
    """Criterion-1 pipeline sweep, shared with the iteration-bound audit."""
    records = []
    for n in END_TO_END_NS:
        rng = np.random.default_rng(900 + n)
        for i in range(TARGETS_PER_N):
            target = random_target(rng, n, want_complex=(i % 4 == 3))
            plan = plan_reduce(target)
            build = reverse_plan(plan)
            circuit = compile_plan(build)
            state = Statevector.zero(circuit.layout.total)
            run_circuit(state, circuit)
            report = fidelity(state, symmetric_target_vector(target), n)

            # maximal consecutive balancing runs with their entry-state bounds
            runs = []
            run_len = 0
            entry_bound = None
            for idx, step in enumerate(plan.steps):
                if isinstance(step, RpiD):
                    if run_len == 0:
                        entry_bound = rpid_bound(plan.trace[idx])
                    run_len += 1
                elif run_len:
                    runs.append((run_len, entry_bound))
                    run_len = 0
            if run_len:
                runs.append((run_len, entry_bound))
            records.append(
                {
                    "n": n,
                    "fidelity": report.fidelity,
                    "leakage": report.leakage,
                    "rpid_runs": runs,
                    "total_rpid": sum(length for length, _ in runs),
                }
            )
    return records


def test_criterion_1_end_to_end_fidelity(end_to_end_runs):
    worst_fid = min(r["fidelity"] for r in end_to_end_runs)
    worst_leak = max(r["leakage"] for r in end_to_end_runs)
    assert len(end_to_end_runs) == TARGETS_PER_N * len(END_TO_END_NS)
    assert worst_fid >= 1 - 1e-8
    assert worst_leak <= 1e-10
    print(
        f"\n[PASS] criterion 1: {len(end_to_end_runs)} targets over n=2..8, "
        f"min fidelity {worst_fid:.3e} offset {1 - worst_fid:.3e}, max leakage {worst_leak:.3e}"
    )


def test_criterion_2_gate_count_formulas():
    for n in range(2, 17):
        layout = RegisterLayout.for_symmetric(n)
        assert gate_count(adder1_uf(layout))["total"] == adder1_formula(n)
    for nc in range(6, 17):
        layout = RegisterLayout(nc + 1, 2)
        controls = [layout.main(i) for i in range(1, nc + 1)]
        circuit = lambda_n_rz(layout, controls, layout.kickback, 0.37)
        assert gate_count(circuit)["total"] == lambda_rz_formula(nc)
    for n in range(6, 17):
        layout = RegisterLayout.for_symmetric(n)
        assert gate_count(grover_d_network(layout))["total"] == d_network_formula(n)
    for m in range(6, 11):
        layout = RegisterLayout(m + 2, m)
        circuit = selective_phase(layout, "0" * m, 0.21)
        assert gate_count(circuit)["total"] == selective_phase_formula(m)
    print(
        "\n[PASS] criterion 2: exact counts for the weight adder (n=2..16), "
        "controlled rotation and diffusion (n=6..16), selective phase (m=6..10)"
    )


def test_criterion_3_equalization_property_suite():
    rng = np.random.default_rng(31337)
    checked = 0
    while checked < 10_000:
        n = int(rng.integers(2, 11))
        state = random_classified(rng, n)
        lo, hi = find_min_pair(state)
        if sufficient_condition(state, lo, hi) < 0:
            continue
        theta = solve_theta(state, lo, hi)
        assert 0 <= theta < math.pi / 2
        new_state, _ = apply_rdr_classes(state, lo, hi, theta)
        merged = [c for c in new_state.classes if lo | hi <= c.labels]
        if merged:
            diff = 0.0
        else:
            got_lo = next(c for c in new_state.classes if lo <= c.labels)
            got_hi = next(c for c in new_state.classes if hi <= c.labels)
            diff = abs(got_lo.value - got_hi.value)
        assert diff <= 1e-9
        checked += 1
    print(f"\n[PASS] criterion 3: {checked} random states equalized, |A_lo| = |A_hi| within 1e-9")


def test_criterion_4_balancing_property_suite():
    rng = np.random.default_rng(424242)
    for _ in range(10_000):
        state = lemma2_regime_state(rng)
        n = state.n
        dim = 1 << n
        quarter = dim // 4
        a = state.classes
        twol = a[0].multiplicity
        f_before = state.coeff_sum() - quarter * (a[0].value + a[1].value)
        eps0 = (twol - dim // 2) * a[0].value + (dim - twol) * a[1].value

        new_state, _ = apply_rpid_classes(state)
        b0 = new_state.find(a[0].labels).value
        b1 = new_state.find(a[1].labels).value
        assert b0 > -1e-10
        assert b1 - b0 > -1e-10
        for c in a[2:]:
            assert new_state.find(c.labels).value - b1 > -1e-10

        f_after = new_state.coeff_sum() - quarter * (b0 + b1)
        assert eps0 > 0
        assert (f_after - f_before) - eps0 > -1e-10

        eps1 = (twol - dim // 2) * b0 + (dim - twol) * b1
        floor = ((dim - twol) / quarter) * (quarter * (a[0].value + a[1].value) - state.coeff_sum())
        assert eps1 - eps0 >= floor - 1e-10
        assert floor > 0
    print("\n[PASS] criterion 4: 10000 balancing steps keep 0 < B_0 < B_1 < B_j with the stated gains")


def _two_class(n, t, alpha):
    dim = 1 << n
    a0 = math.sin(alpha) / math.sqrt(dim - t)
    a1 = math.cos(alpha) / math.sqrt(t)
    classes = (
        CoefficientClass(a0, dim - t, frozenset([0])),
        CoefficientClass(a1, t, frozenset([1])),
    )
    return ClassifiedState(n, tuple(sorted(classes, key=lambda c: c.value)))


def test_criterion_5_closed_form_trajectories():
    rng = np.random.default_rng(5150)
    trajectories = 0
    for n in range(4, 13):
        dim = 1 << n
        for t in range(2, dim - 1, 2):
            for _ in range(50):
                theta_g = math.asin(math.sqrt(t / dim))
                alpha = float(rng.uniform(0, math.pi / 2 - theta_g - 1e-9))
                state = _two_class(n, t, alpha)
                forecast = forecast_rpid(state)
                lo, hi = find_min_pair(state)
                k = 0
                while sufficient_condition(state, lo, hi) < 0:
                    state, _ = apply_rpid_classes(state)
                    k += 1
                    assert abs(state.find(lo).value - forecast.b0(k)) <= 1e-12
                    assert abs(state.find(hi).value - forecast.b1(k)) <= 1e-12
                assert k <= math.ceil(forecast.k_max) + 2
                trajectories += 1

    # scaling of the t=2 iteration count: fit count = c * 2^(beta*n) + d to
    # absorb the constant offset in the closed-form cap, then check beta
    ns = np.arange(6, 15)
    counts = []
    for n in ns:
        state = _two_class(int(n), 2, 0.0)
        lo, hi = find_min_pair(state)
        k = 0
        while sufficient_condition(state, lo, hi) < 0:
            state, _ = apply_rpid_classes(state)
            k += 1
        counts.append(k)
    (c_fit, beta, d_fit), _ = curve_fit(
        lambda n, c, beta, d: c * 2.0 ** (beta * n) + d,
        ns.astype(float),
        np.array(counts, dtype=float),
        p0=[0.5, 0.5, 0.0],
        maxfev=10_000,
    )
    assert abs(beta - 0.5) <= 0.05, (beta, counts)
    print(
        f"\n[PASS] criterion 5: {trajectories} trajectories match the closed form to 1e-12; "
        f"t=2 counts over n=6..14 are {counts}, fitted exponent {beta:.4f}"
    )


def test_criterion_6_iteration_bound_audit(end_to_end_runs):
    audited = 0
    for record in end_to_end_runs:
        for run_len, bound in record["rpid_runs"]:
            assert bound > 0
            assert run_len <= bound, (record["n"], run_len, bound)
            audited += 1
    total = sum(r["total_rpid"] for r in end_to_end_runs)
    print(
        f"\n[PASS] criterion 6: {audited} balancing runs ({total} iterations total) "
        "all within the (n-2)*ceil(sqrt(2^(n-3)))+1 bound"
    )


def _symmetric_member_masks(n, label):
    """(plus, minus) boolean masks over the 2^n main indices for one label."""
    idx = np.arange(1 << n)
    weights = np.array([bin(x).count("1") for x in range(1 << n)])
    if 2 * label == n:
        half = weights == label
        plus = half & (idx & 1 == 1)
        minus = half & (idx & 1 == 0)
    else:
        plus = weights == label
        minus = weights == (n - label)
    return plus, minus


def _replay_reduce_dense(target, plan):
    """Apply the reduce plan to a dense main-register vector with the
    reference operators, yielding the state after every step."""
    n = target.n
    vec = Statevector(n, symmetric_target_vector(target))
    masks = {k: _symmetric_member_masks(n, k) for k in range(n // 2 + 1)}

    def class_masks(cid):
        plus = np.zeros(1 << n, dtype=bool)
        minus = np.zeros(1 << n, dtype=bool)
        for label in cid:
            p, m = masks[label]
            plus |= p
            minus |= m
        return plus, minus

    for step in plan.steps:
        if isinstance(step, ClassPhases):
            for cid, ang in step.phases:
                plus, minus = class_masks(cid)
                members = plus | minus
                apply_diag_phase(vec, lambda x: members[x], ang)
        elif isinstance(step, PiFlip):
            for cid in step.classes:
                plus, minus = class_masks(cid)
                members = plus | minus
                apply_diag_phase(vec, lambda x: members[x], math.pi)
        elif isinstance(step, RpiD):
            apply_inversion_about_average(vec)
            for cid in step.flips:
                plus, minus = class_masks(cid)
                members = plus | minus
                apply_diag_phase(vec, lambda x: members[x], math.pi)
        elif isinstance(step, RdrMerge):
            plus, minus = class_masks(step.hi)
            apply_diag_phase(vec, lambda x: plus[x], step.theta)
            apply_diag_phase(vec, lambda x: minus[x], -step.theta)
            apply_inversion_about_average(vec)
            apply_diag_phase(vec, lambda x: plus[x], -step.phi)
            apply_diag_phase(vec, lambda x: minus[x], step.phi)
        yield step, vec.amps.copy()


def test_criterion_7_class_tracker_matches_dense_projection():
    rng = np.random.default_rng(777)
    compared = 0
    for n in range(2, 9):
        targets = [random_target(rng, n) for _ in range(5)]
        if n >= 4:
            coeffs = [SQRT_HALF] + [0.0] * (n // 2)
            targets.append(SymmetricTarget(n, tuple(coeffs)))
        for target in targets:
            canonical, _ = phase_canonicalize(target)
            plan = plan_reduce(canonical)
            masks = {k: _symmetric_member_masks(n, k) for k in range(n // 2 + 1)}
            for i, (step, amps) in enumerate(_replay_reduce_dense(canonical, plan), start=1):
                state = plan.trace[i]
                assert np.max(np.abs(amps.imag)) < 1e-10
                for c in state.classes:
                    signed = -c.value if c.needs_flip else c.value
                    for label in c.labels:
                        plus, minus = masks[label]
                        members = plus | minus
                        assert np.max(np.abs(amps.real[members] - signed)) < 1e-10
                        compared += 1
    print(
        f"\n[PASS] criterion 7: dense replays agree with the class tracker at every step "
        f"({compared} class/step comparisons, n=2..8, 1e-10)"
    )


def test_criterion_8_complexity_audit():
    rng = np.random.default_rng(8888)
    table = []
    worst = []
    for n in range(6, 13):
        coeffs = [SQRT_HALF] + [0.0] * (n // 2)
        targets = [SymmetricTarget(n, tuple(coeffs))]  # balancing-heavy worst case
        targets += [random_target(rng, n) for _ in range(2)]
        totals = []
        for target in targets:
            circuit = compile_plan(reverse_plan(plan_reduce(target)))
            totals.append(len(circuit.ops))
        g_n = max(totals)
        envelope = n**3 * math.log2(n) * 2 ** (n / 2)
        table.append((n, g_n, g_n / envelope))
        worst.append(totals[0])

    c_const = max(ratio for _, _, ratio in table)
    for n, g_n, _ in table:
        assert g_n <= c_const * n**3 * math.log2(n) * 2 ** (n / 2) + 1e-9

    # the balancing-dominated totals, normalized by the per-iteration
    # n*log2(n) network cost, must grow no faster than 2^(n/2)
    ns = np.arange(6, 13, dtype=float)
    normalized = np.array(worst, dtype=float) / (ns * np.log2(ns))
    (_, beta, _), _ = curve_fit(
        lambda n, c, beta, d: c * 2.0 ** (beta * n) + d,
        ns,
        normalized,
        p0=[10.0, 0.5, 0.0],
        maxfev=20_000,
    )
    assert beta <= 0.55, beta

    lines = [
        f"  n={n}: total={g_n:>7} gates, total/(n^3*log2(n)*2^(n/2)) = {ratio:.4f}"
        for n, g_n, ratio in table
    ]
    print(
        "\n[PASS] criterion 8: compiled totals bounded by c*n^3*log2(n)*2^(n/2) with c = "
        f"{c_const:.4f}; worst-case growth exponent {beta:.4f}\n" + "\n".join(lines)
    )
