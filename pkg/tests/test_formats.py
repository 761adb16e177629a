"""Round trips and error reporting for the text formats."""

import math

import pytest

from statesmith.classes import GeneralClassSpec, SymmetricTarget
from statesmith.errors import SpecFormatError
from statesmith.formats import (
    format_circuit,
    format_plan,
    format_target_spec,
    format_trace,
    parse_circuit,
    parse_plan,
    parse_target_spec,
)
from statesmith.circuits import compile_plan, gate_count
from statesmith.planner import plan_reduce, reverse_plan

SQRT_HALF = 1 / math.sqrt(2)


class TestTargetSpec:
    def test_symmetric_round_trip(self):
        target = SymmetricTarget(4, (SQRT_HALF, 0.0, 0.0))
        again = parse_target_spec(format_target_spec(target))
        assert isinstance(again, SymmetricTarget)
        assert again.n == 4 and again.coeffs == target.coeffs

    def test_complex_round_trip(self):
        a1 = complex(0.2, -0.1)
        scale = math.sqrt(2 * 0.25 + 8 * abs(a1) ** 2)
        target = SymmetricTarget(4, (0.5 / scale, a1 / scale, 0.0))
        again = parse_target_spec(format_target_spec(target))
        assert again.coeffs == target.coeffs

    def test_general_round_trip(self):
        table = [(0, 1), (1, 1), (1, 1), (1, -1), (0, -1), (1, -1), (1, 1), (1, -1)]
        c1 = math.sqrt((1 - 2 * 0.09) / 6)
        spec = GeneralClassSpec(3, 1, (0.3, c1), tuple(table))
        again = parse_target_spec(format_target_spec(spec))
        assert isinstance(again, GeneralClassSpec)
        assert again.table == spec.table and again.coeffs == spec.coeffs

    def test_malformed_coefficient_names_line(self):
        text = "n = 2\nmode = symmetric\na0 = 0\na1 = zebra\n"
        with pytest.raises(SpecFormatError) as err:
            parse_target_spec(text)
        assert "line 4" in str(err.value)

    def test_missing_key_reported(self):
        with pytest.raises(SpecFormatError) as err:
            parse_target_spec("n = 2\nmode = symmetric\na0 = 0.5\n")
        assert "a1" in str(err.value)

    def test_bad_mode(self):
        with pytest.raises(SpecFormatError) as err:
            parse_target_spec("n = 2\nmode = sideways\n")
        assert "line 2" in str(err.value)

    def test_incomplete_general_table(self):
        text = "n = 2\nmode = general\nM = 0\nc0 = 0.5\n00 0 +\n01 0 -\n"
        with pytest.raises(SpecFormatError) as err:
            parse_target_spec(text)
        assert "missing" in str(err.value)

    def test_comments_and_blanks_ignored(self):
        text = "# a comment\n\nn = 2\nmode = symmetric  # trailing\na0 = 0.5\na1 = 0.5\n"
        target = parse_target_spec(text)
        assert target.coeffs == (0.5 + 0j, 0.5 + 0j)


class TestPlanFiles:
    def roundtrip(self, plan):
        return parse_plan(format_plan(plan))

    def test_bell_plan_round_trip(self):
        plan = plan_reduce(SymmetricTarget(2, (0.0, SQRT_HALF)))
        again = self.roundtrip(plan)
        assert again.n == 2 and again.direction == "reduce"
        assert again.steps == plan.steps  # hex floats are bit-exact

    def test_build_plan_round_trip(self):
        plan = reverse_plan(plan_reduce(SymmetricTarget(4, (SQRT_HALF, 0.0, 0.0))))
        again = self.roundtrip(plan)
        assert again.steps == plan.steps
        assert again.direction == "build"

    def test_complex_target_plan_round_trip(self):
        a1 = complex(0.2, -0.1)
        scale = math.sqrt(2 * 0.25 + 8 * abs(a1) ** 2)
        target = SymmetricTarget(4, (0.5 / scale, a1 / scale, 0.0))
        plan = reverse_plan(plan_reduce(target))
        assert self.roundtrip(plan).steps == plan.steps

    def test_general_plan_keeps_table(self):
        table = [(0, 1), (1, 1), (1, 1), (1, -1), (0, -1), (1, -1), (1, 1), (1, -1)]
        c1 = math.sqrt((1 - 2 * 0.09) / 6)
        spec = GeneralClassSpec(3, 1, (0.3, c1), tuple(table))
        plan = reverse_plan(plan_reduce(spec))
        again = self.roundtrip(plan)
        assert again.general.table == spec.table
        assert again.steps == plan.steps

    def test_not_a_plan(self):
        with pytest.raises(SpecFormatError):
            parse_plan("garbage\n")

    def test_trace_mentions_every_step(self):
        plan = plan_reduce(SymmetricTarget(4, (SQRT_HALF, 0.0, 0.0)))
        text = format_trace(plan)
        assert text.count("step") == len(plan.steps)
        assert "state 0:" in text


class TestCircuitFiles:
    def test_round_trip(self):
        plan = reverse_plan(plan_reduce(SymmetricTarget(2, (0.0, SQRT_HALF))))
        circuit = compile_plan(plan)
        text = format_circuit(circuit, {"rdr_steps": 1, "rpid_steps": 0})
        again = parse_circuit(text)
        assert again.layout == circuit.layout
        assert again.global_phase_pi == circuit.global_phase_pi % 2
        assert len(again.ops) == len(circuit.ops)
        for a, b in zip(again.ops, circuit.ops):
            assert a.name == b.name and a.qubits == b.qubits
            if a.angle is not None:
                assert a.angle == b.angle  # 17 significant digits round-trip doubles
        assert again.header["rdr_steps"] == "1"

    def test_gate_line_shape(self):
        plan = reverse_plan(plan_reduce(SymmetricTarget(2, (0.0, SQRT_HALF))))
        text = format_circuit(compile_plan(plan))
        gate_lines = [l for l in text.splitlines() if l and not l.startswith("#")]
        assert gate_lines[0] == "H 0"
        assert any(l.startswith("RZ ") and l.count(",") == 1 for l in gate_lines)
        assert any(l.startswith("CCX ") and l.count(",") == 2 for l in gate_lines)

    def test_bad_gate_line(self):
        with pytest.raises(SpecFormatError) as err:
            parse_circuit("# statesmith circuit v1\n# n = 2\n# m = 2\nH x\n")
        assert "line 4" in str(err.value)

    def test_determinism(self):
        target = SymmetricTarget(4, (SQRT_HALF, 0.0, 0.0))
        first = format_circuit(compile_plan(reverse_plan(plan_reduce(target))))
        second = format_circuit(compile_plan(reverse_plan(plan_reduce(target))))
        assert first == second
        plan_a = format_plan(reverse_plan(plan_reduce(target)))
        plan_b = format_plan(reverse_plan(plan_reduce(target)))
        assert plan_a == plan_b
