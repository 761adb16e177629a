"""statesmith: compile symmetric entangled target states into gate circuits.

The pipeline: classify a target's amplitudes into coefficient classes,
plan a sequence of equalizing merge steps and amplitude-balancing
iterations that reaches the uniform superposition, reverse the plan, lower
it to elementary gates over explicit registers, and verify the circuit
with a dense statevector simulation.
"""

from .classes import (
    ClassifiedState,
    CoefficientClass,
    GeneralClassSpec,
    SymmetricTarget,
    apply_rdr_classes,
    apply_rpid_classes,
    classify,
    classify_general,
    classify_symmetric,
    phase_canonicalize,
    sufficient_condition,
)
from .circuits import (
    Gate,
    GateCircuit,
    RegisterLayout,
    adder1_uf,
    adder2,
    build_ghz,
    compile_plan,
    gate_count,
    grover_d_network,
    lambda_n_rz,
    selective_phase,
)
from .planner import (
    ClassPhases,
    IterationForecast,
    PiFlip,
    Plan,
    RdrMerge,
    RpiD,
    execute_plan_classes,
    find_min_pair,
    forecast_rpid,
    plan_reduce,
    reverse_plan,
    rpid_bound,
    solve_theta,
)
from .simulator import (
    Statevector,
    apply_diag_phase,
    apply_gate,
    apply_inversion_about_average,
    fidelity,
    run_circuit,
)

__version__ = "0.1.0"
