"""End-to-end acceptance suite.

Each case runs one named check from chancompat.validation at its stated
tolerance and prints a PASS/FAIL line with the measured numbers. Figure
sweeps are cached inside the validation module, so related criteria share
them. Expect a few minutes of runtime for the full module.
"""

import pytest

from chancompat.validation import CHECKS

CRITERIA = [
    "depolarizing_zero_crossing",
    "monotonicity",
    "backflow_depolarizing",
    "backflow_amplitude_damping",
    "eternal_no_backflow",
    "upward_closure",
    "measurement_channel_bound",
    "noise_dominance_cap",
    "identity_self_robustness",
    "teleportation_curve",
    "measure_signs",
    "solver_suite",
]


def test_criteria_registry_is_complete():
    assert CRITERIA == list(CHECKS)


@pytest.mark.parametrize("name", CRITERIA)
def test_acceptance(name):
    result = CHECKS[name]()
    print(f"[{'PASS' if result.passed else 'FAIL'}] {name}: {result.detail}")
    assert result.passed, result.detail
