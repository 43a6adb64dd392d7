import math

import numpy as np
import pytest

from chancompat.channels import (
    amplitude_damping_map,
    depolarizing_map,
    eternal_map,
    identity_map,
)
from chancompat.witness import (
    SINGLET,
    blp_curve,
    cp_indivisibility_measure,
    indivisibility_from_curve,
    one_sided_apply,
    rising_segments,
    teleport_fidelity,
)

KET0 = np.diag([1.0, 0.0]).astype(complex)
KET1 = np.diag([0.0, 1.0]).astype(complex)


class TestBlpCurve:
    def test_divisible_depolarizing_closed_form(self):
        grid = [0.1 * k for k in range(11)]
        curve = blp_curve(depolarizing_map(0.5), KET0, KET1, grid)
        for point in curve:
            assert abs(point.value - math.exp(-0.5 * point.t)) < 1e-12
        vals = [p.value for p in curve]
        assert all(b <= a + 1e-10 for a, b in zip(vals, vals[1:]))

    def test_oscillating_depolarizing_closed_form(self):
        grid = [0.05 * k for k in range(21)]
        curve = blp_curve(depolarizing_map(0.5, 5 * math.pi), KET0, KET1, grid)
        for point in curve:
            want = math.exp(-0.5 * point.t) * math.cos(5 * math.pi * point.t) ** 2
            assert abs(point.value - want) < 1e-12

    def test_identical_states_give_zero(self):
        curve = blp_curve(eternal_map(), KET0, KET0, [0.0, 0.5, 1.0])
        assert all(p.value < 1e-12 for p in curve)


class TestTeleportFidelity:
    def test_initial_time_is_perfect(self):
        n, f = teleport_fidelity(identity_map(), 0.0)
        assert abs(n - 3) < 1e-12 and abs(f - 1) < 1e-12

    def test_classical_boundary(self):
        # w = 1/3 makes the correlation norm exactly 1
        lam = 0.5
        t = math.log(3) / lam
        n, f = teleport_fidelity(depolarizing_map(lam), t)
        assert abs(n - 1) < 1e-9
        assert f == 2 / 3

    def test_closed_form_along_grid(self):
        m = depolarizing_map(0.5, 5 * math.pi)
        for t in (0.04, 0.22, 0.4, 0.77):
            n, f = teleport_fidelity(m, t)
            w = math.exp(-0.5 * t) * math.cos(5 * math.pi * t) ** 2
            assert abs(n - 3 * w) < 1e-10
            assert 2 / 3 <= f <= 1
            assert (f > 2 / 3) == (n > 1)

    def test_singlet_is_normalized(self):
        assert abs(np.trace(SINGLET) - 1) < 1e-12
        out = one_sided_apply(identity_map().evaluate(0.0), SINGLET)
        assert np.max(np.abs(out - SINGLET)) < 1e-12


class TestRisingSegments:
    def test_monotone_decreasing_has_none(self):
        ts = [0.0, 1.0, 2.0, 3.0]
        assert rising_segments(ts, [3.0, 2.0, 1.5, 1.0]) == []

    def test_single_ripple(self):
        ts = [0, 1, 2, 3, 4]
        vals = [0.0, 0.0, 0.5, 1.0, 0.2]
        assert rising_segments(ts, vals) == [(1, 3)]

    def test_dead_band_filters_noise(self):
        ts = [0, 1, 2]
        vals = [0.0, 1e-3, 2e-3]
        assert rising_segments(ts, vals, dead_band=2e-3) == []
        assert rising_segments(ts, vals, dead_band=5e-4) == [(0, 2)]

    def test_open_segment_closes_at_end(self):
        assert rising_segments([0, 1, 2], [0.0, 0.5, 1.0]) == [(0, 2)]

    def test_quantization_tread_does_not_split_segment(self):
        ts = [0, 1, 2, 3, 4]
        assert rising_segments(ts, [0.0, 0.5, 0.5, 1.0, 0.2]) == [(0, 3)]

    def test_trailing_plateau_not_included(self):
        assert rising_segments([0, 1, 2, 3], [0.0, 0.5, 0.5, 0.2]) == [(0, 1)]

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            rising_segments([0, 1], [1.0])


class TestIndivisibilityMeasure:
    def test_from_curve_flat_is_zero(self):
        ts = [0.0, 0.5, 1.0]
        rep = indivisibility_from_curve(ts, [0.3, 0.3, 0.3], identity_map())
        assert rep.n_raw == 0.0
        assert rep.n_normalized == 0.0
        assert rep.rising_segments == ()

    def test_from_curve_trapezoid(self):
        ts = [0.0, 1.0, 2.0, 3.0]
        rs = [0.0, 0.2, 0.1, 0.3]
        rep = indivisibility_from_curve(ts, rs, identity_map())
        want = 0.5 * (0.0 + 0.2) + 0.5 * (0.1 + 0.3)
        assert abs(rep.n_raw - want) < 1e-12
        assert abs(rep.n_normalized - want / (1 + want)) < 1e-12
        assert rep.rising_segments == ((0.0, 1.0), (2.0, 3.0))

    def test_from_curve_derivative_integrand(self):
        ts = [0.0, 1.0, 2.0]
        rep = indivisibility_from_curve(ts, [0.1, 0.4, 0.2], identity_map(), integrand="derivative")
        assert abs(rep.n_raw - 0.3) < 1e-12

    def test_divisible_map_measures_zero(self):
        grid = [0.1 * k for k in range(11)]
        rep = cp_indivisibility_measure(depolarizing_map(0.5), grid, dr=0.02)
        assert rep.n_raw == 0.0
        assert rep.reference.family == "identity"
        assert len(rep.curve) == len(grid)

    def test_rejects_coarse_grid(self):
        with pytest.raises(ValueError):
            cp_indivisibility_measure(depolarizing_map(0.5), [0.0, 1.0])
        with pytest.raises(ValueError):
            cp_indivisibility_measure(
                depolarizing_map(0.5, 5 * math.pi), [0.0, 0.1, 0.2, 0.3]
            )
        with pytest.raises(ValueError):
            cp_indivisibility_measure(
                depolarizing_map(0.5), [0.0, 0.5, 1.0], integrand="midpoint"
            )

    def test_normalization_identity(self):
        ts = list(np.linspace(0, 2, 9))
        rs = [0.0, 0.3, 0.1, 0.5, 0.5, 0.2, 0.8, 0.1, 0.9]
        rep = indivisibility_from_curve(ts, rs, identity_map())
        assert abs(rep.n_normalized - rep.n_raw / (1 + rep.n_raw)) <= 1e-12
        assert (rep.n_raw == 0) == (rep.rising_segments == ())
