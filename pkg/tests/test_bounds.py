"""Arithmetic and soundness checks for the closed-form bound evaluators."""

import math

import numpy as np
import pytest

from gibbsmarkov import ed
from gibbsmarkov.bounds import (
    area_law_saturation_series,
    critical_beta,
    finite_range_cmi_bound,
    power_law_cmi_bound,
    recovery_error_bound,
    surface_region,
    tail_sum_check,
)
from gibbsmarkov.random_models import power_law_chain, random_chain
from gibbsmarkov.spin_model import FiniteRange, PAULI, build_graph, build_hamiltonian


class TestCriticalBeta:
    def test_values(self):
        base = 1.0 / (8.0 * math.e ** 3)
        for k in (1, 2, 4):
            assert critical_beta(k) == pytest.approx(base / k)
        assert critical_beta(2) == pytest.approx(3.1117e-3, rel=1e-3)

    def test_rejects_nonpositive_k(self):
        with pytest.raises(ValueError):
            critical_beta(0)


class TestSurfaceRegion:
    def grid(self):
        edges = []
        for i in range(3):
            for j in range(3):
                if j < 2:
                    edges.append((3 * i + j, 3 * i + j + 1))
                if i < 2:
                    edges.append((3 * i + j, 3 * i + j + 3))
        return build_graph(9, edges)

    def test_zero_width_is_empty(self):
        g = self.grid()
        assert surface_region(g, (0, 1, 2), 0) == ()

    def test_whole_system_has_no_surface(self):
        g = self.grid()
        assert surface_region(g, range(9), 3) == ()

    def test_row_of_grid(self):
        g = self.grid()
        # top row: every vertex is one step from the middle row
        assert surface_region(g, (0, 1, 2), 1) == (0, 1, 2)
        # top two rows: width-1 surface is the middle row only
        assert surface_region(g, (0, 1, 2, 3, 4, 5), 1) == (3, 4, 5)
        assert surface_region(g, (0, 1, 2, 3, 4, 5), 2) == (0, 1, 2, 3, 4, 5)

    def test_rejects_negative_width(self):
        with pytest.raises(ValueError):
            surface_region(self.grid(), (0,), -1)


class TestFiniteRangeBound:
    def test_arithmetic(self):
        bc = critical_beta(2)
        rep = finite_range_cmi_bound(4, 0.5 * bc, bc, 4.0, 2)
        # e * 4 * 0.5^2 / (1 - 0.5) = 2e
        assert rep.value == pytest.approx(2.0 * math.e)
        assert rep.valid

    def test_monotone_in_distance(self):
        bc = critical_beta(2)
        vals = [
            finite_range_cmi_bound(1, 0.5 * bc, bc, d, 1).value for d in (1, 2, 5)
        ]
        assert vals[0] > vals[1] > vals[2]

    def test_disconnected_regions_give_zero(self):
        bc = critical_beta(2)
        rep = finite_range_cmi_bound(3, 0.5 * bc, bc, math.inf, 1)
        assert rep.value == 0.0 and rep.valid

    def test_invalid_above_threshold(self):
        bc = critical_beta(2)
        rep = finite_range_cmi_bound(3, 2.0 * bc, bc, 2.0, 1)
        assert not rep.valid and math.isinf(rep.value)
        assert "beta" in rep.reason


class TestPowerLawBound:
    def test_arithmetic(self):
        bc = critical_beta(2)
        beta = bc / 22.0
        rep = power_law_cmi_bound(2, beta, 2, 2.0, 5.0)
        c_beta = (11.0 * math.exp(0.5) / bc) / 0.5
        assert rep.value == pytest.approx(beta * 2 * c_beta / 25.0)
        assert rep.valid

    def test_hypothesis_flags(self):
        bc = critical_beta(2)
        too_hot = power_law_cmi_bound(1, bc / 5.0, 2, 2.0, 10.0)
        assert not too_hot.valid and "beta" in too_hot.reason
        too_close = power_law_cmi_bound(1, bc / 22.0, 2, 2.0, 3.0)
        assert not too_close.valid and "d_AC" in too_close.reason

    def test_report_formatting(self):
        rep = power_law_cmi_bound(1, critical_beta(2) / 22.0, 2, 2.0, 10.0)
        text = str(rep)
        assert "power_law_cmi_bound" in text and "valid" in text


class TestRecoveryBound:
    def test_values(self):
        assert recovery_error_bound(0.0) == 0.0
        assert recovery_error_bound(1.0 / math.log(2.0)) == pytest.approx(1.0)

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            recovery_error_bound(-1e-9)


class TestAreaLawSeries:
    def test_increments_below_bounds_on_chain(self):
        bc = critical_beta(2)
        ham = random_chain(8, beta=0.5 * bc, seed=61)
        series = area_law_saturation_series(
            ham, (0, 1), [(2, 3), (4, 5), (6, 7)]
        )
        assert len(series) == 3
        for increment, bound in series:
            assert bound.valid
            assert increment <= bound.value + 1e-12
        # increments shrink as the new slice moves away
        incs = [inc for inc, _ in series]
        assert incs[2] <= incs[0] + 1e-12


class TestTailSums:
    def test_power_law_measured_below_bound(self):
        bc = critical_beta(2)
        ham = power_law_chain(6, alpha=2.0, beta=bc / 22.0, seed=7)
        for m in (1, 2, 3):
            measured, bound, ok = tail_sum_check(ham, m, l0=4)
            assert ok
            assert measured <= bound

    def test_m1_matches_direct_tail(self):
        bc = critical_beta(2)
        ham = power_law_chain(6, alpha=2.0, beta=bc / 22.0, seed=7)
        from gibbsmarkov.spin_model import g_tilde

        direct = sum(g_tilde(ham, l) for l in range(3, 7))
        measured, _, _ = tail_sum_check(ham, 1, l0=3)
        assert measured == pytest.approx(direct)

    def test_finite_range_tail_vanishes_beyond_range(self):
        bc = critical_beta(2)
        ham = random_chain(6, beta=0.5 * bc, seed=67)
        measured, bound, ok = tail_sum_check(ham, 1, l0=2)
        assert measured == 0.0 and ok

    def test_rejects_bad_arguments(self):
        bc = critical_beta(2)
        ham = random_chain(4, beta=0.5 * bc, seed=71)
        with pytest.raises(ValueError):
            tail_sum_check(ham, 0, 1)
        with pytest.raises(ValueError):
            tail_sum_check(ham, 1, 0)
