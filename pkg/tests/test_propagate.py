import math

import numpy as np
import pytest

from onedatom import (
    Grid1D,
    PhysicalParams,
    PiecewiseConstant,
    Wavefunction1,
    Wavefunction2,
    apply_one_photon,
    apply_two_photon,
    apply_two_photon_linear,
    apply_two_photon_nonlinear,
    default_output_grid,
    gaussian_pulse,
    max_asymmetry,
    norm2,
    rect_nonlin_out,
    rect_one_photon_out,
    rect_two_photon_out,
    rectangular_pulse,
)
from onedatom.propagate import ResolutionWarning

P = PhysicalParams()
L = 20.0


@pytest.fixture(scope="module")
def rect():
    return rectangular_pulse(L)


@pytest.fixture(scope="module")
def out_grid():
    return Grid1D.with_breakpoints(-10.0, L, 512, (0.0, L))


@pytest.fixture(scope="module")
def scattered(rect, out_grid):
    return apply_two_photon(Wavefunction2.from_product(rect), out_grid, P)


class TestOnePhotonExactPath:
    def test_matches_closed_form(self, rect, out_grid):
        out = apply_one_photon(rect, out_grid, P)
        ref = rect_one_photon_out(out_grid.points, L, P)
        assert np.max(np.abs(out.amp - ref)) <= 1e-10

    def test_pinned_values(self, rect):
        probe = Grid1D.with_breakpoints(0.0, L, 3, (10.0,))
        out = apply_one_photon(rect, probe, P)
        at10 = out.amp[np.searchsorted(probe.points, 10.0)]
        assert at10 == pytest.approx((2 * math.exp(-10) - 1) / math.sqrt(L), rel=1e-13)
        assert out.amp[-1] == pytest.approx(1 / math.sqrt(L), rel=1e-13)

    def test_zero_input(self, out_grid):
        zero = Wavefunction1.from_pieces(
            PiecewiseConstant(np.array([0.0, L]), np.array([0j])),
            Grid1D(0.0, L, 51))
        out = apply_one_photon(zero, out_grid, P)
        assert np.all(out.amp == 0)

    def test_causality_exact(self, rect):
        wide = Grid1D.with_breakpoints(-5.0, 30.0, 351, (0.0, L))
        out = apply_one_photon(rect, wide, P)
        assert np.max(np.abs(out.amp[wide.points > L])) == 0.0

    def test_linearity(self, rect, out_grid):
        base = apply_one_photon(rect, out_grid, P)
        scaled_in = Wavefunction1.from_pieces(
            PiecewiseConstant(rect.pieces.boundaries, 2.5 * rect.pieces.values),
            rect.grid)
        scaled = apply_one_photon(scaled_in, out_grid, P)
        rel = np.max(np.abs(scaled.amp - 2.5 * base.amp)) / np.max(np.abs(base.amp))
        assert rel <= 1e-14

    def test_rejects_nonfinite(self, out_grid):
        g = Grid1D(0.0, 1.0, 11)
        amp = np.zeros(11, dtype=complex)
        amp[3] = math.nan
        with pytest.raises(ValueError):
            apply_one_photon(Wavefunction1.sampled(g, amp), out_grid, P)

    def test_warns_on_coarse_output(self):
        fine = PiecewiseConstant(np.array([0.0, 0.01, 0.02]),
                                 np.array([5.0 + 0j, 7.0 + 0j]))
        psi = Wavefunction1.from_pieces(fine, Grid1D(0.0, 0.02, 21))
        coarse = Grid1D(-1.0, 1.0, 21)
        with pytest.warns(ResolutionWarning):
            apply_one_photon(psi, coarse, P)


class TestOnePhotonSampledPath:
    def test_gaussian_matches_brute_force(self):
        gin = Grid1D(0.0, 20.0, 2001)
        psi = gaussian_pulse(10.0, 1.5, gin)
        gout = Grid1D(-10.0, 20.0, 3001)
        out = apply_one_photon(psi, gout, P)

        def brute(x):
            here = np.interp(x, gin.points, psi.amp.real) if 0 <= x <= 20 else 0.0
            if x >= 20.0:
                return here
            xs = np.linspace(max(x, 0.0), 20.0, 20001)
            vals = np.interp(xs, gin.points, psi.amp.real)
            return here - 2.0 * np.trapezoid(np.exp(-(xs - x)) * vals, xs)

        probe = [-5.0, -1.0, 0.3, 5.0, 9.97, 13.2, 19.5]
        got = np.interp(probe, gout.points, out.amp.real)
        want = np.array([brute(x) for x in probe])
        assert np.max(np.abs(got - want)) <= 1e-7


class TestTwoPhotonLinear:
    def test_factored_structure_preserved(self, rect, out_grid):
        out = apply_two_photon_linear(Wavefunction2.from_product(rect), out_grid, P)
        assert out.factor is not None
        one = apply_one_photon(rect, out_grid, P)
        assert np.array_equal(out.amp, np.outer(one.amp, one.amp))

    def test_pinned_value_is_square_of_one_photon(self, scattered, out_grid):
        i = int(np.searchsorted(out_grid.points, 10.0))
        expected = ((2 * math.exp(-10) - 1) ** 2) / L
        assert scattered.linear.amp[i, i].real == pytest.approx(expected, rel=1e-13)

    def test_zero_input(self, out_grid):
        g = Grid1D(0.0, 1.0, 16)
        zero = Wavefunction2(g, np.zeros((16, 16)))
        out = apply_two_photon_linear(zero, out_grid, P)
        assert np.all(out.amp == 0)

    def test_rejects_asymmetric_input(self, out_grid):
        g = Grid1D(0.0, 1.0, 4)
        amp = np.zeros((4, 4), dtype=complex)
        amp[0, 1] = 1.0
        with pytest.raises(ValueError):
            apply_two_photon_linear(Wavefunction2(g, amp), out_grid, P)


class TestTwoPhotonNonlinear:
    def test_matches_closed_form(self, scattered, out_grid):
        x = out_grid.points
        ref = rect_nonlin_out(x[:, None], x[None, :], L, P)
        assert np.max(np.abs(scattered.nonlinear.amp - ref)) <= 1e-10

    def test_pinned_plateau_value(self, scattered, out_grid):
        i = int(np.searchsorted(out_grid.points, 10.0))
        expected = -(4 / L) * (1 - math.exp(-10)) ** 2
        assert scattered.nonlinear.amp[i, i].real == pytest.approx(expected, rel=1e-13)

    def test_zero_beyond_pulse_end(self, rect):
        wide = Grid1D.with_breakpoints(-5.0, 30.0, 351, (0.0, L))
        out = apply_two_photon_nonlinear(Wavefunction2.from_product(rect), wide, P)
        beyond = wide.points > L
        assert np.max(np.abs(out.amp[beyond, :])) == 0.0
        assert np.max(np.abs(out.amp[:, beyond])) == 0.0

    def test_off_diagonal_against_brute_force(self, scattered, out_grid):
        # 2D quadrature collapses to a separable integral for the rectangle
        i = int(np.searchsorted(out_grid.points, 10.0))
        j = int(np.searchsorted(out_grid.points, 12.0))
        x1, x2 = out_grid.points[i], out_grid.points[j]
        xs = np.arange(x2, L + 5e-4, 1e-3)
        inner = np.trapezoid(np.exp(-(xs - x2)) / math.sqrt(L), xs)
        brute = -4.0 * math.exp(-(x2 - x1)) * inner * inner
        assert scattered.nonlinear.amp[i, j].real == pytest.approx(brute, rel=1e-5)


class TestTwoPhotonTotal:
    def test_plateau_values(self, scattered, out_grid):
        i = int(np.searchsorted(out_grid.points, 10.0))
        assert scattered.total.amp[i, i].real == pytest.approx(-3 / L, abs=1e-4)
        k = int(np.searchsorted(out_grid.points, 2.0))
        assert scattered.total.amp[k, i].real == pytest.approx(1 / L, abs=5e-4)

    def test_total_is_sum_of_parts(self, scattered):
        assert np.array_equal(scattered.total.amp,
                              scattered.linear.amp + scattered.nonlinear.amp)

    def test_outputs_exactly_symmetric(self, scattered):
        assert max_asymmetry(scattered.total) == 0.0
        assert max_asymmetry(scattered.linear) == 0.0
        assert max_asymmetry(scattered.nonlinear) == 0.0

    def test_matches_closed_form(self, scattered, out_grid):
        x = out_grid.points
        ref = rect_two_photon_out(x[:, None], x[None, :], L, P)
        assert np.max(np.abs(scattered.total.amp - ref)) <= 1e-10

    def test_unitarity_small_pulse(self):
        small = rectangular_pulse(5.0)
        grid = Grid1D.with_breakpoints(-20.0, 5.0, 2501, (0.0, 5.0))
        res = apply_two_photon(Wavefunction2.from_product(small), grid, P)
        assert abs(norm2(res.total) - 1.0) <= 1e-4

    def test_linearity_2d(self, rect, out_grid, scattered):
        scaled_pieces = PiecewiseConstant(rect.pieces.boundaries,
                                          (0.5 + 0.25j) * rect.pieces.values)
        scaled_rect = Wavefunction1.from_pieces(scaled_pieces, rect.grid)
        res = apply_two_photon(Wavefunction2.from_product(scaled_rect), out_grid, P)
        factor = (0.5 + 0.25j) ** 2
        rel = (np.max(np.abs(res.total.amp - factor * scattered.total.amp))
               / np.max(np.abs(scattered.total.amp)))
        assert rel <= 1e-14


class TestGeneral2DPath:
    def test_matches_factored_path(self):
        gin = Grid1D(0.0, 12.0, 401)
        f = gaussian_pulse(6.0, 1.2, gin)
        gout = Grid1D(-8.0, 12.0, 601)
        res_f = apply_two_photon(Wavefunction2.from_product(f), gout, P)
        stripped = Wavefunction2(gin, np.outer(f.amp, f.amp))
        res_g = apply_two_photon(stripped, gout, P)
        assert np.max(np.abs(res_f.total.amp - res_g.total.amp)) <= 1e-12
        assert max_asymmetry(res_g.total) == 0.0


def test_default_output_grid(rect):
    g = default_output_grid(rect, P)
    assert g.x_min == pytest.approx(-10.0)
    assert g.x_max == pytest.approx(L)
    assert g.dx == pytest.approx(0.01, rel=1e-6)
    assert 0.0 in g.points and L in g.points
