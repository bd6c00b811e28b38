import math

import numpy as np
import pytest

from klein_systolic.constants import SIGMA_V_H
from klein_systolic.exceptions import ClosedFormUnavailable
from klein_systolic.exceptions import DomainError
from klein_systolic.exceptions import InternalError
from klein_systolic.exceptions import InvalidMetric
from klein_systolic.exceptions import ResolutionError
from klein_systolic.extremal import extremal_for_beta
from klein_systolic.geometry import ConstantProfile
from klein_systolic.geometry import FlatSphericalProfile
from klein_systolic.geometry import GridMetric
from klein_systolic.geometry import MobiusHalfProfile
from klein_systolic.geometry import TabulatedProfile
from klein_systolic.geometry import to_conformal_grid
from klein_systolic.systoles import CLOSED_FORM
from klein_systolic.systoles import GRAPH
from klein_systolic.systoles import HORIZONTAL
from klein_systolic.systoles import SIGMA
from klein_systolic.systoles import VERTICAL
from klein_systolic.systoles import _check_row_bound
from klein_systolic.systoles import GreatCircle
from klein_systolic.systoles import great_circle_latitude
from klein_systolic.systoles import homotopy_class
from klein_systolic.systoles import horizontal_row_length
from klein_systolic.systoles import length_closed_form
from klein_systolic.systoles import length_graph
from klein_systolic.systoles import systole_report
from klein_systolic.verification import PerturbationSpec
from klein_systolic.verification import random_conformal_factor


def test_homotopy_class():
    assert homotopy_class('sigma') is SIGMA
    assert homotopy_class(VERTICAL) is VERTICAL
    with pytest.raises(DomainError):
        homotopy_class('diagonal')


@pytest.mark.parametrize('theta, a', [(0.0, 0.3), (0.2, 0.7), (-1.0, 1.4)])
def test_great_circle_has_length_pi(theta, a):
    circle = GreatCircle(theta, a)
    assert circle.length() == pytest.approx(math.pi, rel=1e-10)
    assert float(circle.latitude(theta)) == pytest.approx(a)
    assert float(circle.latitude(theta + math.pi / 2.0)) == pytest.approx(
        0.0, abs=1e-15)


def test_great_circle_latitude():
    circle = GreatCircle(0.5, 0.8)
    assert great_circle_latitude(circle, 0.5) == pytest.approx(0.8)
    assert great_circle_latitude(circle, 0.5 - math.pi / 2.0) == pytest.approx(
        0.0, abs=1e-15)
    flat = GreatCircle(0.5, 0.0)
    u = np.linspace(-1.0, 2.0, 7)
    assert np.array_equal(great_circle_latitude(flat, u), np.zeros(7))
    assert flat.length() == pytest.approx(math.pi, rel=1e-12)


def test_great_circle_integrates_constant():
    circle = GreatCircle(0.4, 0.9)
    assert circle.integrate(lambda u, v: 2.0 + 0.0 * u) == pytest.approx(
        2.0 * math.pi, rel=1e-10)


def test_closed_form_lengths_of_flat_spherical(flat_spherical):
    report = systole_report(flat_spherical)
    assert report.l_sigma == math.pi
    assert report.l_v == pytest.approx(4.0 * flat_spherical.b)
    assert report.l_h == pytest.approx(
        2.0 * math.pi * math.cos(flat_spherical.omega))
    assert report.L_sigma == min(report.l_sigma, report.l_h)
    assert report.volume == pytest.approx(
        flat_spherical.closed_form_volume())
    assert set(report.sources.values()) == {CLOSED_FORM}
    assert report.resolution is None


def test_closed_form_lengths_of_constant_profile():
    metric = ConstantProfile(0.5, 2.0)
    assert length_closed_form(SIGMA, metric) == pytest.approx(0.5 * math.pi)
    assert length_closed_form(VERTICAL, metric) == 4.0
    assert length_closed_form(HORIZONTAL, metric) == pytest.approx(math.pi)


def test_closed_form_unavailable(flat_grid):
    with pytest.raises(ClosedFormUnavailable):
        length_closed_form(SIGMA, flat_grid)
    with pytest.raises(ClosedFormUnavailable):
        length_closed_form(
            SIGMA, TabulatedProfile([0.0, 1.0], [1.0, 2.0]))


def test_mobius_band_has_no_class_lengths(flat_spherical):
    half = MobiusHalfProfile(flat_spherical)
    with pytest.raises(DomainError):
        length_closed_form(VERTICAL, half)
    with pytest.raises(DomainError):
        systole_report(half)


def test_graph_lengths_of_flat_grid(flat_grid):
    report = systole_report(flat_grid)
    assert report.l_sigma == pytest.approx(math.pi, rel=1e-12)
    assert report.l_v == pytest.approx(2.0, rel=1e-12)
    assert report.l_h == pytest.approx(2.0 * math.pi, rel=1e-12)
    assert report.L_sigma == report.l_sigma
    assert report.volume == pytest.approx(2.0 * math.pi)
    assert report.resolution == (65, 65)
    assert set(report.sources.values()) == {GRAPH}


def test_graph_lengths_scale_with_factor(flat_grid):
    report = systole_report(flat_grid.scaled(2.0), classes=['sigma', 'v'])
    assert report.l_sigma == pytest.approx(2.0 * math.pi, rel=1e-12)
    assert report.l_v == pytest.approx(4.0, rel=1e-12)
    assert report.l_h is None
    assert report.L_sigma is None


def test_length_graph_result(flat_grid):
    result = length_graph(SIGMA, flat_grid)
    assert result.resolution == (65, 65)
    assert result.basepoint[1] == pytest.approx(0.0, abs=1e-12)
    assert result.coarse_length == pytest.approx(math.pi, rel=1e-12)
    assert result.extrapolated == pytest.approx(math.pi, rel=1e-12)
    assert result.error_estimate < 1e-12
    assert result.dijkstra_calls > 1


def test_length_graph_checks_input(flat_grid, flat_spherical):
    with pytest.raises(ResolutionError):
        length_graph(VERTICAL, flat_grid, 33, 33)
    with pytest.raises(InvalidMetric):
        length_graph(VERTICAL, flat_spherical)


def test_tabulated_profile_falls_back_to_graph():
    metric = TabulatedProfile([0.0, 1.0], [1.0, 1.0])
    report = systole_report(metric)
    assert report.sources == {
        'sigma': GRAPH, 'v': CLOSED_FORM, 'h': CLOSED_FORM}
    assert report.l_sigma == pytest.approx(math.pi, rel=1e-9)
    assert report.resolution == (129, 129)


def test_graph_lengths_approach_closed_forms(flat_spherical):
    grid = to_conformal_grid(flat_spherical, 129, 129)
    report = systole_report(grid)
    assert report.l_sigma == pytest.approx(math.pi, rel=0.03)
    assert report.l_v == pytest.approx(4.0 * flat_spherical.b, rel=0.03)
    assert report.l_h == pytest.approx(
        2.0 * math.pi * math.cos(flat_spherical.omega), rel=0.03)


def test_horizontal_row_length(flat_grid):
    assert horizontal_row_length(flat_grid, 32) == pytest.approx(
        2.0 * math.pi, rel=1e-14)
    with pytest.raises(DomainError):
        horizontal_row_length(flat_grid, 65)


@pytest.mark.slow
def test_graph_lengths_on_fine_lattice(flat_spherical):
    grid = to_conformal_grid(flat_spherical, 513, 513)
    report = systole_report(grid, classes=['sigma'])
    assert report.l_sigma == pytest.approx(math.pi, rel=0.01)
    assert report.error_estimate['sigma'] < 0.02


def _shortest_row(grid):
    return min(horizontal_row_length(grid, j) for j in range(grid.n_v))


@pytest.mark.parametrize('seed', [0, 1, 2, 3, 4])
def test_graph_l_h_is_below_every_row_loop(flat_spherical, seed):
    base = to_conformal_grid(flat_spherical, 65, 65)
    spec = PerturbationSpec(seed=seed, amplitude=0.5, resolution=(65, 65))
    grid = random_conformal_factor(spec, base)
    report = systole_report(grid, classes=['h'])
    assert report.l_h <= _shortest_row(grid) * (1.0 + 1e-12)


def test_graph_l_h_of_profile_grid_is_a_row_loop(flat_spherical):
    grid = to_conformal_grid(flat_spherical, 65, 65)
    report = systole_report(grid, classes=['h'])
    assert report.l_h == pytest.approx(_shortest_row(grid), rel=1e-12)


def test_row_bound_violation_is_internal_error(flat_grid):
    _check_row_bound(2.0 * math.pi, flat_grid)
    with pytest.raises(InternalError):
        _check_row_bound(2.0 * math.pi * (1.0 + 1e-9), flat_grid)


def test_extrapolation_uses_the_coarsened_lattice(flat_spherical):
    grid = to_conformal_grid(flat_spherical, 129, 129)
    result = length_graph(SIGMA, grid)
    coarse = length_graph(SIGMA, grid.coarsened())
    assert result.coarse_length == pytest.approx(coarse.length, rel=1e-12)
    assert result.error_estimate == pytest.approx(
        abs(result.length - result.coarse_length), abs=1e-15)
    assert result.extrapolated == pytest.approx(
        result.length + (result.length - result.coarse_length) / 3.0)
    # the equator row of both lattices lies below π
    assert result.coarse_length < result.length < math.pi


def _fine_lattice_cases():
    g = FlatSphericalProfile(1.3, math.tan(1.3) - 1.3)
    e = extremal_for_beta(SIGMA_V_H, 2.0).metric
    return [
        ('G_b', g, SIGMA, math.pi),
        ('G_b', g, VERTICAL, 4.0 * g.b),
        ('E_b', e, SIGMA, math.pi),
        ('E_b', e, VERTICAL, 4.0 * e.b),
        ('E_b', e, HORIZONTAL, 2.0 * math.pi * math.cos(e.omega)),
    ]


@pytest.mark.slow
@pytest.mark.parametrize('name, metric, cls, exact', _fine_lattice_cases())
def test_fine_lattice_lengths_are_bracketed(name, metric, cls, exact):
    grid = to_conformal_grid(metric, 513, 513)
    result = length_graph(cls, grid)
    assert result.length == pytest.approx(exact, rel=0.02)
    assert abs(exact - result.length) <= result.error_estimate + 1e-12


@pytest.mark.slow
@pytest.mark.parametrize('cls, exact', [
    (SIGMA, math.pi), (VERTICAL, 2.0), (HORIZONTAL, 2.0 * math.pi)])
def test_flat_fine_lattice_lengths(cls, exact):
    result = length_graph(cls, GridMetric(1.0, np.ones((513, 513))))
    assert result.length == pytest.approx(exact, rel=0.02)
    assert abs(exact - result.length) <= result.error_estimate + 1e-12
