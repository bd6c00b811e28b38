import math

import numpy as np
import pytest

from klein_systolic.exceptions import DomainError
from klein_systolic.exceptions import RegimeError
from klein_systolic.solvers import beta_of_omega_satz2
from klein_systolic.solvers import beta_of_omega_thm1
from klein_systolic.solvers import beta_of_omega_thm3
from klein_systolic.solvers import b_from_beta_thm2
from klein_systolic.solvers import omega_from_beta_satz2
from klein_systolic.solvers import omega_from_beta_thm1
from klein_systolic.solvers import omega_from_beta_thm3
from klein_systolic.solvers import q_of_omega
from klein_systolic.solvers import satz2_relation
from klein_systolic.solvers import solve
from klein_systolic.solvers import solve_b0
from klein_systolic.solvers import spherical_b_from_beta
from klein_systolic.solvers import thm1_relation
from klein_systolic.solvers import thm3_relation
from klein_systolic.solvers import threshold_thm1
from klein_systolic.solvers import threshold_thm2


def test_solve_b0():
    b0 = solve_b0()
    assert b0 == pytest.approx(1.1655611852072114, abs=1e-12)
    assert abs(math.tan(b0) - 2.0 * b0) < 1e-12


def test_thresholds():
    assert threshold_thm1() == pytest.approx(
        2.0 * math.log(math.tan(math.pi / 4.0 + solve_b0() / 2.0)),
        rel=1e-14)
    assert threshold_thm2() == pytest.approx(
        2.0 * math.log(2.0 + math.sqrt(3.0)), rel=1e-15)


@pytest.mark.parametrize('beta', [3.5, 5.0, 10.0, 40.0])
def test_omega_from_beta_thm1(beta):
    omega = omega_from_beta_thm1(beta)
    assert solve_b0() <= omega < math.pi / 2.0
    assert abs(thm1_relation(omega, beta)) < 1e-10
    assert float(beta_of_omega_thm1(omega)) == pytest.approx(beta, rel=1e-10)


def test_omega_from_beta_thm1_at_threshold_is_b0():
    assert omega_from_beta_thm1(threshold_thm1()) == solve_b0()


def test_omega_from_beta_thm1_below_threshold():
    with pytest.raises(RegimeError):
        omega_from_beta_thm1(1.0)


@pytest.mark.parametrize('beta', [0.01, 0.5, 2.0, 7.0, 30.0])
def test_omega_from_beta_thm3(beta):
    omega = omega_from_beta_thm3(beta)
    b = float(q_of_omega(omega))
    assert 0.0 < omega < math.pi / 2.0
    assert b > omega
    assert abs(thm3_relation(omega, b)) < 1e-12
    assert float(beta_of_omega_thm3(omega)) == pytest.approx(beta, rel=1e-9)


def test_omega_from_beta_thm3_small_conformal_type():
    # β ≈ 4ω as ω → 0
    assert omega_from_beta_thm3(4e-6) == pytest.approx(1e-6, rel=1e-3)


@pytest.mark.parametrize('beta', [1.7, 3.0, 12.0])
def test_omega_from_beta_satz2(beta):
    omega = omega_from_beta_satz2(beta)
    assert abs(satz2_relation(omega, beta)) < 1e-10
    assert float(beta_of_omega_satz2(omega)) == pytest.approx(beta, rel=1e-10)
    # the band relation at β is the Klein relation at 2β
    assert omega == pytest.approx(omega_from_beta_thm1(2.0 * beta), rel=1e-9)


def test_b_from_beta_thm2():
    assert b_from_beta_thm2(threshold_thm2()) == pytest.approx(math.pi / 3.0)
    assert b_from_beta_thm2(threshold_thm2() + 4.0) == pytest.approx(
        math.pi / 3.0 + 1.0)
    with pytest.raises(RegimeError):
        b_from_beta_thm2(1.0)


def test_spherical_b_from_beta():
    beta = 2.0 * math.asinh(1.0)
    assert spherical_b_from_beta(beta) == pytest.approx(math.pi / 4.0)
    with pytest.raises(DomainError):
        spherical_b_from_beta(-1.0)


def test_solve_b0_result():
    result = solve('b0')
    assert result.root == solve_b0()
    assert abs(result.residual) < 1e-12
    assert result.beta is None


def test_solve_reports_tan_relation():
    result = solve('omega-thm1', 6.0)
    b = result.extra['b']
    assert b == pytest.approx(math.tan(result.root) - result.root)
    assert abs(result.extra['tan_relation']) < 1e-12
    result = solve('omega-thm3', 2.0)
    assert abs(result.extra['tan_relation']) < 1e-12


def test_solve_b_thm2_has_unbounded_bracket():
    result = solve('b-thm2', 5.0)
    assert result.bracket[1] == math.inf
    assert abs(result.residual) < 1e-12


def test_solve_errors():
    with pytest.raises(RegimeError):
        solve('omega-thm1')
    with pytest.raises(RegimeError):
        solve('unknown', 1.0)
    with pytest.raises(DomainError):
        solve('omega-thm3', -2.0)


def test_thm1_roots_over_log_spaced_types():
    for beta in np.geomspace(threshold_thm1() * 1.001, 100.0, 100):
        omega = omega_from_beta_thm1(beta)
        assert abs(thm1_relation(omega, beta)) < 1e-10
        assert float(beta_of_omega_thm1(omega)) == pytest.approx(
            beta, rel=1e-9)


def test_thm3_roots_over_log_spaced_types():
    omegas = []
    for beta in np.geomspace(0.01, 100.0, 100):
        omega = omega_from_beta_thm3(beta)
        b = float(q_of_omega(omega))
        assert abs(thm3_relation(omega, b)) < 1e-12
        assert float(beta_of_omega_thm3(omega)) == pytest.approx(
            beta, rel=1e-9)
        omegas.append(omega)
    assert np.all(np.diff(omegas) > 0.0)


def test_satz2_roots_over_log_spaced_types():
    for beta in np.geomspace(0.5 * threshold_thm1() * 1.001, 50.0, 100):
        omega = omega_from_beta_satz2(beta)
        assert abs(satz2_relation(omega, beta)) < 1e-10
        assert omega == pytest.approx(
            omega_from_beta_thm1(2.0 * beta), rel=1e-9)


def test_thm2_b_over_log_spaced_types():
    for beta in np.geomspace(threshold_thm2(), 1e4, 100):
        b = b_from_beta_thm2(beta)
        assert 2.0 * math.log(2.0 + math.sqrt(3.0)) + 4.0 * (
            b - math.pi / 3.0) == pytest.approx(beta, rel=1e-12)
