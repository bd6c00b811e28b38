import math

import numpy as np
import pytest

from klein_systolic.constants import MOBIUS_SATZ2
from klein_systolic.constants import SIGMA_N_V
from klein_systolic.constants import SIGMA_V
from klein_systolic.constants import SIGMA_V_H
from klein_systolic.constants import constant
from klein_systolic.exceptions import DomainError
from klein_systolic.exceptions import RegimeError
from klein_systolic.extremal import extremal_for_beta
from klein_systolic.measures import DIRECT
from klein_systolic.measures import DOUBLED
from klein_systolic.measures import GREAT_CIRCLES
from klein_systolic.measures import HORIZONTALS
from klein_systolic.measures import L_SIGMA
from klein_systolic.measures import VERTICALS
from klein_systolic.measures import CurveFamilyMeasure
from klein_systolic.measures import area_integral
from klein_systolic.measures import certify
from klein_systolic.measures import certify_theorem
from klein_systolic.measures import family_masses
from klein_systolic.measures import great_circle_mass_quadrature
from klein_systolic.measures import h_density
from klein_systolic.measures import m_prime_thm1
from klein_systolic.measures import m_prime_thm2
from klein_systolic.measures import m_prime_thm2_expanded
from klein_systolic.measures import m_prime_thm3
from klein_systolic.measures import probe_functions
from klein_systolic.measures import pushforward_pair
from klein_systolic.measures import theorem_families
from klein_systolic.solvers import q_of_omega


def one(u, v):
    return np.ones(np.broadcast(u, v).shape)


def test_h_density_without_horizontals():
    omega, a = 1.0, 0.3
    expected = (
        math.sin(a) / (math.pi * math.cos(a))
        * math.sqrt(math.cos(a) ** 2 - math.cos(omega) ** 2))
    assert h_density(a, omega, m_prime_thm1(omega)) == pytest.approx(
        expected, rel=1e-14)
    assert h_density(0.0, omega, 1.0) == 0.0


def test_h_density_domain():
    with pytest.raises(DomainError):
        h_density(1.0, 1.0, 1.0)
    with pytest.raises(DomainError):
        h_density(-0.1, 1.0, 1.0)
    with pytest.raises(DomainError):
        h_density(0.3, 1.0, 2.0)
    with pytest.raises(DomainError):
        h_density(0.3, 0.0, 0.0)


def test_m_prime_thm2_forms_agree():
    for b in (math.pi / 3.0, 1.5, 4.0, 100.0):
        assert m_prime_thm2(b) == pytest.approx(
            m_prime_thm2_expanded(b), rel=1e-13)


def test_horizontal_mass_vanishes_at_largest_m_prime():
    omega = 1.2
    m1, m2, m3 = family_masses(omega, 2.0, m_prime_thm1(omega))
    assert m3 == pytest.approx(0.0, abs=1e-15)
    assert m2 == m_prime_thm1(omega)
    assert m1 == pytest.approx(
        4.0 * math.sin(omega) - 4.0 * omega * math.cos(omega))


def test_family_masses_domain():
    with pytest.raises(DomainError):
        family_masses(1.0, 0.5, 1.0)


@pytest.mark.parametrize('omega, m_prime', [
    (1.0, m_prime_thm1(1.0)),
    (math.pi / 3.0, m_prime_thm2(2.0)),
    (0.4, m_prime_thm3(0.4, float(q_of_omega(0.4)))),
    (0.7, 0.0),
])
def test_great_circle_mass_quadrature(omega, m_prime):
    m1, _, _ = family_masses(omega, 2.0, m_prime)
    assert great_circle_mass_quadrature(omega, m_prime) == pytest.approx(
        m1, abs=1e-8)


def test_curve_family_measure():
    measure = CurveFamilyMeasure(VERTICALS, 1.0, 1.5, 0.8, 'v')
    assert measure.mass == 0.8
    assert measure.density() == pytest.approx(0.8 / math.pi)
    assert measure.curve_length() == 6.0
    with pytest.raises(DomainError):
        CurveFamilyMeasure(VERTICALS, 1.0, 1.5, 0.8, 'v', mass=1.0)
    with pytest.raises(DomainError):
        CurveFamilyMeasure('diagonals', 1.0, 1.5, 0.8, 'v')


def test_pushforward_of_constant_is_mass_times_length():
    omega, b = 1.0, 1.5
    m_prime = 0.8
    for family in (GREAT_CIRCLES, VERTICALS, HORIZONTALS):
        measure = CurveFamilyMeasure(family, omega, b, m_prime, 'v')
        assert pushforward_pair(measure, one) == pytest.approx(
            measure.mass * measure.curve_length(), rel=1e-8)


def test_horizontals_miss_the_caps():
    omega, b = 1.0, 1.5
    measure = CurveFamilyMeasure(HORIZONTALS, omega, b, 0.5, 'h')

    def cap(u, v):
        return np.where(np.abs(v) < omega, np.cos(v), 0.0) * np.ones_like(u)

    assert pushforward_pair(measure, cap) == 0.0


def test_families_push_constant_to_volume():
    metric = extremal_for_beta(SIGMA_V_H, 2.0).metric
    families = theorem_families(SIGMA_V_H, metric.omega, metric.b)
    pushed = sum(pushforward_pair(m, one) for m in families)
    assert pushed == pytest.approx(metric.closed_form_volume(), rel=1e-8)
    assert area_integral(metric, one) == pytest.approx(
        metric.closed_form_volume(), rel=1e-12)


def test_probe_functions():
    probes = probe_functions(1.0, 1.5)
    names = [p.name for p in probes]
    assert len(set(names)) == 7
    bump = dict(probes)['band_bump']
    assert float(bump(0.0, 0.0)) == 0.0
    assert float(bump(0.3, 1.5)) > 0.0
    assert float(bump(0.3, -1.5)) == float(bump(0.3, 1.5))


@pytest.mark.parametrize('theorem, beta', [
    (SIGMA_V, 4.0),
    (SIGMA_V, 6.0),
    (SIGMA_N_V, 3.0),
    (SIGMA_N_V, 6.0),
    (SIGMA_V_H, 0.5),
    (SIGMA_V_H, 2.0),
])
def test_certificate_closes_and_gives_constant(theorem, beta):
    certificate = certify_theorem(theorem, beta)
    assert certificate.valid
    assert certificate.bookkeeping == DIRECT
    assert certificate.eps_push < 1e-6
    assert certificate.eps_mass < 1e-10
    assert certificate.C == pytest.approx(
        constant(theorem, beta).C, rel=1e-9)
    assert set(certificate.residuals) == {
        p.name for p in probe_functions(1.0, 1.5)}


@pytest.mark.slow
@pytest.mark.parametrize('theorem, betas', [
    (SIGMA_V, [3.5, 4.5, 6.0, 8.0, 12.0]),
    (SIGMA_N_V, [3.0, 4.0, 6.0, 10.0, 20.0]),
    (SIGMA_V_H, [0.25, 0.5, 2.0, 5.0, 12.0]),
])
def test_certificates_over_conformal_types(theorem, betas):
    for beta in betas:
        certificate = certify_theorem(theorem, beta)
        assert certificate.valid, beta
        assert certificate.C == pytest.approx(
            constant(theorem, beta).C, rel=1e-9)


def test_sigma_v_h_classes_share_volume():
    certificate = certify_theorem(SIGMA_V_H, 2.0)
    assert certificate.exponent == 3
    for product in certificate.class_products.values():
        assert product == pytest.approx(certificate.volume / 3.0, rel=1e-9)


def test_sigma_n_v_merges_classes_and_rejects_doubled_volume():
    certificate = certify_theorem(SIGMA_N_V, 6.0)
    assert set(certificate.class_products) == {L_SIGMA, 'v'}
    # the constant probe alone is off by half the doubled volume
    assert certificate.alternatives[DOUBLED] >= 0.5 - 1e-6


def test_certificate_with_doubled_volume_does_not_close():
    extremal = extremal_for_beta(SIGMA_N_V, 6.0)
    families = theorem_families(
        SIGMA_N_V, extremal.spec.omega, extremal.spec.b)
    certificate = certify(
        SIGMA_N_V, extremal.metric, families, bookkeeping=DOUBLED)
    assert not certificate.valid
    assert certificate.volume == pytest.approx(
        2.0 * extremal.metric.closed_form_volume())


def test_certify_errors():
    extremal = extremal_for_beta(SIGMA_V, 6.0)
    families = theorem_families(
        SIGMA_V, extremal.spec.omega, extremal.spec.b)
    with pytest.raises(DomainError):
        certify(SIGMA_V, extremal.metric, families, bookkeeping='tripled')
    with pytest.raises(DomainError):
        certify(SIGMA_V, extremal.metric, [])


def test_certify_theorem_needs_flat_spherical_klein_extremal():
    with pytest.raises(RegimeError):
        certify_theorem(SIGMA_V, 1.0)
    with pytest.raises(DomainError):
        certify_theorem(MOBIUS_SATZ2, 3.0)
