"""Constructors of the extremal metrics of the systolic inequalities."""

import collections
import logging
import math

from dataclasses import dataclass

from klein_systolic.constants import FLAT_SPHERICAL
from klein_systolic.constants import KLEIN_COUNTERPART
from klein_systolic.constants import MOBIUS_SATZ2
from klein_systolic.constants import MOBIUS_SATZ3
from klein_systolic.constants import REGIMES
from klein_systolic.constants import SIGMA_N_V
from klein_systolic.constants import SIGMA_V
from klein_systolic.constants import SPHERICAL
from klein_systolic.constants import check_theorem
from klein_systolic.exceptions import DomainError
from klein_systolic.exceptions import SolverError
from klein_systolic.geometry import HALF_PI
from klein_systolic.geometry import FlatSphericalProfile
from klein_systolic.geometry import MobiusHalfProfile
from klein_systolic.geometry import SphericalCapProfile
from klein_systolic.geometry import ThirdPiProfile
from klein_systolic.solvers import b_from_beta_thm2
from klein_systolic.solvers import omega_from_beta_thm1
from klein_systolic.solvers import omega_from_beta_thm3
from klein_systolic.solvers import q_of_omega
from klein_systolic.solvers import spherical_b_from_beta
from klein_systolic.solvers import threshold_thm1
from klein_systolic.solvers import threshold_thm2
from klein_systolic.validators import IntervalValidator


logger = logging.getLogger(__name__)

Extremal = collections.namedtuple('Extremal', ['spec', 'metric'])


@dataclass(frozen=True)
class ExtremalSpec(object):
    """
    The theorem, regime and parameters of an extremal metric.

    In the spherical regime the metric is G_b' and ω = b (no flat band).
    For the Möbius families β is the conformal half-type and (ω, b) are the
    parameters of the Klein extremal it is restricted from.

    """

    theorem: str
    regime: str
    beta: float
    omega: float
    b: float

    def __post_init__(self):
        check_theorem(self.theorem)
        if self.regime not in REGIMES:
            raise DomainError(
                'Unknown regime "{}"; expected one of {}.'.format(
                    self.regime, ', '.join(REGIMES)))
        IntervalValidator('beta', lower=0.0)(self.beta)
        IntervalValidator('omega', lower=0.0, upper=HALF_PI)(self.omega)
        IntervalValidator('b', lower=self.omega, closed='left')(self.b)


def build_G_prime(b):
    """Return G_b': f = cos on |v| ≤ b, invariant by v ↦ v + 2b."""
    b = IntervalValidator('b', lower=0.0, upper=HALF_PI)(b)
    return SphericalCapProfile(b)


def build_G(omega, b):
    """Return G_b, the flat-spherical metric of parameters (ω, b)."""
    omega = IntervalValidator('omega', lower=0.0, upper=HALF_PI)(omega)
    b = IntervalValidator('b', lower=omega, closed='left')(b)
    return FlatSphericalProfile(omega, b)


def build_H(b):
    """Return H_b: ω = π/3 and flat band factor 1/2, for b ≥ π/3."""
    b = IntervalValidator('b', lower=math.pi / 3.0, closed='left')(b)
    return ThirdPiProfile(b)


def build_E(omega):
    """Return E_b: the flat-spherical metric of parameters (ω, q(ω))."""
    omega = IntervalValidator('omega', lower=0.0, upper=HALF_PI)(omega)
    return FlatSphericalProfile(omega, max(float(q_of_omega(omega)), omega))


def _spherical(theorem, beta):
    b = spherical_b_from_beta(beta)
    return Extremal(
        ExtremalSpec(theorem, SPHERICAL, beta, b, b), build_G_prime(b))


def _klein_extremal(theorem, beta):
    if theorem == SIGMA_V:
        if beta <= threshold_thm1():
            return _spherical(theorem, beta)
        omega = omega_from_beta_thm1(beta)
        b = max(math.tan(omega) - omega, omega)
        return Extremal(
            ExtremalSpec(theorem, FLAT_SPHERICAL, beta, omega, b),
            build_G(omega, b))
    if theorem == SIGMA_N_V:
        if beta <= threshold_thm2():
            return _spherical(theorem, beta)
        b = b_from_beta_thm2(beta)
        return Extremal(
            ExtremalSpec(theorem, FLAT_SPHERICAL, beta, math.pi / 3.0, b),
            build_H(b))
    omega = omega_from_beta_thm3(beta)
    metric = build_E(omega)
    return Extremal(
        ExtremalSpec(theorem, FLAT_SPHERICAL, beta, omega, metric.b), metric)


def _check_conformal_type(extremal, beta):
    """Raise `SolverError` unless the metric has conformal type β."""
    closed = extremal.metric.closed_form_conformal_type()
    if abs(closed - beta) > 1e-9 * max(1.0, beta):
        spec = extremal.spec
        raise SolverError(
            '{} extremal at omega = {!r}, b = {!r} has conformal type {!r}, '
            'not {!r}.'.format(spec.theorem, spec.omega, spec.b, closed, beta))


def extremal_for_beta(theorem, beta):
    """
    Return the `Extremal` (spec and metric) of `theorem` at conformal type β.

    The regime is chosen by the theorem's threshold.  For the Möbius
    families the metric is the restriction to the band of the Klein
    extremal of type 2β.

    """
    theorem = check_theorem(theorem)
    beta = IntervalValidator('beta', lower=0.0)(beta)
    if theorem in (MOBIUS_SATZ2, MOBIUS_SATZ3):
        klein = extremal_for_beta(KLEIN_COUNTERPART[theorem], 2.0 * beta)
        spec = ExtremalSpec(
            theorem, klein.spec.regime, beta, klein.spec.omega, klein.spec.b)
        extremal = Extremal(spec, MobiusHalfProfile(klein.metric))
    else:
        extremal = _klein_extremal(theorem, beta)
    _check_conformal_type(extremal, beta)
    logger.debug('extremal for %s at beta %r: %r', theorem, beta, extremal)
    return extremal
