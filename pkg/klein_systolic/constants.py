"""
Optimal conformal constants C_β of the systolic inequalities.

Five inequality families are covered, each identified by a string:

- `sigma-v`: l_σ(g) l_v(g) ≤ C_β vol(g)
- `sigma-n-v`: L_σ(g) l_v(g) ≤ C_β vol(g), with L_σ = min(l_σ, l_h)
- `sigma-v-h`: l_σ(g) l_v(g) l_h(g) ≤ C_β vol(g)^{3/2}
- `mobius-satz2` and `mobius-satz3`: the Möbius band versions of the first
  two, β being the conformal half-type of the band

For the two-regime families the extremal metric is spherical below a
threshold conformal type and flat-spherical above it.

"""

import logging
import math

from dataclasses import dataclass

from klein_systolic.exceptions import DomainError
from klein_systolic.geometry import LOG_TWO_PLUS_SQRT3
from klein_systolic.geometry import inverse_gudermannian
from klein_systolic.solvers import b_from_beta_thm2
from klein_systolic.solvers import omega_from_beta_satz2
from klein_systolic.solvers import omega_from_beta_thm1
from klein_systolic.solvers import omega_from_beta_thm3
from klein_systolic.solvers import q_of_omega
from klein_systolic.solvers import solve_b0
from klein_systolic.solvers import threshold_thm1
from klein_systolic.solvers import threshold_thm2
from klein_systolic.validators import IntervalValidator


logger = logging.getLogger(__name__)

SIGMA_V = 'sigma-v'
SIGMA_N_V = 'sigma-n-v'
SIGMA_V_H = 'sigma-v-h'
MOBIUS_SATZ2 = 'mobius-satz2'
MOBIUS_SATZ3 = 'mobius-satz3'

THEOREMS = (SIGMA_V, SIGMA_N_V, SIGMA_V_H, MOBIUS_SATZ2, MOBIUS_SATZ3)
KLEIN_THEOREMS = (SIGMA_V, SIGMA_N_V, SIGMA_V_H)

# Möbius family -> Klein family it halves
KLEIN_COUNTERPART = {
    MOBIUS_SATZ2: SIGMA_V,
    MOBIUS_SATZ3: SIGMA_N_V,
}

SPHERICAL = 'spherical'
FLAT_SPHERICAL = 'flat-spherical'
REGIMES = (SPHERICAL, FLAT_SPHERICAL)

# attributes of a `SystoleReport` multiplied on the left-hand side
LENGTHS = {
    SIGMA_V: ('l_sigma', 'l_v'),
    SIGMA_N_V: ('L_sigma', 'l_v'),
    SIGMA_V_H: ('l_sigma', 'l_v', 'l_h'),
}

# 2√π/(3√3), the infimum of the sigma-v-h constant
SIGMA_V_H_INFIMUM = 2.0 * math.sqrt(math.pi) / (3.0 * math.sqrt(3.0))


@dataclass(frozen=True)
class ConstantResult(object):
    """The constant C_β of one inequality with the parameters behind it."""

    theorem: str
    beta: float
    regime: str
    C: float
    omega: float = None
    b: float = None
    x: float = None

    @property
    def exponent(self):
        """The number p of lengths, vol appearing with exponent p/2."""
        return exponent(self.theorem)


def check_theorem(theorem):
    """Return `theorem` if it names an inequality family."""
    if theorem not in THEOREMS:
        raise DomainError(
            'Unknown theorem "{}"; expected one of {}.'.format(
                theorem, ', '.join(THEOREMS)))
    return theorem


def exponent(theorem):
    """Return the number of lengths in the inequality of `theorem`."""
    return 3 if check_theorem(theorem) == SIGMA_V_H else 2


def threshold(theorem):
    """
    Return the regime threshold of `theorem`, or `None`.

    The sigma-v-h family has a single, flat-spherical, regime.

    """
    check_theorem(theorem)
    if theorem == SIGMA_V:
        return threshold_thm1()
    if theorem == SIGMA_N_V:
        return threshold_thm2()
    if theorem == MOBIUS_SATZ2:
        return float(inverse_gudermannian(solve_b0()))
    if theorem == MOBIUS_SATZ3:
        return LOG_TWO_PLUS_SQRT3
    return None


def arcsin_ratio(x):
    """Return arcsin(x)/x, continued by 1 at x = 0."""
    if abs(x) < 1e-8:
        return 1.0 + x * x / 6.0
    return math.asin(x) / x


def _validate_beta(beta):
    return IntervalValidator('beta', lower=0.0)(beta)


def _spherical(theorem, beta, x):
    """Return the regime-1 result arcsin(x)/x, the extremal being G_b'."""
    b = math.asin(x)
    return ConstantResult(
        theorem, beta, SPHERICAL, arcsin_ratio(x), omega=b, b=b, x=x)


def c_sigma_v(beta):
    """Return the constant of l_σ l_v ≤ C vol."""
    beta = _validate_beta(beta)
    if beta <= threshold_thm1():
        return _spherical(SIGMA_V, beta, math.tanh(0.5 * beta))
    omega = omega_from_beta_thm1(beta)
    return ConstantResult(
        SIGMA_V, beta, FLAT_SPHERICAL, 0.5 / math.cos(omega),
        omega=omega, b=math.tan(omega) - omega)


def c_sigma_n_v_rational(beta):
    """Return (2/3)(3β + 4π - 6 ln(2+√3))/(4√3 + β - 2 ln(2+√3))."""
    log = LOG_TWO_PLUS_SQRT3
    return (
        2.0 / 3.0
        * (3.0 * beta + 4.0 * math.pi - 6.0 * log)
        / (4.0 * math.sqrt(3.0) + beta - 2.0 * log))


def c_sigma_n_v(beta):
    """Return the constant of L_σ l_v ≤ C vol."""
    beta = _validate_beta(beta)
    if beta <= threshold_thm2():
        return _spherical(SIGMA_N_V, beta, math.tanh(0.5 * beta))
    b = b_from_beta_thm2(beta)
    C = 2.0 * b / (math.sqrt(3.0) + b - math.pi / 3.0)
    return ConstantResult(
        SIGMA_N_V, beta, FLAT_SPHERICAL, C, omega=math.pi / 3.0, b=b)


def thm3_radicand(omega, b):
    """Return b⁴ - 4bω + ω² + ω⁴ - 2b²(ω² - 2)."""
    return (
        b ** 4 - 4.0 * b * omega + omega ** 2 + omega ** 4
        - 2.0 * b * b * (omega * omega - 2.0))


def thm3_constant(omega):
    """
    Return the sigma-v-h constant at the E_b parameter ω.

        C = √π/(3√3) · R^{1/4} (2b - ω) / ((b - ω) √((b - ω) b))

    with b = q(ω) and R the quartic `thm3_radicand`.

    """
    omega = IntervalValidator('omega', lower=0.0, upper=0.5 * math.pi)(omega)
    b = float(q_of_omega(omega))
    return (
        math.sqrt(math.pi) / (3.0 * math.sqrt(3.0))
        * thm3_radicand(omega, b) ** 0.25 * (2.0 * b - omega)
        / ((b - omega) * math.sqrt((b - omega) * b)))


def thm3_constant_simplified(omega):
    """
    Return the sigma-v-h constant through R = (2b - ω)²/cos²ω.

        C = √π (2b - ω)^{3/2} / (3√3 √(b cos ω) (b - ω)^{3/2})

    """
    omega = IntervalValidator('omega', lower=0.0, upper=0.5 * math.pi)(omega)
    b = float(q_of_omega(omega))
    return (
        math.sqrt(math.pi) * (2.0 * b - omega) ** 1.5
        / (3.0 * math.sqrt(3.0) * math.sqrt(b * math.cos(omega))
           * (b - omega) ** 1.5))


def c_sigma_v_h(beta):
    """Return the constant of l_σ l_v l_h ≤ C vol^{3/2}."""
    beta = _validate_beta(beta)
    omega = omega_from_beta_thm3(beta)
    return ConstantResult(
        SIGMA_V_H, beta, FLAT_SPHERICAL, thm3_constant(omega),
        omega=omega, b=float(q_of_omega(omega)))


def c_mobius_satz2(beta):
    """Return the Möbius band constant of sys · l_v, β the half-type."""
    beta = _validate_beta(beta)
    if beta <= threshold(MOBIUS_SATZ2):
        return _spherical(MOBIUS_SATZ2, beta, math.tanh(beta))
    omega = omega_from_beta_satz2(beta)
    return ConstantResult(
        MOBIUS_SATZ2, beta, FLAT_SPHERICAL, 0.5 / math.cos(omega),
        omega=omega, b=math.tan(omega) - omega)


def c_mobius_satz3_rational(beta):
    """Return (2/3)(3β + 2π - 3 ln(2+√3))/(2√3 + β - ln(2+√3))."""
    log = LOG_TWO_PLUS_SQRT3
    return (
        2.0 / 3.0
        * (3.0 * beta + 2.0 * math.pi - 3.0 * log)
        / (2.0 * math.sqrt(3.0) + beta - log))


def c_mobius_satz3(beta):
    """Return the Möbius band constant of L_σ · l_v, β the half-type."""
    beta = _validate_beta(beta)
    if beta <= threshold(MOBIUS_SATZ3):
        return _spherical(MOBIUS_SATZ3, beta, math.tanh(beta))
    b = math.pi / 3.0 + 0.5 * (beta - LOG_TWO_PLUS_SQRT3)
    C = 2.0 * b / (math.sqrt(3.0) + b - math.pi / 3.0)
    return ConstantResult(
        MOBIUS_SATZ3, beta, FLAT_SPHERICAL, C, omega=math.pi / 3.0, b=b)


CONSTANTS = {
    SIGMA_V: c_sigma_v,
    SIGMA_N_V: c_sigma_n_v,
    SIGMA_V_H: c_sigma_v_h,
    MOBIUS_SATZ2: c_mobius_satz2,
    MOBIUS_SATZ3: c_mobius_satz3,
}


def constant(theorem, beta):
    """Return the `ConstantResult` of `theorem` at conformal type β."""
    result = CONSTANTS[check_theorem(theorem)](beta)
    logger.debug(
        '%s at beta %r: %s regime, C = %r',
        theorem, result.beta, result.regime, result.C)
    return result


def sweep(theorem, beta_min, beta_max, steps):
    """Return `ConstantResult`s at `steps` evenly spaced conformal types."""
    beta_min = _validate_beta(beta_min)
    beta_max = IntervalValidator(
        'beta_max', lower=beta_min, closed='left')(beta_max)
    if steps < 1:
        raise DomainError('steps = {!r} must be at least 1.'.format(steps))
    if steps == 1:
        return [constant(theorem, beta_min)]
    step = (beta_max - beta_min) / (steps - 1)
    return [constant(theorem, beta_min + k * step) for k in range(steps)]
