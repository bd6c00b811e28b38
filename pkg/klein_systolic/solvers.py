"""
Bracketed root finding for the transcendental equations of the extremal
metrics.

Every equation is solved on a bracket where its function is checked to be
monotone (by dense sampling, once per process) and to change sign, with
Brent's method from scipy.

"""

import functools
import logging
import math

from dataclasses import dataclass
from dataclasses import field

import numpy as np

from scipy import optimize

from klein_systolic.exceptions import InternalError
from klein_systolic.exceptions import RegimeError
from klein_systolic.exceptions import SolverError
from klein_systolic.geometry import HALF_PI
from klein_systolic.geometry import LOG_TWO_PLUS_SQRT3
from klein_systolic.geometry import gudermannian
from klein_systolic.geometry import inverse_gudermannian
from klein_systolic.settings import systolic_settings
from klein_systolic.validators import IntervalValidator


logger = logging.getLogger(__name__)

B0_BRACKET = (1.0, 1.5)

# smallest ω tried when inverting β(ω) of the σ-v-h family, where β ≈ 4ω
THM3_OMEGA_FLOOR = 1e-100

EQUATIONS = ('b0', 'omega-thm1', 'omega-thm3', 'b-thm2', 'omega-satz2')


@dataclass(frozen=True)
class RootResult(object):
    """A solved equation with its residual and the bracket used."""

    equation: str
    root: float
    residual: float
    bracket: tuple
    beta: float = None
    extra: dict = field(default_factory=dict)


def _upper_guard():
    return HALF_PI - systolic_settings.SINGULARITY_GUARD


def q_of_omega(omega):
    """Return b = tan ω + √(tan²ω - ω tan ω + ω²) of the σ-v-h family."""
    t = np.tan(omega)
    return t + np.sqrt(t * t - omega * t + omega * omega)


def beta_of_omega_thm1(omega):
    """Return the conformal type of G_b with b = tan ω - ω."""
    return (
        2.0 * inverse_gudermannian(omega)
        + 2.0 * (np.tan(omega) - 2.0 * omega) / np.cos(omega))


def beta_of_omega_thm3(omega):
    """Return the conformal type of E_b with b = q(ω)."""
    return (
        2.0 * inverse_gudermannian(omega)
        + 2.0 * (q_of_omega(omega) - omega) / np.cos(omega))


def beta_of_omega_satz2(omega):
    """
    Return the Möbius half-type β solving the Satz 2 relation at ω.

    sin ω = (β - ln tan(π/4 + ω/2)) cos²ω + 2ω cos ω, solved for β.

    """
    c = np.cos(omega)
    return (
        inverse_gudermannian(omega)
        + (np.sin(omega) - 2.0 * omega * c) / (c * c))


def thm1_relation(omega, beta):
    """Return 2 sin ω - (β - 2 ln tan(π/4 + ω/2)) cos²ω - 4ω cos ω."""
    c = math.cos(omega)
    return (
        2.0 * math.sin(omega)
        - (beta - 2.0 * float(inverse_gudermannian(omega))) * c * c
        - 4.0 * omega * c)


def satz2_relation(omega, beta):
    """Return sin ω - (β - ln tan(π/4 + ω/2)) cos²ω - 2ω cos ω."""
    c = math.cos(omega)
    return (
        math.sin(omega)
        - (beta - float(inverse_gudermannian(omega))) * c * c
        - 2.0 * omega * c)


def thm3_relation(omega, b):
    """Return tan ω (2b - ω) - (b² - ω²), scaled by max(1, b²)."""
    residual = math.tan(omega) * (2.0 * b - omega) - (b * b - omega * omega)
    return residual / max(1.0, b * b)


@functools.lru_cache(maxsize=None)
def _assert_increasing(name):
    """Check by dense sampling that the β(ω) map `name` increases."""
    func, lo, hi = {
        'omega-thm1': (beta_of_omega_thm1, solve_b0(), _upper_guard()),
        'omega-thm3': (beta_of_omega_thm3, 1e-8, _upper_guard()),
        'omega-satz2': (beta_of_omega_satz2, solve_b0(), _upper_guard()),
    }[name]
    samples = np.linspace(lo, hi, systolic_settings.MONOTONICITY_SAMPLES)
    values = func(samples)
    steps = np.diff(values)
    if not np.all(steps > 0.0):
        k = int(np.argmin(steps > 0.0))
        raise InternalError(
            'β(ω) map for {} is not increasing between ω = {!r} and '
            '{!r}.'.format(name, float(samples[k]), float(samples[k + 1])))
    return True


def _brentq(func, lo, hi, name, xtol=None):
    """Return the root of `func` on [lo, hi] after checking the bracket."""
    f_lo, f_hi = func(lo), func(hi)
    if not (f_lo <= 0.0 <= f_hi or f_hi <= 0.0 <= f_lo):
        raise SolverError(
            'No sign change for {} on [{!r}, {!r}]: f = ({!r}, {!r}).'.format(
                name, lo, hi, f_lo, f_hi))
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    root, info = optimize.brentq(
        func, lo, hi,
        xtol=xtol or systolic_settings.ROOT_XTOL,
        maxiter=systolic_settings.ROOT_MAXITER,
        full_output=True,
        disp=False)
    if not info.converged:
        raise SolverError(
            '{} did not converge on [{!r}, {!r}]: {}.'.format(
                name, lo, hi, info.flag))
    logger.debug(
        '%s: root %r on [%r, %r] after %d iterations',
        name, root, lo, hi, info.iterations)
    return root


@functools.lru_cache(maxsize=None)
def solve_b0():
    """Return b₀ ∈ ]0, π/2[ with tan b₀ = 2b₀."""
    return _brentq(
        lambda x: math.tan(x) - 2.0 * x, B0_BRACKET[0], B0_BRACKET[1], 'b0')


def threshold_thm1():
    """Return 2 ln tan(π/4 + b₀/2), the σ-v regime threshold."""
    return 2.0 * float(inverse_gudermannian(solve_b0()))


def threshold_thm2():
    """Return 2 ln(2 + √3), the σⁿ-v regime threshold."""
    return 2.0 * LOG_TWO_PLUS_SQRT3


def _check_regime(beta, threshold, name):
    if beta < threshold * (1.0 - 1e-14):
        raise RegimeError(
            'beta = {!r} is below the {} threshold {!r}.'.format(
                beta, name, threshold))


def omega_from_beta_thm1(beta):
    """
    Return ω ∈ [b₀, π/2[ solving the σ-v relation for β above threshold.

    2 sin ω = (β - 2 ln tan(π/4 + ω/2)) cos²ω + 4ω cos ω, equivalently
    β(ω) = 2 ln tan(π/4 + ω/2) + 2(tan ω - 2ω)/cos ω.

    """
    beta = IntervalValidator('beta', lower=0.0)(beta)
    threshold = threshold_thm1()
    _check_regime(beta, threshold, 'sigma-v')
    b0 = solve_b0()
    if beta <= threshold:
        return b0
    _assert_increasing('omega-thm1')
    return _brentq(
        lambda w: float(beta_of_omega_thm1(w)) - beta,
        b0, _upper_guard(), 'omega-thm1')


def omega_from_beta_thm3(beta):
    """Return ω ∈ ]0, π/2[ with β(ω) of the σ-v-h family equal to β."""
    beta = IntervalValidator('beta', lower=0.0)(beta)
    _assert_increasing('omega-thm3')
    return _brentq(
        lambda w: float(beta_of_omega_thm3(w)) - beta,
        THM3_OMEGA_FLOOR, _upper_guard(), 'omega-thm3',
        xtol=systolic_settings.ROOT_XTOL * min(1.0, beta))


def omega_from_beta_satz2(beta):
    """Return ω ∈ [b₀, π/2[ solving the Möbius Satz 2 relation."""
    beta = IntervalValidator('beta', lower=0.0)(beta)
    threshold = float(inverse_gudermannian(solve_b0()))
    _check_regime(beta, threshold, 'mobius-satz2')
    b0 = solve_b0()
    if beta <= threshold:
        return b0
    _assert_increasing('omega-satz2')
    return _brentq(
        lambda w: float(beta_of_omega_satz2(w)) - beta,
        b0, _upper_guard(), 'omega-satz2')


def b_from_beta_thm2(beta):
    """Return b = π/3 + (β - 2 ln(2 + √3))/4, the parameter of H_b."""
    beta = IntervalValidator('beta', lower=0.0)(beta)
    threshold = threshold_thm2()
    _check_regime(beta, threshold, 'sigma-n-v')
    return math.pi / 3.0 + max(beta - threshold, 0.0) / 4.0


def spherical_b_from_beta(beta):
    """Return the cap height b of G_b' with 2 ln tan(π/4 + b/2) = β."""
    beta = IntervalValidator('beta', lower=0.0)(beta)
    return float(gudermannian(0.5 * beta))


def solve(equation, beta=None):
    """Solve one of `EQUATIONS` and return a `RootResult`."""
    if equation == 'b0':
        root = solve_b0()
        return RootResult(
            equation, root, math.tan(root) - 2.0 * root, B0_BRACKET)
    if beta is None:
        raise RegimeError('Equation {} needs a beta.'.format(equation))
    beta = float(beta)
    if equation == 'omega-thm1':
        omega = omega_from_beta_thm1(beta)
        b = math.tan(omega) - omega
        return RootResult(
            equation, omega, thm1_relation(omega, beta),
            (solve_b0(), _upper_guard()), beta,
            {'b': b, 'tan_relation': math.tan(omega) - (b + omega)})
    if equation == 'omega-thm3':
        omega = omega_from_beta_thm3(beta)
        b = float(q_of_omega(omega))
        return RootResult(
            equation, omega, float(beta_of_omega_thm3(omega)) - beta,
            (THM3_OMEGA_FLOOR, _upper_guard()), beta,
            {'b': b, 'tan_relation': thm3_relation(omega, b)})
    if equation == 'omega-satz2':
        omega = omega_from_beta_satz2(beta)
        return RootResult(
            equation, omega, satz2_relation(omega, beta),
            (solve_b0(), _upper_guard()), beta)
    if equation == 'b-thm2':
        b = b_from_beta_thm2(beta)
        residual = beta - (threshold_thm2() + 4.0 * (b - math.pi / 3.0))
        return RootResult(
            equation, b, residual, (threshold_thm2(), math.inf), beta)
    raise RegimeError(
        'Unknown equation "{}"; expected one of {}.'.format(
            equation, ', '.join(EQUATIONS)))
