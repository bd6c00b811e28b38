"""
Measures on families of closed curves and the extremal length certificates.

A metric g_e is extremal for a product of class lengths when some measure μ
on curves of those classes pushes forward to its area measure, ⟨*μ, φ⟩ =
∫ φ dg_e, and gives every class the same weighted length m_i l_i(g_e).
The inequality then holds for every conformal metric g with

    C = vol(g_e)^{p/2} / (p^p m_1 ⋯ m_p).

The flat-spherical metrics carry three families:

- great circles of the two spherical caps, with density h(a) da ⊗ dθ
- vertical lines, with density (m'/π) du
- horizontal circles of the flat band, with density (1 - m'/(π cos ω)) da

"""

import logging
import math

from collections import namedtuple
from concurrent import futures
import dataclasses

from dataclasses import dataclass
from dataclasses import field

import numpy as np

from klein_systolic.constants import FLAT_SPHERICAL
from klein_systolic.constants import SIGMA_N_V
from klein_systolic.constants import SIGMA_V
from klein_systolic.constants import SIGMA_V_H
from klein_systolic.constants import check_theorem
from klein_systolic.exceptions import DomainError
from klein_systolic.exceptions import RegimeError
from klein_systolic.extremal import extremal_for_beta
from klein_systolic.geometry import HALF_PI
from klein_systolic.geometry import FundamentalDomain
from klein_systolic.geometry import gauss_legendre
from klein_systolic.settings import systolic_settings
from klein_systolic.settings import worker_count
from klein_systolic.systoles import HORIZONTAL
from klein_systolic.systoles import SIGMA
from klein_systolic.systoles import VERTICAL
from klein_systolic.systoles import GreatCircle
from klein_systolic.systoles import great_circle_latitude
from klein_systolic.systoles import length_closed_form


logger = logging.getLogger(__name__)

GREAT_CIRCLES = 'great-circles'
VERTICALS = 'verticals'
HORIZONTALS = 'horizontals'
FAMILIES = (GREAT_CIRCLES, VERTICALS, HORIZONTALS)

# length class merging l_σ and l_h
L_SIGMA = 'L_sigma'

DIRECT = 'direct'
DOUBLED = 'doubled'
BOOKKEEPINGS = (DIRECT, DOUBLED)

ProbeFunction = namedtuple('ProbeFunction', ['name', 'func'])


def _check_parameters(omega, m_prime):
    if not 0.0 < omega < HALF_PI:
        raise DomainError('omega = {!r} outside ]0, π/2[.'.format(omega))
    upper = math.pi * math.cos(omega)
    if not 0.0 <= m_prime <= upper * (1.0 + 1e-12):
        raise DomainError(
            "m' = {!r} outside [0, π cos ω] = [0, {!r}].".format(
                m_prime, upper))


def h_density(a, omega, m_prime):
    """
    Return the great circle density

        h(a) = sin a/(π cos a) · (cos²a - m' cos ω/π)/√(cos²a - cos²ω)

    for 0 ≤ a < ω.  With m' = π cos ω it is sin a/(π cos a) √(cos²a - cos²ω).

    """
    _check_parameters(omega, m_prime)
    a = np.asarray(a, dtype=float)
    if np.any(a < 0.0) or np.any(a >= omega):
        raise DomainError(
            'Latitude a must lie in [0, omega = {!r}[.'.format(omega))
    k = m_prime * math.cos(omega) / math.pi
    c2 = np.cos(a) ** 2
    return (
        np.sin(a) / (math.pi * np.cos(a))
        * (c2 - k) / np.sqrt(c2 - math.cos(omega) ** 2))


def family_masses(omega, b, m_prime):
    """
    Return the masses (m1, m2, m3) of the three families.

    m1 = 4 sin ω - 4m'ω/π, m2 = m' and m3 = 2(b - ω)(1 - m'/(π cos ω)).

    """
    _check_parameters(omega, m_prime)
    if b < omega:
        raise DomainError('b = {!r} is below omega = {!r}.'.format(b, omega))
    m1 = 4.0 * math.sin(omega) - 4.0 * m_prime * omega / math.pi
    m3 = 2.0 * (b - omega) * (1.0 - m_prime / (math.pi * math.cos(omega)))
    return m1, m_prime, m3


def m_prime_thm1(omega):
    """Return m' = π cos ω, for which the horizontal family vanishes."""
    return math.pi * math.cos(omega)


def m_prime_thm2(b):
    """Return m' = π(√3 + b - π/3)/(4b), the H_b balance."""
    return math.pi * (math.sqrt(3.0) + b - math.pi / 3.0) / (4.0 * b)


def m_prime_thm2_expanded(b):
    """Return m' = (3√3π + 3bπ - π²)/(12b)."""
    pi = math.pi
    return (3.0 * math.sqrt(3.0) * pi + 3.0 * b * pi - pi * pi) / (12.0 * b)


def m_prime_thm3(omega, b):
    """Return m' = π sin ω/(b + ω), balancing great circles and verticals."""
    return math.pi * math.sin(omega) / (b + omega)


def _latitude_nodes(omega, m_prime, n=None):
    """
    Return latitudes a ∈ ]-ω, ω[ and weights of h(|a|) da.

    The substitution sin a = sin ω sin t turns h(a) da into
    sin a (cos²a - k)/(π cos²a) dt, analytic in t on each half.

    """
    t, w = gauss_legendre(0.0, HALF_PI, n)
    t = np.concatenate([-t[::-1], t])
    w = np.concatenate([w[::-1], w])
    a = np.arcsin(math.sin(omega) * np.sin(t))
    k = m_prime * math.cos(omega) / math.pi
    c2 = np.cos(a) ** 2
    return a, w * np.abs(np.sin(a)) * (c2 - k) / (math.pi * c2)


def _theta_nodes(n=None):
    """Return midpoint nodes and weights over one period [-π/2, π/2[."""
    n = n or systolic_settings.THETA_NODES
    theta = -HALF_PI + (np.arange(n) + 0.5) * math.pi / n
    return theta, np.full(n, math.pi / n)


def great_circle_mass_quadrature(omega, m_prime):
    """Return the great circle mass by quadrature of h over both caps."""
    _check_parameters(omega, m_prime)
    _, weights = _latitude_nodes(omega, m_prime)
    return 2.0 * math.pi * float(np.sum(weights))


@dataclass(frozen=True)
class CurveFamilyMeasure(object):
    """
    A measured family of closed curves on a flat-spherical metric (ω, b).

    `length_class` names the length the family's mass multiplies in the
    balance: `sigma`, `v`, `h`, or `L_sigma` when great circles and
    horizontal circles are both counted in L_σ.

    """

    family: str
    omega: float
    b: float
    m_prime: float
    length_class: str
    mass: float = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise DomainError(
                'Unknown curve family "{}"; expected one of {}.'.format(
                    self.family, ', '.join(FAMILIES)))
        masses = dict(zip(
            FAMILIES, family_masses(self.omega, self.b, self.m_prime)))
        expected = masses[self.family]
        if self.mass is None:
            object.__setattr__(self, 'mass', expected)
        elif abs(self.mass - expected) > 1e-10 * max(1.0, abs(expected)):
            raise DomainError(
                '{} mass {!r} differs from the closed form {!r}.'.format(
                    self.family, self.mass, expected))

    @property
    def domain(self):
        return FundamentalDomain(2.0 * self.b)

    def curve_length(self):
        """Return the g_e length of each curve of the family."""
        if self.family == GREAT_CIRCLES:
            return math.pi
        if self.family == VERTICALS:
            return 4.0 * self.b
        return 2.0 * math.pi * math.cos(self.omega)

    def density(self, a=None):
        """Return the density of the family, h(a) for great circles."""
        if self.family == GREAT_CIRCLES:
            return h_density(np.abs(a), self.omega, self.m_prime)
        if self.family == VERTICALS:
            return self.m_prime / math.pi
        return 1.0 - self.m_prime / (math.pi * math.cos(self.omega))


def _reduced(domain, phi):
    """Return φ evaluated at points brought back to the fundamental domain."""
    def evaluate(u, v):
        u, v = np.broadcast_arrays(
            np.asarray(u, dtype=float), np.asarray(v, dtype=float))
        return phi(*domain.reduce(u, v))
    return evaluate


def _v_pieces(omega, b, n=None):
    """Return Gauss-Legendre nodes on [-2b, 2b] split at the gluing circles."""
    breaks = sorted({
        -2.0 * b, -(2.0 * b - omega), -omega, omega, 2.0 * b - omega, 2.0 * b})
    nodes, weights = [], []
    for lo, hi in zip(breaks[:-1], breaks[1:]):
        if hi - lo > 0.0:
            x, w = gauss_legendre(lo, hi, n)
            nodes.append(x)
            weights.append(w)
    return np.concatenate(nodes), np.concatenate(weights)


def _great_circles_pair(measure, phi):
    a, weights = _latitude_nodes(measure.omega, measure.m_prime)
    offsets, ds, latitudes = [], [], []
    for value in a:
        circle = GreatCircle(0.0, float(value))
        u, w = circle.nodes()
        offsets.append(u)
        ds.append(w)
        latitudes.append(great_circle_latitude(circle, u))
    offsets = np.array(offsets)
    ds = np.array(ds) * weights[:, None]
    latitudes = np.array(latitudes)
    theta, theta_weights = _theta_nodes()
    u = theta[:, None, None] + offsets[None, :, :]
    total = 0.0
    for centre in (0.0, 2.0 * measure.b):
        values = phi(u, centre + latitudes[None, :, :])
        total += float(np.sum(theta_weights[:, None, None] * ds * values))
    return total


def _verticals_pair(measure, phi):
    u, wu = gauss_legendre(-HALF_PI, HALF_PI)
    v, wv = _v_pieces(measure.omega, measure.b)
    values = phi(u[:, None], v[None, :])
    return measure.density() * float(np.sum(wu[:, None] * wv * values))


def _horizontals_pair(measure, phi):
    lo, hi = measure.omega, 2.0 * measure.b - measure.omega
    if hi - lo <= 0.0 or measure.mass == 0.0:
        return 0.0
    u, wu = gauss_legendre(-HALF_PI, HALF_PI)
    a, wa = gauss_legendre(lo, hi)
    values = phi(u[:, None], a[None, :]) + phi(u[:, None], -a[None, :])
    ds = math.cos(measure.omega)
    return measure.density() * ds * float(
        np.sum(wu[:, None] * wa[None, :] * values))


def pushforward_pair(measure, phi):
    """
    Return ⟨*μ, φ⟩ = ∫ φ̄(γ) dμ(γ), φ̄(γ) the g_e-integral of φ along γ.

    `phi(u, v)` is called on points of the fundamental domain.

    """
    evaluate = _reduced(measure.domain, phi)
    if measure.family == GREAT_CIRCLES:
        return _great_circles_pair(measure, evaluate)
    if measure.family == VERTICALS:
        return _verticals_pair(measure, evaluate)
    return _horizontals_pair(measure, evaluate)


def area_integral(metric, phi):
    """Return ∫ φ dg_e = ∫∫ φ(u, v) f(v) du dv over the fundamental domain."""
    u, wu = gauss_legendre(-HALF_PI, HALF_PI)
    v, wv = _v_pieces(metric.omega, metric.b)
    values = phi(u[:, None], v[None, :]) * metric.value(v)[None, :]
    return float(np.sum(wu[:, None] * wv[None, :] * values))


def probe_functions(omega, b):
    """
    Return the functions probing *μ = dg_e on a flat-spherical metric.

    The v-dependent ones probe the latitude density and sin²u cos v the
    averaging over θ.  The bump is supported in the flat band.

    """
    def bump(u, v):
        width = b - omega
        if width <= 0.0:
            return np.zeros(np.broadcast(u, v).shape)
        s = (np.abs(v) - b) / width
        inside = np.abs(s) < 1.0
        with np.errstate(divide='ignore', over='ignore'):
            values = np.exp(-1.0 / np.where(inside, 1.0 - s * s, 1.0))
        return np.where(inside, values, 0.0) * np.ones_like(u)

    def latitudinal(func):
        return lambda u, v: func(v) * np.ones_like(u)

    return [
        ProbeFunction('one', latitudinal(np.ones_like)),
        ProbeFunction('cos_v', latitudinal(np.cos)),
        ProbeFunction('cos2_v', latitudinal(lambda v: np.cos(v) ** 2)),
        ProbeFunction('v2', latitudinal(np.square)),
        ProbeFunction('gauss_v', latitudinal(lambda v: np.exp(-v * v))),
        ProbeFunction('sin2u_cos_v', lambda u, v: np.sin(u) ** 2 * np.cos(v)),
        ProbeFunction('band_bump', bump),
    ]


def pushforward_residuals(metric, families, functions=None, scale=1.0):
    """
    Return {name: (⟨*μ, φ⟩, scale · ∫ φ dg_e)} over the probe functions.

    The functions are evaluated concurrently.

    """
    functions = functions or probe_functions(metric.omega, metric.b)

    def evaluate(probe):
        pushed = sum(pushforward_pair(m, probe.func) for m in families)
        return probe.name, (pushed, scale * area_integral(metric, probe.func))

    workers = max(1, min(worker_count(), len(functions)))
    with futures.ThreadPoolExecutor(max_workers=workers) as executor:
        return dict(executor.map(evaluate, functions))


@dataclass(frozen=True)
class BoundCertificate(object):
    """A numerically checked instance of the extremal length criterion."""

    theorem: str
    metric: object
    families: tuple
    eps_push: float
    eps_mass: float
    C: float
    valid: bool
    volume: float
    bookkeeping: str = DIRECT
    tol_push: float = None
    tol_mass: float = None
    class_products: dict = field(default_factory=dict)
    residuals: dict = field(default_factory=dict)
    alternatives: dict = field(default_factory=dict)

    @property
    def exponent(self):
        return len(self.class_products)


def _class_length(name, metric):
    if name == L_SIGMA:
        return min(
            length_closed_form(SIGMA, metric),
            length_closed_form(HORIZONTAL, metric))
    return length_closed_form(name, metric)


def certify(theorem, metric, families, tol_push=None, tol_mass=None,
            bookkeeping=DIRECT):
    """
    Return the `BoundCertificate` of `families` on the extremal `metric`.

    Masses are grouped by length class; ε_mass is the relative spread of
    the products mass × length and ε_push the largest pushforward residual
    over the probe functions, relative to the volume.  An invalid
    certificate is returned with its diagnostics, not raised.

    """
    check_theorem(theorem)
    if bookkeeping not in BOOKKEEPINGS:
        raise DomainError(
            'Unknown volume bookkeeping "{}".'.format(bookkeeping))
    if not families or any(m.mass <= 0.0 for m in families):
        raise DomainError('Certificates need families of positive mass.')
    tol_push = tol_push or systolic_settings.TOL_PUSH
    tol_mass = tol_mass or systolic_settings.TOL_MASS
    scale = 2.0 if bookkeeping == DOUBLED else 1.0
    vol = scale * metric.closed_form_volume()

    masses = {}
    for measure in families:
        masses[measure.length_class] = (
            masses.get(measure.length_class, 0.0) + measure.mass)
    products = {
        name: mass * _class_length(name, metric)
        for name, mass in masses.items()}
    values = list(products.values())
    eps_mass = (max(values) - min(values)) / (sum(values) / len(values))

    p = len(masses)
    C = vol ** (0.5 * p) / (p ** p * math.prod(masses.values()))

    residuals = pushforward_residuals(metric, families, scale=scale)
    eps_push = max(
        abs(pushed - reference) / vol
        for pushed, reference in residuals.values())

    valid = eps_push < tol_push and eps_mass < tol_mass
    if not valid:
        logger.info(
            '%s certificate (%s volume) does not close: eps_push %g, '
            'eps_mass %g', theorem, bookkeeping, eps_push, eps_mass)
    return BoundCertificate(
        theorem=theorem,
        metric=metric,
        families=tuple(families),
        eps_push=eps_push,
        eps_mass=eps_mass,
        C=C,
        valid=valid,
        volume=vol,
        bookkeeping=bookkeeping,
        tol_push=tol_push,
        tol_mass=tol_mass,
        class_products=products,
        residuals=residuals)


def theorem_families(theorem, omega, b):
    """Return the measured families of `theorem` on the metric (ω, b)."""
    check_theorem(theorem)
    if theorem == SIGMA_V:
        m_prime = m_prime_thm1(omega)
        return [
            CurveFamilyMeasure(GREAT_CIRCLES, omega, b, m_prime, SIGMA.name),
            CurveFamilyMeasure(VERTICALS, omega, b, m_prime, VERTICAL.name),
        ]
    if theorem == SIGMA_N_V:
        m_prime = m_prime_thm2(b)
        families = [
            CurveFamilyMeasure(GREAT_CIRCLES, omega, b, m_prime, L_SIGMA),
            CurveFamilyMeasure(VERTICALS, omega, b, m_prime, VERTICAL.name),
        ]
        if b > omega:
            families.append(
                CurveFamilyMeasure(HORIZONTALS, omega, b, m_prime, L_SIGMA))
        return families
    if theorem == SIGMA_V_H:
        m_prime = m_prime_thm3(omega, b)
        return [
            CurveFamilyMeasure(GREAT_CIRCLES, omega, b, m_prime, SIGMA.name),
            CurveFamilyMeasure(VERTICALS, omega, b, m_prime, VERTICAL.name),
            CurveFamilyMeasure(
                HORIZONTALS, omega, b, m_prime, HORIZONTAL.name),
        ]
    raise DomainError(
        'No measure certificate for the Möbius family {}.'.format(theorem))


def certify_theorem(theorem, beta, tol_push=None, tol_mass=None):
    """
    Return the certificate of `theorem` on its extremal metric at β.

    Only flat-spherical extremals carry the measures built here.  The
    σⁿ-v certificate is tried with the volume of H_b integrated directly
    and with twice that; the one that closes is returned, the other's
    ε_push recorded in `alternatives`.

    """
    extremal = extremal_for_beta(theorem, beta)
    spec = extremal.spec
    if spec.regime != FLAT_SPHERICAL:
        raise RegimeError(
            'beta = {!r} is in the spherical regime of {}; measure '
            'certificates cover flat-spherical extremals only.'.format(
                beta, theorem))
    families = theorem_families(theorem, spec.omega, spec.b)
    bookkeepings = (DIRECT, DOUBLED) if theorem == SIGMA_N_V else (DIRECT,)
    certificates = [
        certify(
            theorem, extremal.metric, families, tol_push, tol_mass, choice)
        for choice in bookkeepings]
    chosen = next((c for c in certificates if c.valid), certificates[0])
    alternatives = {
        c.bookkeeping: c.eps_push for c in certificates if c is not chosen}
    if alternatives:
        chosen = dataclasses.replace(chosen, alternatives=alternatives)
    return chosen
