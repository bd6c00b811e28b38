"""
Models of the Klein bottle and of metrics on it.

The Klein bottle is the quotient of the (u, v) plane by the group generated
by the glide reflection σ: (u, v) ↦ (u + π, -v) and the vertical translation
t: (u, v) ↦ (u, v + 2V).  Its fundamental domain is the rectangle
[-π/2, π/2] × [-V, V].

Two kinds of metrics live on it:

- `ProfileMetric` subclasses, f²(v) du² + dv² for an even, 2V-periodic
  profile f (the spherical, flat-spherical and tabulated metrics);
- `GridMetric`, a conformal factor φ sampled on the node lattice of the flat
  fundamental domain [-π/2, π/2] × [-β, β], the metric being φ² (du² + dv²).

"""

import functools
import logging
import math
import warnings

import numpy as np

from scipy import integrate
from scipy import interpolate
from scipy import special

from klein_systolic.exceptions import InvalidMetric
from klein_systolic.exceptions import QuadratureError
from klein_systolic.exceptions import ResolutionError
from klein_systolic.settings import systolic_settings
from klein_systolic.validators import DeckCompatibilityValidator
from klein_systolic.validators import IntervalValidator
from klein_systolic.validators import PositiveValuesValidator


logger = logging.getLogger(__name__)

HALF_PI = 0.5 * math.pi

# ln tan(π/4 + π/6), the conformal half-type of the cap of height π/3
LOG_TWO_PLUS_SQRT3 = math.log(2.0 + math.sqrt(3.0))


def inverse_gudermannian(x):
    """Return ln tan(π/4 + x/2) = arsinh(tan x) for |x| < π/2."""
    return np.arcsinh(np.tan(x))


def gudermannian(w):
    """Return the angle x with ln tan(π/4 + x/2) = w."""
    return np.arctan(np.sinh(w))


class ConformalClass(object):
    """The conformal type β of a metric: it is conformal to g_β."""

    def __init__(self, beta):
        """Initialize with the conformal type."""
        self.beta = IntervalValidator(
            'beta', lower=0.0, error_class=InvalidMetric)(beta)

    def __eq__(self, other):
        return isinstance(other, ConformalClass) and self.beta == other.beta

    def __hash__(self):
        return hash(self.beta)

    def __repr__(self):
        return 'ConformalClass(beta={!r})'.format(self.beta)


class FundamentalDomain(object):
    """The rectangle [-π/2, π/2] × [-V, V] and the deck transformations."""

    u_half_width = HALF_PI

    def __init__(self, v_half_height):
        """Initialize with the half-height V."""
        self.v_half_height = IntervalValidator(
            'V', lower=0.0, error_class=InvalidMetric)(v_half_height)

    def sigma(self, u, v):
        """Return the image of (u, v) by the glide reflection."""
        return np.add(u, math.pi), np.negative(v)

    def sigma_inverse(self, u, v):
        return np.subtract(u, math.pi), np.negative(v)

    def t(self, u, v):
        """Return the image of (u, v) by the vertical translation."""
        return u, np.add(v, 2.0 * self.v_half_height)

    def t_inverse(self, u, v):
        return u, np.subtract(v, 2.0 * self.v_half_height)

    def sigma_squared(self, u, v):
        """Return the image of (u, v) by the horizontal translation."""
        return np.add(u, 2.0 * math.pi), v

    def reduce(self, u, v):
        """
        Return the point of the fundamental domain equivalent to (u, v).

        u is brought into [-π/2, π/2[ by powers of σ, flipping v for odd
        powers, then v into [-V, V[ by powers of t.

        """
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        k = np.floor((u + HALF_PI) / math.pi)
        u = u - k * math.pi
        v = np.where(np.mod(k, 2.0) == 1.0, -v, v)
        V = self.v_half_height
        v = np.mod(v + V, 2.0 * V) - V
        return u, v


class ProfileMetric(object):
    """
    Base class for metrics f²(v) du² + dv² on the Klein bottle.

    Subclasses give the profile on [0, V] (`_profile`), its kinks
    (`breakpoints`) and, when known, closed forms of the conformal type,
    the volume and the conformal coordinate w(v) = ∫₀^v dt/f(t).

    """

    metric_type = 'profile'
    kind = None

    # True when f = cos near v = 0, so the great circles through the
    # equator realize l_σ = π
    equatorial_cap = False

    def __init__(self, half_height):
        """Initialize with the half-height V of the fundamental domain."""
        self.domain = FundamentalDomain(half_height)

    @property
    def half_height(self):
        """The half-height V."""
        return self.domain.v_half_height

    def _profile(self, s):
        """Return f(s) for s in [0, V]."""
        raise NotImplementedError(
            'Subclass `{}` should implement `_profile` method.'.format(
                self.__class__.__name__))

    def _reduce(self, v):
        """Return |v| brought into [0, V] by evenness and periodicity."""
        V = self.half_height
        v = np.mod(np.asarray(v, dtype=float) + V, 2.0 * V) - V
        return np.minimum(np.abs(v), V)

    def value(self, v):
        """Return the profile f(v) at any real v."""
        return self._profile(self._reduce(v))

    def breakpoints(self):
        """Return the points of (0, V) where f is not smooth."""
        return []

    def minimum(self):
        """Return the minimum of the profile."""
        V = self.half_height
        candidates = [0.0, V] + list(self.breakpoints())
        samples = np.linspace(0.0, V, 4097)
        return float(min(
            np.min(self._profile(samples)),
            np.min(self._profile(np.asarray(candidates)))))

    def closed_form_conformal_type(self):
        """Return ∫₀^V dt/f(t) in closed form."""
        return None

    def closed_form_volume(self):
        """Return 2π ∫₀^V f(t) dt in closed form."""
        return None

    def conformal_coordinate(self, v):
        """Return w(v) = ∫₀^v dt/f(t) for |v| ≤ V."""
        v = np.asarray(v, dtype=float)
        return np.sign(v) * self._conformal_coordinate(np.abs(v))

    def inverse_conformal_coordinate(self, w):
        """Return v with w(v) = w for |w| ≤ β."""
        w = np.asarray(w, dtype=float)
        return np.sign(w) * self._inverse_conformal_coordinate(np.abs(w))

    def _conformal_coordinate(self, s):
        raise NotImplementedError(
            'Subclass `{}` should implement `_conformal_coordinate` '
            'method.'.format(self.__class__.__name__))

    def _inverse_conformal_coordinate(self, w):
        raise NotImplementedError(
            'Subclass `{}` should implement `_inverse_conformal_coordinate` '
            'method.'.format(self.__class__.__name__))

    def parameters(self):
        """Return the parameters defining the profile."""
        return {}

    def __eq__(self, other):
        return (
            type(self) is type(other)
            and self.half_height == other.half_height
            and self.parameters() == other.parameters())

    def __hash__(self):
        return hash((self.kind, self.half_height))

    def __repr__(self):
        params = ', '.join(
            '{}={!r}'.format(k, v) for k, v in self.parameters().items())
        return '{}({})'.format(self.__class__.__name__, params)


class ConstantProfile(ProfileMetric):
    """The flat metric c² du² + dv² of half-height V."""

    kind = 'constant'

    def __init__(self, c, half_height):
        """Initialize with the constant c and the half-height V."""
        self.c = IntervalValidator(
            'c', lower=0.0, error_class=InvalidMetric)(c)
        super(ConstantProfile, self).__init__(half_height)

    def _profile(self, s):
        return np.full_like(np.asarray(s, dtype=float), self.c)

    def minimum(self):
        return self.c

    def closed_form_conformal_type(self):
        return self.half_height / self.c

    def closed_form_volume(self):
        return 2.0 * math.pi * self.c * self.half_height

    def _conformal_coordinate(self, s):
        return s / self.c

    def _inverse_conformal_coordinate(self, w):
        return w * self.c

    def parameters(self):
        return {'c': self.c, 'half_height': self.half_height}


class SphericalCapProfile(ProfileMetric):
    """
    The spherical metric G_b': f = cos on |v| ≤ b, invariant by v ↦ v + 2b.

    Two spherical zones of height b glued along the circles |v| = b, where
    f reaches its minimum cos b.

    """

    kind = 'spherical-cap'
    equatorial_cap = True

    def __init__(self, b):
        """Initialize with the cap height b ∈ ]0, π/2[."""
        self.b = IntervalValidator(
            'b', lower=0.0, upper=HALF_PI, error_class=InvalidMetric)(b)
        super(SphericalCapProfile, self).__init__(2.0 * self.b)

    def _profile(self, s):
        s = np.asarray(s, dtype=float)
        b = self.b
        return np.where(s <= b, np.cos(s), np.cos(2.0 * b - s))

    def breakpoints(self):
        return [self.b]

    def minimum(self):
        return math.cos(self.b)

    def closed_form_conformal_type(self):
        return 2.0 * float(inverse_gudermannian(self.b))

    def closed_form_volume(self):
        return 4.0 * math.pi * math.sin(self.b)

    def _conformal_coordinate(self, s):
        b = self.b
        beta = self.closed_form_conformal_type()
        return np.where(
            s <= b,
            inverse_gudermannian(np.minimum(s, b)),
            beta - inverse_gudermannian(np.clip(2.0 * b - s, 0.0, b)))

    def _inverse_conformal_coordinate(self, w):
        beta = self.closed_form_conformal_type()
        half = 0.5 * beta
        return np.where(
            w <= half,
            gudermannian(np.minimum(w, half)),
            2.0 * self.b - gudermannian(np.maximum(beta - w, 0.0)))

    def parameters(self):
        return {'b': self.b}


class FlatSphericalProfile(ProfileMetric):
    """
    The flat-spherical metric of parameters (ω, b), half-height V = 2b.

    f = cos v on |v| ≤ ω, f = cos ω on the flat band ω ≤ |v| ≤ 2b - ω and
    f = cos(2b - |v|) on the second cap 2b - ω ≤ |v| ≤ 2b.  With ω = b
    the flat band is empty and the metric is G_b'.

    """

    kind = 'flat-spherical'
    equatorial_cap = True

    def __init__(self, omega, b):
        """Initialize with the cap height ω and the parameter b ≥ ω."""
        self.omega = IntervalValidator(
            'omega', lower=0.0, upper=HALF_PI, error_class=InvalidMetric)(
                omega)
        self.b = IntervalValidator(
            'b', lower=self.omega, closed='left', error_class=InvalidMetric)(
                b)
        super(FlatSphericalProfile, self).__init__(2.0 * self.b)

    def _profile(self, s):
        s = np.asarray(s, dtype=float)
        omega, b = self.omega, self.b
        return np.where(
            s <= omega,
            np.cos(s),
            np.where(
                s <= 2.0 * b - omega,
                math.cos(omega),
                np.cos(2.0 * b - s)))

    def breakpoints(self):
        points = [self.omega, 2.0 * self.b - self.omega]
        return sorted(set(points))

    def minimum(self):
        return math.cos(self.omega)

    def flat_band(self):
        """Return the v-interval ]ω, 2b - ω[ of the flat band."""
        return self.omega, 2.0 * self.b - self.omega

    def closed_form_conformal_type(self):
        omega, b = self.omega, self.b
        return (
            2.0 * float(inverse_gudermannian(omega))
            + 2.0 * (b - omega) / math.cos(omega))

    def closed_form_volume(self):
        omega, b = self.omega, self.b
        return (
            4.0 * math.pi * math.sin(omega)
            + 4.0 * math.pi * (b - omega) * math.cos(omega))

    def _conformal_coordinate(self, s):
        omega, b = self.omega, self.b
        w_cap = float(inverse_gudermannian(omega))
        beta = self.closed_form_conformal_type()
        return np.where(
            s <= omega,
            inverse_gudermannian(np.minimum(s, omega)),
            np.where(
                s <= 2.0 * b - omega,
                w_cap + (s - omega) / math.cos(omega),
                beta - inverse_gudermannian(
                    np.clip(2.0 * b - s, 0.0, omega))))

    def _inverse_conformal_coordinate(self, w):
        omega, b = self.omega, self.b
        w_cap = float(inverse_gudermannian(omega))
        beta = self.closed_form_conformal_type()
        return np.where(
            w <= w_cap,
            gudermannian(np.minimum(w, w_cap)),
            np.where(
                w <= beta - w_cap,
                omega + (w - w_cap) * math.cos(omega),
                2.0 * b - gudermannian(np.maximum(beta - w, 0.0))))

    def parameters(self):
        return {'omega': self.omega, 'b': self.b}


class ThirdPiProfile(FlatSphericalProfile):
    """The flat-spherical metric H_b: ω = π/3, flat band factor 1/2."""

    kind = 'flat-spherical-pi3'

    def __init__(self, b):
        """Initialize with b ≥ π/3."""
        super(ThirdPiProfile, self).__init__(math.pi / 3.0, b)

    def closed_form_conformal_type(self):
        return 2.0 * LOG_TWO_PLUS_SQRT3 + 4.0 * (self.b - math.pi / 3.0)

    def closed_form_volume(self):
        return 2.0 * math.pi * (
            math.sqrt(3.0) + self.b - math.pi / 3.0)

    def parameters(self):
        return {'b': self.b}


class TabulatedProfile(ProfileMetric):
    """A profile given by samples on [0, V], interpolated linearly."""

    kind = 'tabulated'

    def __init__(self, v, f):
        """Initialize with abscissae `v` (from 0 to V) and values `f`."""
        v = np.array(v, dtype=float)
        f = np.array(f, dtype=float)
        if v.ndim != 1 or v.shape != f.shape or v.size < 2:
            raise InvalidMetric(
                'Tabulated profile needs two equally long sample lists of '
                'at least two values.')
        if v[0] != 0.0 or not np.all(np.diff(v) > 0.0):
            raise InvalidMetric(
                'Tabulated abscissae must start at 0 and increase strictly.')
        PositiveValuesValidator(name='profile')(f)
        v.setflags(write=False)
        f.setflags(write=False)
        self.v = v
        self.f = f
        self._slopes = np.diff(f) / np.diff(v)
        w_nodes = np.concatenate(
            [[0.0], np.cumsum(self._segment_integrals())])
        w_nodes.setflags(write=False)
        self._w_nodes = w_nodes
        super(TabulatedProfile, self).__init__(v[-1])

    def _segment_integrals(self):
        """Return ∫ dt/f over each segment of linear interpolation."""
        f0, f1 = self.f[:-1], self.f[1:]
        dv = np.diff(self.v)
        return _log_mean_inverse(f0, f1) * dv

    def _profile(self, s):
        return np.interp(s, self.v, self.f)

    def breakpoints(self):
        return list(self.v[1:-1])

    def minimum(self):
        return float(self.f.min())

    def closed_form_conformal_type(self):
        return float(self._w_nodes[-1])

    def closed_form_volume(self):
        return 2.0 * math.pi * float(
            np.sum(0.5 * (self.f[:-1] + self.f[1:]) * np.diff(self.v)))

    def _segment(self, s):
        k = np.searchsorted(self.v, s, side='right') - 1
        return np.clip(k, 0, self.v.size - 2)

    def _conformal_coordinate(self, s):
        s = np.asarray(s, dtype=float)
        k = self._segment(s)
        x = s - self.v[k]
        f0 = self.f[k]
        m = self._slopes[k]
        with np.errstate(divide='ignore', invalid='ignore'):
            partial = np.where(
                np.abs(m * x) > 1e-12 * f0,
                np.log1p(m * x / f0) / np.where(m == 0.0, 1.0, m),
                x / f0)
        return self._w_nodes[k] + partial

    def _inverse_conformal_coordinate(self, w):
        w = np.asarray(w, dtype=float)
        k = np.clip(
            np.searchsorted(self._w_nodes, w, side='right') - 1,
            0, self.v.size - 2)
        dw = w - self._w_nodes[k]
        f0 = self.f[k]
        m = self._slopes[k]
        with np.errstate(over='ignore', invalid='ignore'):
            partial = np.where(
                np.abs(m * dw) > 1e-12,
                f0 * np.expm1(m * dw) / np.where(m == 0.0, 1.0, m),
                f0 * dw)
        return self.v[k] + partial

    def parameters(self):
        return {'v': self.v.tolist(), 'f': self.f.tolist()}

    def __hash__(self):
        return hash((self.kind, self.half_height, self.v.size))


class MobiusHalfProfile(ProfileMetric):
    """
    Restriction of a Klein profile metric to the Möbius band |v| ≤ V/2.

    The Klein profiles built here are symmetric about V/2, so the
    restriction has half the conformal type and half the volume.

    """

    kind = 'mobius-half'

    def __init__(self, parent):
        """Initialize with the Klein profile metric being restricted."""
        if isinstance(parent, MobiusHalfProfile):
            raise InvalidMetric('A Möbius band restriction cannot be nested.')
        self.parent = parent
        super(MobiusHalfProfile, self).__init__(0.5 * parent.half_height)

    def _reduce(self, v):
        return np.minimum(np.abs(np.asarray(v, dtype=float)), self.half_height)

    def _profile(self, s):
        return self.parent._profile(s)

    def breakpoints(self):
        V = self.half_height
        return [p for p in self.parent.breakpoints() if p < V]

    def minimum(self):
        V = self.half_height
        samples = np.linspace(0.0, V, 4097)
        return float(np.min(self._profile(samples)))

    def closed_form_conformal_type(self):
        parent = self.parent.closed_form_conformal_type()
        return None if parent is None else 0.5 * parent

    def closed_form_volume(self):
        parent = self.parent.closed_form_volume()
        return None if parent is None else 0.5 * parent

    def _conformal_coordinate(self, s):
        return self.parent._conformal_coordinate(s)

    def _inverse_conformal_coordinate(self, w):
        return self.parent._inverse_conformal_coordinate(w)

    def parameters(self):
        return {'parent': self.parent}


class GridMetric(object):
    """
    A conformal factor φ on the node lattice of [-π/2, π/2] × [-β, β].

    `factors[i, j]` is φ(u_i, v_j) with u_i = -π/2 + iπ/(n_u - 1) and
    v_j = -β + 2jβ/(n_v - 1).  The boundary nodes are identified by the deck
    maps, and the table must agree on identified nodes.

    """

    metric_type = 'grid'
    kind = 'grid'

    def __init__(self, beta, factors):
        """Initialize with the conformal type and the factor table."""
        self.conformal_class = ConformalClass(beta)
        try:
            factors = np.array(factors, dtype=float)
        except ValueError:
            raise InvalidMetric(
                'Factor table rows must all have the same length.')
        if factors.ndim != 2 or min(factors.shape) < 3:
            raise InvalidMetric(
                'Factor table must be two-dimensional with at least three '
                'nodes per axis, got shape {}.'.format(factors.shape))
        PositiveValuesValidator(name='conformal factor')(factors)
        DeckCompatibilityValidator()(factors)
        factors.setflags(write=False)
        self.factors = factors

    @property
    def beta(self):
        return self.conformal_class.beta

    @property
    def n_u(self):
        return self.factors.shape[0]

    @property
    def n_v(self):
        return self.factors.shape[1]

    @property
    def flat_factors(self):
        """The factor table flattened row-major, node (i, j) at i * n_v + j."""
        return self.factors.ravel()

    @property
    def du(self):
        return math.pi / (self.n_u - 1)

    @property
    def dv(self):
        return 2.0 * self.beta / (self.n_v - 1)

    @property
    def u_nodes(self):
        return np.linspace(-HALF_PI, HALF_PI, self.n_u)

    @property
    def v_nodes(self):
        return np.linspace(-self.beta, self.beta, self.n_v)

    def volume(self):
        """
        Return the sum of φ² du dv over one period of the node lattice.

        Each node stands for the cell of size du × dv centred on it, so the
        sum is exact when φ² at a node is the mean of φ² over its cell, as
        `to_conformal_grid` and `coarsened` produce.

        """
        cells = self.factors[:-1, :-1]
        return float(np.sum(cells * cells) * self.du * self.dv)

    def scaled(self, c):
        """Return the grid metric with factor c·φ."""
        return GridMetric(self.beta, c * self.factors)

    def lift(self, i_start, i_stop, j_start, j_stop):
        """
        Return φ on lattice nodes of the universal cover.

        Rows i_start..i_stop - 1 and columns j_start..j_stop - 1 of the
        infinite lattice indexed like `factors`, extended by deck invariance.

        """
        period_u = self.n_u - 1
        period_v = self.n_v - 1
        i = np.arange(i_start, i_stop)
        j = np.arange(j_start, j_stop)
        k = np.floor_divide(i, period_u)
        ii = i - k * period_u
        flipped = np.mod(k, 2) == 1
        jj = np.where(flipped[:, None], period_v - j[None, :], j[None, :])
        jj = np.mod(jj, period_v)
        return self.factors[ii[:, None], jj]

    def coarsened(self):
        """
        Return the metric on every other node, conserving the volume.

        φ² at a coarse node is the 1/4, 1/2, 1/4 weighted mean of φ² over
        the fine nodes around it in each direction, extended across the
        boundary by deck invariance.  Tables with an odd number of cells per
        period are interpolated instead.

        """
        period_u, period_v = self.n_u - 1, self.n_v - 1
        if period_u % 2 or period_v % 2:
            return self.resampled(period_u // 2 + 1, period_v // 2 + 1)
        squares = self.lift(-1, self.n_u + 1, -1, self.n_v + 1) ** 2
        squares = (
            0.25 * squares[:-2] + 0.5 * squares[1:-1] + 0.25 * squares[2:])
        squares = (
            0.25 * squares[:, :-2] + 0.5 * squares[:, 1:-1]
            + 0.25 * squares[:, 2:])
        table = np.sqrt(squares[::2, ::2])
        table[-1, :] = table[0, ::-1]
        table[:, -1] = table[:, 0]
        return GridMetric(self.beta, table)

    def resampled(self, n_u, n_v):
        """Return the factor interpolated linearly onto another lattice."""
        if n_u == self.n_u and n_v == self.n_v:
            return self
        if (self.n_u - 1) % (n_u - 1) == 0 and (self.n_v - 1) % (n_v - 1) == 0:
            step_u = (self.n_u - 1) // (n_u - 1)
            step_v = (self.n_v - 1) // (n_v - 1)
            return GridMetric(self.beta, self.factors[::step_u, ::step_v])
        interpolator = interpolate.RegularGridInterpolator(
            (self.u_nodes, self.v_nodes), self.factors)
        u = np.linspace(-HALF_PI, HALF_PI, n_u)
        v = np.linspace(-self.beta, self.beta, n_v)
        uu, vv = np.meshgrid(u, v, indexing='ij')
        table = interpolator(np.stack([uu, vv], axis=-1))
        # restore exact agreement on identified boundary nodes
        table[-1, :] = table[0, ::-1]
        table[:, -1] = table[:, 0]
        return GridMetric(self.beta, table)

    def __repr__(self):
        return 'GridMetric(beta={!r}, n_u={}, n_v={})'.format(
            self.beta, self.n_u, self.n_v)


def _log_mean_inverse(f0, f1):
    """Return (ln f1 - ln f0)/(f1 - f0), the mean of 1/f over a segment."""
    d = f1 - f0
    with np.errstate(divide='ignore', invalid='ignore'):
        return np.where(
            np.abs(d) > 1e-12 * f0,
            np.log(f1 / f0) / np.where(d == 0.0, 1.0, d),
            1.0 / f0)


def _quad(func, upper, points):
    """Integrate `func` over [0, upper] with breakpoints at `points`."""
    tol = systolic_settings.PROFILE_QUADRATURE_TOL
    points = [p for p in points if 0.0 < p < upper]
    with warnings.catch_warnings():
        warnings.simplefilter('error', integrate.IntegrationWarning)
        try:
            value, error = integrate.quad(
                func, 0.0, upper,
                points=points or None,
                epsabs=tol, epsrel=tol,
                limit=max(100, 4 * len(points)))
        except integrate.IntegrationWarning as exc:
            raise QuadratureError(
                'Profile quadrature did not converge: {}'.format(exc))
    logger.debug('quad over [0, %g]: %r (error %g)', upper, value, error)
    return value


def _check_profile(metric):
    """Raise `InvalidMetric` if the profile is not positive."""
    samples = np.linspace(0.0, metric.half_height, 1025)
    PositiveValuesValidator(name='profile')(metric._profile(samples))


def conformal_type_of_profile(metric):
    """
    Return the conformal type β = ∫₀^V dt/f(t) of a profile metric.

    Computed by adaptive quadrature with breakpoints at the kinks of f.

    """
    _check_profile(metric)
    return _quad(
        lambda s: 1.0 / float(metric._profile(s)),
        metric.half_height,
        metric.breakpoints())


def profile_mass(metric, s):
    """
    Return ∫₀^s f(t) dt for each s in [0, V].

    Gauss-Legendre rules on the pieces between the requested points and
    the kinks of f, accumulated in order.

    """
    s = np.clip(np.asarray(s, dtype=float), 0.0, metric.half_height)
    knots = np.unique(np.concatenate(
        [[0.0], np.asarray(metric.breakpoints(), dtype=float), s.ravel()]))
    lower, upper = knots[:-1], knots[1:]
    x, w = _legendre(systolic_settings.GAUSS_LEGENDRE_NODES)
    half = 0.5 * (upper - lower)
    nodes = lower[:, None] + half[:, None] * (x + 1.0)
    pieces = half * np.sum(metric._profile(nodes) * w, axis=1)
    cumulative = np.concatenate([[0.0], np.cumsum(pieces)])
    return cumulative[np.searchsorted(knots, s)]


def volume(metric):
    """Return the volume of a profile metric or of a grid metric."""
    if isinstance(metric, GridMetric):
        return metric.volume()
    _check_profile(metric)
    return 2.0 * math.pi * _quad(
        lambda s: float(metric._profile(s)),
        metric.half_height,
        metric.breakpoints())


def to_conformal_grid(metric, n_u, n_v):
    """
    Return the profile metric as a conformal factor on a flat grid.

    The coordinate w(v) = ∫₀^v dt/f(t) turns f²du² + dv² into
    f(v(w))² (du² + dw²).  The factor at a node is the root mean square of
    f(v(w)) over the cell |w - w_j| ≤ h/2 around it, that is
    √(∫ f dv / h) over the image of the cell, so that the lattice volume
    is the volume of the metric whatever the position of the kinks.

    """
    minimum = systolic_settings.GRID_MIN_RESOLUTION
    if min(n_u, n_v) < minimum:
        raise ResolutionError(
            'Grid resolution {}x{} is below the minimum {}x{}.'.format(
                n_u, n_v, minimum, minimum))
    if isinstance(metric, MobiusHalfProfile):
        raise InvalidMetric(
            'The Möbius band restriction is not a metric on the Klein '
            'bottle.')
    if n_v % 2 == 0:
        warnings.warn(
            'Even n_v = {} puts no lattice row on v = 0.'.format(n_v))
    beta = conformal_type_of_profile(metric)
    h = 2.0 * beta / (n_v - 1)
    edges = np.clip(
        np.linspace(-beta - 0.5 * h, beta + 0.5 * h, n_v + 1), -beta, beta)
    v = metric.inverse_conformal_coordinate(edges)
    cells = np.diff(np.sign(v) * profile_mass(metric, np.abs(v)))
    # the end cells straddle w = ±β, where f is even about the boundary
    cells[0] *= 2.0
    cells[-1] *= 2.0
    column = np.sqrt(cells / h)
    column = 0.5 * (column + column[::-1])
    return GridMetric(beta, np.tile(column, (n_u, 1)))


@functools.lru_cache(maxsize=None)
def _legendre(n):
    nodes, weights = special.roots_legendre(n)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def gauss_legendre(lower, upper, n=None):
    """Return Gauss-Legendre nodes and weights on [lower, upper]."""
    x, w = _legendre(n or systolic_settings.GAUSS_LEGENDRE_NODES)
    half = 0.5 * (upper - lower)
    return lower + half * (x + 1.0), half * w
