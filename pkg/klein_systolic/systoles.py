"""
Lengths l_σ, l_v, l_h of the three homotopy classes realizing the systole.

Profile metrics of the closed-form kinds get their lengths from formulas.
Everything else goes through a shortest-path search on a lift of the node
lattice to the universal cover: the length of a class is the least distance
from a basepoint p to its deck image, with p running over a cut line that
every curve of the class crosses.

"""

import heapq
import logging
import math

from concurrent import futures
from dataclasses import dataclass
from dataclasses import field

import numpy as np

from scipy import sparse
from scipy.sparse import csgraph

from klein_systolic.exceptions import ClosedFormUnavailable
from klein_systolic.exceptions import DomainError
from klein_systolic.exceptions import InternalError
from klein_systolic.exceptions import InvalidMetric
from klein_systolic.exceptions import ResolutionError
from klein_systolic.geometry import HALF_PI
from klein_systolic.geometry import ConstantProfile
from klein_systolic.geometry import GridMetric
from klein_systolic.geometry import MobiusHalfProfile
from klein_systolic.geometry import ProfileMetric
from klein_systolic.geometry import gauss_legendre
from klein_systolic.geometry import to_conformal_grid
from klein_systolic.geometry import volume
from klein_systolic.settings import systolic_settings
from klein_systolic.settings import worker_count
from klein_systolic.validators import IntervalValidator


logger = logging.getLogger(__name__)

# king moves and knight moves, each undirected edge listed once
STENCIL = (
    (1, 0), (0, 1), (1, 1), (1, -1),
    (2, 1), (1, 2), (2, -1), (1, -2),
)

CLOSED_FORM = 'closed-form'
GRAPH = 'graph'


class HomotopyClass(object):
    """A free homotopy class of closed curves and its deck transformation."""

    def __init__(self, name, deck_name, label):
        """Initialize with the class name and the `FundamentalDomain` map."""
        self.name = name
        self.deck_name = deck_name
        self.label = label

    def deck(self, domain):
        """Return the deck map of `domain` generating the class."""
        return getattr(domain, self.deck_name)

    def __repr__(self):
        return 'HomotopyClass({!r})'.format(self.name)


SIGMA = HomotopyClass('sigma', 'sigma', 'l_sigma')
VERTICAL = HomotopyClass('v', 't', 'l_v')
HORIZONTAL = HomotopyClass('h', 'sigma_squared', 'l_h')

HOMOTOPY_CLASSES = {c.name: c for c in (SIGMA, VERTICAL, HORIZONTAL)}


def homotopy_class(value):
    """Return the `HomotopyClass` named by `value`."""
    if isinstance(value, HomotopyClass):
        return value
    try:
        return HOMOTOPY_CLASSES[value]
    except KeyError:
        raise DomainError(
            'Unknown homotopy class "{}"; expected one of {}.'.format(
                value, ', '.join(HOMOTOPY_CLASSES)))


@dataclass(frozen=True)
class GreatCircle(object):
    """
    The great circle γ_θ^a of the spherical cap f = cos.

    It runs through (θ - π/2, 0), (θ, a) and (θ + π/2, 0), and its image by
    the glide reflection continues it, so the half over u ∈ [θ - π/2,
    θ + π/2] is a closed curve of the σ class on the Klein bottle.

    """

    theta: float
    a: float

    def latitude(self, u):
        """Return v(u) with tan v = tan a cos(u - θ)."""
        return np.arctan(math.tan(self.a) * np.cos(np.subtract(u, self.theta)))

    def slope(self, u):
        """Return dv/du."""
        t = math.tan(self.a)
        c = np.cos(np.subtract(u, self.theta))
        return -t * np.sin(np.subtract(u, self.theta)) / (1.0 + t * t * c * c)

    def speed(self, u):
        """Return ds/du = √(cos²v + (dv/du)²) in cos²v du² + dv²."""
        v = self.latitude(u)
        return np.sqrt(np.cos(v) ** 2 + self.slope(u) ** 2)

    def nodes(self, n=None):
        """Return arc-length quadrature nodes u and weights ds of one pass."""
        u, w = gauss_legendre(self.theta - HALF_PI, self.theta + HALF_PI, n)
        return u, w * self.speed(u)

    def length(self, n=None):
        """Return the length of one pass, π for every θ and a."""
        return float(np.sum(self.nodes(n)[1]))

    def integrate(self, phi, n=None):
        """Return ∫ φ(u, v(u)) ds over one pass."""
        u, ds = self.nodes(n)
        return float(np.sum(phi(u, self.latitude(u)) * ds))


def great_circle_latitude(circle, u):
    """Return the latitude v of `circle` above u."""
    return circle.latitude(u)


@dataclass(frozen=True)
class GraphLength(object):
    """
    A class length from the lifted lattice and its error estimate.

    `extrapolated` is the Richardson extrapolation of the fine and coarse
    lengths for second order convergence, and `error_estimate` is
    |length - coarse_length|, three times the extrapolation step.

    """

    length: float
    error_estimate: float
    coarse_length: float
    extrapolated: float
    resolution: tuple
    basepoint: tuple
    dijkstra_calls: int


@dataclass(frozen=True)
class SystoleReport(object):
    """Lengths of the three classes, L_σ = min(l_σ, l_h), and the volume."""

    l_sigma: float
    l_v: float
    l_h: float
    L_sigma: float
    volume: float
    resolution: tuple = None
    error_estimate: dict = field(default_factory=dict)
    sources: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ('l_sigma', 'l_v', 'l_h', 'volume'):
            value = getattr(self, name)
            if value is not None and not value > 0.0:
                raise InternalError(
                    '{} = {!r} is not positive.'.format(name, value))
        expected = None
        if self.l_sigma is not None and self.l_h is not None:
            expected = min(self.l_sigma, self.l_h)
        if self.L_sigma != expected:
            raise InternalError(
                'L_sigma = {!r} differs from min(l_sigma, l_h) = {!r}.'.format(
                    self.L_sigma, expected))

    def product(self, names):
        """Return the product of the lengths named in `names`."""
        return math.prod(getattr(self, name) for name in names)


def _check_klein_profile(metric):
    if isinstance(metric, MobiusHalfProfile):
        raise DomainError(
            'Class lengths are defined for Klein bottle metrics, not for the '
            'Möbius band restriction.')


def length_closed_form(cls, metric):
    """
    Return the closed-form length of class `cls` on a profile metric.

    Raises `ClosedFormUnavailable` when the kind has none, so that callers
    fall back to `length_graph`.

    """
    cls = homotopy_class(cls)
    if not isinstance(metric, ProfileMetric):
        raise ClosedFormUnavailable(
            'Grid metrics have no closed-form lengths.')
    _check_klein_profile(metric)
    if cls is VERTICAL:
        return 2.0 * metric.half_height
    if cls is HORIZONTAL:
        return 2.0 * math.pi * metric.minimum()
    if isinstance(metric, ConstantProfile):
        return math.pi * metric.c
    if metric.equatorial_cap:
        return math.pi
    raise ClosedFormUnavailable(
        'No closed form for the {} length of a {} profile.'.format(
            cls.name, metric.kind))


class LiftedGraph(object):
    """
    Stencil graph on a rectangle of the lattice of the universal cover.

    Lattice node (i, j) sits at (u_i, v_j) extended beyond the fundamental
    domain by deck invariance of the factor.  Edges join nodes one stencil
    offset apart, weighted by the mean factor of their ends times their
    Euclidean length.

    """

    def __init__(self, grid, i_range, j_range):
        """Initialize with the grid metric and the index ranges covered."""
        self.i_start, i_stop = i_range
        self.j_start, j_stop = j_range
        phi = grid.lift(self.i_start, i_stop, self.j_start, j_stop)
        n_a, n_b = phi.shape
        self.shape = phi.shape
        index = np.arange(n_a * n_b).reshape(n_a, n_b)
        heads, tails, weights = [], [], []
        for di, dj in STENCIL:
            b_lo, b_hi = max(0, -dj), n_b - max(0, dj)
            head = (slice(0, n_a - di), slice(b_lo, b_hi))
            tail = (slice(di, n_a), slice(b_lo + dj, b_hi + dj))
            length = math.hypot(di * grid.du, dj * grid.dv)
            heads.append(index[head].ravel())
            tails.append(index[tail].ravel())
            weights.append((0.5 * length * (phi[head] + phi[tail])).ravel())
        self.matrix = sparse.csr_matrix(
            (np.concatenate(weights),
             (np.concatenate(heads), np.concatenate(tails))),
            shape=(n_a * n_b, n_a * n_b))

    def node(self, i, j):
        """Return the graph index of lattice node (i, j)."""
        return (i - self.i_start) * self.shape[1] + (j - self.j_start)

    def distances(self, sources):
        """Return the distance of every node to the nearest of `sources`."""
        return csgraph.dijkstra(
            self.matrix, directed=False, indices=sources, min_only=True)


def _cut_line(cls, grid):
    """Return the lift ranges and the (basepoint, deck image) node pairs."""
    period_u = grid.n_u - 1
    period_v = grid.n_v - 1
    margin_u = period_u // 4
    margin_v = period_v // 4
    j_range = (-margin_v, period_v + margin_v + 1)
    if cls is VERTICAL:
        i_range = (-margin_u, period_u + margin_u + 1)
        pairs = [((i, 0), (i, period_v)) for i in range(period_u)]
    elif cls is SIGMA:
        i_range = (-margin_u, period_u + margin_u + 1)
        pairs = [
            ((0, j), (period_u, period_v - j)) for j in range(period_v)]
    else:
        i_range = (-margin_u, 2 * period_u + margin_u + 1)
        pairs = [((0, j), (2 * period_u, j)) for j in range(period_v)]
    return i_range, j_range, pairs


def _shortest_deck_distance(cls, grid):
    """
    Return min over the cut line of dist(p, deck(p)) on the lifted graph.

    Best-first branch and bound over intervals of basepoints: a multi-source
    search from an interval bounds each of its distances from below, and a
    single basepoint gives its distance exactly.

    """
    i_range, j_range, pairs = _cut_line(cls, grid)
    graph = LiftedGraph(grid, i_range, j_range)
    sources = np.array([graph.node(*p) for p, _ in pairs])
    targets = np.array([graph.node(*q) for _, q in pairs])
    calls = [0]

    def bound(lo, hi):
        dist = graph.distances(sources[lo:hi])
        calls[0] += 1
        values = dist[targets[lo:hi]]
        k = int(np.argmin(values))
        return float(values[k]), lo + k

    value, k = bound(0, len(pairs))
    if not math.isfinite(value):
        raise InternalError(
            'The {} lift of {!r} is disconnected.'.format(cls.name, grid))
    heap = [(value, len(pairs), 0, len(pairs), k)]
    while True:
        value, width, lo, hi, k = heapq.heappop(heap)
        if width == 1:
            break
        mid = (lo + hi) // 2
        for a, b in ((lo, mid), (mid, hi)):
            child, kk = bound(a, b)
            heapq.heappush(heap, (child, b - a, a, b, kk))
    logger.debug(
        '%s length on %dx%d lift: %r after %d Dijkstra calls',
        cls.name, graph.shape[0], graph.shape[1], value, calls[0])
    i, j = pairs[k][0]
    basepoint = (-HALF_PI + i * grid.du, -grid.beta + j * grid.dv)
    return value, basepoint, calls[0]


def length_graph(cls, grid, n_u=None, n_v=None):
    """
    Return the `GraphLength` of class `cls` on a grid metric.

    The grid is resampled to n_u × n_v nodes when those are given.  The
    search is rerun on `coarsened()`, and the two lengths give the
    Richardson extrapolation and the error estimate.  Lattice lengths are
    not bounds: the trapezoidal edge weights can fall on either side of the
    length of the curve they follow.

    """
    cls = homotopy_class(cls)
    if not isinstance(grid, GridMetric):
        raise InvalidMetric('length_graph needs a grid metric.')
    n_u = n_u or grid.n_u
    n_v = n_v or grid.n_v
    minimum = systolic_settings.GRAPH_MIN_RESOLUTION
    if min(n_u, n_v) < minimum:
        raise ResolutionError(
            'Graph resolution {}x{} is below the minimum {}x{}.'.format(
                n_u, n_v, minimum, minimum))
    fine = grid.resampled(n_u, n_v)
    length, basepoint, calls = _shortest_deck_distance(cls, fine)
    coarse, _, coarse_calls = _shortest_deck_distance(cls, fine.coarsened())
    return GraphLength(
        length=length,
        error_estimate=abs(length - coarse),
        coarse_length=coarse,
        extrapolated=length + (length - coarse) / 3.0,
        resolution=(n_u, n_v),
        basepoint=basepoint,
        dijkstra_calls=calls + coarse_calls)


def _check_row_bound(l_h, grid):
    """Raise `InternalError` if l_h exceeds the shortest row loop."""
    rows = min(horizontal_row_length(grid, j) for j in range(grid.n_v))
    if l_h > rows * (1.0 + 1e-12):
        raise InternalError(
            'Lattice l_h = {!r} exceeds the row loop length {!r}.'.format(
                l_h, rows))


def _parse_resolution(resolution):
    if resolution is None:
        return None
    if isinstance(resolution, int):
        resolution = (resolution, resolution)
    n_u, n_v = (int(n) for n in resolution)
    return n_u, n_v


def systole_report(metric, resolution=None, classes=None):
    """
    Return the `SystoleReport` of a profile or grid metric.

    Profile lengths come from closed forms when available and from the
    lattice search on `to_conformal_grid(metric, *resolution)` otherwise.
    Grid lengths always come from the lattice search, at the grid's own
    resolution unless `resolution` is given.  `classes` restricts the
    computed lengths; the others are reported as `None`.

    """
    classes = [homotopy_class(c) for c in (classes or HOMOTOPY_CLASSES)]
    resolution = _parse_resolution(resolution)
    lengths, errors, sources = {}, {}, {}
    pending = []
    if isinstance(metric, GridMetric):
        grid = metric
        pending = list(classes)
        metric_volume = grid.volume()
    else:
        _check_klein_profile(metric)
        grid = None
        for cls in classes:
            try:
                lengths[cls.name] = length_closed_form(cls, metric)
            except ClosedFormUnavailable:
                pending.append(cls)
            else:
                errors[cls.name] = 0.0
                sources[cls.name] = CLOSED_FORM
        metric_volume = metric.closed_form_volume() or volume(metric)
    used = None
    if pending:
        if grid is None:
            n = systolic_settings.GRAPH_DEFAULT_RESOLUTION
            grid = to_conformal_grid(metric, *(resolution or (n, n)))
            resolution = None
        n_u, n_v = used = resolution or (grid.n_u, grid.n_v)
        workers = max(1, min(worker_count(), len(pending)))
        with futures.ThreadPoolExecutor(max_workers=workers) as executor:
            results = executor.map(
                lambda cls: length_graph(cls, grid, n_u, n_v), pending)
            for cls, result in zip(pending, results):
                lengths[cls.name] = result.length
                errors[cls.name] = result.error_estimate
                sources[cls.name] = GRAPH
        if HORIZONTAL in pending:
            _check_row_bound(
                lengths[HORIZONTAL.name], grid.resampled(n_u, n_v))
    l_sigma = lengths.get(SIGMA.name)
    l_h = lengths.get(HORIZONTAL.name)
    L_sigma = None
    if l_sigma is not None and l_h is not None:
        L_sigma = min(l_sigma, l_h)
    return SystoleReport(
        l_sigma=l_sigma,
        l_v=lengths.get(VERTICAL.name),
        l_h=l_h,
        L_sigma=L_sigma,
        volume=metric_volume,
        resolution=used,
        error_estimate=errors,
        sources=sources)


def horizontal_row_length(grid, j):
    """
    Return the length of the horizontal loop through lattice row j.

    The loop runs along row j over one period and along row n_v - 1 - j,
    its image by σ, over the next.  It is a lattice path of the h class, so
    it bounds the lattice l_h from above.

    """
    IntervalValidator('j', lower=0, upper=grid.n_v - 1, closed='both')(j)
    row = grid.factors[:, j]
    mirror = grid.factors[:, grid.n_v - 1 - j]
    return grid.du * float(
        np.sum(row) + np.sum(mirror)
        - 0.5 * (row[0] + row[-1] + mirror[0] + mirror[-1]))
