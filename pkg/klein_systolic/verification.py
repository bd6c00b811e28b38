"""
Numerical evidence for the systolic inequalities.

Sweeps draw random conformal perturbations of an extremal metric, measure
their class lengths on the lattice and compare l_1 ⋯ l_p with
C_β vol^{p/2}.  Probes check the limits and monotonicity of the constants.

"""

import dataclasses
import logging
import math

from concurrent import futures
from dataclasses import dataclass
from dataclasses import field

import numpy as np

from klein_systolic.constants import KLEIN_THEOREMS
from klein_systolic.constants import LENGTHS
from klein_systolic.constants import MOBIUS_SATZ2
from klein_systolic.constants import MOBIUS_SATZ3
from klein_systolic.constants import SIGMA_N_V
from klein_systolic.constants import SIGMA_V
from klein_systolic.constants import SIGMA_V_H
from klein_systolic.constants import arcsin_ratio
from klein_systolic.constants import constant
from klein_systolic.constants import exponent
from klein_systolic.constants import threshold
from klein_systolic.constants import thm3_constant
from klein_systolic.exceptions import DomainError
from klein_systolic.exceptions import ResolutionError
from klein_systolic.extremal import extremal_for_beta
from klein_systolic.geometry import HALF_PI
from klein_systolic.geometry import GridMetric
from klein_systolic.geometry import to_conformal_grid
from klein_systolic.settings import systolic_settings
from klein_systolic.settings import worker_count
from klein_systolic.solvers import beta_of_omega_thm1
from klein_systolic.solvers import beta_of_omega_thm3
from klein_systolic.solvers import solve_b0
from klein_systolic.systoles import HORIZONTAL
from klein_systolic.systoles import SIGMA
from klein_systolic.systoles import VERTICAL
from klein_systolic.systoles import systole_report
from klein_systolic.validators import IntervalValidator


logger = logging.getLogger(__name__)

MAX_MODES = 8
SEED_MODULUS = 2 ** 64

# classes whose lengths enter each left-hand side
_CLASSES = {
    SIGMA_V: (SIGMA, VERTICAL),
    SIGMA_N_V: (SIGMA, VERTICAL, HORIZONTAL),
    SIGMA_V_H: (SIGMA, VERTICAL, HORIZONTAL),
}


@dataclass(frozen=True)
class PerturbationSpec(object):
    """Seed, amplitude, mode count and lattice size of a random factor."""

    seed: int = 0
    amplitude: float = 0.5
    modes: int = 4
    resolution: tuple = (129, 129)

    def __post_init__(self):
        if not 0 <= int(self.seed) < SEED_MODULUS:
            raise DomainError(
                'seed = {!r} is not a 64-bit unsigned integer.'.format(
                    self.seed))
        IntervalValidator('amplitude', lower=0.0, upper=1.0, closed='left')(
            self.amplitude)
        IntervalValidator('modes', lower=1, upper=MAX_MODES, closed='both')(
            self.modes)
        resolution = self.resolution
        if isinstance(resolution, int):
            resolution = (resolution, resolution)
        resolution = tuple(int(n) for n in resolution)
        minimum = systolic_settings.GRID_MIN_RESOLUTION
        if len(resolution) != 2 or min(resolution) < minimum:
            raise ResolutionError(
                'Perturbation resolution {!r} needs two sizes of at least '
                '{}.'.format(self.resolution, minimum))
        object.__setattr__(self, 'resolution', resolution)

    def for_sample(self, index):
        """Return the perturbation of sample `index`, seed shifted by it."""
        return dataclasses.replace(
            self, seed=(self.seed + index) % SEED_MODULUS)

    def refined(self):
        """Return the perturbation on the lattice of doubled resolution."""
        return dataclasses.replace(
            self, resolution=tuple(2 * n - 1 for n in self.resolution))


@dataclass(frozen=True)
class SweepResult(object):
    """Outcome of a sweep, with everything needed to reproduce it."""

    theorem: str
    beta: float
    C: float
    samples: int
    worst_ratio: float
    worst_seed: int
    equality_ratio: float
    equality_gap: float
    passed: bool
    violations: tuple = ()
    reruns: int = 0
    seed: int = 0
    amplitude: float = 0.0
    modes: int = 0
    resolution: tuple = None
    tol_grid: float = None
    tol_equality: float = None

    @property
    def failing_seed(self):
        """The first seed beyond tolerance, or `None`."""
        return self.violations[0] if self.violations else None


def symmetric_polynomial(rng, modes, u, w, beta):
    """
    Return a random trigonometric polynomial S on the u × w lattice.

    Terms cos(ku), sin(ku) pair with cos(mπw/β) for even k and with
    sin(mπw/β) for odd k, so S(u + π, -w) = S(u, w) = S(u, w + 2β).
    Coefficients are standard normal and normalised by their absolute sum,
    so |S| ≤ 1.  The constant term is left out.

    """
    total = np.zeros((u.size, w.size))
    norm = 0.0
    for k in range(modes + 1):
        for m in range(modes + 1):
            if k % 2 == 0:
                if k == 0 and m == 0:
                    continue
                column = np.cos(m * math.pi * w / beta)
            else:
                if m == 0:
                    continue
                column = np.sin(m * math.pi * w / beta)
            rows = [np.cos(k * u)]
            if k:
                rows.append(np.sin(k * u))
            for row in rows:
                c = rng.standard_normal()
                total += c * np.outer(row, column)
                norm += abs(c)
    return total / norm if norm else total


def random_conformal_factor(spec, base):
    """
    Return φ = φ_e (1 + amplitude · S) on the lattice of `spec`.

    `base` is the grid of the extremal factor φ_e; S comes from
    `symmetric_polynomial`, seeded with `spec.seed`.

    """
    base = base.resampled(*spec.resolution)
    if spec.amplitude == 0.0:
        return base
    rng = np.random.default_rng(spec.seed)
    S = symmetric_polynomial(
        rng, spec.modes, base.u_nodes, base.v_nodes, base.beta)
    table = base.factors * (1.0 + spec.amplitude * S)
    # identified nodes carry bit-identical values
    table[-1, :] = table[0, ::-1]
    table[:, -1] = table[:, 0]
    return GridMetric(base.beta, table)


def _check_klein(theorem):
    if theorem not in KLEIN_THEOREMS:
        raise DomainError(
            'Inequality sweeps run on Klein bottle families ({}), not '
            '{}.'.format(', '.join(KLEIN_THEOREMS), theorem))


def isosystolic_ratio(theorem, C, grid):
    """Return l_1 ⋯ l_p / (C vol^{p/2}) of a grid metric."""
    _check_klein(theorem)
    report = systole_report(grid, classes=_CLASSES[theorem])
    return (
        report.product(LENGTHS[theorem])
        / (C * report.volume ** (0.5 * exponent(theorem))))


def run_inequality_sweep(theorem, beta, n_samples, spec=None, tol_grid=None,
                         tol_equality=None):
    """
    Return the `SweepResult` of `n_samples` perturbations at type β.

    Sample k uses seed `spec.seed + k`.  A sample beyond 1 + tol_grid is
    rerun at doubled resolution before it is counted as a violation.

    """
    _check_klein(theorem)
    spec = spec or PerturbationSpec()
    tol_grid = tol_grid or systolic_settings.TOL_GRID
    tol_equality = tol_equality or systolic_settings.TOL_EQUALITY
    if n_samples < 0:
        raise DomainError(
            'n_samples = {!r} must not be negative.'.format(n_samples))
    C = constant(theorem, beta).C
    metric = extremal_for_beta(theorem, beta).metric
    base = to_conformal_grid(metric, *spec.resolution)
    equality = isosystolic_ratio(theorem, C, base)

    def run(index):
        sample = spec.for_sample(index)
        ratio = isosystolic_ratio(
            theorem, C, random_conformal_factor(sample, base))
        if ratio <= 1.0 + tol_grid:
            return sample.seed, ratio, False
        refined = sample.refined()
        logger.info(
            'seed %d: ratio %.6f beyond tolerance, rerunning at %dx%d',
            sample.seed, ratio, *refined.resolution)
        fine = to_conformal_grid(metric, *refined.resolution)
        ratio = isosystolic_ratio(
            theorem, C, random_conformal_factor(refined, fine))
        if ratio > 1.0 + tol_grid:
            logger.warning(
                '%s at beta %r violated by seed %d: ratio %.6f',
                theorem, beta, sample.seed, ratio)
        return sample.seed, ratio, True

    workers = max(1, min(worker_count(), n_samples or 1))
    with futures.ThreadPoolExecutor(max_workers=workers) as executor:
        outcomes = list(executor.map(run, range(n_samples)))

    worst_seed, worst_ratio = None, None
    if outcomes:
        worst_seed, worst_ratio, _ = max(outcomes, key=lambda o: o[1])
    violations = tuple(
        seed for seed, ratio, _ in outcomes if ratio > 1.0 + tol_grid)
    gap = abs(equality - 1.0)
    return SweepResult(
        theorem=theorem,
        beta=float(beta),
        C=C,
        samples=n_samples,
        worst_ratio=worst_ratio,
        worst_seed=worst_seed,
        equality_ratio=equality,
        equality_gap=gap,
        passed=not violations and gap <= tol_equality,
        violations=violations,
        reruns=sum(1 for _, _, rerun in outcomes if rerun),
        seed=spec.seed,
        amplitude=spec.amplitude,
        modes=spec.modes,
        resolution=spec.resolution,
        tol_grid=tol_grid,
        tol_equality=tol_equality)


def equality_gaps(theorem, beta, resolutions):
    """Return |ratio - 1| of the extremal metric at each lattice size."""
    C = constant(theorem, beta).C
    metric = extremal_for_beta(theorem, beta).metric
    return {
        n: abs(isosystolic_ratio(theorem, C, to_conformal_grid(metric, n, n))
               - 1.0)
        for n in resolutions}


@dataclass(frozen=True)
class AsymptoticsReport(object):
    """Limits, unboundedness and monotonicity of the constants."""

    sigma_v_beta: float
    sigma_v_constant: float
    sigma_n_v_increasing: bool
    sigma_n_v_limit: float
    sigma_v_h_beta: float
    sigma_v_h_constant: float
    thm3_slope_sign: int
    thm3_slope_stable: bool
    threshold_gaps: dict = field(default_factory=dict)
    mobius_gap: float = None


def _slope_sign(samples):
    omegas = np.linspace(1e-3, HALF_PI - 1e-3, samples)
    slopes = np.diff([thm3_constant(float(w)) for w in omegas])
    if np.all(slopes < 0.0):
        return -1
    if np.all(slopes > 0.0):
        return 1
    return 0


def _threshold_gaps():
    """Return the jump of C across the regime threshold of each family."""
    b0 = solve_b0()
    gaps = {}
    beta = threshold(SIGMA_V)
    gaps[SIGMA_V] = abs(
        arcsin_ratio(math.tanh(0.5 * beta)) - 0.5 / math.cos(b0))
    beta = threshold(SIGMA_N_V)
    flat = 2.0 * (math.pi / 3.0) / math.sqrt(3.0)
    gaps[SIGMA_N_V] = abs(arcsin_ratio(math.tanh(0.5 * beta)) - flat)
    return gaps


def probe_asymptotics(sigma_v_omega=HALF_PI - 1e-3, sigma_v_h_omega=1e-5,
                      beta_max=1e6, samples=200):
    """
    Return the `AsymptoticsReport`.

    - C of σ-v is unbounded: it is evaluated at the finite β of
      ω = `sigma_v_omega`
    - C of σⁿ-v increases to 2 on a log grid of β up to `beta_max`
    - C of σ-v-h is unbounded as β → 0: evaluated at ω = `sigma_v_h_omega`
    - the sign of dC/dω of σ-v-h on ]0, π/2[, and whether it survives
      doubling the number of samples

    """
    beta_v = float(beta_of_omega_thm1(sigma_v_omega))
    betas = np.geomspace(0.1, beta_max, samples)
    values = [constant(SIGMA_N_V, float(b)).C for b in betas]
    beta_vh = float(beta_of_omega_thm3(sigma_v_h_omega))
    sign = _slope_sign(samples)
    mobius = np.linspace(0.05, 10.0, samples)
    mobius_gap = max(
        max(abs(constant(MOBIUS_SATZ2, float(b)).C
                - constant(SIGMA_V, 2.0 * float(b)).C),
            abs(constant(MOBIUS_SATZ3, float(b)).C
                - constant(SIGMA_N_V, 2.0 * float(b)).C))
        for b in mobius)
    report = AsymptoticsReport(
        sigma_v_beta=beta_v,
        sigma_v_constant=constant(SIGMA_V, beta_v).C,
        sigma_n_v_increasing=bool(np.all(np.diff(values) > 0.0)),
        sigma_n_v_limit=values[-1],
        sigma_v_h_beta=beta_vh,
        sigma_v_h_constant=constant(SIGMA_V_H, beta_vh).C,
        thm3_slope_sign=sign,
        thm3_slope_stable=sign == _slope_sign(2 * samples),
        threshold_gaps=_threshold_gaps(),
        mobius_gap=mobius_gap)
    logger.debug('asymptotics: %r', report)
    return report
