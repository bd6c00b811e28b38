"""
Command classes behind the `klein-systolic` subcommands.

Each command declares its arguments, runs one operation of the package and
serializes the result with its `serializer_class`, much like a non-model
API view renders a resource.

"""

import argparse
import csv
import logging
import time

from dataclasses import dataclass
from dataclasses import field

import klein_systolic

from klein_systolic.constants import THEOREMS
from klein_systolic.constants import constant
from klein_systolic.constants import sweep
from klein_systolic.extremal import extremal_for_beta
from klein_systolic.measures import certify_theorem
from klein_systolic.serializers import AsymptoticsReportSerializer
from klein_systolic.serializers import BoundCertificateSerializer
from klein_systolic.serializers import ConstantResultSerializer
from klein_systolic.serializers import ExtremalSerializer
from klein_systolic.serializers import RootResultSerializer
from klein_systolic.serializers import SweepResultSerializer
from klein_systolic.serializers import SystoleReportSerializer
from klein_systolic.serializers import read_metric
from klein_systolic.serializers import write_metric
from klein_systolic.solvers import EQUATIONS
from klein_systolic.solvers import solve
from klein_systolic.systoles import HOMOTOPY_CLASSES
from klein_systolic.systoles import systole_report
from klein_systolic.verification import PerturbationSpec
from klein_systolic.verification import probe_asymptotics
from klein_systolic.verification import run_inequality_sweep


logger = logging.getLogger(__name__)

CSV_FORMAT = 1
ALL_CLASSES = 'all'


@dataclass(frozen=True)
class CommandResult(object):
    """A command echo, its inputs and outputs, versions and wall time."""

    command: str
    inputs: dict
    outputs: object
    versions: dict = field(default_factory=dict)
    wall_time: float = 0.0
    exit_code: int = 0


def resolution(value):
    """Return `NxM` or `N` as a pair of lattice sizes."""
    try:
        sizes = tuple(int(n) for n in value.lower().split('x'))
    except ValueError:
        sizes = ()
    if len(sizes) == 1:
        sizes = sizes * 2
    if len(sizes) != 2 or min(sizes) < 1:
        raise argparse.ArgumentTypeError(
            'invalid resolution "{}"; expected NxM or N'.format(value))
    return sizes


def _is_scalar(value):
    return value is None or isinstance(value, (str, int, float, bool))


def rows(outputs):
    """Return serialized outputs as a list of flat rows of scalar values."""
    items = outputs if isinstance(outputs, list) else [outputs]
    return [
        {key: value for key, value in item.items() if _is_scalar(value)}
        for item in items]


def write_csv(prefix, outputs, stream):
    """Write serialized outputs as CSV under a versioned header comment."""
    table = rows(outputs)
    columns = list(table[0]) if table else []
    stream.write('# klein-systolic {} {} csv-format {}; columns: {}\n'.format(
        klein_systolic.__version__, prefix, CSV_FORMAT, ','.join(columns)))
    writer = csv.DictWriter(stream, fieldnames=columns, lineterminator='\n')
    writer.writeheader()
    writer.writerows(table)


class Command(object):
    """
    Base class of subcommands.

    Subclasses set `prefix`, `help` and `serializer_class`, declare their
    arguments in `add_arguments` and implement `run`.

    """

    prefix = None
    help = None
    serializer_class = None
    many = False

    def __init__(self, options, versions=None):
        """Initialize with the parsed options and the library versions."""
        self.options = options
        self.versions = versions or {}

    @classmethod
    def add_arguments(cls, parser):
        """Add the subcommand arguments to `parser`."""

    def get_serializer_class(self):
        """Return the serializer class."""
        assert self.serializer_class is not None, (
            "'%s' should either include a `serializer_class` attribute, "
            "or override the `get_serializer_class()` method."
            % self.__class__.__name__
        )

        return self.serializer_class

    def get_serializer_context(self):
        """Return extra context to provide to the serializer."""
        return {
            'options': self.options,
            'command': self,
        }

    def get_serializer(self, *args, **kwargs):
        """Return the serializer instance."""
        serializer_class = self.get_serializer_class()
        kwargs['context'] = self.get_serializer_context()
        kwargs.setdefault('many', self.many)
        return serializer_class(*args, **kwargs)

    def get_inputs(self):
        """Return the options echoed in the result."""
        return {
            key: value for key, value in vars(self.options).items()
            if key not in ('command', 'json', 'verbose')}

    def run(self):
        """Return the result of the command."""
        raise NotImplementedError(
            'Subclass `{}` should implement `run` method.'.format(
                self.__class__.__name__))

    def get_exit_code(self, result):
        """Return the process exit code for `result`."""
        return 0

    def execute(self):
        """Run the command, write `--out` and return its `CommandResult`."""
        start = time.perf_counter()
        result = self.run()
        outputs = self.get_serializer(result).data
        if getattr(self.options, 'out', None):
            self.write_output(result, outputs, self.options.out)
        wall_time = time.perf_counter() - start
        logger.debug('%s finished in %.3f s', self.prefix, wall_time)
        return CommandResult(
            command=self.prefix,
            inputs=self.get_inputs(),
            outputs=outputs,
            versions=self.versions,
            wall_time=wall_time,
            exit_code=self.get_exit_code(result))

    def write_output(self, result, outputs, path):
        """Write the serialized outputs to `path` as CSV."""
        with open(path, 'w', newline='') as f:
            write_csv(self.prefix, outputs, f)


def _theorem_argument(parser):
    parser.add_argument(
        '--theorem', required=True, choices=THEOREMS,
        help='inequality family')


class ConstantsCommand(Command):
    prefix = 'constants'
    help = 'optimal constant C_beta of one inequality'
    serializer_class = ConstantResultSerializer

    @classmethod
    def add_arguments(cls, parser):
        _theorem_argument(parser)
        parser.add_argument(
            '--beta', type=float, required=True,
            help='conformal type (Möbius half-type for mobius-*)')

    def run(self):
        return constant(self.options.theorem, self.options.beta)


class SweepCommand(Command):
    prefix = 'sweep'
    help = 'constants on an evenly spaced range of conformal types'
    serializer_class = ConstantResultSerializer
    many = True

    @classmethod
    def add_arguments(cls, parser):
        _theorem_argument(parser)
        parser.add_argument('--beta-min', type=float, required=True)
        parser.add_argument('--beta-max', type=float, required=True)
        parser.add_argument('--steps', type=int, default=100)

    def run(self):
        options = self.options
        return sweep(
            options.theorem, options.beta_min, options.beta_max,
            options.steps)


class SolveCommand(Command):
    prefix = 'solve'
    help = 'solve one of the transcendental equations'
    serializer_class = RootResultSerializer

    @classmethod
    def add_arguments(cls, parser):
        parser.add_argument('--equation', required=True, choices=EQUATIONS)
        parser.add_argument('--beta', type=float)

    def run(self):
        return solve(self.options.equation, self.options.beta)


class ExtremalCommand(Command):
    """
    Build the extremal metric.

    `--out` writes it as a metric file, with the spec in the extremal-spec
    file next to it.

    """

    prefix = 'extremal'
    help = 'extremal metric of an inequality at a conformal type'
    serializer_class = ExtremalSerializer

    @classmethod
    def add_arguments(cls, parser):
        _theorem_argument(parser)
        parser.add_argument('--beta', type=float, required=True)

    def run(self):
        return extremal_for_beta(self.options.theorem, self.options.beta)

    def write_output(self, result, outputs, path):
        write_metric(result.metric, path, extremal=result.spec)


class SystolesCommand(Command):
    prefix = 'systoles'
    help = 'lengths l_sigma, l_v, l_h and volume of a metric file'
    serializer_class = SystoleReportSerializer

    @classmethod
    def add_arguments(cls, parser):
        parser.add_argument('--metric', required=True, help='metric file')
        parser.add_argument(
            '--grid', type=resolution,
            help='lattice NxM for lengths without a closed form')
        parser.add_argument(
            '--class', dest='homotopy_class', default=ALL_CLASSES,
            choices=list(HOMOTOPY_CLASSES) + [ALL_CLASSES])

    def run(self):
        options = self.options
        classes = None
        if options.homotopy_class != ALL_CLASSES:
            classes = [options.homotopy_class]
        return systole_report(
            read_metric(options.metric),
            resolution=options.grid,
            classes=classes)


class VerifyMeasureCommand(Command):
    prefix = 'verify-measure'
    help = 'measure certificate of a flat-spherical extremal metric'
    serializer_class = BoundCertificateSerializer

    @classmethod
    def add_arguments(cls, parser):
        _theorem_argument(parser)
        parser.add_argument('--beta', type=float, required=True)
        parser.add_argument('--tol-push', type=float)
        parser.add_argument('--tol-mass', type=float)

    def run(self):
        options = self.options
        return certify_theorem(
            options.theorem, options.beta,
            tol_push=options.tol_push, tol_mass=options.tol_mass)

    def get_exit_code(self, result):
        return 0 if result.valid else 1


class VerifyInequalityCommand(Command):
    prefix = 'verify-inequality'
    help = 'random conformal perturbation sweep of an inequality'
    serializer_class = SweepResultSerializer

    @classmethod
    def add_arguments(cls, parser):
        _theorem_argument(parser)
        parser.add_argument('--beta', type=float, required=True)
        parser.add_argument('--samples', type=int, default=200)
        parser.add_argument('--seed', type=int, default=0)
        parser.add_argument('--grid', type=resolution, default=(513, 513))
        parser.add_argument('--amplitude', type=float, default=0.5)
        parser.add_argument('--modes', type=int, default=4)

    def run(self):
        options = self.options
        spec = PerturbationSpec(
            seed=options.seed,
            amplitude=options.amplitude,
            modes=options.modes,
            resolution=options.grid)
        return run_inequality_sweep(
            options.theorem, options.beta, options.samples, spec)

    def get_exit_code(self, result):
        return 0 if result.passed else 1


class ProbeCommand(Command):
    prefix = 'probe'
    help = 'limits and monotonicity of the constants'
    serializer_class = AsymptoticsReportSerializer

    @classmethod
    def add_arguments(cls, parser):
        parser.add_argument(
            '--asymptotics', action='store_true', default=True,
            help='run the asymptotics probe (the only probe)')

    def run(self):
        return probe_asymptotics()


COMMANDS = (
    ConstantsCommand,
    SweepCommand,
    SolveCommand,
    ExtremalCommand,
    SystolesCommand,
    VerifyMeasureCommand,
    VerifyInequalityCommand,
    ProbeCommand,
)
