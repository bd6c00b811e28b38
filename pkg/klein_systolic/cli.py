"""
Command-line entry point.

```
klein-systolic constants --theorem sigma-v --beta 1.7627471740
klein-systolic sweep --theorem sigma-n-v --beta-min 0.1 --beta-max 20 \
    --steps 200 --out c.csv
```

β is the conformal type of the Klein bottle, except for the `mobius-*`
families where it is the conformal half-type of the Möbius band.  Angles
are in radians.  Exit codes: 0 on success, 1 on a numerical failure or a
failed check, 2 on a usage error.

"""

import logging
import sys

from rest_framework.exceptions import APIException

from klein_systolic.commands import rows
from klein_systolic.exceptions import error_message
from klein_systolic.routers import router
from klein_systolic.serializers import CommandResultSerializer
from klein_systolic.serializers import dumps


logger = logging.getLogger(__name__)

_handler = logging.StreamHandler()
_handler.setFormatter(logging.Formatter('%(levelname)s %(name)s: %(message)s'))


def configure_logging(verbose=False):
    """Send package log records to stderr, at DEBUG level when `verbose`."""
    package_logger = logging.getLogger('klein_systolic')
    _handler.setStream(sys.stderr)
    if _handler not in package_logger.handlers:
        package_logger.addHandler(_handler)
    package_logger.setLevel(logging.DEBUG if verbose else logging.WARNING)


def _text(value):
    if isinstance(value, float):
        return '{:.12g}'.format(value)
    return '' if value is None else str(value)


def format_table(outputs):
    """Return serialized outputs as aligned text for the terminal."""
    table = rows(outputs)
    if not table:
        return ''
    if len(table) == 1:
        row = table[0]
        width = max(len(key) for key in row)
        return '\n'.join(
            '{:<{}}  {}'.format(key, width, _text(value))
            for key, value in row.items())
    columns = list(table[0])
    cells = [[_text(row.get(c)) for c in columns] for row in table]
    widths = [
        max([len(c)] + [len(line[k]) for line in cells])
        for k, c in enumerate(columns)]
    lines = ['  '.join(c.ljust(w) for c, w in zip(columns, widths))]
    lines.extend(
        '  '.join(v.ljust(w) for v, w in zip(line, widths)) for line in cells)
    return '\n'.join(lines)


def dispatch(argv=None, stdout=None, stderr=None):
    """Run the subcommand named in `argv` and return the exit code."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = router.get_parser()
    try:
        options = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code
    configure_logging(options.verbose)

    command = router.get_command_class(options.command)(
        options, versions=router.get_versions())
    try:
        result = command.execute()
    except (APIException, OSError) as exc:
        stderr.write('{}: error: {}\n'.format(
            options.command, error_message(exc)))
        return 1

    if options.json:
        stdout.write(dumps(CommandResultSerializer(result).data))
    else:
        stdout.write(format_table(result.outputs))
    stdout.write('\n')
    return result.exit_code


def main(argv=None):
    """Console script entry point."""
    sys.exit(dispatch(argv))
