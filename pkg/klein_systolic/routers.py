"""Router registering command classes under their subcommand prefixes."""

import argparse

import django
import numpy
import rest_framework
import scipy
import semver

from django.core.exceptions import ImproperlyConfigured

import klein_systolic

from klein_systolic.commands import COMMANDS


def _version(value):
    """Return `value` normalised as a semantic version when it is one."""
    try:
        return str(semver.VersionInfo.parse(value))
    except ValueError:
        return value


class CommandRouter(object):
    """Router mapping subcommand prefixes to `Command` classes."""

    def __init__(self, prog='klein-systolic'):
        """Initialize router."""
        self.prog = prog
        self.registry = []

    def register(self, command_class, prefix=None):
        """Register `command_class` under `prefix` (its own by default)."""
        prefix = prefix or command_class.prefix
        if not prefix:
            raise ImproperlyConfigured(
                '`{}` needs a `prefix` to be registered.'.format(
                    command_class.__name__))
        if prefix in self.prefixes:
            raise ImproperlyConfigured(
                'A command is already registered under "{}".'.format(prefix))
        self.registry.append((prefix, command_class))

    @property
    def prefixes(self):
        return [prefix for prefix, _ in self.registry]

    def get_command_class(self, prefix):
        """Return the command class registered under `prefix`."""
        for registered, command_class in self.registry:
            if registered == prefix:
                return command_class
        raise ImproperlyConfigured(
            'No command registered under "{}".'.format(prefix))

    def get_parser(self):
        """Return the argparse parser of every registered command."""
        parser = argparse.ArgumentParser(
            prog=self.prog,
            description='Optimal conformal systolic constants of the Klein '
                        'bottle and the Möbius band.')
        parser.add_argument(
            '--version', action='version',
            version='%(prog)s {}'.format(klein_systolic.__version__))
        subparsers = parser.add_subparsers(dest='command', metavar='command')
        subparsers.required = True
        for prefix, command_class in self.registry:
            subparser = subparsers.add_parser(
                prefix, help=command_class.help,
                description=command_class.__doc__)
            command_class.add_arguments(subparser)
            subparser.add_argument(
                '--json', action='store_true',
                help='print the result envelope as JSON')
            subparser.add_argument(
                '--out', help='write the result to this file')
            subparser.add_argument(
                '-v', '--verbose', action='store_true',
                help='log at DEBUG level on stderr')
        return parser

    def get_versions(self):
        """Return the versions recorded in command results."""
        return {
            'klein_systolic': _version(klein_systolic.__version__),
            'numpy': _version(numpy.__version__),
            'scipy': _version(scipy.__version__),
            'django': _version(django.get_version()),
            'djangorestframework': _version(rest_framework.VERSION),
        }


router = CommandRouter()
for command_class in COMMANDS:
    router.register(command_class)
