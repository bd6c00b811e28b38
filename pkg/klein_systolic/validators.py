"""Validator classes for metrics, parameters and interchange files."""

import math

import numpy as np
import semver

from django.utils.translation import gettext_lazy as _

from rest_framework.utils.representation import smart_repr

from klein_systolic.exceptions import DomainError
from klein_systolic.exceptions import InvalidMetric
from klein_systolic.settings import systolic_settings


class PositiveValuesValidator(object):
    """
    Validator for samples of a conformal factor or a profile.

    Every value must be finite and strictly positive, for example

    ```
    PositiveValuesValidator(name='profile')(np.cos(v))
    ```

    raises `InvalidMetric` as soon as `v` reaches π/2.

    """

    message = _('Non-positive {0} sample {1!r} at index {2}.')
    non_finite_message = _('Non-finite {0} sample at index {1}.')

    def __init__(self, name='factor'):
        """Initialize the validator with the name used in messages."""
        self.name = name

    def __call__(self, values):
        """Run the validation."""
        values = np.asarray(values, dtype=float)
        finite = np.isfinite(values)
        if not finite.all():
            index = np.unravel_index(np.argmin(finite), values.shape)
            raise InvalidMetric(
                self.non_finite_message.format(self.name, _index(index)))
        if values.size and values.min() <= 0.0:
            index = np.unravel_index(np.argmin(values), values.shape)
            raise InvalidMetric(
                self.message.format(
                    self.name, float(values[index]), _index(index)))

    def __repr__(self):
        """Return python representation of instance."""
        return '<{}(name={})>'.format(
            self.__class__.__name__, smart_repr(self.name))


class IntervalValidator(object):
    """
    Validator for a scalar parameter lying in an interval.

    Bounds are open unless `closed` names them: `'left'`, `'right'` or
    `'both'`.  `None` bounds are unbounded.

    """

    message = _('{0} = {1!r} outside {2}.')

    def __init__(self, name, lower=None, upper=None, closed='neither',
                 error_class=DomainError):
        """Initialize the validator with the interval."""
        self.name = name
        self.lower = lower
        self.upper = upper
        self.closed = closed
        self.error_class = error_class

    def _describe(self):
        """Return the interval in bracket notation."""
        left = '[' if self.closed in ('left', 'both') else ']'
        right = ']' if self.closed in ('right', 'both') else '['
        lower = '-inf' if self.lower is None else '{:.17g}'.format(self.lower)
        upper = '+inf' if self.upper is None else '{:.17g}'.format(self.upper)
        return '{}{}, {}{}'.format(left, lower, upper, right)

    def __call__(self, value):
        """Run the validation."""
        value = float(value)
        ok = not math.isnan(value)
        if ok and self.lower is not None:
            if self.closed in ('left', 'both'):
                ok = value >= self.lower
            else:
                ok = value > self.lower
        if ok and self.upper is not None:
            if self.closed in ('right', 'both'):
                ok = value <= self.upper
            else:
                ok = value < self.upper
        if not ok:
            raise self.error_class(
                self.message.format(self.name, value, self._describe()))
        return value

    def __repr__(self):
        """Return python representation of instance."""
        return '<{}(name={}, lower={}, upper={}, closed={})>'.format(
            self.__class__.__name__,
            smart_repr(self.name),
            smart_repr(self.lower),
            smart_repr(self.upper),
            smart_repr(self.closed))


class DeckCompatibilityValidator(object):
    """
    Validator for conformal factor tables sampled on the node lattice.

    The table covers the flat fundamental domain [-π/2, π/2] × [-β, β]
    with both edges included, so the deck maps identify boundary nodes:

    - σ: (u, v) ↦ (u + π, -v) identifies `table[-1, j]` with
      `table[0, n_v - 1 - j]`
    - t: (u, v) ↦ (u, v + 2β) identifies `table[i, -1]` with `table[i, 0]`

    Identified nodes must carry the same factor up to `rtol`.

    """

    message = _(
        'Factor table violates the {0} identification at grid node {1}: '
        '{2!r} != {3!r}.')

    def __init__(self, rtol=None):
        """Initialize the validator with the relative tolerance."""
        self.rtol = rtol

    def _check(self, left, right, deck, nodes):
        rtol = self.rtol
        if rtol is None:
            rtol = systolic_settings.DECK_RTOL
        bad = ~np.isclose(left, right, rtol=rtol, atol=0.0)
        if bad.any():
            k = int(np.argmax(bad))
            raise InvalidMetric(
                self.message.format(
                    deck, nodes[k], float(left[k]), float(right[k])))

    def __call__(self, table):
        """Run the validation."""
        table = np.asarray(table, dtype=float)
        n_u, n_v = table.shape
        self._check(
            table[-1, :], table[0, ::-1], 'sigma',
            [(n_u - 1, j) for j in range(n_v)])
        self._check(
            table[:, -1], table[:, 0], 't',
            [(i, n_v - 1) for i in range(n_u)])

    def __repr__(self):
        """Return python representation of instance."""
        return '<{}(rtol={})>'.format(
            self.__class__.__name__, smart_repr(self.rtol))


class FormatVersionValidator(object):
    """Validator for the `format_version` of metric interchange files."""

    message = _(
        'Unsupported format version "{0}"; this reader understands '
        'versions up to {1} with the same major version.')
    invalid_message = _('Format version "{0}" is not a semantic version.')

    def __init__(self, supported=None):
        """Initialize the validator with the supported version."""
        self.supported = supported

    def __call__(self, value):
        """Run the validation."""
        supported = semver.VersionInfo.parse(
            self.supported or systolic_settings.FORMAT_VERSION)
        try:
            version = semver.VersionInfo.parse(str(value))
        except ValueError:
            raise InvalidMetric(self.invalid_message.format(value))
        if version.major != supported.major or version > supported:
            raise InvalidMetric(self.message.format(value, supported))
        return str(version)

    def __repr__(self):
        """Return python representation of instance."""
        return '<{}(supported={})>'.format(
            self.__class__.__name__, smart_repr(self.supported))


def _index(index):
    """Return a numpy index tuple as plain integers."""
    index = tuple(int(i) for i in index)
    return index[0] if len(index) == 1 else index
