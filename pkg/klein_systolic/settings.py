"""
Settings for `klein_systolic`.

Settings are read from the `KLEIN_SYSTOLIC` dict of the Django settings,
for example

```
KLEIN_SYSTOLIC = {
    'TOL_GRID': 0.02,
    'THREADS': 4,
}
```

Any setting not given falls back to the defaults below.  When the package
is used outside of a Django project a minimal settings object is configured
on import, so DRF serializers and validation errors work from scripts and
the command line.

"""

import os

import django

from django.conf import settings

from rest_framework.settings import APISettings


DEFAULTS = {
    # worker threads for sweeps and pushforward evaluation; `None` reads
    # `KLEIN_SYSTOLIC_THREADS` and then the CPU count
    'THREADS': None,

    # root finding
    'ROOT_XTOL': 1e-15,
    'ROOT_MAXITER': 200,
    'SINGULARITY_GUARD': 1e-9,
    'MONOTONICITY_SAMPLES': 512,

    # quadrature
    'PROFILE_QUADRATURE_TOL': 1e-12,
    'GAUSS_LEGENDRE_NODES': 64,
    'THETA_NODES': 32,

    # grids
    'GRID_MIN_RESOLUTION': 8,
    'GRAPH_MIN_RESOLUTION': 64,
    # lattice used when a profile length has no closed form
    'GRAPH_DEFAULT_RESOLUTION': 129,
    'DECK_RTOL': 1e-9,

    # certificates and sweeps
    'TOL_PUSH': 1e-3,
    'TOL_MASS': 1e-10,
    'TOL_GRID': 0.03,
    'TOL_EQUALITY': 0.03,

    # metric interchange files
    'FORMAT_VERSION': '1.0.0',
}

THREADS_ENVIRONMENT_VARIABLE = 'KLEIN_SYSTOLIC_THREADS'


def configure():
    """Configure a minimal Django settings object if none is configured."""
    if not settings.configured:
        settings.configure(
            USE_I18N=False,
            USE_TZ=True,
            KLEIN_SYSTOLIC={},
        )
        django.setup()


class SystolicSettings(APISettings):
    """`APISettings` reading the `KLEIN_SYSTOLIC` Django setting."""

    @property
    def user_settings(self):
        """Return the user overrides of the defaults."""
        if not hasattr(self, '_user_settings'):
            self._user_settings = getattr(settings, 'KLEIN_SYSTOLIC', {})
        return self._user_settings


configure()

systolic_settings = SystolicSettings(None, DEFAULTS)


def worker_count():
    """Return the number of worker threads to use."""
    threads = systolic_settings.THREADS
    if threads is None:
        threads = os.environ.get(THREADS_ENVIRONMENT_VARIABLE) or None
    if threads is None:
        return os.cpu_count() or 1
    return max(1, int(threads))
