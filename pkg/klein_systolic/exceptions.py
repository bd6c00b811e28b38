"""Exception classes for `klein_systolic`."""

from rest_framework import exceptions
from rest_framework import status


class InvalidMetric(exceptions.ValidationError):
    """A profile or grid that does not define a metric on the Klein bottle."""

    default_code = 'invalid_metric'


class DomainError(exceptions.ValidationError):
    """An argument outside the domain of a formula."""

    default_code = 'domain'


class RegimeError(DomainError):
    """A conformal type on the wrong side of a regime threshold."""

    default_code = 'regime'


class ResolutionError(exceptions.ValidationError):
    """A grid resolution too coarse for the requested computation."""

    default_code = 'resolution'


class QuadratureError(exceptions.ValidationError):
    """A quadrature that did not reach its tolerance."""

    default_code = 'quadrature'


class ClosedFormUnavailable(DomainError):
    """A length with no closed form for the metric kind."""

    default_code = 'closed_form_unavailable'


class SolverError(exceptions.APIException):
    """A root solve that failed on input satisfying its preconditions."""

    status_code = status.HTTP_500_INTERNAL_SERVER_ERROR
    default_code = 'solver_failure'


class InternalError(exceptions.APIException):
    """An internal consistency check that failed."""

    status_code = status.HTTP_500_INTERNAL_SERVER_ERROR
    default_code = 'internal'


def error_message(exc):
    """Return the first error message of `exc` as plain text."""
    detail = getattr(exc, 'detail', None)
    while isinstance(detail, (list, dict)):
        if not detail:
            break
        if isinstance(detail, dict):
            key, detail = next(iter(detail.items()))
            if isinstance(detail, list) and detail:
                detail = '{}: {}'.format(key, detail[0])
        else:
            detail = detail[0]
    if detail is None:
        return str(exc)
    return str(detail)
