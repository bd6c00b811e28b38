"""Optimal conformal systolic constants of the Klein bottle."""

# configures django settings before any rest_framework import
from klein_systolic import settings  # noqa: F401


__version__ = '0.1.0'
