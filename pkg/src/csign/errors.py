"""Exception types shared across the package.

The CLI maps these onto distinct exit codes, so keep the hierarchy flat:
config problems, physics-parameter problems, and numerical-diagnostic
failures are different audiences (user config, user physics, integrator).
"""


class CsignError(Exception):
    """Base class for all package errors."""


class ConfigError(CsignError):
    """Malformed or unknown configuration input (CLI exit code 2)."""


class PhysicsValidationError(CsignError):
    """Parameter or state violates a physics-model invariant (CLI exit code 3)."""


class DiagnosticError(CsignError):
    """Numerical diagnostics out of bounds, e.g. trace drift (CLI exit code 4)."""
