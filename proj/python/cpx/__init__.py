"""Clinical credential passporting: protocol core and ecosystem simulator.

The heavy lifting lives in the compiled ``cpx._core`` extension; this package
re-exports its public surface.
"""

from ._core import (
    Simulation,
    commit,
    default_career,
    default_config,
    keygen,
    profiles,
    sign,
    trace_credential,
    verify,
    verify_audit,
)

__all__ = [
    "Simulation",
    "commit",
    "default_career",
    "default_config",
    "keygen",
    "profiles",
    "sign",
    "trace_credential",
    "verify",
    "verify_audit",
]

__version__ = "0.1.0"
