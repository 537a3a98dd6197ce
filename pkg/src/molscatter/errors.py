"""Exception taxonomy shared across the package.

Errors fall into three groups that the command line maps onto exit codes:
input validation (bad files, bad parameters), numerical failure (poles,
singular solves, lost flux), and oracle disagreement (cross-checks that
exceeded their tolerance).
"""


class MolscatterError(Exception):
    """Base class for all package-specific errors."""


class InputError(MolscatterError):
    """Invalid user input: malformed files, out-of-range parameters."""


class SchemaError(InputError):
    """A JSON document does not match the expected schema."""


class NumericalError(MolscatterError):
    """A computation failed numerically rather than structurally."""


class PoleError(NumericalError):
    """Scattering energy coincides with a resonance denominator.

    Carries the offending state index and the energy gap so callers can
    flag the row instead of aborting a whole sweep.
    """

    def __init__(self, message, state_index=None, gap_eV=None):
        super().__init__(message)
        self.state_index = state_index
        self.gap_eV = gap_eV


class PhaseRefinementError(NumericalError):
    """Energy grid too coarse to track a scattering phase continuously."""


class FluxError(NumericalError):
    """Scattered flux fails to balance the incoming flux."""


class GateError(MolscatterError):
    """A scattering matrix cannot be used as the requested circuit element."""


class OracleError(MolscatterError):
    """An independent cross-check disagreed beyond its tolerance."""


class BoundaryError(OracleError):
    """Wavepacket probability reached the truncated chain ends."""
