"""
Exception hierarchy for the linear position-measurement verifier.
Each family carries the exit code the CLI reports for it.
"""


class LinMeasureError(Exception):
    """Base class for every error raised by this package."""
    exit_code = 1


# Model / configuration problems (exit 2)
class ModelError(LinMeasureError):
    exit_code = 2


class UnitarityViolation(ModelError):
    """|Γ| differs from 1 beyond tolerance."""


class DegenerateModel(ModelError):
    """Position map has zero determinant."""


class Unmeasurable(ModelError):
    """β₁ = 0: the probe readout carries no information on x₀."""


class NonUnitaryResult(ModelError):
    """Integrated Hamiltonian produced a map with |Γ| ≠ 1."""


class PositionMomentumMixing(ModelError):
    """Integrated positions depend on momenta, so the map is not a point transform."""


class ConfigError(ModelError):
    """Run configuration could not be parsed or validated."""


# Relation failure (exit 3)
class RelationViolation(LinMeasureError):
    exit_code = 3


# Numerical oracle failures (exit 4)
class OracleError(LinMeasureError):
    exit_code = 4


class DomainTooSmall(OracleError):
    """Grid does not hold the packet (or its image) to the required tolerance."""


class NegligibleProbability(OracleError):
    """P(X) is below the floor, conditional quantities would be noise."""


class AliasingDetected(OracleError):
    """Momentum density does not decay at the edge of the DFT window."""


class PartitionGap(OracleError):
    """POVM bins are not a contiguous partition."""
