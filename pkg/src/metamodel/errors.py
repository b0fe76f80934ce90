"""Exception types shared across the toolkit."""


class MetamodelError(Exception):
    """Base class for all toolkit errors."""


class MalformedRecord(MetamodelError):
    """A trace line violates the wire schema.  Carries the 1-based line number."""

    def __init__(self, line_number: int, reason: str):
        super().__init__(f"line {line_number}: {reason}")
        self.line_number = line_number
        self.reason = reason


class KindMismatch(MetamodelError):
    """Two fingerprints of different kinds were combined or compared."""


class NameCollision(MetamodelError):
    """A proposed fresh type name already exists in the graph."""


class IncompleteAssignment(MetamodelError):
    """A type split does not cover every inbound function edge."""


class UnmappedNode(MetamodelError):
    """A morphism is not total on the source graph's nodes."""


class UnmappedEdge(MetamodelError):
    """A morphism is not total on the source graph's edges."""


class InvalidConstraint(MetamodelError):
    """A search constraint references nodes absent from either graph."""


class NonterminatingRule(MetamodelError):
    """A rewrite rule does not decrease the length/lexicographic order."""


class DepthExceeded(MetamodelError):
    """Orbit exploration exceeded the configured state cap."""


class RankDeficient(MetamodelError):
    """The regression design matrix is rank-deficient or underdetermined."""


class InvalidSpec(MetamodelError):
    """An agent-model specification violates its invariants."""


class UnknownState(MetamodelError):
    """A transform or rule references a state missing from the spec."""


class StateInUse(MetamodelError):
    """A state cannot be removed while transitions or agents reference it."""


class AlreadyRefactored(MetamodelError):
    """The spec already uses singleton-type state representation."""
