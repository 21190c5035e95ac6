"""Exception hierarchy. Every error carries a machine-readable ``code`` used by the CLI."""


class ThinspaceError(Exception):
    code = "E_INTERNAL"


class InputError(ThinspaceError):
    code = "E_INPUT"


class ParseError(InputError):
    code = "E_PARSE"


class DisconnectedGraph(InputError):
    code = "E_DISCONNECTED"


class NonPositiveEdge(InputError):
    code = "E_EDGE_LENGTH"


class EmptyTarget(ThinspaceError):
    code = "E_EMPTY_TARGET"


class TargetNotInSet(ThinspaceError):
    code = "E_TARGET_NOT_IN_SET"


class BadParameters(ThinspaceError):
    code = "E_BAD_PARAMETERS"


class BudgetExceeded(ThinspaceError):
    code = "E_BUDGET"


class HypothesisNotMet(ThinspaceError):
    code = "E_HYPOTHESIS"


class NotThinEvidence(ThinspaceError):
    code = "E_NOT_THIN_EVIDENCE"


class CircleBranchUnreachable(ThinspaceError):
    code = "E_CIRCLE_UNREACHABLE"


class AnchorsOverlap(ThinspaceError):
    code = "E_ANCHORS_OVERLAP"


class EmptyAnchorNeighborhood(ThinspaceError):
    code = "E_EMPTY_ANCHOR"


class SkeletonMismatch(ThinspaceError):
    code = "E_SKELETON_MISMATCH"


class AmbiguousSide(ThinspaceError):
    code = "E_AMBIGUOUS_SIDE"


class OutOfChart(ThinspaceError):
    code = "E_OUT_OF_CHART"


class BadK(ThinspaceError):
    code = "E_BAD_K"


class UnsupportedBase(ThinspaceError):
    code = "E_UNSUPPORTED_BASE"


class BadExponent(ThinspaceError):
    code = "E_BAD_EXPONENT"
