"""Exception hierarchy for the arbor package.

Every domain failure raises a named subclass of :class:`ArborError` so that
callers (and the CLI) can map failures to stable error codes. The class name
is the error code.
"""


class ArborError(Exception):
    """Base class for all domain errors raised by arbor."""


# ---------------------------------------------------------------------- #
# Tree structure and validation
# ---------------------------------------------------------------------- #

class TreeInvariantError(ArborError):
    """A rooted-tree invariant does not hold."""


class MalformedTree(TreeInvariantError):
    """Structural defect not covered by a more specific error."""


class CycleDetected(TreeInvariantError):
    """Following parent links revisits a node."""


class MultipleParents(TreeInvariantError):
    """A node is the child of more than one edge."""


class UnreachableNode(TreeInvariantError):
    """A node cannot be reached from the root."""


class TerminalHasChild(TreeInvariantError):
    """A node marked terminal has outgoing edges."""


class FeatureArityMismatch(TreeInvariantError):
    """An edge feature vector does not match the schema arity."""


class NonFiniteFeature(TreeInvariantError):
    """An edge feature is NaN or infinite."""


class NotATerminal(ArborError):
    """A tip-level operation was given a non-terminal node."""


class SameTip(ArborError):
    """An operation on a tip pair was given the same tip twice."""


class EmptyTree(ArborError):
    """The tree has no nodes."""


class RootIsTerminal(ArborError):
    """The root is a terminal node, so there is nothing to binarize."""


# ---------------------------------------------------------------------- #
# Characteristic matrices
# ---------------------------------------------------------------------- #

class FewerThanTwoTips(ArborError):
    """Characteristic encoding needs at least two terminal nodes."""


class NotBinary(ArborError):
    """An internal node does not have exactly two children."""


class DimensionMismatch(ArborError):
    """Weight vector length does not match the matrix row count."""


class InvalidWeights(ArborError):
    """Weights are outside [0, 1] or do not sum to one."""


# ---------------------------------------------------------------------- #
# Morphisms
# ---------------------------------------------------------------------- #

class NonFiniteInput(ArborError):
    """Matrix input contains NaN or infinite entries."""


class ShapeMismatch(ArborError):
    """Matrix shapes are incompatible for the requested operation."""


class ColumnIndexMismatch(ArborError):
    """Characteristic matrices do not share the same column tags."""


class WrongSource(ArborError):
    """A morphism was applied to a matrix from a different source problem."""


class NonComposable(ArborError):
    """Morphism endpoints do not chain (target of one != source of other)."""


# ---------------------------------------------------------------------- #
# Solutions
# ---------------------------------------------------------------------- #

class ZeroSolution(ArborError):
    """The all-zero vector has no morphism reproducing a nonzero target."""


class LengthMismatch(ArborError):
    """Solution vectors have different lengths."""


class BrokenPath(ArborError):
    """Marked edges do not form a root-to-terminal path."""


# ---------------------------------------------------------------------- #
# Metrics
# ---------------------------------------------------------------------- #

class TipSetMismatch(ArborError):
    """Trees do not share the same set of tip labels."""


# ---------------------------------------------------------------------- #
# Problem instances
# ---------------------------------------------------------------------- #

class MazeFormatError(ArborError):
    """The maze text does not conform to the expected format."""


class NonRectangular(MazeFormatError):
    """Maze rows have differing lengths."""


class MissingStart(MazeFormatError):
    """No start cell ('S') in the maze."""


class MissingGoal(MazeFormatError):
    """No goal cell ('G') in the maze."""


class Disconnected(MazeFormatError):
    """Some open cells are unreachable from the start."""


class NotSimplyConnected(MazeFormatError):
    """The open-cell graph contains a loop."""


class InvalidProblem(ArborError):
    """A TreeProblem invariant does not hold."""


class NonPositiveWeight(ArborError):
    """A multiplicative edge weight is <= 0, so its log is undefined."""


class NoGoalTip(ArborError):
    """A maze problem has no goal tip present in the tree."""


# ---------------------------------------------------------------------- #
# Library and transfer
# ---------------------------------------------------------------------- #

class DuplicateId(ArborError):
    """A problem with this id is already stored."""


class StorageFailure(ArborError):
    """The library could not read or write its backing files."""


class InconsistentSolution(ArborError):
    """A stored solution does not match its problem's edge order."""


class UnknownProblemId(ArborError):
    """No stored record with the requested id."""


class NoCorrespondence(ArborError):
    """No topology-preserving tip bijection between the two problems."""
