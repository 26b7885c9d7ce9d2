"""Exception types raised across the diematch package.

Every contract violation gets its own class so callers (and tests) can catch
precisely what they care about instead of string-matching ValueError text.
"""


class DieMatchError(Exception):
    """Base class for all diematch errors."""


# --- point cloud I/O and geometry -----------------------------------------

class MalformedPly(DieMatchError):
    """PLY header/payload mismatch or unsupported layout."""


class MissingNormals(DieMatchError):
    """Normals were required but the file carries no nx/ny/nz properties."""


class EmptyCloud(DieMatchError):
    """Operation needs at least one point."""


class NonPositiveVoxel(DieMatchError):
    """Voxel edge length must be > 0."""


class InvalidRange(DieMatchError):
    """Angle range is ill-ordered (low > high)."""


# --- registration ----------------------------------------------------------

class TooFewMatches(DieMatchError):
    """A rigid fit needs at least 3 correspondences."""


class DegenerateConfiguration(DieMatchError):
    """Correspondence geometry does not pin down a rotation (e.g. collinear)."""


class NoMatchesInRange(DieMatchError):
    """Closest-point matching found nothing under the distance gate."""


class AllRestartsFailed(DieMatchError):
    """Every restart of multi-start ICP errored or fell below the inlier floor."""


class NoMutualMatches(DieMatchError):
    """Descriptor matching kept no symmetric nearest-neighbor pair."""


class NoConsensus(DieMatchError):
    """Robust estimation found no hypothesis with >= 3 inliers."""


class MalformedDescriptorFile(DieMatchError):
    """Descriptor file header/body does not follow the declared layout."""


class DimensionMismatch(DieMatchError):
    """Vector length differs from the declared dimension."""


class IndexOutOfRange(DieMatchError):
    """Sample index does not address a point of the parent cloud."""


class NonFiniteValue(DieMatchError):
    """NaN or infinity where a finite number is required."""


class RegistrationStageError(DieMatchError):
    """Failure inside a named stage of the pair-registration pipeline."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage '{stage}': {cause}")
        self.stage = stage
        self.cause = cause


# --- similarity scoring ----------------------------------------------------

class SingleClassTraining(DieMatchError):
    """Logistic training needs at least one example of each class."""


# --- similarity graph ------------------------------------------------------

class DuplicatePair(DieMatchError):
    """Two scores map to the same canonical pair key."""


class UnknownNode(DieMatchError):
    """Pair references a scan id absent from the graph roster."""


# --- evaluation metrics ----------------------------------------------------

class EmptyDie(DieMatchError):
    """A die with zero pair results cannot be aggregated."""


class ItemSetMismatch(DieMatchError):
    """Predicted and true labelings cover different item sets."""


class LengthMismatch(DieMatchError):
    """Parallel sequences differ in length."""


class DegenerateCloud(DieMatchError):
    """All points coincide with the centroid; error normalization undefined."""
