"""Exception hierarchy shared by every module of the package."""


class DumbbellError(Exception):
    """Base class for all errors raised by this package."""


# geometry
class NonPositiveProfile(DumbbellError):
    pass


class OutOfDomain(DumbbellError):
    pass


class InvalidEpsilon(OutOfDomain):
    pass


class InvalidParameters(DumbbellError):
    pass


# meshgen
class UnsupportedProfile(DumbbellError):
    pass


class EmptyChannelResolution(DumbbellError):
    pass


class MeshError(DumbbellError):
    pass


# femcore
class IncompatibleMesh(DumbbellError):
    pass


class SingularElement(DumbbellError):
    pass


class NoTaggedNodes(DumbbellError):
    pass


class NonPositiveWeight(DumbbellError):
    pass


class StationMismatch(DumbbellError):
    pass


# eigensolve
class FactorizationFailed(DumbbellError):
    pass


class NoConvergence(DumbbellError):
    pass


class DimensionMismatch(DumbbellError):
    pass


class TooLarge(DumbbellError):
    pass


# spectra
class UnsortedInput(DumbbellError):
    pass


class InsufficientEigenpairs(DumbbellError):
    pass


class MissingTags(DumbbellError):
    pass


class NonOrthonormalBasis(DumbbellError):
    pass


# cli
class ConfigError(DumbbellError):
    pass
