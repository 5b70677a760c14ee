"""Exception hierarchy shared by all refaware modules."""


class RefawareError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(RefawareError):
    pass


# vcs
class NotARepository(RefawareError):
    pass


class UnsupportedBackend(RefawareError):
    pass


class UnknownCommit(RefawareError):
    pass


class UnknownPathAtCommit(RefawareError):
    pass


class LineOutOfRange(RefawareError):
    pass


# diff parsing
class MalformedDiff(RefawareError):
    def __init__(self, message, offset):
        super().__init__(f"{message} (at byte {offset})")
        self.offset = offset


# refactoring reports
class SchemaError(RefawareError):
    def __init__(self, message, path="$"):
        super().__init__(f"{path}: {message}")
        self.path = path


class NoIntersection(RefawareError):
    pass


# categorization
class InconsistentInputs(RefawareError):
    pass


class EmptyCommit(RefawareError):
    pass


# metrics
class MissingStructure(RefawareError):
    pass


class MissingCommitRow(RefawareError):
    pass


class MissingField(RefawareError):
    def __init__(self, field):
        super().__init__(f"missing field {field!r}")
        self.field = field


class NonNumericField(RefawareError):
    def __init__(self, field, value):
        super().__init__(f"field {field!r} is not numeric: {value!r}")
        self.field = field
        self.value = value


# szz
class UnknownFixLine(RefawareError):
    pass


class TraceDepthExceeded(RefawareError):
    pass


class LineOriginUnavailable(RefawareError):
    pass


# predictor
class SingleClassTraining(RefawareError):
    pass


class NonFiniteFeature(RefawareError):
    pass


class ZeroTotalChurn(RefawareError):
    pass
