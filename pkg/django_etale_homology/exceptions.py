from django.db import models
from django.utils.translation import gettext_lazy as _


class ExitCodes(models.IntegerChoices):
    SUCCESS = 0, _("Success")
    VALIDATION = 65, _("Validation error")
    DOCUMENT = 66, _("Document error")
    UNDECIDED = 75, _("Undecided")
    NOT_FOUND = 76, _("Not found")
    CLASSES_DIFFER = 77, _("Classes differ")
    UNSTABILIZED = 78, _("Unstabilized")
    SUITE_FAILED = 79, _("Suite failed")
    CRASHED = 99, _("Crashed")


class EtaleHomologyError(Exception):
    """Base class of all errors raised by the computations"""

    exit_code = ExitCodes.VALIDATION


class DimensionMismatch(EtaleHomologyError):
    pass


class InfeasibleBounds(EtaleHomologyError):
    pass


class DomainViolation(EtaleHomologyError):
    pass


class Unstabilized(EtaleHomologyError):
    """No window of isomorphic connecting maps within the computed levels"""

    exit_code = ExitCodes.UNSTABILIZED

    def __init__(self, message, levels=0):
        super().__init__(message)
        self.levels = levels


class UnknownClass(EtaleHomologyError):
    def __init__(self, class_id):
        super().__init__(f"Unknown class '{class_id}'")
        self.class_id = class_id


class CountViolation(EtaleHomologyError):
    def __init__(self, class_id, message=""):
        super().__init__(message or f"Counting precondition fails in class '{class_id}'")
        self.class_id = class_id


class NotFull(EtaleHomologyError):
    def __init__(self, class_id):
        super().__init__(f"Class '{class_id}' misses the clopen set")
        self.class_id = class_id


class OverlapError(EtaleHomologyError):
    pass


class NegativeHeight(EtaleHomologyError):
    pass


class InadmissibleWord(EtaleHomologyError):
    pass


class InvalidTableau(EtaleHomologyError):
    def __init__(self, message, kind=None, word=None):
        super().__init__(message)
        self.kind = kind
        self.word = word


class ExceedsBudget(EtaleHomologyError):
    exit_code = ExitCodes.UNDECIDED


class NotFound(EtaleHomologyError):
    exit_code = ExitCodes.NOT_FOUND


class Undecided(EtaleHomologyError):
    exit_code = ExitCodes.UNDECIDED


class ClassesDiffer(EtaleHomologyError):
    exit_code = ExitCodes.CLASSES_DIFFER

    def __init__(self, level):
        super().__init__(f"The classes differ (certified at level {level})")
        self.level = level


class PreconditionUncertified(EtaleHomologyError):
    exit_code = ExitCodes.UNDECIDED


class NeedsRefinement(EtaleHomologyError):
    pass


class EmptyMarkerSet(EtaleHomologyError):
    pass


class DocumentError(EtaleHomologyError):
    """A document could not be parsed; cites the path and the location inside it"""

    exit_code = ExitCodes.DOCUMENT

    def __init__(self, path, location, message):
        super().__init__(f"{path}: {location}: {message}")
        self.path = path
        self.location = location
