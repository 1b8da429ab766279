"""
Exception hierarchy for the dihedralis engines.

Every error an engine operation can raise is a subclass of DihedralisError, so
the CLI can map any engine failure to exit code 2 and print the class name.
"""


class DihedralisError(Exception):
    """Base class for all engine errors."""


# exact-algebra
class InfiniteGroup(DihedralisError):
    pass


class ZeroElement(DihedralisError):
    pass


class ZeroPolynomial(DihedralisError):
    pass


# quadforms
class NotPositiveDefinite(DihedralisError):
    pass


class DiscriminantMismatch(DihedralisError):
    pass


class NonFundamental(DihedralisError):
    pass


class NoSquareRoot(DihedralisError):
    pass


# cm-classfield
class PrecisionExhausted(DihedralisError):
    pass


class DegenerateGenerator(DihedralisError):
    pass


class SubgroupNotUnique(DihedralisError):
    pass


# numfield
class NotIrreducible(DihedralisError):
    pass


class EnlargementDiverged(DihedralisError):
    pass


class NotMaximalAt(DihedralisError):
    def __init__(self, prime):
        super().__init__(f"order is not maximal at {prime}")
        self.prime = prime


class NotMaximal(DihedralisError):
    pass


class RelationSearchStalled(DihedralisError):
    pass


# rayclass
class PContainedInS(DihedralisError):
    pass


class EvenPrime(DihedralisError):
    pass


# reptheory
class CharacterNotLiftable(DihedralisError):
    pass


class NotDiagonalBasis(DihedralisError):
    pass


class ImageEnumerationBudgetExceeded(DihedralisError):
    pass


class NoSeparatingElement(DihedralisError):
    pass


class UnrealizableModule(DihedralisError):
    pass


class NonsplitUnavailable(DihedralisError):
    pass


class NotPGroup(DihedralisError):
    pass


# pipeline
class InvalidTower(DihedralisError):
    pass


class StageError(DihedralisError):
    """An engine error re-raised by the pipeline with the stage that produced it."""

    def __init__(self, stage, cause):
        super().__init__(f"{stage}: {type(cause).__name__}: {cause}")
        self.stage = stage
        self.cause = cause

    @property
    def error_name(self):
        return type(self.cause).__name__
