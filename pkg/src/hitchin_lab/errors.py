"""Exception hierarchy shared by every module."""


class HitchinLabError(Exception):
    """Base class for all toolkit errors."""


# flag algebra
class RankDeficient(HitchinLabError):
    pass


class DimensionOverflow(HitchinLabError):
    pass


class MixedAmbient(HitchinLabError):
    pass


# surface group
class BallTooLarge(HitchinLabError):
    pass


# representations
class NotUnimodular(HitchinLabError):
    pass


class NotLoxodromic(HitchinLabError):
    pass


class ComplexSpectrum(NotLoxodromic):
    pass


class DegenerateGap(NotLoxodromic):
    def __init__(self, message, ratio=None):
        super().__init__(message)
        self.ratio = ratio


# limit curve
class NotHyperbolic(HitchinLabError):
    pass


class NotLoxodromicAt(HitchinLabError):
    def __init__(self, word, cause=None):
        super().__init__(f"word {word} is not purely loxodromic: {cause}")
        self.word = word
        self.cause = cause


class InsufficientSamples(HitchinLabError):
    pass


class DimensionMismatch(HitchinLabError):
    pass


# dynamical certificates
class DegenerateSum(HitchinLabError):
    pass


class DegeneratePairing(HitchinLabError):
    pass


class CrossratioMismatch(HitchinLabError):
    pass


class TooFewWords(HitchinLabError):
    pass


# hill operators
class StepTooLarge(HitchinLabError):
    pass


# cli
class ConfigError(HitchinLabError):
    pass


class MissingScene(HitchinLabError):
    pass
