"""Exception hierarchy.

Every error carries a stable ``code`` (the class name) so the CLI can print a
single machine-parsable line, and an ``exit_code``: 2 for bad input, 3 for a
pipeline stage that could not produce its output.
"""


class VascageError(Exception):
    exit_code = 3

    @property
    def code(self) -> str:
        return type(self).__name__

    def one_line(self) -> str:
        msg = " ".join(str(self).split())
        return f"{self.code}: {msg}" if msg else self.code


class InputError(VascageError):
    exit_code = 2


class PipelineError(VascageError):
    exit_code = 3


# ingest
class MissingMetadata(InputError):
    def __init__(self, field: str):
        super().__init__(field)
        self.field = field


class LoadError(InputError):
    pass


class EmptyManifest(InputError):
    pass


class FewerThan360Beats(PipelineError):
    pass


# beats
class SignalTooShort(PipelineError):
    pass


class TooFewPeaks(PipelineError):
    pass


class NoBeatsFound(PipelineError):
    pass


# pulse
class NoDominantCluster(PipelineError):
    pass


class EmptyGroup(InputError):
    pass


# features
class LandmarksUndetectable(PipelineError):
    pass


class ParseError(InputError):
    def __init__(self, name: str, offset: int, reason: str = "invalid token"):
        super().__init__(f"{reason} at offset {offset} in {name!r}")
        self.name = name
        self.offset = offset


class TooFewIntervals(PipelineError):
    pass


class NoValidSide(PipelineError):
    pass


# ranking
class KTooLarge(InputError):
    pass


# models
class TooFewSamples(InputError):
    pass


class DegenerateTarget(PipelineError):
    pass


class FeatureMismatch(InputError):
    pass


# analytics
class TooFewEligible(InputError):
    pass


# synth / cli
class DurationTooShort(InputError):
    pass


class ConfigError(InputError):
    pass


class MissingSeed(InputError):
    pass
