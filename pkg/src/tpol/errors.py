"""Exception hierarchy shared by every stage of the toolkit."""


class TPolError(Exception):
    """Base class; ``module`` names the stage that raised it."""

    module = "tpol"


class MalformedRecord(TPolError):
    module = "corpus"

    def __init__(self, record_id, reason):
        self.record_id = record_id
        self.reason = reason
        super().__init__(f"record {record_id!r}: {reason}")


class AlignmentViolation(TPolError):
    module = "corpus"

    def __init__(self, record_id, which):
        self.record_id = record_id
        self.which = which
        super().__init__(f"record {record_id!r}: alignment violates {which}")


class IndexOutOfRange(TPolError):
    module = "corpus"

    def __init__(self, record_id, detail=""):
        self.record_id = record_id
        super().__init__(f"record {record_id!r}: bi-symbol index out of range {detail}".rstrip())


class InsufficientData(TPolError):
    module = "corpus"


class MismatchedSentence(TPolError):
    module = "align"


class EmptyCorpus(TPolError):
    module = "ibm"


class NonFiniteLikelihood(TPolError):
    module = "ibm"


class UntrainedModel(TPolError):
    module = "ibm"


class LengthMismatch(TPolError):
    module = "translator"


class SilverWithoutTranslator(TPolError):
    module = "reorderer"


class MissingAlignment(TPolError):
    module = "evaluation"

    def __init__(self, record_id):
        self.record_id = record_id
        super().__init__(f"record {record_id!r} has no gold alignment")


class ConfigError(TPolError):
    module = "cli"


class MissingArtifact(TPolError):
    module = "cli"
