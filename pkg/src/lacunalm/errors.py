"""Domain error taxonomy.

The CLI maps these onto exit codes (input errors -> 2, training failure -> 3,
query validation -> 4) and the HTTP service onto status codes, keyed by the
exception class name.
"""


class MarkupError(ValueError):
    """Malformed lacuna markup. Carries file/line context when known."""

    def __init__(self, message, source_file=None, line_no=None):
        super().__init__(message)
        self.source_file = source_file
        self.line_no = line_no

    def __str__(self):
        msg = super().__str__()
        if self.source_file is not None:
            return f"{self.source_file}:{self.line_no}: {msg}"
        return msg


class UnbalancedBrackets(MarkupError):
    pass


class MixedBracketContent(MarkupError):
    pass


class EmptyBrackets(MarkupError):
    pass


class EmptyCorpus(ValueError):
    pass


class EmptySequence(ValueError):
    pass


class IndexOutOfVocab(ValueError):
    pass


class LengthMismatch(ValueError):
    pass


class NoMaskedPositions(ValueError):
    pass


class DivergedLoss(RuntimeError):
    pass


class NoGapPresent(ValueError):
    pass


class ContainsBlankLacuna(ValueError):
    pass


class EmptyTestSet(ValueError):
    pass


class CheckpointError(ValueError):
    pass


class QueryError(ValueError):
    """Base for candidate-ranking validation failures."""


class MixedCandidateLengths(QueryError):
    pass


class NoCandidates(QueryError):
    pass


class DuplicateCandidate(QueryError):
    pass


class UnknownCharacter(QueryError):
    pass


class MultipleGaps(QueryError):
    pass
