"""Exception types shared across the toolkit.

Every error carries enough context to be rendered as a small JSON object by
the command line front end (see ``cslex.cli``).
"""


class CslexError(Exception):
    """Base class; ``payload`` is what the CLI writes to stderr."""

    def __init__(self, message, **payload):
        super().__init__(message)
        self.payload = payload

    def to_json(self):
        return {"error": type(self).__name__, "message": str(self), **self.payload}


class MalformedLine(CslexError):
    def __init__(self, line_no, line=""):
        super().__init__(f"malformed lexicon line {line_no}: {line!r}", line_no=line_no)
        self.line_no = line_no


class UnknownPhoneme(CslexError):
    def __init__(self, symbol, line_no=None):
        super().__init__(f"unknown phoneme {symbol!r} (line {line_no})", symbol=symbol, line_no=line_no)
        self.symbol = symbol
        self.line_no = line_no


class InvalidDistribution(CslexError):
    pass


class UnknownSegment(CslexError):
    pass


class NoSegments(CslexError):
    def __init__(self, word):
        super().__init__(f"word {word!r} has no segments", word=word)
        self.word = word


class WordNotInUtterance(CslexError):
    def __init__(self, word, utterance_id):
        super().__init__(f"{word!r} does not occur in utterance {utterance_id!r}",
                         word=word, utterance_id=utterance_id)


class EmptyCandidates(CslexError):
    pass


class EmptyInput(CslexError):
    pass


class ShapeMismatch(CslexError):
    pass


class EmptyLexicon(CslexError):
    pass


class NonFiniteLoss(CslexError):
    pass


class UnknownGrapheme(CslexError):
    def __init__(self, symbol):
        super().__init__(f"grapheme {symbol!r} not in vocabulary", symbol=symbol)
        self.symbol = symbol


class EmptySufficientSet(CslexError):
    pass


class InvalidThreshold(CslexError):
    pass


class MixedScriptToken(CslexError):
    def __init__(self, token):
        super().__init__(f"token {token!r} mixes scripts", token=token)
        self.token = token


class EmptyReference(CslexError):
    pass


class InvalidCounts(CslexError):
    pass


class LineCountMismatch(CslexError):
    def __init__(self, n_ref, n_hyp):
        super().__init__(f"reference has {n_ref} lines, hypothesis has {n_hyp}", n_ref=n_ref, n_hyp=n_hyp)
