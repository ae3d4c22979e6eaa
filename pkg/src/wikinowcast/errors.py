"""Exception types shared across the package.

Everything derives from ValueError so callers that just want "bad input"
semantics can catch one base class, while the pipeline can react to the
specific conditions (missing files map to exit code 1, degenerate models
to exit code 2).
"""


class LineFormatError(ValueError):
    """A pagecount log line does not have the expected four-field shape."""


class DataFormatError(ValueError):
    """An input file (incidence CSV, candidate table, sidecar, store) is invalid."""


class MissingInputError(ValueError):
    """A configured input file or directory does not exist."""

    def __init__(self, path, detail=""):
        self.path = str(path)
        msg = f"missing input: {self.path}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class UndefinedCorrelationError(ValueError):
    """Correlation is undefined: too few points or a zero-variance vector."""


class NoUsableCandidatesError(ValueError):
    """Every candidate article was dropped (constant traffic, no overlap, ...)."""


class DegenerateModelError(ValueError):
    """A model could not be evaluated (constant target, undefined fit quality)."""
