"""Exception hierarchy shared across the package.

Usage errors (bad CLI invocations) are raised by the CLI layer itself;
everything here maps to runtime failures (exit code 2 at the CLI).
"""


class EvalSynthError(Exception):
    """Base class for all runtime errors raised by this package."""


# -- corpus ---------------------------------------------------------------

class CorpusError(EvalSynthError):
    pass


class EmptyCorpus(CorpusError):
    pass


class MalformedRow(CorpusError):
    def __init__(self, row: int, message: str):
        self.row = row
        super().__init__(f"row {row}: {message}")


class DuplicateResponseId(CorpusError):
    def __init__(self, response_id: str, row: int):
        self.response_id = response_id
        self.row = row
        super().__init__(f"row {row}: duplicate response_id {response_id!r}")


# -- budget ---------------------------------------------------------------

class BudgetError(EvalSynthError):
    pass


class InputTooLarge(BudgetError):
    pass


# -- backend --------------------------------------------------------------

class BackendError(EvalSynthError):
    pass


class PromptTooLarge(BackendError):
    pass


class TransportFailure(BackendError):
    pass


class FixtureMiss(BackendError):
    pass


class DuplicateEntry(BackendError):
    pass


class MalformedScriptLine(BackendError):
    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"line {line}: {message}")


# -- pipeline -------------------------------------------------------------

class PipelineError(EvalSynthError):
    pass


class MissingBinding(PipelineError):
    def __init__(self, placeholder: str):
        self.placeholder = placeholder
        super().__init__(f"no binding for placeholder {{{placeholder}}}")


class ExtraBinding(PipelineError):
    def __init__(self, placeholder: str):
        self.placeholder = placeholder
        super().__init__(f"binding {placeholder!r} not present in template")


class EmptySummary(PipelineError):
    pass


class EmptyFeedback(PipelineError):
    pass


class CourseFailed(PipelineError):
    """Wraps any per-course failure with the course id attached."""

    def __init__(self, course_id: str, cause: Exception):
        self.course_id = course_id
        self.cause = cause
        super().__init__(f"course {course_id}: {cause}")


# -- ratings --------------------------------------------------------------

class RatingError(EvalSynthError):
    pass


class InvalidScore(RatingError):
    pass


class UnknownReport(RatingError):
    pass


class InsufficientRaters(RatingError):
    pass


# -- config / runs --------------------------------------------------------

class ConfigError(EvalSynthError):
    pass


class RunNotFound(EvalSynthError):
    pass
