"""Exception taxonomy for the detection toolkit.

Every error carries an ``exit_code`` so the CLI can map failures onto its
documented process exit codes: 2 configuration, 3 data, 4 stage failure.
"""

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_STAGE = 4


class SleidError(Exception):
    """Base class for all toolkit errors."""

    exit_code = EXIT_STAGE
    code = "stage_failure"


class BadConfig(SleidError):
    exit_code = EXIT_CONFIG
    code = "bad_config"


class ParseError(SleidError):
    """Malformed input data; carries the 1-based line number when known."""

    exit_code = EXIT_DATA
    code = "parse_error"

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ConflictingRecord(SleidError):
    exit_code = EXIT_DATA
    code = "conflicting_record"


class OrderingViolation(SleidError):
    exit_code = EXIT_DATA
    code = "ordering_violation"


class NotFound(SleidError):
    exit_code = EXIT_DATA
    code = "not_found"


class EmptyInput(SleidError):
    exit_code = EXIT_DATA
    code = "empty_input"


class SchemaError(SleidError):
    exit_code = EXIT_DATA
    code = "schema_error"


class TooFewSamples(SleidError):
    exit_code = EXIT_DATA
    code = "too_few_samples"


class TooFewPerClass(SleidError):
    exit_code = EXIT_DATA
    code = "too_few_per_class"


class DegenerateLabels(SleidError):
    exit_code = EXIT_DATA
    code = "degenerate_labels"


class UndefinedMetric(SleidError):
    exit_code = EXIT_DATA
    code = "undefined_metric"


class ExhaustedFrontier(SleidError):
    """Expansion ran out of candidates above the target illicit ratio.

    The partial expansion state is attached so callers can inspect or
    persist what was admitted before the frontier dried up.
    """

    exit_code = EXIT_DATA
    code = "exhausted_frontier"

    def __init__(self, message: str, state=None):
        super().__init__(message)
        self.state = state
