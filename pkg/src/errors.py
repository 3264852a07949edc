"""
Errors Module
Part of FD Tracer

Exception hierarchy shared by the solver, the trace toolchain and the
command line. Library code raises these; only main.py turns them into
exit codes.
"""

from typing import Optional


class FDTracerError(Exception):
    """Base class for every error raised by FD Tracer."""


class ConfigError(FDTracerError):
    """Invalid value in config.ini or on the command line."""


class DomainError(FDTracerError):
    """Invalid domain operation (e.g. classifying an impossible update)."""


class ConstraintError(FDTracerError):
    """Invalid constraint form or operator applied to a foreign variable."""


class EngineError(FDTracerError):
    """Control rule used out of its precondition (tell with A nonempty, told on empty stack)."""


class OracleLimitError(FDTracerError):
    """The brute-force search space exceeds the configured guard."""


class TraceFormatError(FDTracerError):
    """
    Malformed trace record or ill-formed trace stream.

    Args:
        message: Description of the problem
        line_no: 1-based line number in the trace file, when known
    """

    def __init__(self, message: str, line_no: Optional[int] = None):
        self.line_no = line_no
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)


class ModelSyntaxError(FDTracerError):
    """
    Error in a model source file.

    Args:
        message: Description of the problem
        line: 1-based line of the offending token
        column: 1-based column of the offending token
    """

    def __init__(self, message: str, line: int, column: int):
        self.line = line
        self.column = column
        super().__init__(f"{line}:{column}: {message}")
