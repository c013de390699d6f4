"""Exception hierarchy for data, configuration, and evaluation failures."""

from __future__ import annotations


class ClinassertError(Exception):
    """Base class for all toolkit errors."""


class ParseError(ClinassertError):
    """A data or config file failed to parse or validate."""

    def __init__(self, message: str, path=None, line: int | None = None):
        self.path = path
        self.line = line
        prefix = ""
        if path is not None:
            prefix = f"{path}:"
            if line is not None:
                prefix += f"{line}:"
            prefix += " "
        super().__init__(prefix + message)


class PatternError(ClinassertError):
    """A regex pattern in a rule file failed to compile."""

    def __init__(self, message: str, pattern: str, position: int | None = None):
        self.pattern = pattern
        self.position = position
        loc = f" at position {position}" if position is not None else ""
        super().__init__(f"{message}{loc}: {pattern!r}")


class AlignmentError(ClinassertError):
    """A chunk's character span cannot be reconciled with the token stream."""


class ConfigError(ClinassertError):
    """Invalid engine, merger, or pipeline configuration."""


class UnmappedLabelError(ClinassertError):
    """A raw label has no mapping and the policy requires one."""


class EmptyEvalError(ClinassertError):
    """No gold rows fall inside the evaluated class set."""
