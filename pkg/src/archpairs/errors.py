"""Exception types shared across the pipeline.

Every error that names an offending row, line, key, or path does so in the
message so CLI diagnostics stay actionable.
"""


class ArchpairsError(Exception):
    """Base class for all pipeline errors."""


class ParseError(ArchpairsError):
    """Malformed input row/record; message names the row."""


class FormatError(ArchpairsError):
    """File violates one of the documented on-disk formats."""


class ConfigError(ArchpairsError):
    """Invalid configuration value or combination."""


class LinkageError(ArchpairsError):
    """Posts that do not link together (answer/question id mismatch)."""


class CoverageError(ArchpairsError):
    """A required embedding/vector is missing; message names the key."""


class ProtocolError(ArchpairsError):
    """External classifier replied outside the 0/1 wire protocol."""


class TransportError(ArchpairsError):
    """External classifier transport failed after retries."""

    def __init__(self, message: str, attempts: int = 1):
        super().__init__(f"{message} (attempts={attempts})")
        self.attempts = attempts
