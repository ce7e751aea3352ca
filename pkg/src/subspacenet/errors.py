"""Exception types shared across the package."""

from __future__ import annotations


class SubspaceNetError(Exception):
    """Base class for every error raised by this package."""


class SingularGramError(SubspaceNetError):
    """Coefficient Gram matrix is numerically rank deficient.

    Raised when a zero-loading projector is requested for coefficients whose
    Gram matrix fails to factor or whose estimated condition number exceeds
    the singularity threshold. Callers may retry with diagonal loading.
    """


class NotSPDError(SubspaceNetError):
    """Matrix handed to the SPD solver is not symmetric positive definite."""


class DisconnectedGraphError(SubspaceNetError):
    """Edge set does not connect all nodes."""


class InvalidNodeIndexError(SubspaceNetError):
    """Node index outside 1..N."""


class NotANeighborError(SubspaceNetError):
    """Queried node is not a member of the given neighborhood."""


class InvalidRankError(SubspaceNetError):
    """Requested subspace rank is outside the feasible range."""


class NeighborhoodTooSmallError(SubspaceNetError):
    """A neighborhood has fewer members than the rank it must support."""


class GenerationFailedError(SubspaceNetError):
    """Random generation did not satisfy its constraints within the retry budget."""


class LengthMismatchError(SubspaceNetError):
    """Traces of different lengths cannot be combined."""


class WindowTooLargeError(SubspaceNetError):
    """Steady-state window longer than the trace it is applied to."""


class DivergenceDetected(SubspaceNetError):
    """An estimate left the finite, bounded region during a run.

    Carries enough context to report which update diverged and where. The
    step functions fill ``node``; the experiment runner adds ``algorithm``,
    ``run_index`` and ``iteration``.
    """

    def __init__(
        self,
        message: str,
        *,
        node: int | None = None,
        algorithm: str | None = None,
        run_index: int | None = None,
        iteration: int | None = None,
    ) -> None:
        super().__init__(message)
        self.node = node
        self.algorithm = algorithm
        self.run_index = run_index
        self.iteration = iteration


class ConfigError(SubspaceNetError):
    """Base class for configuration problems. Carries an optional line anchor."""

    def __init__(self, message: str, *, line: int | None = None, key: str | None = None) -> None:
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
        self.key = key


class ParseError(ConfigError):
    """Malformed configuration or data file text."""


class ValidationError(ConfigError):
    """Configuration value outside its documented range."""


class UnknownKeyError(ConfigError):
    """Configuration key not recognized (strict mode)."""
