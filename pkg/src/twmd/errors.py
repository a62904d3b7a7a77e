"""Exception hierarchy shared across the package.

Every error carries a stable machine-readable ``code`` so the CLI can emit
structured diagnostics on stderr.
"""


class TwmdError(Exception):
    code = "error"


class FormatError(TwmdError):
    """Archive file does not start with the expected magic/version."""

    code = "format"


class CorruptionError(TwmdError):
    """Archive payload is truncated or internally inconsistent."""

    code = "corruption"


class ValidationError(TwmdError):
    """A data-model invariant or operation precondition is violated."""

    code = "validation"


class PairsParseError(TwmdError):
    """Evaluation-pairs TSV could not be parsed."""

    code = "pairs-parse"


class DegenerateVectorError(TwmdError):
    """A word vector with zero norm where a direction is required."""

    code = "degenerate-vector"


class NormalizationError(TwmdError):
    """Self-similarity term is nonpositive, so the normalized score is undefined."""

    code = "normalization"


class NumericalDegeneracyError(TwmdError):
    """Temperature so extreme that the transport kernel is not representable."""

    code = "numerical-degeneracy"


class UndefinedCorrelationError(TwmdError):
    """Correlation requested on data with no variance (or all ties)."""

    code = "undefined-correlation"


class ConfigError(TwmdError):
    """Invalid metric configuration or flag combination."""

    code = "config"
