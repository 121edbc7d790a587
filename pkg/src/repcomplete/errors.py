"""Exception hierarchy; each family maps to one CLI exit code."""


class ReproError(Exception):
    exit_code = 1


class ConfigError(ReproError):
    """Bad configuration or command-line usage."""

    exit_code = 1


class DataError(ReproError):
    """Input data or pipeline artifacts are missing, malformed or stale."""

    exit_code = 2


class EmptyCorpusError(DataError):
    pass


class StaleArtifactError(DataError):
    pass


class MissingArtifactError(DataError):
    pass


class NumericError(ReproError):
    """Non-finite loss or a failed numerical check."""

    exit_code = 3
