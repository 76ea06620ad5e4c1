"""Exception hierarchy shared across the package.

Every error the CLI reports maps to one of these classes so scripted callers
can parse the single-line ``error class=... msg=...`` output.
"""


class StereoWeatherError(Exception):
    """Base class for all package errors."""


class FormatError(StereoWeatherError):
    """A file does not conform to its declared on-disk format."""


class TruncationError(FormatError):
    """A file's payload is shorter or longer than its header promises."""


class ManifestError(StereoWeatherError):
    """A dataset tree is inconsistent (missing files, bad labels)."""


class ConfigurationError(StereoWeatherError):
    """A config document or runtime wiring request is invalid."""


class ContractError(StereoWeatherError):
    """A pluggable component violated its interface contract."""


class BackendError(StereoWeatherError):
    """A generation backend failed or is unavailable."""


class PipelineError(StereoWeatherError):
    """A per-sample generation step failed."""


class TrainingError(StereoWeatherError):
    """Training aborted (non-finite loss or invalid batch)."""


class EvaluationError(StereoWeatherError):
    """Metric computation is undefined for the given inputs."""
