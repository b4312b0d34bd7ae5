"""Exception types shared across the pipeline."""


class PipelineError(Exception):
    """Base class for errors the CLI reports as data errors (exit code 2)."""


class DataFormatError(PipelineError):
    """A file or record does not conform to its documented format."""
