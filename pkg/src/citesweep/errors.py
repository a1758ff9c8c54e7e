"""Exception types shared across the toolkit."""


class CitesweepError(Exception):
    """Base class for all toolkit errors."""


class EmptyNetwork(CitesweepError):
    """No documents were retained, or every retained document is isolated."""


class DegenerateInput(CitesweepError):
    """Input carries no usable variation (e.g. all features constant)."""


class InvalidPartition(CitesweepError):
    """A partition does not cover the graph it is paired with."""


class EmptyIntersection(CitesweepError):
    """Two partitions share no nodes, so they cannot be compared."""


class GenerationFailure(CitesweepError):
    """Synthetic graph generation exhausted its retry budget."""


class ConfigError(CitesweepError):
    """Experiment configuration is missing, unparsable, or inconsistent."""


class SchemaError(CitesweepError):
    """An input file does not match its documented schema."""
