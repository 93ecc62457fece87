"""Error taxonomy shared across modules.

ConfigError maps to CLI exit code 2, DataError (and subclasses) to 3.
"""


class ConfigError(Exception):
    """Invalid or inconsistent experiment configuration."""


class DataError(Exception):
    """Problem with an input dataset or batch file."""


class DataFileMissing(DataError):
    pass


class LabelColumnMissing(DataError):
    pass


class SingleClassData(DataError):
    pass


class DatasetFormatError(DataError):
    pass
