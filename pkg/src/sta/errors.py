"""Exception hierarchy shared by the sta package."""


class StaError(Exception):
    """Base class for every error raised by sta."""


class InvalidArgumentError(StaError, ValueError):
    pass


class InvalidConfigurationError(StaError, ValueError):
    pass


class TrainingDivergedError(StaError, ArithmeticError):
    """A parameter or gradient became NaN/Inf during training."""

    def __init__(self, message, epoch=None, sample=None):
        self.epoch = epoch
        self.sample = sample
        where = []
        if epoch is not None:
            where.append(f"epoch={epoch}")
        if sample is not None:
            where.append(f"sample={sample}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)


class DataError(StaError, ValueError):
    """Malformed or inconsistent input data."""


class UnknownDatasetError(DataError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else "unknown dataset"


class ModelFileError(StaError):
    """Base class for model (de)serialization failures."""


class ModelNotFoundError(ModelFileError, FileNotFoundError):
    pass


class ModelParseError(ModelFileError, ValueError):
    pass


class ModelVersionError(ModelFileError, ValueError):
    pass


class ModelShapeError(ModelFileError, ValueError):
    pass
