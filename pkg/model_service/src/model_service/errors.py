class ModelServiceError(Exception):
    pass


class MalformedInstanceFileError(ModelServiceError):
    """Instance file is empty, unreadable, or has rows missing required fields."""


class ResourceExhaustionError(ModelServiceError):
    """Training ran out of memory; carries advice on what to shrink."""


class ArtifactMissingError(ModelServiceError):
    """The model artifact directory is absent or incomplete."""


class PortInUseError(ModelServiceError):
    """The requested serving port is already bound."""
