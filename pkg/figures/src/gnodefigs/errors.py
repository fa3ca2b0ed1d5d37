class SpecError(ValueError):
    """Figure spec file is malformed or references missing inputs."""

    def __init__(self, message: str, path: str = ""):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


class SchemaError(ValueError):
    """An input file does not match its documented schema."""

    def __init__(self, message: str, filename: str = "", column: str = ""):
        prefix = f"{filename}: " if filename else ""
        super().__init__(f"{prefix}{message}")
        self.filename = filename
        self.column = column
