class ConfigError(ValueError):
    """Invalid configuration value; ``key`` names the offending setting when known."""

    def __init__(self, message, key=None):
        self.key = key
        super().__init__(f"{key}: {message}" if key else message)


class ShapeError(ValueError):
    pass


class DataError(ValueError):
    """Malformed or out-of-range data. ``line`` is 1-based when it comes from a file."""

    def __init__(self, message, line=None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class StateError(RuntimeError):
    pass


class PolicyError(RuntimeError):
    pass
