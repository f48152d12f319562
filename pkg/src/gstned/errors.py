"""Exception hierarchy. The CLI maps each class to a stderr category prefix."""


class GstNedError(Exception):
    category = "error"


class ParseError(GstNedError):
    """A malformed input record."""

    category = "parse error"

    def __init__(self, path, line, message):
        self.path = str(path)
        self.line = line
        super().__init__(f"{path}:{line}: {message}")


class IntegrityError(GstNedError):
    category = "integrity error"


class LookupFailure(GstNedError, KeyError):
    category = "lookup error"

    def __str__(self):
        return str(self.args[0]) if self.args else ""


class SolverError(GstNedError, ValueError):
    category = "solver error"


class ConfigError(GstNedError, ValueError):
    category = "config error"


class IndexMissing(GstNedError):
    category = "index error"


class EvaluationError(GstNedError, ValueError):
    category = "evaluation error"
