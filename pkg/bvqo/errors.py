from __future__ import annotations


class BvqoError(ValueError):
    """Base class for every error raised by bvqo."""


class InputError(BvqoError):
    pass


class CatalogError(InputError):
    pass


class WorkloadParseError(CatalogError):
    def __init__(self, message: str, *, line: int | None = None, field: str | None = None) -> None:
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field '{field}'")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(f"{prefix}{message}")
        self.line = line
        self.field = field


class ConfigError(InputError):
    pass


class DataError(InputError):
    pass


class GraphError(BvqoError):
    pass


class ShapeMismatchError(BvqoError):
    pass


class PlanError(BvqoError):
    pass


class OracleCapError(BvqoError):
    pass


class DataGenerationError(BvqoError):
    pass


class ExecutionError(BvqoError):
    pass
