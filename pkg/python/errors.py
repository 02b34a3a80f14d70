"""
Exception hierarchy shared by the solver, the simulators and the CLI.

- DomainError      : an argument is outside the operation's domain
- NumericError     : a numeric kernel failed (quadrature, continued fraction, root bracket)
- ConfigError      : a RunConfig document failed validation (carries field paths)
- ValidationError  : a produced result table broke its schema
"""

from typing import Iterable, List, Tuple


class GameError(Exception):
    """Base class for every error raised by this project."""


class DomainError(GameError, ValueError):
    pass


class NumericError(GameError, RuntimeError):
    pass


class ConfigError(GameError, ValueError):
    """Collects every (field_path, message) problem found in one config document."""

    def __init__(self, problems: Iterable[Tuple[str, str]]):
        self.problems: List[Tuple[str, str]] = list(problems)
        super().__init__("\n".join(f"{path}: {msg}" for path, msg in self.problems))


class ValidationError(GameError):
    pass
