"""Global tolerance and seed configuration.

Every tolerance used by the library flows from a single :class:`Config`
record so that CLI output can carry the exact numerical settings it was
produced with.
"""

from __future__ import annotations

import os
from dataclasses import asdict, dataclass, replace

SCHEMA = "corrmate/1"


@dataclass(frozen=True)
class Config:
    epsilon: float = 1e-9  # membership / equality on the sphere
    root_tol: float = 1e-8  # residual bound for polynomial roots
    max_iter: int = 200
    seed: int = 0

    def __post_init__(self):
        if not (self.epsilon > 0 and self.root_tol > 0 and self.max_iter > 0):
            raise ValueError("configuration values must be positive")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")

    def with_env(self) -> "Config":
        """Apply the ``CORRMATE_SEED`` override if present."""
        seed = os.environ.get("CORRMATE_SEED")
        if seed is None:
            return self
        return replace(self, seed=int(seed))

    def to_json(self) -> dict:
        return asdict(self)


DEFAULT = Config()


def resolve(config: Config | None) -> Config:
    return DEFAULT if config is None else config
