"""Run configuration shared by the CLI and the experiment scripts."""
from __future__ import annotations

from dataclasses import asdict, dataclass, field


@dataclass(frozen=True)
class RunConfig:
    precision: int = 256  # mantissa bits for every Borel-plane computation
    order: int = 60  # exact series coefficients
    tol: float = 1e-10  # quadrature target

    def __post_init__(self):
        if self.precision < 64:
            raise ValueError("precision must be at least 64 bits")
        if self.order < 1:
            raise ValueError("order must be positive")
        if not self.tol > 0:
            raise ValueError("tol must be positive")

    def to_json(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class PartitionGrid:
    k: int
    lambdas: tuple
    j: int = 0

    @classmethod
    def parse(cls, k: int, text: str, j: int = 0) -> "PartitionGrid":
        """``"a:b:n"`` gives ``n`` evenly spaced points from ``a`` to ``b`` inclusive."""
        try:
            a, b, n = text.split(":")
            a, b, n = float(a), float(b), int(n)
        except ValueError as exc:
            raise ValueError(f"bad grid {text!r}; expected a:b:n") from exc
        if n < 1:
            raise ValueError("grid needs at least one point")
        if n == 1:
            return cls(k, (a,), j)
        return cls(k, tuple(a + (b - a) * i / (n - 1) for i in range(n)), j)


@dataclass(frozen=True)
class StokesConfig:
    radii: tuple = (8, 16, 32)
    spread_limit: float = 1e-3
    extra: dict = field(default_factory=dict)
