"""Hyperfine level identifiers."""

from dataclasses import dataclass
from enum import Enum
from typing import Tuple


class Manifold(Enum):
    """Fine-structure manifold a hyperfine level belongs to."""
    GROUND = "ground"
    EXCITED = "excited"


# Allowed hyperfine F per manifold for the 85Rb D2 line (I = 5/2)
GROUND_F: Tuple[int, ...] = (3, 2)
EXCITED_F: Tuple[int, ...] = (4, 3, 2, 1)


def _is_half_integer(value: float) -> bool:
    return abs(2 * value - round(2 * value)) < 1e-12


@dataclass(frozen=True)
class LevelId:
    """
    One Zeeman sublevel |F, M> of either manifold.

    F and M are stored as floats but must be (half-)integers.
    """

    manifold: Manifold
    F: float
    M: float

    def __post_init__(self) -> None:
        if not (_is_half_integer(self.F) and _is_half_integer(self.M)):
            raise ValueError(f"F and M must be half-integers, got F={self.F}, M={self.M}")
        if abs(self.M) > self.F + 1e-12:
            raise ValueError(f"|M| must not exceed F, got F={self.F}, M={self.M}")
        if not _is_half_integer(self.F - self.M) or round(2 * (self.F - self.M)) % 2:
            raise ValueError(f"F - M must be an integer, got F={self.F}, M={self.M}")
        allowed = GROUND_F if self.manifold is Manifold.GROUND else EXCITED_F
        if int(round(self.F)) not in allowed:
            raise ValueError(
                f"F={self.F} is not a {self.manifold.value} hyperfine level (allowed {allowed})"
            )

    @classmethod
    def ground(cls, F: float, M: float) -> "LevelId":
        return cls(Manifold.GROUND, float(F), float(M))

    @classmethod
    def excited(cls, F: float, M: float) -> "LevelId":
        return cls(Manifold.EXCITED, float(F), float(M))

    @property
    def is_ground(self) -> bool:
        return self.manifold is Manifold.GROUND

    @property
    def is_excited(self) -> bool:
        return self.manifold is Manifold.EXCITED

    @property
    def label(self) -> str:
        prefix = "g" if self.is_ground else "e"
        return f"{prefix}(F={self.F:g},M={self.M:+g})"

    def __str__(self) -> str:
        return self.label


def ground_levels(F: int = None) -> Tuple[LevelId, ...]:
    """Ground sublevels ordered by F (3 then 2) and ascending M."""
    values = GROUND_F if F is None else (F,)
    return tuple(LevelId.ground(f, m) for f in values for m in range(-f, f + 1))


def excited_levels(F: int = None) -> Tuple[LevelId, ...]:
    """Excited sublevels ordered by F (4, 3, 2, 1) and ascending M."""
    values = EXCITED_F if F is None else (F,)
    return tuple(LevelId.excited(f, m) for f in values for m in range(-f, f + 1))
