"""Range-based binning of tap intensity.

Continuous jerk magnitudes are mapped onto a small number of levels so
the band can transmit one byte instead of a float, and so the server can
pick a sound amplitude per level. Bins are equal-width between the
detection threshold and a configured maximum.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass

import numpy as np

from .errors import InvalidConfigError

DEFAULT_NUM_LEVELS = 4
DEFAULT_MAX_INTENSITY_G = 2.5


@dataclass(frozen=True)
class Binning:
    edges: tuple[float, ...]  # ascending, length num_levels - 1
    num_levels: int

    def __post_init__(self):
        if self.num_levels < 2:
            raise InvalidConfigError(f"need at least 2 levels, got {self.num_levels}")
        if len(self.edges) != self.num_levels - 1:
            raise InvalidConfigError(
                f"{self.num_levels} levels require {self.num_levels - 1} edges, got {len(self.edges)}"
            )
        if any(e <= 0 for e in self.edges):
            raise InvalidConfigError(f"edges must be positive: {self.edges}")
        if any(b <= a for a, b in zip(self.edges, self.edges[1:])):
            raise InvalidConfigError(f"edges not strictly ascending: {self.edges}")


def make_binning(
    threshold: float,
    max_intensity: float = DEFAULT_MAX_INTENSITY_G,
    num_levels: int = DEFAULT_NUM_LEVELS,
) -> Binning:
    """Equally spaced interior edges over [|threshold|, max_intensity]."""
    floor = abs(threshold)
    if floor >= max_intensity:
        raise InvalidConfigError(
            f"max intensity {max_intensity} must exceed detection floor {floor}"
        )
    interior = np.linspace(floor, max_intensity, num_levels + 1)[1:-1]
    return Binning(edges=tuple(float(e) for e in interior), num_levels=num_levels)


def discretize(intensity: float, binning: Binning) -> int:
    """Level = 1 + number of edges at or below the intensity, clamped to range."""
    level = 1 + bisect.bisect_right(binning.edges, intensity)
    return min(max(level, 1), binning.num_levels)


def level_midpoint(level: int, binning: Binning, floor: float, ceiling: float) -> float:
    """Representative intensity for a level (midpoint of its bin)."""
    bounds = [floor, *binning.edges, ceiling]
    return 0.5 * (bounds[level - 1] + bounds[level])
