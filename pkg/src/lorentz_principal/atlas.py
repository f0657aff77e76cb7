"""Collections of overlapping charts covering a closed surface."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError
from .jets import ChartSpec


@dataclass(frozen=True)
class Atlas:
    """Charts with inverses; a point is handled by the chart where it is deepest."""

    charts: tuple
    name: str = "atlas"

    def __post_init__(self):
        object.__setattr__(self, "charts", tuple(self.charts))
        for ch in self.charts:
            if ch.inverse is None:
                raise ValueError(f"chart {ch.name} has no inverse and cannot join an atlas")

    def __len__(self):
        return len(self.charts)

    def __iter__(self):
        return iter(self.charts)

    @property
    def diameter(self) -> float:
        return max(ch.diameter for ch in self.charts)

    def locate(self, xyz, exclude: Sequence[int] = ()):
        """Return ``(index, (u, v))`` of the chart where ``xyz`` lies deepest."""
        best = None
        for i, ch in enumerate(self.charts):
            if i in exclude:
                continue
            uv = ch.inverse(np.asarray(xyz, dtype=float))
            if uv is None:
                continue
            u, v = float(uv[0]), float(uv[1])
            if not np.isfinite(u) or not np.isfinite(v) or not ch.domain.contains(u, v):
                continue
            d = ch.depth(u, v)
            if best is None or d > best[0]:
                best = (d, i, (u, v))
        if best is None:
            raise DomainError("point is not covered by the atlas")
        return best[1], best[2]


def single_chart_atlas(chart: ChartSpec) -> Atlas:
    return Atlas((chart,), name=chart.name)
