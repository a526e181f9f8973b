"""Named groups of the E, Z and Q series.

Each series splits into three triangle families by ``n mod 4``; the level
and signature follow from ``n``.
"""
from __future__ import annotations

from dataclasses import dataclass

from .groups import Unrealizable, find_lift_offsets

OFFSET_BOUND = 3

# (series, residues of n mod 4, base, divisor, signature as a function of k)
_ROWS = [
    ("E", (0,), 10, 2, lambda k: (2, 3, k + 6)),
    ("E", (2,), 10, 4, lambda k: (3, 3, k + 3)),
    ("E", (1, 3), 10, 3, lambda k: (2, 4, k + 4)),
    ("Z", (3,), 9, 2, lambda k: (2, 3, 2 * k + 6)),
    ("Z", (1,), 9, 4, lambda k: (3, 3, 2 * k + 3)),
    ("Z", (0, 2), 9, 3, lambda k: (2, 4, 2 * k + 4)),
    ("Q", (2,), 8, 2, lambda k: (2, 3, 3 * k + 6)),
    ("Q", (0,), 8, 4, lambda k: (3, 3, 3 * k + 3)),
    ("Q", (1, 3), 8, 3, lambda k: (2, 4, 3 * k + 4)),
]


@dataclass(frozen=True)
class Preset:
    name: str
    series: str
    n: int
    level: int
    signature: tuple[int, int, int]
    offsets: tuple[int, int, int] | None
    reason: str = ""

    @property
    def realizable(self) -> bool:
        return self.offsets is not None

    def as_row(self) -> dict:
        return {
            "name": self.name,
            "series": self.series,
            "n": self.n,
            "level": self.level,
            "signature": list(self.signature),
            "offsets": list(self.offsets) if self.offsets else None,
            "realizable": self.realizable,
        }


def presets(max_level: int = 3, bound: int = OFFSET_BOUND) -> list[Preset]:
    """The catalogue up to ``max_level``, ordered by series then ``n``."""
    out = []
    for series, residues, base, div, sig_of in _ROWS:
        for k in range(1, max_level + 1):
            n = base + div * k
            if n % 4 not in residues:
                continue
            sig = sig_of(k)
            found = find_lift_offsets(sig, k, bound)
            if isinstance(found, Unrealizable):
                out.append(Preset(f"{series}_{n}", series, n, k, sig, None, found.reason))
            else:
                out.append(Preset(f"{series}_{n}", series, n, k, sig, tuple(found)))
    order = {"E": 0, "Z": 1, "Q": 2}
    return sorted(out, key=lambda p: (order[p.series], p.n))


def preset(name: str, max_level: int = 3) -> Preset:
    """Look up a preset such as ``"E_12"`` (case-insensitive)."""
    key = name.strip().upper().replace("-", "_")
    for p in presets(max_level):
        if p.name == key:
            return p
    raise KeyError(f"unknown preset {name!r}")
