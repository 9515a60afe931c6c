"""Physical constants threaded explicitly through every formula."""
from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class Constants:
    """Action and entropy quanta.

    Defaults are natural units (hbar = kB = 1).  SI values can be injected
    here and every downstream formula picks them up; nothing in the package
    hard-codes either constant.
    """

    hbar: float = 1.0
    kB: float = 1.0

    def __post_init__(self) -> None:
        for name in ("hbar", "kB"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be a finite positive number, got {value!r}")


NATURAL = Constants()
