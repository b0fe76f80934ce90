"""Model signatures: named domain and codomain variables."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class ModelSignature:
    """What a model maps from and to, as named variables."""

    domain: tuple[str, ...]
    codomain: tuple[str, ...]
    description: str = ""

    def __post_init__(self):
        object.__setattr__(self, "domain", tuple(self.domain))
        object.__setattr__(self, "codomain", tuple(self.codomain))
        for side, names in (("domain", self.domain), ("codomain", self.codomain)):
            if len(set(names)) != len(names):
                raise ValueError(f"duplicate {side} variable names")
