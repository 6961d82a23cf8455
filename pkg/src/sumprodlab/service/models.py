"""Wire models for the run service.

A run request is the JSON form of an :class:`ExperimentConfig` without the
mode (the route carries it).  The ground set comes from exactly one of:

* ``generator`` — a full generator recipe,
* ``seed`` — a random Frostman set at the requested ``m`` and ``s``,
* neither — the stock base-4 construction at the mode's default scale.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Any

from pydantic import BaseModel, ConfigDict, Field

from ..generators import GeneratorSpec
from ..experiments.config import ConfigError, ExperimentConfig, default_generator

__all__ = ["RunRequest", "RunResponse", "DEFAULT_M"]

DEFAULT_M = {
    "difference_product": 16,
    "sum_product": 16,
    "elekes_content": 12,
    "energy_bounds": 10,
    "incidence_ratio": 10,
}


class RunRequest(BaseModel):
    """Parameters accepted by every run endpoint."""

    model_config = ConfigDict(extra="forbid")

    generator: dict[str, Any] | None = None
    m: int | None = Field(default=None, ge=2, le=64)
    s: str | float = "1/2"
    eps: float = 0.02
    seed: int | None = None
    window: int = 1
    eta: float | None = None
    parallelism: int = 1
    c_scale: float = 10.0
    brute_check: bool = False
    rich_threshold_scale: float = 1.0

    def to_config(self, mode: str) -> ExperimentConfig:
        if self.generator is not None and self.seed is not None:
            raise ConfigError("give either a generator recipe or a seed, not both")
        try:
            s = Fraction(self.s)
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"cannot parse s = {self.s!r} as a rational") from exc
        m = self.m if self.m is not None else DEFAULT_M[mode]
        if self.generator is not None:
            try:
                gen = GeneratorSpec.from_dict(self.generator)
            except (KeyError, ValueError) as exc:
                raise ConfigError(f"bad generator recipe: {exc}") from exc
            if self.m is not None and gen.m != self.m:
                raise ConfigError(
                    f"m = {self.m} disagrees with the generator's m = {gen.m}"
                )
        elif self.seed is not None:
            gen = GeneratorSpec(kind="random_frostman", m=m, s=s, seed=self.seed)
        else:
            gen = default_generator(m, s)
        cfg = ExperimentConfig(
            generator=gen,
            mode=mode,
            s=s,
            eps=self.eps,
            window=self.window,
            eta=self.eta,
            parallelism=self.parallelism,
            c_scale=self.c_scale,
            brute_check=self.brute_check,
            rich_threshold_scale=self.rich_threshold_scale,
        )
        return cfg.validate()


class RunResponse(BaseModel):
    """A completed run: the full report plus the headline verdicts.

    ``ledger_csv`` and ``profiles`` carry the CSV artifacts verbatim so a
    client can write the same files the library writes.
    """

    report: dict[str, Any]
    hard_pass: bool
    max_slack: float | None
    flagged: list[str]
    summary: list[str]
    ledger_csv: str
    profiles: dict[str, str]
