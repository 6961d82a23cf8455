"""Run configuration shared by every experiment mode.

A configuration pins the generated ground set (via a GeneratorSpec), the
scale ``m``, the nominal dimension ``s``, the uniformity budget ``eps`` and
the derived knobs (``eta`` for the final sum-product display, the scale
range constant ``c_scale`` for the multiplicative exponent upsilon, the
neighborhood window).  Theorem-mode runs enforce the hypotheses of the
statements they exercise: ``0 < s <= 1/2`` and ``eps <= s/10``.

``parallelism`` is recorded for provenance; the pipelines themselves are
deterministic single-process code, so the field documents intent (how many
independent runs the caller schedules side by side) rather than switching
any behaviour here.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Any

from ..generators import GeneratorSpec

__all__ = [
    "MODES",
    "ConfigError",
    "HypothesisError",
    "ExperimentConfig",
    "default_generator",
]

MODES = (
    "difference_product",
    "sum_product",
    "elekes_content",
    "energy_bounds",
    "incidence_ratio",
)

THEOREM_MODES = ("difference_product", "sum_product")


class ConfigError(ValueError):
    """The configuration violates a structural requirement."""


class HypothesisError(RuntimeError):
    """The generated set fails a theorem hypothesis; carries the measured value."""

    def __init__(self, message: str, measured: float | None = None):
        super().__init__(message)
        self.measured = measured


def default_generator(m: int, s: Fraction | float = Fraction(1, 2)) -> GeneratorSpec:
    """Base-4 Cantor construction at nominal dimension 1/2, filling scale m."""
    if Fraction(s) != Fraction(1, 2):
        raise ConfigError(f"the stock generator is pinned to s = 1/2, got s = {s}")
    if m < 2 or m % 2:
        raise ConfigError(f"the stock base-4 construction needs even m >= 2, got {m}")
    return GeneratorSpec(kind="cantor", m=m, base=4, digits=(0, 2), levels=m // 2)


@dataclass(frozen=True)
class ExperimentConfig:
    generator: GeneratorSpec
    mode: str
    s: Fraction = Fraction(1, 2)
    eps: float = 0.02
    window: int = 1
    eta: float | None = None
    out: str | None = None
    parallelism: int = 1
    c_scale: float = 10.0
    brute_check: bool = False
    # Scales the richness thresholds in the pipelines.  At the default 1.0 the
    # averaging arguments guarantee the rich sets are nonempty; values > 1
    # deliberately over-demand so the degraded fallback paths can be exercised.
    rich_threshold_scale: float = 1.0

    @property
    def m(self) -> int:
        return self.generator.m

    @property
    def delta(self) -> Fraction:
        return Fraction(1, 2**self.m)

    def eta_value(self) -> float:
        return self.eta if self.eta is not None else self.eps / float(self.s)

    def validate(self) -> "ExperimentConfig":
        if self.mode not in MODES:
            raise ConfigError(f"unknown mode {self.mode!r}; expected one of {MODES}")
        if self.m < 4:
            raise ConfigError(f"scale exponent must be >= 4, got m = {self.m}")
        if self.m > 24:
            raise ConfigError(
                f"scale exponent must be <= 24 (exact product op range), got m = {self.m}"
            )
        if not 0 < self.s <= 1:
            raise ConfigError(f"nominal dimension must lie in (0, 1], got {self.s}")
        if not 0 < self.eps <= 1:
            raise ConfigError(f"eps must lie in (0, 1], got {self.eps}")
        if self.mode in THEOREM_MODES:
            if self.s > Fraction(1, 2):
                raise ConfigError(
                    f"theorem-mode runs require 0 < s <= 1/2, got s = {self.s}"
                )
            if self.eps > float(self.s) / 10:
                raise ConfigError(
                    f"theorem-mode runs require eps <= s/10 = {float(self.s) / 10}, "
                    f"got eps = {self.eps}"
                )
            if self.window != 1:
                raise ConfigError(
                    "the pipeline chains fix their explicit constants at window = 1; "
                    f"got window = {self.window}"
                )
        if self.window < 0:
            raise ConfigError(f"window must be >= 0, got {self.window}")
        if self.eta is not None and self.eta <= 0:
            raise ConfigError(f"eta must be positive, got {self.eta}")
        if self.parallelism < 1:
            raise ConfigError(f"parallelism must be >= 1, got {self.parallelism}")
        if self.c_scale <= 0:
            raise ConfigError(f"c_scale must be positive, got {self.c_scale}")
        if self.rich_threshold_scale <= 0:
            raise ConfigError(
                f"rich_threshold_scale must be positive, got {self.rich_threshold_scale}"
            )
        return self

    def with_seed(self, seed: int) -> "ExperimentConfig":
        """Swap the generator for a random Frostman construction at this seed."""
        gen = GeneratorSpec(kind="random_frostman", m=self.m, s=self.s, seed=seed)
        return replace(self, generator=gen)

    # -- wire format -----------------------------------------------------------

    def to_dict(self) -> dict[str, Any]:
        return {
            "generator": self.generator.to_dict(),
            "mode": self.mode,
            "s": str(self.s),
            "eps": self.eps,
            "window": self.window,
            "eta": self.eta,
            "out": self.out,
            "parallelism": self.parallelism,
            "c_scale": self.c_scale,
            "brute_check": self.brute_check,
            "rich_threshold_scale": self.rich_threshold_scale,
        }

    @classmethod
    def from_dict(cls, obj: dict[str, Any]) -> "ExperimentConfig":
        try:
            gen_obj = obj["generator"]
            mode = obj["mode"]
        except KeyError as exc:
            raise ConfigError(f"config is missing required key {exc.args[0]!r}") from exc
        generator = GeneratorSpec.from_dict(gen_obj)
        claimed_m = obj.get("m")
        if claimed_m is not None and int(claimed_m) != generator.m:
            raise ConfigError(
                f"config m = {claimed_m} disagrees with generator m = {generator.m}"
            )
        cfg = cls(
            generator=generator,
            mode=mode,
            s=Fraction(obj.get("s", "1/2")),
            eps=float(obj.get("eps", 0.02)),
            window=int(obj.get("window", 1)),
            eta=None if obj.get("eta") is None else float(obj["eta"]),
            out=obj.get("out"),
            parallelism=int(obj.get("parallelism", 1)),
            c_scale=float(obj.get("c_scale", 10.0)),
            brute_check=bool(obj.get("brute_check", False)),
            rich_threshold_scale=float(obj.get("rich_threshold_scale", 1.0)),
        )
        return cfg.validate()
