"""Deterministic test-set generators: Cantor sets, random Frostman sets, APs.

Every generator lands its output in [1/2, 1] via the affine shift
``x -> (1 + x) / 2`` (dimension quantities are shift-invariant, and the
arithmetic pipelines need slope parameters bounded away from 0).  Generation
is exact integer arithmetic except for the keep/drop coin flips of the random
construction, which come from a counter-based Philox stream so identical
seeds reproduce identical sets on any platform.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Any

import numpy as np

from .grid import GridSet
from .regularity import frostman_constant

__all__ = ["GeneratorSpec", "cantor_set", "random_frostman", "ap_set", "GenerationError"]

_MAX_ATTEMPTS = 64


class GenerationError(RuntimeError):
    """Raised when the rejection sampler exhausts its retry budget."""


def cantor_set(base: int, digits: tuple[int, ...] | set[int], levels: int, m: int) -> GridSet:
    """All points sum d_i * base**-i over digit choices, shifted into [1/2, 1].

    The count is always ``len(digits) ** levels`` (digit expansions with a
    fixed digit set are injective), and quantization is an exact floor:
    cell((1 + x) / 2) = ((base**levels + N) << (m - 1)) // base**levels where
    ``N = x * base**levels`` is an integer.
    """
    digits = tuple(sorted(set(int(d) for d in digits)))
    if base < 2:
        raise ValueError(f"base must be >= 2, got {base}")
    if levels < 0:
        raise ValueError(f"levels must be >= 0, got {levels}")
    if not digits:
        raise ValueError("digit set is empty")
    if digits[0] < 0 or digits[-1] >= base:
        raise ValueError(f"digits must lie in [0, {base - 1}], got {digits}")
    if base**levels > 2**m:
        raise ValueError(
            f"base**levels = {base ** levels} exceeds the grid resolution 2**{m}"
        )
    if m < 1:
        raise ValueError("the shift into [1/2, 1] needs m >= 1")
    den = base**levels
    cells = []
    for combo in product(digits, repeat=levels):
        n = 0
        for d in combo:
            n = n * base + d
        cells.append(((den + n) << (m - 1)) // den)
    return GridSet(m, cells)


def random_frostman(s: float | Fraction, m: int, seed: int) -> GridSet:
    """Fractal-percolation sample with expected branching 2**s per level.

    Starting from the level-1 cell [1/2, 1), each child survives
    independently with probability 2**(s-1).  A sample is accepted once its
    KT constant at exponent s is at most m**2 (checked exactly) and its size
    lies in [2**(s*m) / m**2, m**2 * 2**(s*m)]; otherwise the construction
    retries with a fresh counter stream, and after 64 attempts raises with
    per-attempt diagnostics.
    """
    sf = Fraction(s)
    if not 0 < sf <= 1:
        raise ValueError(f"dimension parameter must lie in (0, 1], got {s}")
    if m < 1:
        raise ValueError(f"scale exponent must be >= 1, got {m}")
    p = 2.0 ** (float(sf) - 1.0)
    lo_size = 2.0 ** (float(sf) * m) / m**2
    hi_size = m**2 * 2.0 ** (float(sf) * m)
    attempts: list[tuple[int, int, float]] = []
    for attempt in range(_MAX_ATTEMPTS):
        gen = np.random.Generator(
            np.random.Philox(key=np.array([seed, attempt], dtype=np.uint64))
        )
        cells = np.array([1], dtype=np.int64)
        for _level in range(1, m):
            children = np.concatenate([cells << 1, (cells << 1) + 1])
            keep = gen.random(children.size) < p
            cells = children[keep]
            if cells.size == 0:
                break
        if cells.size == 0:
            attempts.append((attempt, 0, float("inf")))
            continue
        result = GridSet(m, np.sort(cells).tolist())
        report = frostman_constant(result, sf, kind="kt")
        if lo_size <= len(result) <= hi_size and report.satisfies(m * m):
            return result
        attempts.append((attempt, len(result), report.value))
    lines = ", ".join(f"(try {a}: n={n}, kt={k:.3g})" for a, n, k in attempts[-8:])
    raise GenerationError(
        f"no acceptable sample after {_MAX_ATTEMPTS} attempts "
        f"(s={s}, m={m}, seed={seed}); last attempts: {lines}"
    )


def ap_set(start: int | Fraction, step: int | Fraction, count: int, m: int) -> GridSet:
    """Arithmetic progression of cells; ints are cell indices, fractions points.

    The step must be a whole number of cells so the progression is exact, and
    the final point must stay inside [0, 1].
    """
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    scale = 2**m

    def to_cells(v: int | Fraction, what: str) -> int:
        if isinstance(v, int):
            return v
        q = Fraction(v) * scale
        if q.denominator != 1:
            raise ValueError(f"{what} {v} is not a multiple of delta = 2**-{m}")
        return int(q)

    c0 = to_cells(start, "start")
    dc = to_cells(step, "step")
    if dc < 1:
        raise ValueError(f"step must be at least one cell, got {step}")
    last = c0 + (count - 1) * dc
    if c0 < 0 or last > scale:
        raise ValueError(
            f"progression [{c0}, {last}] in cells leaves the unit interval [0, {scale}]"
        )
    return GridSet(m, range(c0, last + 1, dc))


@dataclass(frozen=True)
class GeneratorSpec:
    """Declarative recipe for a test set, parseable from experiment configs."""

    kind: str  # cantor | random_frostman | ap | union
    m: int
    base: int = 4
    digits: tuple[int, ...] = (0, 2)
    levels: int = 1
    s: Fraction = Fraction(1, 2)
    seed: int = 0
    start: Fraction | int = 0
    step: Fraction | int = 1
    count: int = 1
    parts: tuple["GeneratorSpec", ...] = field(default=())

    def build(self) -> GridSet:
        if self.kind == "cantor":
            return cantor_set(self.base, self.digits, self.levels, self.m)
        if self.kind == "random_frostman":
            return random_frostman(self.s, self.m, self.seed)
        if self.kind == "ap":
            return ap_set(self.start, self.step, self.count, self.m)
        if self.kind == "union":
            if not self.parts:
                raise ValueError("union generator needs at least one part")
            for part in self.parts:
                if part.m != self.m:
                    raise ValueError("union parts must share the scale exponent m")
            out = self.parts[0].build()
            for part in self.parts[1:]:
                out = out.union(part.build())
            return out
        raise ValueError(f"unknown generator kind {self.kind!r}")

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "GeneratorSpec":
        kind = data["kind"]
        m = int(data["m"])
        kw: dict[str, Any] = {}
        if kind == "cantor":
            kw = {
                "base": int(data.get("base", 4)),
                "digits": tuple(int(d) for d in data.get("digits", (0, 2))),
                "levels": int(data.get("levels", 1)),
            }
        elif kind == "random_frostman":
            kw = {"s": Fraction(str(data.get("s", "1/2"))), "seed": int(data.get("seed", 0))}
        elif kind == "ap":
            kw = {
                "start": _rational_or_cells(data.get("start", 0)),
                "step": _rational_or_cells(data.get("step", 1)),
                "count": int(data.get("count", 1)),
            }
        elif kind == "union":
            kw = {"parts": tuple(cls.from_dict(p) for p in data.get("parts", ()))}
        else:
            raise ValueError(f"unknown generator kind {kind!r}")
        return cls(kind=kind, m=m, **kw)

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"kind": self.kind, "m": self.m}
        if self.kind == "cantor":
            out.update(base=self.base, digits=list(self.digits), levels=self.levels)
        elif self.kind == "random_frostman":
            out.update(s=str(self.s), seed=self.seed)
        elif self.kind == "ap":
            out.update(start=_encode_rational(self.start), step=_encode_rational(self.step), count=self.count)
        elif self.kind == "union":
            out.update(parts=[p.to_dict() for p in self.parts])
        return out


def _rational_or_cells(v: Any) -> Fraction | int:
    if isinstance(v, int):
        return v
    return Fraction(str(v))


def _encode_rational(v: Fraction | int) -> str | int:
    return v if isinstance(v, int) else str(v)
