"""Non-autonomous systems of piecewise-linear maps on a compact interval.

All map data is held as :class:`fractions.Fraction`, so images and
preimages of intervals are exact.  Evaluation accepts either exact rationals
(exact result) or floats (ordinary float arithmetic).  Time steps are
1-based.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from numbers import Rational
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import InputError, OutOfDomain

EXTENSIONS = ("periodic", "constant_tail")


def to_fraction(v) -> Fraction:
    """Exact rational from an int, a decimal/fraction string or a float.

    Floats go through their shortest decimal repr, so ``2.4`` becomes ``12/5``.
    """
    if isinstance(v, Fraction):
        return v
    if isinstance(v, bool):
        raise InputError(f"not a number: {v!r}")
    if isinstance(v, (int, np.integer, Rational)):
        return Fraction(int(v)) if isinstance(v, (int, np.integer)) else Fraction(v)
    if isinstance(v, (float, np.floating)):
        if not np.isfinite(v):
            raise InputError(f"not a finite number: {v!r}")
        return Fraction(repr(float(v)))
    if isinstance(v, str):
        try:
            return Fraction(v.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise InputError(f"not a number: {v!r}") from exc
    raise InputError(f"not a number: {v!r}")


@dataclass(frozen=True, order=True)
class Interval:
    """Closed interval ``[lo, hi]`` with exact endpoints."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        object.__setattr__(self, "lo", to_fraction(self.lo))
        object.__setattr__(self, "hi", to_fraction(self.hi))
        if self.lo > self.hi:
            raise InputError(f"empty interval [{self.lo}, {self.hi}]")

    @property
    def length(self) -> Fraction:
        return self.hi - self.lo

    @property
    def midpoint(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def __contains__(self, x) -> bool:
        return self.lo <= x <= self.hi

    def contains_interval(self, other: "Interval") -> bool:
        return self.lo <= other.lo and other.hi <= self.hi

    def intersect(self, other: "Interval") -> "Interval | None":
        lo, hi = max(self.lo, other.lo), min(self.hi, other.hi)
        return Interval(lo, hi) if lo <= hi else None

    def distance(self, other: "Interval") -> Fraction:
        return max(Fraction(0), other.lo - self.hi, self.lo - other.hi)

    def as_floats(self) -> tuple[float, float]:
        return float(self.lo), float(self.hi)

    def __repr__(self) -> str:
        return f"[{self.lo}, {self.hi}]"


def merge_intervals(items: Iterable[Interval]) -> list[Interval]:
    """Union of closed intervals as sorted maximal disjoint intervals."""
    out: list[Interval] = []
    for iv in sorted(items):
        if out and iv.lo <= out[-1].hi:
            if iv.hi > out[-1].hi:
                out[-1] = Interval(out[-1].lo, iv.hi)
        else:
            out.append(iv)
    return out


def hull(items: Sequence[Interval]) -> Interval:
    return Interval(min(iv.lo for iv in items), max(iv.hi for iv in items))


@dataclass(frozen=True)
class PiecewiseLinearMap:
    """Continuous map given by its values at breakpoints, linear in between."""

    breakpoints: tuple[Fraction, ...]
    values: tuple[Fraction, ...]

    def __post_init__(self):
        bp = tuple(to_fraction(x) for x in self.breakpoints)
        vals = tuple(to_fraction(y) for y in self.values)
        if len(bp) < 2 or len(bp) != len(vals):
            raise InputError("need at least two breakpoints and one value per breakpoint")
        if any(b >= c for b, c in zip(bp, bp[1:])):
            raise InputError("breakpoints must be strictly increasing")
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "values", vals)

    @property
    def domain(self) -> Interval:
        return Interval(self.breakpoints[0], self.breakpoints[-1])

    @cached_property
    def float_breakpoints(self) -> np.ndarray:
        return np.array([float(b) for b in self.breakpoints])

    @cached_property
    def float_values(self) -> np.ndarray:
        return np.array([float(v) for v in self.values])

    @cached_property
    def slopes(self) -> tuple[Fraction, ...]:
        bp, v = self.breakpoints, self.values
        return tuple((v[k + 1] - v[k]) / (bp[k + 1] - bp[k]) for k in range(len(bp) - 1))

    def pieces(self):
        """Yield ``(x0, x1, y0, y1)`` for each linear piece."""
        bp, v = self.breakpoints, self.values
        for k in range(len(bp) - 1):
            yield bp[k], bp[k + 1], v[k], v[k + 1]

    def __call__(self, x):
        if isinstance(x, (float, np.floating)):
            return self._eval_float(float(x))
        bp, v = self.breakpoints, self.values
        k = min(max(bisect.bisect_right(bp, x) - 1, 0), len(bp) - 2)
        return v[k] + (x - bp[k]) * (v[k + 1] - v[k]) / (bp[k + 1] - bp[k])

    def _eval_float(self, x: float) -> float:
        bp, v = self.float_breakpoints, self.float_values
        k = min(max(int(np.searchsorted(bp, x, side="right")) - 1, 0), len(bp) - 2)
        y0, y1 = v[k], v[k + 1]
        y = y0 + (x - bp[k]) * (y1 - y0) / (bp[k + 1] - bp[k])
        # keep rounding from stepping outside the piece's value range
        return float(min(max(y, min(y0, y1)), max(y0, y1)))

    def evaluate_array(self, x: np.ndarray) -> np.ndarray:
        return np.interp(x, self.float_breakpoints, self.float_values)

    def image(self, J: Interval) -> Interval:
        """Exact image of ``J`` (an interval, the map being continuous)."""
        pts = [self(J.lo), self(J.hi)]
        pts.extend(self.values[k] for k, b in enumerate(self.breakpoints) if J.lo < b < J.hi)
        return Interval(min(pts), max(pts))

    def preimage(self, target: Interval, within: Interval | None = None) -> list[Interval]:
        """``f^{-1}(target) ∩ within`` as sorted maximal disjoint closed intervals."""
        parts = []
        for x0, x1, y0, y1 in self.pieces():
            if y0 == y1:
                if y0 in target:
                    parts.append(Interval(x0, x1))
                continue
            lo = max(target.lo, min(y0, y1))
            hi = min(target.hi, max(y0, y1))
            if lo > hi:
                continue
            xa = x0 + (lo - y0) * (x1 - x0) / (y1 - y0)
            xb = x0 + (hi - y0) * (x1 - x0) / (y1 - y0)
            parts.append(Interval(min(xa, xb), max(xa, xb)))
        if within is not None:
            parts = [p for p in (q.intersect(within) for q in parts) if p is not None]
        return merge_intervals(parts)

    def slopes_on(self, J: Interval) -> list[Fraction]:
        """Slopes of the pieces meeting ``J`` in a set of positive length."""
        return [
            s
            for s, (x0, x1, _, _) in zip(self.slopes, self.pieces())
            if min(x1, J.hi) > max(x0, J.lo)
        ]

    def to_json(self) -> dict:
        return {"breakpoints": [str(b) for b in self.breakpoints], "values": [str(v) for v in self.values]}


def from_kinks(func: Callable[[Fraction], Fraction], domain: Interval, kinks: Iterable[Fraction]) -> PiecewiseLinearMap:
    """Piecewise-linear map agreeing with ``func`` given all its kinks."""
    pts = sorted({domain.lo, domain.hi, *(k for k in kinks if domain.lo < k < domain.hi)})
    return PiecewiseLinearMap(tuple(pts), tuple(func(x) for x in pts))


def _clip01(y: Fraction) -> Fraction:
    return min(max(y, Fraction(0)), Fraction(1))


def tent_map(slope) -> PiecewiseLinearMap:
    """Clipped tent ``x -> min(s * min(x, 1 - x), 1)`` on ``[0, 1]``."""
    s = to_fraction(slope)
    if s <= 0:
        raise InputError("tent slope must be positive")
    half = Fraction(1, 2)
    return from_kinks(lambda x: _clip01(s * min(x, 1 - x)), Interval(0, 1), [1 / s, half, 1 - 1 / s])


def centered_tent_map(slope, center) -> PiecewiseLinearMap:
    """Tent whose rising branch passes through ``(center, 1/2)``, clipped to ``[0, 1]``.

    ``x -> clip(1/2 + s * (min(x, 1 - x) - center), 0, 1)``.  With
    ``center = 1/(2s)`` this is the plain clipped tent.  A fixed ``center``
    keeps the same branch intervals expanding for a whole range of slopes.
    """
    s, c = to_fraction(slope), to_fraction(center)
    if s <= 0:
        raise InputError("tent slope must be positive")
    if not 0 < c <= Fraction(1, 2):
        raise InputError("center must lie in (0, 1/2]")
    half = Fraction(1, 2)
    d = 1 / (2 * s)
    kinks = [c - d, c + d, half, 1 - (c - d), 1 - (c + d)]
    return from_kinks(lambda x: _clip01(half + s * (min(x, 1 - x) - c)), Interval(0, 1), kinks)


def identity_map(domain: Interval) -> PiecewiseLinearMap:
    return PiecewiseLinearMap((domain.lo, domain.hi), (domain.lo, domain.hi))


@dataclass(frozen=True)
class SystemModel:
    """The sequence ``f_1, f_2, ...`` given by finitely many steps and an extension rule."""

    domain: Interval
    steps: tuple[PiecewiseLinearMap, ...]
    extension: str = "periodic"

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))
        if self.domain.lo >= self.domain.hi:
            raise InputError("domain must be a non-degenerate interval")
        if not self.steps:
            raise InputError("a system needs at least one step")
        if self.extension not in EXTENSIONS:
            raise InputError(f"extension must be one of {EXTENSIONS}")
        for k, f in enumerate(self.steps, start=1):
            if f.breakpoints[0] != self.domain.lo or f.breakpoints[-1] != self.domain.hi:
                raise InputError(f"step {k}: breakpoints must span the domain exactly")
            if any(y not in self.domain for y in f.values):
                raise OutOfDomain(f"step {k} does not map the domain into itself", step=k)

    @property
    def period(self) -> int:
        return len(self.steps)

    @property
    def default_horizon(self) -> int:
        """Number of steps after which every map has been seen."""
        return len(self.steps)

    def map(self, n: int) -> PiecewiseLinearMap:
        if n < 1:
            raise ValueError("time steps are 1-based")
        if self.extension == "periodic":
            return self.steps[(n - 1) % len(self.steps)]
        return self.steps[min(n, len(self.steps)) - 1]

    def check_point(self, x) -> None:
        if not self.domain.lo <= x <= self.domain.hi:
            raise OutOfDomain(f"{x} lies outside the domain {self.domain}", x=float(x))

    def check_interval(self, J: Interval) -> None:
        if not self.domain.contains_interval(J):
            raise OutOfDomain(f"{J} is not contained in the domain {self.domain}")

    def evaluate(self, n: int, x):
        self.check_point(x)
        return self.map(n)(x)

    def compose_orbit(self, i: int, n: int, x):
        """``f_{i+n-1} o ... o f_i (x)``; ``n = 0`` gives ``x``."""
        self.check_point(x)
        for k in range(i, i + n):
            x = self.map(k)(x)
        return x

    def orbit(self, x, n: int, start: int = 1) -> list:
        """``[x, f_start(x), ..., f_start^{n-1}(x)]``."""
        self.check_point(x)
        out = [x]
        for k in range(start, start + n - 1):
            out.append(self.map(k)(out[-1]))
        return out

    def orbit_array(self, x: np.ndarray, n: int, start: int = 1) -> np.ndarray:
        """Float orbits of many points, shape ``(len(x), n)``; column ``j`` is ``f_start^j``."""
        x = np.asarray(x, dtype=float)
        lo, hi = self.domain.as_floats()
        if x.size and (x.min() < lo or x.max() > hi):
            raise OutOfDomain("evaluation points leave the domain")
        out = np.empty((x.size, n))
        if n:
            out[:, 0] = x
        for j in range(1, n):
            out[:, j] = self.map(start + j - 1).evaluate_array(out[:, j - 1])
        return out

    def image_of_interval(self, n: int, J: Interval) -> tuple[Interval, bool]:
        """Exact ``f_n(J)``; the flag reports connectedness, always true here."""
        self.check_interval(J)
        return self.map(n).image(J), True

    def preimage_in_interval(self, n: int, target: Interval, within: Interval) -> list[Interval]:
        self.check_interval(target)
        self.check_interval(within)
        return self.map(n).preimage(target, within)

    def to_json(self) -> dict:
        return {
            "domain": [str(self.domain.lo), str(self.domain.hi)],
            "extension": self.extension,
            "steps": [f.to_json() for f in self.steps],
        }


def evaluate(sys: SystemModel, n: int, x):
    return sys.evaluate(n, x)


def compose_orbit(sys: SystemModel, i: int, n: int, x):
    return sys.compose_orbit(i, n, x)


def image_of_interval(sys: SystemModel, n: int, J: Interval) -> tuple[Interval, bool]:
    return sys.image_of_interval(n, J)


def preimage_in_interval(sys: SystemModel, n: int, target: Interval, within: Interval) -> list[Interval]:
    return sys.preimage_in_interval(n, target, within)


def tent_system(slopes: Sequence, extension: str = "periodic") -> SystemModel:
    return SystemModel(Interval(0, 1), tuple(tent_map(s) for s in slopes), extension)


def centered_tent_system(slopes: Sequence, center, extension: str = "periodic") -> SystemModel:
    return SystemModel(Interval(0, 1), tuple(centered_tent_map(s, center) for s in slopes), extension)


def identity_system(domain: Interval = Interval(0, 1)) -> SystemModel:
    return SystemModel(domain, (identity_map(domain),), "periodic")


def from_json(obj: dict) -> SystemModel:
    """Parse the system JSON, either explicit steps or a tent-family generator."""
    if not isinstance(obj, dict):
        raise InputError("system JSON must be an object")
    family = obj.get("family")
    if family is not None:
        slopes = obj.get("slopes")
        if not isinstance(slopes, dict) or "values" not in slopes:
            raise InputError("family generator needs slopes: {kind, values}")
        kind = slopes.get("kind", "periodic")
        values = slopes["values"]
        if not isinstance(values, list) or not values:
            raise InputError("slopes.values must be a non-empty list")
        if family == "tent":
            return tent_system(values, kind)
        if family == "centered_tent":
            if "center" not in obj:
                raise InputError("centered_tent needs a 'center'")
            return centered_tent_system(values, obj["center"], kind)
        raise InputError(f"unknown family {family!r}")
    try:
        dom = obj["domain"]
        steps = obj["steps"]
    except KeyError as exc:
        raise InputError(f"system JSON is missing {exc.args[0]!r}") from exc
    if not isinstance(dom, list) or len(dom) != 2:
        raise InputError("domain must be [a, b]")
    if not isinstance(steps, list):
        raise InputError("steps must be a list")
    domain = Interval(to_fraction(dom[0]), to_fraction(dom[1]))
    maps = []
    for st in steps:
        if not isinstance(st, dict) or "breakpoints" not in st or "values" not in st:
            raise InputError("each step needs breakpoints and values")
        maps.append(PiecewiseLinearMap(tuple(st["breakpoints"]), tuple(st["values"])))
    return SystemModel(domain, tuple(maps), obj.get("extension", "periodic"))
