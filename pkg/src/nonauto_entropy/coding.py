"""Symbolic coding of an expanding cover.

For a point ``alpha`` of the symbol space and a start time ``n``, level ``m``
of the nested refinement is the set of points whose first ``m + 1`` iterates
(starting with ``f_n``) visit ``V_{a_0}, ..., V_{a_m}``.  Levels are built
backwards from the deepest symbol by exact preimages, so each is a finite
union of closed intervals with rational endpoints.  The coded point
``x^n(alpha)`` is the intersection of all levels; it is reported as the
midpoint of a deep level together with a rigorous enclosure radius.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .coupled_expansion import CoverConfig, ExpansionConstants, covering_witnesses, estimate_constants
from .errors import EmptyLevel, HypothesisFailure, InvalidCover, NoContraction, SizeMismatch
from .subshift import SymbolSequence, shift
from .system_model import Interval, SystemModel, hull, merge_intervals
from .transition_matrix import TransitionMatrix, enumerate_allowable_words


@dataclass(frozen=True)
class NestedRefinement:
    alpha: SymbolSequence
    start: int
    levels: tuple[tuple[Interval, ...], ...]

    @property
    def diameters(self) -> tuple[Fraction, ...]:
        """Hull diameter of each level (conservative while a level has several parts)."""
        return tuple(hull(lv).length for lv in self.levels)

    @property
    def depth(self) -> int:
        return len(self.levels) - 1


@dataclass(frozen=True)
class CodedPoint:
    value: Fraction
    radius: Fraction
    depth: int

    @property
    def enclosure(self) -> Interval:
        return Interval(self.value - self.radius, self.value + self.radius)

    def to_json(self) -> dict:
        return {"value": float(self.value), "radius": float(self.radius), "depth": self.depth}


@dataclass(frozen=True)
class Itinerary:
    """Symbols visited by an orbit; ``undefined_at`` is the first step outside every set."""

    word: tuple[int, ...]
    undefined_at: int | None = None

    @property
    def defined(self) -> bool:
        return self.undefined_at is None


class Coder:
    """Coding maps for a system that is ``A``-coupled-expanding in a cover.

    The covering condition is verified on construction (``check=False``
    skips it).  Expansion constants are computed once and reused.
    """

    def __init__(self, sys: SystemModel, cfg: CoverConfig, A: TransitionMatrix, check: bool = True):
        if A.size != cfg.size:
            raise SizeMismatch(f"matrix is {A.size}x{A.size} but the cover has {cfg.size} sets")
        cfg.check_against(sys)
        if check:
            wit = covering_witnesses(sys, cfg, A)
            if wit:
                raise HypothesisFailure(
                    f"system is not A-coupled-expanding: {len(wit)} violations",
                    witnesses=[w.to_json() for w in wit],
                )
        self.sys = sys
        self.cfg = cfg
        self.A = A
        self._constants: ExpansionConstants | None = None

    @property
    def constants(self) -> ExpansionConstants:
        if self._constants is None:
            self._constants = estimate_constants(self.sys, self.cfg)
        return self._constants

    def _check_alpha(self, alpha: SymbolSequence) -> None:
        if alpha.matrix != self.A:
            raise SizeMismatch("sequence belongs to a different transition matrix")

    def level(self, alpha: SymbolSequence | Sequence[int], n: int, m: int) -> tuple[Interval, ...]:
        """Level ``m`` at start time ``n``, by backward preimage recursion."""
        word = alpha.word(m + 1) if isinstance(alpha, SymbolSequence) else tuple(alpha)[: m + 1]
        if len(word) < m + 1:
            raise ValueError("word shorter than the requested depth")
        sets = self.cfg.sets
        current = [sets[word[m] - 1]]
        for k in range(m - 1, -1, -1):
            f = self.sys.map(n + k)
            within = sets[word[k] - 1]
            parts = []
            for T in current:
                parts.extend(f.preimage(T, within))
            current = merge_intervals(parts)
            if not current:
                raise EmptyLevel(f"level {m} is empty (hypothesis (i) fails)", level=m, step=n + k)
        return tuple(current)

    def refine(self, alpha: SymbolSequence, n: int, depth: int) -> NestedRefinement:
        if depth < 0:
            raise ValueError("depth must be non-negative")
        self._check_alpha(alpha)
        levels = tuple(self.level(alpha, n, m) for m in range(depth + 1))
        return NestedRefinement(alpha, n, levels)

    def predicted_depth(self, target_radius) -> int:
        lam = self.constants.lam
        if lam is None or lam <= 1:
            raise NoContraction("expansion constant is not > 1; coding does not contract", lam=None if lam is None else float(lam))
        span = float(self.sys.domain.length)
        ratio = span / (2 * float(target_radius))
        return max(0, math.ceil(math.log(ratio) / math.log(float(lam)))) if ratio > 1 else 0

    def code_point(self, alpha: SymbolSequence | Sequence[int], n: int, target_radius) -> CodedPoint:
        """Enclosure of ``x^n(alpha)`` with radius at most ``target_radius``."""
        target_radius = Fraction(target_radius)
        if target_radius <= 0:
            raise ValueError("target_radius must be positive")
        if isinstance(alpha, SymbolSequence):
            self._check_alpha(alpha)
        m = predicted = self.predicted_depth(target_radius)
        limit = 10 * max(predicted, 1)
        while True:
            H = hull(self.level(alpha, n, m))
            if H.length <= 2 * target_radius:
                return CodedPoint(H.midpoint, H.length / 2, m)
            m += 1
            if m > limit:
                raise NoContraction(
                    f"level diameter {float(H.length)} still above target at depth {m - 1}",
                    depth=m - 1,
                    diameter=float(H.length),
                )

    def itinerary(self, x, n: int, length: int) -> Itinerary:
        """Which set each of ``x, f_n(x), ..., f_n^{length-1}(x)`` lies in."""
        if not self.cfg.is_disjoint():
            raise InvalidCover("itineraries need pairwise disjoint sets")
        self.sys.check_point(x)
        word = []
        for k in range(length):
            idx = self.cfg.index_of(x)
            if idx is None:
                return Itinerary(tuple(word), k)
            word.append(idx)
            if k < length - 1:
                x = self.sys.map(n + k)(x)
        return Itinerary(tuple(word))

    def semiconjugacy_residual(self, alpha: SymbolSequence, n: int, target_radius) -> Fraction:
        """``|f_n(pi_n(alpha)) - pi_{n+1}(shift(alpha))|`` for the computed enclosures."""
        p = self.code_point(alpha, n, target_radius)
        q = self.code_point(shift(alpha), n + 1, target_radius)
        return abs(self.sys.map(n)(p.value) - q.value)

    def coded_points(self, depth: int, n: int = 1) -> tuple[np.ndarray, list[Fraction]]:
        """Midpoints of the level-``depth`` sets for every allowable word.

        Returns the words (rows of 1-based symbols, lexicographic) and the
        midpoints.  Levels are shared between words with a common suffix, so
        each distinct suffix costs one preimage step.
        """
        words = enumerate_allowable_words(self.A, depth + 1)
        sets = self.cfg.sets
        # suffix -> level at time n + (depth + 1 - len(suffix))
        table: dict[tuple[int, ...], list[Interval]] = {(s,): [sets[s - 1]] for s in range(1, self.A.size + 1)}
        for length in range(2, depth + 2):
            k = depth + 1 - length
            f = self.sys.map(n + k)
            nxt = {}
            for w in {tuple(r[k:]) for r in words.tolist()}:
                parts = []
                for T in table[w[1:]]:
                    parts.extend(f.preimage(T, sets[w[0] - 1]))
                merged = merge_intervals(parts)
                if not merged:
                    raise EmptyLevel(f"level for word {w} is empty", level=length - 1, step=n + k)
                nxt[w] = merged
            table = nxt
        mids = [hull(table[tuple(r)]).midpoint for r in words.tolist()]
        return words, mids


def refine(sys, cfg, A, alpha, n, depth) -> NestedRefinement:
    return Coder(sys, cfg, A).refine(alpha, n, depth)


def code_point(sys, cfg, A, alpha, n, target_radius) -> CodedPoint:
    return Coder(sys, cfg, A).code_point(alpha, n, target_radius)


def itinerary(sys, cfg, x, n, length) -> Itinerary:
    A = TransitionMatrix.full(cfg.size)
    return Coder(sys, cfg, A, check=False).itinerary(x, n, length)


def semiconjugacy_residual(sys, cfg, A, alpha, n, target_radius) -> Fraction:
    return Coder(sys, cfg, A).semiconjugacy_residual(alpha, n, target_radius)
