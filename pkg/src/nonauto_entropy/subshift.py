"""One-sided subshift of finite type.

Points of the symbol space are stored as a finite prefix followed by a cycle
repeated forever.  Every computation reads finitely many symbols, and
eventually periodic points are dense, so nothing is lost.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InvalidSequence
from .transition_matrix import TransitionMatrix


@dataclass(frozen=True)
class SymbolSequence:
    matrix: TransitionMatrix
    prefix: tuple[int, ...]
    cycle: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "prefix", tuple(int(s) for s in self.prefix))
        object.__setattr__(self, "cycle", tuple(int(s) for s in self.cycle))
        if not self.cycle:
            raise InvalidSequence("tail cycle must be non-empty")
        N = self.matrix.size
        for s in self.prefix + self.cycle:
            if not 1 <= s <= N:
                raise InvalidSequence(f"symbol {s} outside 1..{N}")
        word = self.prefix + self.cycle + self.cycle[:1]
        for k, (s, t) in enumerate(zip(word, word[1:])):
            if not self.matrix.allows(s, t):
                raise InvalidSequence(f"transition {s}->{t} at index {k} is not allowed", index=k)

    def symbol(self, k: int) -> int:
        if k < 0:
            raise IndexError(k)
        p = len(self.prefix)
        if k < p:
            return self.prefix[k]
        return self.cycle[(k - p) % len(self.cycle)]

    def word(self, length: int) -> tuple[int, ...]:
        return tuple(self.symbol(k) for k in range(length))

    def __str__(self) -> str:
        return ",".join(map(str, self.prefix)) + "|" + ",".join(map(str, self.cycle))


def parse_sequence(A: TransitionMatrix, text: str) -> SymbolSequence:
    """Parse ``"1,2,1,1|1,2"`` (prefix, then a cycle repeated forever).

    Without ``|`` the whole literal is taken as the cycle.
    """
    head, bar, tail = text.strip().partition("|")
    if not bar:
        head, tail = "", head

    def ints(part: str) -> tuple[int, ...]:
        part = part.strip()
        if not part:
            return ()
        try:
            return tuple(int(tok) for tok in part.split(","))
        except ValueError as exc:
            raise InvalidSequence(f"cannot parse sequence literal {text!r}") from exc

    return SymbolSequence(A, ints(head), ints(tail))


def shift(s: SymbolSequence) -> SymbolSequence:
    """The shift map: drop the first symbol."""
    if s.prefix:
        return SymbolSequence(s.matrix, s.prefix[1:], s.cycle)
    return SymbolSequence(s.matrix, (), s.cycle[1:] + s.cycle[:1])


def metric(s: SymbolSequence, t: SymbolSequence, depth_cap: int) -> float:
    """First-disagreement ultrametric ``2**-k``; 0 if equal on indices ``< depth_cap``."""
    for k in range(depth_cap):
        if s.symbol(k) != t.symbol(k):
            return 2.0**-k
    return 0.0


def _shortest_cycle_from(A: TransitionMatrix, v: int) -> tuple[int, ...] | None:
    """Shortest closed walk ``v -> ... -> v`` as the symbols after ``v`` (ending with ``v``)."""
    parent = {v: None}
    queue = deque([v])
    while queue:
        u = queue.popleft()
        for w in A.successors(u):
            if w == v:
                path = [v]
                while u != v:
                    path.append(u)
                    u = parent[u]
                return tuple(reversed(path))
            if w not in parent:
                parent[w] = u
                queue.append(w)
    return None


def eventual_tail(A: TransitionMatrix, last: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Bridge and cycle continuing a word that ends with ``last``.

    Returns ``(bridge, cycle)``: the bridge leads from ``last`` to the nearest
    symbol lying on a cycle (empty when ``last`` is on one) and the cycle is
    the shortest closed walk there.
    """
    parent = {last: None}
    queue = deque([last])
    while queue:
        u = queue.popleft()
        cyc = _shortest_cycle_from(A, u)
        if cyc is not None:
            bridge = []
            w = u
            while w != last:
                bridge.append(w)
                w = parent[w]
            return tuple(reversed(bridge)), cyc
        for w in A.successors(u):
            if w not in parent:
                parent[w] = u
                queue.append(w)
    raise AssertionError("every transition matrix has a cycle")  # pragma: no cover


def extend_word(A: TransitionMatrix, word: Sequence[int]) -> SymbolSequence:
    """Eventually periodic point of the symbol space that starts with ``word``."""
    word = tuple(word)
    if not A.is_allowable(word):
        raise InvalidSequence(f"word {word} is not allowable")
    bridge, cycle = eventual_tail(A, word[-1])
    return SymbolSequence(A, word + bridge, cycle)


def random_sequence(A: TransitionMatrix, seed: int, prefix_len: int) -> SymbolSequence:
    """Random admissible point: uniform start, uniform successor at each step.

    The tail is the shortest cycle reachable from the last random symbol; a
    connecting bridge, when needed, is appended to the prefix.
    """
    if prefix_len < 1:
        raise ValueError("prefix_len must be at least 1")
    rng = np.random.default_rng(seed)
    word = [int(rng.integers(1, A.size + 1))]
    for _ in range(prefix_len - 1):
        succ = A.successors(word[-1])
        word.append(succ[int(rng.integers(len(succ)))])
    return extend_word(A, word)


@dataclass(frozen=True)
class Cylinder:
    """Set of points whose first symbols spell ``word``."""

    matrix: TransitionMatrix
    word: tuple[int, ...]

    def __post_init__(self):
        if not self.word or not self.matrix.is_allowable(self.word):
            raise InvalidSequence(f"word {self.word} is not allowable")

    def __contains__(self, s: SymbolSequence) -> bool:
        return s.word(len(self.word)) == self.word

    def point(self) -> SymbolSequence:
        return extend_word(self.matrix, self.word)
