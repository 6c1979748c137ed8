"""Transition matrices, allowable words and spectral quantities.

Symbols are 1-based everywhere in the public API (``1..N``); arrays used
internally are 0-based.  A word is counted by its number of entries, so the
words with ``n`` entries are counted by ``||A^(n-1)||``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numba
import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .errors import (
    CountTooLarge,
    EntryNotBit,
    InputError,
    NoConvergence,
    NotSquare,
    ZeroColumn,
    ZeroRow,
)

DEFAULT_WORD_CAP = 10_000_000


@dataclass(frozen=True)
class TransitionMatrix:
    """Square 0/1 matrix with no zero row and no zero column."""

    entries: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        _check_entries(self.entries)

    @property
    def size(self) -> int:
        return len(self.entries)

    @cached_property
    def array(self) -> np.ndarray:
        arr = np.array(self.entries, dtype=np.int64)
        arr.setflags(write=False)
        return arr

    @property
    def row_sums(self) -> tuple[int, ...]:
        return tuple(sum(r) for r in self.entries)

    @property
    def column_sums(self) -> tuple[int, ...]:
        return tuple(sum(c) for c in zip(*self.entries))

    def allows(self, i: int, j: int) -> bool:
        """True iff the 1-based transition ``i -> j`` is permitted."""
        return self.entries[i - 1][j - 1] == 1

    def successors(self, i: int) -> tuple[int, ...]:
        return tuple(j + 1 for j, a in enumerate(self.entries[i - 1]) if a)

    def is_allowable(self, word: Sequence[int]) -> bool:
        if any(not 1 <= s <= self.size for s in word):
            return False
        return all(self.allows(s, t) for s, t in zip(word, word[1:]))

    def to_json(self) -> dict:
        return {"n": self.size, "rows": [list(r) for r in self.entries]}

    @classmethod
    def full(cls, n: int) -> "TransitionMatrix":
        return cls(tuple(tuple(1 for _ in range(n)) for _ in range(n)))

    @classmethod
    def identity(cls, n: int) -> "TransitionMatrix":
        return cls(tuple(tuple(int(i == j) for j in range(n)) for i in range(n)))

    def __str__(self) -> str:
        return "\n".join(" ".join(str(a) for a in row) for row in self.entries)


def _check_entries(entries) -> None:
    n = len(entries)
    if n == 0:
        raise NotSquare("matrix must have at least one row")
    for i, row in enumerate(entries):
        if len(row) != n:
            raise NotSquare(f"row {i + 1} has {len(row)} entries, expected {n}", row=i + 1)
        for j, a in enumerate(row):
            if isinstance(a, bool) or a not in (0, 1) or not isinstance(a, (int, np.integer)):
                raise EntryNotBit(f"entry ({i + 1},{j + 1}) = {a!r} is not 0 or 1", row=i + 1, column=j + 1)
    for i, row in enumerate(entries):
        if sum(row) == 0:
            raise ZeroRow(f"row {i + 1} is zero", row=i + 1)
    for j in range(n):
        if all(entries[i][j] == 0 for i in range(n)):
            raise ZeroColumn(f"column {j + 1} is zero", column=j + 1)


def validate(entries: Iterable[Iterable[int]]) -> TransitionMatrix:
    """Check a square 0/1 array and wrap it as a :class:`TransitionMatrix`."""
    try:
        rows = [list(r) for r in entries]
    except TypeError as exc:
        raise NotSquare("matrix must be a list of rows") from exc
    clean = []
    for i, row in enumerate(rows):
        out = []
        for j, a in enumerate(row):
            if isinstance(a, (bool, np.bool_)) or not isinstance(a, (int, np.integer, float)):
                raise EntryNotBit(f"entry ({i + 1},{j + 1}) = {a!r} is not 0 or 1", row=i + 1, column=j + 1)
            if a not in (0, 1):
                raise EntryNotBit(f"entry ({i + 1},{j + 1}) = {a!r} is not 0 or 1", row=i + 1, column=j + 1)
            out.append(int(a))
        clean.append(tuple(out))
    return TransitionMatrix(tuple(clean))


def from_json(obj: dict) -> TransitionMatrix:
    """Parse ``{"n": N, "rows": [[...], ...]}``."""
    if not isinstance(obj, dict) or "rows" not in obj:
        raise InputError("matrix JSON needs a 'rows' field")
    rows = obj["rows"]
    n = obj.get("n", len(rows))
    if not isinstance(rows, list) or any(not isinstance(r, list) for r in rows):
        raise NotSquare("'rows' must be a list of lists")
    if n != len(rows):
        raise NotSquare(f"'n' is {n} but {len(rows)} rows were given")
    return validate(rows)


@dataclass(frozen=True)
class CountMatrix:
    """Exact non-negative integer matrix (entries are Python ints)."""

    entries: tuple[tuple[int, ...], ...]

    @property
    def size(self) -> int:
        return len(self.entries)

    def norm(self) -> int:
        return sum(sum(r) for r in self.entries)


def _as_int_rows(M) -> list[list[int]]:
    if isinstance(M, (TransitionMatrix, CountMatrix)):
        return [list(r) for r in M.entries]
    return [[int(a) for a in r] for r in np.asarray(M, dtype=object).tolist()]


def _mul(X: list[list[int]], Y: list[list[int]]) -> list[list[int]]:
    cols = list(zip(*Y))
    return [[sum(a * b for a, b in zip(row, col)) for col in cols] for row in X]


def matrix_power(A, k: int) -> CountMatrix:
    """Exact ``A**k`` with arbitrary-precision integers; ``A**0`` is the identity."""
    if k < 0:
        raise ValueError("k must be non-negative")
    rows = _as_int_rows(A)
    n = len(rows)
    bound = max((max(r) for r in rows), default=0)
    # entries of A^k are at most (n * max entry)^k; int64 is exact below 2^62
    if k == 0 or bound <= 1 and k * math.log2(max(n, 2)) < 62:
        P = np.linalg.matrix_power(np.array(rows, dtype=np.int64), k)
        return CountMatrix(tuple(tuple(int(a) for a in r) for r in P.tolist()))
    result = [[int(i == j) for j in range(n)] for i in range(n)]
    base = rows
    while k:
        if k & 1:
            result = _mul(result, base)
        k >>= 1
        if k:
            base = _mul(base, base)
    return CountMatrix(tuple(tuple(r) for r in result))


def entrywise_norm(M) -> int:
    """Sum of all entries, the norm used for the word counts."""
    if isinstance(M, (TransitionMatrix, CountMatrix)):
        return sum(sum(r) for r in M.entries)
    return sum(sum(r) for r in _as_int_rows(M))


def count_allowable_words(A: TransitionMatrix, n: int) -> int:
    """Number of allowable words with ``n`` entries, ``||A^(n-1)||``."""
    if n < 1:
        raise ValueError("word length must be at least 1")
    # the norm is at most N^n, exact in int64 below 2^62
    if n * math.log2(max(A.size, 2)) < 62:
        return int(np.linalg.matrix_power(A.array, n - 1).sum())
    return entrywise_norm(matrix_power(A, n - 1))


@numba.njit(cache=True)
def _fill_words(arr, n, out):
    # depth-first over successors; choice[d] is the next column to try at depth d
    N = arr.shape[0]
    word = np.empty(n, np.int64)
    choice = np.zeros(n + 1, np.int64)
    row = 0
    for s in range(N):
        word[0] = s
        if n == 1:
            out[row, 0] = s + 1
            row += 1
            continue
        depth = 1
        choice[1] = 0
        while depth >= 1:
            prev = word[depth - 1]
            j = choice[depth]
            while j < N and arr[prev, j] == 0:
                j += 1
            if j < N:
                word[depth] = j
                choice[depth] = j + 1
                if depth == n - 1:
                    for t in range(n):
                        out[row, t] = word[t] + 1
                    row += 1
                else:
                    depth += 1
                    choice[depth] = 0
            else:
                depth -= 1
    return row


def enumerate_allowable_words(A: TransitionMatrix, n: int, cap: int = DEFAULT_WORD_CAP) -> np.ndarray:
    """All allowable words with ``n`` entries as rows of an ``(count, n)`` array.

    Rows are in lexicographic order and hold 1-based symbols.  Raises
    :class:`CountTooLarge` when the count (known exactly in advance) exceeds
    ``cap``.
    """
    if n < 1:
        raise ValueError("word length must be at least 1")
    count = count_allowable_words(A, n)
    if count > cap:
        raise CountTooLarge(f"{count} words exceed the enumeration cap {cap}", count=count, cap=cap)
    out = np.empty((count, n), dtype=np.int16)
    written = _fill_words(A.array, n, out)
    assert written == count
    return out


def gelfand_estimate(A, n: int) -> float:
    """``||A^n|| ** (1/n)`` with the entrywise-sum norm."""
    if n < 1:
        raise ValueError("n must be at least 1")
    norm = entrywise_norm(matrix_power(A, n))
    try:
        return float(norm) ** (1.0 / n)
    except OverflowError:
        return math.exp(math.log(norm) / n)


def strong_components(A: TransitionMatrix) -> list[list[int]]:
    """Strongly connected components of the transition graph (0-based indices)."""
    ncomp, labels = connected_components(csr_matrix(A.array), directed=True, connection="strong")
    comps: list[list[int]] = [[] for _ in range(ncomp)]
    for node, lab in enumerate(labels):
        comps[lab].append(node)
    return comps


def is_irreducible(A: TransitionMatrix) -> bool:
    return len(strong_components(A)) == 1


def has_branching(A: TransitionMatrix) -> bool:
    return max(A.row_sums) >= 2


def nu_bound(A: TransitionMatrix) -> int:
    """``max(min row sum, min column sum)``, a lower bound for the spectral radius."""
    return max(min(A.row_sums), min(A.column_sums))


def _perron_root_irreducible(M: np.ndarray, tol: float, max_iter: int) -> float:
    # M + I is primitive; Collatz-Wielandt ratios bracket rho(M) + 1.
    B = M.astype(float) + np.eye(M.shape[0])
    x = np.ones(M.shape[0])
    lo = hi = float("nan")
    for _ in range(max_iter):
        y = B @ x
        ratios = y / x
        lo, hi = ratios.min(), ratios.max()
        if hi - lo < tol:
            return 0.5 * (lo + hi) - 1.0
        x = y / y.max()
    raise NoConvergence(
        f"power iteration did not converge in {max_iter} iterations",
        max_iters=max_iter,
        last=0.5 * (lo + hi) - 1.0,
        gap=hi - lo,
    )


def spectral_radius(A: TransitionMatrix, tol: float = 1e-12, max_iter: int = 1_000_000) -> float:
    """Spectral radius by power iteration on each strongly connected block.

    The radius of a non-negative matrix is the largest radius among its
    irreducible diagonal blocks.  Each block is iterated as ``block + I``
    from the all-ones vector with max-norm renormalisation and stopped when
    the Collatz-Wielandt bracket is narrower than ``tol``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    arr = A.array
    best = 0.0
    for comp in strong_components(A):
        if len(comp) == 1:
            best = max(best, float(arr[comp[0], comp[0]]))
            continue
        block = arr[np.ix_(comp, comp)]
        best = max(best, _perron_root_irreducible(block, tol, max_iter))
    return best


def log_spectral_radius(A: TransitionMatrix, tol: float = 1e-12) -> float:
    return math.log(spectral_radius(A, tol))


def random_transition_matrix(
    rng: np.random.Generator, n: int, density: float = 0.5, irreducible: bool = False
) -> TransitionMatrix:
    """Rejection-sample a transition matrix with Bernoulli(density) entries."""
    while True:
        arr = (rng.random((n, n)) < density).astype(int)
        if arr.sum(axis=1).min() == 0 or arr.sum(axis=0).min() == 0:
            continue
        A = TransitionMatrix(tuple(tuple(int(a) for a in r) for r in arr))
        if irreducible and not is_irreducible(A):
            continue
        return A


def all_transition_matrices(n: int):
    """Yield every ``n x n`` transition matrix (exhaustive, ``2**(n*n)`` candidates)."""
    for bits in range(1 << (n * n)):
        rows = tuple(tuple((bits >> (i * n + j)) & 1 for j in range(n)) for i in range(n))
        if all(any(r) for r in rows) and all(any(c) for c in zip(*rows)):
            yield TransitionMatrix(rows)
