"""Empirical entropy from (n, eps)-separated sets.

Orbits are evaluated in floating point for every point of an evaluation set
(a uniform grid over the domain, or given points such as coded points of an
invariant subsystem).  The Bowen distance is
``d_n(x, y) = max_{0 <= j < n} |f_1^j(x) - f_1^j(y)|``.

For each ``n`` a maximal separated set is built greedily by one
left-to-right scan over the evaluation set.  Two points count as separated
when ``d_n >= eps * (1 - 1e-9)``; the slack absorbs grid rounding so that,
for example, grid points ``0.3`` and ``0.4`` are ``0.1`` apart.

Two scan orders are offered.  ``"left_to_right"`` is the default.
``"dyadic"`` visits grid points by decreasing power of two dividing their
index, then left to right; grids of sizes ``g`` and ``2g - 1`` are nested,
so the coarse selection is replayed first and refining the grid can only add
points.  With left-to-right order a finer grid occasionally gives a slightly
smaller greedy set.

A finite evaluation set of ``P`` points caps every count at ``P``, so the
growth curve flattens once counts approach ``P``.  Counts above
``saturation * P`` are left out of the slope fit.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numba
import numpy as np

from .errors import InvalidConfig, NoConvergence
from .system_model import SystemModel

log = logging.getLogger(__name__)

SEPARATION_SLACK = 1e-9
_MAX_CELLS = 1 << 22


@numba.njit(cache=True)
def _scan(orbits, lo, thr, n, keys, M, selected, nsel_in, head, nxt):
    """Greedy selection for Bowen length ``n``, extending ``selected`` in place; returns the count."""
    P = orbits.shape[0]
    k = keys.shape[0]
    head[:] = -1
    nsel = nsel_in
    cell = np.empty(k, np.int64)
    # insert the points carried over from the previous length
    for i in range(P):
        if selected[i]:
            c = 0
            for t in range(k):
                c = c * M + int((orbits[i, keys[t]] - lo) / thr)
            nxt[i] = head[c]
            head[c] = i
    noff = 3**k
    for i in range(P):
        if selected[i]:
            continue
        for t in range(k):
            cell[t] = int((orbits[i, keys[t]] - lo) / thr)
        close = False
        for o in range(noff):
            rem = o
            c = 0
            ok = True
            for t in range(k):
                d = rem % 3 - 1
                rem //= 3
                ct = cell[t] + d
                if ct < 0 or ct >= M:
                    ok = False
                    break
                c = c * M + ct
            if not ok:
                continue
            q = head[c]
            while q >= 0:
                near = True
                for j in range(n):
                    if abs(orbits[i, j] - orbits[q, j]) >= thr:
                        near = False
                        break
                if near:
                    close = True
                    break
                q = nxt[q]
            if close:
                break
        if not close:
            selected[i] = True
            c = 0
            for t in range(k):
                c = c * M + cell[t]
            nxt[i] = head[c]
            head[c] = i
            nsel += 1
    return nsel


def greedy_counts(orbits: np.ndarray, epsilon: float, n_max: int, lo: float, hi: float) -> np.ndarray:
    """Greedy separated-set sizes for Bowen lengths ``1..n_max``.

    ``orbits`` has one row per point, ordered left to right, and at least
    ``n_max`` columns.  Each length gets its own scan from an empty set.
    """
    orbits = np.ascontiguousarray(orbits, dtype=np.float64)
    P = orbits.shape[0]
    thr = epsilon * (1.0 - SEPARATION_SLACK)
    M = int((hi - lo) / thr) + 2
    nxt = np.empty(P, dtype=np.int64)
    counts = np.zeros(n_max, dtype=np.int64)
    for n in range(1, n_max + 1):
        # hash on the first, last and middle coordinates of the orbit
        keys = sorted({0, n - 1, (n - 1) // 2})
        while len(keys) > 1 and M ** len(keys) > _MAX_CELLS:
            keys.pop(len(keys) // 2)
        keys_arr = np.array(keys, dtype=np.int64)
        head = np.empty(M ** len(keys), dtype=np.int64)
        selected = np.zeros(P, dtype=np.bool_)
        counts[n - 1] = _scan(orbits, lo, thr, n, keys_arr, M, selected, 0, head, nxt)
    return counts


def bowen_distance(sys: SystemModel, x, y, n: int):
    """``max_{0<=j<n} |f_1^j(x) - f_1^j(y)|``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    ox, oy = sys.orbit(x, n), sys.orbit(y, n)
    return max(abs(a - b) for a, b in zip(ox, oy))


def evaluation_grid(sys: SystemModel, grid_size: int) -> np.ndarray:
    """``grid_size`` equally spaced points including both endpoints.

    Grids of sizes ``g`` and ``2g - 1`` are nested.
    """
    if grid_size < 2:
        raise InvalidConfig("grid_size must be at least 2")
    lo, hi = sys.domain.as_floats()
    k = np.arange(grid_size, dtype=float)
    return (lo * (grid_size - 1 - k) + hi * k) / (grid_size - 1)


ORDERS = ("left_to_right", "dyadic")


def dyadic_order(size: int) -> np.ndarray:
    """Indices ``0..size-1`` sorted by decreasing 2-adic valuation, then increasing."""
    k = np.arange(size)
    v = np.zeros(size, dtype=np.int64)
    v[0] = 64
    rest = k[1:]
    v[1:] = np.log2(rest & -rest).astype(np.int64)
    return np.lexsort((k, -v))


def _points(sys: SystemModel, grid_size: int, restrict_to, order: str = "left_to_right") -> np.ndarray:
    if order not in ORDERS:
        raise InvalidConfig(f"order must be one of {ORDERS}")
    if restrict_to is None:
        pts = evaluation_grid(sys, grid_size)
        return pts[dyadic_order(grid_size)] if order == "dyadic" else pts
    pts = np.sort(np.asarray([float(p) for p in restrict_to], dtype=float))
    if pts.size == 0:
        raise InvalidConfig("restrict_to is empty")
    return pts


def separated_counts(
    sys: SystemModel, n_max: int, epsilon: float, grid_size: int = 2001, restrict_to=None, order: str = "left_to_right"
) -> np.ndarray:
    """Greedy separated-set sizes for ``n = 1..n_max``."""
    if epsilon <= 0:
        raise InvalidConfig("epsilon must be positive")
    if n_max < 1:
        raise InvalidConfig("n must be at least 1")
    pts = _points(sys, grid_size, restrict_to, order)
    orbits = sys.orbit_array(pts, n_max)
    lo, hi = sys.domain.as_floats()
    return greedy_counts(orbits, epsilon, n_max, lo, hi)


def separated_count(
    sys: SystemModel, n: int, epsilon: float, grid_size: int = 2001, restrict_to=None, order: str = "left_to_right"
) -> int:
    """Size of the greedy maximal ``(n, epsilon)``-separated subset of the evaluation set."""
    return int(separated_counts(sys, n, epsilon, grid_size, restrict_to, order)[-1])


@dataclass(frozen=True)
class EstimatorConfig:
    n_min: int = 5
    n_max: int = 16
    epsilons: tuple[float, ...] = (0.05, 0.02, 0.01)
    grid_size: int = 200_000
    restrict_to: tuple | None = None
    saturation: float = 0.125
    order: str = "left_to_right"

    def __post_init__(self):
        object.__setattr__(self, "epsilons", tuple(float(e) for e in self.epsilons))
        if not 1 <= self.n_min < self.n_max:
            raise InvalidConfig("need 1 <= n_min < n_max")
        if not self.epsilons:
            raise InvalidConfig("epsilons must be non-empty")
        if any(e <= 0 for e in self.epsilons):
            raise InvalidConfig("epsilons must be positive")
        if any(a <= b for a, b in zip(self.epsilons, self.epsilons[1:])):
            raise InvalidConfig("epsilons must be strictly decreasing")
        if self.grid_size < 2:
            raise InvalidConfig("grid_size must be at least 2")
        if not 0 < self.saturation <= 1:
            raise InvalidConfig("saturation must lie in (0, 1]")
        if self.order not in ORDERS:
            raise InvalidConfig(f"order must be one of {ORDERS}")


@dataclass(frozen=True)
class GrowthCurve:
    """Counts for one eps; ``fit`` is the ``(first, last)`` n used for the slope (None if too short)."""

    epsilon: float
    rows: tuple[tuple[int, int, float], ...]
    estimate: float
    fit: tuple[int, int] | None = None

    @property
    def counts(self) -> dict[int, int]:
        return {n: c for n, c, _ in self.rows}


@dataclass(frozen=True)
class EntropyEstimate:
    curves: tuple[GrowthCurve, ...]
    h_est: float
    degenerate: bool = False
    restricted: bool = False
    notes: tuple[str, ...] = field(default=())

    @property
    def per_eps_slopes(self) -> dict[float, float]:
        return {c.epsilon: c.estimate for c in self.curves}


def _slope(ns: np.ndarray, counts: np.ndarray) -> float:
    y = np.log(counts.astype(float))
    x = ns.astype(float)
    xm = x.mean()
    return float(((x - xm) * (y - y.mean())).sum() / ((x - xm) ** 2).sum())


def fit_window(counts: np.ndarray, n_min: int, n_max: int, cap: float) -> tuple[int, int] | None:
    """``[n_min, last n <= n_max with count <= cap]``, or None when under three points."""
    last = n_min - 1
    for n in range(n_min, n_max + 1):
        if counts[n - 1] > cap:
            break
        last = n
    return (n_min, last) if last - n_min >= 2 else None


def estimate_entropy(sys: SystemModel, config: EstimatorConfig) -> EntropyEstimate:
    """Per-eps growth curves and the entropy estimate.

    Each curve's estimate is the least-squares slope of ``log count`` against
    ``n`` over ``[n_min, n_max]``, cut short where counts exceed
    ``saturation`` times the number of evaluation points.  ``h_est`` is the
    largest slope over the eps sweep.  When every count in the window is 1
    the estimate is 0 and ``degenerate`` is set.
    """
    pts = _points(sys, config.grid_size, config.restrict_to, config.order)
    orbits = sys.orbit_array(pts, config.n_max)
    lo, hi = sys.domain.as_floats()
    cap = config.saturation * len(pts)
    curves = []
    all_one = True
    notes = []
    for eps in config.epsilons:
        counts = greedy_counts(orbits, eps, config.n_max, lo, hi)
        all_one &= bool((counts[config.n_min - 1 :] == 1).all())
        rows = tuple((int(n), int(c), math.log(c) / n) for n, c in zip(range(1, config.n_max + 1), counts))
        win = fit_window(counts, config.n_min, config.n_max, cap)
        if win is None:
            notes.append(f"eps={eps:g}: counts saturate before n_min + 2; no slope")
            est = math.nan
        else:
            ns = np.arange(win[0], win[1] + 1)
            est = _slope(ns, counts[win[0] - 1 : win[1]])
            if win[1] < config.n_max:
                notes.append(f"eps={eps:g}: fit stops at n={win[1]} (saturation)")
        curves.append(GrowthCurve(eps, rows, est, win))
        log.debug("eps=%g counts=%s", eps, counts.tolist())
    restricted = config.restrict_to is not None
    if restricted:
        notes.append("restricted estimate: separated subsets of the given points approximate the entropy on that set")
    if all_one:
        notes.append("degenerate window: every count equals 1")
        return EntropyEstimate(tuple(curves), 0.0, True, restricted, tuple(notes))
    slopes = [c.estimate for c in curves if c.fit is not None]
    if not slopes:
        raise NoConvergence("every growth curve saturates inside the window", saturation=config.saturation)
    return EntropyEstimate(tuple(curves), max(slopes), False, restricted, tuple(notes))
