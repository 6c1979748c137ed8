"""Verification of coupled expansion for a cover ``V_1, ..., V_N``.

Every check is exact: images of intervals under piecewise-linear maps are
computed piece by piece over rationals.  The system is checked for time
steps ``1..H``; with the periodic extension ``H`` equal to the period covers
every step, and with ``constant_tail`` ``H = len(steps)`` does.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import InputError, InvalidCover, NotATransitionMatrix, SizeMismatch
from .system_model import Interval, SystemModel, merge_intervals, to_fraction
from .transition_matrix import TransitionMatrix, log_spectral_radius, nu_bound


@dataclass(frozen=True)
class CoverConfig:
    sets: tuple[Interval, ...]
    horizon: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "sets", tuple(self.sets))
        if not self.sets:
            raise InvalidCover("a cover needs at least one set")
        if self.horizon is not None and self.horizon < 1:
            raise InvalidCover("horizon must be positive")
        order = sorted(range(len(self.sets)), key=lambda k: self.sets[k])
        for a, b in zip(order, order[1:]):
            if self.sets[b].lo < self.sets[a].hi:
                raise InvalidCover(f"sets {a + 1} and {b + 1} have overlapping interiors", pair=[a + 1, b + 1])

    @property
    def size(self) -> int:
        return len(self.sets)

    def horizon_for(self, sys: SystemModel) -> int:
        return self.horizon if self.horizon is not None else sys.default_horizon

    def check_against(self, sys: SystemModel) -> None:
        for k, V in enumerate(self.sets, start=1):
            if not sys.domain.contains_interval(V):
                raise InvalidCover(f"set {k} = {V} is not inside the domain {sys.domain}", set=k)

    def min_gap(self) -> Fraction:
        """Smallest distance between two different sets (0 if they touch)."""
        if len(self.sets) < 2:
            return Fraction(0)
        return min(
            self.sets[i].distance(self.sets[j])
            for i in range(len(self.sets))
            for j in range(i + 1, len(self.sets))
        )

    def is_disjoint(self) -> bool:
        return len(self.sets) < 2 or self.min_gap() > 0

    def covers(self, domain: Interval) -> bool:
        merged = merge_intervals(self.sets)
        return len(merged) == 1 and merged[0] == domain

    def index_of(self, x) -> int | None:
        """1-based index of the first set containing ``x``."""
        for k, V in enumerate(self.sets, start=1):
            if x in V:
                return k
        return None

    def to_json(self) -> dict:
        out = {"sets": [[str(V.lo), str(V.hi)] for V in self.sets]}
        if self.horizon is not None:
            out["horizon"] = self.horizon
        return out


def cover_from_json(obj: dict) -> CoverConfig:
    if not isinstance(obj, dict) or "sets" not in obj:
        raise InvalidCover("cover JSON needs a 'sets' field")
    sets = []
    for pair in obj["sets"]:
        if not isinstance(pair, list) or len(pair) != 2:
            raise InvalidCover("each set must be [left, right]")
        try:
            sets.append(Interval(to_fraction(pair[0]), to_fraction(pair[1])))
        except InputError as exc:
            raise InvalidCover(str(exc)) from exc
    horizon = obj.get("horizon")
    if horizon is not None and (not isinstance(horizon, int) or isinstance(horizon, bool)):
        raise InvalidCover("horizon must be an integer")
    return CoverConfig(tuple(sets), horizon)


@dataclass(frozen=True)
class Witness:
    """Covering violation: at step ``n``, ``f_n(V_i)`` misses ``point`` of ``V_j``."""

    n: int
    i: int
    j: int
    point: Fraction

    def to_json(self) -> dict:
        return {"n": self.n, "i": self.i, "j": self.j, "point": float(self.point)}


@dataclass(frozen=True)
class ExpansionConstants:
    lam: Fraction | None
    mu: Fraction | None
    max_sample_violation: float = 0.0

    @property
    def expanding(self) -> bool:
        """True when the lower expansion constant certifies ``lam > 1``."""
        return self.lam is not None and self.lam > 1


@dataclass(frozen=True)
class ExpansionReport:
    matrix: TransitionMatrix | None
    strict: bool
    min_gap: Fraction
    exact_covering: bool
    lambda_est: Fraction | None
    mu_est: Fraction | None
    witnesses: tuple[Witness, ...]
    horizon: int
    extension: str
    matrix_error: str | None = None

    @property
    def coupled_expanding(self) -> bool:
        return self.matrix is not None and not self.witnesses

    def to_json(self) -> dict:
        def num(x):
            return None if x is None else float(x)

        return {
            "matrix": None if self.matrix is None else self.matrix.to_json(),
            "matrix_error": self.matrix_error,
            "coupled_expanding": self.coupled_expanding,
            "strict": self.strict,
            "min_gap": float(self.min_gap),
            "exact_covering": self.exact_covering,
            "lambda_est": num(self.lambda_est),
            "mu_est": num(self.mu_est),
            "horizon": self.horizon,
            "extension": self.extension,
            "witnesses": [w.to_json() for w in self.witnesses],
        }


def _check_sizes(cfg: CoverConfig, A: TransitionMatrix) -> None:
    if A.size != cfg.size:
        raise SizeMismatch(f"matrix is {A.size}x{A.size} but the cover has {cfg.size} sets")


def _images(sys: SystemModel, cfg: CoverConfig, horizon: int) -> list[list[Interval]]:
    return [[sys.map(n).image(V) for V in cfg.sets] for n in range(1, horizon + 1)]


def covering_witnesses(sys: SystemModel, cfg: CoverConfig, A: TransitionMatrix) -> list[Witness]:
    """All ``(n, i, j)`` with ``a_ij = 1`` and ``f_n(V_i)`` not containing ``V_j``."""
    _check_sizes(cfg, A)
    cfg.check_against(sys)
    out = []
    for n, row in enumerate(_images(sys, cfg, cfg.horizon_for(sys)), start=1):
        for i, img in enumerate(row, start=1):
            for j in A.successors(i):
                V = cfg.sets[j - 1]
                if not img.contains_interval(V):
                    out.append(Witness(n, i, j, V.lo if V.lo < img.lo else V.hi))
    return sorted(out, key=lambda w: (w.n, w.i, w.j))


def _exact_covering(sys: SystemModel, cfg: CoverConfig, A: TransitionMatrix) -> bool:
    for row in _images(sys, cfg, cfg.horizon_for(sys)):
        for i, img in enumerate(row, start=1):
            union = merge_intervals(cfg.sets[j - 1] for j in A.successors(i))
            if union != [img]:
                return False
    return True


def verify_exact_covering(sys: SystemModel, cfg: CoverConfig, A: TransitionMatrix) -> bool:
    """``f_n(V_i)`` equals the union of the permitted ``V_j`` and the sets cover the domain."""
    _check_sizes(cfg, A)
    cfg.check_against(sys)
    return cfg.covers(sys.domain) and _exact_covering(sys, cfg, A)


def derive_matrix(sys: SystemModel, cfg: CoverConfig) -> TransitionMatrix:
    """Largest ``A`` with ``f_n(V_i) ⊇ V_j`` whenever ``a_ij = 1``, for every checked step."""
    cfg.check_against(sys)
    N = cfg.size
    rows = [[1] * N for _ in range(N)]
    for row in _images(sys, cfg, cfg.horizon_for(sys)):
        for i, img in enumerate(row):
            for j, V in enumerate(cfg.sets):
                if not img.contains_interval(V):
                    rows[i][j] = 0
    for i in range(N):
        if not any(rows[i]):
            raise NotATransitionMatrix(f"V_{i + 1} covers no set at some step", row=i + 1)
    for j in range(N):
        if not any(rows[i][j] for i in range(N)):
            raise NotATransitionMatrix(f"V_{j + 1} is covered by no set at some step", column=j + 1)
    return TransitionMatrix(tuple(tuple(r) for r in rows))


def estimate_constants(sys: SystemModel, cfg: CoverConfig, samples: int = 1000, seed: int = 0) -> ExpansionConstants:
    """Exact expansion and Lipschitz constants of the maps on the cover sets.

    ``mu`` is the largest absolute slope met on any ``V_i``.  ``lam`` is the
    smallest absolute slope, provided each ``f_n`` is strictly monotone on
    each ``V_i``; a fold (slopes of both signs, or a flat piece) inside a set
    makes the lower constant 0.  ``samples`` random pairs re-check both
    inequalities in floating point; the worst violation is reported.
    """
    if samples < 2:
        raise ValueError("samples must be at least 2")
    cfg.check_against(sys)
    horizon = cfg.horizon_for(sys)
    lam: Fraction | None = None
    mu: Fraction | None = None
    for n in range(1, horizon + 1):
        f = sys.map(n)
        for V in cfg.sets:
            slopes = f.slopes_on(V)
            if not slopes:
                continue
            mags = [abs(s) for s in slopes]
            monotone = all(s > 0 for s in slopes) or all(s < 0 for s in slopes)
            low = min(mags) if monotone else Fraction(0)
            lam = low if lam is None else min(lam, low)
            mu = max(mags) if mu is None else max(mu, max(mags))

    violation = 0.0
    wide = [V for V in cfg.sets if V.length > 0]
    if wide and lam is not None:
        rng = np.random.default_rng(seed)
        lam_f, mu_f = float(lam), float(mu)
        for _ in range(samples):
            V = wide[int(rng.integers(len(wide)))]
            n = int(rng.integers(1, horizon + 1))
            lo, hi = V.as_floats()
            x, y = rng.uniform(lo, hi, size=2)
            d = abs(x - y)
            fd = abs(sys.map(n)(float(x)) - sys.map(n)(float(y)))
            violation = max(violation, lam_f * d - fd, fd - mu_f * d)
    return ExpansionConstants(lam, mu, max(violation, 0.0))


def verify_expansion(sys: SystemModel, cfg: CoverConfig, A: TransitionMatrix) -> ExpansionReport:
    """Check that the system is ``A``-coupled-expanding in the cover over the horizon."""
    _check_sizes(cfg, A)
    cfg.check_against(sys)
    witnesses = covering_witnesses(sys, cfg, A)
    consts = estimate_constants(sys, cfg)
    gap = cfg.min_gap()
    return ExpansionReport(
        matrix=A,
        strict=cfg.size >= 2 and gap > 0,
        min_gap=gap,
        exact_covering=verify_exact_covering(sys, cfg, A),
        lambda_est=consts.lam,
        mu_est=consts.mu,
        witnesses=tuple(witnesses),
        horizon=cfg.horizon_for(sys),
        extension=sys.extension,
    )


def expansion_report(sys: SystemModel, cfg: CoverConfig, A: TransitionMatrix | None = None) -> ExpansionReport:
    """Like :func:`verify_expansion`, deriving the matrix when none is given."""
    if A is not None:
        return verify_expansion(sys, cfg, A)
    try:
        A = derive_matrix(sys, cfg)
    except NotATransitionMatrix as exc:
        consts = estimate_constants(sys, cfg)
        gap = cfg.min_gap()
        # report every failed inclusion against the full matrix
        full = TransitionMatrix.full(cfg.size)
        return ExpansionReport(
            matrix=None,
            strict=cfg.size >= 2 and gap > 0,
            min_gap=gap,
            exact_covering=False,
            lambda_est=consts.lam,
            mu_est=consts.mu,
            witnesses=tuple(covering_witnesses(sys, cfg, full)),
            horizon=cfg.horizon_for(sys),
            extension=sys.extension,
            matrix_error=str(exc),
        )
    return verify_expansion(sys, cfg, A)


def horizon_is_complete(sys: SystemModel, cfg: CoverConfig) -> bool:
    """Whether checking steps ``1..H`` settles the condition for every step."""
    return cfg.horizon_for(sys) >= sys.default_horizon


@dataclass(frozen=True)
class BoundCertificate:
    """Outcome of checking the hypotheses for an entropy bound."""

    kind: str
    log_rho: float
    log_nu: float | None
    certified: bool
    failures: tuple[str, ...] = ()
    report: ExpansionReport | None = None
    notes: tuple[str, ...] = field(default=())


def lower_bound(A: TransitionMatrix, sys: SystemModel | None = None, cfg: CoverConfig | None = None) -> BoundCertificate:
    """``log rho(A)`` and ``log nu`` as lower bounds for the entropy.

    With a system and cover the bound is certified only when the system is
    ``A``-coupled-expanding in pairwise disjoint closed sets.
    """
    log_rho = log_spectral_radius(A)
    log_nu = math.log(nu_bound(A))
    if sys is None or cfg is None:
        return BoundCertificate("lower", log_rho, log_nu, certified=False, notes=("matrix-only",))
    report = verify_expansion(sys, cfg, A)
    failures = []
    if report.witnesses:
        failures.append("coupled-expansion")
    if not cfg.is_disjoint():
        failures.append("disjoint")
    if not horizon_is_complete(sys, cfg):
        failures.append("horizon")
    return BoundCertificate("lower", log_rho, log_nu, certified=not failures, failures=tuple(failures), report=report)


def upper_bound(A: TransitionMatrix, sys: SystemModel, cfg: CoverConfig) -> BoundCertificate:
    """``log rho(A)`` as an upper bound for the entropy of the whole system.

    Requires the sets to cover the domain, certified expansion ``lam > 1``
    and exact covering ``f_n(V_i) = ∪_{a_ij = 1} V_j``.  Failed conditions
    are listed in that order.
    """
    _check_sizes(cfg, A)
    cfg.check_against(sys)
    report = verify_expansion(sys, cfg, A)
    failures = []
    if not cfg.covers(sys.domain):
        failures.append("covering")
    if report.lambda_est is None or report.lambda_est <= 1:
        failures.append("(ii_a)")
    if not _exact_covering(sys, cfg, A):
        failures.append("(i_a)")
    if not horizon_is_complete(sys, cfg):
        failures.append("horizon")
    return BoundCertificate("upper", log_spectral_radius(A), None, certified=not failures, failures=tuple(failures), report=report)
