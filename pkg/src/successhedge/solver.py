"""Budget-constrained maximisation of the expected success ratio.

For a market path ``x`` the best achievable success ratio as a function of a
market-measurable target ``g = Gamma(x)`` is concave and piecewise linear with
kinks at the positive payoff levels ``d_1 < ... < d_m`` of that path.  Its
slope per unit of risk-neutral cost on ``(d_{j-1}, d_j)`` is

    W(x, d_j) = p(x) / r(x) * sum_{s: D(x,s) >= d_j} pi(s) / D(x,s)

and the threshold target ``f(k)(x) = max({0} u {d_j : W(x, d_j) >= k})``.
Filling segments in decreasing slope order is the exact optimum of the
resulting continuous knapsack.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .claims import Claim
from .errors import DomainError
from .scenarios import ScenarioSpace

BUDGET_TOL = 1e-12


@dataclass(frozen=True)
class SlopeSegment:
    path: int
    lower: float
    upper: float
    slope: float
    cost_per_unit: float

    @property
    def cost(self) -> float:
        return self.cost_per_unit * (self.upper - self.lower)


@dataclass(frozen=True)
class ModifiedClaim:
    gamma: np.ndarray  # per market path


@dataclass(frozen=True)
class SolverResult:
    gamma: ModifiedClaim
    k: float
    budget: float
    budget_used: float
    success_ratio: float
    ratio_table: np.ndarray  # per-scenario success ratio phi


def payoff_levels(space: ScenarioSpace, claim: Claim) -> list[np.ndarray]:
    """Sorted distinct positive payoff levels per market path."""
    levels = []
    for x in range(space.n_market):
        d = claim.values[space.market == x]
        levels.append(np.unique(d[d > 0]))
    return levels


def upper_payoff(space: ScenarioSpace, claim: Claim) -> np.ndarray:
    """Pathwise maximum of the claim over positive-probability signals."""
    out = np.zeros(space.n_market)
    np.maximum.at(out, space.market, claim.values)
    return out


def compute_slopes(space: ScenarioSpace, claim: Claim) -> list[SlopeSegment]:
    lat = space.lattice
    pi = np.array([sp.pi for sp in space.signal_paths])
    segments = []
    for x in range(space.n_market):
        mask = space.market == x
        d = claim.values[mask]
        w = pi[space.signal[mask]]
        pos = d > 0
        d, w = d[pos], w[pos]
        if d.size == 0:
            continue
        lr = lat.p[x] / lat.r[x]
        lower = 0.0
        for level in np.unique(d):
            slope = float(lr) * math.fsum(w[d >= level] / d[d >= level])
            segments.append(SlopeSegment(x, lower, float(level), slope, float(lat.r[x])))
            lower = float(level)
    return segments


def compute_f(space: ScenarioSpace, claim: Claim, k: float) -> ModifiedClaim:
    if not k > 0:
        raise DomainError(f"slope threshold k must be positive, got {k}")
    gamma = np.zeros(space.n_market)
    for seg in compute_slopes(space, claim):
        if seg.slope >= k:
            gamma[seg.path] = max(gamma[seg.path], seg.upper)
    return ModifiedClaim(gamma)


def ratio_table(space: ScenarioSpace, claim: Claim, terminal) -> np.ndarray:
    """Per-scenario success ratio for a market-path terminal wealth; D = 0 counts as success."""
    v = np.asarray(terminal, dtype=float)[space.market]
    D = claim.values
    phi = np.ones(space.size)
    pos = D > 0
    phi[pos] = np.minimum(1.0, v[pos] / D[pos])
    return phi


def success_ratio(space: ScenarioSpace, claim: Claim, gamma: ModifiedClaim) -> float:
    g = np.asarray(gamma.gamma, dtype=float)
    if np.any(g < 0):
        raise DomainError("modified claim must be nonnegative")
    return clip_unit(math.fsum(space.p * ratio_table(space, claim, g)))


def solve_budget(space: ScenarioSpace, claim: Claim, budget: float) -> SolverResult:
    """Water-fill the budget over slope segments; exact optimum over market-measurable targets."""
    if not budget >= 0:
        raise DomainError(f"budget must be nonnegative, got {budget}")
    segments = sorted(
        compute_slopes(space, claim), key=lambda s: (-s.slope, s.path, s.upper)
    )
    gamma = np.zeros(space.n_market)
    spent = _NeumaierSum()
    k = 0.0
    for seg in segments:
        remaining = budget - spent.value
        # rounding residue below tolerance does not open a new segment
        if remaining <= BUDGET_TOL:
            break
        if spent.value + seg.cost <= budget + BUDGET_TOL:
            gamma[seg.path] = seg.upper
            spent.add(seg.cost)
            k = seg.slope
            continue
        gamma[seg.path] = min(seg.upper, seg.lower + remaining / seg.cost_per_unit)
        spent.add(seg.cost_per_unit * (gamma[seg.path] - seg.lower))
        k = seg.slope
        break
    else:
        k = 0.0

    mc = ModifiedClaim(gamma)
    phi = ratio_table(space, claim, gamma)
    return SolverResult(
        gamma=mc,
        k=k,
        budget=float(budget),
        budget_used=math.fsum(space.lattice.r * gamma),
        success_ratio=clip_unit(math.fsum(space.p * phi)),
        ratio_table=phi,
    )


def clip_unit(x: float) -> float:
    # path probabilities carry rounding, so their total can exceed 1 by an ulp
    return min(1.0, max(0.0, x))


class _NeumaierSum:
    """Compensated running sum."""

    def __init__(self):
        self._s = 0.0
        self._c = 0.0

    def add(self, x: float) -> None:
        t = self._s + x
        if abs(self._s) >= abs(x):
            self._c += (self._s - t) + x
        else:
            self._c += (x - t) + self._s
        self._s = t

    @property
    def value(self) -> float:
        return self._s + self._c
