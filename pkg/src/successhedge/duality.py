"""Parametric martingale measures attaining the superhedging price.

For a claim ``M`` and a market-path level ``K`` with ``R(M >= K | x) > 0`` the
measure ``R^{alpha,K}`` has density ``prod_i A_i`` with respect to the
extended measure, where

    A_i = alpha + (1 - alpha) * R(M >= K | F_{t_i}) / R(M >= K | F^X_{t_i} v F_{t_{i-1}}).

On an atom where the denominator vanishes the numerator vanishes too and the
ratio is taken as 1; this keeps ``E^R[A_i | F^X_T v F_{t_{i-1}}] = 1`` and
hence the martingale property.

The identity ``E^{R^{0,M_bar}}[M] = E^R[M_bar]`` needs the set of signal
paths attaining the pathwise maximum to be the same on every market path, or
a single signal observed at maturity.  Otherwise the limit can fall short of
``E^R[M_bar]``, and the cheapest signal-adaptive superhedge may cost less too
(see ``adaptive_superhedge_price``).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, MembershipError
from .scenarios import Field, ScenarioSpace, atom_average
from .superhedge import upper_envelope


@dataclass(frozen=True)
class DualMeasure:
    alpha: float
    K: np.ndarray  # per market path
    density: np.ndarray  # per scenario, dR^{alpha,K}/dR
    factors: np.ndarray  # shape (n_scenarios, n_signals)

    @property
    def equivalent(self) -> bool:
        return self.alpha > 0


def _event(space: ScenarioSpace, M: np.ndarray, K: np.ndarray) -> np.ndarray:
    return (M >= K[space.market]).astype(float)


def build_dual_measure(space: ScenarioSpace, M, K, alpha: float) -> DualMeasure:
    M = np.asarray(M, dtype=float)
    K = np.asarray(K, dtype=float)
    if M.shape != (space.size,):
        raise DomainError(f"M needs shape ({space.size},), got {M.shape}")
    if K.shape != (space.n_market,):
        raise DomainError(f"K needs shape ({space.n_market},), got {K.shape}")
    if not 0.0 <= alpha <= 1.0:
        raise DomainError(f"alpha must lie in [0, 1], got {alpha}")

    hit = _event(space, M, K)
    reach = np.bincount(space.market, weights=space.r * hit, minlength=space.n_market)
    bad = np.flatnonzero(reach <= 0)
    if bad.size:
        raise MembershipError(
            f"K exceeds every attainable value of M on market paths {bad.tolist()}"
        )

    n = space.n_signals
    factors = np.ones((space.size, n))
    for i in range(1, n + 1):
        num = atom_average(space.field_atoms(Field.SIGNAL_TIME, i), space.r, hit)
        den = atom_average(space.field_atoms(Field.PRE_SIGNAL, i), space.r, hit)
        ratio = np.ones(space.size)
        live = den > 0
        ratio[live] = num[live] / den[live]
        factors[:, i - 1] = alpha + (1.0 - alpha) * ratio
    density = np.prod(factors, axis=1)
    return DualMeasure(alpha=float(alpha), K=K, density=density, factors=factors)


def dual_expectation(space: ScenarioSpace, M, dual: DualMeasure) -> float:
    M = np.asarray(M, dtype=float)
    return math.fsum(space.r * dual.density * M)


def verify_martingale(space: ScenarioSpace, dual: DualMeasure, lattice=None) -> float:
    """Largest ``|E^Q[X_{t+1} | F_t] - X_t|`` over all atoms of the trading filtration."""
    if not dual.equivalent:
        raise DomainError("alpha = 0 gives a non-equivalent measure; martingale check needs alpha > 0")
    lattice = lattice or space.lattice
    n = lattice.steps
    q = space.r * dual.density
    worst = 0.0
    for t in range(n):
        labels = space.info_atoms(t)
        x_now = lattice.node_prices[t][space.market >> (n - t)]
        x_next = lattice.node_prices[t + 1][space.market >> (n - t - 1)]
        mass = np.bincount(labels, weights=q)
        moved = np.bincount(labels, weights=q * (x_next - x_now))
        worst = max(worst, float(np.max(np.abs(moved / mass))))
    return worst


def superhedge_price_via_duality(space: ScenarioSpace, M) -> float:
    M = np.asarray(M, dtype=float)
    if np.any(M < 0):
        raise DomainError("M must be nonnegative")
    return math.fsum(space.lattice.r * upper_envelope(space, M))


def adaptive_superhedge_price(space: ScenarioSpace, M) -> float:
    """Cheapest superhedge of ``M`` by strategies adapted to the full filtration.

    Backward induction on the atoms of ``F_t``: at each node the portfolio must
    dominate the worst signal revealed at t+1 after either market move.
    """
    M = np.asarray(M, dtype=float)
    lat = space.lattice
    n = lat.steps
    q = lat.q
    value = M.copy()
    for t in range(n - 1, -1, -1):
        # value is F_{t+1}-measurable; wealth at t+1 only knows F_t and the move
        move_down = (space.market >> (n - t - 1)) & 1
        labels = space.info_atoms(t)
        up = np.full(labels.max() + 1, -np.inf)
        down = np.full(labels.max() + 1, -np.inf)
        np.maximum.at(up, labels[move_down == 0], value[move_down == 0])
        np.maximum.at(down, labels[move_down == 1], value[move_down == 1])
        value = (q * up + (1 - q) * down)[labels]
    return float(value[0])
