"""Non-recombining binomial market with a unique martingale measure.

Paths are indexed ``0 .. 2**N - 1``.  Bit ``N - 1 - t`` of the index is the
move at step ``t`` (0 = up, 1 = down), so path 0 is all-up and the node a
path visits at step ``t`` has index ``path_id >> (N - t)`` within that level.
All prices are stored discounted by ``(1 + rho) ** t``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ArbitrageError, CapacityError, DomainError

MAX_STEPS = 16


@dataclass(frozen=True)
class LatticeParams:
    s0: float
    u: float
    d: float
    rho: float
    steps: int
    p_up: float

    def check(self, max_steps: int = MAX_STEPS) -> None:
        """Raise if the parameters do not describe an arbitrage-free lattice."""
        if not self.s0 > 0:
            raise DomainError(f"s0 must be positive, got {self.s0}")
        if not (0 < self.d < 1 + self.rho < self.u):
            raise ArbitrageError(
                f"no-arbitrage requires 0 < d < 1 + rho < u; "
                f"got d={self.d}, 1+rho={1 + self.rho}, u={self.u}"
            )
        if not (0 < self.p_up < 1):
            raise DomainError(f"p_up must lie in (0, 1), got {self.p_up}")
        if int(self.steps) != self.steps or self.steps < 1:
            raise DomainError(f"steps must be an integer >= 1, got {self.steps}")
        if self.steps > max_steps:
            raise CapacityError(
                f"steps={self.steps} exceeds the cap of {max_steps} "
                f"(non-recombining tree has 2**steps paths)"
            )

    @property
    def q(self) -> float:
        """Risk-neutral up probability."""
        return (1 + self.rho - self.d) / (self.u - self.d)


@dataclass(frozen=True)
class MarketPath:
    id: int
    moves: str  # 'u'/'d' per step
    prices: tuple[float, ...]  # discounted, length N + 1
    p: float
    r: float


def prefix_label(index: int, step: int) -> str:
    """Move string of the node with the given level index."""
    if step == 0:
        return ""
    return format(index, f"0{step}b").replace("0", "u").replace("1", "d")


@dataclass
class Lattice:
    params: LatticeParams
    q: float
    p: np.ndarray  # physical path probabilities, shape (2**N,)
    r: np.ndarray  # risk-neutral path probabilities
    node_prices: list[np.ndarray]  # discounted price per level, level t has 2**t nodes

    @property
    def steps(self) -> int:
        return self.params.steps

    @property
    def n_paths(self) -> int:
        return self.p.shape[0]

    @property
    def terminal_prices(self) -> np.ndarray:
        return self.node_prices[-1]

    @property
    def discount(self) -> float:
        """Factor turning a nominal time-T amount into a discounted one."""
        return (1 + self.params.rho) ** (-self.steps)

    def prefix_index(self, step: int) -> np.ndarray:
        """Node index at ``step`` for every path."""
        return np.arange(self.n_paths) >> (self.steps - step)

    def path(self, path_id: int) -> MarketPath:
        n = self.steps
        prices = tuple(
            float(self.node_prices[t][path_id >> (n - t)]) for t in range(n + 1)
        )
        return MarketPath(
            id=path_id,
            moves=prefix_label(path_id, n),
            prices=prices,
            p=float(self.p[path_id]),
            r=float(self.r[path_id]),
        )

    def paths(self) -> list[MarketPath]:
        return [self.path(i) for i in range(self.n_paths)]


def build_lattice(params: LatticeParams, max_steps: int = MAX_STEPS) -> Lattice:
    params.check(max_steps)
    n = int(params.steps)
    q = params.q
    up_disc = params.u / (1 + params.rho)
    down_disc = params.d / (1 + params.rho)

    node_prices = [np.array([float(params.s0)])]
    for _ in range(n):
        prev = node_prices[-1]
        level = np.empty(2 * prev.shape[0])
        level[0::2] = prev * up_disc
        level[1::2] = prev * down_disc
        node_prices.append(level)

    ids = np.arange(2**n)
    downs = np.array([bin(i).count("1") for i in ids])
    ups = n - downs
    p = params.p_up**ups * (1 - params.p_up) ** downs
    r = q**ups * (1 - q) ** downs
    return Lattice(params=params, q=q, p=p, r=r, node_prices=node_prices)


def _terminal(lattice: Lattice, H) -> np.ndarray:
    H = np.asarray(H, dtype=float)
    if H.shape != (lattice.n_paths,):
        raise DomainError(
            f"terminal value needs shape ({lattice.n_paths},), got {H.shape}"
        )
    if not np.all(np.isfinite(H)):
        raise DomainError("terminal value must be finite")
    if np.any(H < 0):
        raise DomainError("terminal value must be nonnegative on every path")
    return H


def price(lattice: Lattice, H) -> float:
    """Risk-neutral price ``E^R[H]`` of a market-path claim."""
    H = _terminal(lattice, H)
    return math.fsum(lattice.r * H)


@dataclass
class Strategy:
    """Self-financing hedge on the market tree.

    ``positions[t][j]`` is the asset quantity held over ``(t, t+1]`` at node
    ``j`` of level ``t``; ``values[t][j]`` is the portfolio value there.
    """

    v0: float
    positions: list[np.ndarray]
    values: list[np.ndarray]
    meta: dict = field(default_factory=dict)

    @property
    def steps(self) -> int:
        return len(self.positions)

    @property
    def terminal_values(self) -> np.ndarray:
        return self.values[-1]

    def nodes(self):
        """Yield ``(step, prefix, position, value)`` for every node; terminal nodes carry no position."""
        n = self.steps
        for t in range(n + 1):
            for j, v in enumerate(self.values[t]):
                pos = float(self.positions[t][j]) if t < n else float("nan")
                yield t, prefix_label(j, t), pos, float(v)

    def rollforward(self, lattice: Lattice) -> np.ndarray:
        """Terminal wealth ``v0 + sum xi dX`` recomputed from positions alone."""
        wealth = np.full(lattice.n_paths, float(self.v0))
        for t in range(lattice.steps):
            idx = lattice.prefix_index(t)
            nxt = lattice.prefix_index(t + 1)
            dx = lattice.node_prices[t + 1][nxt] - lattice.node_prices[t][idx]
            wealth = wealth + self.positions[t][idx] * dx
        return wealth

    def self_financing_gap(self, lattice: Lattice) -> float:
        """Largest relative violation of ``V_{t+1} = V_t + xi (X_{t+1} - X_t)``."""
        worst = 0.0
        for t in range(lattice.steps):
            child = np.arange(2 ** (t + 1))
            parent = child >> 1
            dx = lattice.node_prices[t + 1][child] - lattice.node_prices[t][parent]
            pred = self.values[t][parent] + self.positions[t][parent] * dx
            actual = self.values[t + 1]
            gap = np.abs(pred - actual) / np.maximum(1.0, np.abs(actual))
            worst = max(worst, float(gap.max()))
        return worst

    def min_value(self) -> float:
        return min(float(v.min()) for v in self.values)


def replicate(lattice: Lattice, H) -> Strategy:
    """Backward-induction replication of a terminal market-path claim."""
    H = _terminal(lattice, H)
    q = lattice.q
    n = lattice.steps
    values: list[np.ndarray] = [None] * (n + 1)  # type: ignore[list-item]
    positions: list[np.ndarray] = [None] * n  # type: ignore[list-item]
    values[n] = H.copy()
    for t in range(n - 1, -1, -1):
        v_up = values[t + 1][0::2]
        v_down = values[t + 1][1::2]
        x_up = lattice.node_prices[t + 1][0::2]
        x_down = lattice.node_prices[t + 1][1::2]
        values[t] = q * v_up + (1 - q) * v_down
        positions[t] = (v_up - v_down) / (x_up - x_down)
    return Strategy(v0=float(values[0][0]), positions=positions, values=values)


def zero_strategy(lattice: Lattice) -> Strategy:
    n = lattice.steps
    return Strategy(
        v0=0.0,
        positions=[np.zeros(2**t) for t in range(n)],
        values=[np.zeros(2**t) for t in range(n + 1)],
    )
