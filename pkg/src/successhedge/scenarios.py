"""Joint market x signal probability space with physical and extended measures.

A sigma-field ``F^X_m v F_{t_j}`` is represented by the partition of the
scenario list into atoms sharing the same market prefix of length ``m`` and
the same first ``j`` signal states.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import CapacityError, DomainError
from .lattice import Lattice
from .signals import SignalModel, SignalPath, enumerate_signal_paths

MAX_SCENARIOS = 1_000_000


class Field(str, Enum):
    MARKET = "market"  # F^X_T
    SIGNAL_TIME = "signal_time"  # F_{t_i} = F^X_{t_i} v F_{t_i}
    PRE_SIGNAL = "pre_signal"  # F^X_{t_i} v F_{t_{i-1}}
    TERMINAL = "terminal"  # F_T, every scenario is its own atom


@dataclass
class ScenarioSpace:
    lattice: Lattice
    model: SignalModel
    signal_paths: list[SignalPath]
    market: np.ndarray  # market path id per scenario
    signal: np.ndarray  # signal path id (index into signal_paths) per scenario
    p: np.ndarray
    r: np.ndarray
    _prefix_codes: list[np.ndarray]  # per signal count j: prefix code per signal path

    @property
    def size(self) -> int:
        return self.p.shape[0]

    @property
    def n_market(self) -> int:
        return self.lattice.n_paths

    @property
    def signal_times(self) -> tuple[int, ...]:
        return self.model.times

    @property
    def n_signals(self) -> int:
        return self.model.n_times

    @property
    def dP_dR(self) -> np.ndarray:
        return self.lattice.p[self.market] / self.lattice.r[self.market]

    @property
    def dR_dP(self) -> np.ndarray:
        return self.lattice.r[self.market] / self.lattice.p[self.market]

    def index(self, market_id: int, signal_id: int) -> int:
        hits = np.flatnonzero((self.market == market_id) & (self.signal == signal_id))
        if hits.size == 0:
            raise KeyError((market_id, signal_id))
        return int(hits[0])

    def keys(self):
        return list(zip(self.market.tolist(), self.signal.tolist()))

    def final_state(self) -> list[str | None]:
        """Last revealed signal state per scenario (None without signals)."""
        last = [sp.states[-1] if sp.states else None for sp in self.signal_paths]
        return [last[s] for s in self.signal]

    def atoms(self, market_steps: int, signal_count: int) -> np.ndarray:
        """Atom label per scenario for ``F^X_{market_steps} v F_{t_{signal_count}}``."""
        n = self.lattice.steps
        if not 0 <= market_steps <= n or not 0 <= signal_count <= self.n_signals:
            raise DomainError(
                f"unsupported field ({market_steps} market steps, {signal_count} signals)"
            )
        mkt = self.market >> (n - market_steps)
        sig = self._prefix_codes[signal_count][self.signal]
        _, labels = np.unique(mkt * (sig.max() + 1) + sig, return_inverse=True)
        return labels.reshape(-1)

    def field_atoms(self, field: Field | str, i: int | None = None) -> np.ndarray:
        field = Field(field)
        if field is Field.MARKET:
            return self.atoms(self.lattice.steps, 0)
        if field is Field.TERMINAL:
            return self.atoms(self.lattice.steps, self.n_signals)
        if i is None or not 0 <= i <= self.n_signals:
            raise DomainError(f"{field.value} needs a signal index in [0, {self.n_signals}]")
        t_i = 0 if i == 0 else self.signal_times[i - 1]
        if field is Field.SIGNAL_TIME:
            return self.atoms(t_i, i)
        if i == 0:
            raise DomainError("pre_signal field is defined for i >= 1")
        return self.atoms(t_i, i - 1)

    def info_atoms(self, step: int) -> np.ndarray:
        """Atoms of the trading filtration ``F_t = F^X_t v F_{t_i}`` with ``t_i <= t``."""
        revealed = sum(1 for t in self.signal_times if t <= step)
        return self.atoms(step, revealed)

    def weights(self, measure: str) -> np.ndarray:
        if measure == "R":
            return self.r
        if measure == "P":
            return self.p
        raise DomainError(f"unknown measure {measure!r}")

    def expectation(self, M, measure: str = "R") -> float:
        M = np.asarray(M, dtype=float)
        return math.fsum(self.weights(measure) * M)


def _prefix_codes(paths: list[SignalPath], n: int) -> list[np.ndarray]:
    codes = []
    for j in range(n + 1):
        seen: dict[tuple[str, ...], int] = {}
        codes.append(
            np.array([seen.setdefault(sp.states[:j], len(seen)) for sp in paths], dtype=np.int64)
        )
    return codes


def build_scenario_space(
    lattice: Lattice, model: SignalModel, max_scenarios: int = MAX_SCENARIOS
) -> ScenarioSpace:
    if model.times and model.times[-1] > lattice.steps:
        raise DomainError(
            f"signal time {model.times[-1]} lies beyond the horizon of {lattice.steps} steps"
        )
    paths = [sp for sp in enumerate_signal_paths(model) if sp.pi > 0]
    count = lattice.n_paths * len(paths)
    if count > max_scenarios:
        raise CapacityError(f"{count} scenarios exceed the cap of {max_scenarios}")

    market = np.repeat(np.arange(lattice.n_paths), len(paths))
    signal = np.tile(np.arange(len(paths)), lattice.n_paths)
    pi = np.array([sp.pi for sp in paths])
    p = lattice.p[market] * pi[signal]
    r = lattice.r[market] * pi[signal]
    return ScenarioSpace(
        lattice=lattice,
        model=model,
        signal_paths=paths,
        market=market,
        signal=signal,
        p=p,
        r=r,
        _prefix_codes=_prefix_codes(paths, model.n_times),
    )


def atom_average(labels: np.ndarray, weights: np.ndarray, M: np.ndarray) -> np.ndarray:
    """Weighted average of ``M`` over each atom, broadcast back to scenarios."""
    mass = np.bincount(labels, weights=weights)
    if np.any(mass <= 0):
        raise DomainError("an atom of the conditioning field has zero probability")
    total = np.bincount(labels, weights=weights * M)
    return (total / mass)[labels]


def cond_expectation(
    space: ScenarioSpace,
    M,
    field: Field | str,
    i: int | None = None,
    measure: str = "R",
) -> np.ndarray:
    """Conditional expectation of ``M`` on one of the supported sigma-fields."""
    M = np.asarray(M, dtype=float)
    if M.shape != (space.size,):
        raise DomainError(f"random variable needs shape ({space.size},), got {M.shape}")
    labels = space.field_atoms(field, i)
    return atom_average(labels, space.weights(measure), M)
