"""Equity-linked payoffs as nonnegative tables over the scenario space.

Payoffs are time-T amounts stored discounted.  Benefits paid earlier must be
converted to time-T equivalents by the caller.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DomainError
from .scenarios import ScenarioSpace
from .signals import ALIVE


@dataclass(frozen=True)
class Claim:
    values: np.ndarray
    description: str = ""

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if not np.all(np.isfinite(v)):
            raise DomainError("claim values must be finite")
        if np.any(v < 0):
            raise DomainError("claim values must be nonnegative")
        object.__setattr__(self, "values", v)


def _alive_at_T(space: ScenarioSpace, alive_state: str) -> np.ndarray:
    # no signal times at all: nobody can be reported dead
    return np.array([s is None or s == alive_state for s in space.final_state()])


def unit_linked_call(space: ScenarioSpace, strike: float, alive_state: str = ALIVE) -> Claim:
    """Discounted ``(S_T - strike)^+`` paid only if the holder is alive at T."""
    if strike < 0:
        raise DomainError(f"strike must be nonnegative, got {strike}")
    lat = space.lattice
    nominal = lat.terminal_prices / lat.discount
    payoff = np.maximum(nominal - strike, 0.0) * lat.discount
    values = payoff[space.market] * _alive_at_T(space, alive_state)
    return Claim(values, f"unit-linked call, strike {strike}")


def pure_endowment(space: ScenarioSpace, benefit: float, alive_state: str = ALIVE) -> Claim:
    if benefit < 0:
        raise DomainError(f"benefit must be nonnegative, got {benefit}")
    values = benefit * space.lattice.discount * _alive_at_T(space, alive_state)
    return Claim(values.astype(float), f"pure endowment, benefit {benefit}")


def claim_from_table(space: ScenarioSpace, table, description: str = "table") -> Claim:
    """Build a claim from ``{(market_path_id, signal_path_id): value}``; missing keys are 0."""
    lookup = {k: i for i, k in enumerate(space.keys())}
    values = np.zeros(space.size)
    for key, value in dict(table).items():
        key = (int(key[0]), int(key[1]))
        if key not in lookup:
            raise DomainError(f"unknown scenario {key}")
        value = float(value)
        if value < 0:
            raise DomainError(f"negative payoff {value} at scenario {key}")
        values[lookup[key]] = value
    return Claim(values, description)


def read_claim_csv(space: ScenarioSpace, path) -> Claim:
    """Load ``market_path_id,signal_path_id,value`` rows."""
    table = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = {"market_path_id", "signal_path_id", "value"} - set(reader.fieldnames or ())
        if missing:
            raise DomainError(f"{path}: missing columns {sorted(missing)}")
        for row in reader:
            table[(int(row["market_path_id"]), int(row["signal_path_id"]))] = float(row["value"])
    return claim_from_table(space, table, description=f"table {Path(path).name}")


def write_claim_csv(space: ScenarioSpace, claim: Claim, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["market_path_id", "signal_path_id", "value"])
        for (m, s), v in zip(space.keys(), claim.values):
            w.writerow([m, s, repr(float(v))])
