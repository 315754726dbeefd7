"""Finite non-market information revealed at discrete tree steps."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, DomainError

MAX_SIGNAL_PATHS = 100_000
PROB_TOL = 1e-12

ALIVE = "alive"
DEAD = "dead"


@dataclass(frozen=True)
class SignalModel:
    """Markov chain of opaque states observed at ``times``.

    ``states[0]`` is the single known state at step 0 and ``states[i]`` the
    possible states revealed at ``times[i-1]``.  ``transitions[i]`` has shape
    ``(len(states[i]), len(states[i+1]))``.
    """

    times: tuple[int, ...]
    states: tuple[tuple[str, ...], ...]
    transitions: tuple[np.ndarray, ...]

    def __post_init__(self):
        n = len(self.times)
        if any(t < 1 for t in self.times) or any(
            b <= a for a, b in zip(self.times, self.times[1:])
        ):
            raise DomainError(f"signal times must be strictly increasing and >= 1: {self.times}")
        if len(self.states) != n + 1 or len(self.transitions) != n:
            raise DomainError("need one state set per time (plus the initial one) and one transition per interval")
        if len(self.states[0]) != 1:
            raise DomainError("the initial state at step 0 must be unique")
        for i, mat in enumerate(self.transitions):
            mat = np.asarray(mat, dtype=float)
            shape = (len(self.states[i]), len(self.states[i + 1]))
            if mat.shape != shape:
                raise DomainError(f"transition {i} has shape {mat.shape}, expected {shape}")
            if np.any(mat < 0) or np.any(mat > 1):
                raise DomainError(f"transition {i} has entries outside [0, 1]")
            if np.any(np.abs(mat.sum(axis=1) - 1) > PROB_TOL):
                raise DomainError(f"rows of transition {i} must sum to 1")

    @property
    def n_times(self) -> int:
        return len(self.times)


@dataclass(frozen=True)
class SignalPath:
    id: int
    states: tuple[str, ...]
    pi: float


def chain_model(times, states, transitions) -> SignalModel:
    return SignalModel(
        times=tuple(int(t) for t in times),
        states=tuple(tuple(str(s) for s in level) for level in states),
        transitions=tuple(np.asarray(m, dtype=float) for m in transitions),
    )


def mortality_model(n_periods: int, death_probs, times=None) -> SignalModel:
    """Two-state absorbing survival chain observed at ``times`` (default ``1..n_periods``)."""
    death_probs = [float(q) for q in death_probs]
    if len(death_probs) != n_periods:
        raise DomainError(f"expected {n_periods} death probabilities, got {len(death_probs)}")
    for q in death_probs:
        if not 0.0 <= q <= 1.0:
            raise DomainError(f"death probability {q} outside [0, 1]")
    if times is None:
        times = range(1, n_periods + 1)
    times = tuple(int(t) for t in times)
    if len(times) != n_periods:
        raise DomainError("one observation time per period is required")

    states = ((ALIVE,),) + ((ALIVE, DEAD),) * n_periods
    transitions = []
    for i, q in enumerate(death_probs):
        if i == 0:
            transitions.append(np.array([[1 - q, q]]))
        else:
            transitions.append(np.array([[1 - q, q], [0.0, 1.0]]))
    return SignalModel(times=times, states=states, transitions=tuple(transitions))


def enumerate_signal_paths(
    model: SignalModel, prune: bool = True, max_paths: int = MAX_SIGNAL_PATHS
) -> list[SignalPath]:
    """All state sequences in lexicographic order of state indices."""
    frontier: list[tuple[tuple[int, ...], float]] = [((0,), 1.0)]
    for i, mat in enumerate(model.transitions):
        mat = np.asarray(mat)
        nxt = []
        for idx, pi in frontier:
            row = mat[idx[-1]]
            for j, pr in enumerate(row):
                w = pi * float(pr)
                if prune and w == 0.0:
                    continue
                nxt.append((idx + (j,), w))
        if len(nxt) > max_paths:
            raise CapacityError(
                f"signal model has more than {max_paths} paths by time index {i + 1}"
            )
        frontier = nxt

    return [
        SignalPath(
            id=k,
            states=tuple(model.states[i + 1][j] for i, j in enumerate(idx[1:])),
            pi=pi,
        )
        for k, (idx, pi) in enumerate(frontier)
    ]
