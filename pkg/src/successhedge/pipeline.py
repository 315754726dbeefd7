"""End-to-end run: build, solve, hedge, verify, report."""
from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .claims import Claim, pure_endowment, read_claim_csv, unit_linked_call, write_claim_csv
from .config import RunConfig
from .errors import CapacityError, HedgeError
from .lattice import Lattice, Strategy, build_lattice, prefix_label
from .oracle import RNG_ALGORITHM, brute_force_optimal, monte_carlo_eval
from .scenarios import MAX_SCENARIOS, ScenarioSpace, build_scenario_space
from .signals import SignalModel, chain_model, enumerate_signal_paths, mortality_model
from .solver import SolverResult, solve_budget
from .superhedge import build_optimal_strategy, upper_envelope, write_strategy_csv

log = logging.getLogger(__name__)

REPORT_FILE = "report.yaml"
GAMMA_FILE = "gamma.csv"
STRATEGY_FILE = "strategy.csv"
CLAIM_FILE = "claim.csv"


def signal_model(section: dict) -> SignalModel:
    if section["type"] == "mortality":
        probs = section["death_probs"]
        return mortality_model(len(probs), probs, section.get("times"))
    return chain_model(section["times"], section["states"], section["transitions"])


def make_claim(space: ScenarioSpace, section: dict, base_dir: Path = Path(".")) -> Claim:
    alive = section.get("alive_state", "alive")
    if section["type"] == "unit_linked_call":
        return unit_linked_call(space, section["strike"], alive)
    if section["type"] == "pure_endowment":
        return pure_endowment(space, section["benefit"], alive)
    return read_claim_csv(space, base_dir / section["path"])


def validate(config: RunConfig) -> list[str]:
    """Dry-run diagnostics; never raises for domain problems."""
    diags: list[str] = []
    try:
        config.market.check()
    except CapacityError as exc:
        diags.append(f"capacity: {exc}")
    except HedgeError as exc:
        diags.append(f"market: {exc}")
    try:
        model = signal_model(config.signals)
    except (HedgeError, ValueError, IndexError) as exc:
        diags.append(f"signals: {exc}")
        model = None
    if model is not None:
        if model.times and model.times[-1] > config.market.steps:
            diags.append(
                f"signals: time {model.times[-1]} is beyond the horizon of {config.market.steps} steps"
            )
        try:
            paths = enumerate_signal_paths(model)
            total = math.fsum(sp.pi for sp in paths)
            if abs(total - 1) > 1e-12:
                diags.append(f"signals: path probabilities sum to {total!r}, not 1")
            if not diags:
                count = 2 ** int(config.market.steps) * len(paths)
                if count > MAX_SCENARIOS:
                    diags.append(f"capacity: {count} scenarios exceed the cap of {MAX_SCENARIOS}")
        except CapacityError as exc:
            diags.append(f"capacity: {exc}")
    if not config.budget >= 0:
        diags.append(f"budget: must be nonnegative, got {config.budget}")
    claim = config.claim
    if claim["type"] == "unit_linked_call" and claim["strike"] < 0:
        diags.append("claim: strike must be nonnegative")
    if claim["type"] == "pure_endowment" and claim["benefit"] < 0:
        diags.append("claim: benefit must be nonnegative")
    if claim["type"] == "table" and not (config.base_dir / claim["path"]).is_file():
        diags.append(f"claim: table file {claim['path']} not found")
    return diags


@dataclass
class Report:
    budget: float
    v0_used: float
    superhedge_price_of_D: float
    k: float
    success_ratio: float
    gamma: np.ndarray
    config: dict
    oracle_ratio: float | None = None
    oracle_status: str = "not requested"
    mc_estimate: float | None = None
    mc_standard_error: float | None = None
    tool_version: str = __version__
    extras: dict = field(default_factory=dict)

    def to_dict(self, timestamp: str | None = None) -> dict:
        out = {
            "tool_version": self.tool_version,
            "timestamp": timestamp or datetime.now(timezone.utc).isoformat(timespec="seconds"),
            "budget": self.budget,
            "v0_used": self.v0_used,
            "superhedge_price_of_D": self.superhedge_price_of_D,
            "k": self.k,
            "success_ratio": self.success_ratio,
            "oracle_ratio": self.oracle_ratio,
            "oracle_status": self.oracle_status,
            "mc_estimate": self.mc_estimate,
            "mc_standard_error": self.mc_standard_error,
        }
        out.update(self.extras)
        out["config"] = self.config
        return out


@dataclass
class RunArtifacts:
    lattice: Lattice
    space: ScenarioSpace
    claim: Claim
    result: SolverResult
    strategy: Strategy
    report: Report


def solve(config: RunConfig, verify: bool = True) -> RunArtifacts:
    lattice = build_lattice(config.market)
    space = build_scenario_space(lattice, signal_model(config.signals))
    claim = make_claim(space, config.claim, config.base_dir)
    result = solve_budget(space, claim, config.budget)
    strategy = build_optimal_strategy(space, claim, result, lattice)
    d_bar = upper_envelope(space, claim.values)

    report = Report(
        budget=config.budget,
        v0_used=float(strategy.v0),
        superhedge_price_of_D=math.fsum(lattice.r * d_bar),
        k=float(result.k),
        success_ratio=float(result.success_ratio),
        gamma=result.gamma.gamma,
        config=config.to_dict(),
        extras={"n_market_paths": lattice.n_paths, "n_scenarios": space.size},
    )
    if verify and config.oracle is not None:
        try:
            report.oracle_ratio = brute_force_optimal(space, claim, config.budget, config.oracle)
            report.oracle_status = "ok"
        except CapacityError as exc:
            report.oracle_status = f"skipped: {exc}"
            log.warning("oracle skipped: %s", exc)
    if verify and config.monte_carlo is not None:
        est, se = monte_carlo_eval(space, claim, strategy, config.monte_carlo)
        report.mc_estimate, report.mc_standard_error = est, se
        report.extras["mc_generator"] = RNG_ALGORITHM
    return RunArtifacts(lattice, space, claim, result, strategy, report)


def write_outputs(art: RunArtifacts, out_dir, timestamp: str | None = None) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    d_bar = upper_envelope(art.space, art.claim.values)
    with open(out / GAMMA_FILE, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["market_path_id", "moves", "gamma", "claim_upper_envelope", "hedge_target"])
        for x, g in enumerate(art.result.gamma.gamma):
            w.writerow(
                [x, prefix_label(x, art.lattice.steps), repr(float(g)), repr(float(d_bar[x])),
                 repr(float(min(g, d_bar[x])))]
            )
    write_strategy_csv(art.strategy, out / STRATEGY_FILE)
    write_claim_csv(art.space, art.claim, out / CLAIM_FILE)
    data = art.report.to_dict(timestamp)
    data["files"] = {"gamma": GAMMA_FILE, "strategy": STRATEGY_FILE, "claim": CLAIM_FILE}
    with open(out / REPORT_FILE, "w") as fh:
        yaml.safe_dump(data, fh, sort_keys=False, default_flow_style=False)
    return out / REPORT_FILE


def run(config: RunConfig, out_dir=None, verify: bool = True, timestamp: str | None = None) -> Report:
    art = solve(config, verify=verify)
    target = Path(out_dir) if out_dir is not None else config.base_dir / config.outputs
    write_outputs(art, target, timestamp)
    return art.report
