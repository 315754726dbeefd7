"""YAML run configuration.

Example::

    budget: 20
    market: {s0: 100, u: 2, d: 0.5, rho: 0, steps: 1, p_up: 0.5}
    signals: {type: mortality, death_probs: [0.2]}
    claim: {type: unit_linked_call, strike: 100}
    verify:
      oracle: {grid_points: 11, refine_rounds: 0}
      monte_carlo: {n_sims: 100000, seed: 7}
    outputs: {dir: out}

``signals.type`` is ``mortality`` (``death_probs``, optional ``times``) or
``chain`` (``times``, ``states``, ``transitions``).  ``claim.type`` is
``unit_linked_call`` (``strike``), ``pure_endowment`` (``benefit``) or
``table`` (``path`` to a CSV, relative to the config file).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .errors import ConfigError
from .lattice import LatticeParams
from .oracle import McConfig, OracleConfig

SIGNAL_TYPES = {"mortality": {"death_probs"}, "chain": {"times", "states", "transitions"}}
CLAIM_TYPES = {"unit_linked_call": {"strike"}, "pure_endowment": {"benefit"}, "table": {"path"}}


@dataclass
class RunConfig:
    market: LatticeParams
    signals: dict
    claim: dict
    budget: float
    oracle: OracleConfig | None = None
    monte_carlo: McConfig | None = None
    outputs: str = "out"
    base_dir: Path = field(default=Path("."), compare=False)

    def to_dict(self) -> dict:
        m = self.market
        out = {
            "budget": self.budget,
            "market": {"s0": m.s0, "u": m.u, "d": m.d, "rho": m.rho, "steps": m.steps, "p_up": m.p_up},
            "signals": self.signals,
            "claim": self.claim,
        }
        verify = {}
        if self.oracle is not None:
            verify["oracle"] = {
                "grid_points": self.oracle.grid_points,
                "refine_rounds": self.oracle.refine_rounds,
                "max_combinations": self.oracle.max_combinations,
            }
        if self.monte_carlo is not None:
            verify["monte_carlo"] = {"n_sims": self.monte_carlo.n_sims, "seed": self.monte_carlo.seed}
        if verify:
            out["verify"] = verify
        out["outputs"] = {"dir": self.outputs}
        return out


def _key_lines(node, prefix=()) -> dict[tuple, int]:
    lines = {prefix: node.start_mark.line + 1}
    if isinstance(node, yaml.MappingNode):
        for k, v in node.value:
            lines.update(_key_lines(v, prefix + (str(k.value),)))
            lines[prefix + (str(k.value),)] = k.start_mark.line + 1
    elif isinstance(node, yaml.SequenceNode):
        for i, v in enumerate(node.value):
            lines.update(_key_lines(v, prefix + (i,)))
    return lines


class _Reader:
    def __init__(self, lines: dict[tuple, int]):
        self.lines = lines

    def fail(self, path: tuple, msg: str):
        while path and path not in self.lines:
            path = path[:-1]
        raise ConfigError(msg, self.lines.get(path))

    def section(self, data: dict, path: tuple, required=True) -> dict | None:
        node = data.get(path[-1]) if isinstance(data, dict) else None
        if node is None:
            if required:
                self.fail(path[:-1], f"missing section '{'.'.join(path)}'")
            return None
        if not isinstance(node, dict):
            self.fail(path, f"'{'.'.join(path)}' must be a mapping")
        return node

    def number(self, data: dict, path: tuple, kind=float, default=None):
        if path[-1] not in data:
            if default is not None:
                return default
            self.fail(path[:-1], f"missing key '{'.'.join(path)}'")
        raw = data[path[-1]]
        if isinstance(raw, bool):
            self.fail(path, f"'{'.'.join(path)}' must be a number")
        try:
            # YAML 1.1 leaves forms like 1e-3 as strings; decimal text parses to double
            val = float(str(raw)) if kind is float else int(str(raw))
        except ValueError:
            self.fail(path, f"'{'.'.join(path)}' must be {'a number' if kind is float else 'an integer'}, got {raw!r}")
        return val


def _numbers(reader: _Reader, raw, path: tuple):
    if isinstance(raw, list):
        return [_numbers(reader, v, path + (i,)) for i, v in enumerate(raw)]
    try:
        return float(str(raw))
    except ValueError:
        reader.fail(path, f"expected a number at '{'.'.join(map(str, path))}', got {raw!r}")


def config_from_dict(data, lines: dict | None = None, base_dir=".") -> RunConfig:
    rd = _Reader(lines or {})
    if not isinstance(data, dict):
        rd.fail((), "configuration must be a mapping")

    mk = rd.section(data, ("market",))
    market = LatticeParams(
        s0=rd.number(mk, ("market", "s0")),
        u=rd.number(mk, ("market", "u")),
        d=rd.number(mk, ("market", "d")),
        rho=rd.number(mk, ("market", "rho"), default=0.0),
        steps=rd.number(mk, ("market", "steps"), kind=int),
        p_up=rd.number(mk, ("market", "p_up")),
    )

    sg = rd.section(data, ("signals",))
    stype = sg.get("type")
    if stype not in SIGNAL_TYPES:
        rd.fail(("signals", "type"), f"signals.type must be one of {sorted(SIGNAL_TYPES)}, got {stype!r}")
    for key in SIGNAL_TYPES[stype]:
        if key not in sg:
            rd.fail(("signals",), f"missing key 'signals.{key}' for type {stype}")
    signals = {"type": stype}
    if stype == "mortality":
        signals["death_probs"] = _numbers(rd, list(sg["death_probs"] or []), ("signals", "death_probs"))
        if sg.get("times") is not None:
            signals["times"] = [int(t) for t in sg["times"]]
    else:
        signals["times"] = [int(t) for t in sg["times"] or []]
        signals["states"] = [[str(s) for s in level] for level in sg["states"]]
        signals["transitions"] = _numbers(rd, list(sg["transitions"] or []), ("signals", "transitions"))

    cl = rd.section(data, ("claim",))
    ctype = cl.get("type")
    if ctype not in CLAIM_TYPES:
        rd.fail(("claim", "type"), f"claim.type must be one of {sorted(CLAIM_TYPES)}, got {ctype!r}")
    claim: dict = {"type": ctype}
    if ctype == "table":
        if "path" not in cl:
            rd.fail(("claim",), "missing key 'claim.path' for type table")
        claim["path"] = str(cl["path"])
    else:
        key = next(iter(CLAIM_TYPES[ctype]))
        claim[key] = rd.number(cl, ("claim", key))
    if "alive_state" in cl:
        claim["alive_state"] = str(cl["alive_state"])

    budget = rd.number(data, ("budget",))

    oracle = mc = None
    vf = rd.section(data, ("verify",), required=False)
    if vf is not None:
        oc = rd.section(vf, ("verify", "oracle"), required=False)
        if oc is not None:
            oracle = OracleConfig(
                grid_points=rd.number(oc, ("verify", "oracle", "grid_points"), int, 11),
                refine_rounds=rd.number(oc, ("verify", "oracle", "refine_rounds"), int, 0),
                max_combinations=rd.number(oc, ("verify", "oracle", "max_combinations"), int, 4096),
            )
        mcd = rd.section(vf, ("verify", "monte_carlo"), required=False)
        if mcd is not None:
            mc = McConfig(
                n_sims=rd.number(mcd, ("verify", "monte_carlo", "n_sims"), int, 100_000),
                seed=rd.number(mcd, ("verify", "monte_carlo", "seed"), int, 0),
            )

    out = rd.section(data, ("outputs",), required=False) or {}
    return RunConfig(
        market=market,
        signals=signals,
        claim=claim,
        budget=budget,
        oracle=oracle,
        monte_carlo=mc,
        outputs=str(out.get("dir", "out")),
        base_dir=Path(base_dir),
    )


def parse_config(text: str, base_dir=".") -> RunConfig:
    try:
        node = yaml.compose(text, Loader=yaml.SafeLoader)
        data = yaml.safe_load(text)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark or exc.context_mark
        raise ConfigError(f"YAML syntax error: {exc.problem}", mark.line + 1 if mark else None) from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"YAML error: {exc}") from exc
    if node is None:
        raise ConfigError("configuration file is empty")
    try:
        return config_from_dict(data, _key_lines(node), base_dir)
    except ConfigError:
        raise
    except Exception as exc:  # wrong shapes deep inside lists and the like
        raise ConfigError(f"invalid configuration: {exc}") from exc


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from exc
    return parse_config(text, base_dir=path.parent)
