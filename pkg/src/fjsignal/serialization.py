"""JSON encoding of instances and signaling schemes."""

from __future__ import annotations

import json
from pathlib import Path

import jsonschema
import numpy as np

from .errors import DimensionMismatch, InputError, InvalidScheme
from .model import FJInstance, SignalingScheme, scheme_equilibria
from .objectives import Objective, eval_objective, expected_value

_NUM = {"type": "number"}
_VEC = {"type": "array", "items": _NUM}
_MAT = {"type": "array", "items": _VEC}

INSTANCE_SCHEMA = {
    "type": "object",
    "required": ["agents", "states", "prior", "preconceptions", "objective"],
    "properties": {
        "agents": {"type": "integer", "minimum": 1},
        "states": {"type": "integer", "minimum": 1},
        "prior": _VEC,
        "influence": _MAT,
        "susceptibility": _VEC,
        "preconceptions": _MAT,
        "ranges": {"type": "array", "items": {"type": "array", "items": {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2}}},
        "objective": {
            "type": "object",
            "required": ["kind"],
            "properties": {
                "kind": {
                    "enum": [
                        "norm_distance",
                        "polarization",
                        "disagreement",
                        "max_polarization",
                        "max_disagreement",
                        "range_count",
                        "range_threshold",
                        "range_weighted",
                    ]
                },
                "sense": {"enum": ["min", "max"]},
                "p": {"anyOf": [{"type": "number", "minimum": 1}, {"const": "inf"}]},
                "target": _VEC,
                "edge_weights": {"type": "array", "items": {"type": "array", "items": _NUM, "minItems": 3, "maxItems": 3}},
                "tau": {"type": "integer", "minimum": 0},
                "sets": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "required": ["members", "value"],
                        "properties": {
                            "members": {"type": "array", "items": {"type": "array", "items": {"type": "integer"}, "minItems": 2, "maxItems": 2}},
                            "value": {"type": "number", "minimum": 0},
                        },
                    },
                },
            },
        },
    },
}

SCHEME_SCHEMA = {
    "type": "object",
    "required": ["signals"],
    "properties": {
        "method": {"type": "string"},
        "expected_value": _NUM,
        "signals": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["prob", "posterior"],
                "properties": {
                    "prob": _NUM,
                    "posterior": _VEC,
                    "phi_column": _VEC,
                    "equilibrium": _VEC,
                    "value": _NUM,
                },
            },
        },
    },
}


def _floats(a) -> list:
    return np.asarray(a, dtype=float).tolist()


def objective_to_dict(obj: Objective) -> dict:
    if obj.is_range_based:
        g = obj.gspec
        if g.kind == "count":
            return {"kind": "range_count"}
        if g.kind == "threshold":
            return {"kind": "range_threshold", "tau": g.tau}
        return {
            "kind": "range_weighted",
            "sets": [{"members": sorted([list(m) for m in members]), "value": v} for members, v in g.entries],
        }
    out = {"kind": obj.kind, "sense": obj.sense}
    if obj.kind == "norm_distance":
        out["p"] = "inf" if obj.p == np.inf else int(obj.p)
        out["target"] = _floats(obj.target)
    if obj.edge_weights is not None:
        out["edge_weights"] = [[u, v, w] for u, v, w in obj.edge_weights]
    return out


def objective_from_dict(d: dict) -> Objective:
    kind = d["kind"]
    if kind == "range_count":
        return Objective.range_count()
    if kind == "range_threshold":
        return Objective.range_threshold(d.get("tau", 0))
    if kind == "range_weighted":
        return Objective.range_weighted([(map(tuple, s["members"]), s["value"]) for s in d.get("sets", [])])
    sense = d.get("sense", "min")
    if kind == "norm_distance":
        p = d.get("p", 2)
        return Objective.norm_distance(d["target"], p=np.inf if p == "inf" else p, sense=sense)
    return Objective(kind, sense=sense, edge_weights=d.get("edge_weights"))


def instance_to_dict(inst: FJInstance) -> dict:
    return {
        "agents": inst.n,
        "states": inst.m,
        "prior": _floats(inst.prior),
        "influence": _floats(inst.influence),
        "susceptibility": _floats(inst.susceptibility),
        "preconceptions": _floats(inst.preconceptions),
        "ranges": [[list(r) for r in agent] for agent in inst.ranges],
        "objective": objective_to_dict(inst.objective),
    }


def instance_from_dict(d: dict) -> FJInstance:
    """Decode an instance document; shape errors raise DimensionMismatch, values are not validated."""
    try:
        jsonschema.validate(d, INSTANCE_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(map(str, exc.absolute_path)) or "<root>"
        raise InputError(f"instance schema error at {where}: {exc.message}") from exc
    n, m = d["agents"], d["states"]
    s = np.array(d["preconceptions"], dtype=float)
    if s.shape != (n, m):
        raise DimensionMismatch(f"preconceptions must be {n}x{m}, got shape {s.shape}")
    influence = np.array(d.get("influence", np.eye(n).tolist()), dtype=float)
    if influence.shape != (n, n):
        raise DimensionMismatch(f"influence must be {n}x{n}, got shape {influence.shape}")
    ranges = d.get("ranges", [[] for _ in range(n)])
    if len(ranges) != n:
        raise DimensionMismatch(f"ranges must list {n} agents, got {len(ranges)}")
    return FJInstance(
        influence=influence,
        susceptibility=d.get("susceptibility", [0.0] * n),
        preconceptions=s,
        prior=d["prior"],
        ranges=ranges,
        objective=objective_from_dict(d["objective"]),
    )


def _load_json(path):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc


def dump_json(doc, path=None) -> str:
    # repr-based float output is the shortest string that round-trips exactly
    text = json.dumps(doc, indent=2) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text


def load_instance(path) -> FJInstance:
    return instance_from_dict(_load_json(path))


def save_instance(inst: FJInstance, path=None) -> str:
    return dump_json(instance_to_dict(inst), path)


def scheme_to_dict(inst: FJInstance, scheme: SignalingScheme, method: str | None = None) -> dict:
    eq = scheme_equilibria(inst, scheme)
    signals = []
    for sig, col, z in zip(scheme.signals, scheme.columns, eq):
        signals.append(
            {
                "prob": sig.mass,
                "posterior": _floats(sig.distribution),
                "phi_column": _floats(scheme.phi[:, col]),
                "equilibrium": _floats(z),
                "value": eval_objective(inst, z),
            }
        )
    doc = {"method": method, "expected_value": expected_value(inst, scheme), "signals": signals}
    if method is None:
        del doc["method"]
    return doc


def scheme_from_dict(d: dict, prior, tol: float = 1e-6) -> SignalingScheme:
    """Rebuild a scheme for ``prior`` from its per-state columns (or posteriors and probabilities)."""
    try:
        jsonschema.validate(d, SCHEME_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(map(str, exc.absolute_path)) or "<root>"
        raise InputError(f"scheme schema error at {where}: {exc.message}") from exc
    prior = np.asarray(prior, dtype=float)
    m = prior.size
    sigs = d["signals"]
    if not sigs:
        raise InvalidScheme("scheme has no signals")
    for i, s in enumerate(sigs):
        for key in ("posterior", "phi_column"):
            if key in s and len(s[key]) != m:
                raise DimensionMismatch(f"signal {i}: {key} has {len(s[key])} entries, instance has {m} states")
    total = sum(s["prob"] for s in sigs)
    if abs(total - 1.0) > tol:
        raise InvalidScheme(f"signal probabilities sum to {total:.12g}, not 1")
    if all("phi_column" in s for s in sigs):
        return SignalingScheme(np.array([s["phi_column"] for s in sigs]).T, prior)
    post = np.array([s["posterior"] for s in sigs])
    mass = np.array([s["prob"] for s in sigs])
    residual = np.max(np.abs(mass @ post - prior))
    if residual > tol:
        raise InvalidScheme(f"posteriors average to the prior only within {residual:.3g}")
    return SignalingScheme.from_posteriors(post, mass, prior)


def load_scheme(path, prior, tol: float = 1e-6) -> tuple[SignalingScheme, dict]:
    doc = _load_json(path)
    return scheme_from_dict(doc, prior, tol), doc


def save_scheme(inst: FJInstance, scheme: SignalingScheme, path=None, method=None) -> str:
    return dump_json(scheme_to_dict(inst, scheme, method), path)
