"""JSON instance files.

Layout (all labels are JSON scalars, compared by value)::

    {
      "format": "sfwoc-instance", "version": 1,
      "N": 2, "T": 1,
      "social": [{"kind": "quadratic", "alpha": 1.0, "target": 0.0}, ..., {"kind": "identity"}],
      "agents": [
        {
          "states": [0, 1], "initial_states": [0], "controls": [0, 1],
          "steps": [                          # one entry per t = 0..T
            {"state": 0, "controls": [0, 1],  # feasible controls, in label order
             "next": [0, 1],                  # successor labels (omitted at t = T)
             "contribution": [0.0, 1.0],
             "individual_cost": [0.0, 0.0]},
            ...
          ]
        }
      ],
      "meta": {}
    }

``steps`` is flattened over (t, state): entry ``t * |S| + k`` describes the
k-th state at time t. Floats are written with ``repr`` so reading back gives
identical values.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .model import AgentSpec, OcInstance
from .social import SocialCostBlock

FORMAT = "sfwoc-instance"
VERSION = 1


def _scalar(v):
    if isinstance(v, np.generic):
        return v.item()
    return v


def agent_to_dict(a: AgentSpec) -> dict:
    T = a.T
    steps = []
    for t in range(T + 1):
        for s in range(a.n_states):
            us = a.feasible_controls(t, s)
            entry = {
                "state": _scalar(a.states[s]),
                "controls": [_scalar(a.controls[u]) for u in us],
            }
            if t < T:
                entry["next"] = [
                    _scalar(a.states[n]) if 0 <= n < a.n_states else None for n in a.transition[t, s, us]
                ]
            entry["contribution"] = [float(v) for v in a.contribution[t, s, us]]
            entry["individual_cost"] = [float(v) for v in a.individual_cost[t, s, us]]
            steps.append(entry)
    return {
        "states": [_scalar(s) for s in a.states],
        "initial_states": [_scalar(s) for s in a.initial_states],
        "controls": [_scalar(u) for u in a.controls],
        "steps": steps,
    }


def agent_from_dict(d: dict, T: int) -> AgentSpec:
    states, controls = tuple(d["states"]), tuple(d["controls"])
    s_pos = {s: k for k, s in enumerate(states)}
    u_pos = {u: k for k, u in enumerate(controls)}
    S, U = len(states), len(controls)
    feas = np.zeros((T + 1, S, U), dtype=bool)
    nxt = np.full((T, S, U), -1, dtype=np.int64)
    h = np.zeros((T + 1, S, U))
    ell = np.zeros((T + 1, S, U))
    steps = d["steps"]
    if len(steps) != (T + 1) * S:
        raise ValueError(f"agent has {len(steps)} steps, expected {(T + 1) * S}")
    for n, entry in enumerate(steps):
        t, si = divmod(n, S)
        if entry["state"] != states[si]:
            raise ValueError(f"step {n} describes state {entry['state']!r}, expected {states[si]!r}")
        us = [u_pos[u] for u in entry["controls"]]
        feas[t, si, us] = True
        h[t, si, us] = entry["contribution"]
        ell[t, si, us] = entry["individual_cost"]
        if t < T:
            nxt[t, si, us] = [s_pos.get(s, -1) if s is not None else -1 for s in entry["next"]]
    return AgentSpec(states, tuple(d["initial_states"]), controls, feas, nxt, h, ell)


def instance_to_dict(instance: OcInstance) -> dict:
    return {
        "format": FORMAT,
        "version": VERSION,
        "N": instance.N,
        "T": instance.T,
        "social": [b.to_dict() for b in instance.social],
        "agents": [agent_to_dict(a) for a in instance.agents],
        "meta": instance.meta,
    }


def instance_from_dict(d: dict) -> OcInstance:
    if d.get("format") != FORMAT:
        raise ValueError(f"not an instance file (format={d.get('format')!r})")
    T = int(d["T"])
    agents = [agent_from_dict(a, T) for a in d["agents"]]
    social = [SocialCostBlock.from_dict(b) for b in d["social"]]
    return OcInstance(int(d["N"]), T, agents, social, meta=d.get("meta", {}))


def dumps(instance: OcInstance) -> str:
    return json.dumps(instance_to_dict(instance), separators=(",", ":"))


def loads(text: str) -> OcInstance:
    return instance_from_dict(json.loads(text))


def write_instance(instance: OcInstance, path) -> None:
    Path(path).write_text(dumps(instance))


def read_instance(path) -> OcInstance:
    return loads(Path(path).read_text())
