"""CPLEX LP text export of the indicator model, plus a small reader.

Variable ``m_i_t_s_u`` uses agent index and time with *positions* of the
state and control labels. The objective is expanded explicitly:

    alpha * (a . m - c)^2 = [ 2 alpha a a^T ] / 2 - 2 alpha c a . m + alpha c^2

and the constant goes on a helper variable ``obj_const`` fixed to 1.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

from .exact import MicpModel

CONST_VAR = "obj_const"
_TERMS_PER_LINE = 6


def var_name(v: tuple[int, int, int, int]) -> str:
    return "m_{}_{}_{}_{}".format(*v)


def _num(x: float) -> str:
    return repr(float(x))


def _signed(c: float) -> str:
    return ("+ " if c >= 0 else "- ") + _num(abs(c))


def _wrap(terms: list[str], indent: str = "   ") -> list[str]:
    return [indent + " ".join(terms[k : k + _TERMS_PER_LINE]) for k in range(0, len(terms), _TERMS_PER_LINE)]


def objective_parts(model: MicpModel) -> tuple[dict[int, float], dict[tuple[int, int], float], float]:
    """Linear coefficients, upper-triangular quadratic coefficients (as in x'Qx / 2 with Q doubled), constant."""
    lin: dict[int, float] = {}
    quad: dict[tuple[int, int], float] = {}
    const = 0.0
    for k, c in enumerate(model.linear):
        if c != 0.0:
            lin[k] = lin.get(k, 0.0) + float(c)
    for block, idx, a in zip(model.blocks, model.aggregate_index, model.aggregate_coeffs):
        if len(idx) == 0:
            if block.kind == "quadratic":
                const += block.alpha * block.target**2
            continue
        if block.kind == "quadratic":
            alpha, c = block.alpha, block.target
            for p in range(len(idx)):
                v = int(idx[p])
                lin[v] = lin.get(v, 0.0) - 2.0 * alpha * c * a[p]
                quad[(v, v)] = quad.get((v, v), 0.0) + 2.0 * alpha * a[p] * a[p]
                for q in range(p + 1, len(idx)):
                    w = int(idx[q])
                    key = (v, w) if v < w else (w, v)
                    quad[key] = quad.get(key, 0.0) + 4.0 * alpha * a[p] * a[q]
            const += alpha * c * c
        elif block.slope != 0.0:
            for v, coef in zip(idx, a):
                lin[int(v)] = lin.get(int(v), 0.0) + block.slope * coef
    return lin, quad, const


def export_lp(model: MicpModel) -> str:
    names = [var_name(v) for v in model.variables]
    lin, quad, const = objective_parts(model)
    out = [
        "\\ Indicator model of a finite-state aggregative control problem",
        f"\\ N = {model.N}, T = {model.T}, d(m) = {model.n_variables}",
        f"\\ constraints: {model.family_counts()}",
        f"\\ objective constant {_num(const)} carried by {CONST_VAR} = 1",
        "Minimize",
        " obj:",
    ]
    terms = [f"{_signed(lin[k])} {names[k]}" for k in sorted(lin)]
    terms.append(f"{_signed(const)} {CONST_VAR}")
    out += _wrap(terms)
    if quad:
        qterms = []
        for (v, w) in sorted(quad):
            prod = f"{names[v]} ^ 2" if v == w else f"{names[v]} * {names[w]}"
            qterms.append(f"{_signed(quad[(v, w)])} {prod}")
        qlines = _wrap(qterms)
        qlines[0] = "   + [ " + qlines[0].lstrip()
        qlines[-1] += " ] / 2"
        out += qlines
    out.append("Subject To")
    for c in model.constraints:
        terms = [f"{_signed(coef)} {names[k]}" for k, coef in zip(c.index, c.coeffs)]
        lines = _wrap(terms) if terms else ["   0 " + CONST_VAR]
        lines[0] = f" {c.name}: " + lines[0].lstrip()
        lines[-1] += f" = {_num(c.rhs)}"
        out += lines
    out.append("Bounds")
    out += [f" {n} >= 0" for n in names]
    out.append(f" {CONST_VAR} = 1")
    out.append("Generals")
    out += _wrap(names, indent=" ")
    out.append("End")
    return "\n".join(out) + "\n"


# --- reader ------------------------------------------------------------------------

_SECTIONS = {
    "minimize": "objective",
    "subject to": "constraints",
    "bounds": "bounds",
    "generals": "generals",
    "end": "end",
}


@dataclass
class LpDocument:
    linear: dict[str, float] = field(default_factory=dict)
    quadratic: dict[tuple[str, str], float] = field(default_factory=dict)
    constraints: dict[str, tuple[dict[str, float], str, float]] = field(default_factory=dict)
    bounds: list[str] = field(default_factory=list)
    generals: list[str] = field(default_factory=list)

    def evaluate_objective(self, values: dict[str, float]) -> float:
        def val(n):
            return 1.0 if n == CONST_VAR else values.get(n, 0.0)

        total = sum(c * val(n) for n, c in self.linear.items())
        total += 0.5 * sum(c * val(a) * val(b) for (a, b), c in self.quadratic.items())
        return total

    def constraint_residuals(self, values: dict[str, float]) -> dict[str, float]:
        return {
            name: sum(c * values.get(n, 0.0) for n, c in row.items()) - rhs
            for name, (row, _, rhs) in self.constraints.items()
        }


_TOKEN = re.compile(r"\[|\]|/|\^|\*|[+-]|[<>=]=?|[A-Za-z_][A-Za-z0-9_.]*|[0-9.]+(?:[eE][+-]?[0-9]+)?|inf")


def _parse_expr(tokens: list[str]) -> tuple[dict[str, float], dict[tuple[str, str], float]]:
    lin: dict[str, float] = {}
    quad: dict[tuple[str, str], float] = {}
    sign, coef, in_quad, k = 1.0, None, False, 0
    while k < len(tokens):
        tok = tokens[k]
        if tok in "+-":
            sign = 1.0 if tok == "+" else -1.0
        elif tok == "[":
            in_quad = True
        elif tok == "]":
            in_quad = False
            k += 2  # "/ 2"
        elif re.fullmatch(r"[0-9.]+(?:[eE][+-]?[0-9]+)?", tok):
            coef = float(tok)
        else:
            c = sign * (1.0 if coef is None else coef)
            if in_quad and k + 2 < len(tokens) and tokens[k + 1] == "^":
                quad[(tok, tok)] = quad.get((tok, tok), 0.0) + c
                k += 2
            elif in_quad and k + 2 < len(tokens) and tokens[k + 1] == "*":
                key = (tok, tokens[k + 2])
                quad[key] = quad.get(key, 0.0) + c
                k += 2
            else:
                lin[tok] = lin.get(tok, 0.0) + c
            sign, coef = 1.0, None
        k += 1
    return lin, quad


def read_lp(text: str) -> LpDocument:
    """Parse a document written by ``export_lp`` (or any LP file using the same subset)."""
    sections: dict[str, list[str]] = {}
    current = None
    for raw in text.splitlines():
        line = raw.split("\\", 1)[0].strip()
        if not line:
            continue
        if line.lower() in _SECTIONS:
            current = _SECTIONS[line.lower()]
            sections.setdefault(current, [])
            continue
        if current is not None:
            sections[current].append(line)

    doc = LpDocument()
    objective = " ".join(sections.get("objective", []))
    if ":" in objective:
        objective = objective.split(":", 1)[1]
    doc.linear, doc.quadratic = _parse_expr(_TOKEN.findall(objective))

    pending: list[str] = []
    for line in sections.get("constraints", []):
        pending.append(line)
        joined = " ".join(pending)
        m = re.search(r"(<=|>=|=)\s*(\S+)\s*$", joined)
        if not m:
            continue
        name, body = joined[: m.start()].split(":", 1)
        row, _ = _parse_expr(_TOKEN.findall(body))
        row.pop(CONST_VAR, None)
        doc.constraints[name.strip()] = (row, m.group(1), float(m.group(2)))
        pending = []
    doc.bounds = sections.get("bounds", [])
    doc.generals = [n for line in sections.get("generals", []) for n in line.split()]
    return doc
