"""Generic mixed-binary linear models, the two formulation builders, and model transforms.

A :class:`MilpModel` is immutable: every transform (relaxation, fixing,
integrality relaxation) returns a new model.  Variables are addressed by
integer id; ``groups`` maps formulation symbols (``"x"``, ``"s"``, ``"y"``)
to id arrays shaped like the instance data.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from functools import cached_property
from typing import Dict, Mapping, NamedTuple, Optional, Sequence

import numpy as np

from .instances import KnapsackInstance, LotSizingInstance

FEAS_TOL = 1e-6
BINARY = "binary"
CONTINUOUS = "continuous"


class ModelError(ValueError):
    pass


class Status(str, Enum):
    OPTIMAL = "Optimal"
    FEASIBLE = "Feasible"
    INFEASIBLE = "Infeasible"
    TIME_LIMIT = "TimeLimit"
    UNBOUNDED = "Unbounded"
    NUMERICAL_FAILURE = "NumericalFailure"


class ConstraintTag(NamedTuple):
    kind: str
    index: tuple

    def __str__(self):
        return f"{self.kind}{list(self.index)}"


LABELABLE = {"capacity", "setupLink", "knapsack"}


@dataclass(frozen=True)
class Variable:
    name: str
    kind: str
    lower: float
    upper: float


@dataclass(frozen=True)
class Constraint:
    coefs: Mapping[int, float]
    sense: str  # "<=", "=", ">="
    rhs: float
    tag: ConstraintTag


@dataclass(frozen=True)
class Solution:
    values: Optional[np.ndarray]
    objective: float
    status: Status

    @property
    def has_values(self) -> bool:
        return self.values is not None


@dataclass(frozen=True, eq=False)
class MilpModel:
    variables: tuple
    constraints: tuple
    objective: np.ndarray
    sense: str = "min"
    groups: Dict[str, np.ndarray] = field(default_factory=dict)
    meta: Dict[str, object] = field(default_factory=dict)

    def __post_init__(self):
        n = len(self.variables)
        if self.sense not in ("min", "max"):
            raise ModelError(f"bad objective sense {self.sense!r}")
        if len(self.objective) != n:
            raise ModelError("objective length differs from variable count")
        tags = set()
        for con in self.constraints:
            if con.sense not in ("<=", "=", ">="):
                raise ModelError(f"bad constraint sense {con.sense!r}")
            if con.tag in tags:
                raise ModelError(f"duplicate constraint tag {con.tag}")
            tags.add(con.tag)
            for vid in con.coefs:
                if not 0 <= vid < n:
                    raise ModelError(f"constraint {con.tag} references unknown variable {vid}")
        for v in self.variables:
            if v.kind == BINARY and (v.lower < 0 or v.upper > 1):
                raise ModelError(f"binary variable {v.name} has bounds outside [0, 1]")
            if v.lower > v.upper:
                raise ModelError(f"variable {v.name} has lower > upper")

    # dense views used by the solvers
    @property
    def n_vars(self) -> int:
        return len(self.variables)

    @cached_property
    def lower(self) -> np.ndarray:
        return np.array([v.lower for v in self.variables], dtype=float)

    @cached_property
    def upper(self) -> np.ndarray:
        return np.array([v.upper for v in self.variables], dtype=float)

    @cached_property
    def is_binary(self) -> np.ndarray:
        return np.array([v.kind == BINARY for v in self.variables], dtype=bool)

    @cached_property
    def binary_ids(self) -> np.ndarray:
        return np.flatnonzero(self.is_binary)

    @cached_property
    def matrix(self) -> np.ndarray:
        A = np.zeros((len(self.constraints), self.n_vars))
        for r, con in enumerate(self.constraints):
            for vid, a in con.coefs.items():
                A[r, vid] = a
        return A

    @cached_property
    def rhs(self) -> np.ndarray:
        return np.array([c.rhs for c in self.constraints], dtype=float)

    @cached_property
    def senses(self) -> tuple:
        return tuple(c.sense for c in self.constraints)

    @cached_property
    def tag_index(self) -> Dict[ConstraintTag, int]:
        return {c.tag: r for r, c in enumerate(self.constraints)}

    @property
    def family(self) -> Optional[str]:
        return self.meta.get("family")

    @property
    def decision_ids(self) -> np.ndarray:
        """Ids of the predicted binary block (``y`` for MCLSP, ``x`` for MSMK)."""
        return self.groups[self.meta["decision"]]

    def evaluate(self, values) -> float:
        return float(np.dot(self.objective, values))

    def violation(self, values, integrality: bool = True) -> float:
        """Largest scaled violation of bounds, rows and (optionally) integrality at ``values``."""
        x = np.asarray(values, dtype=float)
        worst = 0.0
        scale = 1.0 + np.abs(self.lower)
        worst = max(worst, float(np.max((self.lower - x) / scale, initial=0.0)))
        finite = np.isfinite(self.upper)
        if finite.any():
            worst = max(worst, float(np.max((x[finite] - self.upper[finite]) / (1.0 + np.abs(self.upper[finite])),
                                            initial=0.0)))
        if self.constraints:
            lhs = self.matrix @ x
            rel = 1.0 + np.abs(self.rhs)
            for r, sense in enumerate(self.senses):
                d = lhs[r] - self.rhs[r]
                if sense == "<=":
                    v = d
                elif sense == ">=":
                    v = -d
                else:
                    v = abs(d)
                worst = max(worst, v / rel[r])
        b = x[self.is_binary]
        if integrality and b.size:
            worst = max(worst, float(np.max(np.abs(b - np.round(b)))))
        return worst

    def is_feasible(self, values, tol: float = FEAS_TOL, integrality: bool = True) -> bool:
        return self.violation(values, integrality) <= tol

    def to_lp_text(self) -> str:
        """Readable LP-style dump, one row per line with its tag as a comment."""

        def term(a, vid):
            name = self.variables[vid].name
            sign = "-" if a < 0 else "+"
            return f"{sign} {abs(a):g} {name}"

        lines = ["Minimize" if self.sense == "min" else "Maximize"]
        obj = [term(a, j) for j, a in enumerate(self.objective) if a != 0]
        lines.append("  obj: " + (" ".join(obj) if obj else "0"))
        lines.append("Subject To")
        for con in self.constraints:
            body = " ".join(term(a, j) for j, a in sorted(con.coefs.items()))
            lines.append(f"  {body or '0'} {con.sense} {con.rhs:g}  \\ {con.tag}")
        lines.append("Bounds")
        for v in self.variables:
            lines.append(f"  {v.lower:g} <= {v.name} <= {v.upper:g}")
        bins = [v.name for v in self.variables if v.kind == BINARY]
        if bins:
            lines.append("Binary")
            lines.append("  " + " ".join(bins))
        lines.append("End")
        return "\n".join(lines) + "\n"


class _Builder:
    def __init__(self):
        self.variables = []
        self.constraints = []
        self.obj = []

    def var(self, name, kind, lower, upper, cost):
        self.variables.append(Variable(name, kind, float(lower), float(upper)))
        self.obj.append(float(cost))
        return len(self.variables) - 1

    def add(self, coefs, sense, rhs, tag):
        self.constraints.append(Constraint(dict(coefs), sense, float(rhs), tag))

    def build(self, sense, groups, meta):
        return MilpModel(tuple(self.variables), tuple(self.constraints), np.array(self.obj), sense, groups, meta)


def build_mclsp(inst: LotSizingInstance) -> MilpModel:
    """Minimize production, setup and holding cost subject to flow, capacity and setup linking."""
    I, T = inst.n_items, inst.n_periods
    b = _Builder()
    x = np.empty((I, T), dtype=np.int64)
    s = np.empty((I, T), dtype=np.int64)
    y = np.empty((I, T), dtype=np.int64)
    for i in range(I):
        for t in range(T):
            y[i, t] = b.var(f"y[{i},{t}]", BINARY, 0, 1, inst.setup_cost[i, t])
    for i in range(I):
        for t in range(T):
            x[i, t] = b.var(f"x[{i},{t}]", CONTINUOUS, 0, np.inf, inst.prod_cost[i, t])
    for i in range(I):
        for t in range(T):
            s[i, t] = b.var(f"s[{i},{t}]", CONTINUOUS, 0, np.inf, inst.hold_cost[i, t])
    for i in range(I):
        for t in range(T):
            # s[i,t-1] + x[i,t] - s[i,t] = d[i,t], with zero initial inventory
            coefs = {x[i, t]: 1.0, s[i, t]: -1.0}
            if t > 0:
                coefs[s[i, t - 1]] = 1.0
            b.add(coefs, "=", inst.demand[i, t], ConstraintTag("flow", (i, t)))
    for t in range(T):
        b.add({x[i, t]: 1.0 for i in range(I)}, "<=", inst.capacity[t], ConstraintTag("capacity", (t,)))
    for i in range(I):
        for t in range(T):
            b.add({x[i, t]: 1.0, y[i, t]: -float(inst.capacity[t])}, "<=", 0.0, ConstraintTag("setupLink", (i, t)))
    meta = {"family": "mclsp", "I": I, "T": T, "decision": "y"}
    return b.build("min", {"y": y, "x": x, "s": s}, meta)


def build_msmk(inst: KnapsackInstance) -> MilpModel:
    """Maximize profit plus stability bonus subject to per-resource knapsack rows."""
    I, T, J = inst.n_items, inst.n_periods, inst.n_resources
    b = _Builder()
    x = np.empty((I, T), dtype=np.int64)
    y = np.empty((I, max(T - 1, 0)), dtype=np.int64)
    # x first so that dropping y in the relaxation keeps x ids
    for i in range(I):
        for t in range(T):
            x[i, t] = b.var(f"x[{i},{t}]", BINARY, 0, 1, inst.profit[i, t])
    for i in range(I):
        for t in range(T - 1):
            y[i, t] = b.var(f"y[{i},{t}]", BINARY, 0, 1, inst.bonus[i, t])
    for j in range(J):
        for t in range(T):
            b.add({x[i, t]: float(inst.weight[i, j, t]) for i in range(I)}, "<=", inst.capacity[j, t],
                  ConstraintTag("knapsack", (j, t)))
    for i in range(I):
        for t in range(T - 1):
            b.add({y[i, t]: 1.0, x[i, t + 1]: 1.0, x[i, t]: -1.0}, "<=", 1.0, ConstraintTag("stabUpper", (i, t)))
            b.add({y[i, t]: 1.0, x[i, t + 1]: -1.0, x[i, t]: 1.0}, "<=", 1.0, ConstraintTag("stabLower", (i, t)))
    meta = {"family": "msmk", "I": I, "T": T, "J": J, "decision": "x"}
    return b.build("max", {"x": x, "y": y}, meta)


def build_model(inst) -> MilpModel:
    if isinstance(inst, LotSizingInstance):
        return build_mclsp(inst)
    if isinstance(inst, KnapsackInstance):
        return build_msmk(inst)
    raise TypeError(f"unsupported instance type {type(inst).__name__}")


# ---- tightness labels ----

@dataclass(frozen=True)
class TightLabels:
    labels: Dict[ConstraintTag, bool]
    eta: float

    def tight_tags(self):
        return {tag for tag, tight in self.labels.items() if tight}


def labelable_tags(model: MilpModel) -> list:
    return [c.tag for c in model.constraints if c.tag.kind in LABELABLE]


def label_tight(model: MilpModel, optimal: Solution, eta: float) -> TightLabels:
    """Label each capacity / setup-link / knapsack row tight when its activity reaches ``eta`` times its capacity."""
    if not 0.0 <= eta <= 1.0:
        raise ValueError("eta must lie in [0, 1]")
    if optimal.status != Status.OPTIMAL or optimal.values is None:
        raise ValueError("tightness labels need an optimal solution")
    v = np.asarray(optimal.values, dtype=float)
    labels = {}
    fam = model.family
    for con in model.constraints:
        kind = con.tag.kind
        if kind == "capacity":
            act = sum(a * v[j] for j, a in con.coefs.items())
            labels[con.tag] = bool(act >= eta * con.rhs)
        elif kind == "setupLink":
            # row is x - c*y <= 0; test x >= eta * y * c
            i, t = con.tag.index
            xid, yid = model.groups["x"][i, t], model.groups["y"][i, t]
            cap = -con.coefs[yid]
            labels[con.tag] = bool(v[xid] >= eta * v[yid] * cap)
        elif kind == "knapsack":
            act = sum(a * v[j] for j, a in con.coefs.items())
            labels[con.tag] = bool(act >= eta * con.rhs)
    expected = set(labelable_tags(model))
    if set(labels) != expected:
        raise RuntimeError(f"label set mismatch for family {fam}")
    return TightLabels(labels, float(eta))


def build_relaxation(model: MilpModel, labels: TightLabels) -> MilpModel:
    """Keep structural rows plus the rows labeled tight; drop the others.

    For MSMK the stability variables and their linking rows are dropped as well.
    """
    missing = set(labelable_tags(model)) - set(labels.labels)
    if missing:
        raise ValueError(f"labels missing for {len(missing)} labelable rows")
    keep_rows = []
    for con in model.constraints:
        kind = con.tag.kind
        if kind in LABELABLE:
            if labels.labels[con.tag]:
                keep_rows.append(con)
        elif kind in ("stabUpper", "stabLower"):
            continue
        else:
            keep_rows.append(con)
    if model.family == "msmk":
        keep_vars = np.sort(model.groups["x"].ravel())
        return _restrict(model, keep_vars, keep_rows, drop_groups=("y",))
    return replace(model, constraints=tuple(keep_rows), meta={**model.meta, "relaxation": True})


def _restrict(model, keep_vars, rows, drop_groups=()):
    remap = {int(old): new for new, old in enumerate(keep_vars)}
    variables = tuple(model.variables[int(k)] for k in keep_vars)
    cons = []
    for con in rows:
        if any(j not in remap for j in con.coefs):
            raise ModelError(f"row {con.tag} references a dropped variable")
        cons.append(Constraint({remap[j]: a for j, a in con.coefs.items()}, con.sense, con.rhs, con.tag))
    groups = {}
    for name, ids in model.groups.items():
        if name in drop_groups:
            continue
        groups[name] = np.vectorize(lambda k: remap[int(k)], otypes=[np.int64])(ids) if ids.size else ids
    meta = {**model.meta, "relaxation": True}
    return MilpModel(variables, tuple(cons), model.objective[keep_vars], model.sense, groups, meta)


def fix_variables(model: MilpModel, assignment: Mapping[int, int]) -> MilpModel:
    """Return a copy with each assigned binary's bounds collapsed to its value."""
    if not assignment:
        return model
    variables = list(model.variables)
    for vid, val in assignment.items():
        v = variables[vid]
        if v.kind != BINARY:
            raise ModelError(f"cannot fix continuous variable {v.name}")
        if val not in (0, 1):
            raise ModelError(f"fixing value for {v.name} must be 0 or 1, got {val}")
        variables[vid] = Variable(v.name, v.kind, float(val), float(val))
    return replace(model, variables=tuple(variables))


def relax_integrality(model: MilpModel, var_ids: Optional[Sequence[int]] = None) -> MilpModel:
    """Turn the given binaries (all by default) into continuous variables on [0, 1]."""
    ids = model.binary_ids if var_ids is None else var_ids
    variables = list(model.variables)
    for vid in ids:
        v = variables[int(vid)]
        if v.kind == BINARY:
            variables[int(vid)] = Variable(v.name, CONTINUOUS, v.lower, v.upper)
    return replace(model, variables=tuple(variables))
