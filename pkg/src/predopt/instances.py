"""Problem instances for the lot-sizing (MCLSP) and multi-stage knapsack (MSMK) families.

Generation follows the integer-uniform sampling scheme used for training and
test data; every draw is a pure function of :class:`GenConfig`.  Instances
serialize to a small self-describing JSON document.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Union

import numpy as np

MAX_RESAMPLES = 1000

DEMAND_RANGE = (500, 1500)
PROD_COST_RANGE = (1, 200)
HOLD_COST_RANGE = (1, 100)
MSMK_VALUE_RANGE = (1, 1000)
MSMK_CAP_FRACTION = (0.5, 0.8)


class InstanceError(ValueError):
    """Raised for invalid instance data or malformed instance files."""


class GenerationError(RuntimeError):
    """Raised when no valid instance could be drawn within the resampling budget."""


@dataclass(frozen=True)
class GenConfig:
    family: str
    items: int
    periods: int
    resources: int = 1
    seed: int = 0
    cap_ratio: float = 10.0
    setup_to_hold: float = 1000.0

    def __post_init__(self):
        if self.family not in ("mclsp", "msmk"):
            raise ValueError(f"unknown family {self.family!r}")
        if self.items < 1 or self.periods < 1 or self.resources < 1:
            raise ValueError("items, periods and resources must be >= 1")
        if self.cap_ratio <= 0:
            raise ValueError("cap_ratio must be positive")
        if self.setup_to_hold < 0:
            raise ValueError("setup_to_hold must be nonnegative")


def _check_matrix(name, arr, shape):
    arr = np.asarray(arr)
    if arr.shape != shape:
        raise InstanceError(f"{name}: expected shape {shape}, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InstanceError(f"{name}: non-finite entries")
    if np.any(arr < 0):
        raise InstanceError(f"{name}: negative entries")
    return arr


def _as_number_array(values):
    arr = np.asarray(values)
    if arr.dtype.kind in "iu":
        return arr.astype(np.int64)
    return arr.astype(np.float64)


@dataclass(eq=False)
class LotSizingInstance:
    """Multi-item capacitated lot-sizing data.  Matrices are indexed ``[item, period]``."""

    demand: np.ndarray
    prod_cost: np.ndarray
    setup_cost: np.ndarray
    hold_cost: np.ndarray
    capacity: np.ndarray
    seed: int | None = None
    family = "mclsp"

    def __post_init__(self):
        self.demand = _as_number_array(self.demand)
        self.prod_cost = _as_number_array(self.prod_cost)
        self.setup_cost = _as_number_array(self.setup_cost)
        self.hold_cost = _as_number_array(self.hold_cost)
        self.capacity = _as_number_array(self.capacity)
        self.validate()

    @property
    def n_items(self) -> int:
        return self.demand.shape[0]

    @property
    def n_periods(self) -> int:
        return self.demand.shape[1]

    def validate(self) -> None:
        if self.demand.ndim != 2:
            raise InstanceError("demand must be a 2-d matrix")
        I, T = self.demand.shape
        if I < 1 or T < 1:
            raise InstanceError(f"need at least one item and period, got I={I}, T={T}")
        for name in ("demand", "prod_cost", "setup_cost", "hold_cost"):
            _check_matrix(name, getattr(self, name), (I, T))
        _check_matrix("capacity", self.capacity, (T,))

    def cumulative_capacity_ok(self) -> bool:
        """True when cumulative capacity covers cumulative total demand in every period."""
        return bool(np.all(np.cumsum(self.capacity) >= np.cumsum(self.demand.sum(axis=0))))

    def __eq__(self, other):
        if not isinstance(other, LotSizingInstance):
            return NotImplemented
        return self.seed == other.seed and all(
            np.array_equal(getattr(self, k), getattr(other, k))
            for k in ("demand", "prod_cost", "setup_cost", "hold_cost", "capacity")
        )


@dataclass(eq=False)
class KnapsackInstance:
    """Multi-stage multi-dimensional knapsack data.

    ``profit`` is ``[item, period]``, ``bonus`` is ``[item, period]`` over the
    first ``T - 1`` periods, ``weight`` is ``[item, resource, period]`` and
    ``capacity`` is ``[resource, period]``.
    """

    profit: np.ndarray
    bonus: np.ndarray
    weight: np.ndarray
    capacity: np.ndarray
    seed: int | None = None
    family = "msmk"

    def __post_init__(self):
        self.profit = _as_number_array(self.profit)
        self.bonus = _as_number_array(self.bonus)
        self.weight = _as_number_array(self.weight)
        self.capacity = _as_number_array(self.capacity)
        if self.bonus.size == 0:
            self.bonus = self.bonus.reshape(self.profit.shape[0], 0)
        self.validate()

    @property
    def n_items(self) -> int:
        return self.profit.shape[0]

    @property
    def n_periods(self) -> int:
        return self.profit.shape[1]

    @property
    def n_resources(self) -> int:
        return self.weight.shape[1]

    def validate(self) -> None:
        if self.profit.ndim != 2 or self.weight.ndim != 3:
            raise InstanceError("profit must be 2-d and weight 3-d")
        I, T = self.profit.shape
        if I < 1 or T < 1:
            raise InstanceError(f"need at least one item and period, got I={I}, T={T}")
        J = self.weight.shape[1]
        if J < 1:
            raise InstanceError("need at least one resource")
        _check_matrix("profit", self.profit, (I, T))
        _check_matrix("bonus", self.bonus, (I, T - 1))
        _check_matrix("weight", self.weight, (I, J, T))
        _check_matrix("capacity", self.capacity, (J, T))

    def __eq__(self, other):
        if not isinstance(other, KnapsackInstance):
            return NotImplemented
        return self.seed == other.seed and all(
            np.array_equal(getattr(self, k), getattr(other, k))
            for k in ("profit", "bonus", "weight", "capacity")
        )


Instance = Union[LotSizingInstance, KnapsackInstance]


def _uniform_int(rng, lo, hi, size=None):
    lo, hi = math.ceil(lo), math.floor(hi)
    if hi < lo:
        hi = lo
    return rng.integers(lo, hi, size=size, endpoint=True)


def gen_mclsp(config: GenConfig) -> LotSizingInstance:
    """Draw a lot-sizing instance; whole draws are rejected until cumulative capacity suffices."""
    if config.family != "mclsp":
        raise ValueError("gen_mclsp needs family='mclsp'")
    I, T = config.items, config.periods
    rng = np.random.default_rng(config.seed)
    for _ in range(MAX_RESAMPLES):
        demand = rng.integers(*DEMAND_RANGE, size=(I, T), endpoint=True)
        prod = rng.integers(*PROD_COST_RANGE, size=(I, T), endpoint=True)
        hold = rng.integers(*HOLD_COST_RANGE, size=(I, T), endpoint=True)
        d_bar = demand.mean()
        h_bar = hold.mean()
        cap = _uniform_int(rng, 0.8 * config.cap_ratio * d_bar, 1.2 * config.cap_ratio * d_bar, size=T)
        setup = _uniform_int(rng, 0.9 * config.setup_to_hold * h_bar, 1.1 * config.setup_to_hold * h_bar,
                             size=(I, T))
        inst = LotSizingInstance(demand, prod, setup, hold, cap, seed=config.seed)
        if inst.cumulative_capacity_ok():
            return inst
    raise GenerationError(
        f"no capacity-feasible draw in {MAX_RESAMPLES} attempts; cap_ratio={config.cap_ratio} "
        f"is too small for I={I}"
    )


def gen_msmk(config: GenConfig) -> KnapsackInstance:
    if config.family != "msmk":
        raise ValueError("gen_msmk needs family='msmk'")
    I, T, J = config.items, config.periods, config.resources
    rng = np.random.default_rng(config.seed)
    profit = rng.integers(*MSMK_VALUE_RANGE, size=(I, T), endpoint=True)
    bonus = rng.integers(*MSMK_VALUE_RANGE, size=(I, T - 1), endpoint=True)
    weight = rng.integers(*MSMK_VALUE_RANGE, size=(I, J, T), endpoint=True)
    col = weight.sum(axis=0)
    lo, hi = MSMK_CAP_FRACTION
    cap = np.empty((J, T), dtype=np.int64)
    for j in range(J):
        for t in range(T):
            cap[j, t] = _uniform_int(rng, lo * col[j, t], hi * col[j, t])
    return KnapsackInstance(profit, bonus, weight, cap, seed=config.seed)


def generate(config: GenConfig) -> Instance:
    return gen_mclsp(config) if config.family == "mclsp" else gen_msmk(config)


def generate_many(config: GenConfig, count: int) -> list:
    """``count`` instances with seeds ``config.seed, config.seed + 1, ...``."""
    return [generate(replace(config, seed=config.seed + k)) for k in range(count)]


# ---- serialization ----

def _tolist(arr):
    return arr.tolist()


def to_dict(inst: Instance) -> dict:
    if isinstance(inst, LotSizingInstance):
        return {
            "family": "mclsp",
            "I": inst.n_items,
            "T": inst.n_periods,
            "seed": inst.seed,
            "demand": _tolist(inst.demand),
            "prod_cost": _tolist(inst.prod_cost),
            "setup_cost": _tolist(inst.setup_cost),
            "hold_cost": _tolist(inst.hold_cost),
            "capacity": _tolist(inst.capacity),
        }
    return {
        "family": "msmk",
        "I": inst.n_items,
        "T": inst.n_periods,
        "J": inst.n_resources,
        "seed": inst.seed,
        "profit": _tolist(inst.profit),
        "bonus": _tolist(inst.bonus),
        "weight": _tolist(inst.weight),
        "capacity": _tolist(inst.capacity),
    }


def _field(doc, key, where):
    try:
        return doc[key]
    except KeyError:
        raise InstanceError(f"{where}: missing field {key!r}") from None


def _array(doc, key, shape, where):
    raw = _field(doc, key, where)
    try:
        arr = np.array(raw)
    except ValueError as exc:
        raise InstanceError(f"{where}: field {key!r} is ragged") from exc
    if arr.size and arr.dtype.kind not in "iuf":
        raise InstanceError(f"{where}: field {key!r} must be numeric")
    if arr.shape != shape:
        raise InstanceError(f"{where}: field {key!r} has shape {arr.shape}, header says {shape}")
    return arr


def from_dict(doc: dict, where: str = "<dict>") -> Instance:
    family = _field(doc, "family", where)
    I, T = int(_field(doc, "I", where)), int(_field(doc, "T", where))
    if I < 1 or T < 1:
        raise InstanceError(f"{where}: dimensions must be >= 1 (I={I}, T={T})")
    seed = doc.get("seed")
    if family == "mclsp":
        return LotSizingInstance(
            _array(doc, "demand", (I, T), where),
            _array(doc, "prod_cost", (I, T), where),
            _array(doc, "setup_cost", (I, T), where),
            _array(doc, "hold_cost", (I, T), where),
            _array(doc, "capacity", (T,), where),
            seed=seed,
        )
    if family == "msmk":
        J = int(_field(doc, "J", where))
        if J < 1:
            raise InstanceError(f"{where}: J must be >= 1")
        bonus = np.array(_field(doc, "bonus", where))
        if T == 1 and bonus.size == 0:
            bonus = np.zeros((I, 0), dtype=np.int64)
        elif bonus.shape != (I, T - 1):
            raise InstanceError(f"{where}: field 'bonus' has shape {bonus.shape}, header says {(I, T - 1)}")
        return KnapsackInstance(
            _array(doc, "profit", (I, T), where),
            bonus,
            _array(doc, "weight", (I, J, T), where),
            _array(doc, "capacity", (J, T), where),
            seed=seed,
        )
    raise InstanceError(f"{where}: unknown family {family!r}")


def save_instance(inst: Instance, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(to_dict(inst)))
    return path


def load_instance(path) -> Instance:
    path = Path(path)
    text = path.read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise InstanceError(f"{path}: top-level JSON value must be an object")
    return from_dict(doc, where=str(path))
