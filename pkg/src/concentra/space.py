"""Finite product spaces, measures on them, conditionals and exact integral functionals.

Configurations are ordered lexicographically with respect to the per-coordinate
alphabet order, coordinate 0 most significant.  All exact functionals operate on
flat numpy tables aligned with that enumeration order.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

from .errors import (
    DomainError,
    EnumerationTooLargeError,
    UndefinedConditionalError,
    SchemaError,
)

ENUMERATION_CAP = 1 << 24

# A configuration is a point of the product space, one value per coordinate.
Configuration = tuple[float, ...]


@dataclass(frozen=True)
class ProductSpace:
    """Product of finite real alphabets, one per coordinate.

    Parameters
    ----------
    alphabets : tuple of tuples of float
        Per-coordinate value lists.  Each list must be nonempty with distinct
        values; the given order fixes the enumeration order.
    """

    alphabets: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        if len(self.alphabets) == 0:
            raise DomainError("a product space needs at least one coordinate")
        for i, alphabet in enumerate(self.alphabets):
            if len(alphabet) == 0:
                raise DomainError(f"alphabet {i} is empty")
            if len(set(alphabet)) != len(alphabet):
                raise DomainError(f"alphabet {i} has repeated values")

    @property
    def n(self) -> int:
        return len(self.alphabets)

    @cached_property
    def shape(self) -> tuple[int, ...]:
        return tuple(len(a) for a in self.alphabets)

    @cached_property
    def size(self) -> int:
        return math.prod(self.shape)

    @cached_property
    def strides(self) -> tuple[int, ...]:
        strides = [1] * self.n
        for i in range(self.n - 2, -1, -1):
            strides[i] = strides[i + 1] * self.shape[i + 1]
        return tuple(strides)

    def digit_of(self, i: int, value: float) -> int:
        """Index of `value` inside alphabet i."""
        try:
            return self.alphabets[i].index(value)
        except ValueError:
            raise DomainError(f"value {value!r} not in alphabet {i}") from None

    def digits_of(self, values: Sequence[float]) -> np.ndarray:
        if len(values) != self.n:
            raise DomainError(f"configuration has {len(values)} coordinates, expected {self.n}")
        return np.array([self.digit_of(i, v) for i, v in enumerate(values)], dtype=np.intp)

    def index_of(self, values: Sequence[float]) -> int:
        """Flat enumeration index of a configuration given by its values."""
        digits = self.digits_of(values)
        return int(np.dot(digits, self.strides))

    def configuration(self, index: int) -> tuple[float, ...]:
        """Configuration values at a flat enumeration index."""
        out = []
        for i in range(self.n):
            digit = (index // self.strides[i]) % self.shape[i]
            out.append(self.alphabets[i][digit])
        return tuple(out)

    def value_grid(self, i: int) -> np.ndarray:
        return np.asarray(self.alphabets[i], dtype=float)

    def check_cap(self, cap: int = ENUMERATION_CAP) -> None:
        if self.size > cap:
            raise EnumerationTooLargeError(
                f"{self.size} configurations exceed the enumeration cap {cap}"
            )

    def to_json(self) -> dict:
        return {"n": self.n, "alphabets": [list(a) for a in self.alphabets]}

    @staticmethod
    def from_json(doc: dict) -> "ProductSpace":
        try:
            alphabets = tuple(tuple(float(v) for v in a) for a in doc["alphabets"])
        except (KeyError, TypeError) as exc:
            raise SchemaError(f"invalid space document: {exc}") from exc
        space = ProductSpace(alphabets)
        if "n" in doc and int(doc["n"]) != space.n:
            raise SchemaError(f"declared n={doc['n']} does not match {space.n} alphabets")
        return space


def hypercube(n: int) -> ProductSpace:
    """The space {-1,+1}^n with alphabets ordered (-1, +1)."""
    return ProductSpace(tuple((-1.0, 1.0) for _ in range(n)))


def binary(n: int) -> ProductSpace:
    """The space {0,1}^n with alphabets ordered (0, 1)."""
    return ProductSpace(tuple((0.0, 1.0) for _ in range(n)))


def enumerate_configurations(space: ProductSpace, cap: int = ENUMERATION_CAP) -> np.ndarray:
    """All configurations in lexicographic order, one row per configuration."""
    space.check_cap(cap)
    if space.size == 1:
        return np.array([[a[0] for a in space.alphabets]], dtype=float)
    columns = np.empty((space.size, space.n), dtype=float)
    for i in range(space.n):
        grid = space.value_grid(i)
        reps_inner = space.strides[i]
        reps_outer = space.size // (reps_inner * space.shape[i])
        columns[:, i] = np.tile(np.repeat(grid, reps_inner), reps_outer)
    return columns


def _axis_indices(space: ProductSpace, base_digits: np.ndarray, i: int) -> np.ndarray:
    """Flat indices of the section through `base_digits` along coordinate i."""
    base = int(np.dot(base_digits, space.strides)) - base_digits[i] * space.strides[i]
    return base + np.arange(space.shape[i]) * space.strides[i]


class Measure:
    """Base class: a probability measure on a ProductSpace."""

    kind = "abstract"

    def __init__(self, space: ProductSpace):
        self.space = space

    def prob_table(self) -> np.ndarray:
        """Probability of every configuration, in enumeration order."""
        raise NotImplementedError

    def conditional(self, x: Sequence[float], i: int) -> np.ndarray:
        """Conditional distribution of coordinate i given the other coordinates of x."""
        raise NotImplementedError

    def coordinate_support(self, i: int) -> np.ndarray:
        """Alphabet indices of coordinate i carrying positive marginal mass."""
        raise NotImplementedError

    def support_mask(self) -> np.ndarray:
        return self.prob_table() > 0.0

    def to_exact(self) -> "ExactMeasure":
        return ExactMeasure(self.space, self.prob_table())

    def expectation(self, values: np.ndarray) -> float:
        return float(np.dot(self.prob_table(), values))

    def measure_json(self) -> dict:
        raise NotImplementedError

    def to_json(self) -> dict:
        doc = self.space.to_json()
        doc["measure"] = self.measure_json()
        return doc


class ExactMeasure(Measure):
    """Measure given by an explicit probability table over all configurations."""

    kind = "exact"

    def __init__(self, space: ProductSpace, table: np.ndarray):
        super().__init__(space)
        table = np.asarray(table, dtype=float)
        if table.shape != (space.size,):
            raise DomainError(f"table has shape {table.shape}, expected ({space.size},)")
        if np.any(table < 0):
            raise DomainError("probability table has negative entries")
        if abs(float(table.sum()) - 1.0) > 1e-12:
            raise DomainError(f"probability table sums to {table.sum()!r}, not 1")
        self.table = table

    def prob_table(self) -> np.ndarray:
        return self.table

    def conditional(self, x: Sequence[float], i: int) -> np.ndarray:
        digits = self.space.digits_of(x)
        idx = _axis_indices(self.space, digits, i)
        slice_ = self.table[idx]
        mass = float(slice_.sum())
        if mass <= 0.0:
            raise UndefinedConditionalError(
                f"section through {tuple(x)} along coordinate {i} has zero marginal mass"
            )
        return slice_ / mass

    def coordinate_support(self, i: int) -> np.ndarray:
        marg = self.table.reshape(self.space.shape)
        axes = tuple(j for j in range(self.space.n) if j != i)
        marginal = marg.sum(axis=axes) if axes else marg
        return np.nonzero(marginal > 0.0)[0]

    def marginal(self, i: int) -> np.ndarray:
        marg = self.table.reshape(self.space.shape)
        axes = tuple(j for j in range(self.space.n) if j != i)
        return marg.sum(axis=axes) if axes else marg.copy()

    def measure_json(self) -> dict:
        return {"kind": "exact", "table": self.table.tolist()}


class ProductMeasure(Measure):
    """Product of per-coordinate probability tables."""

    kind = "product"

    def __init__(self, space: ProductSpace, tables: Sequence[np.ndarray]):
        super().__init__(space)
        if len(tables) != space.n:
            raise DomainError(f"{len(tables)} marginal tables for {space.n} coordinates")
        clean = []
        for i, t in enumerate(tables):
            t = np.asarray(t, dtype=float)
            if t.shape != (space.shape[i],):
                raise DomainError(f"marginal {i} has shape {t.shape}, expected ({space.shape[i]},)")
            if np.any(t < 0):
                raise DomainError(f"marginal {i} has negative entries")
            if abs(float(t.sum()) - 1.0) > 1e-12:
                raise DomainError(f"marginal {i} sums to {t.sum()!r}, not 1")
            clean.append(t)
        self.tables = tuple(clean)

    def prob_table(self) -> np.ndarray:
        self.space.check_cap()
        table = self.tables[0]
        for t in self.tables[1:]:
            table = np.multiply.outer(table, t)
        return table.reshape(-1)

    def conditional(self, x: Sequence[float], i: int) -> np.ndarray:
        # Independence: conditioning leaves the marginal unchanged.
        self.space.digits_of(x)
        return self.tables[i].copy()

    def coordinate_support(self, i: int) -> np.ndarray:
        return np.nonzero(self.tables[i] > 0.0)[0]

    def measure_json(self) -> dict:
        return {"kind": "product", "tables": [t.tolist() for t in self.tables]}


class GibbsMeasure(Measure):
    """Measure given by a log-weight over configurations, normalized on demand.

    All declared alphabet values are treated as support.
    """

    kind = "gibbs"

    def __init__(
        self,
        space: ProductSpace,
        log_weight: Callable[[np.ndarray], float],
        log_weight_batch: Callable[[np.ndarray], np.ndarray] | None = None,
    ):
        super().__init__(space)
        self.log_weight = log_weight
        self._batch = log_weight_batch
        self._table: np.ndarray | None = None

    def log_weights(self, configs: np.ndarray) -> np.ndarray:
        configs = np.atleast_2d(np.asarray(configs, dtype=float))
        if self._batch is not None:
            out = np.asarray(self._batch(configs), dtype=float)
        else:
            out = np.array([self.log_weight(row) for row in configs], dtype=float)
        if not np.all(np.isfinite(out)):
            raise DomainError("log-weight is not finite on the declared space")
        return out

    def prob_table(self) -> np.ndarray:
        if self._table is None:
            configs = enumerate_configurations(self.space)
            logw = self.log_weights(configs)
            logw -= logw.max()
            w = np.exp(logw)
            self._table = w / w.sum()
        return self._table

    def conditional(self, x: Sequence[float], i: int) -> np.ndarray:
        digits = self.space.digits_of(x)
        grid = self.space.value_grid(i)
        rows = np.tile(np.asarray(x, dtype=float), (len(grid), 1))
        rows[:, i] = grid
        logw = self.log_weights(rows)
        logw -= logw.max()
        w = np.exp(logw)
        return w / w.sum()

    def coordinate_support(self, i: int) -> np.ndarray:
        return np.arange(self.space.shape[i])

    def support_mask(self) -> np.ndarray:
        return np.ones(self.space.size, dtype=bool)

    def measure_json(self) -> dict:
        configs = enumerate_configurations(self.space)
        return {"kind": "gibbs", "log_weights": self.log_weights(configs).tolist()}


def measure_from_json(doc: dict) -> Measure:
    space = ProductSpace.from_json(doc)
    try:
        m = doc["measure"]
        kind = m["kind"]
    except (KeyError, TypeError) as exc:
        raise SchemaError(f"invalid measure document: {exc}") from exc
    if kind == "exact":
        return ExactMeasure(space, np.asarray(m["table"], dtype=float))
    if kind == "product":
        return ProductMeasure(space, [np.asarray(t, dtype=float) for t in m["tables"]])
    if kind == "gibbs":
        logw = np.asarray(m["log_weights"], dtype=float)
        if logw.shape != (space.size,):
            raise SchemaError(f"log_weights has shape {logw.shape}, expected ({space.size},)")

        def lw(row: np.ndarray, _space=space, _logw=logw) -> float:
            return float(_logw[_space.index_of(row)])

        def lw_batch(rows: np.ndarray, _space=space, _logw=logw) -> np.ndarray:
            return np.array([_logw[_space.index_of(r)] for r in rows])

        return GibbsMeasure(space, lw, lw_batch)
    raise SchemaError(f"unknown measure kind {kind!r}")


def uniform(space: ProductSpace) -> ProductMeasure:
    return ProductMeasure(
        space, [np.full(m, 1.0 / m) for m in space.shape]
    )


def rademacher(n: int) -> ProductMeasure:
    return uniform(hypercube(n))


def bernoulli_product(n: int, p: float) -> ProductMeasure:
    """Product Bernoulli(p) on {0,1}^n; P(x_i = 1) = p."""
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"p={p} outside [0,1]")
    return ProductMeasure(binary(n), [np.array([1.0 - p, p])] * n)


def two_point_measure(p: float) -> ExactMeasure:
    """The measure p*delta_1 + (1-p)*delta_0 on the single coordinate {0,1}."""
    if not 0.0 < p < 1.0:
        raise DomainError(f"p={p} outside (0,1)")
    return ExactMeasure(binary(1), np.array([1.0 - p, p]))


def _as_table(g, mu: Measure) -> np.ndarray:
    """Materialize a function (table, callable or FunctionSpec) over the enumeration."""
    if isinstance(g, np.ndarray):
        if g.shape != (mu.space.size,):
            raise DomainError(f"table has shape {g.shape}, expected ({mu.space.size},)")
        return g.astype(float)
    if hasattr(g, "evaluate_table"):
        return g.evaluate_table(mu.space)
    configs = enumerate_configurations(mu.space)
    return np.array([float(g(row)) for row in configs])


def entropy_functional(mu: Measure, g) -> float:
    """Ent(g) = E g log g - (E g) log(E g) for nonnegative g, with 0 log 0 = 0."""
    table = _as_table(g, mu)
    w = mu.prob_table()
    support = w > 0.0
    vals = table[support]
    if np.any(vals < 0.0):
        raise DomainError("entropy functional requires g >= 0 on the support")
    weights = w[support]
    pos = vals > 0.0
    e_g_log_g = float(np.dot(weights[pos], vals[pos] * np.log(vals[pos])))
    mean = float(np.dot(weights, vals))
    if mean > 0.0:
        e_g_log_g -= mean * math.log(mean)
    return e_g_log_g


def lp_norm(mu: Measure, f, p: float, centered: bool = True) -> float:
    """(E |f - [centered] E f|^p)^(1/p) by exact summation."""
    if p < 1.0:
        raise DomainError(f"p={p} < 1")
    table = _as_table(f, mu)
    w = mu.prob_table()
    shift = float(np.dot(w, table)) if centered else 0.0
    dev = np.abs(table - shift)
    m = float(np.dot(w, dev**p))
    return m ** (1.0 / p)


def lp_norm_mc(f_samples: np.ndarray, p: float, center: float | None = None) -> tuple[float, float]:
    """Monte Carlo L^p norm from sampled function values; returns (estimate, standard error).

    `center` defaults to the sample mean.  The standard error is propagated
    through the 1/p power by the delta method.
    """
    if p < 1.0:
        raise DomainError(f"p={p} < 1")
    f_samples = np.asarray(f_samples, dtype=float)
    if f_samples.size == 0:
        raise DomainError("no samples")
    c = float(f_samples.mean()) if center is None else center
    dev = np.abs(f_samples - c) ** p
    m = float(dev.mean())
    se_m = float(dev.std(ddof=1) / math.sqrt(dev.size)) if dev.size > 1 else 0.0
    value = m ** (1.0 / p)
    se = se_m * value / (p * m) if m > 0 else se_m
    return value, se
