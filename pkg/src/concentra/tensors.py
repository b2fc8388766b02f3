"""Norms of dense tensors: Hilbert-Schmidt, operator norm, and partition norms.

The operator norm is computed by alternating maximization over the axis
vectors: with all but one axis fixed, the optimal vector is the normalized
contraction, so every sub-step is exact and the final contraction value is a
certified lower bound.  Tensor operator norms are NP-hard in general for
order >= 3; multi-start makes the lower bound reliable at desk scale.
"""
from __future__ import annotations

import string
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .errors import DomainError

DEFAULT_RESTARTS = 32
DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 10_000


def hs_norm(tensor: np.ndarray) -> float:
    """Hilbert-Schmidt (Frobenius) norm: the Euclidean norm of all entries."""
    return float(np.linalg.norm(np.asarray(tensor, dtype=float).ravel()))


@dataclass
class OpNormResult:
    value: float
    vectors: tuple[np.ndarray, ...]
    converged: bool
    iterations: int

    def __float__(self) -> float:
        return self.value


def _contract_all(tensor: np.ndarray, vectors: Sequence[np.ndarray]) -> float:
    out = tensor
    for v in reversed(vectors):
        out = np.tensordot(out, v, axes=([out.ndim - 1], [0]))
    return float(out)


def _contract_except(tensor: np.ndarray, vectors: Sequence[np.ndarray], skip: int) -> np.ndarray:
    out = tensor
    for axis in range(tensor.ndim - 1, -1, -1):
        if axis == skip:
            continue
        out = np.tensordot(out, vectors[axis], axes=([axis if axis < skip else out.ndim - 1], [0]))
    return out


def _normalize(v: np.ndarray) -> np.ndarray:
    norm = np.linalg.norm(v)
    if norm == 0.0:
        unit = np.zeros_like(v)
        unit[0] = 1.0
        return unit
    return v / norm


def _gram_power_refine(matrix: np.ndarray, v: np.ndarray, tol: float, max_iter: int):
    """Power iteration on the Gram form A^T A starting from v; returns (sigma, u, v, iters)."""
    sigma = 0.0
    iterations = 0
    v = _normalize(v)
    for iterations in range(1, max_iter + 1):
        w = matrix @ v
        new_sigma = float(np.linalg.norm(w))
        if new_sigma == 0.0:
            return 0.0, _normalize(w), v, iterations
        u = w / new_sigma
        v = _normalize(matrix.T @ u)
        if abs(new_sigma - sigma) <= tol * max(1.0, new_sigma):
            sigma = new_sigma
            break
        sigma = new_sigma
    u = _normalize(matrix @ v)
    sigma = float(u @ matrix @ v)
    return sigma, u, v, iterations


def op_norm(
    tensor: np.ndarray,
    restarts: int = DEFAULT_RESTARTS,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    seed: int = 0,
) -> OpNormResult:
    """sup over unit vectors v^1..v^d of <v^1 x ... x v^d, A>, by multi-start ALS.

    The returned value is the contraction against the returned unit vectors,
    hence always a certified lower bound; for d <= 2 the best point is refined
    by power iteration on the Gram form.  Nonnegative tensors get a positive
    start and entrywise-nonnegative maximizers.
    """
    tensor = np.asarray(tensor, dtype=float)
    if restarts < 1:
        raise DomainError("restarts must be >= 1")
    d = tensor.ndim
    if d == 0:
        return OpNormResult(abs(float(tensor)), (), True, 0)
    if d == 1:
        value = float(np.linalg.norm(tensor))
        return OpNormResult(value, (_normalize(tensor.copy()),), True, 0)

    rng = np.random.default_rng(seed)
    nonnegative = bool(np.all(tensor >= 0.0))
    best_value = -np.inf
    best_vectors: tuple[np.ndarray, ...] | None = None
    total_iterations = 0
    converged = True

    for restart in range(restarts):
        if restart == 0:
            vectors = [_normalize(np.ones(m)) for m in tensor.shape]
        else:
            vectors = [_normalize(rng.standard_normal(m)) for m in tensor.shape]
        value = _contract_all(tensor, vectors)
        this_converged = False
        for _ in range(max_iter):
            for axis in range(d):
                contraction = _contract_except(tensor, vectors, axis)
                vectors[axis] = _normalize(contraction)
            total_iterations += 1
            new_value = _contract_all(tensor, vectors)
            if abs(new_value - value) <= tol * max(1.0, abs(new_value)):
                value = new_value
                this_converged = True
                break
            value = new_value
        converged &= this_converged
        if value > best_value:
            best_value = value
            best_vectors = tuple(v.copy() for v in vectors)

    assert best_vectors is not None
    if d == 2:
        sigma, u, v, iters = _gram_power_refine(tensor, best_vectors[1], tol, max_iter)
        total_iterations += iters
        if sigma > best_value:
            best_value, best_vectors = sigma, (u, v)
        converged &= iters < max_iter
    if nonnegative:
        # For a nonnegative tensor the optimum is attained at nonnegative
        # vectors, and flipping signs entrywise cannot decrease the value.
        abs_vectors = tuple(np.abs(v) for v in best_vectors)
        abs_value = _contract_all(tensor, abs_vectors)
        if abs_value >= best_value:
            best_value, best_vectors = abs_value, abs_vectors
    return OpNormResult(max(best_value, 0.0), best_vectors, converged, total_iterations)


def _batch_letters(k: int) -> tuple[str, list[str]]:
    letters = string.ascii_lowercase[:k]
    return letters, list(letters)


def op_norm_batch(
    tensors: np.ndarray,
    restarts: int = 8,
    sweeps: int = 200,
    tol: float = 1e-9,
    seed: int = 0,
) -> np.ndarray:
    """Operator norms of a batch of tensors, shape (B, n1, ..., nk) -> (B,).

    Matrices and vectors are handled exactly (batched SVD / Euclidean norms);
    higher orders run a batched multi-start ALS and return certified lower
    bounds.
    """
    tensors = np.asarray(tensors, dtype=float)
    k = tensors.ndim - 1
    if k < 1:
        raise DomainError("expected a batch of tensors")
    if k == 1:
        return np.linalg.norm(tensors, axis=1)
    if k == 2:
        return np.linalg.svd(tensors, compute_uv=False)[:, 0]

    rng = np.random.default_rng(seed)
    batch = tensors.shape[0]
    dims = tensors.shape[1:]
    letters, axis_letters = _batch_letters(k)
    vectors = []
    for axis, m in enumerate(dims):
        v = rng.standard_normal((batch, restarts, m))
        v[:, 0, :] = 1.0  # deterministic positive start per tensor
        v /= np.linalg.norm(v, axis=2, keepdims=True)
        vectors.append(v)

    full_spec = "z" + letters + "," + ",".join(f"zy{c}" for c in axis_letters) + "->zy"

    def contract_value() -> np.ndarray:
        return np.einsum(full_spec, tensors, *vectors)

    value = contract_value()
    for _ in range(sweeps):
        for axis in range(k):
            others = [vectors[a] for a in range(k) if a != axis]
            spec = (
                "z"
                + letters
                + ","
                + ",".join(f"zy{axis_letters[a]}" for a in range(k) if a != axis)
                + "->zy"
                + axis_letters[axis]
            )
            contraction = np.einsum(spec, tensors, *others)
            norms = np.linalg.norm(contraction, axis=2, keepdims=True)
            safe = np.where(norms == 0.0, 1.0, norms)
            vectors[axis] = contraction / safe
        new_value = contract_value()
        if np.all(np.abs(new_value - value) <= tol * np.maximum(1.0, np.abs(new_value))):
            value = new_value
            break
        value = new_value
    return np.maximum(value.max(axis=1), 0.0)


@dataclass(frozen=True)
class Partition:
    """Disjoint nonempty blocks covering range(order)."""

    order: int
    blocks: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        seen: set[int] = set()
        for block in self.blocks:
            if len(block) == 0:
                raise DomainError("partition blocks must be nonempty")
            for i in block:
                if not 0 <= i < self.order:
                    raise DomainError(f"axis {i} outside range(0, {self.order})")
                if i in seen:
                    raise DomainError(f"axis {i} appears in two blocks")
                seen.add(i)
        if len(seen) != self.order:
            raise DomainError("partition blocks must cover every axis")

    @staticmethod
    def of(order: int, *blocks: Sequence[int]) -> "Partition":
        return Partition(order, tuple(tuple(sorted(b)) for b in blocks))

    @property
    def block_count(self) -> int:
        return len(self.blocks)

    def is_single_block(self) -> bool:
        return len(self.blocks) == 1

    def is_all_singletons(self) -> bool:
        return all(len(b) == 1 for b in self.blocks)

    def __str__(self) -> str:
        return "|".join(",".join(str(i) for i in b) for b in self.blocks)


def enumerate_partitions(order: int) -> list[Partition]:
    """All Bell(order) set partitions of range(order), via restricted growth strings."""
    if order < 1:
        raise DomainError("order must be >= 1")
    if order > 6:
        raise DomainError("partition enumeration supported up to order 6")
    out: list[Partition] = []

    def grow(assignment: list[int], used: int) -> Iterator[list[int]]:
        if len(assignment) == order:
            yield assignment
            return
        for label in range(used + 1):
            yield from grow(assignment + [label], max(used, label + 1))

    for assignment in grow([], 0):
        count = max(assignment) + 1
        blocks = [tuple(i for i, a in enumerate(assignment) if a == b) for b in range(count)]
        out.append(Partition(order, tuple(blocks)))
    return out


def partition_norm(
    tensor: np.ndarray,
    partition: Partition,
    restarts: int = DEFAULT_RESTARTS,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    seed: int = 0,
) -> float:
    """sup of the contraction against one unit vector per partition block.

    Grouping each block's axes and flattening reduces the supremum to the
    operator norm of the reshaped tensor, so the single-block partition gives
    the Hilbert-Schmidt norm and all-singletons gives the operator norm.
    """
    tensor = np.asarray(tensor, dtype=float)
    if tensor.ndim != partition.order:
        raise DomainError(
            f"partition of order {partition.order} applied to a {tensor.ndim}-tensor"
        )
    if partition.is_single_block():
        return hs_norm(tensor)
    axis_order = [i for block in partition.blocks for i in block]
    moved = np.transpose(tensor, axis_order)
    block_dims = []
    cursor = 0
    for block in partition.blocks:
        span = moved.shape[cursor : cursor + len(block)]
        block_dims.append(int(np.prod(span)))
        cursor += len(block)
    reshaped = moved.reshape(block_dims)
    return op_norm(reshaped, restarts=restarts, tol=tol, max_iter=max_iter, seed=seed).value
