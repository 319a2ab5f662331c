"""Ranked and sampled solutions of the per-step association problem.

A problem instance is a log-score matrix with one row per label and columns
[0] death/not-born, [1] undetected, [2+j] measurement j.  A solution picks
one column per row, measurement columns at most once; its score is the sum
of the picked entries (maximize).  Entries of -inf mark forbidden outcomes.

Solutions are plain tuples of column indices, one per row.
"""
from __future__ import annotations

import heapq
import itertools
import math

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import InfeasibleAssociationError

__all__ = ["murty_kbest", "enumerate_solutions", "ranked_solutions", "gibbs_solutions"]

# Below this candidate count, exhaustive enumeration beats Murty's queue.
_ENUMERATION_LIMIT = 4096


def solution_score(cost: np.ndarray, solution: tuple[int, ...]) -> float:
    return float(sum(cost[i, c] for i, c in enumerate(solution)))


def _is_valid(solution: tuple[int, ...]) -> bool:
    meas = [c for c in solution if c >= 2]
    return len(meas) == len(set(meas))


# Valid column combinations depend only on the matrix shape; cache them.
_combo_cache: dict[tuple[int, int], np.ndarray] = {}


def _valid_combos(n_rows: int, n_cols: int) -> np.ndarray:
    key = (n_rows, n_cols)
    hit = _combo_cache.get(key)
    if hit is None:
        combos = [
            c for c in itertools.product(range(n_cols), repeat=n_rows) if _is_valid(c)
        ]
        hit = np.array(combos, dtype=np.intp).reshape(len(combos), n_rows)
        _combo_cache[key] = hit
    return hit


def _enumerate_scored(cost: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Feasible combos (K, n_rows) and scores, best first.

    A stable sort on descending score keeps the lexicographic product order
    as the tie-break.
    """
    n_rows, n_cols = cost.shape
    combos = _valid_combos(n_rows, n_cols)
    scores = cost[np.arange(n_rows), combos].sum(axis=1)
    feasible = np.isfinite(scores)
    combos, scores = combos[feasible], scores[feasible]
    order = np.argsort(-scores, kind="stable")
    return combos[order], scores[order]


def _to_tuples(
    combos: np.ndarray, scores: np.ndarray, k: int | None = None
) -> list[tuple[tuple[int, ...], float]]:
    upto = len(scores) if k is None else min(k, len(scores))
    return [
        (tuple(map(int, combos[i])), float(scores[i])) for i in range(upto)
    ]


def enumerate_solutions(cost: np.ndarray) -> list[tuple[tuple[int, ...], float]]:
    """All valid finite-score solutions, best first (ties lexicographic)."""
    if cost.shape[0] == 0:
        return [((), 0.0)]
    return _to_tuples(*_enumerate_scored(cost))


def _extended_matrix(cost: np.ndarray) -> np.ndarray:
    """Rectangular form with per-row copies of the two shared outcome columns.

    Row i may use column i (death), n+i (undetected), or 2n+j (measurement j);
    every column is then exclusive and the Hungarian algorithm applies.
    """
    n, n_cols = cost.shape
    m = n_cols - 2
    ext = np.full((n, 2 * n + m), -np.inf)
    idx = np.arange(n)
    ext[idx, idx] = cost[:, 0]
    ext[idx, n + idx] = cost[:, 1]
    ext[:, 2 * n :] = cost[:, 2:]
    return ext


def _collapse(ext_solution: np.ndarray, n: int) -> tuple[int, ...]:
    out = []
    for col in ext_solution:
        if col < n:
            out.append(0)
        elif col < 2 * n:
            out.append(1)
        else:
            out.append(2 + int(col) - 2 * n)
    return tuple(out)


def _best_assignment(ext: np.ndarray) -> tuple[np.ndarray, float] | None:
    """Optimal row-to-column assignment of ext, or None when infeasible.

    -inf entries are replaced by a sentinel low enough that any assignment
    touching one scores below every fully-finite assignment.
    """
    finite = ext[np.isfinite(ext)]
    if finite.size == 0:
        return None
    lo, hi = float(finite.min()), float(finite.max())
    sentinel = lo - (hi - lo + 1.0) * (ext.shape[0] + 1)
    work = np.where(np.isfinite(ext), ext, sentinel)
    rows, cols = linear_sum_assignment(work, maximize=True)
    if np.any(work[rows, cols] == sentinel):
        return None
    return cols, float(work[rows, cols].sum())


def murty_kbest(cost: np.ndarray, k: int) -> list[tuple[tuple[int, ...], float]]:
    """The k best solutions by Murty's partitioning of the assignment space.

    Exact and sorted by descending score; ties break on the lexicographic
    encoding of the solution tuple.  Returns fewer than k entries when the
    feasible set is smaller.
    """
    n = cost.shape[0]
    if n == 0:
        return [((), 0.0)]
    ext = _extended_matrix(cost)
    first = _best_assignment(ext)
    if first is None:
        return []
    cols, score = first
    queue: list = []
    counter = itertools.count()
    heapq.heappush(queue, (-score, _collapse(cols, n), next(counter), ext, cols))
    out: list[tuple[tuple[int, ...], float]] = []
    while queue and len(out) < k:
        # Equal-score solutions can hide in subproblems not yet expanded, so
        # drain and partition the whole tie group before emitting it sorted.
        target = queue[0][0]
        bucket: list[tuple[int, ...]] = []
        while queue and queue[0][0] == target:
            _, encoded, _, node, sol_cols = heapq.heappop(queue)
            bucket.append(encoded)
            for t in range(n):
                child = node.copy()
                child[t, sol_cols[t]] = -np.inf
                for r in range(t):
                    keep = sol_cols[r]
                    child[r, :] = -np.inf
                    child[r, keep] = node[r, keep]
                best = _best_assignment(child)
                if best is not None:
                    c_cols, c_score = best
                    heapq.heappush(
                        queue,
                        (-c_score, _collapse(c_cols, n), next(counter), child, c_cols),
                    )
        bucket.sort()
        for encoded in bucket:
            if len(out) < k:
                out.append((encoded, -target))
    return out


def ranked_solutions(cost: np.ndarray, k: int) -> list[tuple[tuple[int, ...], float]]:
    """Exact k-best solutions; enumerates outright when the space is small."""
    if k < 1:
        raise ValueError("k must be >= 1")
    n_rows, n_cols = cost.shape
    if n_rows == 0:
        return [((), 0.0)]
    if n_cols**n_rows <= _ENUMERATION_LIMIT:
        sols = _to_tuples(*_enumerate_scored(cost), k=k)
    else:
        sols = murty_kbest(cost, k)[:k]
    if not sols:
        raise InfeasibleAssociationError("no feasible association for cost matrix")
    return sols


def gibbs_solutions(
    cost: np.ndarray, iterations: int, rng: np.random.Generator
) -> list[tuple[tuple[int, ...], float]]:
    """Distinct solutions visited by a Gibbs sweep over rows.

    Each row is resampled in turn from its conditional (candidate columns =
    both shared outcomes plus measurements unused by other rows), so the
    chain targets the normalized solution scores; every state the chain
    passes through is recorded.  The initializing solution (per-row best of
    death/undetected columns, else the overall best) is always part of the
    output.  Deterministic for a given generator state.
    """
    n, n_cols = cost.shape
    if n == 0:
        return [((), 0.0)]

    no_meas = np.argmax(cost[:, :2], axis=1)
    init = tuple(int(c) for c in no_meas)
    if not math.isfinite(solution_score(cost, init)):
        best = murty_kbest(cost, 1)
        if not best:
            raise InfeasibleAssociationError("no feasible association for cost matrix")
        init = best[0][0]

    # Row-wise max-shifted exponentials, precomputed; -inf maps to 0 weight.
    exp_rows = []
    for i in range(n):
        finite = [v for v in cost[i] if math.isfinite(v)]
        shift = max(finite) if finite else 0.0
        exp_rows.append([math.exp(v - shift) if math.isfinite(v) else 0.0 for v in cost[i]])

    current = list(init)
    taken = {c for c in current if c >= 2}
    seen = {init}
    ordered = [init]
    rand = rng.random
    for _ in range(iterations):
        for i in range(n):
            own = current[i]
            if own >= 2:
                taken.discard(own)
            weights = exp_rows[i]
            cands = [0, 1] + [c for c in range(2, n_cols) if c not in taken]
            total = 0.0
            cum = []
            for c in cands:
                total += weights[c]
                cum.append(total)
            if total <= 0.0:
                if own >= 2:
                    taken.add(own)
                continue  # row currently has no finite outcome; keep it
            u = rand() * total
            for c, acc in zip(cands, cum):
                if u < acc:
                    current[i] = c
                    break
            else:
                current[i] = cands[-1]
            if current[i] >= 2:
                taken.add(current[i])
            visited = tuple(current)
            if visited not in seen:
                seen.add(visited)
                ordered.append(visited)
    return [(sol, solution_score(cost, sol)) for sol in ordered]
