"""Optimal-transport kernels over a token-similarity matrix.

A plan moves probability mass between the words of two sentences under
uniform marginals: row sums 1/L1, column sums 1/L2. Two solvers live here:

* ``exact_wmd`` maximizes sum(plan * sims) over the transportation polytope
  with a transportation simplex (northwest-corner start, u-v pivoting,
  Bland's lowest-index rule for both entering and leaving choices, so the
  pivot sequence is deterministic and cannot cycle).
* ``sinkhorn`` solves the entropy-tempered problem
  max sum(plan * sims) - T * sum(plan * log plan) by alternating
  column/row rescaling of the kernel exp(sims / T). The whole iteration
  runs in the log domain, which keeps very small temperatures finite.

Everything is pure; callers may run many solves concurrently.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import NumericalDegeneracyError, ValidationError

DEFAULT_TOL = 1e-6
DEFAULT_MAX_ITERS = 10_000


@dataclass
class TransportPlan:
    """Nonnegative (L1, L2) mass matrix with uniform marginal targets."""

    mass: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return self.mass.shape

    @property
    def row_marginal_target(self) -> float:
        return 1.0 / self.mass.shape[0]

    @property
    def col_marginal_target(self) -> float:
        return 1.0 / self.mass.shape[1]

    def marginal_violation(self) -> tuple[float, float]:
        """Max absolute row-sum and column-sum deviation from the targets."""
        row = np.abs(self.mass.sum(axis=1) - self.row_marginal_target).max()
        col = np.abs(self.mass.sum(axis=0) - self.col_marginal_target).max()
        return float(row), float(col)

    def validate(self, tol: float = 1e-6) -> None:
        if self.mass.ndim != 2:
            raise ValidationError("plan mass must be a 2-d array")
        if (self.mass < 0).any():
            raise ValidationError("plan mass must be nonnegative")
        if abs(float(self.mass.sum()) - 1.0) > tol:
            raise ValidationError("total plan mass must be 1")


@dataclass
class SinkhornResult:
    plan: TransportPlan
    iters_used: int
    converged: bool


def similarity_matrix(words1, words2) -> np.ndarray:
    """Pairwise inner products between the word vectors of two sentences."""
    x1 = np.asarray(words1, dtype=np.float64)
    x2 = np.asarray(words2, dtype=np.float64)
    if x1.ndim != 2 or x2.ndim != 2:
        raise ValidationError("word matrices must be 2-d (words x dims)")
    if x1.shape[0] < 1 or x2.shape[0] < 1:
        raise ValidationError("sentences must contain at least one word")
    if x1.shape[1] != x2.shape[1]:
        raise ValidationError(
            f"dimension mismatch: {x1.shape[1]} vs {x2.shape[1]}"
        )
    sims = x1 @ x2.T
    if not np.isfinite(sims).all():
        raise ValidationError("similarity matrix contains non-finite entries")
    return sims


def _check_sims(sims) -> np.ndarray:
    sims = np.asarray(sims, dtype=np.float64)
    if sims.ndim != 2 or sims.shape[0] < 1 or sims.shape[1] < 1:
        raise ValidationError("similarity matrix must be 2-d and nonempty")
    if not np.isfinite(sims).all():
        raise ValidationError("similarity matrix contains non-finite entries")
    return sims


# ---------------------------------------------------------------------------
# Exact solver (transportation simplex)
# ---------------------------------------------------------------------------


def exact_wmd(sims) -> tuple[float, TransportPlan]:
    """Globally optimal transport value and plan for the maximization LP.

    Equivalent to minimizing cost -sims over the same polytope. L1 = 1 or
    L2 = 1 short-circuits to the unique feasible plan.
    """
    sims = _check_sims(sims)
    n_rows, n_cols = sims.shape
    if n_rows == 1 or n_cols == 1:
        mass = np.full((n_rows, n_cols), 1.0 / (n_rows * n_cols))
    else:
        mass = _transportation_simplex(-sims)
    value = float((mass * sims).sum())
    return value, TransportPlan(mass)


def _northwest_corner(m: int, n: int):
    """Initial basis: staircase path of m + n - 1 cells with allocations.

    Degenerate (zero) allocations appear naturally when a row and a column
    are exhausted at the same time; they keep the basis a spanning tree.
    """
    supply = np.full(m, 1.0 / m)
    demand = np.full(n, 1.0 / n)
    basis: list[tuple[int, int]] = []
    alloc: dict[tuple[int, int], float] = {}
    i = j = 0
    while True:
        amount = min(supply[i], demand[j])
        basis.append((i, j))
        alloc[(i, j)] = amount
        supply[i] -= amount
        demand[j] -= amount
        if i == m - 1 and j == n - 1:
            break
        if supply[i] == 0.0 and i < m - 1:
            i += 1
        else:
            j += 1
    return basis, alloc


def _tree_duals(basis, cost, m, n):
    """Solve u_i + v_j = cost[i, j] over the basis tree, anchored at u_0 = 0."""
    rows_adj: list[list[int]] = [[] for _ in range(m)]
    cols_adj: list[list[int]] = [[] for _ in range(n)]
    for i, j in basis:
        rows_adj[i].append(j)
        cols_adj[j].append(i)
    u = np.full(m, np.nan)
    v = np.full(n, np.nan)
    u[0] = 0.0
    stack = [(True, 0)]  # (is_row, index)
    while stack:
        is_row, idx = stack.pop()
        if is_row:
            for j in rows_adj[idx]:
                if np.isnan(v[j]):
                    v[j] = cost[idx, j] - u[idx]
                    stack.append((False, j))
        else:
            for i in cols_adj[idx]:
                if np.isnan(u[i]):
                    u[i] = cost[i, idx] - v[idx]
                    stack.append((True, i))
    return u, v


def _basis_cycle(basis, entering, m, n):
    """Unique alternating cycle formed by the entering cell and the tree.

    Returns the cycle cell list starting at ``entering``; even positions
    gain mass, odd positions lose it.
    """
    i0, j0 = entering
    rows_adj: list[list[int]] = [[] for _ in range(m)]
    cols_adj: list[list[int]] = [[] for _ in range(n)]
    for i, j in basis:
        rows_adj[i].append(j)
        cols_adj[j].append(i)
    start = (True, i0)
    goal = (False, j0)
    parent: dict[tuple[bool, int], tuple[bool, int] | None] = {start: None}
    queue = deque([start])
    while queue:
        node = queue.popleft()
        if node == goal:
            break
        is_row, idx = node
        neighbors = (
            [(False, j) for j in rows_adj[idx]]
            if is_row
            else [(True, i) for i in cols_adj[idx]]
        )
        for nb in neighbors:
            if nb not in parent:
                parent[nb] = node
                queue.append(nb)
    path_nodes = [goal]
    while path_nodes[-1] != start:
        path_nodes.append(parent[path_nodes[-1]])
    path_nodes.reverse()  # row i0, col a, row b, ..., col j0
    cells = [entering]
    for a, b in zip(path_nodes, path_nodes[1:]):
        (a_is_row, a_idx), (_, b_idx) = a, b
        cells.append((a_idx, b_idx) if a_is_row else (b_idx, a_idx))
    return cells


def _transportation_simplex(cost: np.ndarray) -> np.ndarray:
    """Minimize <plan, cost> over the uniform transportation polytope."""
    m, n = cost.shape
    basis, alloc = _northwest_corner(m, n)
    basis_set = set(basis)
    tol = 1e-12 * max(1.0, float(np.abs(cost).max()))
    max_pivots = 200 * (m + n) * max(m, n) + 1000
    for _ in range(max_pivots):
        u, v = _tree_duals(basis, cost, m, n)
        reduced = cost - u[:, None] - v[None, :]
        # Bland's rule: lowest flat index with negative reduced cost enters.
        negatives = np.flatnonzero(reduced.ravel() < -tol)
        entering = None
        for flat in negatives:
            cell = (int(flat) // n, int(flat) % n)
            if cell not in basis_set:
                entering = cell
                break
        if entering is None:
            break
        cycle = _basis_cycle(basis, entering, m, n)
        minus_cells = cycle[1::2]
        theta = min(alloc[c] for c in minus_cells)
        leaving = min(
            (c for c in minus_cells if alloc[c] == theta),
            key=lambda c: c[0] * n + c[1],
        )
        for pos, cell in enumerate(cycle):
            if pos == 0:
                alloc[cell] = theta
            elif pos % 2 == 1:
                alloc[cell] = max(alloc[cell] - theta, 0.0)
            else:
                alloc[cell] = alloc[cell] + theta
        del alloc[leaving]
        basis_set.discard(leaving)
        basis_set.add(entering)
        basis = [c for c in basis if c != leaving]
        basis.append(entering)
    else:
        raise RuntimeError("transportation simplex failed to terminate")
    mass = np.zeros((m, n))
    for (i, j), value in alloc.items():
        mass[i, j] = value
    return mass


# ---------------------------------------------------------------------------
# Tempered solver (Sinkhorn scaling in the log domain)
# ---------------------------------------------------------------------------


def _logsumexp(a: np.ndarray, axis: int) -> np.ndarray:
    m = a.max(axis=axis)
    return m + np.log(np.exp(a - np.expand_dims(m, axis)).sum(axis=axis))


def _log_kernel(sims: np.ndarray, temperature: float) -> np.ndarray:
    if temperature <= 0:
        raise ValidationError(f"temperature must be positive, got {temperature}")
    with np.errstate(over="ignore"):
        log_kernel = (sims - sims.max()) / temperature
    if not np.isfinite(log_kernel).all():
        raise NumericalDegeneracyError(
            f"temperature {temperature} makes the transport kernel "
            "unrepresentable even after max-shifting"
        )
    return log_kernel


def _potentials_to_plan(log_kernel, log_r, log_c, n_rows) -> TransportPlan:
    mass = np.exp(log_kernel + log_r[:, None] + log_c[None, :])
    # the final step is a row rescale, so make row sums exactly 1/L1
    mass *= (1.0 / n_rows) / mass.sum(axis=1, keepdims=True)
    return TransportPlan(mass)


def sinkhorn(sims, temperature: float, iters: int = 1) -> TransportPlan:
    """Tempered plan after a fixed number of scaling iterations.

    One iteration rescales columns to sum 1/L2, then rows to sum 1/L1, so
    returned plans always have exact row sums; column sums converge with
    more iterations. Initial mass is proportional to exp(sims / T).
    """
    sims = _check_sims(sims)
    if iters < 1:
        raise ValidationError(f"iters must be >= 1, got {iters}")
    n_rows, n_cols = sims.shape
    log_kernel = _log_kernel(sims, temperature)
    log_r = np.zeros(n_rows)
    log_c = np.zeros(n_cols)
    for _ in range(iters):
        log_c = -np.log(n_cols) - _logsumexp(log_kernel + log_r[:, None], axis=0)
        log_r = -np.log(n_rows) - _logsumexp(log_kernel + log_c[None, :], axis=1)
    return _potentials_to_plan(log_kernel, log_r, log_c, n_rows)


def sinkhorn_converged(
    sims,
    temperature: float,
    tol: float = DEFAULT_TOL,
    max_iters: int = DEFAULT_MAX_ITERS,
) -> SinkhornResult:
    """Iterate until the worst column-marginal violation drops to ``tol``.

    Row sums are exact by construction; convergence is measured on
    max_j |sum_i plan[i, j] - 1/L2|. If the budget runs out the last plan
    is returned with ``converged`` False.
    """
    sims = _check_sims(sims)
    if tol <= 0:
        raise ValidationError(f"tol must be positive, got {tol}")
    if max_iters < 1:
        raise ValidationError(f"max_iters must be >= 1, got {max_iters}")
    n_rows, n_cols = sims.shape
    log_kernel = _log_kernel(sims, temperature)
    log_r = np.zeros(n_rows)
    log_c = np.zeros(n_cols)
    col_target = 1.0 / n_cols
    col_lse = _logsumexp(log_kernel + log_r[:, None], axis=0)
    iters_used = 0
    converged = False
    while iters_used < max_iters:
        iters_used += 1
        log_c = -np.log(n_cols) - col_lse
        log_r = -np.log(n_rows) - _logsumexp(log_kernel + log_c[None, :], axis=1)
        col_lse = _logsumexp(log_kernel + log_r[:, None], axis=0)
        violation = np.abs(np.exp(log_c + col_lse) - col_target).max()
        if violation <= tol:
            converged = True
            break
    plan = _potentials_to_plan(log_kernel, log_r, log_c, n_rows)
    return SinkhornResult(plan, iters_used, converged)


def plan_objective(
    plan: TransportPlan,
    sims,
    temperature: float = 0.0,
    include_entropy: bool = False,
) -> float:
    """Transport value sum(plan * sims), optionally plus T times the entropy.

    The entropy term is -sum(plan * log plan) with 0 * log 0 taken as 0.
    """
    sims = _check_sims(sims)
    if plan.mass.shape != sims.shape:
        raise ValidationError(
            f"plan shape {plan.mass.shape} does not match similarity shape {sims.shape}"
        )
    if temperature < 0:
        raise ValidationError(f"temperature must be nonnegative, got {temperature}")
    value = float((plan.mass * sims).sum())
    if include_entropy:
        positive = plan.mass[plan.mass > 0]
        entropy = float(-(positive * np.log(positive)).sum())
        value += float(temperature) * entropy
    return value
