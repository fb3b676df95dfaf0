"""Maximum-weight independent sets and the eradication cost.

An independent set of the kernel is a group set A with K = 0 on A x A, the
diagonal included: a group with internal transmission can never belong to
one.  Leaving exactly an independent set non-vaccinated kills the epidemic,
since the effective operator then squares to zero.  For symmetric supports
the cheapest eradicating strategy is the indicator of a cost-maximal
independent set; for asymmetric supports that value is only an upper bound
on the true eradication cost and is flagged as such.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BudgetExceeded, ValidationError
from .model import CostFunction, MetapopModel, Strategy, c_max, cost
from .spectral import effective_re
from .structure import frobenius_decompose

EXACT_SEARCH_BUDGET = 40


@dataclass(frozen=True)
class IndependentSetResult:
    """A maximum-weight independent set with its cost values.

    ``alpha`` is the saved cost c_max - C(1_A) (the weighted independence
    number; plain mu(A) for the uniform cost) and ``cstar`` the cost C(1_A)
    of vaccinating everybody else.
    """

    set: tuple[int, ...]
    alpha: float
    cstar: float
    weight: float


def _conflict_graph(matrix: np.ndarray):
    n = matrix.shape[0]
    allowed = [i for i in range(n) if matrix[i, i] == 0]
    adjacent = (matrix > 0) | (matrix.T > 0)
    masks = {}
    for i in allowed:
        m = 0
        for j in allowed:
            if j != i and adjacent[i, j]:
                m |= 1 << j
        masks[i] = m
    return allowed, masks


def _mwis_branch_and_bound(allowed, adj, weights):
    """Exact MWIS by include-first branch and bound with a sum bound.

    Returns the lexicographically smallest optimal set (as a sorted index
    tuple) among the optima the search proves equal.
    """
    order = sorted(allowed)
    best_weight = -1.0
    best_set: tuple[int, ...] = ()

    def visit(start: int, banned: int, current: list, weight: float):
        nonlocal best_weight, best_set
        # Greedy bound: everything not yet banned could still be added.
        bound = weight
        for k in range(start, len(order)):
            v = order[k]
            if not (banned >> v & 1):
                bound += weights[v]
        if bound < best_weight:
            return
        chosen = None
        for k in range(start, len(order)):
            v = order[k]
            if not (banned >> v & 1):
                chosen = (k, v)
                break
        if chosen is None:
            candidate = tuple(current)
            if weight > best_weight or (
                weight == best_weight and candidate < best_set
            ):
                best_weight = weight
                best_set = candidate
            return
        k, v = chosen
        current.append(v)
        visit(k + 1, banned | adj[v] | (1 << v), current, weight + weights[v])
        current.pop()
        visit(k + 1, banned | (1 << v), current, weight)

    visit(0, 0, [], 0.0)
    return best_set, best_weight if best_weight >= 0 else 0.0


def max_independent_set(
    model: MetapopModel, cost_fn: CostFunction, force: bool = False
) -> IndependentSetResult:
    """Exact maximum-weight independent set of the kernel support.

    Vertex weights are coef_i * mu_i; groups with K_ii > 0 are excluded
    outright.  Models beyond 40 groups are refused unless ``force`` is set.
    """
    if model.n > EXACT_SEARCH_BUDGET and not force:
        raise BudgetExceeded(
            f"exact search capped at {EXACT_SEARCH_BUDGET} groups; pass force=True"
        )
    coef = cost_fn.coefficient_vector(model.n)
    weights = coef * model.weights
    allowed, adj = _conflict_graph(model.matrix)
    best_set, weight = _mwis_branch_and_bound(allowed, adj, weights)
    strategy = Strategy.indicator(model.n, best_set)
    cstar = cost(cost_fn, model, strategy)
    alpha = c_max(cost_fn, model) - cstar
    return IndependentSetResult(
        set=tuple(sorted(best_set)), alpha=alpha, cstar=cstar, weight=float(weight)
    )


@dataclass(frozen=True)
class EradicationResult:
    """Cheapest (or cheapest-known) strategy with R_e = 0.

    ``exact`` is True only when the support is symmetric, where the
    independent-set characterization of the eradication cost applies;
    otherwise ``cstar`` is an upper bound.
    """

    cstar: float
    strategy: Strategy
    set: tuple[int, ...]
    alpha: float
    exact: bool


def has_symmetric_support(model: MetapopModel) -> bool:
    pos = model.matrix > 0
    return bool(np.array_equal(pos, pos.T))


def eradication_cost(
    model: MetapopModel, cost_fn: CostFunction, force: bool = False
) -> EradicationResult:
    """Minimal vaccination cost that completely stops transmission.

    Symmetric support: exact, equal to C(1_A) for a cost-maximal independent
    set A.  Asymmetric support: upper bound from leaving the quasi-nilpotent
    remainder plus per-atom independent sets non-vaccinated, flagged
    ``exact=False``.
    """
    if has_symmetric_support(model):
        res = max_independent_set(model, cost_fn, force=force)
        chosen = res.set
        exact = True
    else:
        decomp = frobenius_decompose(model)
        kept = list(decomp.remainder)
        for atom in decomp.atoms:
            sub_weights = model.weights[list(atom)]
            scale = sub_weights.sum()
            sub_model = MetapopModel(
                weights=sub_weights / scale,
                matrix=model.matrix[np.ix_(list(atom), list(atom))],
            )
            sub_cost = CostFunction.affine(
                cost_fn.coefficient_vector(model.n)[list(atom)] * scale
            )
            sub = max_independent_set(sub_model, sub_cost, force=force)
            kept.extend(atom[j] for j in sub.set)
        chosen = tuple(sorted(kept))
        exact = False
    strategy = Strategy.indicator(model.n, chosen)
    value = cost(cost_fn, model, strategy)
    residual = effective_re(model, strategy)
    if residual > 1e-10:
        raise ValidationError(
            f"eradication strategy leaves R_e = {residual}, above 1e-10"
        )
    return EradicationResult(
        cstar=value,
        strategy=strategy,
        set=chosen,
        alpha=c_max(cost_fn, model) - value,
        exact=exact,
    )
