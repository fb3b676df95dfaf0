"""Pareto and anti-Pareto vaccination frontiers.

The feasible set at budget c is the box slice {eta in [0,1]^N : C(eta) <= c},
a halfspace w . eta >= b in the natural variables (w_i = coef_i mu_i,
b = c_max - c).  The Pareto side minimizes R_e over it with projected
gradient descent (eigenvector gradients, Armijo backtracking, exact
projection onto box-and-halfspace); under a Convex verdict a single start is
certified global, otherwise the best of 16 starts is an upper bound.  The
anti-Pareto side maximizes R_e over {C(eta) >= c}: under a Convex verdict
the maximum sits at a polytope vertex with at most one fractional
coordinate, enumerated exactly up to 20 groups; otherwise the better of the
enumeration and multi-start projected ascent is reported as a certified
lower bound.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .convexity import classify_convexity
from .errors import (
    BudgetExceeded,
    NonConvergence,
    NonSimple,
    PreconditionFailed,
    ValidationError,
    ZeroRadius,
)
from .independent import eradication_cost
from .model import CostFunction, MetapopModel, Strategy, c_max, cost
from .spectral import (
    _DENSE_CUTOFF,
    _dense_radius,
    effective_re,
    effective_re_batch,
    re_gradient,
    spectral_radius,
)
from .structure import frobenius_decompose

ARMIJO_SHRINK = 0.5
ARMIJO_DECREASE = 1e-4
PGD_ITERATION_CAP = 500
MULTISTARTS = 16
VERTEX_BUDGET = 20
LOSS_ZERO_TOL = 1e-8
_STARTS_SEED = 7151020
_FD_STEP = 1e-6
_BATCH = 65536


def _thread_count() -> int:
    raw = os.environ.get("VAXFRONT_THREADS", "1")
    try:
        value = int(raw)
    except ValueError:
        return 1
    if value == 0:
        return min(4, os.cpu_count() or 1)
    return max(1, value)


def _maybe_parallel_map(fn, items):
    workers = _thread_count()
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _raise_to_budget(x: np.ndarray, w: np.ndarray, target: float) -> np.ndarray:
    """Projection onto {y in [0,1]^N : w . y >= target} when clip(x) violates it.

    The projection is clip(x + t w) for the smallest multiplier t >= 0 with
    w . clip(x + t w) = target; that value function is piecewise linear and
    increasing in t, so t is found exactly by a breakpoint sweep.
    """
    low_bp = -x / w
    high_bp = (1.0 - x) / w
    bps = np.concatenate([low_bp, high_bp, [0.0]])
    bps = np.unique(bps[bps >= 0.0])
    trial = np.clip(x[None, :] + bps[:, None] * w[None, :], 0.0, 1.0)
    values = trial @ w
    k = int(np.searchsorted(values, target, side="left"))
    if k >= bps.size:
        return np.ones_like(x)
    if k == 0 or values[k] <= target:
        return trial[k]
    t_lo, t_hi = bps[k - 1], bps[k]
    probe = x + 0.5 * (t_lo + t_hi) * w
    active = (probe > 0.0) & (probe < 1.0)
    slope = float(w[active] @ w[active])
    if slope <= 0.0:
        return trial[k]
    t = t_lo + (target - values[k - 1]) / slope
    return np.clip(x + t * w, 0.0, 1.0)


def _project_budget(x: np.ndarray, w: np.ndarray, b: float, sense: str) -> np.ndarray:
    """Exact Euclidean projection onto [0,1]^N intersected with a halfspace.

    ``sense='ge'`` projects onto {w . eta >= b}, ``'le'`` onto {w . eta <= b};
    the latter reduces to the former by the reflection eta -> 1 - eta.
    """
    y = np.clip(x, 0.0, 1.0)
    value = float(w @ y)
    if sense == "ge":
        if value >= b:
            return y
        return _raise_to_budget(x, w, b)
    if value <= b:
        return y
    return 1.0 - _raise_to_budget(1.0 - x, w, float(w.sum()) - b)


def _fd_gradient(model: MetapopModel, eta: np.ndarray) -> np.ndarray:
    """Central finite differences; fallback where the eigen-gradient fails."""
    n = eta.size
    probes = np.empty((2 * n, n))
    for j in range(n):
        up = eta.copy()
        dn = eta.copy()
        up[j] = min(1.0, eta[j] + _FD_STEP)
        dn[j] = max(0.0, eta[j] - _FD_STEP)
        probes[2 * j] = up
        probes[2 * j + 1] = dn
    values = effective_re_batch(model, probes)
    grad = np.empty(n)
    for j in range(n):
        h = probes[2 * j, j] - probes[2 * j + 1, j]
        grad[j] = (values[2 * j] - values[2 * j + 1]) / h if h > 0 else 0.0
    return grad


def _gradient(model: MetapopModel, eta: np.ndarray, rng: np.random.Generator):
    """Eigen-gradient with perturb-retry and finite-difference fallbacks.

    Returns ``(grad, used_fallback)``; the gradient is None exactly when the
    radius is zero, where the minimization has nothing left to improve.
    """
    try:
        return re_gradient(model, Strategy(eta)), False
    except ZeroRadius:
        return None, False
    except NonSimple:
        bumped = eta.copy()
        j = int(rng.integers(eta.size))
        bumped[j] = min(1.0, bumped[j] + 1e-9)
        try:
            return re_gradient(model, Strategy(bumped)), True
        except (NonSimple, ZeroRadius, NonConvergence):
            return _fd_gradient(model, eta), True
    except NonConvergence:
        return _fd_gradient(model, eta), True


def _loss_value(model: MetapopModel, x: np.ndarray) -> float:
    """R_e without the Strategy wrapper, for the solver inner loops."""
    effective = model.matrix * x
    if model.n <= _DENSE_CUTOFF:
        return _dense_radius(effective)
    return spectral_radius(effective)


def _pgd(model, project, x0, maximize, max_iter=PGD_ITERATION_CAP,
         window_tol=1e-9):
    """Projected gradient with Armijo backtracking; returns (value, point).

    Besides the per-step Armijo test, progress is watched over a sliding
    window: zigzagging between nearly tied spectral branches makes steady
    but negligible gains, and the window rule cuts those crawls off.
    """
    rng = np.random.default_rng(_STARTS_SEED + 1)
    sign = -1.0 if maximize else 1.0
    x = project(x0)
    fx = _loss_value(model, x)
    fallback_hits = 0
    window: list[float] = []
    last_step = None
    for _ in range(max_iter):
        if not maximize and fx <= 1e-13:
            break
        if fallback_hits >= 2:
            grad = _fd_gradient(model, x)
        else:
            grad, used_fallback = _gradient(model, x, rng)
            if used_fallback:
                fallback_hits += 1
        if grad is None:
            break  # radius is zero; nothing to improve on the min side
        g = sign * grad
        gmax = np.abs(g).max()
        if gmax <= 1e-15:
            break
        # Warm-start the backtracking from the latest accepted step; retry
        # once from the nominal step before declaring the iterate stationary.
        trial_steps = [0.5 / gmax]
        if last_step is not None:
            trial_steps.insert(0, min(4.0 * last_step, 100.0 / gmax))
        improved = False
        for step in trial_steps:
            for _ in range(40):
                candidate = project(x - step * g)
                delta = candidate - x
                if np.abs(delta).max() <= 1e-14:
                    break
                fc = _loss_value(model, candidate)
                if sign * (fc - fx) <= ARMIJO_DECREASE * float(g @ delta):
                    x, fx = candidate, fc
                    improved = True
                    last_step = step
                    break
                step *= ARMIJO_SHRINK
            if improved:
                break
        if not improved:
            break
        window.append(fx)
        if len(window) > 12:
            window.pop(0)
            if sign * (window[0] - fx) <= window_tol * max(1.0, abs(fx)):
                break
    return fx, x


def _round_key(x: np.ndarray):
    return tuple(np.round(x / 1e-9) * 1e-9)


def _better(best, candidate, maximize):
    """Ties go to the lexicographically smallest strategy rounded to 1e-9."""
    if best is None:
        return True
    fb, xb = best
    fc, xc = candidate
    if maximize:
        if fc > fb:
            return True
        return fc == fb and _round_key(xc) < _round_key(xb)
    if fc < fb:
        return True
    return fc == fb and _round_key(xc) < _round_key(xb)


@dataclass(frozen=True)
class OptimalPoint:
    cost: float
    loss: float
    strategy: Strategy
    status: str  # Converged | MultiStartBest | VertexEnumerated


def _min_starts(n: int, project, count: int = MULTISTARTS) -> list[np.ndarray]:
    rng = np.random.default_rng(_STARTS_SEED)
    starts = [project(np.full(n, 0.5)), project(np.ones(n)), project(np.zeros(n))]
    while len(starts) < count:
        starts.append(project(rng.random(n)))
    return starts[:count]


def optimal_loss(
    model: MetapopModel,
    cost_fn: CostFunction,
    c: float,
    convex: bool | None = None,
    extra_starts: tuple[np.ndarray, ...] = (),
    starts: int = MULTISTARTS,
    max_iter: int = PGD_ITERATION_CAP,
    window_tol: float = 1e-9,
) -> OptimalPoint:
    """Minimize R_e subject to C(eta) <= c.

    Returns an upper bound on the true optimum in general; under a Convex
    (or Linear) verdict the single-start solution is the global optimum and
    is labelled Converged.
    """
    n = model.n
    cmax = c_max(cost_fn, model)
    if c < -1e-12 or c > cmax + 1e-9:
        raise ValidationError(f"budget {c} outside [0, {cmax}]")
    w = cost_fn.coefficient_vector(n) * model.weights
    b = cmax - c
    if b <= 0:
        zero = Strategy.zeros(n)
        return OptimalPoint(cost=c, loss=0.0, strategy=zero, status="Converged")

    def project(x):
        return _project_budget(x, w, b, "ge")

    if convex is None:
        verdict = classify_convexity(model).verdict
        convex = verdict in ("Convex", "Linear")
    start_points = [project(np.asarray(s, dtype=float)) for s in extra_starts]
    # The eradicating independent-set strategy is the one known point with
    # loss exactly zero; when it fits the budget the solve is settled, and
    # otherwise its projection is a strong start near the eradication end.
    try:
        erad = eradication_cost(model, cost_fn)
    except BudgetExceeded:
        erad = None
    if erad is not None:
        if erad.cstar <= c + 1e-15:
            return OptimalPoint(
                cost=c, loss=0.0, strategy=erad.strategy, status="Converged"
            )
        start_points.append(project(erad.strategy.values))
    if convex:
        start_points += [project(np.full(n, 0.5))]
    else:
        start_points += _min_starts(n, project, starts)
    best = None
    for fx, x in _maybe_parallel_map(
        lambda s: _pgd(
            model, project, s, maximize=False, max_iter=max_iter,
            window_tol=window_tol,
        ),
        start_points,
    ):
        if _better(best, (fx, x), maximize=False):
            best = (fx, x)
        if best[0] <= 1e-13:
            break
    status = "Converged" if convex else "MultiStartBest"
    return OptimalPoint(
        cost=c, loss=float(best[0]), strategy=Strategy(best[1]), status=status
    )


def _maximal_vertices(w: np.ndarray, budget: float):
    """Yield the maximal vertices of {eta in [0,1]^N : w . eta <= budget}.

    These are 0/1 corners that cannot take another full coordinate, plus
    corners topped off with a single fractional coordinate sitting exactly on
    the budget hyperplane.  Monotonicity of R_e makes them sufficient for the
    maximum; convexity makes the enumeration exact.
    """
    n = w.size
    order = np.argsort(-w, kind="stable")  # heaviest first for earlier pruning
    eps = 1e-15

    def rec(pos: int, chosen: list, spent: float):
        rem = budget - spent
        for k in range(pos, n):
            j = int(order[k])
            if w[j] <= rem + eps:
                chosen.append(j)
                yield from rec(k + 1, chosen, spent + w[j])
                chosen.pop()
        in_set = set(chosen)
        outside = [j for j in range(n) if j not in in_set]
        # A corner topped off with one fractional coordinate exhausts the
        # budget exactly, hence is always a maximal vertex; plain corners are
        # maximal only when nothing else fits.
        emitted = False
        if rem > eps:
            for j in outside:
                if w[j] > rem + eps:
                    eta = np.zeros(n)
                    eta[chosen] = 1.0
                    eta[j] = min(1.0, rem / w[j])
                    emitted = True
                    yield eta
        if not emitted and not any(w[j] <= rem + eps for j in outside):
            eta = np.zeros(n)
            eta[chosen] = 1.0
            yield eta

    yield from rec(0, [], 0.0)


def _vertex_maximum(model, w, budget):
    """Best (loss, eta) over the maximal vertices of {w . eta <= budget}."""
    best = None
    chunk: list[np.ndarray] = []

    def flush(chunk):
        nonlocal best
        if not chunk:
            return
        values = effective_re_batch(model, np.array(chunk))
        for value, eta in zip(values, chunk):
            if _better(best, (float(value), eta), maximize=True):
                best = (float(value), eta)

    for eta in _maximal_vertices(w, budget):
        chunk.append(eta)
        if len(chunk) >= _BATCH:
            flush(chunk)
            chunk = []
    flush(chunk)
    if best is None:
        best = (0.0, np.zeros(model.n))
    return best


def optimal_loss_max(
    model: MetapopModel,
    cost_fn: CostFunction,
    c: float,
    method: str = "auto",
    force: bool = False,
    convex: bool | None = None,
    extra_starts: tuple[np.ndarray, ...] = (),
    starts: int = MULTISTARTS,
    max_iter: int = PGD_ITERATION_CAP,
    window_tol: float = 1e-9,
) -> OptimalPoint:
    """Maximize R_e subject to C(eta) >= c.

    Under a Convex verdict the maximum sits at an extreme point of the
    polytope, and vertex enumeration (at most one fractional coordinate) is
    exact.  Without convexity the maximum may sit inside the budget face, so
    ``'auto'`` takes the better of the enumeration and multi-start projected
    ascent seeded with the best vertex; the result is then a certified lower
    bound.  ``method='vertex'`` or ``'gradient'`` force one route.
    """
    n = model.n
    cmax = c_max(cost_fn, model)
    if c < -1e-12 or c > cmax + 1e-9:
        raise ValidationError(f"budget {c} outside [0, {cmax}]")
    if c <= 0:
        ones = Strategy.ones(n)
        return OptimalPoint(
            cost=c,
            loss=effective_re(model, ones),
            strategy=ones,
            status="VertexEnumerated",
        )
    w = cost_fn.coefficient_vector(n) * model.weights
    budget = cmax - c  # w . eta <= budget
    if method not in ("auto", "vertex", "gradient"):
        raise ValidationError(f"unknown method {method!r}")
    if method == "auto" and convex is None:
        convex = classify_convexity(model).verdict in ("Convex", "Linear")

    use_vertex = method in ("auto", "vertex") and (n <= VERTEX_BUDGET or force)
    if method == "vertex" and n > VERTEX_BUDGET and not force:
        raise BudgetExceeded(f"vertex enumeration capped at {VERTEX_BUDGET} groups")
    use_gradient = method == "gradient" or (
        method == "auto" and not (convex and use_vertex)
    )

    best = None
    if use_vertex:
        best = _vertex_maximum(model, w, budget)
        r0 = _loss_value(model, np.ones(n))
        plateau_hit = best[0] >= r0 - 1e-12 * max(1.0, r0)
        if method == "vertex" or (method == "auto" and (convex or plateau_hit)):
            # Monotonicity bounds every feasible loss by R_0, so hitting it
            # certifies the enumeration even without convexity.
            return OptimalPoint(
                cost=c,
                loss=best[0],
                strategy=Strategy(best[1]),
                status="VertexEnumerated",
            )

    if use_gradient:

        def project(x):
            return _project_budget(x, w, budget, "le")

        start_points = [project(np.asarray(s, dtype=float)) for s in extra_starts]
        if best is not None:
            start_points.append(best[1])
        start_points += _min_starts(n, project, starts)
        for fx, x in _maybe_parallel_map(
            lambda s: _pgd(
                model, project, s, maximize=True, max_iter=max_iter,
                window_tol=window_tol,
            ),
            start_points,
        ):
            if _better(best, (fx, x), maximize=True):
                best = (fx, x)
    return OptimalPoint(
        cost=c, loss=float(best[0]), strategy=Strategy(best[1]), status="MultiStartBest"
    )


@dataclass(frozen=True)
class FrontierPoint:
    cost: float
    loss: float
    strategy: Strategy
    status: str


@dataclass(frozen=True)
class FrontierCurve:
    """Sampled frontier, ordered by cost.

    Pareto curves run from (0, R_0) down to (c_star, 0); anti-Pareto curves
    from (c_ceiling, R_0) down to (c_max, 0), where c_ceiling is the maximal
    cost of totally inefficient strategies.
    """

    points: tuple[FrontierPoint, ...]
    kind: str  # Pareto | AntiPareto
    grid_resolution: int

    def costs(self) -> np.ndarray:
        return np.array([p.cost for p in self.points])

    def losses(self) -> np.ndarray:
        return np.array([p.loss for p in self.points])

    def loss_at(self, budget: float) -> float:
        """Piecewise-linear interpolation of the sampled curve."""
        costs = self.costs()
        losses = self.losses()
        return float(np.interp(budget, costs, losses))

    def cost_at(self, loss: float) -> float:
        """Inverse interpolation (the curve is nonincreasing in cost)."""
        costs = self.costs()[::-1]
        losses = self.losses()[::-1]
        return float(np.interp(loss, losses, costs))


def pareto_frontier(
    model: MetapopModel,
    cost_fn: CostFunction,
    resolution: int = 64,
    starts: int = 8,
    max_iter: int = PGD_ITERATION_CAP,
    window_tol: float = 1e-9,
) -> FrontierCurve:
    """Sweep budgets over [0, c_star], warm-starting each solve.

    Exact endpoints (0, R_0) and (c_star, 0) are inserted from their
    closed-form sources; interior points are monotone by carrying each
    optimum forward as a start for the next budget.
    """
    if resolution < 2:
        raise ValidationError("resolution must be at least 2")
    n = model.n
    verdict = classify_convexity(model).verdict
    convex = verdict in ("Convex", "Linear")
    erad = eradication_cost(model, cost_fn)
    r0 = effective_re(model, Strategy.ones(n))
    points = [
        FrontierPoint(0.0, r0, Strategy.ones(n), "Converged"),
    ]
    cs = erad.cstar
    previous = None
    best_so_far = r0
    for k in range(1, resolution):
        c = cs * k / resolution
        extra = (previous,) if previous is not None else ()
        # Warm starts accumulate diversity along the sweep, so a reduced
        # per-point start budget keeps the curve tight at a fraction of the
        # standalone solve cost.
        solved = optimal_loss(
            model, cost_fn, c, convex=convex, extra_starts=extra,
            starts=starts, max_iter=max_iter, window_tol=window_tol,
        )
        loss = min(solved.loss, best_so_far)
        if solved.loss <= best_so_far:
            strategy = solved.strategy
        else:
            strategy = points[-1].strategy
        best_so_far = loss
        points.append(FrontierPoint(c, loss, strategy, solved.status))
        previous = strategy.values
        if loss <= LOSS_ZERO_TOL:
            break
    points.append(FrontierPoint(cs, 0.0, erad.strategy, "Converged"))
    return FrontierCurve(points=tuple(points), kind="Pareto", grid_resolution=resolution)


def _ceiling_with_witness(model: MetapopModel, cost_fn: CostFunction):
    decomp = frobenius_decompose(model)
    if not decomp.atoms:
        return c_max(cost_fn, model), Strategy.zeros(model.n)
    r0 = max(decomp.atom_radii)
    tol = 1e-9 * max(1.0, r0)
    best = 0.0
    witness = Strategy.ones(model.n)
    for atom, radius in zip(decomp.atoms, decomp.atom_radii):
        if radius >= r0 - tol:
            candidate = Strategy.indicator(model.n, atom)
            value = cost(cost_fn, model, candidate)
            if value >= best:
                best = value
                witness = candidate
    return best, witness


def inefficiency_ceiling(model: MetapopModel, cost_fn: CostFunction) -> float:
    """Maximal cost of totally inefficient strategies.

    From the Frobenius decomposition: the largest cost of keeping one
    critical atom (an atom whose radius attains R_0) fully non-vaccinated
    and vaccinating everyone else; zero for irreducible kernels.
    """
    return _ceiling_with_witness(model, cost_fn)[0]


def anti_pareto_frontier(
    model: MetapopModel,
    cost_fn: CostFunction,
    resolution: int = 64,
    method: str = "auto",
    force: bool = False,
    starts: int = 8,
    max_iter: int = PGD_ITERATION_CAP,
    window_tol: float = 1e-9,
) -> FrontierCurve:
    """Sweep budgets over [c_ceiling, c_max], sweeping downward from c_max.

    The previous optimum stays feasible as the budget decreases and is
    carried along as an extra ascent start, making the reported curve
    monotone.
    """
    if resolution < 2:
        raise ValidationError("resolution must be at least 2")
    n = model.n
    cmax = c_max(cost_fn, model)
    ceiling, top_strategy = _ceiling_with_witness(model, cost_fn)
    r0 = effective_re(model, Strategy.ones(n))
    convex = classify_convexity(model).verdict in ("Convex", "Linear")
    tail = [FrontierPoint(cmax, 0.0, Strategy.zeros(n), "Converged")]
    best_so_far = 0.0
    previous = None
    for k in range(resolution - 1, 0, -1):
        c = ceiling + (cmax - ceiling) * k / resolution
        extra = (previous,) if previous is not None else ()
        solved = optimal_loss_max(
            model, cost_fn, c, method=method, force=force, convex=convex,
            extra_starts=extra, starts=starts, max_iter=max_iter,
            window_tol=window_tol,
        )
        loss = max(solved.loss, best_so_far)
        strategy = solved.strategy if solved.loss >= best_so_far else tail[-1].strategy
        best_so_far = loss
        previous = strategy.values
        tail.append(FrontierPoint(c, loss, strategy, solved.status))
    tail.append(FrontierPoint(ceiling, r0, top_strategy, "Converged"))
    return FrontierCurve(
        points=tuple(reversed(tail)), kind="AntiPareto", grid_resolution=resolution
    )


@dataclass(frozen=True)
class AssembledFrontiers:
    pareto: FrontierCurve
    anti: FrontierCurve
    per_atom: tuple[tuple[tuple[int, ...], FrontierCurve, FrontierCurve], ...]


def _atom_submodel(model, cost_fn, atom):
    idx = list(atom)
    sub_weights = model.weights[idx]
    scale = sub_weights.sum()
    sub_model = MetapopModel(
        weights=sub_weights / scale, matrix=model.matrix[np.ix_(idx, idx)]
    )
    sub_cost = CostFunction.affine(
        cost_fn.coefficient_vector(model.n)[idx] * scale
    )
    return sub_model, sub_cost


def assemble_reducible(
    model: MetapopModel,
    cost_fn: CostFunction,
    resolution: int = 64,
    starts: int = 8,
    max_iter: int = PGD_ITERATION_CAP,
    window_tol: float = 1e-9,
) -> AssembledFrontiers:
    """Assemble whole-model frontiers from the per-atom frontiers.

    The anti side is the pointwise maximum over atoms of the per-atom optimal
    cost (each extended by zero above its own radius, and shifted by the cost
    of vaccinating everything outside the atom).  The Pareto side assembles
    the per-atom optimal strategies at target loss min(l, R_0[atom]) on top
    of full vaccination freedom outside atoms, keeping the quasi-nilpotent
    remainder entirely non-vaccinated.
    """
    decomp = frobenius_decompose(model)
    if not decomp.atoms:
        raise ValidationError("assembly needs at least one atom")
    n = model.n
    cmax = c_max(cost_fn, model)
    r0 = effective_re(model, Strategy.ones(n))
    coef = cost_fn.coefficient_vector(n)

    per_atom = []
    sub_data = []
    for atom in decomp.atoms:
        sub_model, sub_cost = _atom_submodel(model, cost_fn, atom)
        sub_pareto = pareto_frontier(
            sub_model, sub_cost, resolution,
            starts=starts, max_iter=max_iter, window_tol=window_tol,
        )
        sub_anti = anti_pareto_frontier(
            sub_model, sub_cost, resolution,
            starts=starts, max_iter=max_iter, window_tol=window_tol,
        )
        outside = sorted(set(range(n)) - set(atom))
        shift = math.fsum((coef[outside] * model.weights[outside]).tolist())
        radius = effective_re(sub_model, Strategy.ones(len(atom)))
        convex = classify_convexity(sub_model).verdict in ("Convex", "Linear")
        sub_data.append(
            (atom, sub_model, sub_cost, sub_pareto, sub_anti, shift, radius, convex)
        )
        per_atom.append((atom, sub_pareto, sub_anti))

    losses = np.linspace(0.0, r0, resolution + 1)

    anti_points = []
    for level in losses:
        best_cost = 0.0
        holder = Strategy.zeros(n)
        for atom, _, _, _, sub_anti, shift, radius, _ in sub_data:
            if level > radius + 1e-9:
                continue
            sub_c = sub_anti.cost_at(level)
            total = shift + sub_c
            if total >= best_cost:
                best_cost = total
                values = np.zeros(n)
                sub_point = min(
                    sub_anti.points, key=lambda p: abs(p.cost - sub_c)
                )
                values[list(atom)] = sub_point.strategy.values
                holder = Strategy(values)
        anti_points.append(
            FrontierPoint(best_cost, float(level), holder, "MultiStartBest")
        )
    anti_points.sort(key=lambda p: (p.cost, -p.loss))
    anti = FrontierCurve(tuple(anti_points), "AntiPareto", resolution)

    pareto_points = []
    for level in losses:
        values = np.zeros(n)
        values[list(decomp.remainder)] = 1.0
        for atom, sub_model, sub_cost, sub_pareto, _, _, radius, convex in sub_data:
            target = min(float(level), radius)
            budget = sub_pareto.cost_at(target)
            solved = optimal_loss(
                sub_model, sub_cost, budget, convex=convex,
                starts=starts, max_iter=max_iter, window_tol=window_tol,
            )
            values[list(atom)] = solved.strategy.values
        strategy = Strategy(values)
        pareto_points.append(
            FrontierPoint(
                cost(cost_fn, model, strategy),
                effective_re(model, strategy),
                strategy,
                "MultiStartBest",
            )
        )
    pareto_points.sort(key=lambda p: (p.cost, -p.loss))
    pareto = FrontierCurve(tuple(pareto_points), "Pareto", resolution)
    return AssembledFrontiers(pareto=pareto, anti=anti, per_atom=tuple(per_atom))


@dataclass(frozen=True)
class RayCheckReport:
    lambdas: tuple[float, ...]
    expected: tuple[float, ...]
    solved: tuple[float, ...]
    passed: tuple[bool, ...]

    @property
    def all_passed(self) -> bool:
        return all(self.passed)


def optimal_ray_check(
    model: MetapopModel,
    cost_fn: CostFunction,
    eta_star: Strategy,
    grid: int = 16,
    tol: float = 1e-6,
) -> RayCheckReport:
    """Verify Pareto membership of the whole ray of scaled optima.

    With an affine decreasing cost and convex R_e, a Pareto optimum eta_star
    with max entry strictly inside (0, 1) generates Pareto optima
    lambda * eta_star for lambda in [0, 1/max(eta_star)]; each grid point is
    checked by value matching against the solved optimum at equal budget.
    """
    verdict = classify_convexity(model).verdict
    if verdict not in ("Convex", "Linear"):
        raise PreconditionFailed("ray check needs a Convex or Linear verdict")
    peak = float(eta_star.values.max())
    if not 0.0 < peak < 1.0:
        raise PreconditionFailed("ray check needs max(eta_star) strictly in (0, 1)")
    lambdas = np.linspace(0.0, 1.0 / peak, grid)
    expected = []
    solved = []
    passed = []
    for lam in lambdas:
        scaled = Strategy(np.clip(lam * eta_star.values, 0.0, 1.0))
        budget = cost(cost_fn, model, scaled)
        target = effective_re(model, scaled)
        answer = optimal_loss(
            model, cost_fn, budget, convex=True, extra_starts=(scaled.values,)
        )
        expected.append(target)
        solved.append(answer.loss)
        passed.append(abs(answer.loss - target) <= tol)
    return RayCheckReport(
        lambdas=tuple(float(x) for x in lambdas),
        expected=tuple(expected),
        solved=tuple(solved),
        passed=tuple(passed),
    )


def feasible_region_sample(
    model: MetapopModel,
    cost_fn: CostFunction,
    samples: int,
    seed: int = 0,
) -> tuple[tuple[float, float], ...]:
    """(cost, loss) pairs sampling the feasible region.

    Uniform random strategies, plus (for up to 12 groups) the deterministic
    family of strategies that deviate from all-ones or all-zeros in at most
    two coordinates placed on a 1/8 grid.
    """
    if samples < 1:
        raise ValidationError("samples must be >= 1")
    n = model.n
    rng = np.random.default_rng(seed)
    etas = [rng.random((samples, n))]
    if n <= 12:
        grid = np.linspace(0.0, 1.0, 9)
        family = set()
        for base_value in (0.0, 1.0):
            base = np.full(n, base_value)
            family.add(tuple(base))
            for i in range(n):
                for gi in grid:
                    one = base.copy()
                    one[i] = gi
                    family.add(tuple(one))
                    for j in range(i + 1, n):
                        for gj in grid:
                            two = one.copy()
                            two[j] = gj
                            family.add(tuple(two))
        etas.append(np.array(sorted(family)))
    stacked = np.vstack(etas)
    losses = effective_re_batch(model, stacked)
    w = cost_fn.coefficient_vector(n) * model.weights
    costs = (1.0 - stacked) @ w
    return tuple(
        (float(cv), float(lv)) for cv, lv in zip(costs, losses)
    )
