"""Spectral radius, full spectra, inertia and derivatives of R_e.

Two independent routes are kept deliberately:

* ``spectral_radius`` reduces the matrix to its strongly connected blocks
  (the radius of a nonnegative matrix is the maximum over the diagonal
  blocks of its Frobenius form) and runs a shifted power iteration on each
  irreducible block with ``s = 1 + max diagonal``.  The shift makes the
  block primitive, defeating periodicity such as even cycles whose
  peripheral spectrum contains ``-rho``, and the Collatz-Wielandt ratio
  bracket then closes geometrically, certifying the result two-sided.
* ``full_spectrum`` reduces to Hessenberg form and runs shifted QR (LAPACK
  via ``numpy.linalg.eigvals``); it serves as the dense fallback and as the
  cross-check oracle in the tests.

Exactly nilpotent input is recognized by a boolean cycle test on the
support, giving a radius of exactly zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._graph import tarjan_sccs
from .errors import (
    ComplexSpectrum,
    DimensionMismatch,
    NonConvergence,
    NonSimple,
    ValidationError,
    ZeroRadius,
)
from .model import MetapopModel, Strategy

POWER_ITERATION_CAP = 10_000
_START_SEED = 20211215  # fixed start vector: results must not vary run-to-run
_CW_RTOL = 1e-13
_DENSE_CUTOFF = 48  # below this, LAPACK beats a Python-driven iteration

CLUSTER_TOL = 1e-8  # times max(1, rho): QR backward-error scale
ZERO_TOL = 1e-8  # times max(1, rho): threshold for signing eigenvalues
RESIDUAL_TOL = 1e-10  # times max(lambda, 1): eigenpair residual bound
SIMPLE_GAP_TOL = 1e-8  # times rho: gap defining a numerically simple root


def _validate_square(a: np.ndarray, nonnegative: bool) -> np.ndarray:
    m = np.asarray(a, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        raise ValidationError("expected a non-empty square matrix")
    if not np.all(np.isfinite(m)):
        raise ValidationError("matrix contains NaN or infinite entries")
    if nonnegative and np.any(m < 0):
        raise ValidationError("matrix entries must be nonnegative")
    return m


def _dense_radius(a: np.ndarray) -> float:
    try:
        eig = np.linalg.eigvals(a)
    except np.linalg.LinAlgError as exc:
        raise NonConvergence(f"dense eigensolver failed: {exc}") from exc
    return float(np.abs(eig).max())


def _power_block(block: np.ndarray, cap: int = POWER_ITERATION_CAP) -> float | None:
    """Certified radius of an irreducible nonnegative block, None on stall.

    Iterates x -> (B + sI) x for the scaled block B; for x > 0 the
    Collatz-Wielandt ratios bracket the radius on both sides, and on an
    irreducible primitive block the bracket closes geometrically.
    """
    n = block.shape[0]
    if n == 1:
        return float(block[0, 0])
    scale = block.max()
    work = block / scale
    shift = 1.0 + work.diagonal().max()
    work = work + shift * np.eye(n)
    rng = np.random.default_rng(_START_SEED)
    x = 0.5 + rng.random(n)
    x /= x.sum()
    for _ in range(cap):
        y = work @ x
        ratios = y / x
        hi = float(ratios.max())
        lo = float(ratios.min())
        lam = float(y.sum())
        x = y / lam
        if hi - lo <= max(_CW_RTOL * (lam - shift), 1e-15 * lam):
            return (lam - shift) * scale
    return None


def spectral_radius(a: np.ndarray) -> float:
    """Spectral radius of a nonnegative matrix, exactly 0 for nilpotent input.

    The support digraph is condensed first; each strongly connected block is
    solved by the shifted power iteration, falling back to the dense QR
    spectrum if the two-sided bracket fails to close within the iteration
    cap.
    """
    m = _validate_square(a, nonnegative=True)
    n = m.shape[0]
    above = m > 0
    successors = tuple(
        tuple(np.nonzero(above[:, j])[0].tolist()) for j in range(n)
    )
    rho = 0.0
    for comp in tarjan_sccs(successors):
        if len(comp) == 1:
            rho = max(rho, float(m[comp[0], comp[0]]))
            continue
        block = m[np.ix_(comp, comp)]
        value = _power_block(block)
        if value is None:
            value = _dense_radius(block)
        rho = max(rho, value)
    return rho


def _support_nilpotent(mats: np.ndarray) -> np.ndarray:
    """For a (B, N, N) nonnegative stack, flag matrices with acyclic support."""
    reach = mats > 0
    n = mats.shape[-1]
    length = 1
    while length < n:
        reach = reach | np.matmul(reach, reach)
        length *= 2
    return ~reach.diagonal(axis1=-2, axis2=-1).any(axis=-1)


def radius_batch(mats: np.ndarray) -> np.ndarray:
    """Spectral radii of a (B, N, N) stack of nonnegative matrices.

    Plumbing for the probe and solver hot paths: one batched QR spectrum
    call, with exactly-nilpotent support zeroed out via the boolean cycle
    test and a per-matrix fallback if the batched call fails.  The certified
    iterative route remains ``spectral_radius``.
    """
    mats = np.asarray(mats, dtype=float)
    if mats.ndim != 3:
        raise ValidationError("expected a (B, N, N) stack")
    b = mats.shape[0]
    if b == 0:
        return np.zeros(0)
    try:
        rho = np.abs(np.linalg.eigvals(mats)).max(axis=-1)
    except np.linalg.LinAlgError:
        rho = np.array([_dense_radius(m) for m in mats])
    rho[_support_nilpotent(mats)] = 0.0
    return rho


@dataclass(frozen=True)
class Spectrum:
    """All eigenvalues of a matrix with clustered multiplicities.

    ``clusters`` pairs a representative eigenvalue with its algebraic
    multiplicity; multiplicities sum to N.  ``p_count``/``n_count`` count the
    eigenvalues with real part beyond ``tol`` of either sign and near-zero
    imaginary part, with multiplicity.
    """

    values: np.ndarray
    clusters: tuple[tuple[complex, int], ...]
    radius: float
    p_count: int
    n_count: int
    is_real: bool
    tol: float

    @property
    def n(self) -> int:
        return self.values.size


def _cluster_eigenvalues(values: np.ndarray, tol: float):
    clusters: list[list] = []
    for lam in values:
        placed = False
        for entry in clusters:
            centre = entry[0] / entry[1]
            if abs(lam - centre) <= tol:
                entry[0] += lam
                entry[1] += 1
                placed = True
                break
        if not placed:
            clusters.append([lam, 1])
    return tuple((complex(s / m), int(m)) for s, m in clusters)


def full_spectrum(a: np.ndarray) -> Spectrum:
    """All N eigenvalues via Hessenberg reduction and shifted QR."""
    m = _validate_square(a, nonnegative=False)
    try:
        values = np.linalg.eigvals(m)
    except np.linalg.LinAlgError as exc:
        raise NonConvergence(f"QR iteration did not converge: {exc}") from exc
    radius = float(np.abs(values).max())
    tol = CLUSTER_TOL * max(1.0, radius)
    order = np.lexsort((-values.imag, -values.real))
    values = values[order]
    clusters = _cluster_eigenvalues(values, tol)
    is_real = bool(np.all(np.abs(values.imag) <= tol))
    near_real = np.abs(values.imag) <= tol
    p_count = int(np.sum((values.real > tol) & near_real))
    n_count = int(np.sum((values.real < -tol) & near_real))
    return Spectrum(
        values=values,
        clusters=clusters,
        radius=radius,
        p_count=p_count,
        n_count=n_count,
        is_real=is_real,
        tol=tol,
    )


def inertia(a: np.ndarray) -> tuple[int, int]:
    """Counts (p, n) of positive and negative eigenvalues with multiplicity."""
    spec = full_spectrum(a)
    if not spec.is_real:
        raise ComplexSpectrum("matrix has eigenvalues with significant imaginary part")
    return spec.p_count, spec.n_count


def effective_re(model: MetapopModel, eta: Strategy) -> float:
    """Effective reproduction number: spectral radius of K . diag(eta).

    Desk-scale models are evaluated by the dense QR spectrum, larger ones by
    the certified iterative route; the two agree to 1e-12 relative (standing
    cross-check in the tests).
    """
    effective = model.effective_matrix(eta)
    if model.n <= _DENSE_CUTOFF:
        return _dense_radius(effective)
    return spectral_radius(effective)


def effective_re_batch(model: MetapopModel, etas: np.ndarray) -> np.ndarray:
    """R_e for each row of a (B, N) array of strategies."""
    etas = np.asarray(etas, dtype=float)
    if etas.ndim != 2 or etas.shape[1] != model.n:
        raise DimensionMismatch("etas must be a (B, N) array matching the model")
    mats = model.matrix[None, :, :] * etas[:, None, :]
    return radius_batch(mats)


@dataclass(frozen=True)
class EigenPair:
    """Dominant eigenvalue with right/left eigenvectors.

    ``right`` is nonnegative with unit l1 norm, ``left`` is nonnegative and
    scaled so that <left, right> = 1.
    """

    value: float
    right: np.ndarray
    left: np.ndarray


def _real_eigenvector(matrix: np.ndarray, target: float) -> np.ndarray:
    values, vectors = np.linalg.eig(matrix)
    idx = int(np.argmin(np.abs(values - target)))
    v = vectors[:, idx]
    pivot = v[int(np.argmax(np.abs(v)))]
    v = v / pivot
    if np.abs(v.imag).max() > 1e-8:
        raise NonSimple("dominant eigenvector is not numerically real")
    v = v.real
    v[np.abs(v) < 1e-13] = 0.0
    if v.min() < -1e-9 * max(v.max(), 1e-300):
        # Dense route disagreed with Perron theory; polish by inverse iteration.
        n = matrix.shape[0]
        shifted = matrix - target * (1.0 + 1e-9) * np.eye(n)
        w = np.abs(v)
        for _ in range(3):
            try:
                w = np.linalg.solve(shifted, w)
            except np.linalg.LinAlgError:
                break
            w = np.abs(w) / np.abs(w).sum()
        v = w
    v = np.clip(v, 0.0, None)
    return v / v.sum()


def dominant_pair(model: MetapopModel, eta: Strategy) -> EigenPair:
    """Perron eigenpair of the effective matrix.

    Raises ``ZeroRadius`` when rho = 0 and ``NonSimple`` when the dominant
    eigenvalue is not simple within the 1e-8 relative gap threshold; callers
    must then fall back to gradient-free methods.

    The left eigenvector comes from the corresponding row of the inverse
    eigenvector matrix when that is well conditioned (one factorization for
    the whole pair), with an independent transpose-side solve as fallback.
    """
    effective = model.effective_matrix(eta)
    try:
        values, vectors = np.linalg.eig(effective)
    except np.linalg.LinAlgError as exc:
        raise NonConvergence(f"eigendecomposition failed: {exc}") from exc
    rho = float(np.abs(values).max())
    if rho <= 0.0:
        raise ZeroRadius("effective matrix is quasi-nilpotent")
    close = np.abs(values - rho) <= SIMPLE_GAP_TOL * rho
    if int(close.sum()) != 1:
        raise NonSimple(
            "dominant eigenvalue is not simple within the 1e-8 gap threshold"
        )
    idx = int(np.nonzero(close)[0][0])
    lam = float(values[idx].real)
    bound = RESIDUAL_TOL * max(lam, 1.0)

    right = left = None
    v = vectors[:, idx]
    if np.abs(v.imag).max() <= 1e-10 * np.abs(v).max():
        v = v.real
        sign = 1.0 if v.sum() >= 0 else -1.0
        v = sign * v
        if v.min() >= -1e-12 * v.max():
            scale = v.sum()
            candidate = np.clip(v, 0.0, None) / np.clip(v, 0.0, None).sum()
            try:
                phi = np.linalg.inv(vectors)[idx]
            except np.linalg.LinAlgError:
                phi = None
            if phi is not None and np.abs(phi.imag).max() <= 1e-8 * np.abs(phi).max():
                phi = sign * phi.real * scale
                if phi.min() >= -1e-12 * max(phi.max(), 1e-300):
                    phi = np.clip(phi, 0.0, None)
                    denom = float(phi @ candidate)
                    if denom > 0:
                        right, left = candidate, phi / denom

    if right is None or left is None:
        right = _real_eigenvector(effective, lam)
        left = _real_eigenvector(effective.T, lam)
        left = left / float(left @ right)
    if np.abs(effective @ right - lam * right).max() > bound:
        right = _real_eigenvector(effective, lam)
        left = _real_eigenvector(effective.T, lam)
        left = left / float(left @ right)
    if np.abs(effective @ right - lam * right).max() > bound:
        raise NonConvergence("right eigenvector residual above tolerance")
    if np.abs(effective.T @ left - lam * left).max() > bound:
        raise NonConvergence("left eigenvector residual above tolerance")
    return EigenPair(value=lam, right=right, left=left)


def re_gradient(model: MetapopModel, eta: Strategy) -> np.ndarray:
    """Gradient of eta -> rho(K . diag(eta)) at eta.

    Differentiating K diag(eta) v = lambda v for a simple lambda gives
    d lambda / d eta_j = (K^T phi)_j v_j / <phi, v>.
    """
    pair = dominant_pair(model, eta)
    return (model.matrix.T @ pair.left) * pair.right
