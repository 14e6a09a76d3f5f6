"""Temporal-domain MUSIC and Capon estimators on the virtual manifold.

The estimator knows the surface -> BS departure angle ``gamma`` and the
reflection patterns (the BS controls the schedule). Path-loss factors,
powers and symbols are unknown and never used.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, NamedTuple

import numpy as np

from .geometry import ArrayGeometry, steering_vector, wraps_around

# Floor of the MUSIC denominator relative to the numerator.
MUSIC_FLOOR = 1e-15
DEFAULT_GRID_STEP = 0.1
DEFAULT_REFINE_LEVELS = 2
REFINE_FACTOR = 10
RANK_TOL = 1e-8


class ConditionViolation(ValueError):
    """A necessary condition of the subspace estimator does not hold."""

    def __init__(self, message, **diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics


@dataclass(frozen=True)
class VirtualManifold:
    """Virtual array formed by the reflection schedule.

    Element ``l`` of the response towards ``theta`` is
    ``b(gamma)^T diag(patterns[l]) b(theta)``.
    """

    gamma: float
    patterns: np.ndarray
    irs_geom: ArrayGeometry

    def __post_init__(self):
        patterns = np.atleast_2d(np.asarray(self.patterns, dtype=complex))
        if patterns.shape[1] != self.irs_geom.num_elements:
            raise ValueError(
                f"pattern length {patterns.shape[1]} != {self.irs_geom.num_elements} elements"
            )
        object.__setattr__(self, "patterns", patterns)

    @property
    def L(self) -> int:
        return self.patterns.shape[0]


def virtual_steering(manifold: VirtualManifold, theta, rowwise: bool = False) -> np.ndarray:
    """Virtual steering vector(s) towards ``theta`` (degrees).

    Scalar ``theta`` gives shape (L,), an array gives (L, n). The default path
    applies the pattern matrix to ``b(gamma) * b(theta)``; ``rowwise=True``
    evaluates each row's bilinear form separately and exists as a cross-check.
    """
    b_gamma = steering_vector(manifold.irs_geom, manifold.gamma)
    b_theta = steering_vector(manifold.irs_geom, theta)
    if not rowwise:
        if b_theta.ndim == 1:
            return manifold.patterns @ (b_gamma * b_theta)
        return manifold.patterns @ (b_gamma[:, None] * b_theta)
    rows = [b_gamma @ (phi[:, None] * b_theta if b_theta.ndim == 2 else phi * b_theta)
            for phi in manifold.patterns]
    return np.array(rows)


def sample_covariance(obs) -> np.ndarray:
    """``S = (1/Q) sum_q y_q y_q^H`` over the rows of ``obs.snapshots``.

    Accepts a :class:`BlockObservations` or a (Q, L) array. The result is
    symmetrised so it is exactly Hermitian.
    """
    Y = np.atleast_2d(np.asarray(getattr(obs, "snapshots", obs), dtype=complex))
    if Y.shape[0] == 0:
        raise ValueError("no snapshots")
    S = Y.T @ Y.conj() / Y.shape[0]
    return 0.5 * (S + S.conj().T)


def eig_descending(S: np.ndarray):
    """Eigenvalues and eigenvectors of a Hermitian matrix, largest first."""
    w, U = np.linalg.eigh(S)
    return w[::-1], U[:, ::-1]


def noise_subspace(S: np.ndarray, K: int) -> np.ndarray:
    """Orthonormal basis of the ``L - K`` least-dominant eigenvectors of ``S``."""
    L = S.shape[0]
    if L <= K:
        raise ConditionViolation(
            f"need more snapshot dimensions than users (L={L}, K={K})", L=L, K=K
        )
    _, U = eig_descending(S)
    return U[:, K:]


@dataclass(frozen=True)
class SpectrumResult:
    """Spectrum samples on an angle grid and the selected peaks.

    ``peaks`` holds ``(angle, value)`` pairs sorted by value, descending.
    """

    grid: np.ndarray
    values: np.ndarray
    peaks: tuple = ()

    @property
    def normalized(self) -> np.ndarray:
        return self.values / self.values.max()


def make_grid(step: float = DEFAULT_GRID_STEP, start: float = 0.0, stop: float = 180.0) -> np.ndarray:
    n = int(np.ceil((stop - start) / step - 1e-9))
    return start + step * np.arange(n)


def music_values(manifold: VirtualManifold, Un: np.ndarray, angles) -> np.ndarray:
    A = virtual_steering(manifold, np.atleast_1d(angles))
    num = np.sum(np.abs(A) ** 2, axis=0)
    den = np.sum(np.abs(Un.conj().T @ A) ** 2, axis=0)
    return num / np.maximum(den, MUSIC_FLOOR * num)


def music_spectrum(manifold: VirtualManifold, Un: np.ndarray, grid=None) -> SpectrumResult:
    """MUSIC pseudo-spectrum ``a^H a / (a^H Un Un^H a)`` on ``grid``.

    A denominator below ``1e-15`` times the numerator is clamped, so an exact
    hit on a true angle gives the finite value ``1e15``.
    """
    grid = make_grid() if grid is None else np.asarray(grid, dtype=float)
    return SpectrumResult(grid, music_values(manifold, Un, grid))


def default_loading(S: np.ndarray) -> float:
    return 1e-6 * float(np.real(np.trace(S))) / S.shape[0]


def _loaded_inverse(S: np.ndarray, loading: float | None) -> np.ndarray:
    L = S.shape[0]
    eps = default_loading(S) if loading is None else float(loading)
    if eps < 0:
        raise ValueError("diagonal loading must be >= 0")
    R = S + eps * np.eye(L)
    w = np.linalg.eigvalsh(R)
    if w[-1] <= 0 or w[0] <= 1e-12 * w[-1]:
        raise np.linalg.LinAlgError("covariance is singular; use diagonal loading > 0")
    return np.linalg.inv(R)


def capon_values(manifold: VirtualManifold, R_inv: np.ndarray, angles) -> np.ndarray:
    A = virtual_steering(manifold, np.atleast_1d(angles))
    q = np.real(np.sum(A.conj() * (R_inv @ A), axis=0))
    return 1.0 / q


def capon_spectrum(manifold: VirtualManifold, S: np.ndarray, grid=None, loading: float | None = None) -> SpectrumResult:
    """Capon (MVDR) spectrum ``1 / a^H (S + eps I)^-1 a``.

    ``loading=None`` uses ``eps = 1e-6 trace(S) / L`` so that the inverse
    exists even with fewer blocks than snapshot dimensions.
    """
    grid = make_grid() if grid is None else np.asarray(grid, dtype=float)
    return SpectrumResult(grid, capon_values(manifold, _loaded_inverse(S, loading), grid))


class Peaks(NamedTuple):
    indices: np.ndarray
    angles: np.ndarray
    values: np.ndarray
    underdetected: bool


def local_maxima(values, circular: bool = False) -> np.ndarray:
    """Indices of local maxima; a plateau reports its leftmost index.

    Endpoints qualify when they exceed their single neighbour, or, with
    ``circular=True``, when they exceed both the neighbour and the sample at
    the opposite end.
    """
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        return np.zeros(0, dtype=int)
    starts = np.flatnonzero(np.r_[True, v[1:] != v[:-1]])
    runs = v[starts]
    left = np.r_[-np.inf, runs[:-1]]
    right = np.r_[runs[1:], -np.inf]
    if circular and runs.size > 1:
        left[0], right[-1] = runs[-1], runs[0]
    return starts[(runs > left) & (runs > right)]


def _refine(evaluate, angle, value, step, levels, lo, hi):
    for _ in range(levels):
        step /= REFINE_FACTOR
        fine = angle + step * np.arange(-REFINE_FACTOR, REFINE_FACTOR + 1)
        fine = fine[(fine >= lo) & (fine < hi)]
        vals = evaluate(fine)
        i = int(np.argmax(vals))
        if vals[i] > value:
            angle, value = float(fine[i]), float(vals[i])
    return angle, value


def find_peaks(
    values,
    K: int,
    grid=None,
    evaluate: Callable[[np.ndarray], np.ndarray] | None = None,
    refine_levels: int = DEFAULT_REFINE_LEVELS,
    bounds=(0.0, 180.0),
    circular: bool = False,
) -> Peaks:
    """Top-``K`` local maxima of a sampled spectrum.

    Without ``grid`` the returned angles are the indices. With ``evaluate``
    (the spectrum as a function of angle) each coarse peak is refined on
    ``refine_levels`` successively 10x finer local grids. Ties in value go
    to the smaller angle. ``circular`` treats the first and last samples as
    neighbours.
    """
    values = np.asarray(values, dtype=float)
    idx = local_maxima(values, circular)
    order = np.lexsort((idx, -values[idx]))
    idx = idx[order][:K]
    underdetected = idx.size < K
    if grid is None:
        return Peaks(idx, idx.astype(float), values[idx], underdetected)
    grid = np.asarray(grid, dtype=float)
    angles = grid[idx].copy()
    vals = values[idx].copy()
    if evaluate is not None and refine_levels > 0 and grid.size > 1:
        step = float(np.min(np.diff(grid)))
        for j in range(idx.size):
            angles[j], vals[j] = _refine(evaluate, angles[j], vals[j], step, refine_levels, *bounds)
        order = np.lexsort((angles, -vals))
        idx, angles, vals = idx[order], angles[order], vals[order]
    return Peaks(idx, angles, vals, underdetected)


def _grid_wraps(grid, geom) -> bool:
    # The response at 180 deg equals the one at 0 deg, so a grid spanning
    # the whole half plane is a closed loop.
    if grid.size < 3 or not wraps_around(geom):
        return False
    step = grid[1] - grid[0]
    return grid[0] <= 0.0 and grid[-1] + step >= 180.0 - 1e-9


@dataclass(frozen=True)
class EstimationResult:
    estimates: np.ndarray
    spectrum: SpectrumResult
    eigenvalues: np.ndarray
    method: str
    underdetected: bool = False


def estimate_aoas(
    obs,
    K: int,
    method: str = "music",
    grid=None,
    refine_levels: int = DEFAULT_REFINE_LEVELS,
    loading: float | None = None,
) -> EstimationResult:
    """Estimate ``K`` user angles from block snapshots.

    Pipeline: sample covariance, eigendecomposition, spectrum on the coarse
    grid, peak search with local refinement.
    """
    grid = make_grid() if grid is None else np.asarray(grid, dtype=float)
    manifold = obs.manifold
    S = sample_covariance(obs)
    eigvals, U = eig_descending(S)
    if method == "music":
        if S.shape[0] <= K:
            raise ConditionViolation(
                f"need more snapshot dimensions than users (L={S.shape[0]}, K={K})",
                L=S.shape[0], K=K, eigenvalues=eigvals,
            )
        Un = U[:, K:]
        evaluate = lambda a: music_values(manifold, Un, a)  # noqa: E731
    elif method == "capon":
        R_inv = _loaded_inverse(S, loading)
        evaluate = lambda a: capon_values(manifold, R_inv, a)  # noqa: E731
    else:
        raise ValueError(f"unknown method {method!r}")
    spec = SpectrumResult(grid, evaluate(grid))
    peaks = find_peaks(spec.values, K, grid, evaluate, refine_levels,
                       circular=_grid_wraps(grid, manifold.irs_geom))
    spec = replace(spec, peaks=tuple(zip(peaks.angles.tolist(), peaks.values.tolist())))
    return EstimationResult(
        estimates=peaks.angles,
        spectrum=spec,
        eigenvalues=eigvals,
        method=method,
        underdetected=peaks.underdetected,
    )


@dataclass(frozen=True)
class ConditionReport:
    L: int
    K: int
    dimension_ok: bool
    rank: int
    rank_ok: bool
    periodic: bool
    singular_values: np.ndarray = field(repr=False)

    @property
    def ok(self) -> bool:
        return self.dimension_ok and self.rank_ok and self.periodic


def numerical_rank(M: np.ndarray, tol: float = RANK_TOL) -> int:
    s = np.linalg.svd(M, compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > tol * s[0]))


def condition_diagnostics(
    manifold: VirtualManifold,
    thetas,
    source_powers=None,
    pattern_stream: np.ndarray | None = None,
) -> ConditionReport:
    """Check the three requirements of subspace estimation on the virtual array.

    Reports whether ``L > K``, the numerical rank of ``A diag(source_powers) A^H``
    (``source_powers`` are ``p_k |delta beta_k|^2``, default all ones) and,
    when the per-sample pattern sequence is given, whether it repeats with
    period ``L`` so the manifold is the same in every block.
    """
    thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
    K = thetas.size
    A = virtual_steering(manifold, thetas)
    pw = np.ones(K) if source_powers is None else np.asarray(source_powers, dtype=float)
    R = (A * pw) @ A.conj().T
    s = np.linalg.svd(R, compute_uv=False)
    rank = int(np.sum(s > RANK_TOL * s[0])) if s[0] > 0 else 0
    periodic = True
    if pattern_stream is not None:
        ps = np.asarray(pattern_stream)
        L = manifold.L
        if ps.shape[0] % L:
            periodic = False
        else:
            periodic = bool(np.array_equal(ps, np.tile(manifold.patterns, (ps.shape[0] // L, 1))))
    return ConditionReport(
        L=manifold.L, K=K, dimension_ok=manifold.L > K, rank=rank,
        rank_ok=rank == K, periodic=periodic, singular_values=s,
    )
