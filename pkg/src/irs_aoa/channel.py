"""Line-of-sight channels of the user -> surface -> base station cascade."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import ArrayGeometry, canonical_angle, steering_vector


@dataclass(frozen=True)
class PathLossModel:
    """Complex path-loss amplitude generator.

    ``kind="unit"`` gives amplitude 1. ``kind="free_space"`` gives
    ``wavelength / (4 pi d)``. Both carry a uniform random phase when an
    RNG is supplied.
    """

    kind: str = "unit"
    wavelength: float = 0.1

    def __post_init__(self):
        if self.kind not in ("unit", "free_space"):
            raise ValueError(f"unknown path-loss kind {self.kind!r}")
        if not self.wavelength > 0:
            raise ValueError("wavelength must be > 0")


def path_loss(model: PathLossModel, dist: float, rng: np.random.Generator | None = None) -> complex:
    if not dist > 0:
        raise ValueError(f"distance must be > 0, got {dist}")
    if model.kind == "unit":
        amp = 1.0
    else:
        amp = model.wavelength / (4.0 * np.pi * dist)
    phase = 0.0 if rng is None else rng.uniform(0.0, 2.0 * np.pi)
    return complex(amp * np.exp(1j * phase))


@dataclass(frozen=True, eq=False)
class ChannelRealization:
    """All channel parameters of one scenario draw.

    Attributes
    ----------
    thetas : ndarray, shape (K,)
        User -> surface angles of arrival, degrees.
    betas : ndarray, shape (K,)
        User -> surface complex path-loss factors.
    gamma, varphi : float
        Surface -> BS angle of departure (at the surface) and angle of
        arrival (at the BS), degrees.
    delta : complex
        Surface -> BS complex path-loss factor.
    """

    thetas: np.ndarray
    betas: np.ndarray
    gamma: float
    varphi: float
    delta: complex
    irs_geom: ArrayGeometry
    bs_geom: ArrayGeometry
    min_separation_deg: float = field(default=0.0, compare=False)

    def __post_init__(self):
        thetas = np.atleast_1d(np.asarray(self.thetas, dtype=float))
        betas = np.atleast_1d(np.asarray(self.betas, dtype=complex))
        if thetas.ndim != 1 or thetas.size < 1:
            raise ValueError("need at least one user")
        if betas.shape != thetas.shape:
            raise ValueError("betas and thetas must have the same length")
        if np.any(np.abs(betas) == 0) or self.delta == 0:
            raise ValueError("path-loss factors must be nonzero")
        if np.any((thetas < 0) | (thetas >= 180)):
            raise ValueError("angles must lie in [0, 180)")
        if self.min_separation_deg > 0 and thetas.size > 1:
            gaps = np.diff(np.sort(thetas))
            if gaps.min() < self.min_separation_deg:
                raise ValueError(
                    f"user angles closer than {self.min_separation_deg} deg: {np.sort(thetas)}"
                )
        thetas.setflags(write=False)
        betas.setflags(write=False)
        object.__setattr__(self, "thetas", thetas)
        object.__setattr__(self, "betas", betas)
        object.__setattr__(self, "gamma", canonical_angle(self.gamma))
        object.__setattr__(self, "varphi", canonical_angle(self.varphi))
        object.__setattr__(self, "delta", complex(self.delta))

    @property
    def num_users(self) -> int:
        return self.thetas.size


def user_irs_channel(real: ChannelRealization, k: int) -> np.ndarray:
    """``h_k = beta_k b(theta_k)`` for the 0-based user index ``k``."""
    if not 0 <= k < real.num_users:
        raise IndexError(f"user index {k} out of range for {real.num_users} users")
    return real.betas[k] * steering_vector(real.irs_geom, real.thetas[k])


def irs_bs_channel(real: ChannelRealization) -> np.ndarray:
    """Rank-one surface -> BS matrix ``delta c(varphi) b(gamma)^T``, shape (M, I)."""
    c = steering_vector(real.bs_geom, real.varphi)
    b = steering_vector(real.irs_geom, real.gamma)
    return real.delta * np.outer(c, b)
