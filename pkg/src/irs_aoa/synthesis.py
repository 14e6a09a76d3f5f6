"""Transmission schedule, received-signal synthesis and block snapshots.

Each user repeats one CN(0, 1) symbol for the ``L`` samples of a block, and
the surface cycles through the same ``L`` reflection patterns in every block.
Stacking the first-antenna samples of block ``q`` gives a snapshot
``y_q = A x_q + z_q`` whose columns are virtual steering vectors.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .channel import ChannelRealization, irs_bs_channel, user_irs_channel
from .estimator import VirtualManifold, virtual_steering
from .geometry import ArrayGeometry


def generate_messages(num_users: int, num_blocks: int, rng: np.random.Generator) -> np.ndarray:
    """Block symbols, i.i.d. standard circular complex Gaussian, shape (K, Q)."""
    if num_users < 1 or num_blocks < 1:
        raise ValueError("num_users and num_blocks must be >= 1")
    z = rng.standard_normal((num_users, num_blocks, 2))
    return (z[..., 0] + 1j * z[..., 1]) / np.sqrt(2.0)


def expand_stream(symbols: np.ndarray, L: int) -> np.ndarray:
    """Repetition-coded per-sample stream, shape (K, Q*L)."""
    return np.repeat(np.atleast_2d(symbols), L, axis=1)


def generate_irs_patterns(num_elements: int, L: int, rng: np.random.Generator) -> np.ndarray:
    """``L`` random unit-modulus reflection patterns, shape (L, I).

    Phases are uniform on [0, 2pi). Duplicate rows have probability zero but
    are redrawn anyway so the patterns are guaranteed pairwise distinct.
    """
    if num_elements < 1 or L < 1:
        raise ValueError("num_elements and L must be >= 1")
    while True:
        patterns = np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, size=(L, num_elements)))
        if len({row.tobytes() for row in patterns}) == L:
            return patterns


@dataclass(frozen=True)
class Schedule:
    """Block structure, block symbols, transmit powers and surface patterns.

    Attributes
    ----------
    L, Q : int
        Samples per block and number of blocks.
    symbols : ndarray, shape (K, Q)
        Symbol sent by each user throughout each block.
    powers : ndarray, shape (K,)
        Transmit powers.
    patterns : ndarray, shape (L, I)
        Reflection pattern used at sample ``l`` of every block.
    """

    L: int
    Q: int
    symbols: np.ndarray
    powers: np.ndarray
    patterns: np.ndarray

    def __post_init__(self):
        symbols = np.atleast_2d(np.asarray(self.symbols, dtype=complex))
        powers = np.atleast_1d(np.asarray(self.powers, dtype=float))
        patterns = np.atleast_2d(np.asarray(self.patterns, dtype=complex))
        K = symbols.shape[0]
        if symbols.shape != (K, self.Q):
            raise ValueError(f"symbols must have shape (K, Q={self.Q}), got {symbols.shape}")
        if powers.shape != (K,) or np.any(powers < 0):
            raise ValueError("powers must be K nonnegative values")
        if self.L <= K:
            raise ValueError(f"block length L={self.L} must exceed the number of users K={K}")
        if patterns.shape[0] != self.L:
            raise ValueError(f"need {self.L} patterns, got {patterns.shape[0]}")
        if not np.allclose(np.abs(patterns), 1.0, rtol=0, atol=1e-12):
            raise ValueError("reflection coefficients must have unit modulus")
        if len({row.tobytes() for row in patterns}) != self.L:
            raise ValueError("reflection patterns within a block must be pairwise distinct")
        for a in (symbols, powers, patterns):
            a.setflags(write=False)
        object.__setattr__(self, "symbols", symbols)
        object.__setattr__(self, "powers", powers)
        object.__setattr__(self, "patterns", patterns)

    @property
    def num_users(self) -> int:
        return self.symbols.shape[0]

    @property
    def num_samples(self) -> int:
        return self.L * self.Q

    def stream(self) -> np.ndarray:
        return expand_stream(self.symbols, self.L)

    def pattern_stream(self) -> np.ndarray:
        """Pattern in force at each sample, shape (Q*L, I)."""
        return np.tile(self.patterns, (self.Q, 1))


def make_schedule(K, L, Q, num_elements, rng, powers=None, patterns=None) -> Schedule:
    """Draw symbols (and patterns unless given) for a fresh schedule."""
    symbols = generate_messages(K, Q, rng)
    if patterns is None:
        patterns = generate_irs_patterns(num_elements, L, rng)
    if powers is None:
        powers = np.ones(K)
    return Schedule(L=L, Q=Q, symbols=symbols, powers=powers, patterns=patterns)


@dataclass(frozen=True)
class BlockObservations:
    """Temporal-domain snapshots plus what the estimator is allowed to know.

    ``snapshots`` has shape (Q, L); row ``q`` is the first-antenna signal
    over block ``q``.
    """

    snapshots: np.ndarray
    gamma: float
    patterns: np.ndarray
    irs_geom: ArrayGeometry
    noise_power: float = 0.0

    def __post_init__(self):
        snaps = np.atleast_2d(np.asarray(self.snapshots, dtype=complex))
        if snaps.shape[1] != np.asarray(self.patterns).shape[0]:
            raise ValueError("snapshot length must equal the number of patterns")
        snaps.setflags(write=False)
        object.__setattr__(self, "snapshots", snaps)

    @property
    def Q(self) -> int:
        return self.snapshots.shape[0]

    @property
    def L(self) -> int:
        return self.snapshots.shape[1]

    @property
    def manifold(self) -> VirtualManifold:
        return VirtualManifold(self.gamma, self.patterns, self.irs_geom)

    def scaled(self, c: complex) -> "BlockObservations":
        return BlockObservations(self.snapshots * c, self.gamma, self.patterns, self.irs_geom, self.noise_power)


def _check_dims(real: ChannelRealization, sched: Schedule):
    if sched.patterns.shape[1] != real.irs_geom.num_elements:
        raise ValueError(
            f"pattern length {sched.patterns.shape[1]} does not match "
            f"{real.irs_geom.num_elements} surface elements"
        )
    if sched.num_users != real.num_users:
        raise ValueError(f"schedule has {sched.num_users} users, channel has {real.num_users}")


def synthesize_bs_signal(
    real: ChannelRealization,
    sched: Schedule,
    noise_power: float,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """All BS antenna samples, shape (Q*L, M).

    ``y_n = G diag(phi_n) sum_k h_k sqrt(p_k) s_k(n) + z_n`` with the pattern
    ``phi_n`` taken periodically from the schedule.
    """
    _check_dims(real, sched)
    if noise_power < 0:
        raise ValueError("noise_power must be >= 0")
    H = np.column_stack([user_irs_channel(real, k) for k in range(real.num_users)])
    G = irs_bs_channel(real)
    impinging = H @ (np.sqrt(sched.powers)[:, None] * sched.stream())  # (I, N)
    reflected = sched.pattern_stream().T * impinging
    y = (G @ reflected).T
    if noise_power > 0:
        if rng is None:
            raise ValueError("an RNG is required for noisy synthesis")
        z = rng.standard_normal(y.shape + (2,))
        y = y + np.sqrt(noise_power / 2.0) * (z[..., 0] + 1j * z[..., 1])
    return y


def extract_blocks(
    y: np.ndarray,
    sched: Schedule,
    real: ChannelRealization,
    noise_power: float = 0.0,
    antenna: int = 0,
) -> BlockObservations:
    """Cut one antenna's stream into ``Q`` length-``L`` snapshots.

    ``y`` is either the full (N, M) sample matrix or an already selected
    length-N stream of a single antenna.
    """
    y = np.asarray(y)
    stream = y if y.ndim == 1 else y[:, antenna]
    if stream.size % sched.L:
        raise ValueError(f"stream length {stream.size} is not a multiple of L={sched.L}")
    return BlockObservations(
        snapshots=stream.reshape(-1, sched.L),
        gamma=real.gamma,
        patterns=sched.patterns,
        irs_geom=real.irs_geom,
        noise_power=noise_power,
    )


def mean_signal_power(real: ChannelRealization, sched: Schedule) -> float:
    """Average power per snapshot element, ``E||A x||^2 / L``."""
    _check_dims(real, sched)
    manifold = VirtualManifold(real.gamma, sched.patterns, real.irs_geom)
    A = virtual_steering(manifold, real.thetas)
    gains = sched.powers * np.abs(real.delta * real.betas) ** 2
    return float(np.sum(gains * np.sum(np.abs(A) ** 2, axis=0)) / sched.L)


def snr_to_noise_power(snr_db: float, real: ChannelRealization, sched: Schedule) -> float:
    """Noise variance giving the requested per-element snapshot SNR.

    An infinite SNR gives zero noise.
    """
    p = mean_signal_power(real, sched)
    if p <= 0:
        raise ValueError("zero signal power: SNR is undefined")
    return p / 10.0 ** (snr_db / 10.0)


def observe(real, sched, noise_power, rng=None, antenna: int = 0) -> BlockObservations:
    y = synthesize_bs_signal(real, sched, noise_power, rng)
    return extract_blocks(y, sched, real, noise_power=noise_power, antenna=antenna)


SNAPSHOT_COLUMNS = ("block", "sample", "real", "imag")


def save_snapshots(obs: BlockObservations, path) -> Path:
    """Write snapshots as CSV rows ``block, sample, real, imag`` (0-based indices)."""
    path = Path(path)
    with path.open("w", newline="") as f:
        w = csv.writer(f)
        w.writerow(SNAPSHOT_COLUMNS)
        for q, snap in enumerate(obs.snapshots):
            for l, v in enumerate(snap):
                w.writerow((q, l, repr(float(v.real)), repr(float(v.imag))))
    return path


def load_snapshots(path) -> np.ndarray:
    """Read a snapshot CSV back into a (Q, L) complex array."""
    with Path(path).open(newline="") as f:
        rows = list(csv.DictReader(f))
    if not rows:
        return np.zeros((0, 0), dtype=complex)
    Q = max(int(r["block"]) for r in rows) + 1
    L = max(int(r["sample"]) for r in rows) + 1
    out = np.zeros((Q, L), dtype=complex)
    for r in rows:
        out[int(r["block"]), int(r["sample"])] = complex(float(r["real"]), float(r["imag"]))
    return out
