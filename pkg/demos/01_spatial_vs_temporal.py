"""Why the BS antennas alone cannot see the user angles, and what blocks fix.

Every user reaches the base station through the same rank-one surface -> BS
link, so all BS antennas receive scaled copies of one scalar stream. Grouping
one antenna's samples into blocks, while users repeat their symbol and the
surface cycles distinct reflection patterns, produces snapshots whose
response matrix has full column rank.
"""

import numpy as np

from irs_aoa import ArrayGeometry, ChannelRealization, irs_bs_channel, make_schedule, observe, synthesize_bs_signal
from irs_aoa.estimator import numerical_rank, sample_covariance

rng = np.random.default_rng(7)
real = ChannelRealization(
    thetas=[105.0, 131.0, 162.0],
    betas=np.exp(1j * rng.uniform(0, 2 * np.pi, 3)),
    gamma=135.0,
    varphi=45.0,
    delta=1.0,
    irs_geom=ArrayGeometry(128),
    bs_geom=ArrayGeometry(8),
)

print("rank of the surface -> BS channel:", numerical_rank(irs_bs_channel(real)))

# %% spatial-domain samples: covariance across the 8 BS antennas
sched = make_schedule(3, L=6, Q=200, num_elements=128, rng=rng)
y = synthesize_bs_signal(real, sched, noise_power=0.0)
R_spatial = y.T @ y.conj() / y.shape[0]
print("rank of the spatial covariance (8 antennas, 3 users):", numerical_rank(R_spatial))
ratio = y[:, 3] / y[:, 0]
print("antenna 4 / antenna 1 ratio is constant over time:", np.allclose(ratio, ratio[0]))

# %% temporal-domain snapshots from antenna 1 only
obs = observe(real, sched, noise_power=0.0)
print("snapshot matrix shape (Q, L):", obs.snapshots.shape)
print("rank of the block covariance (L=6, 3 users):", numerical_rank(sample_covariance(obs)))
