import math

import numpy as np
import pytest

from irs_aoa.channel import ChannelRealization, PathLossModel, irs_bs_channel, path_loss, user_irs_channel
from irs_aoa.geometry import ArrayGeometry


def realization(thetas=(90.0,), betas=(1.0,), gamma=90.0, varphi=90.0, delta=1.0, I=4, M=2, **kw):
    return ChannelRealization(
        thetas=thetas, betas=betas, gamma=gamma, varphi=varphi, delta=delta,
        irs_geom=ArrayGeometry(I), bs_geom=ArrayGeometry(M), **kw,
    )


@pytest.mark.parametrize(
    "beta, theta, I, expected",
    [
        (1.0, 90.0, 4, [1, 1, 1, 1]),
        (2j, 90.0, 2, [2j, 2j]),
        (1.0, 60.0, 3, [1, -1j, -1]),
    ],
)
def test_user_irs_channel_examples(beta, theta, I, expected):
    h = user_irs_channel(realization((theta,), (beta,), I=I), 0)
    np.testing.assert_allclose(h, expected, atol=1e-15)


def test_user_irs_channel_index_and_norm(rng):
    betas = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    real = realization((10.0, 70.0, 150.0), betas, I=32)
    for k in range(3):
        assert np.linalg.norm(user_irs_channel(real, k)) == pytest.approx(abs(betas[k]) * math.sqrt(32), rel=1e-12)
    with pytest.raises(IndexError):
        user_irs_channel(real, 3)


def test_irs_bs_channel_examples():
    np.testing.assert_allclose(irs_bs_channel(realization(I=1, M=1)), [[1]])
    np.testing.assert_allclose(irs_bs_channel(realization(I=2, M=2)), np.ones((2, 2)), atol=1e-15)
    # outer product by hand: c(90) = [1, 1], b(60) = [1, -j, -1]
    G = irs_bs_channel(realization(gamma=60.0, varphi=90.0, delta=0.5, I=3, M=2))
    np.testing.assert_allclose(G, 0.5 * np.array([[1, -1j, -1], [1, -1j, -1]]), atol=1e-15)


def test_irs_bs_channel_rank_one(rng):
    for _ in range(50):
        g, v = rng.uniform(0, 180, 2)
        real = realization(gamma=g, varphi=v, delta=complex(*rng.standard_normal(2)), I=64, M=8)
        s = np.linalg.svd(irs_bs_channel(real), compute_uv=False)
        assert s[1] < 1e-10 * s[0]


def test_realization_invariants():
    with pytest.raises(ValueError):
        realization(betas=(0.0,))
    with pytest.raises(ValueError):
        realization(delta=0.0)
    with pytest.raises(ValueError):
        realization(thetas=(180.0,))
    with pytest.raises(ValueError, match="closer"):
        realization(thetas=(30.0, 31.0), betas=(1, 1), min_separation_deg=2.0)
    realization(thetas=(30.0, 31.0), betas=(1, 1), min_separation_deg=0.0)


def test_realization_is_immutable():
    real = realization()
    with pytest.raises(ValueError):
        real.thetas[0] = 1.0


def test_path_loss_unit():
    assert path_loss(PathLossModel("unit"), 10.0) == 1


def test_path_loss_free_space():
    assert path_loss(PathLossModel("free_space", wavelength=4 * math.pi), 1.0) == pytest.approx(1.0)
    expected = 0.1 / (4 * math.pi * 42.4264)
    assert abs(path_loss(PathLossModel("free_space", 0.1), 42.4264)) == pytest.approx(expected, rel=1e-12)
    assert expected == pytest.approx(1.8757e-4, rel=1e-4)


def test_path_loss_random_phase_keeps_magnitude(rng):
    z = path_loss(PathLossModel("free_space", 0.1), 5.0, rng)
    assert abs(z) == pytest.approx(0.1 / (20 * math.pi))
    with pytest.raises(ValueError):
        path_loss(PathLossModel(), 0.0)
    with pytest.raises(ValueError):
        PathLossModel("rayleigh")
