import numpy as np
import pytest
from pydantic import ValidationError

from underlay.channel import GainTable, NoiseModel, _link_gains, _shadowing, compute_gains
from underlay.exceptions import InvalidParameterError
from underlay.topology import CellLayout, generate_layout


@pytest.fixture
def line_layout():
    # CUEs at 1, 100 and 200 m from the BS, one D2D pair with a 1 m link
    return CellLayout(
        cell_radius=400,
        cue_positions=[(1.0, 0.0), (100.0, 0.0), (200.0, 0.0)],
        d2d_tx_positions=[(0.0, 50.0)],
        d2d_rx_positions=[(0.0, 51.0)],
        cluster_centers=[(0.0, 50.5)],
        cluster_radius=10,
    )


def test_pathloss_only(line_layout):
    # Default shadowing deviation, fading off disables it
    gains = compute_gains(line_layout, pathloss_exponent=3.5, fading=False)

    assert gains.g_cb[0] == pytest.approx(1.0)
    assert gains.g_cb[1] == pytest.approx(1.0e-7)
    assert gains.g_d[0] == pytest.approx(1.0)
    # Larger distance means strictly smaller gain
    assert gains.g_cb[0] > gains.g_cb[1] > gains.g_cb[2]


def test_pathloss_decreases_with_distance():
    layout = generate_layout(5, 25, cell_radius=400, cluster_radius=10, rng_seed=1)
    gains = compute_gains(layout, pathloss_exponent=3.5, fading=False, rng_seed=1)

    order = np.argsort(layout.cue_to_bs)
    assert np.all(np.diff(gains.g_cb[order]) < 0)
    assert np.array_equal(gains.h_dd, layout.tx_to_rx ** -3.5)


def test_shadowing_deviation():
    shadowing = _shadowing(np.random.default_rng(0), (100_000,), sigma_db=8.0)
    assert np.log10(shadowing).std() == pytest.approx(0.8, rel=0.05)


def test_rayleigh_fading_has_unit_mean():
    fading = _link_gains(
        np.random.default_rng(0),
        np.ones(100_000),
        pathloss_exponent=3.5,
        shadowing_sigma_db=0.0,
        fading=True,
    )
    assert fading.mean() == pytest.approx(1.0, abs=0.02)


def test_gains_deterministic():
    layout = generate_layout(3, 6, cell_radius=400, cluster_radius=20, rng_seed=0)
    first = compute_gains(layout, rng_seed=11)
    second = compute_gains(layout, rng_seed=11)

    assert first.to_frame().equals(second.to_frame())
    assert first.h_dd.shape == (6, 6)


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(pathloss_exponent=2.0),
        dict(shadowing_sigma_db=-1.0),
    ],
)
def test_compute_gains_invalid(line_layout, kwargs):
    with pytest.raises(InvalidParameterError):
        compute_gains(line_layout, **kwargs)


@pytest.mark.parametrize(
    "overrides",
    [
        # Direct gains must be strictly positive
        dict(g_cb=[0.0]),
        dict(g_d=[np.inf]),
        # Interference gains may be zero, never negative
        dict(h_db=[-1.0]),
        dict(h_cd=[[np.nan]]),
        # Shapes must agree
        dict(h_dd=[[0.0, 0.0]]),
    ],
)
def test_gain_table_validation(overrides):
    data = dict(g_cb=[1.0], g_d=[1.0], h_db=[0.0], h_cd=[[0.0]], h_dd=[[0.0]])
    with pytest.raises(ValidationError):
        GainTable(**{**data, **overrides})


def test_gain_table_ignores_diagonal():
    table = GainTable(
        g_cb=[1.0], g_d=[1.0, 1.0], h_db=[0, 0], h_cd=[[0, 0]], h_dd=[[-5, 0], [0, 0]]
    )
    assert table.n_d2d == 2
    assert len(table.to_frame()) == 1 + 2 + 2 + 2 + 2


def test_noise_total():
    assert NoiseModel(sigma_n2=0.1, sigma_s2=0.05).total == pytest.approx(0.15)

    with pytest.raises(ValidationError):
        NoiseModel(sigma_n2=0.0)
