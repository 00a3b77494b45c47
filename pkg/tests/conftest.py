import numpy as np
import pytest
from click.testing import CliRunner

from underlay._cli import cli as root_cli
from underlay.channel import GainTable, NoiseModel
from underlay.radio import QosProfile, Scenario
from underlay.topology import CellLayout


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def cli():
    return root_cli


def _vector(value, size: int) -> np.ndarray:
    return np.broadcast_to(np.asarray(value, dtype=float), (size,)).copy()


def build_scenario(
    n_cues: int = 1,
    n_d2d: int = 0,
    *,
    g_cb=1.0,
    g_d=1.0,
    h_db=0.0,
    h_cd=0.0,
    h_dd=0.0,
    gamma_c=1.0,
    gamma_d=1.0,
    sigma2: float = 0.1,
    p_c_max: float = 1.0,
    p_d_max: float = 1.0,
    cue_positions=None,
    tx_positions=None,
    rx_positions=None,
) -> Scenario:
    """Hand-made scenario: unit direct gains and decoupled links unless told otherwise."""
    if cue_positions is None:
        cue_positions = [(100.0 * (i + 1), 0.0) for i in range(n_cues)]

    if tx_positions is None:
        tx_positions = [(0.0, 100.0 * (j + 1)) for j in range(n_d2d)]

    if rx_positions is None:
        rx_positions = [(5.0, 100.0 * (j + 1)) for j in range(n_d2d)]

    h_dd = np.broadcast_to(np.asarray(h_dd, dtype=float), (n_d2d, n_d2d)).copy()
    np.fill_diagonal(h_dd, 0.0)

    return Scenario(
        layout=CellLayout(
            cell_radius=1000.0,
            cue_positions=cue_positions,
            d2d_tx_positions=tx_positions,
            d2d_rx_positions=rx_positions,
            cluster_centers=tx_positions,
            cluster_radius=10.0,
        ),
        gains=GainTable(
            g_cb=_vector(g_cb, n_cues),
            g_d=_vector(g_d, n_d2d),
            h_db=_vector(h_db, n_d2d),
            h_cd=np.broadcast_to(np.asarray(h_cd, dtype=float), (n_cues, n_d2d)).copy(),
            h_dd=h_dd,
        ),
        noise=NoiseModel(sigma_n2=sigma2),
        qos=QosProfile(gamma_c_min=_vector(gamma_c, n_cues), gamma_d_min=_vector(gamma_d, n_d2d)),
        p_c_max=p_c_max,
        p_d_max=p_d_max,
    )


@pytest.fixture
def make_scenario():
    return build_scenario
