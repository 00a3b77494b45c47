import pytest

from underlay.config import ExperimentConfig
from underlay.exceptions import ConfigurationError
from underlay.types import Algorithm


def test_defaults():
    cfg = ExperimentConfig()

    assert cfg.n_d2d_for(cfg.n_cues) == 25
    assert cfg.p_c_max == pytest.approx(10**-0.6)
    assert cfg.p_d_max == pytest.approx(10**-1.2)
    assert cfg.sigma_n2 == pytest.approx(10**-14.4)
    assert cfg.sigma_s2 == 0.0
    assert cfg.algorithms == [Algorithm.PROPOSED, Algorithm.THREE_STEP, Algorithm.ALL_CSI]


def test_from_config_file(tmp_path):
    path = tmp_path / "experiment.toml"
    path.write_text(
        "# Cell radius sweep\n"
        "n_cues = 3\n"
        "n_d2d = 6\n"
        "cell_radius_sweep = [400, 600]\n"
        "cluster_radius_sweep = [10, 20]\n"
        'algorithms = ["proposed", "exhaustive"]\n'
        "trials = 7  # per sweep point\n"
    )
    cfg = ExperimentConfig.from_config_file(path)

    assert cfg.trials == 7
    assert cfg.algorithms == [Algorithm.PROPOSED, Algorithm.EXHAUSTIVE]
    assert [(p.cell_radius, p.cluster_radius) for p in cfg.sweep_points()] == [
        (400, 10),
        (400, 20),
        (600, 10),
        (600, 20),
    ]
    assert all(p.n_d2d == 6 for p in cfg.sweep_points())


@pytest.mark.parametrize(
    "text",
    [
        "unknown_key = 1\n",
        "trials = 0\n",
        "pathloss_exponent = 2\n",
        "qos_range_db = [20, 5]\n",
        'algorithms = ["proposed", "proposed"]\n',
        'algorithms = ["random"]\n',
        "cluster_radius_sweep = [10, 400]\n",
        "cluster_radius_sweep = []\n",
        "this is not toml\n",
    ],
)
def test_invalid_config_file(tmp_path, text):
    path = tmp_path / "experiment.toml"
    path.write_text(text)

    with pytest.raises(ConfigurationError):
        ExperimentConfig.from_config_file(path)


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigurationError):
        ExperimentConfig.from_config_file(tmp_path / "missing.toml")


def test_with_overrides():
    cfg = ExperimentConfig(trials=5)

    assert cfg.with_overrides(trials=None, seed=None) is cfg
    updated = cfg.with_overrides(seed=3, algorithms=[Algorithm.ALL_CSI])
    assert (updated.trials, updated.seed, updated.algorithms) == (5, 3, [Algorithm.ALL_CSI])

    with pytest.raises(ConfigurationError):
        cfg.with_overrides(trials=-1)


def test_cue_sweep_uses_five_pairs_per_cue():
    points = ExperimentConfig(n_cues_sweep=[5, 10]).sweep_points()

    assert [(p.index, p.n_cues, p.n_d2d) for p in points] == [(0, 5, 25), (1, 10, 50)]
