from underlay.allocation import allocate
from underlay.baselines import all_csi_greedy, exhaustive, three_step
from underlay.config import ExperimentConfig
from underlay.harness import draw_scenario, trial_seed
from underlay.logging import set_level
from underlay.radio import check_feasible

# NOTE: `DEBUG` shows every admission decision
set_level("INFO")

# Small enough for the exhaustive search (at most 3 CUEs and 8 D2D pairs)
cfg = ExperimentConfig(n_cues=2, n_d2d=6, cluster_radius_sweep=[20])
point = cfg.sweep_points()[0]

# Same realization as trial 0 of an experiment with this config
scn = draw_scenario(cfg, point, trial_seed(cfg.seed, 0))

proposed = allocate(scn)
results = [
    proposed,
    three_step(scn),
    all_csi_greedy(scn, scoring=cfg.all_csi_scoring),
    # The proposed allocation is a candidate, so the search is never below it
    exhaustive(scn, proposed_hint=proposed),
]

for result in results:
    report = result.to_report()
    assert check_feasible(scn, result.assignment, result.powers)

    print(f"{report['algorithm']}: {report['sum_rate']:.3f} bits/s/Hz")
    for cue, pairs in enumerate(report["per_rb"]):
        print(f"  RB of CUE {cue}: D2D pairs {pairs}")

    print(f"  denied: {report['denied']}")
    print(f"  effort: {report['counters']}")
