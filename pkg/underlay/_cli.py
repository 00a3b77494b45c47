from pathlib import Path

import click

from underlay._click_ext import (
    SectionedHelpGroup,
    algorithms_callback,
    cls_import_callback,
    verbosity_option,
)


@click.group(cls=SectionedHelpGroup)
@click.version_option(message="%(version)s", package_name="underlay")
@verbosity_option
def cli():
    """
    Underlay: Simulate multi-pair D2D spectrum and power allocation in a cellular uplink

    Compares the multi-pair heuristic against the single-pair, full-CSI and exhaustive
    baselines over Monte Carlo cell realizations.
    """


@cli.command(section="Experiment Commands")
@click.option(
    "--config",
    "config_path",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    help="Flat `key = value` experiment config file",
)
@click.option("--trials", type=click.IntRange(min=1), help="Trials per sweep point")
@click.option("--seed", type=click.IntRange(min=0), help="Master seed")
@click.option(
    "--algorithms",
    metavar="NAME[,NAME...]",
    callback=algorithms_callback,
    help="Comma-separated subset of proposed,three_step,all_csi,exhaustive",
)
@click.option(
    "--out-dir",
    type=click.Path(file_okay=False, path_type=Path),
    default=Path("results"),
    show_default=True,
)
@click.option(
    "--recorder",
    "recorder_class",
    metavar="CLASS_REF",
    help="An import string in format '<module>:<CustomRecorder>'",
    callback=cls_import_callback,
)
@click.option("-w", "--workers", type=click.IntRange(min=1), help="Trial worker threads")
def run(config_path, trials, seed, algorithms, out_dir, recorder_class, workers):
    """Run a Monte Carlo experiment and write its results"""
    from underlay.config import ExperimentConfig
    from underlay.harness import run_experiment
    from underlay.results import emit_results
    from underlay.settings import Settings

    cfg = ExperimentConfig.from_config_file(config_path) if config_path else ExperimentConfig()
    cfg = cfg.with_overrides(trials=trials, seed=seed, algorithms=algorithms)
    settings = Settings() if workers is None else Settings(WORKERS=workers)

    records = run_experiment(
        cfg,
        settings=settings,
        out_dir=out_dir,
        recorder=recorder_class() if recorder_class else None,
    )
    emit_results(records, out_dir)

    for algorithm in cfg.algorithms:
        selected = [record for record in records if record.algorithm is algorithm]
        mean_rate = sum(record.sum_rate for record in selected) / len(selected)
        mean_admitted = sum(record.admitted_count for record in selected) / len(selected)
        click.echo(
            f"{algorithm}: sum-rate {mean_rate:.4f} bits/s/Hz, "
            f"admitted {mean_admitted:.2f} pair(s) ({len(selected)} trials)"
        )


@cli.command(section="Analysis Commands")
@click.option("-n", "--n-cues", type=click.IntRange(min=1), required=True, help="CUEs (N)")
@click.option("-m", "--n-d2d", type=click.IntRange(min=0), required=True, help="D2D pairs (M)")
def counters(n_cues, n_d2d):
    """Show predicted matching states and signaling gains"""
    from underlay.harness import predicted_counters
    from underlay.types import CounterVariant

    for variant in CounterVariant:
        predicted = predicted_counters(n_cues, n_d2d, variant)
        click.echo(
            f"{variant}: matching_states={predicted.matching_states} "
            f"signaling_gains={predicted.signaling_gains}"
        )


@cli.command(section="Analysis Commands")
@click.option("--seed", type=click.IntRange(min=0), default=0, show_default=True)
@click.option("--instances", type=click.IntRange(min=1), default=20, show_default=True)
@click.pass_context
def verify(ctx, seed, instances):
    """Run the invariant suite on small random instances"""
    from underlay.verify import run_checks

    if not all(result.passed for result in run_checks(seed=seed, instances=instances)):
        ctx.exit(1)
