def __getattr__(name: str):
    if name == "UnderlayException":
        from .exceptions import UnderlayException

        return UnderlayException

    elif name == "ExperimentConfig":
        from .config import ExperimentConfig

        return ExperimentConfig

    elif name == "Scenario":
        from .radio import Scenario

        return Scenario

    elif name == "allocate":
        from .allocation import allocate

        return allocate

    elif name == "run_experiment":
        from .harness import run_experiment

        return run_experiment

    raise AttributeError(f"module 'underlay' has no attribute '{name}'")


__all__ = [
    "ExperimentConfig",
    "Scenario",
    "UnderlayException",
    "allocate",
    "run_experiment",
]
