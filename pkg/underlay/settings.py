from typing import Any

from pydantic import Field, ImportString, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict
from taskiq import AsyncBroker, InMemoryBroker, TaskiqMiddleware

from .logging import LogLevel
from .middlewares import TrialMiddleware
from .recorder import BaseRecorder


class Settings(BaseSettings):
    """
    Runtime settings of the experiment runner.

    Can override these settings from a default state, typically to use another taskiq broker
    or to stream records somewhere. Defaults to a working in-memory broker.
    """

    BROKER_CLASS: ImportString = Field(default="taskiq:InMemoryBroker", validate_default=True)
    BROKER_KWARGS: dict[str, Any] = dict()

    # Threads executing trials (in-memory broker only)
    WORKERS: int = Field(default=4, ge=1)

    # Trials in flight at once
    # NOTE: The in-memory result backend only keeps the latest 100 results
    BATCH_SIZE: int = Field(default=50, ge=1, le=100)

    # Used for recorder
    RECORDER_CLASS: ImportString | None = None

    LOG_LEVEL: str = LogLevel.INFO.name

    model_config = SettingsConfigDict(env_prefix="UNDERLAY_", case_sensitive=True)

    @field_validator("LOG_LEVEL")
    def ensure_log_level(cls, value: str) -> str:
        if (value := value.upper()) not in LogLevel.__members__:
            raise ValueError(f"Unknown log level '{value}'")

        return value

    def get_middlewares(self) -> list[TaskiqMiddleware]:
        return [
            # Built-in middlewares (required)
            TrialMiddleware(),
        ]

    def get_broker(self) -> AsyncBroker:
        if self.BROKER_CLASS is InMemoryBroker:
            broker = InMemoryBroker(sync_tasks_pool_size=self.WORKERS)

        else:
            broker = self.BROKER_CLASS(**self.BROKER_KWARGS)

        if middlewares := self.get_middlewares():
            broker = broker.with_middlewares(*middlewares)

        return broker

    def get_recorder(self) -> BaseRecorder | None:
        if not (recorder_class := self.RECORDER_CLASS):
            return None

        return recorder_class()
