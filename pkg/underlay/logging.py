"""
Console logging for the simulator.

Mirrors the logger surface used throughout the codebase: the standard levels plus a
``SUCCESS`` level (``logger.success(...)``), rendered through ``click`` so level names
are coloured in a terminal and stay plain when piped.
"""

import logging
from enum import IntEnum

import click


class LogLevel(IntEnum):
    ERROR = logging.ERROR
    WARNING = logging.WARNING
    SUCCESS = logging.INFO + 5
    INFO = logging.INFO
    DEBUG = logging.DEBUG


logging.addLevelName(LogLevel.SUCCESS.value, LogLevel.SUCCESS.name)

LEVEL_COLORS = {
    LogLevel.ERROR.name: "bright_red",
    LogLevel.WARNING.name: "bright_yellow",
    LogLevel.SUCCESS.name: "bright_green",
    LogLevel.INFO.name: "blue",
    LogLevel.DEBUG.name: "cyan",
}

ROOT_LOGGER_NAME = "underlay"


class ClickHandler(logging.Handler):
    def emit(self, record: logging.LogRecord):
        try:
            level = click.style(
                record.levelname, fg=LEVEL_COLORS.get(record.levelname), bold=True
            )
            click.echo(f"{level}: {self.format(record)}", err=True)
        except Exception:
            self.handleError(record)


class UnderlayLogger(logging.Logger):
    def success(self, msg: str, *args, **kwargs):
        if self.isEnabledFor(LogLevel.SUCCESS):
            self._log(LogLevel.SUCCESS, msg, args, **kwargs)


def _setup_root_logger() -> logging.Logger:
    logging.setLoggerClass(UnderlayLogger)
    try:
        root = logging.getLogger(ROOT_LOGGER_NAME)
    finally:
        logging.setLoggerClass(logging.Logger)

    if not root.handlers:
        handler = ClickHandler()
        handler.setFormatter(logging.Formatter("%(message)s"))
        root.addHandler(handler)
        root.setLevel(LogLevel.INFO)
        root.propagate = False

    return root


def get_logger(name: str) -> UnderlayLogger:
    """Child logger of the package logger, e.g. ``get_logger(__name__)``."""
    root = _setup_root_logger()
    if name == ROOT_LOGGER_NAME:
        return root  # type: ignore[return-value]

    if not name.startswith(f"{ROOT_LOGGER_NAME}."):
        name = f"{ROOT_LOGGER_NAME}.{name}"

    logging.setLoggerClass(UnderlayLogger)
    try:
        child = logging.getLogger(name)
    finally:
        logging.setLoggerClass(logging.Logger)

    return child  # type: ignore[return-value]


def set_level(level: LogLevel | str | int):
    if isinstance(level, str):
        level = LogLevel[level.upper()]

    _setup_root_logger().setLevel(int(level))


logger = get_logger(ROOT_LOGGER_NAME)
