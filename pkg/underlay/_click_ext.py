import click
from pydantic import ImportString, TypeAdapter, ValidationError

from underlay.logging import LogLevel, set_level
from underlay.types import Algorithm

_import_adapter: TypeAdapter = TypeAdapter(ImportString)


def cls_import_callback(ctx, param, cls_name):
    if cls_name is None:
        return None  # User explicitly provided None

    try:
        return _import_adapter.validate_python(cls_name)
    except ValidationError:
        raise click.BadParameter(message=f"Failed to import {param.name} class: '{cls_name}'.")


def algorithms_callback(
    ctx: click.Context, param: click.Parameter, algorithms: str | None
) -> list[Algorithm] | None:
    if algorithms is None:
        return None

    try:
        return [Algorithm(name.strip()) for name in algorithms.split(",") if name.strip()]
    except ValueError:
        choices = ", ".join(str(algorithm) for algorithm in Algorithm)
        raise click.BadParameter(
            f"Unknown algorithm in '{algorithms}', choose from: {choices}.",
            ctx=ctx,
            param=param,
        )


def verbosity_callback(ctx: click.Context, param: click.Parameter, level: str | None):
    if level is None:
        from underlay.settings import Settings

        level = Settings().LOG_LEVEL

    set_level(level)


def verbosity_option(f):
    return click.option(
        "-v",
        "--verbosity",
        type=click.Choice([level.name for level in LogLevel], case_sensitive=False),
        metavar="LEVEL",
        help="One of ERROR, WARNING, SUCCESS, INFO or DEBUG (default: `UNDERLAY_LOG_LEVEL`)",
        callback=verbosity_callback,
        expose_value=False,
        is_eager=True,
    )(f)


class OrderedCommands(click.Group):
    # NOTE: Override so we get the list ordered by definition order
    def list_commands(self, ctx: click.Context) -> list[str]:
        return list(self.commands)


class SectionedHelpGroup(OrderedCommands):
    """Section commands into help groups"""

    sections: dict[str, list[click.Command]]

    def __init__(self, *args, **kwargs):
        self.sections = {}
        super().__init__(*args, **kwargs)

    def command(self, *args, **kwargs):
        section = kwargs.pop("section", "Commands")
        decorator = super().command(*args, **kwargs)

        def new_decorator(f):
            cmd = decorator(f)
            self.sections.setdefault(section, []).append(cmd)
            return cmd

        return new_decorator

    def format_commands(self, ctx, formatter):
        for section, cmds in self.sections.items():
            if rows := [(cmd.name, cmd.get_short_help_str(formatter.width)) for cmd in cmds]:
                with formatter.section(section):
                    formatter.write_dl(rows)
