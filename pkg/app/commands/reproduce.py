import click

from app.commands.common import boundary, config_options, execute, load_config
from app.services.scenario.reproduce import SUITES
from app.services.scenario.schema import SCHEMA_VERSION, ScenarioConfig


@click.command("reproduce")
@click.argument("figure", type=click.Choice(sorted(SUITES)))
@config_options
@boundary
def reproduce(figure, config_path, out_dir, tol):
    """Rebuild a figure's configuration and run its acceptance checks (acceptance.json)."""
    if config_path is None:
        config = ScenarioConfig(version=SCHEMA_VERSION, analyses=["reproduce"], figure=figure)
    else:
        config = load_config(config_path, "reproduce", figure=figure)
    return execute(config, out_dir, tol)
