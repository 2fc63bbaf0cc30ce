import click

from app.commands.common import boundary, config_options, execute, load_config


@click.command("sweep")
@config_options
@click.option("--grid", default=None, help="Sweep grid lo:hi:step in units of t.")
@boundary
def sweep(config_path, out_dir, tol, grid):
    """Tracked branches over a t' grid (sweep.csv, events.json)."""
    return execute(load_config(config_path, "sweep", grid=grid), out_dir, tol)
