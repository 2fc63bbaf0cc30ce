import click

from app.commands.common import boundary, config_options, execute, load_config


@click.command("find-zero")
@config_options
@click.option("--bracket", nargs=2, type=float, default=None, help="t' bracket: LO HI.")
@boundary
def find_zero(config_path, out_dir, tol, bracket):
    """Tune t' until an on-axis branch reaches E = 0 (mode_0.csv, report_0.json)."""
    return execute(load_config(config_path, "find-zero", bracket=tuple(bracket) if bracket else None), out_dir, tol)
