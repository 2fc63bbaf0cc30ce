import click

from app.commands.common import boundary, config_options, execute, load_config


@click.command("analyze")
@config_options
@click.option("--t-prime", "t_prime", type=float, default=None, help="Coupling t' (overrides the config).")
@boundary
def analyze(config_path, out_dir, tol, t_prime):
    """Diagnostics for the mode closest to the target energy (mode_1.csv, report_1.json)."""
    config = load_config(config_path, "analyze")
    if t_prime is not None:
        params = config.parameters.model_copy(update={"t_prime": t_prime})
        config = config.model_copy(update={"parameters": params})
    return execute(config, out_dir, tol)
