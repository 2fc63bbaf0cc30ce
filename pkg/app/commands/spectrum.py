import click

from app.commands.common import boundary, config_options, execute, load_config


@click.command("spectrum")
@config_options
@boundary
def spectrum(config_path, out_dir, tol):
    """Eigenvalues of the configured lattice at its t' (spectrum.csv)."""
    return execute(load_config(config_path, "spectrum"), out_dir, tol)
