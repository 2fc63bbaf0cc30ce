import click

from app.commands import analyze, find_zero, reproduce, spectrum, sweep


@click.group()
def cli():
    """Non-Hermitian lattice zero-mode simulator."""


cli.add_command(spectrum)
cli.add_command(sweep)
cli.add_command(find_zero)
cli.add_command(analyze)
cli.add_command(reproduce)


if __name__ == "__main__":
    cli()
