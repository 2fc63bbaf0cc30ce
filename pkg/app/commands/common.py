import contextlib
import functools
import sys
from pathlib import Path
from typing import Any, Callable, Dict, Optional

import click
import orjson
from pydantic import ValidationError

from app.errors import EXIT_OK, EXIT_VALIDATION, ConfigurationError, LucasError
from app.services.scenario.runner import RunResult, run_scenario
from app.services.scenario.schema import GridRange, ScenarioConfig, parse_config
from app.utils.progress import emit_process, set_process_emitter


def stderr_emitter(event: Dict[str, Any]):
    click.echo(orjson.dumps(event, option=orjson.OPT_SORT_KEYS).decode(), err=True)


def parse_grid(text: str) -> GridRange:
    """`lo:hi:step` -> GridRange."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigurationError(f"--grid expects lo:hi:step, got '{text}'", key="--grid")
    try:
        lo, hi, step = (float(p) for p in parts)
        return GridRange(lo=lo, hi=hi, step=step)
    except (ValueError, ValidationError) as exc:
        raise ConfigurationError(f"--grid '{text}': {exc}", key="--grid") from exc


def load_config(path: Optional[str], analysis: str, grid: Optional[str] = None, **extra: Any) -> ScenarioConfig:
    if path is None:
        raise ConfigurationError(f"{analysis} needs --config", key="--config")
    config = parse_config(Path(path).read_bytes())
    update: Dict[str, Any] = {"analyses": [analysis]}
    if grid is not None:
        update["sweep_grid"] = parse_grid(grid)
    update.update({k: v for k, v in extra.items() if v is not None})
    return config.model_copy(update=update)


def config_options(fn: Callable) -> Callable:
    fn = click.option("--tol", type=float, default=None, help="Zero-energy tolerance (units of t).")(fn)
    fn = click.option("--out", "out_dir", type=click.Path(file_okay=False), default=None, help="Output directory.")(fn)
    fn = click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), default=None, help="Scenario JSON.")(fn)
    return fn


def boundary(fn: Callable[..., RunResult]) -> Callable:
    """Translate LucasError / ValidationError into an exit status plus one JSON line on stderr."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        ctx = click.get_current_context()
        set_process_emitter(stderr_emitter)
        try:
            # stdout carries only the written file paths
            with contextlib.redirect_stdout(sys.stderr):
                result = fn(*args, **kwargs)
        except LucasError as exc:
            emit_process(exc.to_event())
            ctx.exit(exc.exit_status)
        except ValidationError as exc:
            first = exc.errors()[0]
            key = ".".join(str(p) for p in first.get("loc", ()))
            emit_process({"event": "error", "kind": "configuration", "message": first["msg"], "key": key})
            ctx.exit(EXIT_VALIDATION)
        finally:
            set_process_emitter(None)
        for name in result.files:
            click.echo(str(result.out_dir / name))
        ctx.exit(EXIT_OK)

    return wrapper


def execute(config: ScenarioConfig, out_dir: Optional[str], tol: Optional[float]) -> RunResult:
    return run_scenario(config, out_dir=out_dir, tol=tol)
