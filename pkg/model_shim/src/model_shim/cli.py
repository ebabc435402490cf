"""Command-line entry points for the shim."""

from __future__ import annotations

import os

import click


@click.group()
def main() -> None:
    """Transformer classifier server for the notice wire protocol."""


@main.command()
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.option("--seed", default=0, show_default=True)
def init(out_dir: str, seed: int) -> None:
    """Build a fresh local checkpoint directory."""
    from .checkpoint import build_checkpoint

    path = build_checkpoint(out_dir, seed=seed)
    click.echo(f"checkpoint written to {path}")


@main.command()
@click.option("--checkpoint", "checkpoint_dir", required=True, type=click.Path(file_okay=False))
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8600, show_default=True)
@click.option("--build-if-missing", is_flag=True, help="Create the checkpoint when absent.")
def serve(checkpoint_dir: str, host: str, port: int, build_if_missing: bool) -> None:
    """Serve /classify and /train over the given checkpoint."""
    import uvicorn

    from .checkpoint import build_checkpoint
    from .server import create_app

    if not os.path.isdir(checkpoint_dir):
        if not build_if_missing:
            raise click.ClickException(f"no checkpoint at {checkpoint_dir}")
        build_checkpoint(checkpoint_dir)
    uvicorn.run(create_app(checkpoint_dir), host=host, port=port, log_level="info")


if __name__ == "__main__":
    main()
