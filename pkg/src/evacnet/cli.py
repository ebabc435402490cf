"""Command-line entry points: replay, report, eval, serve."""

from __future__ import annotations

import json
import logging
import sys

import click

from .classify import LexicalClassifier, RemoteClassifier
from .harvest import PrefilterMode


def _build_classifier(backend: str, endpoint: str | None, model_id: str):
    if backend == "lexical":
        return LexicalClassifier()
    if not endpoint:
        raise click.UsageError("--endpoint is required with --backend remote")
    return RemoteClassifier(endpoint, model_id)


@click.group()
@click.option("-v", "--verbose", is_flag=True, help="Log at DEBUG level.")
def main(verbose: bool) -> None:
    """Hurricane evacuation notice pipeline."""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


@main.command()
@click.option("--scenario", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--registry", "registry_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--geometry", "geometry_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--backend", type=click.Choice(["lexical", "remote"]), default="lexical")
@click.option("--endpoint", default=None, help="Remote classifier base URL.")
@click.option("--model-id", default="default", show_default=True)
@click.option("--prefilter-mode", type=click.Choice(["any", "all"]), default="any", show_default=True)
@click.option("--out", required=True, type=click.Path(dir_okay=False), help="Final feed snapshot path.")
@click.option("--store-out", default=None, type=click.Path(dir_okay=False), help="Save the event store for `report`.")
@click.option("--log-out", default=None, type=click.Path(dir_okay=False), help="Event log path (default stdout).")
def replay(scenario, registry_path, geometry_path, backend, endpoint, model_id, prefilter_mode, out, store_out, log_out):
    """Run a scripted scenario through the full pipeline."""
    from .replay import ScenarioError, run_replay_files, snapshot_bytes

    classifier = _build_classifier(backend, endpoint, model_id)
    try:
        result = run_replay_files(
            scenario,
            registry_path,
            geometry_path,
            classifier=classifier,
            mode=PrefilterMode(prefilter_mode),
        )
    except ScenarioError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    log_text = result.log_text()
    if log_out:
        with open(log_out, "w", encoding="utf-8") as fh:
            fh.write(log_text)
    else:
        click.echo(log_text, nl=False)
    with open(out, "wb") as fh:
        fh.write(snapshot_bytes(result.snapshot))
    if store_out:
        result.store.save(store_out)
    active = len(result.snapshot.get("features", []))
    click.echo(f"replay complete: {active} active notice(s), snapshot at {out}", err=True)


@main.command()
@click.option("--store", "store_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--by", type=click.Choice(["year", "state", "label"]), default="year", show_default=True)
@click.option("--plot-out", default=None, type=click.Path(dir_okay=False), help="Write key,series,count CSV.")
def report(store_path, by, plot_out):
    """Archive statistics tables from a saved store."""
    from .replay import UnreadableStore, load_store, render_report, write_plot_data

    try:
        store = load_store(store_path)
    except UnreadableStore as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    table, triples = render_report(store, by)
    click.echo(table)
    if plot_out:
        write_plot_data(plot_out, triples)


@main.command(name="eval")
@click.option("--data", required=True, type=click.Path(exists=True, dir_okay=False), help="Labeled CSV (text,gold,origin,year,fips).")
@click.option("--task", type=click.Choice(["binary", "three"]), default="three", show_default=True)
@click.option("--backend", type=click.Choice(["lexical", "remote"]), default="lexical")
@click.option("--endpoint", default=None, help="Remote training/classification base URL.")
@click.option("--k", default=10, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--no-stratify", is_flag=True, help="Plain shuffled folds instead of stratified.")
@click.option("--json-out", default=None, type=click.Path(dir_okay=False), help="Machine-readable report path.")
def eval_cmd(data, task, backend, endpoint, k, seed, no_stratify, json_out):
    """Cross-validate a classifier on labeled data."""
    from .evaluate import (
        CvAborted,
        LexicalSource,
        RemoteSource,
        Task,
        fold_report_to_json,
        format_fold_report,
        load_labeled_csv,
        run_cv,
    )

    examples = load_labeled_csv(data)
    if backend == "lexical":
        source = LexicalSource()
    else:
        if not endpoint:
            raise click.UsageError("--endpoint is required with --backend remote")
        source = RemoteSource(endpoint)
    try:
        fold_report = run_cv(
            examples,
            source,
            task=Task(task),
            k=k,
            seed=seed,
            stratify=not no_stratify,
        )
    except CvAborted as exc:
        click.echo(f"error: {exc}", err=True)
        if exc.partial.rows:
            click.echo("partial results (completed folds only):", err=True)
            click.echo(format_fold_report(exc.partial))
        sys.exit(3)
    click.echo(format_fold_report(fold_report))
    if json_out:
        with open(json_out, "w", encoding="utf-8") as fh:
            json.dump(fold_report_to_json(fold_report), fh, indent=2, sort_keys=True)
            fh.write("\n")


@main.command()
@click.option("--registry", "registry_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--geometry", "geometry_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--backend", type=click.Choice(["lexical", "remote"]), default="lexical")
@click.option("--endpoint", default=None, help="Remote classifier base URL.")
@click.option("--model-id", default="default", show_default=True)
@click.option("--alert-endpoint", default=None, help="Alert polling URL.")
@click.option("--alert-file", default=None, type=click.Path(exists=True, dir_okay=False), help="Newline-delimited alert documents (fixture mode).")
@click.option("--store", "store_path", default=None, type=click.Path(dir_okay=False), help="Event store path; loaded if present, saved on exit.")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
@click.option("--reviewer-token", default="", help="Static token required for feedback posts.")
@click.option("--ui-dir", default=None, type=click.Path(exists=True, file_okay=False), help="Static console assets to serve at /.")
@click.option("--alert-poll-secs", default=60.0, show_default=True)
@click.option("--harvest-interval-secs", default=120.0, show_default=True)
@click.option("--fetch-parallelism", default=8, show_default=True)
@click.option("--prefilter-mode", type=click.Choice(["any", "all"]), default="any", show_default=True)
def serve(
    registry_path,
    geometry_path,
    backend,
    endpoint,
    model_id,
    alert_endpoint,
    alert_file,
    store_path,
    host,
    port,
    reviewer_token,
    ui_dir,
    alert_poll_secs,
    harvest_interval_secs,
    fetch_parallelism,
    prefilter_mode,
):
    """Run the live service: poll alerts, harvest, classify, serve the API."""
    import os
    import signal

    import uvicorn

    from .alerts import AlertGateway
    from .geometry import CountyIndex, load_county_shapes
    from .harvest import HttpFetcher
    from .live import LivePipeline
    from .notices import NoticeStore
    from .registry import load_registry
    from .server import create_app

    registry = load_registry(registry_path)
    index = CountyIndex(load_county_shapes(geometry_path))
    store = (
        NoticeStore.load(store_path)
        if store_path and os.path.exists(store_path)
        else NoticeStore()
    )
    pipeline = LivePipeline(
        gateway=AlertGateway(),
        registry=registry,
        store=store,
        classifier=_build_classifier(backend, endpoint, model_id),
        fetcher=HttpFetcher(),
        mode=PrefilterMode(prefilter_mode),
        alert_endpoint=alert_endpoint,
        alert_file=alert_file,
        parallelism=fetch_parallelism,
    )
    app = create_app(
        store, index, registry=registry, reviewer_token=reviewer_token, ui_dir=ui_dir
    )
    pipeline.start(alert_poll_secs=alert_poll_secs, harvest_interval_secs=harvest_interval_secs)
    # After its graceful shutdown, uvicorn restores original signal handlers
    # and re-raises any captured SIGTERM; the default action would kill the
    # process before the finally block below persists the store.
    signal.signal(signal.SIGTERM, lambda signum, frame: sys.exit(0))
    try:
        uvicorn.run(app, host=host, port=port, log_level="info")
    finally:
        pipeline.stop()
        if store_path:
            store.save(store_path)


if __name__ == "__main__":
    main()
