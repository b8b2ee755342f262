"""Command-line client for the halfcheck service.

Every subcommand is a thin HTTP client: it builds a request, posts it to
the service API, and renders the response. Without ``--server`` the app
runs in-process over an ASGI transport, so the CLI works standalone;
with ``--server URL`` the same requests go to a remote deployment (paths
in the config then refer to the server's filesystem).

Exit codes: 0 success, 2 precondition/config error, 3 data error,
4 backend error.
"""

from __future__ import annotations

import asyncio
import json
import sys
from pathlib import Path
from typing import Any, Optional

import click
import httpx

from .config import RunConfig, load_config
from .errors import ConfigError, HalfcheckError
from .service.app import create_app, error_kind

EXIT_CODES = {"config": 2, "data": 3, "backend": 4, "internal": 4}


def _client(server: Optional[str], config: RunConfig) -> httpx.AsyncClient:
    if server:
        return httpx.AsyncClient(base_url=server, timeout=600.0)
    transport = httpx.ASGITransport(app=create_app(config))
    return httpx.AsyncClient(transport=transport, base_url="http://halfcheck.local", timeout=600.0)


def _fail(kind: str, message: str) -> None:
    click.echo(f"error ({kind}): {message}", err=True)
    sys.exit(EXIT_CODES.get(kind, 4))


def _post(server: Optional[str], config: RunConfig, path: str, payload: dict) -> dict:
    async def go() -> httpx.Response:
        async with _client(server, config) as client:
            return await client.post(path, json=payload)

    try:
        response = asyncio.run(go())
    except httpx.HTTPError as exc:
        _fail("backend", f"cannot reach service: {exc}")
        raise AssertionError  # unreachable
    if response.status_code >= 400:
        try:
            body = response.json()
        except ValueError:
            body = {}
        error = body.get("error")
        if isinstance(error, dict) and "kind" in error:
            _fail(error["kind"], error.get("message", "unknown error"))
        if response.status_code == 422:
            _fail("config", json.dumps(body.get("detail", body)))
        _fail("data" if response.status_code < 500 else "backend", response.text)
    return response.json()


def _load_config_or_die(
    config_path: Optional[str], seed: Optional[int], out: Optional[str], workers: Optional[int]
) -> RunConfig:
    overrides: dict[str, Any] = {}
    if seed is not None:
        overrides["seed"] = seed
    if out is not None:
        overrides["out_dir"] = out
    if workers is not None:
        overrides["workers"] = workers
    try:
        return load_config(config_path, overrides)
    except ConfigError as exc:
        _fail("config", str(exc))
        raise AssertionError  # unreachable


def _echo_summary(body: dict) -> None:
    for name, value in sorted(body.get("counts", {}).items()):
        click.echo(f"{name}: {json.dumps(value, sort_keys=True)}")
    for name, path in sorted(body.get("artifacts", {}).items()):
        if isinstance(path, str):
            click.echo(f"wrote {name}: {path}")


def _shared_options(fn):
    fn = click.option("--config", "config_path", type=click.Path(), default=None,
                      help="JSON run-config file.")(fn)
    fn = click.option("--seed", type=int, default=None, help="Override the run seed.")(fn)
    fn = click.option("--out", type=click.Path(), default=None, help="Override the output directory.")(fn)
    fn = click.option("--workers", type=int, default=None, help="Parallel workers for per-record stages.")(fn)
    fn = click.option("--server", default=None, help="Remote service URL (default: in-process).")(fn)
    return fn


@click.group()
def main() -> None:
    """Half-truth detection and debunking pipeline."""


@main.command("build-dataset")
@_shared_options
def build_dataset(config_path, seed, out, workers, server) -> None:
    """Ingest LIAR-PLUS files and write the extended dataset."""
    config = _load_config_or_die(config_path, seed, out, workers)
    body = _post(server, config, "/jobs/build-dataset", {"config": config.model_dump(mode="json")})
    _echo_summary(body)


@main.command()
@_shared_options
@click.option("--mode", type=click.Choice(["J", "SJ"]), default=None,
              help="Evidence column: full justification (J) or shortened (SJ).")
@click.option("--split", default="test", show_default=True)
@click.option("--from-matrix", "from_matrix", type=click.Path(), default=None,
              help="Score a 3x3 confusion matrix from a JSON file instead of running the classifier.")
def detect(config_path, seed, out, workers, server, mode, split, from_matrix) -> None:
    """Run three-way detection over a built split and report metrics."""
    config = _load_config_or_die(config_path, seed, out, workers)
    payload: dict[str, Any] = {
        "config": config.model_dump(mode="json"),
        "split": split,
        "mode": mode,
    }
    if from_matrix is not None:
        matrix_path = Path(from_matrix)
        if not matrix_path.exists():
            _fail("data", f"matrix file not found: {matrix_path}")
        try:
            raw = json.loads(matrix_path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            _fail("data", f"matrix file is not valid JSON: {exc}")
            raise AssertionError  # unreachable
        payload["from_matrix"] = raw.get("matrix") if isinstance(raw, dict) else raw
    body = _post(server, config, "/jobs/detect", payload)
    click.echo(body["report"]["rendered"], nl=False)
    _echo_summary(body)


@main.command()
@_shared_options
@click.option("--split", default="test", show_default=True)
def edit(config_path, seed, out, workers, server, split) -> None:
    """Edit every half-true/false claim of a built split."""
    config = _load_config_or_die(config_path, seed, out, workers)
    body = _post(
        server, config, "/jobs/edit",
        {"config": config.model_dump(mode="json"), "split": split},
    )
    _echo_summary(body)


@main.command()
@_shared_options
@click.option("--results", "results_path", type=click.Path(), default=None,
              help="Edit-results JSON-lines file (default: <out>/edit/results.jsonl).")
def evaluate(config_path, seed, out, workers, server, results_path) -> None:
    """Score an editing run: content preservation and debunk ratio."""
    config = _load_config_or_die(config_path, seed, out, workers)
    body = _post(
        server, config, "/jobs/evaluate",
        {"config": config.model_dump(mode="json"), "results_path": results_path},
    )
    click.echo(body["table"], nl=False)
    _echo_summary(body)


@main.command()
@_shared_options
@click.option("--split", default="test", show_default=True)
def pipeline(config_path, seed, out, workers, server, split) -> None:
    """Run build -> detect -> edit -> evaluate with one manifest."""
    config = _load_config_or_die(config_path, seed, out, workers)
    body = _post(
        server, config, "/jobs/pipeline",
        {"config": config.model_dump(mode="json"), "split": split},
    )
    _echo_summary(body)


@main.command("build-training-data")
@_shared_options
@click.option("--take", type=int, default=None, help="Use only the first N paraphrase pairs.")
@click.option("--split-sizes", default=None,
              help="Comma-separated train,validation,test instance counts.")
def build_training_data(config_path, seed, out, workers, server, take, split_sizes) -> None:
    """Build masked-infill training instances from paraphrase pairs."""
    config = _load_config_or_die(config_path, seed, out, workers)
    sizes = None
    if split_sizes:
        try:
            parts = [int(p) for p in split_sizes.split(",")]
        except ValueError:
            _fail("config", f"--split-sizes must be three integers, got {split_sizes!r}")
            raise AssertionError  # unreachable
        if len(parts) != 3:
            _fail("config", f"--split-sizes must be three integers, got {split_sizes!r}")
        sizes = parts
    body = _post(
        server, config, "/jobs/build-training-data",
        {"config": config.model_dump(mode="json"), "take": take, "split_sizes": sizes},
    )
    _echo_summary(body)


@main.command()
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
def serve(config_path, host, port) -> None:
    """Host the service for remote clients."""
    import uvicorn

    try:
        config = load_config(config_path)
        app = create_app(config)
    except HalfcheckError as exc:
        _fail(error_kind(exc), str(exc))
        raise AssertionError  # unreachable
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
