"""`forge` admin CLI.

Local subcommands operate directly on the data directory (shell access to
the data dir is organizer-level trust); `models serve` talks to a running
server because materialized services live in the server process.
"""

from __future__ import annotations

import json
import logging
import sys
import urllib.error
import urllib.request
from pathlib import Path

import click
import yaml

from forge.errors import ForgeError
from forge.evaluation.types import DatasetVisibility
from forge.portal.auth import Principal, Role, mint_token
from forge.portal.service import PortalConfig, PortalService

DEFAULT_ADDR = "127.0.0.1:8080"


class ForgeGroup(click.Group):
    """Render domain errors as one-line failures instead of tracebacks."""

    def invoke(self, ctx: click.Context):
        try:
            return super().invoke(ctx)
        except ForgeError as exc:
            raise click.ClickException(f"[{exc.code}] {exc.message}")


def _admin() -> Principal:
    return Principal(principal_id="cli-admin", display_name="CLI", role=Role.ORGANIZER)


def _service(data_dir: str, workers: int = 0) -> PortalService:
    return PortalService(
        PortalConfig(data_dir=data_dir, workers=workers, probe_interval_s=None)
    )


@click.group(cls=ForgeGroup)
@click.option(
    "--data-dir",
    envvar="FORGE_DATA_DIR",
    default="./forge-data",
    show_default=True,
    help="Platform data directory (metadata store + blobs).",
)
@click.option("--log-level", envvar="FORGE_LOG_LEVEL", default="info")
@click.pass_context
def cli(ctx: click.Context, data_dir: str, log_level: str):
    """Self-hosted AI competition platform."""
    logging.basicConfig(level=log_level.upper())
    ctx.ensure_object(dict)
    ctx.obj["data_dir"] = data_dir


@cli.command()
@click.option("--addr", envvar="FORGE_ADDR", default=DEFAULT_ADDR, show_default=True)
@click.option("--workers", default=2, show_default=True, help="Evaluation workers.")
@click.option("--ui-dir", envvar="FORGE_UI_DIR", default=None, help="Built web UI to serve at /.")
@click.pass_context
def serve(ctx: click.Context, addr: str, workers: int, ui_dir: str | None):
    """Run the HTTP API server with background evaluation workers."""
    import uvicorn

    from forge.portal.http import create_app

    host, _, port = addr.partition(":")
    service = PortalService(
        PortalConfig(data_dir=ctx.obj["data_dir"], workers=workers)
    )
    service.start_workers()
    app = create_app(service, ui_dir=ui_dir)
    try:
        uvicorn.run(app, host=host or "127.0.0.1", port=int(port or 8080), log_level="info")
    finally:
        service.shutdown()


@cli.group()
def competition():
    """Competition lifecycle."""


@competition.command("create")
@click.option("-f", "--file", "spec_file", required=True, type=click.Path(exists=True))
@click.pass_context
def competition_create(ctx: click.Context, spec_file: str):
    """Create a competition from a YAML spec file."""
    raw = yaml.safe_load(Path(spec_file).read_text("utf-8"))
    service = _service(ctx.obj["data_dir"])
    competition_id = service.create_competition(raw, _admin())
    click.echo(competition_id)


@cli.group()
def dataset():
    """Evaluation datasets (registered by file path, never copied)."""


@dataset.command("add")
@click.option("--id", "dataset_id", required=True)
@click.option("--inputs", type=click.Path(exists=True), help="NDJSON of {id, input}.")
@click.option("--labels", type=click.Path(exists=True), help="NDJSON of {id, label}.")
@click.option(
    "--file",
    "combined",
    type=click.Path(exists=True),
    help="Combined NDJSON of {id, input, label}; split under the data dir.",
)
@click.option(
    "--visibility",
    type=click.Choice([v.value for v in DatasetVisibility]),
    default=DatasetVisibility.HIDDEN_EVAL.value,
    show_default=True,
)
@click.pass_context
def dataset_add(
    ctx: click.Context,
    dataset_id: str,
    inputs: str | None,
    labels: str | None,
    combined: str | None,
    visibility: str,
):
    service = _service(ctx.obj["data_dir"])
    if combined:
        inputs, labels = _split_combined(
            Path(ctx.obj["data_dir"]), dataset_id, Path(combined)
        )
    if not inputs or not labels:
        raise click.UsageError("provide --inputs and --labels, or --file")
    ref = service.register_dataset(dataset_id, inputs, labels, visibility)
    click.echo(f"{ref.dataset_id} ({ref.record_count} records, {ref.visibility.value})")


def _split_combined(data_dir: Path, dataset_id: str, combined: Path) -> tuple[str, str]:
    target = data_dir / "datasets" / dataset_id
    target.mkdir(parents=True, exist_ok=True)
    inputs_path = target / "inputs.ndjson"
    labels_path = target / "labels.ndjson"
    with open(combined, "r", encoding="utf-8") as src, open(
        inputs_path, "w", encoding="utf-8"
    ) as fin, open(labels_path, "w", encoding="utf-8") as flab:
        for line in src:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            fin.write(json.dumps({"id": obj["id"], "input": obj["input"]}) + "\n")
            flab.write(json.dumps({"id": obj["id"], "label": obj["label"]}) + "\n")
    return str(inputs_path), str(labels_path)


@cli.group()
def token():
    """Access tokens."""


@token.command("mint")
@click.option("--role", type=click.Choice([r.value for r in Role]), required=True)
@click.option("--name", required=True, help="Display name; also derives the principal id.")
@click.pass_context
def token_mint(ctx: click.Context, role: str, name: str):
    """Mint a bearer token (shown once; only its hash is stored)."""
    service = _service(ctx.obj["data_dir"])
    principal_id, secret = mint_token(service.store, name, role)
    click.echo(f"principal: {principal_id}")
    click.echo(f"token: {secret}")


@cli.group()
def models():
    """Model registry."""


@models.command("ls")
@click.option("--stage", default=None)
@click.option("--prefix", default=None)
@click.pass_context
def models_ls(ctx: click.Context, stage: str | None, prefix: str | None):
    service = _service(ctx.obj["data_dir"])
    for model in service.registry.list_models(stage, prefix):
        metrics = json.dumps(model.metrics, sort_keys=True)
        click.echo(
            f"{model.model_name}\tv{model.version}\t{model.stage.value}\t{metrics}"
        )


@models.command("export")
@click.pass_context
def models_export(ctx: click.Context):
    """Emit the registry as NDJSON on stdout."""
    service = _service(ctx.obj["data_dir"])
    sys.stdout.write(service.registry.export_ndjson())


@models.command("serve")
@click.argument("model_name")
@click.argument("version", type=int)
@click.option("--api-url", default=f"http://{DEFAULT_ADDR}", show_default=True)
@click.option("--token", "token_value", required=True)
def models_serve(model_name: str, version: int, api_url: str, token_value: str):
    """Materialize a version as a microservice on a running server."""
    url = f"{api_url}/api/v1/models/{model_name}/{version}/serve"
    request = urllib.request.Request(
        url, method="POST", headers={"Authorization": f"Bearer {token_value}"}
    )
    try:
        with urllib.request.urlopen(request) as response:
            click.echo(response.read().decode("utf-8"))
    except urllib.error.HTTPError as exc:
        click.echo(exc.read().decode("utf-8"), err=True)
        sys.exit(1)


@cli.command()
@click.argument("bundle_id")
@click.pass_context
def harvest(ctx: click.Context, bundle_id: str):
    """Pull an evaluated submission into the model registry."""
    service = _service(ctx.obj["data_dir"])
    model = service.harvest(bundle_id, _admin())
    click.echo(f"{model.model_name} v{model.version} ({model.stage.value})")


@cli.command()
@click.argument("model_name")
@click.argument("version", type=int)
@click.argument("to_stage")
@click.pass_context
def promote(ctx: click.Context, model_name: str, version: int, to_stage: str):
    """Advance a model version through its stage lifecycle."""
    service = _service(ctx.obj["data_dir"])
    model = service.promote(model_name, version, to_stage, _admin())
    click.echo(f"{model.model_name} v{model.version} ({model.stage.value})")


def main() -> None:
    cli()


if __name__ == "__main__":
    main()
