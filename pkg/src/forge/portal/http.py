"""HTTP JSON API under /api/v1, plus /healthz.

Every route except /healthz requires a bearer token. Errors surface as
``{"error": {"code": <stable machine code>, "message": ...}}`` with a fixed
status mapping (401 unauthenticated, 403 forbidden, 404 unknown ids, 409
state conflicts and duplicates, 422 invalid specs/bundles, 429 quota).

Handlers are synchronous on purpose: they run in the server's threadpool,
so store transactions and model invocations can block without stalling the
event loop. Model routes embed the model name, which itself contains a
slash (``competition/team``), so /models/... dispatches from a catch-all.
"""

from __future__ import annotations

from pathlib import Path

from fastapi import Body, Depends, FastAPI, File, Form, Request, Response, UploadFile
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from forge.errors import ForgeError, SpecInvalid, UnknownService
from forge.portal.auth import Principal, Role, authenticate, require_role
from forge.portal.service import PortalService

API_PREFIX = "/api/v1"

_MUTATOR_ROLES = (Role.ORGANIZER, Role.PRODUCT_TEAM)


def _bearer_token(request: Request) -> str | None:
    header = request.headers.get("authorization", "")
    if header.lower().startswith("bearer "):
        return header[7:].strip()
    return None


def _name_version(parts: list[str]) -> tuple[str, int]:
    if len(parts) < 2 or not parts[0]:
        raise UnknownService("/".join(parts))
    try:
        version = int(parts[-1])
    except ValueError:
        raise UnknownService("/".join(parts))
    return "/".join(parts[:-1]), version


def _input_value(raw) -> object:
    if not isinstance(raw, dict) or set(raw) != {"input"}:
        raise SpecInvalid('body must be {"input": <value>}')
    return raw["input"]


def _public_record(record: dict) -> dict:
    public = dict(record)
    for internal in ("claim_token", "lease_expires_at", "completions"):
        public.pop(internal, None)
    return public


def create_app(service: PortalService, ui_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="forge portal", docs_url=None, redoc_url=None)
    app.state.service = service
    # the browser UI is a separate origin during development; auth is via
    # bearer tokens, never cookies, so permissive CORS is acceptable here
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    def current_principal(request: Request) -> Principal:
        return authenticate(service.store, _bearer_token(request))

    auth = Depends(current_principal)

    @app.exception_handler(ForgeError)
    async def forge_error_handler(_request: Request, exc: ForgeError):
        return JSONResponse(
            status_code=exc.http_status, content={"error": exc.to_dict()}
        )

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    @app.get(f"{API_PREFIX}/me")
    def whoami(actor: Principal = auth):
        return {
            "principal_id": actor.principal_id,
            "display_name": actor.display_name,
            "role": actor.role.value,
        }

    # -- competitions -----------------------------------------------------------

    @app.post(f"{API_PREFIX}/competitions", status_code=201)
    def create_competition(payload: dict = Body(...), actor: Principal = auth):
        return {"competition_id": service.create_competition(payload, actor)}

    @app.get(f"{API_PREFIX}/competitions")
    def list_competitions(actor: Principal = auth):
        return service.list_competitions()

    @app.get(f"{API_PREFIX}/competitions/{{competition_id}}")
    def get_competition(competition_id: str, actor: Principal = auth):
        return service.competition_view(competition_id, actor)

    @app.get(f"{API_PREFIX}/competitions/{{competition_id}}/template")
    def get_template(competition_id: str, actor: Principal = auth):
        blob = service.starter_bundle(competition_id)
        return Response(
            content=blob,
            media_type="application/zip",
            headers={
                "Content-Disposition": (
                    f'attachment; filename="{competition_id}-starter.zip"'
                )
            },
        )

    @app.post(
        f"{API_PREFIX}/competitions/{{competition_id}}/submissions", status_code=201
    )
    def submit(
        competition_id: str,
        bundle: UploadFile = File(...),
        team_id: str | None = Form(default=None),
        actor: Principal = auth,
    ):
        blob = bundle.file.read()
        record = service.submit(competition_id, blob, actor, team_id=team_id)
        return _public_record(record)

    @app.get(f"{API_PREFIX}/competitions/{{competition_id}}/leaderboard")
    def leaderboard(competition_id: str, actor: Principal = auth):
        return service.leaderboard(competition_id)

    # -- submissions ------------------------------------------------------------

    @app.get(f"{API_PREFIX}/submissions/{{submission_id}}")
    def get_submission(submission_id: str, actor: Principal = auth):
        return service.get_submission(submission_id, actor)

    # -- harvest / bundles --------------------------------------------------------

    @app.post(f"{API_PREFIX}/harvest/{{bundle_id}}", status_code=201)
    def harvest(bundle_id: str, actor: Principal = auth):
        return service.harvest(bundle_id, actor).to_dict()

    @app.get(f"{API_PREFIX}/bundles/{{bundle_id}}")
    def download_bundle(bundle_id: str, actor: Principal = auth):
        return Response(
            content=service.bundle_blob(bundle_id, actor),
            media_type="application/zip",
        )

    # -- models (exact paths first, then the slash-tolerant catch-all) -------------

    @app.get(f"{API_PREFIX}/models")
    def list_models(
        stage: str | None = None,
        prefix: str | None = None,
        actor: Principal = auth,
    ):
        require_role(actor, *_MUTATOR_ROLES)
        return [m.to_dict() for m in service.registry.list_models(stage, prefix)]

    @app.get(f"{API_PREFIX}/dashboard")
    def dashboard(actor: Principal = auth):
        require_role(actor, *_MUTATOR_ROLES)
        return service.host.dashboard_snapshot()

    @app.get(API_PREFIX + "/models/{rest:path}")
    def model_get(rest: str, actor: Principal = auth):
        parts = rest.split("/")
        if len(parts) >= 3 and parts[-1] == "openapi.json":
            name, version = _name_version(parts[:-1])
            return service.host.api_document(name, version)
        if len(parts) >= 3 and parts[-1] == "health":
            name, version = _name_version(parts[:-1])
            return {"status": service.host.probe(name, version).value}
        name, version = _name_version(parts)
        return service.model_detail(name, version, actor)

    @app.post(API_PREFIX + "/models/{rest:path}")
    def model_post(
        rest: str, payload: dict | None = Body(default=None), actor: Principal = auth
    ):
        parts = rest.split("/")
        if len(parts) < 3:
            raise UnknownService(rest)
        action = parts[-1]
        name, version = _name_version(parts[:-1])
        if action == "predict":
            return {"output": service.host.invoke(name, version, _input_value(payload))}
        if action == "promote":
            to_stage = (payload or {}).get("to_stage")
            if not isinstance(to_stage, str):
                raise SpecInvalid('body must be {"to_stage": <stage>}')
            return service.promote(name, version, to_stage, actor).to_dict()
        if action == "serve":
            return service.serve_model(name, version, actor).to_dict()
        if action == "evaluate":
            dataset_id = (payload or {}).get("dataset_id")
            if not isinstance(dataset_id, str):
                raise SpecInvalid('body must be {"dataset_id": <id>}')
            return _public_record(service.reevaluate(name, version, dataset_id, actor))
        raise UnknownService(f"no such model action {action!r}")

    # -- pipelines ------------------------------------------------------------------

    @app.post(f"{API_PREFIX}/pipelines", status_code=201)
    def compose_pipeline(payload: dict = Body(...), actor: Principal = auth):
        require_role(actor, *_MUTATOR_ROLES)
        stages_raw = payload.get("stages")
        if not isinstance(stages_raw, list):
            raise SpecInvalid('body must be {"stages": [[model_name, version], ...]}')
        stages = []
        for item in stages_raw:
            if (
                not isinstance(item, (list, tuple))
                or len(item) != 2
                or not isinstance(item[0], str)
                or not isinstance(item[1], int)
            ):
                raise SpecInvalid(f"bad stage entry: {item!r}")
            stages.append((item[0], item[1]))
        return service.host.compose_pipeline(stages).to_dict()

    @app.get(f"{API_PREFIX}/pipelines")
    def list_pipelines(actor: Principal = auth):
        require_role(actor, *_MUTATOR_ROLES)
        return [p.to_dict() for p in service.host.list_pipelines()]

    @app.post(f"{API_PREFIX}/pipelines/{{pipeline_id}}/predict")
    def invoke_pipeline(
        pipeline_id: str, payload: dict = Body(...), actor: Principal = auth
    ):
        value = _input_value(payload)
        return {"output": service.host.invoke_pipeline(pipeline_id, value)}

    if ui_dir and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
