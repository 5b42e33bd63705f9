import json

import pytest

from forge.errors import (
    EmptyPipeline,
    NotInServingStage,
    PortExhausted,
    ServiceUnhealthy,
    StageNotServing,
    StartupFailed,
    UnknownService,
)
from forge.serving.host import ServiceStatus
from forge.serving.openapi import validate_openapi

from conftest import (
    PREDICT_ADD_ONE,
    PREDICT_DOUBLE,
    PREDICT_EXIT_BEFORE_READY,
    PREDICT_IDENTITY,
    make_bundle,
    organizer,
    participant,
    setup_toy_competition,
)


@pytest.fixture
def arena(portal, tmp_path):
    setup_toy_competition(portal, tmp_path, daily_quota=50)
    return portal


def deploy(portal, team: str, source: str, principal_n: int):
    """submit -> evaluate -> harvest -> validated -> serving; returns the model."""
    blob = make_bundle(team_id=team, predict_source=source)
    record = portal.submit("compA", blob, participant(principal_n))
    portal.make_worker().run_once()
    row = portal.store.get_evaluation(record["eval_id"])
    assert row["status"] == "succeeded", row
    model = portal.harvest(record["bundle_id"], organizer())
    portal.promote(model.model_name, model.version, "validated", organizer())
    portal.promote(model.model_name, model.version, "serving", organizer())
    return portal.registry.get(model.model_name, model.version)


def test_materialize_identity_service(arena):
    model = deploy(arena, "teamX", PREDICT_IDENTITY, 1)
    descriptor = arena.host.materialize(model.model_name, model.version)
    assert descriptor.status is ServiceStatus.HEALTHY
    assert descriptor.route == f"/models/{model.model_name}/{model.version}/predict"
    assert descriptor.started_at is not None

    assert arena.host.invoke(model.model_name, model.version, 7) == 7
    assert arena.host.invoke(model.model_name, model.version, {"x": [1, 2]}) == {
        "x": [1, 2]
    }


def test_materialize_requires_serving_stage(arena):
    blob = make_bundle(team_id="teamH", predict_source=PREDICT_IDENTITY)
    record = arena.submit("compA", blob, participant(2))
    arena.make_worker().run_once()
    model = arena.harvest(record["bundle_id"], organizer())
    with pytest.raises(NotInServingStage):
        arena.host.materialize(model.model_name, model.version)


def test_startup_failure_surfaces_stderr(arena):
    # a bundle whose process exits immediately
    blob = make_bundle(team_id="teamDead", predict_source=PREDICT_EXIT_BEFORE_READY)
    record = arena.submit("compA", blob, participant(3))
    # force a succeeded evaluation so it can be harvested, then break it at serve time
    from test_registry import mark_succeeded

    mark_succeeded(arena)
    dead = arena.harvest(record["bundle_id"], organizer())
    arena.promote(dead.model_name, dead.version, "validated", organizer())
    arena.promote(dead.model_name, dead.version, "serving", organizer())
    with pytest.raises(StartupFailed):
        arena.host.materialize(dead.model_name, dead.version)


def test_invoke_deterministic_and_openapi_doc(arena):
    model = deploy(arena, "teamX", PREDICT_IDENTITY, 1)
    arena.host.materialize(model.model_name, model.version)
    first = json.dumps(arena.host.invoke(model.model_name, model.version, [1, "a"]))
    second = json.dumps(arena.host.invoke(model.model_name, model.version, [1, "a"]))
    assert first == second

    doc = arena.host.api_document(model.model_name, model.version)
    validate_openapi(doc)
    assert doc["info"]["title"] == model.model_name


def test_invoke_after_stop_and_unknown(arena):
    model = deploy(arena, "teamX", PREDICT_IDENTITY, 1)
    with pytest.raises(UnknownService):
        arena.host.invoke(model.model_name, model.version, 1)
    arena.host.materialize(model.model_name, model.version)
    arena.host.stop(model.model_name, model.version)
    with pytest.raises(ServiceUnhealthy):
        arena.host.invoke(model.model_name, model.version, 1)
    assert (
        arena.host.descriptor(model.model_name, model.version).status
        is ServiceStatus.STOPPED
    )


def test_killed_process_flips_unhealthy_on_probe_and_invoke(arena):
    model = deploy(arena, "teamX", PREDICT_IDENTITY, 1)
    arena.host.materialize(model.model_name, model.version)
    service = arena.host._service_for(model.model_name, model.version)
    service.process._proc.kill()
    service.process._proc.wait()

    status = arena.host.probe(model.model_name, model.version)
    assert status is ServiceStatus.UNHEALTHY
    with pytest.raises(ServiceUnhealthy):
        arena.host.invoke(model.model_name, model.version, 5)


def test_health_probe_reserved_record(arena):
    model = deploy(arena, "teamX", PREDICT_IDENTITY, 1)
    arena.host.materialize(model.model_name, model.version)
    assert arena.host.probe(model.model_name, model.version) is ServiceStatus.HEALTHY


def test_rematerialize_after_stop(arena):
    model = deploy(arena, "teamX", PREDICT_IDENTITY, 1)
    first = arena.host.materialize(model.model_name, model.version)
    assert arena.host.materialize(model.model_name, model.version) is first
    arena.host.stop(model.model_name, model.version)
    fresh = arena.host.materialize(model.model_name, model.version)
    assert fresh.status is ServiceStatus.HEALTHY
    assert arena.host.invoke(model.model_name, model.version, 9) == 9


def test_max_services_port_exhaustion(tmp_path, fast_policy):
    from forge.portal.service import PortalConfig, PortalService

    portal = PortalService(
        PortalConfig(
            data_dir=tmp_path / "data",
            policy=fast_policy,
            workers=0,
            probe_interval_s=None,
            max_services=1,
        )
    )
    try:
        setup_toy_competition(portal, tmp_path, daily_quota=50)
        m1 = deploy(portal, "team1", PREDICT_IDENTITY, 1)
        m2 = deploy(portal, "team2", PREDICT_IDENTITY, 2)
        portal.host.materialize(m1.model_name, m1.version)
        with pytest.raises(PortExhausted):
            portal.host.materialize(m2.model_name, m2.version)
    finally:
        portal.shutdown()


# -- pipelines --------------------------------------------------------------------


def test_pipeline_add_one_then_double(arena):
    add_one = deploy(arena, "teamAdd", PREDICT_ADD_ONE, 11)
    double = deploy(arena, "teamDouble", PREDICT_DOUBLE, 12)
    arena.host.materialize(add_one.model_name, add_one.version)
    arena.host.materialize(double.model_name, double.version)

    pipeline = arena.host.compose_pipeline(
        [(add_one.model_name, 1), (double.model_name, 1)]
    )
    assert pipeline.route == f"/pipelines/{pipeline.pipeline_id}/predict"
    # composition oracle: (3 + 1) * 2
    assert arena.host.invoke_pipeline(pipeline.pipeline_id, 3) == 8


def test_pipeline_identity_composition(arena):
    identity = deploy(arena, "teamX", PREDICT_IDENTITY, 1)
    arena.host.materialize(identity.model_name, 1)
    pipeline = arena.host.compose_pipeline(
        [(identity.model_name, 1), (identity.model_name, 1)]
    )
    assert arena.host.invoke_pipeline(pipeline.pipeline_id, 5) == 5


def test_pipeline_associativity_on_fixture_inputs(arena):
    add_one = deploy(arena, "teamAdd", PREDICT_ADD_ONE, 11)
    double = deploy(arena, "teamDouble", PREDICT_DOUBLE, 12)
    identity = deploy(arena, "teamX", PREDICT_IDENTITY, 1)
    for model in (add_one, double, identity):
        arena.host.materialize(model.model_name, model.version)

    abc = arena.host.compose_pipeline(
        [(add_one.model_name, 1), (double.model_name, 1), (identity.model_name, 1)]
    )
    ab = arena.host.compose_pipeline([(add_one.model_name, 1), (double.model_name, 1)])
    c = arena.host.compose_pipeline([(identity.model_name, 1)])
    for value in (0, 3, -5, 10):
        direct = arena.host.invoke_pipeline(abc.pipeline_id, value)
        staged = arena.host.invoke_pipeline(
            c.pipeline_id, arena.host.invoke_pipeline(ab.pipeline_id, value)
        )
        assert direct == staged


def test_pipeline_stage_checks(arena):
    identity = deploy(arena, "teamX", PREDICT_IDENTITY, 1)
    arena.host.materialize(identity.model_name, 1)
    with pytest.raises(EmptyPipeline):
        arena.host.compose_pipeline([])

    blob = make_bundle(team_id="teamRaw", predict_source=PREDICT_IDENTITY)
    record = arena.submit("compA", blob, participant(13))
    arena.make_worker().run_once()
    raw = arena.harvest(record["bundle_id"], organizer())
    with pytest.raises(StageNotServing) as err:
        arena.host.compose_pipeline(
            [(identity.model_name, 1), (raw.model_name, raw.version)]
        )
    assert err.value.index == 1


def test_dashboard_snapshot(arena):
    identity = deploy(arena, "teamX", PREDICT_IDENTITY, 1)
    assert arena.host.dashboard_snapshot() == []
    arena.host.materialize(identity.model_name, 1)
    rows = arena.host.dashboard_snapshot()
    assert len(rows) == 1
    assert rows[0]["service"]["status"] == "healthy"
    # identity on the parity-labeled toy dataset scores 0; the row carries it
    assert rows[0]["metrics"] == {"compA-hidden": {"accuracy": 0.0}}

    arena.host.stop(identity.model_name, 1)
    rows = arena.host.dashboard_snapshot()
    assert rows[0]["service"]["status"] == "stopped"
