import random
from datetime import datetime, timedelta, timezone

import pytest

from forge.clock import fmt_ts, parse_ts
from forge.errors import MetricMissing, SpecInvalid
from forge.evaluation.types import ErrorClass, EvalStatus, EvaluationRecord
from forge.leaderboard import (
    CompetitionSpec,
    Direction,
    Phase,
    compute_leaderboard,
    phase_at,
)

from oracles import leaderboard_oracle

T0 = datetime(2026, 3, 1, tzinfo=timezone.utc)


def spec(direction="maximize", metric="accuracy") -> CompetitionSpec:
    return CompetitionSpec(
        competition_id="compA",
        title="t",
        primary_metric=metric,
        direction=Direction(direction),
        hidden_dataset="hidden",
        phases=[Phase("main", T0, T0 + timedelta(days=30))],
    ).validate()


def record(
    eval_id: str,
    bundle_id: str,
    score: float | None,
    *,
    finished_minutes: int = 0,
    failed: bool = False,
) -> EvaluationRecord:
    return EvaluationRecord(
        eval_id=eval_id,
        bundle_id=bundle_id,
        dataset_id="hidden",
        status=EvalStatus.FAILED if failed else EvalStatus.SUCCEEDED,
        error_class=ErrorClass.NONZERO_EXIT if failed else ErrorClass.NONE,
        metrics={} if failed else {"accuracy": score},
        finished_at=fmt_ts(T0 + timedelta(minutes=finished_minutes)),
    )


def test_competition_ranking_1224():
    # A:0.9 C:0.9 B:0.8 -> ranks 1,1,3  (pinned via the brute-force oracle)
    records = [
        record("e1", "bA", 0.9, finished_minutes=1),
        record("e2", "bB", 0.8, finished_minutes=2),
        record("e3", "bC", 0.9, finished_minutes=3),
    ]
    teams = {"bA": "A", "bB": "B", "bC": "C"}
    entries = compute_leaderboard(records, spec(), teams)
    assert [(e.rank, e.team_id) for e in entries] == [(1, "A"), (1, "C"), (3, "B")]
    oracle = leaderboard_oracle(records, spec(), teams)
    assert [e.to_dict() for e in entries] == oracle


def test_empty_when_nothing_succeeded():
    records = [record("e1", "bA", None, failed=True)]
    assert compute_leaderboard(records, spec(), {"bA": "A"}) == []


def test_single_team_best_of_three():
    records = [
        record("e1", "bA", 0.4, finished_minutes=1),
        record("e2", "bA", 0.7, finished_minutes=2),
        record("e3", "bA", 0.6, finished_minutes=3),
    ]
    entries = compute_leaderboard(records, spec(), {"bA": "A"})
    assert len(entries) == 1
    assert entries[0].best_score == 0.7
    assert entries[0].best_eval_id == "e2"
    assert entries[0].submission_count == 3


def test_team_internal_tie_goes_to_earliest():
    records = [
        record("e-late", "bA", 0.5, finished_minutes=10),
        record("e-early", "bA", 0.5, finished_minutes=5),
    ]
    entries = compute_leaderboard(records, spec(), {"bA": "A"})
    assert entries[0].best_eval_id == "e-early"


def test_minimize_direction():
    records = [
        record("e1", "bA", 2.0),
        record("e2", "bB", 1.0),
    ]
    entries = compute_leaderboard(
        records, spec(direction="minimize"), {"bA": "A", "bB": "B"}
    )
    assert [(e.rank, e.team_id) for e in entries] == [(1, "B"), (2, "A")]


def test_metric_missing_is_store_corruption():
    broken = record("e1", "bA", 0.5)
    broken.metrics = {"rmse": 1.0}
    with pytest.raises(MetricMissing):
        compute_leaderboard([broken], spec(), {"bA": "A"})


# -- randomized properties ------------------------------------------------------


def _random_case(rng: random.Random):
    n_teams = rng.randrange(1, 21)
    records = []
    team_ids = {}
    for t in range(n_teams):
        team = f"team{t}"
        for j in range(rng.randrange(0, 11)):
            bundle = f"b-{team}-{j}"
            team_ids[bundle] = team
            failed = rng.random() < 0.25
            records.append(
                record(
                    f"e-{team}-{j}",
                    bundle,
                    None if failed else round(rng.uniform(0, 1), 3),
                    finished_minutes=rng.randrange(0, 5000),
                    failed=failed,
                )
            )
    rng.shuffle(records)
    direction = rng.choice(["maximize", "minimize"])
    return records, team_ids, spec(direction=direction)


def test_oracle_equivalence_500_random_record_sets():
    rng = random.Random(2024)
    for _ in range(500):
        records, team_ids, sp = _random_case(rng)
        entries = [e.to_dict() for e in compute_leaderboard(records, sp, team_ids)]
        assert entries == leaderboard_oracle(records, sp, team_ids)


def test_rank_monotonicity_improving_best_never_worsens_rank():
    rng = random.Random(99)
    for _ in range(200):
        records, team_ids, sp = _random_case(rng)
        entries = compute_leaderboard(records, sp, team_ids)
        if not entries:
            continue
        victim = rng.choice(entries)
        bump = 0.5 if sp.direction is Direction.MAXIMIZE else -0.5
        improved = [
            record(
                "e-upgrade",
                next(b for b, t in team_ids.items() if t == victim.team_id),
                victim.best_score + bump,
                finished_minutes=9999,
            )
        ]
        after = compute_leaderboard(records + improved, sp, team_ids)
        new_rank = next(e.rank for e in after if e.team_id == victim.team_id)
        assert new_rank <= victim.rank


def test_direction_symmetry_negated_scores():
    rng = random.Random(7)
    for _ in range(200):
        records, team_ids, sp = _random_case(rng)
        flipped_records = []
        for r in records:
            clone = record(
                r.eval_id,
                r.bundle_id,
                -r.metrics["accuracy"] if r.metrics else None,
                failed=r.status is EvalStatus.FAILED,
            )
            clone.finished_at = r.finished_at
            flipped_records.append(clone)
        flipped_spec = spec(
            direction="minimize"
            if sp.direction is Direction.MAXIMIZE
            else "maximize"
        )
        original = compute_leaderboard(records, sp, team_ids)
        flipped = compute_leaderboard(flipped_records, flipped_spec, team_ids)
        assert [(e.rank, e.team_id) for e in original] == [
            (e.rank, e.team_id) for e in flipped
        ]


# -- phases ----------------------------------------------------------------------


def two_phase_spec() -> CompetitionSpec:
    return CompetitionSpec(
        competition_id="compA",
        title="t",
        primary_metric="accuracy",
        direction=Direction.MAXIMIZE,
        hidden_dataset="hidden",
        phases=[
            Phase("warmup", T0, T0 + timedelta(days=7)),
            Phase("final", T0 + timedelta(days=7), T0 + timedelta(days=14)),
        ],
    ).validate()


def test_phase_at_inside_window():
    assert phase_at(two_phase_spec(), T0 + timedelta(days=1)) == "warmup"
    assert phase_at(two_phase_spec(), T0 + timedelta(days=8)) == "final"


def test_phase_at_before_and_after():
    assert phase_at(two_phase_spec(), T0 - timedelta(seconds=1)) is None
    assert phase_at(two_phase_spec(), T0 + timedelta(days=14)) is None


def test_phase_boundary_half_open():
    sp = two_phase_spec()
    assert phase_at(sp, T0) == "warmup"  # opens_at inclusive
    assert phase_at(sp, T0 + timedelta(days=14)) is None  # closes_at exclusive
    # a shared boundary belongs to the opening phase
    assert phase_at(sp, T0 + timedelta(days=7)) == "final"


def test_spec_validation():
    with pytest.raises(SpecInvalid):
        CompetitionSpec(
            competition_id="compA",
            title="t",
            primary_metric="accuracy",
            direction=Direction.MAXIMIZE,
            hidden_dataset="h",
            phases=[Phase("p", T0, T0)],
        ).validate()
    with pytest.raises(SpecInvalid):
        CompetitionSpec(
            competition_id="compA",
            title="t",
            primary_metric="auc",
            direction=Direction.MAXIMIZE,
            hidden_dataset="h",
            phases=[Phase("p", T0, T0 + timedelta(days=1))],
        ).validate()
    with pytest.raises(SpecInvalid):
        CompetitionSpec(
            competition_id="compA",
            title="t",
            primary_metric="accuracy",
            direction=Direction.MAXIMIZE,
            hidden_dataset="h",
            daily_quota=0,
            phases=[Phase("p", T0, T0 + timedelta(days=1))],
        ).validate()
    overlapping = CompetitionSpec(
        competition_id="compA",
        title="t",
        primary_metric="accuracy",
        direction=Direction.MAXIMIZE,
        hidden_dataset="h",
        phases=[
            Phase("p1", T0, T0 + timedelta(days=10)),
            Phase("p2", T0 + timedelta(days=5), T0 + timedelta(days=15)),
        ],
    )
    with pytest.raises(SpecInvalid):
        overlapping.validate()


def test_spec_yaml_dict_round_trip():
    sp = two_phase_spec()
    again = CompetitionSpec.from_dict(sp.to_dict())
    assert again == sp
    assert parse_ts(sp.to_dict()["phases"][0]["opens_at"]) == T0
