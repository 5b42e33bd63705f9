"""Rankings, phases and quotas for a competition.

The leaderboard is recomputed on read from terminal evaluation records; no
ranking state is materialized. Ranking is competition style ("1224"): tied
best scores share a rank and the next distinct score skips by the size of
the tied group.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from datetime import datetime
from enum import Enum
from typing import Mapping

from forge.clock import fmt_ts, parse_ts
from forge.errors import MetricMissing, SpecInvalid, UnknownCompetition
from forge.evaluation.metrics import SUPPORTED_METRICS
from forge.evaluation.types import EvalStatus, EvaluationRecord

_ID = re.compile(r"^[A-Za-z0-9][A-Za-z0-9_.-]*$")


class Direction(str, Enum):
    MAXIMIZE = "maximize"
    MINIMIZE = "minimize"


@dataclass
class Phase:
    phase_id: str
    opens_at: datetime
    closes_at: datetime


@dataclass
class CompetitionSpec:
    competition_id: str
    title: str
    primary_metric: str
    direction: Direction
    hidden_dataset: str
    description: str = ""
    secondary_metrics: list[str] = field(default_factory=list)
    phases: list[Phase] = field(default_factory=list)
    daily_quota: int = 5
    public_dataset: str | None = None
    reward_text: str = ""

    def validate(self) -> "CompetitionSpec":
        if not _ID.match(self.competition_id or ""):
            raise SpecInvalid(f"invalid competition_id {self.competition_id!r}")
        if self.primary_metric not in SUPPORTED_METRICS:
            raise SpecInvalid(f"unsupported primary_metric {self.primary_metric!r}")
        for m in self.secondary_metrics:
            if m not in SUPPORTED_METRICS:
                raise SpecInvalid(f"unsupported secondary metric {m!r}")
        if self.daily_quota < 1:
            raise SpecInvalid("daily_quota must be >= 1")
        if not self.phases:
            raise SpecInvalid("at least one phase is required")
        for phase in self.phases:
            if phase.opens_at >= phase.closes_at:
                raise SpecInvalid(
                    f"phase {phase.phase_id!r}: opens_at must precede closes_at"
                )
        for a, b in zip(self.phases, self.phases[1:]):
            if a.closes_at > b.opens_at:
                raise SpecInvalid("phases must be ordered and non-overlapping")
        return self

    @classmethod
    def from_dict(cls, raw: dict) -> "CompetitionSpec":
        try:
            phases = [
                Phase(
                    phase_id=p["phase_id"],
                    opens_at=parse_ts(p["opens_at"]),
                    closes_at=parse_ts(p["closes_at"]),
                )
                for p in raw.get("phases", [])
            ]
            direction = Direction(raw.get("direction", ""))
        except (KeyError, TypeError, ValueError) as exc:
            raise SpecInvalid(f"malformed competition spec: {exc}") from exc
        spec = cls(
            competition_id=raw.get("competition_id", ""),
            title=raw.get("title", ""),
            description=raw.get("description", ""),
            primary_metric=raw.get("primary_metric", ""),
            direction=direction,
            secondary_metrics=list(raw.get("secondary_metrics", [])),
            phases=phases,
            daily_quota=raw.get("daily_quota", 5),
            hidden_dataset=raw.get("hidden_dataset", ""),
            public_dataset=raw.get("public_dataset"),
            reward_text=raw.get("reward_text", ""),
        )
        return spec.validate()

    def to_dict(self) -> dict:
        return {
            "competition_id": self.competition_id,
            "title": self.title,
            "description": self.description,
            "primary_metric": self.primary_metric,
            "direction": self.direction.value,
            "secondary_metrics": self.secondary_metrics,
            "phases": [
                {
                    "phase_id": p.phase_id,
                    "opens_at": fmt_ts(p.opens_at),
                    "closes_at": fmt_ts(p.closes_at),
                }
                for p in self.phases
            ],
            "daily_quota": self.daily_quota,
            "hidden_dataset": self.hidden_dataset,
            "public_dataset": self.public_dataset,
            "reward_text": self.reward_text,
        }


@dataclass
class LeaderboardEntry:
    rank: int
    team_id: str
    best_score: float
    best_eval_id: str
    submission_count: int
    best_at: str

    def to_dict(self) -> dict:
        return {
            "rank": self.rank,
            "team_id": self.team_id,
            "best_score": self.best_score,
            "best_eval_id": self.best_eval_id,
            "submission_count": self.submission_count,
            "best_at": self.best_at,
        }


def compute_leaderboard(
    records: list[EvaluationRecord],
    spec: CompetitionSpec,
    team_ids: Mapping[str, str],
) -> list[LeaderboardEntry]:
    """Rank teams by their best primary-metric score.

    ``team_ids`` maps bundle_id to team_id (evaluation records do not carry
    team attribution themselves). Only succeeded records score; a team's
    best is max or min per the spec's direction, ties within a team resolved
    to the earliest finish. Cross-team display order is rank, then best_at,
    then team_id.
    """
    metric = spec.primary_metric
    best: dict[str, EvaluationRecord] = {}
    counts: dict[str, int] = {}
    maximize = spec.direction is Direction.MAXIMIZE

    for record in records:
        team = team_ids[record.bundle_id]
        counts[team] = counts.get(team, 0) + 1
        if record.status is not EvalStatus.SUCCEEDED:
            continue
        if metric not in record.metrics:
            raise MetricMissing(record.eval_id)
        current = best.get(team)
        if current is None:
            best[team] = record
            continue
        new, old = record.metrics[metric], current.metrics[metric]
        better = new > old if maximize else new < old
        tie_earlier = new == old and parse_ts(record.finished_at) < parse_ts(
            current.finished_at
        )
        if better or tie_earlier:
            best[team] = record

    scored = [
        (record.metrics[metric], team, record) for team, record in best.items()
    ]
    scored.sort(
        key=lambda item: (
            -item[0] if maximize else item[0],
            parse_ts(item[2].finished_at),
            item[1],
        )
    )

    entries: list[LeaderboardEntry] = []
    for position, (score_value, team, record) in enumerate(scored, start=1):
        if entries and score_value == scored[position - 2][0]:
            rank = entries[-1].rank
        else:
            rank = position
        entries.append(
            LeaderboardEntry(
                rank=rank,
                team_id=team,
                best_score=score_value,
                best_eval_id=record.eval_id,
                submission_count=counts[team],
                best_at=record.finished_at,
            )
        )
    return entries


def phase_at(spec: CompetitionSpec, now: datetime) -> str | None:
    """The phase whose [opens_at, closes_at) window contains ``now``."""
    for phase in spec.phases:
        if phase.opens_at <= now < phase.closes_at:
            return phase.phase_id
    return None


def submissions_remaining(
    store, team_id: str, competition_id: str, now: datetime
) -> int:
    """Quota left for the UTC calendar day containing ``now``, floored at 0."""
    raw = store.get_competition(competition_id)
    if raw is None:
        raise UnknownCompetition(competition_id)
    spec = CompetitionSpec.from_dict(raw)
    used = store.count_submissions_on_day(competition_id, team_id, now)
    return max(0, spec.daily_quota - used)
