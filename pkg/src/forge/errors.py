"""Error hierarchy with stable machine codes.

Every user-facing failure carries a ``code`` (stable, machine-readable) and
an ``http_status`` used by the HTTP layer. Module code raises these directly;
the API layer renders them as ``{"error": {"code": ..., "message": ...}}``.
"""

from __future__ import annotations


class ForgeError(Exception):
    code = "INTERNAL"
    http_status = 500

    def __init__(self, message: str = ""):
        super().__init__(message or self.code)
        self.message = message or self.code

    def to_dict(self) -> dict:
        return {"code": self.code, "message": self.message}


# -- auth ------------------------------------------------------------------

class Unauthenticated(ForgeError):
    code = "UNAUTHENTICATED"
    http_status = 401


class Forbidden(ForgeError):
    code = "FORBIDDEN"
    http_status = 403


# -- unknown ids -----------------------------------------------------------

class UnknownCompetition(ForgeError):
    code = "UNKNOWN_COMPETITION"
    http_status = 404


class UnknownDataset(ForgeError):
    code = "UNKNOWN_DATASET"
    http_status = 404


class UnknownBundle(ForgeError):
    code = "UNKNOWN_BUNDLE"
    http_status = 404


class UnknownSubmission(ForgeError):
    code = "UNKNOWN_SUBMISSION"
    http_status = 404


class UnknownVersion(ForgeError):
    code = "UNKNOWN_VERSION"
    http_status = 404


class UnknownDigest(ForgeError):
    code = "UNKNOWN_DIGEST"
    http_status = 404


class UnknownService(ForgeError):
    code = "UNKNOWN_SERVICE"
    http_status = 404


class UnknownPipeline(ForgeError):
    code = "UNKNOWN_PIPELINE"
    http_status = 404


# -- duplicates / state conflicts -------------------------------------------

class DuplicateId(ForgeError):
    code = "DUPLICATE_ID"
    http_status = 409


class DuplicateEvaluation(ForgeError):
    code = "DUPLICATE_EVALUATION"
    http_status = 409


class PhaseClosed(ForgeError):
    code = "PHASE_CLOSED"
    http_status = 409


class IllegalTransition(ForgeError):
    code = "ILLEGAL_TRANSITION"
    http_status = 409

    def __init__(self, from_stage: str, to_stage: str):
        super().__init__(f"illegal stage transition {from_stage} -> {to_stage}")
        self.from_stage = from_stage
        self.to_stage = to_stage


class GateNotPassed(ForgeError):
    code = "GATE_NOT_PASSED"
    http_status = 409


class NoSucceededEvaluation(ForgeError):
    code = "NO_SUCCEEDED_EVALUATION"
    http_status = 409


class NotInServingStage(ForgeError):
    code = "NOT_IN_SERVING_STAGE"
    http_status = 409


class StageNotServing(ForgeError):
    code = "STAGE_NOT_SERVING"
    http_status = 409

    def __init__(self, index: int, message: str = ""):
        super().__init__(message or f"pipeline stage {index} is not serving")
        self.index = index


# -- invalid input -----------------------------------------------------------

class SpecInvalid(ForgeError):
    code = "SPEC_INVALID"
    http_status = 422


class DatasetInvalid(ForgeError):
    code = "DATASET_INVALID"
    http_status = 422


class QuotaExhausted(ForgeError):
    code = "QUOTA_EXHAUSTED"
    http_status = 429


# -- bundle / manifest -------------------------------------------------------

class BundleError(ForgeError):
    """Base for submission bundle rejections."""
    code = "BUNDLE_INVALID"
    http_status = 422


class NotAnArchive(BundleError):
    code = "NOT_AN_ARCHIVE"


class ManifestMissing(BundleError):
    code = "MANIFEST_MISSING"


class MalformedManifest(BundleError):
    code = "MALFORMED_MANIFEST"


class UnsupportedSchemaVersion(BundleError):
    code = "UNSUPPORTED_SCHEMA_VERSION"


class MissingEntrypoint(BundleError):
    code = "MISSING_ENTRYPOINT"

    def __init__(self, entrypoint: str = "predict"):
        super().__init__(f"manifest entrypoint {entrypoint!r} is required")
        self.entrypoint = entrypoint


class PathEscape(BundleError):
    code = "PATH_ESCAPE"

    def __init__(self, path: str):
        super().__init__(f"path escapes the bundle root: {path!r}")
        self.path = path


class ManifestInvalid(BundleError):
    code = "MANIFEST_INVALID"

    def __init__(self, inner: "ForgeError | str"):
        if isinstance(inner, ForgeError):
            super().__init__(f"invalid manifest: {inner.message}")
            self.inner: ForgeError | None = inner
        else:
            super().__init__(f"invalid manifest: {inner}")
            self.inner = None


class WrongCompetition(BundleError):
    code = "WRONG_COMPETITION"


class FileCountExceeded(BundleError):
    code = "FILE_COUNT_EXCEEDED"


class BundleTooLarge(BundleError):
    code = "BUNDLE_TOO_LARGE"


# -- gate ---------------------------------------------------------------------

class RulesetInvalid(ForgeError):
    code = "RULESET_INVALID"
    http_status = 422

    def __init__(self, rule_id: str, reason: str):
        super().__init__(f"rule {rule_id}: {reason}")
        self.rule_id = rule_id
        self.reason = reason


class RulesetFileMissing(ForgeError):
    code = "RULESET_FILE_MISSING"
    http_status = 500


# -- metrics ------------------------------------------------------------------

class IdSetMismatch(ForgeError):
    code = "ID_SET_MISMATCH"
    http_status = 422


class NonNumeric(ForgeError):
    code = "NON_NUMERIC"
    http_status = 422


class UnknownMetric(ForgeError):
    code = "UNKNOWN_METRIC"
    http_status = 422


class MetricMissing(ForgeError):
    code = "METRIC_MISSING"
    http_status = 500

    def __init__(self, eval_id: str):
        super().__init__(f"succeeded evaluation {eval_id} lacks the primary metric")
        self.eval_id = eval_id


class NonFiniteMetric(ForgeError):
    code = "NON_FINITE_METRIC"
    http_status = 422


# -- serving ------------------------------------------------------------------

class StartupFailed(ForgeError):
    code = "STARTUP_FAILED"
    http_status = 502


class PortExhausted(ForgeError):
    code = "PORT_EXHAUSTED"
    http_status = 503


class ServiceUnhealthy(ForgeError):
    code = "SERVICE_UNHEALTHY"
    http_status = 503


class InvokeTimeout(ForgeError):
    code = "TIMEOUT"
    http_status = 504


class ProtocolViolation(ForgeError):
    code = "PROTOCOL_VIOLATION"
    http_status = 502


class SchemaInvalid(ForgeError):
    code = "SCHEMA_INVALID"
    http_status = 422


class EmptyPipeline(ForgeError):
    code = "EMPTY_PIPELINE"
    http_status = 422
