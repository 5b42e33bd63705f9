"""Static-analysis gate that must pass before a model can be served."""

from forge.gate.rules import (
    GateRule,
    Severity,
    default_ruleset,
    load_ruleset,
    ruleset_digest,
)
from forge.gate.engine import Finding, GateReport, scan, scan_bundle

__all__ = [
    "Finding",
    "GateReport",
    "GateRule",
    "Severity",
    "default_ruleset",
    "load_ruleset",
    "ruleset_digest",
    "scan",
    "scan_bundle",
]
