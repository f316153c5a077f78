"""Keep the shipped fixture files in sync with the in-code fixture builders.

If a builder changes, re-generate the file; if a file is edited by hand,
change the builder.  Either way these tests fail until the two agree byte
for byte.
"""

from pathlib import Path

from ropas.fixtures import (
    alert_config,
    alert_failure_trace,
    alert_model,
    dispatch_goals,
    respond_decision_model,
    shock_config,
    shock_model,
    shock_trace,
)
from ropas.formats import ModelBundle, serialize_model, serialize_trace

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def read(name: str) -> str:
    return (FIXTURES / name).read_text(encoding="utf-8")


def test_alerts_model_file_matches_builder():
    bundle = ModelBundle(model=alert_model(), config=alert_config())
    assert read("alerts.model") == serialize_model(bundle)


def test_alerts_failure_trace_matches_builder():
    assert read("alerts_failure.trace") == serialize_trace(alert_failure_trace())


def test_dispatch_model_file_matches_builder():
    bundle = ModelBundle(goals=dispatch_goals())
    assert read("dispatch.model") == serialize_model(bundle)


def test_respond_model_file_matches_builder():
    bundle = ModelBundle(decision=respond_decision_model())
    assert read("respond.model") == serialize_model(bundle)


def test_shock_model_file_matches_builder():
    bundle = ModelBundle(model=shock_model(), config=shock_config())
    assert read("shock.model") == serialize_model(bundle)


def test_shock_trace_matches_builder():
    assert read("shock.trace") == serialize_trace(shock_trace())
