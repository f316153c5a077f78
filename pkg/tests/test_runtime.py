"""Monitoring scope, triggers, evolution constraints, and simulation replay."""

import pytest

from ropas.domains import Boolean, IntegerRange
from ropas.errors import DefinitionError, SizeLimitError
from ropas.fixtures import (
    alert_config,
    alert_exogenous,
    alert_failure_trace,
    alert_model,
    alert_spec,
    alert_triggers,
    shock_config,
    shock_model,
    shock_trace,
)
from ropas.model import (
    Criterion,
    LookupTable,
    Model,
    Parameter,
    Specification,
    validate_model,
)
from ropas.runtime import (
    INFEASIBLE_MARKER,
    AwarenessTrigger,
    Event,
    EventTrace,
    ForbiddenTransition,
    ForbiddenValue,
    IntervalRange,
    MaxParameterChanges,
    NoFeasibleAdaptation,
    SimulationConfig,
    UnlessCondition,
    ValueSetRange,
    adaptation_candidates,
    apply_monitoring_scope,
    check_triggers,
    constraint_allows,
    relax,
    run_simulation,
    select_adaptation,
)
from ropas.solver import rop


def broken_call_problem():
    """The alert fixture after the call channel's component has failed."""
    exogenous = dict(alert_exogenous())
    exogenous["alert_call_ok"] = 0
    return rop(alert_model(), exogenous)


# ---------------------------------------------------------------------------
# Traces and monitoring scope


def test_trace_rejects_negative_and_decreasing_ticks():
    with pytest.raises(DefinitionError, match="negative tick"):
        EventTrace((Event(-1, "x", 0),))
    with pytest.raises(DefinitionError, match="chronological"):
        EventTrace((Event(3, "x", 0), Event(2, "x", 1)))


def test_trace_last_tick():
    assert EventTrace(()).last_tick() == -1
    assert EventTrace((Event(0, "a", 1), Event(7, "a", 0))).last_tick() == 7


def test_monitoring_scope_full_range_by_default():
    m = alert_model()
    assert apply_monitoring_scope(m, Event(0, "alert_call_ok", 0))
    assert apply_monitoring_scope(m, Event(0, "demand_shift", -30))


def test_monitoring_scope_restricted_range():
    m = shock_model()
    assert apply_monitoring_scope(m, Event(0, "shock", 0))
    assert not apply_monitoring_scope(m, Event(0, "shock", 1))


def test_monitoring_scope_unknown_variable_or_value():
    m = alert_model()
    assert not apply_monitoring_scope(m, Event(0, "nothing", 1))
    assert not apply_monitoring_scope(m, Event(0, "demand_shift", 99))


# ---------------------------------------------------------------------------
# Tolerable ranges and triggers


def test_interval_range_edges_are_inclusive():
    r = IntervalRange(45.0, 70.0)
    assert r.contains(45.0) and r.contains(70) and r.contains(50)
    assert not r.contains(44.999) and not r.contains(70.001)
    assert not r.contains("label")


def test_interval_range_unbounded_sides():
    assert IntervalRange(lo=10.0).contains(1e9)
    assert not IntervalRange(lo=10.0).contains(9.0)
    assert IntervalRange(hi=10.0).contains(-1e9)
    assert IntervalRange().contains(0)


def test_value_set_range():
    r = ValueSetRange(("green", "yellow"))
    assert r.contains("green")
    assert not r.contains("red")


def test_check_triggers_reports_sorted_ids():
    m = alert_model()
    exogenous = dict(alert_exogenous())
    exogenous["demand_shift"] = -30
    from ropas.model import evaluate

    instance = evaluate(m, alert_spec("email", "cloud"), exogenous)
    fired = check_triggers(instance, alert_triggers())
    assert fired == ("capacity", "coverage")


def test_check_triggers_unknown_criterion():
    from ropas.model import evaluate

    instance = evaluate(alert_model(), alert_spec("call", "local"), alert_exogenous())
    with pytest.raises(DefinitionError, match="unknown criterion"):
        check_triggers(instance, (AwarenessTrigger("ghost", IntervalRange(0.0, 1.0)),))


# ---------------------------------------------------------------------------
# Relaxation


def test_relax_widens_finite_edges_only():
    triggers = (
        AwarenessTrigger("capacity", IntervalRange(70.0, 200.0)),
        AwarenessTrigger("coverage", IntervalRange(lo=45.0)),
    )
    widened = relax(triggers, {"capacity": 10.0, "coverage": 5.0}, alert_model())
    assert widened[0].tolerable == IntervalRange(60.0, 210.0)
    assert widened[1].tolerable == IntervalRange(lo=40.0)


def test_relax_zero_band_is_identity():
    triggers = alert_triggers()
    assert relax(triggers, {}, alert_model()) == tuple(triggers)
    assert relax(triggers, {"capacity": 0.0}, alert_model()) == tuple(triggers)


def test_relax_rejects_unknown_criteria():
    with pytest.raises(DefinitionError, match="untriggered criteria"):
        relax(alert_triggers(), {"ghost": 1.0}, alert_model())


def test_relax_rejects_negative_band():
    with pytest.raises(DefinitionError, match="negative widening"):
        relax(alert_triggers(), {"capacity": -1.0}, alert_model())


def test_relax_rejects_value_set_ranges():
    triggers = (AwarenessTrigger("capacity", ValueSetRange((80, 85))),)
    with pytest.raises(DefinitionError, match="value-set"):
        relax(triggers, {"capacity": 1.0}, alert_model())


def test_relax_must_stay_inside_domain_bounds():
    triggers = (AwarenessTrigger("coverage", IntervalRange(45.0, None)),)
    with pytest.raises(DefinitionError, match="below its domain minimum"):
        relax(triggers, {"coverage": 100.0}, alert_model())
    triggers = (AwarenessTrigger("coverage", IntervalRange(None, 240.0)),)
    with pytest.raises(DefinitionError, match="above its domain maximum"):
        relax(triggers, {"coverage": 20.0}, alert_model())


# ---------------------------------------------------------------------------
# Evolution constraints


def test_forbidden_transition_matches_patterns():
    c = ForbiddenTransition(
        from_values=(("alert_call", 1),), to_values=(("alert_radio", 1),)
    )
    call = alert_spec("call", "local")
    radio = alert_spec("radio", "local")
    push = alert_spec("push", "local")
    assert not constraint_allows(c, call, radio, {})
    assert constraint_allows(c, call, push, {})
    assert constraint_allows(c, push, radio, {})
    assert constraint_allows(c, None, radio, {})


def test_max_parameter_changes():
    c = MaxParameterChanges(1)
    call = alert_spec("call", "local")
    assert constraint_allows(c, call, call, {})
    assert not constraint_allows(c, call, alert_spec("radio", "local"), {})
    assert constraint_allows(MaxParameterChanges(2), call, alert_spec("radio", "local"), {})
    assert constraint_allows(c, None, alert_spec("radio", "local"), {})


def test_forbidden_value_with_unless_condition():
    unless = UnlessCondition(
        tests=(("alert_sms_ok", 0), ("alert_email_ok", 0)), comparator=">=", bound=1
    )
    c = ForbiddenValue("alert_radio", 1, unless)
    radio = alert_spec("radio", "local")
    push = alert_spec("push", "local")
    assert constraint_allows(c, None, push, {})
    assert not constraint_allows(c, None, radio, {"alert_sms_ok": 1, "alert_email_ok": 1})
    assert constraint_allows(c, None, radio, {"alert_sms_ok": 0, "alert_email_ok": 1})
    hard = ForbiddenValue("alert_radio", 1)
    assert not constraint_allows(hard, None, radio, {"alert_sms_ok": 0})


def test_unless_condition_comparators():
    tests = (("a", 1), ("b", 1))
    assert UnlessCondition(tests, "==", 1).holds({"a": 1, "b": 0})
    assert not UnlessCondition(tests, "==", 1).holds({"a": 1, "b": 1})
    assert UnlessCondition(tests, "<=", 1).holds({"a": 0, "b": 1})
    assert UnlessCondition(tests, ">=", 2).holds({"a": 1, "b": 1})


# ---------------------------------------------------------------------------
# Adaptation target selection


def test_candidates_prefer_trigger_calming_targets():
    problem = broken_call_problem()
    pool = adaptation_candidates(
        problem, alert_spec("call", "local"), triggers=alert_triggers()
    )
    named = [(s["alert_radio"], s["alert_push"], s["store_local"]) for s in pool]
    assert len(pool) == 2
    assert named == [(1, 0, 1), (0, 1, 1)]


def test_candidates_fall_back_when_nothing_calms():
    exogenous = dict(alert_exogenous())
    exogenous["demand_shift"] = -30
    problem = rop(alert_model(), exogenous)
    pool = adaptation_candidates(
        problem, alert_spec("radio", "local"), triggers=alert_triggers()
    )
    assert len(pool) == 20


def test_select_adaptation_picks_best_calming_target():
    problem = broken_call_problem()
    chosen = select_adaptation(
        alert_spec("call", "local"), problem, triggers=alert_triggers()
    )
    assert isinstance(chosen, Specification)
    assert chosen == alert_spec("radio", "local")


def test_select_adaptation_respects_change_budget():
    problem = broken_call_problem()
    chosen = select_adaptation(
        alert_spec("call", "local"),
        problem,
        constraints=(MaxParameterChanges(1),),
        triggers=alert_triggers(),
    )
    assert isinstance(chosen, NoFeasibleAdaptation)
    assert chosen.reason


def test_select_adaptation_respects_forbidden_values_and_transitions():
    problem = broken_call_problem()
    current = alert_spec("call", "local")
    chosen = select_adaptation(
        current, problem, constraints=(ForbiddenValue("alert_radio", 1),),
        triggers=alert_triggers(),
    )
    assert chosen == alert_spec("push", "local")
    chosen = select_adaptation(
        current,
        problem,
        constraints=(
            ForbiddenTransition((("alert_call", 1),), (("alert_radio", 1),)),
        ),
        triggers=alert_triggers(),
    )
    assert chosen == alert_spec("push", "local")


def test_select_adaptation_breaks_ties_by_fewest_changes():
    entries = (((0, 0), 0), ((0, 1), 5), ((1, 0), 5), ((1, 1), 0))
    m = Model(
        criteria=(
            Criterion("score", IntegerRange(0, 5), "utility", "higher-better"),
        ),
        parameters=(Parameter("x", Boolean()), Parameter("y", Boolean())),
        depends=(LookupTable("score_def", "score", ("x", "y"), entries),),
        decision_rule="score",
        decision_set=("x", "y"),
    )
    assert validate_model(m) == []
    problem = rop(m)
    keep_10 = select_adaptation(Specification.from_mapping({"x": 1, "y": 0}), problem)
    assert keep_10.as_dict() == {"x": 1, "y": 0}
    keep_01 = select_adaptation(Specification.from_mapping({"x": 0, "y": 1}), problem)
    assert keep_01.as_dict() == {"x": 0, "y": 1}
    fresh = select_adaptation(None, problem)
    assert fresh.as_dict() == {"x": 0, "y": 1}


# ---------------------------------------------------------------------------
# Simulation replay


def test_component_failure_switches_inline_with_duration_zero():
    timeline, metrics = run_simulation(
        alert_model(), alert_failure_trace(), alert_config()
    )
    assert timeline.status == "completed"
    assert len(timeline.periods) == 2
    first, second = timeline.periods
    assert (first.kind, first.start, first.end) == ("stability", 0, 2)
    assert first.spec == alert_spec("call", "local")
    assert (second.kind, second.start, second.end) == ("stability", 2, 6)
    assert second.spec == alert_spec("radio", "local")
    assert second.fired == (INFEASIBLE_MARKER,)
    assert metrics.optimal_time_fraction == 1.0
    assert metrics.trigger_count == 0
    assert metrics.adaptation_tick_total == 0
    assert metrics.ignored_event_count == 0


def test_component_failure_with_adaptation_period():
    timeline, metrics = run_simulation(
        alert_model(), alert_failure_trace(), alert_config(adaptation_duration=2)
    )
    assert [p.kind for p in timeline.periods] == ["stability", "adaptation", "stability"]
    stable, adapting, recovered = timeline.periods
    assert (adapting.start, adapting.end) == (2, 4)
    assert adapting.spec == alert_spec("call", "local")
    assert adapting.fired == (INFEASIBLE_MARKER,)
    assert (recovered.start, recovered.end) == (4, 6)
    assert recovered.spec == alert_spec("radio", "local")
    assert recovered.fired == (INFEASIBLE_MARKER,)
    assert metrics.adaptation_tick_total == 2
    assert metrics.optimal_time_fraction == 1.0


def test_trigger_firing_counts_and_environment_suppression():
    config = SimulationConfig(
        adaptation_duration=0,
        triggers=alert_triggers(),
        initial_exogenous=tuple(sorted(alert_exogenous().items())),
        horizon=5,
    )
    trace = EventTrace((Event(1, "demand_shift", -30), Event(3, "demand_shift", -29)))
    timeline, metrics = run_simulation(alert_model(), trace, config)
    assert timeline.status == "completed"
    assert len(timeline.periods) == 1
    period = timeline.periods[0]
    assert period.spec == alert_spec("radio", "local")
    assert period.fired == ("coverage", "coverage")
    assert metrics.trigger_count == 2
    assert metrics.optimal_time_fraction == 1.0


def test_trigger_switch_opens_a_new_period():
    config = SimulationConfig(
        adaptation_duration=0,
        triggers=alert_triggers(),
        initial_exogenous=tuple(sorted(alert_exogenous().items())),
        initial_spec=alert_spec("call", "local"),
        horizon=4,
    )
    trace = EventTrace((Event(2, "demand_shift", -20),))
    timeline, metrics = run_simulation(alert_model(), trace, config)
    assert [p.kind for p in timeline.periods] == ["stability", "stability"]
    before, after = timeline.periods
    assert before.spec == alert_spec("call", "local")
    assert after.spec == alert_spec("radio", "local")
    assert after.start == 2
    assert after.fired == ("coverage",)
    assert metrics.trigger_count == 1


def test_relaxation_prevents_the_firing():
    config = SimulationConfig(
        adaptation_duration=0,
        triggers=alert_triggers(),
        relaxation=(("coverage", 20.0),),
        initial_exogenous=tuple(sorted(alert_exogenous().items())),
        initial_spec=alert_spec("call", "local"),
        horizon=4,
    )
    trace = EventTrace((Event(2, "demand_shift", -10),))
    timeline, metrics = run_simulation(alert_model(), trace, config)
    assert len(timeline.periods) == 1
    assert timeline.periods[0].spec == alert_spec("call", "local")
    assert metrics.trigger_count == 0


def test_halt_when_no_adaptation_target_survives():
    config = alert_config()
    config = SimulationConfig(
        adaptation_duration=0,
        triggers=config.triggers,
        constraints=(MaxParameterChanges(1),),
        initial_exogenous=config.initial_exogenous,
        initial_spec=config.initial_spec,
        horizon=config.horizon,
    )
    timeline, metrics = run_simulation(alert_model(), alert_failure_trace(), config)
    assert timeline.status == "no-feasible-adaptation"
    assert len(timeline.periods) == 1
    assert timeline.periods[0].end == 2
    assert INFEASIBLE_MARKER in timeline.periods[0].fired
    assert metrics.optimal_time_fraction == 1.0


def test_halt_at_the_end_of_an_adaptation_period():
    base = alert_config(adaptation_duration=2)
    config = SimulationConfig(
        adaptation_duration=2,
        triggers=base.triggers,
        constraints=(MaxParameterChanges(1),),
        initial_exogenous=base.initial_exogenous,
        initial_spec=base.initial_spec,
        horizon=base.horizon,
    )
    timeline, metrics = run_simulation(alert_model(), alert_failure_trace(), config)
    assert timeline.status == "no-feasible-adaptation"
    assert [p.kind for p in timeline.periods] == ["stability", "adaptation"]
    assert (timeline.periods[1].start, timeline.periods[1].end) == (2, 4)
    assert metrics.adaptation_tick_total == 2


def test_undetectable_events_are_ignored_but_scored():
    timeline, metrics = run_simulation(shock_model(), shock_trace(), shock_config())
    assert timeline.status == "completed"
    assert len(timeline.periods) == 1
    period = timeline.periods[0]
    assert period.spec.as_dict() == {"mode_a": 0, "mode_b": 1}
    assert [e.variable for e in period.ignored] == ["power_grid", "shock"]
    assert period.optimal == (True, True, False, False)
    assert metrics.ignored_event_count == 2
    assert metrics.optimal_time_fraction == 0.5
    assert metrics.trigger_count == 0


def test_default_horizon_is_one_past_the_last_event():
    config = SimulationConfig(
        initial_exogenous=tuple(sorted(alert_exogenous().items())),
        initial_spec=alert_spec("call", "local"),
    )
    trace = EventTrace((Event(2, "demand_shift", 5),))
    timeline, _ = run_simulation(alert_model(), trace, config)
    assert timeline.periods[-1].end == 3
    timeline, _ = run_simulation(alert_model(), EventTrace(()), config)
    assert timeline.periods[-1].end == 1


def test_event_binding_errors():
    config = alert_config()
    with pytest.raises(DefinitionError, match="neither monitored"):
        run_simulation(alert_model(), EventTrace((Event(0, "ghost", 1),)), config)
    with pytest.raises(DefinitionError, match="is not monitored"):
        run_simulation(alert_model(), EventTrace((Event(0, "alert_sms", 1),)), config)
    with pytest.raises(DefinitionError, match="outside the domain"):
        run_simulation(
            alert_model(), EventTrace((Event(0, "demand_shift", 99),)), config
        )


def test_simulation_requires_initial_monitored_values():
    config = SimulationConfig(initial_spec=alert_spec("call", "local"))
    with pytest.raises(DefinitionError, match="no initial value"):
        run_simulation(alert_model(), EventTrace(()), config)


def test_simulation_rejects_bad_configs():
    config = SimulationConfig(
        adaptation_duration=-1,
        initial_exogenous=tuple(sorted(alert_exogenous().items())),
    )
    with pytest.raises(DefinitionError, match="nonnegative"):
        run_simulation(alert_model(), EventTrace(()), config)
    partial = Specification.from_mapping({"alert_sms": 1})
    config = SimulationConfig(
        initial_exogenous=tuple(sorted(alert_exogenous().items())),
        initial_spec=partial,
    )
    with pytest.raises(DefinitionError, match="misses parameter"):
        run_simulation(alert_model(), EventTrace(()), config)


def test_simulation_rejects_invalid_models():
    bad = Model(
        criteria=(Criterion("score", Boolean(), "utility"),),
        parameters=(Parameter("x", Boolean()),),
        decision_rule="score",
        decision_set=("x",),
    )
    with pytest.raises(DefinitionError, match="invalid model"):
        run_simulation(bad, EventTrace(()), SimulationConfig())


def test_simulation_cap_limits_the_solver():
    config = alert_config()
    config = SimulationConfig(
        adaptation_duration=0,
        triggers=config.triggers,
        initial_exogenous=config.initial_exogenous,
        horizon=2,
        cap=100,
    )
    with pytest.raises(SizeLimitError):
        run_simulation(alert_model(), EventTrace(()), config)
