"""Seeded random generators shared across the test suite.

Every generator takes a ``random.Random`` so test runs are reproducible.
The optimization-problem generator keeps all computed values on the integer
lattice (integer domains, integer weights) so that weighted-sum outputs
always land inside an integer-range criterion domain.
"""

from __future__ import annotations

import random
from itertools import product
from math import ceil, floor

from ropas.decisions import (
    Alternative,
    DecisionModel,
    IdentityTransform,
    Lottery,
    PowerTransform,
    TableTransform,
)
from ropas.domains import Boolean, Domain, Enumerated, IntegerRange, domain_bounds
from ropas.goals import GoalGraph, goal_graph
from ropas.model import (
    BooleanFormula,
    CardinalityConstraint,
    Criterion,
    Incompatibility,
    LinearConstraint,
    LookupTable,
    Model,
    MonitoredVariable,
    Parameter,
    ThresholdStep,
    WeightedSum,
    and_,
    not_,
    or_,
    validate_model,
    var,
)
from ropas.runtime import AwarenessTrigger, Event, EventTrace, IntervalRange, SimulationConfig
from ropas.solver import Rop, rop


# ---------------------------------------------------------------------------
# Goal graphs


def random_goal_graph(rng: random.Random, max_s: int = 10) -> GoalGraph:
    """A partitioned, refinement-acyclic goal graph."""
    n_s = rng.randint(1, max_s)
    s_atoms = [f"s{i}" for i in range(n_s)]
    r_atoms = [f"r{i}" for i in range(rng.randint(1, 3))]
    k_atoms = [f"k{i}" for i in range(rng.randint(0, 2))]
    atoms = r_atoms + k_atoms + s_atoms
    refinements: list[tuple[str, tuple[str, ...]]] = []
    for r in r_atoms:
        for _ in range(rng.randint(1, 3)):
            pool = s_atoms + k_atoms
            size = rng.randint(1, min(3, len(pool)))
            refinements.append((r, tuple(rng.sample(pool, size))))
    # Selectable atoms may be derivable from strictly earlier ones, which
    # keeps the refinement graph acyclic by construction.
    for j in range(1, n_s):
        if rng.random() < 0.25:
            pool = s_atoms[:j] + k_atoms
            size = rng.randint(1, min(2, len(pool)))
            refinements.append((s_atoms[j], tuple(rng.sample(pool, size))))
    conflicts: list[tuple[str, str]] = []
    if len(atoms) >= 2:
        for _ in range(rng.randint(0, 2)):
            a, b = rng.sample(atoms, 2)
            conflicts.append((a, b))
    mandatory = [r for r in r_atoms if rng.random() < 0.6]
    return goal_graph(atoms, refinements, conflicts, r_atoms, k_atoms, s_atoms, mandatory)


# ---------------------------------------------------------------------------
# Decision models


def dyadic_probabilities(rng: random.Random, count: int) -> list[float]:
    """Probabilities with denominator 64, so they sum to exactly 1.0."""
    if count == 1:
        return [1.0]
    cuts = sorted(rng.sample(range(1, 64), count - 1))
    weights = [b - a for a, b in zip([0] + cuts, cuts + [64])]
    return [w / 64 for w in weights]


def random_table_transform(rng: random.Random) -> TableTransform:
    mids = rng.randint(0, 3)
    ps = sorted(rng.sample([i / 16 for i in range(1, 16)], mids))
    fs = sorted(round(rng.random(), 3) for _ in range(mids))
    points = [(0.0, 0.0)] + list(zip(ps, fs)) + [(1.0, 1.0)]
    return TableTransform(tuple(points))


def random_decision_model(rng: random.Random) -> DecisionModel:
    n_alt = rng.randint(2, 6)
    n_attr = rng.randint(1, 4)
    attributes = []
    for i in range(n_attr):
        pick = rng.random()
        if pick < 0.3:
            domain: Domain = Boolean()
        elif pick < 0.6:
            lo = rng.randint(-5, 5)
            domain = IntegerRange(lo, lo + rng.randint(1, 4))
        else:
            count = rng.randint(2, 5)
            values = sorted(rng.sample([x / 4 for x in range(-40, 81)], count))
            domain = Enumerated(tuple(values))
        attributes.append(Criterion(f"a{i}", domain))
    alternatives = []
    for j in range(n_alt):
        lots = []
        for attr in attributes:
            values = list(attr.domain.values())
            n_out = rng.randint(1, min(5, len(values)))
            outcomes = rng.sample(values, n_out)
            probs = dyadic_probabilities(rng, n_out)
            lots.append((attr.id, Lottery(tuple(zip(outcomes, probs)))))
        alternatives.append(Alternative(f"alt{j}", tuple(lots)))
    attr_ids = tuple(a.id for a in attributes)
    sizes = 1
    for a in attributes:
        sizes *= a.domain.size
    if rng.random() < 0.4 and sizes <= 200:
        entries = tuple(
            (key, round(rng.uniform(-50.0, 50.0), 3))
            for key in product(*(a.domain.values() for a in attributes))
        )
        utility = LookupTable("utility", "utility", attr_ids, entries)
    else:
        weights = tuple(float(rng.randint(-5, 5)) for _ in attributes)
        utility = WeightedSum(
            "utility", "utility", attr_ids, weights, float(rng.randint(-3, 3))
        )
    pick = rng.random()
    if pick < 0.5:
        transform = IdentityTransform()
    elif pick < 0.8:
        transform = PowerTransform(rng.choice([0.5, 1.0, 2.0, 3.0]))
    else:
        transform = random_table_transform(rng)
    return DecisionModel(tuple(alternatives), attributes=tuple(attributes), utility=utility, transform=transform)


# ---------------------------------------------------------------------------
# Optimization problems


def _small_domain(rng: random.Random) -> Domain:
    pick = rng.random()
    if pick < 0.4:
        return Boolean()
    if pick < 0.75:
        lo = rng.randint(-3, 3)
        return IntegerRange(lo, lo + rng.randint(1, 4))
    count = rng.randint(2, 4)
    return Enumerated(tuple(sorted(rng.sample(range(-6, 7), count))))


def random_rop(rng: random.Random, max_space: int = 1024) -> Rop:
    """A valid random optimization problem with search space <= max_space."""
    params: list[Parameter] = []
    space = 1
    for i in range(rng.randint(1, 5)):
        domain = _small_domain(rng)
        if space * domain.size > max_space:
            break
        space *= domain.size
        params.append(Parameter(f"p{i}", domain))
    decision_ids = tuple(p.id for p in params)
    if rng.random() < 0.4:
        domain = _small_domain(rng)
        params.append(Parameter("fix0", domain, default=rng.choice(domain.values())))
    monitored = []
    exogenous = {}
    for i in range(rng.randint(0, 2)):
        monitored.append(MonitoredVariable(f"m{i}", IntegerRange(-4, 4)))
        exogenous[f"m{i}"] = rng.randint(-4, 4)

    bounds: dict[str, tuple[float, float]] = {}
    booleans: list[str] = []
    for p in params:
        bounds[p.id] = domain_bounds(p.domain)
        if isinstance(p.domain, Boolean):
            booleans.append(p.id)
    for m in monitored:
        bounds[m.id] = domain_bounds(m.domain)

    criteria: list[Criterion] = []
    depends: list = []

    def add_weighted(cid: str, kind: str, preference) -> None:
        pool = list(bounds)
        ins = tuple(rng.sample(pool, rng.randint(1, min(3, len(pool)))))
        ws = tuple(float(rng.randint(-3, 3)) for _ in ins)
        offset = float(rng.randint(-2, 2))
        lo = offset + sum(min(w * bounds[n][0], w * bounds[n][1]) for w, n in zip(ws, ins))
        hi = offset + sum(max(w * bounds[n][0], w * bounds[n][1]) for w, n in zip(ws, ins))
        domain = IntegerRange(floor(lo), ceil(hi) if ceil(hi) > floor(lo) else floor(lo) + 1)
        criteria.append(Criterion(cid, domain, kind, preference))
        depends.append(WeightedSum(f"def_{cid}", cid, ins, ws, offset))
        bounds[cid] = (float(domain.lo), float(domain.hi))

    for i in range(rng.randint(1, 3)):
        cid = f"c{i}"
        form = rng.choice(("sum", "lookup", "step", "formula"))
        if form == "lookup":
            pool = [n for n in bounds if _lookup_ok(n, params, monitored, criteria)]
            pool = [n for n in pool if _var_size(n, params, monitored, criteria) <= 9]
            if pool:
                count = 1 if len(pool) == 1 else rng.randint(1, 2)
                ins = tuple(rng.sample(pool, count))
                combos = list(
                    product(*(_var_values(n, params, monitored, criteria) for n in ins))
                )
                if len(combos) <= 30:
                    entries = tuple(
                        (combo, rng.randint(-5, 5)) for combo in combos
                    )
                    criteria.append(Criterion(cid, IntegerRange(-5, 5), "quality-variable"))
                    depends.append(LookupTable(f"def_{cid}", cid, ins, entries))
                    bounds[cid] = (-5.0, 5.0)
                    continue
            form = "sum"
        if form == "step":
            pool = list(bounds)
            name = rng.choice(pool)
            lo, hi = bounds[name]
            cut = float(rng.randint(int(floor(lo)), int(ceil(hi))))
            criteria.append(Criterion(cid, Boolean(), "quality-variable"))
            depends.append(ThresholdStep(f"def_{cid}", cid, name, cut))
            bounds[cid] = (0.0, 1.0)
            booleans.append(cid)
        elif form == "formula" and booleans:
            names = rng.sample(booleans, rng.randint(1, min(3, len(booleans))))
            leaves = [not_(var(n)) if rng.random() < 0.4 else var(n) for n in names]
            expr = and_(*leaves) if rng.random() < 0.5 else or_(*leaves)
            criteria.append(Criterion(cid, Boolean(), "quality-variable"))
            depends.append(BooleanFormula(f"def_{cid}", cid, expr))
            bounds[cid] = (0.0, 1.0)
            booleans.append(cid)
        elif form == "sum":
            add_weighted(cid, "quality-variable", None)
            if isinstance(criteria[-1].domain, Boolean):
                booleans.append(cid)

    add_weighted("goal", "utility", "higher-better")

    constraints: list = []
    for i in range(rng.randint(0, 3)):
        kind = rng.choice(("linear", "cardinality", "incompatibility"))
        if kind == "linear":
            pool = list(bounds)
            ins = tuple(rng.sample(pool, rng.randint(1, min(2, len(pool)))))
            ws = tuple(float(rng.randint(-2, 2)) for _ in ins)
            lo = sum(min(w * bounds[n][0], w * bounds[n][1]) for w, n in zip(ws, ins))
            hi = sum(max(w * bounds[n][0], w * bounds[n][1]) for w, n in zip(ws, ins))
            bound = float(rng.randint(int(floor(lo)), max(int(ceil(hi)), int(floor(lo)) + 1)))
            constraints.append(
                LinearConstraint(f"con{i}", ins, ws, rng.choice(("<=", ">=", "==")), bound)
            )
        elif kind == "cardinality" and booleans:
            ins = tuple(rng.sample(booleans, rng.randint(1, min(3, len(booleans)))))
            constraints.append(
                CardinalityConstraint(
                    f"con{i}", ins, rng.choice(("<=", ">=", "==")), rng.randint(0, len(ins))
                )
            )
        elif kind == "incompatibility" and len(booleans) >= 2:
            a, b = rng.sample(booleans, 2)
            constraints.append(Incompatibility(f"con{i}", a, b))

    model = Model(
        criteria=tuple(criteria),
        parameters=tuple(params),
        monitored=tuple(monitored),
        depends=tuple(depends) + tuple(constraints),
        decision_rule="goal",
        decision_set=decision_ids,
    )
    problems = validate_model(model)
    assert not problems, problems
    return rop(model, exogenous)


def _find_domain(name, params, monitored, criteria) -> Domain:
    for p in params:
        if p.id == name:
            return p.domain
    for m in monitored:
        if m.id == name:
            return m.domain
    for c in criteria:
        if c.id == name:
            return c.domain
    raise KeyError(name)


def _lookup_ok(name, params, monitored, criteria) -> bool:
    try:
        _find_domain(name, params, monitored, criteria)
        return True
    except KeyError:
        return False


def _var_size(name, params, monitored, criteria) -> int:
    return _find_domain(name, params, monitored, criteria).size


def _var_values(name, params, monitored, criteria):
    return _find_domain(name, params, monitored, criteria).values()


# ---------------------------------------------------------------------------
# Simulation scenarios


def random_runtime_pair(
    rng: random.Random,
) -> tuple[Model, EventTrace, SimulationConfig]:
    """An always-feasible model, a trace, and a duration-0 configuration.

    Watched criteria read only monitored variables, so trigger firing does
    not depend on which specification is active.
    """
    params = tuple(Parameter(f"p{i}", Boolean()) for i in range(rng.randint(1, 3)))
    monitored = tuple(
        MonitoredVariable(f"m{i}", IntegerRange(-50, 50))
        for i in range(rng.randint(1, 2))
    )
    criteria: list[Criterion] = []
    depends: list = []
    triggers = []
    initial = {m.id: rng.randint(-5, 5) for m in monitored}
    for i, m in enumerate(monitored):
        cid = f"w{i}"
        weight = float(rng.randint(1, 2))
        criteria.append(Criterion(cid, IntegerRange(-200, 200), "quality-variable"))
        depends.append(WeightedSum(f"def_{cid}", cid, (m.id,), (weight,)))
        center = weight * initial[m.id]
        triggers.append(
            AwarenessTrigger(
                cid,
                IntervalRange(center - rng.randint(0, 5), center + rng.randint(0, 5)),
            )
        )
    goal_ins = tuple(p.id for p in params) + tuple(m.id for m in monitored)
    goal_ws = tuple(float(rng.randint(-3, 3)) for _ in goal_ins)
    criteria.append(Criterion("goal", IntegerRange(-400, 400), "utility", "higher-better"))
    depends.append(WeightedSum("def_goal", "goal", goal_ins, goal_ws))
    model = Model(
        criteria=tuple(criteria),
        parameters=params,
        monitored=monitored,
        depends=tuple(depends),
        decision_rule="goal",
        decision_set=tuple(p.id for p in params),
    )
    assert not validate_model(model)

    ticks = sorted(rng.randint(0, 12) for _ in range(rng.randint(3, 10)))
    events = tuple(
        Event(t, rng.choice(monitored).id, rng.randint(-10, 10)) for t in ticks
    )
    config = SimulationConfig(
        adaptation_duration=0,
        triggers=tuple(triggers),
        initial_exogenous=tuple(sorted(initial.items())),
    )
    return model, EventTrace(events), config
