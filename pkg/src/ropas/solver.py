"""Exact optimisation over finite specification spaces.

A problem couples a model (whose decision rule names the criterion to
maximise) with fixed exogenous values.  ``solve_rop`` runs a depth-first
search over decision-set assignments with constraint-propagation pruning and
returns every tied optimum; ``brute_force_oracle`` is the independent
full-enumeration reference used by the test suite.  ``encode_rdrp`` compiles a
goal graph into a smallest-selection optimisation problem over binary
selection parameters.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Mapping, Optional, Union

from .domains import Boolean, Domain, Enumerated, IntegerRange, Value, domain_bounds
from .errors import DefinitionError, EvaluationError, SizeLimitError
from .goals import GoalGraph
from .model import (
    BooleanFormula,
    CardinalityConstraint,
    ConstraintDepend,
    Criterion,
    DEFAULT_ENUMERATION_CAP,
    Incompatibility,
    LinearConstraint,
    Model,
    Parameter,
    Specification,
    WeightedSum,
    _apply_functional,
    _constraint_holds,
    _topological_depends,
    and_,
    canonical_key,
    complete_specification,
    evaluate,
    is_feasible,
    or_,
    search_space_size,
    validate_model,
    var,
)

DEFAULT_ORACLE_CAP = 1 << 16

LINEAR_FORMS = (LinearConstraint, CardinalityConstraint, WeightedSum)


@dataclass(frozen=True)
class Rop:
    """An optimisation problem: a model plus fixed exogenous values.

    The model must validate cleanly, carry a higher-better numeric decision
    rule, and have a nonempty decision set.
    """

    model: Model
    exogenous: tuple[tuple[str, Value], ...] = ()

    def __post_init__(self) -> None:
        violations = validate_model(self.model)
        if violations:
            raise DefinitionError(
                "invalid model: " + "; ".join(str(v) for v in violations)
            )
        if self.model.decision_rule is None:
            raise DefinitionError("model has no decision rule")
        if not self.model.decision_set:
            raise DefinitionError("model has an empty decision set")
        rule = self.model.criterion(self.model.decision_rule)
        if domain_bounds(rule.domain) is None:
            raise DefinitionError(f"decision rule '{rule.id}' has no numeric ordering")

    def exogenous_map(self) -> dict[str, Value]:
        return dict(self.exogenous)


def rop(model: Model, exogenous: Optional[Mapping[str, Value]] = None) -> Rop:
    """Convenience constructor accepting a plain mapping."""
    return Rop(model=model, exogenous=tuple(sorted((exogenous or {}).items())))


@dataclass(frozen=True)
class RopClass:
    """Coarse problem taxonomy: decision-variable kind and depend kind."""

    variable_kind: str  # binary | integer | continuous-grid | mixed
    depend_kind: str  # linear | nonlinear | general


def classify(problem: Rop) -> RopClass:
    """Classify by decision-set domains and depend relation forms.

    Linear forms are linear constraints, cardinality constraints, and weighted
    sums; formulas, lookup tables, threshold steps, and incompatibilities
    count as nonlinear.  A mixture of both yields "general".
    """
    kinds = set()
    for pid in problem.model.decision_set:
        domain = problem.model.parameter(pid).domain
        if isinstance(domain, Boolean):
            kinds.add("binary")
        elif isinstance(domain, (IntegerRange, Enumerated)):
            kinds.add("integer")
        else:
            kinds.add("continuous-grid")
    variable_kind = kinds.pop() if len(kinds) == 1 else "mixed"

    linear = sum(1 for d in problem.model.depends if isinstance(d, LINEAR_FORMS))
    total = len(problem.model.depends)
    if linear == total:
        depend_kind = "linear"
    elif linear == 0:
        depend_kind = "nonlinear"
    else:
        depend_kind = "general"
    return RopClass(variable_kind=variable_kind, depend_kind=depend_kind)


@dataclass(frozen=True)
class OptimalSolutions:
    """All tied optima in canonical order, plus the shared objective value."""

    optima: tuple[Specification, ...]
    objective_value: Value


@dataclass(frozen=True)
class Infeasible:
    """Explicit result when no specification satisfies the constraints."""

    reason: str = "no feasible specification"


SolveResult = Union[OptimalSolutions, Infeasible]


# ---------------------------------------------------------------------------
# Depth-first search with constraint propagation


def _numeric_bounds(domain: Domain) -> tuple[float, float]:
    bounds = domain_bounds(domain)
    if bounds is None:
        raise DefinitionError("constraint input over non-numeric domain")
    return bounds


def _constraint_possible(
    dep: ConstraintDepend, env: Mapping[str, Value], model: Model
) -> bool:
    """False only when no completion of the partial assignment can satisfy."""
    if isinstance(dep, Incompatibility):
        if dep.a in env and dep.b in env:
            return not (env[dep.a] and env[dep.b])
        return True
    if isinstance(dep, CardinalityConstraint):
        lo = hi = 0.0
        for name in dep.inputs:
            if name in env:
                lo += 1 if env[name] else 0
                hi += 1 if env[name] else 0
            else:
                hi += 1
    else:
        lo = hi = 0.0
        for coeff, name in zip(dep.coefficients, dep.inputs):
            if name in env:
                term = coeff * float(env[name])  # type: ignore[arg-type]
                lo += term
                hi += term
            else:
                b0, b1 = _numeric_bounds(model.variable_domain(name))
                lo += min(coeff * b0, coeff * b1)
                hi += max(coeff * b0, coeff * b1)
    eps = 1e-9
    if dep.comparator == "==":
        return lo - eps <= dep.bound <= hi + eps
    if dep.comparator == "<=":
        return lo <= dep.bound + eps
    return hi >= dep.bound - eps


def solve_rop(problem: Rop, cap: int = DEFAULT_ENUMERATION_CAP) -> SolveResult:
    """Maximise the decision-rule criterion over the decision set.

    Depth-first search in canonical order (parameter ids lexicographic, domain
    values in declaration order); a branch is pruned as soon as some pure
    constraint can no longer be satisfied by any completion.  All tied optima
    are returned, sorted canonically.
    """
    model = problem.model
    exogenous = problem.exogenous_map()
    decision_ids = sorted(model.decision_set)
    space = search_space_size(model, decision_ids)
    if space > cap:
        raise SizeLimitError(f"search space {space} exceeds cap {cap}")

    env: dict[str, Value] = {}
    for name in sorted(exogenous):
        domain = model.variable_domain(name)
        env[name] = domain.canonical(exogenous[name])
    producers = {d.output: d for d in model.functional_depends()}
    for p in model.parameters:
        if p.id not in model.decision_set and p.id not in producers:
            if p.default is None:
                raise EvaluationError(
                    f"parameter '{p.id}' outside the decision set has no default"
                )
            env[p.id] = p.domain.canonical(p.default)

    topo = _topological_depends(model)
    constraints = model.constraint_depends()

    # Index functional depends and constraints by the inputs they wait on.
    feeds: dict[str, list] = {}
    for dep in topo:
        for name in dep.inputs:
            feeds.setdefault(name, []).append(dep)
    watching: dict[str, list[ConstraintDepend]] = {}
    for con in constraints:
        for name in con.inputs:
            watching.setdefault(name, []).append(con)

    missing: dict[str, int] = {
        dep.id: sum(1 for name in dep.inputs if name not in env) for dep in topo
    }

    best_value: Optional[Value] = None
    best: list[Specification] = []
    params = [model.parameter(pid) for pid in decision_ids]
    all_param_ids = [p.id for p in model.parameters]

    # The trail records every reversible step as ("env", variable) for an
    # environment entry or ("dec", depend id) for one missing-input decrement,
    # so undo stays exact even when propagation bails out partway through.

    def propagate(assigned: str, trail: list[tuple[str, str]]) -> bool:
        """Compute newly ready functional outputs; False on constraint failure."""
        queue = [assigned]
        while queue:
            name = queue.pop()
            for con in watching.get(name, ()):
                if all(n in env for n in con.inputs):
                    if not _constraint_holds(con, env):
                        return False
                elif not _constraint_possible(con, env, model):
                    return False
            for dep in feeds.get(name, ()):
                missing[dep.id] -= 1
                trail.append(("dec", dep.id))
                if missing[dep.id] == 0 and dep.output not in env:
                    value = _apply_functional(dep, env, model.variable_domain(dep.output))
                    env[dep.output] = value
                    trail.append(("env", dep.output))
                    queue.append(dep.output)
        return True

    def undo(trail: list[tuple[str, str]]) -> None:
        for kind, payload in reversed(trail):
            if kind == "env":
                del env[payload]
            else:
                missing[payload] += 1

    # Propagate anything computable before search (constants, defaults).
    prefix_trail: list[tuple[str, str]] = []
    for dep in topo:
        if missing[dep.id] == 0 and dep.output not in env:
            value = _apply_functional(dep, env, model.variable_domain(dep.output))
            env[dep.output] = value
            prefix_trail.append(("env", dep.output))
            if not propagate(dep.output, prefix_trail):
                undo(prefix_trail)
                return Infeasible()
    for con in constraints:
        if all(n in env for n in con.inputs) and not _constraint_holds(con, env):
            undo(prefix_trail)
            return Infeasible()

    rule = model.decision_rule
    assert rule is not None

    def leaf() -> None:
        nonlocal best_value
        for con in constraints:
            if not _constraint_holds(con, env):
                return
        if rule not in env:
            raise EvaluationError(f"missing value for variable '{rule}'")
        value = env[rule]
        values: dict[str, Value] = {}
        for pid in all_param_ids:
            if pid not in env:
                raise EvaluationError(
                    f"parameter '{pid}' outside the decision set has no default"
                )
            values[pid] = env[pid]
        if best_value is None or value > best_value:  # type: ignore[operator]
            best_value = value
            best.clear()
            best.append(Specification.from_mapping(values))
        elif value == best_value:
            best.append(Specification.from_mapping(values))

    def descend(index: int) -> None:
        if index == len(params):
            leaf()
            return
        p = params[index]
        for value in p.domain.values():
            env[p.id] = value
            trail: list[tuple[str, str]] = [("env", p.id)]
            if propagate(p.id, trail):
                descend(index + 1)
            undo(trail)

    descend(0)
    undo(prefix_trail)

    if not best:
        return Infeasible()
    best.sort(key=lambda s: canonical_key(model, s))
    return OptimalSolutions(optima=tuple(best), objective_value=best_value)


def brute_force_oracle(problem: Rop, cap: int = DEFAULT_ORACLE_CAP) -> SolveResult:
    """Reference solver: enumerate every decision assignment, no pruning."""
    model = problem.model
    exogenous = problem.exogenous_map()
    decision_ids = sorted(model.decision_set)
    space = search_space_size(model, decision_ids)
    if space > cap:
        raise SizeLimitError(f"search space {space} exceeds oracle cap {cap}")

    rule = model.decision_rule
    assert rule is not None
    best_value: Optional[Value] = None
    best: list[Specification] = []
    domains = [model.parameter(pid).domain.values() for pid in decision_ids]
    for combo in product(*domains):
        assignment = dict(zip(decision_ids, combo))
        spec = complete_specification(model, assignment, exogenous)
        if not is_feasible(model, spec, exogenous):
            continue
        instance = evaluate(model, spec, exogenous)
        value = instance[rule]
        if best_value is None or value > best_value:  # type: ignore[operator]
            best_value = value
            best = [spec]
        elif value == best_value:
            best.append(spec)
    if not best:
        return Infeasible()
    best.sort(key=lambda s: canonical_key(model, s))
    return OptimalSolutions(optima=tuple(best), objective_value=best_value)


# ---------------------------------------------------------------------------
# Goal graph encoding


OBJECTIVE_ID = "objective"
DERIVED_SUFFIX = "__derived"


def _premise_reference(atom: str, graph: GoalGraph, derivable_s: set[str]) -> str:
    if atom in derivable_s:
        return atom + DERIVED_SUFFIX
    return atom


def encode_rdrp(graph: GoalGraph) -> Rop:
    """Compile a goal graph into a smallest-selection optimisation problem.

    One binary parameter per selectable atom; one boolean criterion per
    requirement and knowledge atom, all forced to 1 through cardinality
    constraints; refinements become boolean formulas tying conclusions to
    premises; conflict pairs become incompatibility constraints.  The decision
    rule maximises minus the number of selected atoms, so the optima are
    exactly the minimum-cardinality satisfying selections.
    """
    unpartitioned = graph.atoms - graph.r_atoms - graph.k_atoms - graph.s_atoms
    if unpartitioned:
        raise DefinitionError(
            f"atoms outside the three partitions: {sorted(unpartitioned)}"
        )
    if not graph.s_atoms:
        raise DefinitionError("no selectable atoms to encode")
    reserved = {OBJECTIVE_ID} | {a + DERIVED_SUFFIX for a in graph.s_atoms}
    clash = graph.atoms & reserved
    if clash:
        raise DefinitionError(f"atom names clash with encoder ids: {sorted(clash)}")

    by_conclusion: dict[str, list] = {}
    for ref in graph.refinements:
        by_conclusion.setdefault(ref.conclusion, []).append(ref)
    derivable_s = {a for a in graph.s_atoms if a in by_conclusion}

    parameters = tuple(
        Parameter(id=a, domain=Boolean()) for a in sorted(graph.s_atoms)
    )
    criteria: list[Criterion] = []
    depends: list = []

    def rule_formula(conclusion: str):
        alternatives = []
        for ref in by_conclusion.get(conclusion, []):
            terms = [
                var(_premise_reference(p, graph, derivable_s))
                for p in sorted(ref.premises)
            ]
            alternatives.append(and_(*terms))
        return or_(*alternatives)

    for atom in sorted(graph.k_atoms):
        criteria.append(Criterion(id=atom, domain=Boolean(), kind="domain-knowledge"))
        depends.append(BooleanFormula(id=f"given_{atom}", output=atom, expr=and_()))
    for atom in sorted(graph.r_atoms):
        criteria.append(Criterion(id=atom, domain=Boolean(), kind="requirement"))
        depends.append(BooleanFormula(id=f"derive_{atom}", output=atom, expr=rule_formula(atom)))
    for atom in sorted(derivable_s):
        aux = atom + DERIVED_SUFFIX
        criteria.append(Criterion(id=aux, domain=Boolean(), kind="quality-variable"))
        depends.append(
            BooleanFormula(
                id=f"derive_{aux}",
                output=aux,
                expr=or_(var(atom), *rule_formula(atom)[1:]),
            )
        )

    if graph.r_atoms:
        depends.append(
            CardinalityConstraint(
                id="require_all",
                inputs=tuple(sorted(graph.r_atoms)),
                comparator="==",
                bound=len(graph.r_atoms),
            )
        )
    if graph.k_atoms:
        depends.append(
            CardinalityConstraint(
                id="assert_knowledge",
                inputs=tuple(sorted(graph.k_atoms)),
                comparator="==",
                bound=len(graph.k_atoms),
            )
        )
    for pair in sorted(graph.conflicts, key=lambda p: tuple(sorted(p))):
        a, b = sorted(pair)
        depends.append(
            Incompatibility(
                id=f"conflict_{a}_{b}",
                a=_premise_reference(a, graph, derivable_s),
                b=_premise_reference(b, graph, derivable_s),
            )
        )

    n = len(graph.s_atoms)
    criteria.append(
        Criterion(
            id=OBJECTIVE_ID,
            domain=IntegerRange(-n, 0),
            kind="utility",
            preference="higher-better",
        )
    )
    depends.append(
        WeightedSum(
            id="selection_cost",
            output=OBJECTIVE_ID,
            inputs=tuple(sorted(graph.s_atoms)),
            weights=(-1.0,) * n,
        )
    )

    model = Model(
        criteria=tuple(criteria),
        parameters=parameters,
        monitored=(),
        depends=tuple(depends),
        decision_rule=OBJECTIVE_ID,
        decision_set=tuple(sorted(graph.s_atoms)),
    )
    return Rop(model=model, exogenous=())


def decode_selection(graph: GoalGraph, spec: Specification) -> frozenset[str]:
    """Map an encoded-problem specification back to a selection of atoms."""
    return frozenset(a for a in graph.s_atoms if spec[a])
