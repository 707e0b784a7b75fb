"""Symbolic (parametric-zone) semantics.

A symbolic state pairs a location with a polyhedron over clocks and
parameters describing exactly the reachable clock/parameter combinations
along a discrete path.  Exploration is breadth-first with optional
inclusion subsumption and a state/depth budget; when the model carries
parameter bounds they are conjoined once into the initial state and then
propagate through every successor.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from . import poly
from .errors import EmptyInitialError, ZoneShapeError
from .model import Edge, Pta

COMPLETE = "complete"
BUDGET_EXCEEDED = "budget_exceeded"


@dataclass(frozen=True)
class Budget:
    max_states: int = 2000
    max_depth: int = 500
    max_int_valuations: int = 100000


@dataclass(frozen=True)
class SymbolicState:
    location: str
    constraint: poly.Polyhedron


@dataclass
class ExplorationResult:
    states: list[SymbolicState]
    edges: list[tuple[int, int, int]]
    parents: dict[int, tuple[int, int]]
    depths: list[int]
    status: str

    @property
    def complete(self) -> bool:
        return self.status == COMPLETE

    def path_to(self, index: int) -> list[int]:
        """Discrete edge ids of the stored path reaching a state."""
        path: list[int] = []
        while index in self.parents:
            index, edge_id = self.parents[index]
            path.append(edge_id)
        path.reverse()
        return path


def _checked(state: SymbolicState) -> SymbolicState:
    viol = poly.zone_violation(state.constraint)
    if viol is not None:
        raise ZoneShapeError(f"at {state.location}: {viol}")
    return state


def initial_state(pta: Pta) -> SymbolicState:
    """Origin conjoined with the initial invariant, elapsed, re-intersected
    with the invariant; parameter bounds conjoined when present."""
    inv = pta.invariant(pta.init)
    c = poly.origin(pta.clocks, pta.parameters)
    c = poly.conjoin_guard(c, inv)
    c = poly.time_elapse(c)
    c = poly.conjoin_guard(c, inv)
    bounds = pta.bounds_map()
    if bounds:
        c = poly.intersect(c, poly.bounds_box(pta.clocks, pta.parameters, bounds))
    c = poly.minimized(c)
    if poly.is_empty(c):
        raise EmptyInitialError(
            "initial invariant excludes the origin for every parameter valuation")
    return _checked(SymbolicState(pta.init, c))


def succ(pta: Pta, state: SymbolicState, edge: Edge) -> SymbolicState | None:
    """Successor through one edge, or None when infeasible.  The target
    invariant is intersected both before and after time elapse."""
    assert edge.source == state.location
    inv = pta.invariant(edge.target)
    c = poly.conjoin_guard(state.constraint, edge.guard)
    if poly.is_empty(c):
        return None
    c = poly.reset(c, edge.resets)
    c = poly.conjoin_guard(c, inv)
    c = poly.time_elapse(c)
    c = poly.conjoin_guard(c, inv)
    c = poly.minimized(c)
    if poly.is_empty(c):
        return None
    return _checked(SymbolicState(edge.target, c))


def explore(pta: Pta, budget: Budget = Budget(),
            restrict_to: frozenset[str] | None = None,
            use_subsumption: bool = True) -> ExplorationResult:
    """Breadth-first symbolic exploration.

    restrict_to prunes successors whose location is outside the set (the
    pruning does not count against completeness).  A new state is discarded
    when an already-stored state at the same location includes it.
    """
    result = ExplorationResult([], [], {}, [], COMPLETE)
    try:
        s0 = initial_state(pta)
    except EmptyInitialError:
        return result
    if restrict_to is not None and s0.location not in restrict_to:
        return result

    result.states.append(s0)
    result.depths.append(0)
    by_location: dict[str, list[int]] = {s0.location: [0]}
    out_edges: dict[str, list[tuple[int, Edge]]] = {}
    for edge_id, e in enumerate(pta.edges):
        out_edges.setdefault(e.source, []).append((edge_id, e))

    def subsumer(state: SymbolicState) -> int | None:
        candidates = by_location.get(state.location, ())
        if not candidates:
            return None
        # Stored states are minimized and nonempty, so matched faces often
        # settle inclusion without the solver.  A sample of the new state
        # prunes most of the remaining candidates before the exact check.
        probe = poly.sample_point(state.constraint)
        for idx in candidates:
            other = result.states[idx].constraint
            quick = poly.quick_inclusion(other, state.constraint)
            if quick is not None:
                if quick:
                    return idx
                continue
            if probe is not None and not poly.contains(other, probe):
                continue
            if poly.includes(other, state.constraint):
                return idx
        return None

    queue: deque[int] = deque([0])
    while queue:
        i = queue.popleft()
        depth = result.depths[i]
        for edge_id, e in out_edges.get(result.states[i].location, ()):
            nxt = succ(pta, result.states[i], e)
            if nxt is None:
                continue
            if restrict_to is not None and nxt.location not in restrict_to:
                continue
            if use_subsumption:
                j = subsumer(nxt)
                if j is not None:
                    result.edges.append((i, edge_id, j))
                    continue
            if depth + 1 > budget.max_depth or len(result.states) >= budget.max_states:
                result.status = BUDGET_EXCEEDED
                continue
            result.states.append(nxt)
            j = len(result.states) - 1
            by_location.setdefault(nxt.location, []).append(j)
            result.depths.append(depth + 1)
            result.edges.append((i, edge_id, j))
            result.parents[j] = (i, edge_id)
            queue.append(j)
    return result


def reach_project(pta: Pta, targets: frozenset[str] | set[str],
                  budget: Budget = Budget()) -> tuple[poly.PolyUnion, str]:
    """Union of parameter projections of stored target states, plus the
    exploration status.  Sound; exact when the status is complete."""
    targets = frozenset(targets)
    result = explore(pta, budget)
    pieces = [poly.project_params(s.constraint)
              for s in result.states if s.location in targets]
    return poly.union_of(pieces), result.status
