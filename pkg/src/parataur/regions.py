"""Clock regions for instantiated (non-parametric) timed automata.

The construction is the standard one: a region fixes, per clock, either an
integer part up to that clock's maximal constant or "above", plus the
ordering of the fractional parts of the non-above clocks (including which
are exactly integer).  Guards are evaluated "holds throughout the region",
which is exact because the per-clock maximal constants refine every atom.

Queries answered on the graph: location reachability (with a discrete-edge
witness), existence of a reachable cycle with at least one discrete edge,
existence of a reachable deadlocked region (no discrete edge from it or any
delay descendant), and inevitability of a target set.  A finite run is
maximal iff no discrete extension exists, possibly after a delay; time
divergence is not part of the criterion.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

from .model import Guard, Ta

Ints = tuple  # per-clock integer part, None meaning "above max constant"
Fracs = tuple  # fracs[0]: indices with zero fraction; then increasing classes


def _max_constants(ta: Ta) -> tuple[int, ...]:
    maxc = {x: 0 for x in ta.clocks}
    for loc in ta.locations:
        for a in loc.invariant:
            maxc[a.clock] = max(maxc[a.clock], a.constant)
    for e in ta.edges:
        for a in e.guard:
            maxc[a.clock] = max(maxc[a.clock], a.constant)
    return tuple(maxc[x] for x in ta.clocks)


def _atom_holds(op: str, c: int, v: int | None, has_frac: bool) -> bool:
    """Truth of ``clock op c`` throughout a region, from the clock's integer
    part (None when above the max constant) and fractional-part flag."""
    if v is None:
        return op in (">=", ">")
    if op in ("<=", "<"):
        return v < c if (has_frac or op == "<") else v <= c
    if op == ">":
        return v >= c if has_frac else v > c
    return v >= c


def _guard_holds(guard: Guard, index: dict[str, int],
                 ints: Ints, zero_set: frozenset[int]) -> bool:
    for a in guard:
        i = index[a.clock]
        if not _atom_holds(a.op, a.constant, ints[i], i not in zero_set):
            return False
    return True


def _delay_successor(ints: Ints, fracs: Fracs,
                     maxc: Sequence[int]) -> tuple[Ints, Fracs] | None:
    active = [i for i, v in enumerate(ints) if v is not None]
    if not active:
        return None
    zero = fracs[0]
    if zero:
        stay = tuple(i for i in zero if ints[i] < maxc[i])
        new_ints = tuple(None if (i in zero and ints[i] == maxc[i]) else v
                         for i, v in enumerate(ints))
        new_fracs = ((),) + ((stay,) if stay else ()) + fracs[1:]
        if all(v is None for v in new_ints):
            new_fracs = ((),)
        return new_ints, new_fracs
    last = set(fracs[-1])
    new_ints = tuple(v + 1 if i in last else v for i, v in enumerate(ints))
    return new_ints, (fracs[-1],) + fracs[1:-1]


def _reset_region(ints: Ints, fracs: Fracs, resets: frozenset[int]) -> tuple[Ints, Fracs]:
    new_ints = tuple(0 if i in resets else v for i, v in enumerate(ints))
    zero = tuple(sorted(set(fracs[0]) | resets))
    positives = tuple(tuple(j for j in cls if j not in resets) for cls in fracs[1:])
    return new_ints, (zero,) + tuple(c for c in positives if c)


def _ordered_partitions(items: tuple[int, ...]) -> Iterator[tuple[tuple[int, ...], ...]]:
    if not items:
        yield ()
        return
    first, rest = items[0], items[1:]
    for part in _ordered_partitions(rest):
        for k in range(len(part)):
            yield part[:k] + ((first,) + part[k],) + part[k + 1:]
        for k in range(len(part) + 1):
            yield part[:k] + ((first,),) + part[k:]


def _enumerate_shapes(maxc: Sequence[int]) -> list[tuple[Ints, Fracs]]:
    h = len(maxc)
    shapes = []
    per_clock = [[None] + list(range(m + 1)) for m in maxc]
    for ints in itertools.product(*per_clock):
        active = [i for i in range(h) if ints[i] is not None]
        forced = [i for i in active if ints[i] == maxc[i]]
        free = [i for i in active if ints[i] < maxc[i]]
        for r in range(len(free) + 1):
            for extra in itertools.combinations(free, r):
                zero = tuple(sorted(forced + list(extra)))
                positive = tuple(i for i in free if i not in extra)
                for part in _ordered_partitions(positive):
                    norm = tuple(tuple(sorted(cls)) for cls in part)
                    shapes.append((ints, (zero,) + norm))
    return shapes


@dataclass
class RegionGraph:
    ta: Ta
    max_constants: tuple[int, ...]
    nodes: list[tuple[str, Ints, Fracs]]
    index: dict[tuple[str, Ints, Fracs], int]
    delay: dict[int, int]
    discrete: list[tuple[int, int, int]]
    initial: int | None
    discrete_out: dict[int, list[tuple[int, int]]] = field(default_factory=dict)
    _can_fire: dict[int, bool] = field(default_factory=dict)

    def __post_init__(self):
        for i, edge_id, j in self.discrete:
            self.discrete_out.setdefault(i, []).append((edge_id, j))

    def successors(self, i: int) -> Iterator[tuple[int | None, int]]:
        """(edge id or None for delay, target node)."""
        if i in self.delay:
            yield None, self.delay[i]
        for edge_id, j in self.discrete_out.get(i, ()):
            yield edge_id, j

    def reachable(self, within: frozenset[str] | None = None
                  ) -> tuple[set[int], dict[int, tuple[int, int | None]]]:
        parents: dict[int, tuple[int, int | None]] = {}
        seen: set[int] = set()
        if self.initial is None:
            return seen, parents
        if within is not None and self.nodes[self.initial][0] not in within:
            return seen, parents
        seen.add(self.initial)
        frontier = [self.initial]
        while frontier:
            nxt = []
            for i in frontier:
                for edge_id, j in self.successors(i):
                    if j in seen:
                        continue
                    if within is not None and self.nodes[j][0] not in within:
                        continue
                    seen.add(j)
                    parents[j] = (i, edge_id)
                    nxt.append(j)
            frontier = nxt
        return seen, parents

    def can_fire(self, i: int) -> bool:
        """A discrete edge is available from i or some delay descendant."""
        chain = []
        cur: int | None = i
        while cur is not None and cur not in self._can_fire:
            chain.append(cur)
            cur = self.delay.get(cur)
        value = False if cur is None else self._can_fire[cur]
        for node in reversed(chain):
            value = value or bool(self.discrete_out.get(node))
            self._can_fire[node] = value
        return self._can_fire[i]


def build_region_graph(ta: Ta) -> RegionGraph:
    maxc = _max_constants(ta)
    index_of_clock = {x: k for k, x in enumerate(ta.clocks)}
    shapes = _enumerate_shapes(maxc)

    nodes: list[tuple[str, Ints, Fracs]] = []
    index: dict[tuple[str, Ints, Fracs], int] = {}
    for loc in ta.locations:
        for ints, fracs in shapes:
            if _guard_holds(loc.invariant, index_of_clock, ints,
                            frozenset(fracs[0])):
                key = (loc.name, ints, fracs)
                index[key] = len(nodes)
                nodes.append(key)

    delay: dict[int, int] = {}
    for i, (loc, ints, fracs) in enumerate(nodes):
        nxt = _delay_successor(ints, fracs, maxc)
        if nxt is not None:
            j = index.get((loc, nxt[0], nxt[1]))
            if j is not None:
                delay[i] = j

    discrete: list[tuple[int, int, int]] = []
    by_location: dict[str, list[int]] = {}
    for i, (loc, _, _) in enumerate(nodes):
        by_location.setdefault(loc, []).append(i)
    for edge_id, e in enumerate(ta.edges):
        resets = frozenset(index_of_clock[x] for x in e.resets)
        for i in by_location.get(e.source, ()):
            _, ints, fracs = nodes[i]
            if not _guard_holds(e.guard, index_of_clock, ints, frozenset(fracs[0])):
                continue
            r_ints, r_fracs = _reset_region(ints, fracs, resets)
            j = index.get((e.target, r_ints, r_fracs))
            if j is not None:
                discrete.append((i, edge_id, j))

    h = len(ta.clocks)
    init_key = (ta.init, tuple([0] * h), (tuple(range(h)),))
    return RegionGraph(ta, maxc, nodes, index, delay, discrete,
                       index.get(init_key))


def _scc_ids(nodes: set[int], succ_map: dict[int, list[int]]) -> dict[int, int]:
    """Tarjan, iterative."""
    counter = 0
    comp_id = 0
    index: dict[int, int] = {}
    low: dict[int, int] = {}
    onstack: set[int] = set()
    stack: list[int] = []
    comp: dict[int, int] = {}
    for root in nodes:
        if root in index:
            continue
        work = [(root, iter(succ_map.get(root, ())))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        onstack.add(root)
        while work:
            v, it = work[-1]
            pushed = False
            for w in it:
                if w not in nodes:
                    continue
                if w not in index:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    onstack.add(w)
                    work.append((w, iter(succ_map.get(w, ()))))
                    pushed = True
                    break
                if w in onstack:
                    low[v] = min(low[v], index[w])
            if pushed:
                continue
            work.pop()
            if low[v] == index[v]:
                while True:
                    w = stack.pop()
                    onstack.discard(w)
                    comp[w] = comp_id
                    if w == v:
                        break
                comp_id += 1
            if work:
                u, _ = work[-1]
                low[u] = min(low[u], low[v])
    return comp


def _has_discrete_lasso(graph: RegionGraph, nodes: set[int]) -> bool:
    succ_map: dict[int, list[int]] = {}
    for i in nodes:
        succ_map[i] = [j for _, j in graph.successors(i) if j in nodes]
    comp = _scc_ids(nodes, succ_map)
    for i, _, j in graph.discrete:
        if i in nodes and j in nodes and comp[i] == comp[j]:
            return True
    return False


def ta_reach(ta: Ta, targets: Iterable[str]) -> bool:
    return reach_path(ta, targets) is not None


def reach_path(ta: Ta, targets: Iterable[str]) -> list[int] | None:
    """Discrete edge ids of a run reaching the target set, or None."""
    targets = frozenset(targets)
    graph = build_region_graph(ta)
    seen, parents = graph.reachable()
    goal = None
    for i in sorted(seen):
        if graph.nodes[i][0] in targets:
            goal = i
            break
    if goal is None:
        return None
    path: list[int] = []
    cur = goal
    while cur in parents:
        cur, edge_id = parents[cur]
        if edge_id is not None:
            path.append(edge_id)
    path.reverse()
    return path


def ta_lasso(ta: Ta, within: Iterable[str]) -> bool:
    """A reachable cycle with at least one discrete edge, all locations
    within the given set (the path to the cycle stays within it too)."""
    graph = build_region_graph(ta)
    seen, _ = graph.reachable(frozenset(within))
    return _has_discrete_lasso(graph, seen)


def ta_deadlock(ta: Ta) -> bool:
    return deadlock_within(ta, (loc.name for loc in ta.locations))


def deadlock_within(ta: Ta, within: Iterable[str]) -> bool:
    """A region reachable through the location set from which no discrete
    edge is available, now or after any sequence of delays."""
    graph = build_region_graph(ta)
    seen, _ = graph.reachable(frozenset(within))
    return any(not graph.can_fire(i) for i in seen)


def ta_af(ta: Ta, targets: Iterable[str]) -> bool:
    """Every maximal run visits the target set.  Checked on the region graph
    with target regions absorbing: no avoiding lasso and no avoiding
    deadlocked region may exist."""
    targets = frozenset(targets)
    graph = build_region_graph(ta)
    if graph.initial is None:
        return True
    if graph.nodes[graph.initial][0] in targets:
        return True
    avoiding = frozenset(loc.name for loc in ta.locations) - targets
    seen, _ = graph.reachable(avoiding)
    if any(not graph.can_fire(i) for i in seen):
        return False
    return not _has_discrete_lasso(graph, seen)
