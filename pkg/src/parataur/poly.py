"""Exact rational polyhedra with open/closed faces.

Constraints are stored as normalized linear inequalities ``t + c (<|<=) 0``
over named variables (clocks and parameters).  Every polyhedron materializes
nonnegativity of all its variables, since clock and parameter valuations
live in the nonnegative rationals.  All operations are exact; the only
quantifier elimination used anywhere is Fourier-Motzkin, with the usual rule
that a combined inequality is strict iff either parent is strict.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping

from .errors import NotAZoneError, UnboundedError
from .model import Guard, GuardAtom, Interval

_ELAPSE_VAR = "__d"


@dataclass(frozen=True)
class LinIneq:
    """Normalized inequality: sum(coeff * var) + constant 'op' 0.

    Coefficients are kept with integer content 1 (multiplied through by the
    unique positive rational achieving that), so syntactically equal
    constraints compare equal.  A constant-only inequality keeps just the
    sign of its constant.
    """

    coeffs: tuple[tuple[str, Fraction], ...]
    constant: Fraction
    strict: bool

    @property
    def trivially_true(self) -> bool:
        return not self.coeffs and (
            self.constant < 0 or (self.constant == 0 and not self.strict))

    @property
    def trivially_false(self) -> bool:
        return not self.coeffs and (
            self.constant > 0 or (self.constant == 0 and self.strict))

    def coeff(self, var: str) -> Fraction:
        for name, c in self.coeffs:
            if name == var:
                return c
        return Fraction(0)

    def evaluate(self, point: Mapping[str, Fraction]) -> bool:
        total = self.constant + sum(
            (c * point[name] for name, c in self.coeffs), Fraction(0))
        return total < 0 or (total == 0 and not self.strict)

    def negated(self) -> "LinIneq":
        return lin({n: -c for n, c in self.coeffs}, -self.constant, not self.strict)

    def render(self) -> str:
        parts = [f"{c}·{name}" for name, c in self.coeffs]
        parts.append(str(self.constant))
        op = "<" if self.strict else "<="
        return f"{' + '.join(parts)} {op} 0"


def lin(coeffs: Mapping[str, Fraction | int], constant: Fraction | int,
        strict: bool) -> LinIneq:
    items = sorted((n, Fraction(c)) for n, c in coeffs.items() if c != 0)
    constant = Fraction(constant)
    if not items:
        sign = Fraction(0) if constant == 0 else Fraction(1 if constant > 0 else -1)
        return LinIneq((), sign, strict)
    nums = [abs(c.numerator) for _, c in items]
    dens = [c.denominator for _, c in items]
    if constant != 0:
        nums.append(abs(constant.numerator))
        dens.append(constant.denominator)
    factor = Fraction(math.lcm(*dens), math.gcd(*nums))
    return LinIneq(tuple((n, c * factor) for n, c in items),
                   constant * factor, strict)


def atom_to_ineq(a: GuardAtom) -> LinIneq:
    if a.op in ("<", "<="):
        coeffs: dict[str, int] = {a.clock: 1}
        for p in a.params:
            coeffs[p] = -1
        return lin(coeffs, -a.constant, a.op == "<")
    coeffs = {a.clock: -1}
    for p in a.params:
        coeffs[p] = 1
    return lin(coeffs, a.constant, a.op == ">")


@dataclass(frozen=True)
class Polyhedron:
    clocks: tuple[str, ...]
    params: tuple[str, ...]
    ineqs: tuple[LinIneq, ...]

    @property
    def vars(self) -> tuple[str, ...]:
        return self.clocks + self.params

    def debug_strings(self) -> tuple[str, ...]:
        return tuple(sorted(i.render() for i in self.ineqs))

    def __str__(self) -> str:
        return "{" + ", ".join(self.debug_strings()) + "}"


def _dominance_prune(ineqs: Iterable[LinIneq]) -> tuple[LinIneq, ...]:
    """Keep only the tightest inequality per coefficient vector."""
    best: dict[tuple, LinIneq] = {}
    for i in ineqs:
        if i.trivially_true:
            continue
        cur = best.get(i.coeffs)
        if cur is None or (i.constant, i.strict) > (cur.constant, cur.strict):
            best[i.coeffs] = i
    return tuple(sorted(best.values(),
                        key=lambda i: (i.coeffs, i.constant, i.strict)))


def make(clocks: Iterable[str], params: Iterable[str],
         ineqs: Iterable[LinIneq]) -> Polyhedron:
    clocks = tuple(clocks)
    params = tuple(params)
    base = [lin({v: -1}, 0, False) for v in clocks + params]
    return Polyhedron(clocks, params, _dominance_prune(base + list(ineqs)))


def top(clocks: Iterable[str], params: Iterable[str]) -> Polyhedron:
    return make(clocks, params, ())


def origin(clocks: Iterable[str], params: Iterable[str]) -> Polyhedron:
    return make(clocks, params,
                [lin({x: 1}, 0, False) for x in clocks])


def from_guard(clocks: Iterable[str], params: Iterable[str],
               guard: Guard) -> Polyhedron:
    return make(clocks, params, [atom_to_ineq(a) for a in guard])


def bounds_box(clocks: Iterable[str], params: Iterable[str],
               bounds: Mapping[str, Interval]) -> Polyhedron:
    ineqs = []
    for p, iv in bounds.items():
        ineqs.append(lin({p: -1}, iv.inf, iv.inf_open))
        ineqs.append(lin({p: 1}, -iv.sup, iv.sup_open))
    return make(clocks, params, ineqs)


# ---------------------------------------------------------------------------
# Fourier-Motzkin


def _eliminate(ineqs: Iterable[LinIneq], var: str) -> list[LinIneq]:
    pos: list[LinIneq] = []
    neg: list[LinIneq] = []
    rest: list[LinIneq] = []
    for i in ineqs:
        c = i.coeff(var)
        if c > 0:
            pos.append(i)
        elif c < 0:
            neg.append(i)
        else:
            rest.append(i)
    for a, b in itertools.product(pos, neg):
        ca, cb = a.coeff(var), b.coeff(var)
        coeffs: dict[str, Fraction] = {}
        for name, c in a.coeffs:
            if name != var:
                coeffs[name] = coeffs.get(name, Fraction(0)) + (-cb) * c
        for name, c in b.coeffs:
            if name != var:
                coeffs[name] = coeffs.get(name, Fraction(0)) + ca * c
        combined = lin(coeffs, (-cb) * a.constant + ca * b.constant,
                       a.strict or b.strict)
        if not combined.trivially_true:
            rest.append(combined)
    return list(_dominance_prune(rest))


# All variables (clocks, parameters, the elapse variable) are nonnegative,
# so satisfiability runs over the nonnegative orthant.  Strict faces are
# handled by maximizing a slack eps shared by every strict row: the system
# has a point iff the relaxation is feasible with eps > 0.

_ZERO = Fraction(0)
_ONE = Fraction(1)


def _simplex_max(rows: list[list[Fraction]], rhs: list[Fraction],
                 goal: list[Fraction]) -> Fraction | None:
    """Maximize goal.x subject to rows.x <= rhs, x >= 0 (exact dictionary
    simplex with Bland's rule).  Returns None when infeasible; the goal
    must be bounded above on the feasible set."""
    m, n = len(rows), len(goal)
    nonbasic = list(range(n))
    basis = list(range(n, n + m))
    tab = [[-v for v in row] for row in rows]
    rhs = list(rhs)

    def pivot(r: int, e: int, obj: list[Fraction], objv: Fraction) -> Fraction:
        piv = tab[r][e]
        new_row = [-v / piv for v in tab[r]]
        new_row[e] = _ONE / piv
        new_rhs = -rhs[r] / piv
        for i in range(m):
            if i == r:
                continue
            factor = tab[i][e]
            if factor == 0:
                continue
            row = tab[i]
            for j in range(len(new_row)):
                row[j] = (factor * new_row[j] if j == e
                          else row[j] + factor * new_row[j])
            rhs[i] += factor * new_rhs
        factor = obj[e]
        if factor != 0:
            for j in range(len(new_row)):
                obj[j] = (factor * new_row[j] if j == e
                          else obj[j] + factor * new_row[j])
            objv += factor * new_rhs
        tab[r], rhs[r] = new_row, new_rhs
        basis[r], nonbasic[e] = nonbasic[e], basis[r]
        return objv

    def run(obj: list[Fraction], objv: Fraction) -> Fraction:
        while True:
            enter = None
            for j in range(len(obj)):
                if obj[j] > 0 and (enter is None
                                   or nonbasic[j] < nonbasic[enter]):
                    enter = j
            if enter is None:
                return objv
            leave = None
            best = None
            for i in range(m):
                coeff = tab[i][enter]
                if coeff < 0:
                    limit = -rhs[i] / coeff
                    if (best is None or limit < best
                            or (limit == best and basis[i] < basis[leave])):
                        best, leave = limit, i
            assert leave is not None, "objective unbounded"
            objv = pivot(leave, enter, obj, objv)

    if any(v < 0 for v in rhs):
        aux = n + m
        nonbasic.append(aux)
        for row in tab:
            row.append(_ONE)
        obj = [_ZERO] * n + [Fraction(-1)]
        worst = min(range(m), key=lambda i: (rhs[i], basis[i]))
        objv = pivot(worst, n, obj, _ZERO)
        objv = run(obj, objv)
        if objv < 0:
            return None
        if aux in basis:
            r = basis.index(aux)
            for e in range(len(nonbasic)):
                if tab[r][e] != 0:
                    pivot(r, e, obj, objv)
                    break
            else:
                del tab[r], rhs[r], basis[r]
                m -= 1
        if aux in nonbasic:
            e = nonbasic.index(aux)
            del nonbasic[e]
            for row in tab:
                del row[e]

    def cost(vid: int) -> Fraction:
        return goal[vid] if vid < n else _ZERO

    objv = sum((cost(basis[i]) * rhs[i] for i in range(m)), _ZERO)
    obj = [cost(nonbasic[j])
           + sum((cost(basis[i]) * tab[i][j] for i in range(m)), _ZERO)
           for j in range(len(nonbasic))]
    return run(obj, objv)


def _satisfiable(ineqs: tuple[LinIneq, ...]) -> bool:
    names: list[str] = sorted({n for i in ineqs for n, _ in i.coeffs})
    col = {name: j for j, name in enumerate(names)}
    has_strict = False
    rows = []
    rhs = []
    for i in ineqs:
        if i.trivially_false:
            return False
        if i.trivially_true:
            continue
        row = [_ZERO] * (len(names) + 1)
        for name, c in i.coeffs:
            row[col[name]] = c
        if i.strict:
            has_strict = True
            row[len(names)] = _ONE
        rows.append(row)
        rhs.append(Fraction(-i.constant))
    if not rows:
        return True
    if not has_strict:
        rows = [row[:-1] for row in rows]
        return _simplex_max(rows, rhs, [_ZERO] * len(names)) is not None
    rows.append([_ZERO] * len(names) + [_ONE])
    rhs.append(_ONE)
    goal = [_ZERO] * len(names) + [_ONE]
    opt = _simplex_max(rows, rhs, goal)
    return opt is not None and opt > 0


@lru_cache(maxsize=65536)
def _ineqs_empty(ineqs: tuple[LinIneq, ...]) -> bool:
    return not _satisfiable(ineqs)


_SORT_KEY = lambda i: (i.coeffs, i.constant, i.strict)  # noqa: E731
_FALSE = lin({}, 1, False)
_REDUCE_ABOVE = 18


@lru_cache(maxsize=65536)
def _minimized_ineqs(ineqs: tuple[LinIneq, ...]) -> tuple[LinIneq, ...]:
    """Drop every inequality implied by the rest (within the orthant).
    Wide rows are tried first so the kept description prefers the simple
    single-variable and difference faces."""
    if _ineqs_empty(ineqs):
        return (_FALSE,)
    work = list(ineqs)
    for i in sorted(ineqs, key=lambda q: (-len(q.coeffs),) + _SORT_KEY(q)):
        if len(work) == 1:
            break
        others = [q for q in work if q != i]
        if _ineqs_empty(tuple(sorted(others + [i.negated()], key=_SORT_KEY))):
            work = others
    return tuple(work)


def minimized(c: Polyhedron) -> Polyhedron:
    return Polyhedron(c.clocks, c.params, _minimized_ineqs(c.ineqs))


def is_empty(c: Polyhedron) -> bool:
    return _ineqs_empty(c.ineqs)


def eliminate_vars(c: Polyhedron, names: Iterable[str]) -> list[LinIneq]:
    # Nonnegativity rows dropped by minimization must be materialized again:
    # projection is computed in real space, soundness needs the orthant.
    work = list(make(c.clocks, c.params, c.ineqs).ineqs)
    for v in names:
        work = _eliminate(work, v)
        if len(work) > _REDUCE_ABOVE:
            work = list(_minimized_ineqs(tuple(work)))
    return work


# ---------------------------------------------------------------------------
# Operators


def intersect(a: Polyhedron, b: Polyhedron) -> Polyhedron:
    assert a.vars == b.vars, "universe mismatch"
    return make(a.clocks, a.params, a.ineqs + b.ineqs)


def conjoin_guard(c: Polyhedron, guard: Guard) -> Polyhedron:
    return make(c.clocks, c.params,
                c.ineqs + tuple(atom_to_ineq(a) for a in guard))


def _shift(c: Polyhedron, direction: int) -> Polyhedron:
    """Shared body of time_elapse (direction -1: x -> x - d) and
    time_past (direction +1: x -> x + d)."""
    clockset = set(c.clocks)
    shifted = []
    for i in make(c.clocks, c.params, c.ineqs).ineqs:
        cd = sum((cf for name, cf in i.coeffs if name in clockset), Fraction(0))
        cd = direction * cd
        if cd == 0:
            shifted.append(i)
        else:
            coeffs = dict(i.coeffs)
            coeffs[_ELAPSE_VAR] = cd
            shifted.append(lin(coeffs, i.constant, i.strict))
    shifted.append(lin({_ELAPSE_VAR: -1}, 0, False))
    out = make(c.clocks, c.params, _eliminate(shifted, _ELAPSE_VAR))
    if len(out.ineqs) > _REDUCE_ABOVE:
        out = minimized(out)
    return out


def time_elapse(c: Polyhedron) -> Polyhedron:
    return _shift(c, -1)


def time_past(c: Polyhedron) -> Polyhedron:
    return _shift(c, +1)


def reset(c: Polyhedron, clocks: Iterable[str]) -> Polyhedron:
    clocks = list(clocks)
    work = list(make(c.clocks, c.params, c.ineqs).ineqs)
    for x in clocks:
        work = _eliminate(work, x)
        if len(work) > _REDUCE_ABOVE:
            work = list(_minimized_ineqs(tuple(work)))
    work.extend(lin({x: 1}, 0, False) for x in clocks)
    return make(c.clocks, c.params, work)


def unreset_invariant(inv: Guard, resets: Iterable[str],
                      clocks: Iterable[str], params: Iterable[str]) -> Polyhedron:
    """The invariant with reset clocks substituted by 0: the condition the
    pre-reset valuation must satisfy for the post-reset one to meet inv."""
    resets = set(resets)
    ineqs = []
    for a in inv:
        i = atom_to_ineq(a)
        if a.clock in resets:
            coeffs = {n: c for n, c in i.coeffs if n != a.clock}
            ineqs.append(lin(coeffs, i.constant, i.strict))
        else:
            ineqs.append(i)
    return make(clocks, params, ineqs)


def project_params(c: Polyhedron) -> Polyhedron:
    work = eliminate_vars(c, c.clocks)
    return minimized(make((), c.params, work))


def contains(c: Polyhedron, point: Mapping[str, Fraction]) -> bool:
    return all(i.evaluate(point) for i in c.ineqs)


def includes(outer: Polyhedron, inner: Polyhedron) -> bool:
    """inner is a subset of outer (both may have open faces)."""
    assert outer.vars == inner.vars, "universe mismatch"
    if _ineqs_empty(inner.ineqs):
        return True
    for i in outer.ineqs:
        system = tuple(sorted(set(inner.ineqs) | {i.negated()},
                              key=lambda q: (q.coeffs, q.constant, q.strict)))
        if not _ineqs_empty(system):
            return False
    return True


def equal(a: Polyhedron, b: Polyhedron) -> bool:
    return includes(a, b) and includes(b, a)


def quick_inclusion(outer: Polyhedron, inner: Polyhedron) -> bool | None:
    """Decide inner <= outer by matching coefficient vectors alone, or None
    when some outer face has no matched inner face.

    The False answer requires inner to be minimized and nonempty: each of
    its faces is then supporting (attained when closed, approached when
    strict), so an outer bound strictly tighter on the same normal vector
    proves a point of inner escapes.  The True answer is sound for any
    operands, being a face by face implication.
    """
    by_coeffs = {i.coeffs: i for i in inner.ineqs}
    decided = True
    for o in outer.ineqs:
        i = by_coeffs.get(o.coeffs)
        if i is None:
            decided = False
            continue
        if o.constant > i.constant or (
                o.constant == i.constant and o.strict and not i.strict):
            return False
    return True if decided else None


@dataclass(frozen=True)
class PolyUnion:
    disjuncts: tuple[Polyhedron, ...]

    @property
    def empty(self) -> bool:
        return not self.disjuncts

    def contains(self, point: Mapping[str, Fraction]) -> bool:
        return any(contains(d, point) for d in self.disjuncts)


def union_of(pieces: Iterable[Polyhedron]) -> PolyUnion:
    return PolyUnion(tuple(p for p in pieces if not is_empty(p)))


def difference(c: Polyhedron, d: Polyhedron) -> PolyUnion:
    """c minus d, as a union of polyhedra (one per violated face of d)."""
    assert c.vars == d.vars, "universe mismatch"
    pieces = []
    for i in d.ineqs:
        piece = make(c.clocks, c.params, c.ineqs + (i.negated(),))
        pieces.append(piece)
    return union_of(pieces)


def union_difference(u: PolyUnion | Polyhedron, v: PolyUnion) -> PolyUnion:
    pieces = [u] if isinstance(u, Polyhedron) else list(u.disjuncts)
    for b in v.disjuncts:
        pieces = [q for p in pieces for q in difference(p, b).disjuncts]
    return union_of(pieces)


# ---------------------------------------------------------------------------
# Parametric-zone checks and integer points


def zone_violation(c: Polyhedron) -> str | None:
    """None if every constraint is rectangular/diagonal with unit clock
    coefficients; otherwise a description of the offending inequality."""
    clockset = set(c.clocks)
    for i in c.ineqs:
        cc = [(n, cf) for n, cf in i.coeffs if n in clockset]
        if not cc:
            continue
        if len(cc) == 1:
            if abs(cc[0][1]) != 1:
                return f"non-unit clock coefficient in {i.render()}"
        elif len(cc) == 2:
            if {cc[0][1], cc[1][1]} != {Fraction(1), Fraction(-1)}:
                return f"non-difference clock pair in {i.render()}"
        else:
            return f"more than two clocks in {i.render()}"
    return None


_INF = None


def _bound_add(a, b):
    if a is _INF or b is _INF:
        return _INF
    return (a[0] + b[0], a[1] or b[1])


def _bound_less(a, b) -> bool:
    if b is _INF:
        return a is not _INF
    if a is _INF:
        return False
    return a[0] < b[0] or (a[0] == b[0] and a[1] and not b[1])


def _dbm_canonical(n: int, dbm: list[list]) -> bool:
    """Shortest-path closure in place; False when a negative cycle exists."""
    for k in range(n):
        for i in range(n):
            if dbm[i][k] is _INF:
                continue
            for j in range(n):
                cand = _bound_add(dbm[i][k], dbm[k][j])
                if _bound_less(cand, dbm[i][j]):
                    dbm[i][j] = cand
        for i in range(n):
            if _bound_less(dbm[i][i], (Fraction(0), False)):
                return False
    return True


def _clock_system_has_integer_point(clocks: tuple[str, ...],
                                    ineqs: list[LinIneq]) -> bool:
    index = {x: k + 1 for k, x in enumerate(clocks)}
    n = len(clocks) + 1
    dbm: list[list] = [[_INF] * n for _ in range(n)]
    for i in range(n):
        dbm[i][i] = (Fraction(0), False)
    for k in range(1, n):
        dbm[0][k] = (Fraction(0), False)

    def update(i: int, j: int, bound):
        if _bound_less(bound, dbm[i][j]):
            dbm[i][j] = bound

    for i in ineqs:
        if i.trivially_false:
            return False
        if not i.coeffs:
            continue
        if len(i.coeffs) == 1:
            (x, a), = i.coeffs
            if a > 0:
                update(index[x], 0, (-i.constant / a, i.strict))
            else:
                update(0, index[x], (i.constant / -a, i.strict))
        else:
            (x, a), (y, b) = i.coeffs
            if a > 0:
                update(index[x], index[y], (-i.constant, i.strict))
            else:
                update(index[y], index[x], (-i.constant, i.strict))
    if not _dbm_canonical(n, dbm):
        return False
    for i in range(n):
        for j in range(n):
            if dbm[i][j] is _INF:
                continue
            value, strict = dbm[i][j]
            tightened = math.ceil(value) - 1 if strict else math.floor(value)
            dbm[i][j] = (Fraction(tightened), False)
    return _dbm_canonical(n, dbm)


def has_integer_point(c: Polyhedron, bounds: Mapping[str, Interval]) -> bool:
    """True iff c contains a point with all-integer clock and parameter
    coordinates, for some integer parameter valuation in the bounds box."""
    viol = zone_violation(c)
    if viol is not None:
        raise NotAZoneError(viol)
    for p in c.params:
        if p not in bounds:
            raise UnboundedError(f"parameter {p!r} has no bounds")
    if _ineqs_empty(c.ineqs):
        return False
    ranges = [bounds[p].integers() for p in c.params]
    for combo in itertools.product(*ranges):
        valuation = dict(zip(c.params, (Fraction(v) for v in combo)))
        folded = []
        feasible = True
        for i in c.ineqs:
            coeffs = {}
            const = i.constant
            for name, cf in i.coeffs:
                if name in valuation:
                    const += cf * valuation[name]
                else:
                    coeffs[name] = cf
            folded_i = lin(coeffs, const, i.strict)
            if folded_i.trivially_false:
                feasible = False
                break
            if not folded_i.trivially_true:
                folded.append(folded_i)
        if not feasible:
            continue
        if _clock_system_has_integer_point(c.clocks, folded):
            return True
    return False


# ---------------------------------------------------------------------------
# Deterministic sampling


def _interval_of(ineqs: list[LinIneq], var: str):
    """Bounds on var from inequalities mentioning only var."""
    lo = (Fraction(0), False)
    hi = _INF
    for i in ineqs:
        c = i.coeff(var)
        if c == 0:
            continue
        value = -i.constant / c
        if c > 0:
            if hi is _INF or value < hi[0] or (value == hi[0] and i.strict):
                hi = (value, i.strict)
        else:
            if value > lo[0] or (value == lo[0] and i.strict):
                lo = (value, i.strict)
    return lo, hi


def sample_point(c: Polyhedron, t: Fraction = Fraction(1, 2)) -> dict[str, Fraction] | None:
    """A rational point of c, or None when empty.  Each coordinate sits at
    position t of its feasible interval (lower bound + 1 when unbounded
    above; the boundary when the interval is a single point)."""
    if is_empty(c):
        return None
    assert 0 < t < 1
    point: dict[str, Fraction] = {}
    work = list(make(c.clocks, c.params, c.ineqs).ineqs)
    order = list(c.vars)
    for k, v in enumerate(order):
        narrowed = list(work)
        for other in order[k + 1:]:
            narrowed = _eliminate(narrowed, other)
        lo, hi = _interval_of(narrowed, v)
        if hi is _INF:
            value = lo[0] + 1
        elif lo[0] == hi[0]:
            value = lo[0]
        else:
            value = lo[0] + t * (hi[0] - lo[0])
        point[v] = value
        folded = []
        for i in work:
            cf = i.coeff(v)
            if cf == 0:
                folded.append(i)
                continue
            coeffs = {n: c2 for n, c2 in i.coeffs if n != v}
            folded.append(lin(coeffs, i.constant + cf * value, i.strict))
        work = [i for i in folded if not i.trivially_true]
    assert contains(c, point)
    return point
