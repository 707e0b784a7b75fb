"""Two-counter machines and their clock encodings.

A machine program is compiled into a three-clock, one-parameter model in
which a run from the initial location to the final location exists exactly
for the parameter values that let the machine halt within the counter
budget the value affords.  Counter c is stored as clock value 1 - a*c on
entry to each instruction location, with x = 0 and a the parameter.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import ModelSyntaxError, UnknownIdentifierError
from .model import Edge, Guard, Interval, Location, Pta, atom, eq_atoms

CLOSED = "closed"
STRICT = "strict"

INIT_LOCATION = "l0"
FINAL_LOCATION = "qprime_halt"

_COUNTERS = ("C1", "C2")
_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


@dataclass(frozen=True)
class Inc:
    state: str
    counter: str
    target: str


@dataclass(frozen=True)
class DecOrZero:
    state: str
    counter: str
    dec_target: str
    zero_target: str


@dataclass(frozen=True)
class Halt:
    state: str


Instruction = Inc | DecOrZero | Halt


@dataclass(frozen=True)
class TwoCounterMachine:
    name: str
    init: str
    instructions: tuple[Instruction, ...]

    def __post_init__(self):
        states = [i.state for i in self.instructions]
        if len(set(states)) != len(states):
            raise ModelSyntaxError("duplicate machine state")
        known = set(states)
        if self.init not in known:
            raise UnknownIdentifierError(f"unknown initial state {self.init!r}")
        for i in self.instructions:
            targets = ()
            if isinstance(i, Inc):
                targets = (i.target,)
            elif isinstance(i, DecOrZero):
                targets = (i.dec_target, i.zero_target)
            for t in targets:
                if t not in known:
                    raise UnknownIdentifierError(
                        f"unknown target state {t!r} from {i.state!r}")

    def instruction(self, state: str) -> Instruction:
        for i in self.instructions:
            if i.state == state:
                return i
        raise KeyError(state)


@dataclass(frozen=True)
class SimReport:
    halted: bool
    steps: int
    counters: tuple[int, int]
    max_counter: int
    budget_hit: bool
    trace: tuple[str, ...]


def parse_machine(text: str, name: str = "machine") -> TwoCounterMachine:
    """Parse a program, one instruction per line:

        q0: inc C1 -> q1
        q1: decz C2 -> q2 | q0
        q2: halt

    '#' starts a comment; the first instruction's state is initial.
    """
    instructions: list[Instruction] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        where = f"line {lineno}"
        head, sep, body = line.partition(":")
        state = head.strip()
        if not sep or not _NAME_RE.match(state):
            raise ModelSyntaxError(f"expected 'state: instruction' at {where}")
        body = body.strip()
        if body == "halt":
            instructions.append(Halt(state))
            continue
        m = re.match(r"(inc|decz)\s+(\w+)\s*->\s*(.*)\Z", body)
        if not m:
            raise ModelSyntaxError(f"unrecognized instruction at {where}")
        kind, counter, rest = m.groups()
        if counter not in _COUNTERS:
            raise ModelSyntaxError(f"unknown counter {counter!r} at {where}")
        if kind == "inc":
            target = rest.strip()
            if not _NAME_RE.match(target):
                raise ModelSyntaxError(f"bad target at {where}")
            instructions.append(Inc(state, counter, target))
        else:
            dec_t, sep, zero_t = (part.strip() for part in rest.partition("|"))
            if not sep or not _NAME_RE.match(dec_t) or not _NAME_RE.match(zero_t):
                raise ModelSyntaxError(
                    f"decz needs 'dec_target | zero_target' at {where}")
            instructions.append(DecOrZero(state, counter, dec_t, zero_t))
    if not instructions:
        raise ModelSyntaxError("empty program")
    return TwoCounterMachine(name, instructions[0].state, tuple(instructions))


def simulate(m: TwoCounterMachine, max_steps: int = 100000) -> SimReport:
    """Run the (deterministic) machine from zero counters."""
    counters = {"C1": 0, "C2": 0}
    state = m.init
    trace = [state]
    max_counter = 0
    for step in range(max_steps):
        inst = m.instruction(state)
        if isinstance(inst, Halt):
            return SimReport(True, step, (counters["C1"], counters["C2"]),
                             max_counter, False, tuple(trace))
        if isinstance(inst, Inc):
            counters[inst.counter] += 1
            max_counter = max(max_counter, counters[inst.counter])
            state = inst.target
        else:
            if counters[inst.counter] == 0:
                state = inst.zero_target
            else:
                counters[inst.counter] -= 1
                state = inst.dec_target
        trace.append(state)
    return SimReport(False, max_steps, (counters["C1"], counters["C2"]),
                     max_counter, True, tuple(trace))


def _counter_clock(counter: str) -> tuple[str, str]:
    """Clock holding the counter and the other counter's clock."""
    return ("y", "z") if counter == "C1" else ("z", "y")


def compile_to_pta(m: TwoCounterMachine, variant: str = CLOSED) -> Pta:
    """Compile to the three-clock encoding.

    The closed variant bounds a in [0, 1] and uses only non-strict atoms;
    the strict variant is unbounded and forces a > 0 by a strict guard at
    initialization.  Both reach FINAL_LOCATION exactly when the machine
    halts and a is small enough for the counters used.
    """
    if variant not in (CLOSED, STRICT):
        raise ValueError(f"unknown variant {variant!r}")
    names = [INIT_LOCATION, "l1"]
    edges: list[Edge] = []

    def e(src: str, tgt: str, guard: Guard = (), resets: tuple[str, ...] = ()):
        edges.append(Edge(src, tgt, "sigma", guard, frozenset(resets)))

    if variant == STRICT:
        e(INIT_LOCATION, "l1", (atom("x", "<", ("a",)),))
    else:
        e(INIT_LOCATION, "l1")
    e("l1", m.init, eq_atoms("x", (), 1), ("x",))

    halted = False
    for inst in m.instructions:
        q = inst.state
        names.append(q)
        if isinstance(inst, Halt):
            halted = True
            e(q, "q1halt", (), ("y",))
            continue
        u, w = _counter_clock(inst.counter)
        entry = q + "_l1"
        if isinstance(inst, Inc):
            l2, l2b, l3 = q + "_l2", q + "_l2b", q + "_l3"
            names += [entry, l2, l2b, l3]
            e(q, entry, eq_atoms("x"))
            e(entry, l2, eq_atoms(w, (), 1), (w,))
            e(l2, l3, eq_atoms(u, ("a",), 1), (u,))
            e(entry, l2b, eq_atoms(u, ("a",), 1), (u,))
            e(l2b, l3, eq_atoms(w, (), 1), (w,))
            e(l3, inst.target, eq_atoms("x", (), 1), ("x",))
        else:
            a2, a3, b2, b3 = (q + s for s in ("_a2", "_a3", "_b2", "_b3"))
            names += [entry, a2, a3, b2, b3]
            e(q, inst.zero_target, eq_atoms(u, (), 1) + eq_atoms("x"))
            if variant == STRICT:
                e(q, entry, eq_atoms("x") + (atom(u, "<", (), 1),))
                test = eq_atoms(u, (), 1)
            else:
                e(q, entry, eq_atoms("x"))
                test = eq_atoms(u, (), 1) + (atom("x", ">=", ("a",)),)
            e(entry, a2, eq_atoms(w, ("a",), 1), (w,))
            e(a2, a3, test, (u,))
            e(a3, inst.dec_target, eq_atoms("x", ("a",), 1), ("x",))
            e(entry, b2, test, (u,))
            e(b2, b3, eq_atoms(w, ("a",), 1), (w,))
            e(b3, inst.dec_target, eq_atoms("x", ("a",), 1), ("x",))

    if halted:
        names += ["q1halt", FINAL_LOCATION]
        e("q1halt", "q1halt", eq_atoms("x", ("a",)), ("x",))
        e("q1halt", FINAL_LOCATION, eq_atoms("x") + (atom("y", ">=", (), 1),))

    if len(set(names)) != len(names):
        raise ModelSyntaxError(
            "machine state names collide with generated locations")
    bounds = ((("a", Interval(0, 1)),) if variant == CLOSED else None)
    return Pta(
        name=f"{m.name}_{variant}",
        clocks=("x", "y", "z"),
        parameters=("a",),
        locations=tuple(Location(n) for n in names),
        init=INIT_LOCATION,
        edges=tuple(edges),
        bounds=bounds,
    )
