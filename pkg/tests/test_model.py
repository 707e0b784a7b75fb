"""Model layer: JSON parsing and serialization, atom grammar, subclass
classification, instantiation and extreme valuations."""

import json
from fractions import Fraction

import pytest

from parataur.errors import (
    MalformedBoundsError,
    ModelSyntaxError,
    NotLUError,
    OpenBoundsError,
    UnboundedUniversalityError,
    UnknownIdentifierError,
)
from parataur.model import (
    Interval,
    ParamValuation,
    atom,
    classify,
    eq_atoms,
    extreme_valuation,
    instantiate,
    instantiate_extreme,
    parse_atom,
    parse_model,
    render_atom,
    serialize,
)
from conftest import build, edge_xp, loop_xy, open_unit, xp_selfloop

LOOP_JSON = json.dumps({
    "name": "loop_xy",
    "clocks": ["x", "y"],
    "parameters": [{"name": "p", "min": 0, "max": 3}],
    "locations": [{"name": "l0"}],
    "init": "l0",
    "edges": [{"from": "l0", "to": "l0", "action": "sigma",
               "guard": ["x = 1", "y <= p"], "resets": ["x"]}],
})


def test_parse_model_loop_fixture():
    pta = parse_model(LOOP_JSON)
    assert pta.clocks == ("x", "y")
    assert pta.parameters == ("p",)
    assert pta.bounds == (("p", Interval(0, 3)),)
    (edge,) = pta.edges
    assert edge.resets == frozenset({"x"})
    # equality guards expand to a <= / >= pair
    ops = sorted(a.op for a in edge.guard)
    assert ops == ["<=", "<=", ">="]


def test_serialize_roundtrip():
    pta = parse_model(LOOP_JSON)
    again = parse_model(serialize(pta))
    assert again == pta
    assert parse_model(serialize(xp_selfloop())) == xp_selfloop()
    assert parse_model(serialize(open_unit())) == open_unit()


def test_parse_atom_accepts_sums_and_equality():
    (a,) = parse_atom("x <= p + q + 2", ("x",), ("p", "q"))
    assert a.params == frozenset({"p", "q"}) and a.constant == 2
    pair = parse_atom("x = 1", ("x",), ())
    assert {a.op for a in pair} == {"<=", ">="}
    assert render_atom(a) == "x <= p + q + 2"


def test_parse_atom_rejects_bad_input():
    with pytest.raises(ModelSyntaxError):
        parse_atom("2x <= 1", ("x",), ())
    with pytest.raises(ModelSyntaxError):
        parse_atom("x <= 2p", ("x",), ("p",))
    with pytest.raises(ModelSyntaxError):
        parse_atom("x <= p + p", ("x",), ("p",))
    with pytest.raises(UnknownIdentifierError):
        parse_atom("z <= 1", ("x",), ())
    with pytest.raises(UnknownIdentifierError):
        parse_atom("x <= r", ("x",), ("p",))


def test_parse_model_error_paths():
    with pytest.raises(ModelSyntaxError):
        parse_model("not json")
    with pytest.raises(ModelSyntaxError):
        parse_model(json.dumps({"clocks": ["x"]}))
    doc = json.loads(LOOP_JSON)
    doc["parameters"] = [{"name": "p", "min": 0}]
    with pytest.raises(MalformedBoundsError):
        parse_model(json.dumps(doc))
    doc = json.loads(LOOP_JSON)
    doc["init"] = "nowhere"
    with pytest.raises(UnknownIdentifierError):
        parse_model(json.dumps(doc))


def test_interval_membership_and_integers():
    iv = Interval(0, 2, inf_open=True)
    assert not iv.contains(Fraction(0))
    assert iv.contains(Fraction(1, 2))
    assert list(iv.integers()) == [1, 2]
    assert not iv.closed
    with pytest.raises(MalformedBoundsError):
        Interval(2, 1)
    with pytest.raises(MalformedBoundsError):
        Interval(1, 1, sup_open=True)


# ---------------------------------------------------------------------------
# classification


def test_classify_loop_fixture_is_closed_bounded_lu():
    cls = classify(loop_xy())
    assert cls.lu_partition == (frozenset(), frozenset({"p"}))
    assert cls.is_closed and cls.is_bounded and cls.bounds_all_closed
    assert not cls.is_reset_pta
    assert cls.ip_sufficient


def test_classify_equality_on_parameter_is_not_lu():
    cls = classify(xp_selfloop())
    assert cls.lu_partition is None
    assert cls.is_reset_pta
    assert cls.ip_sufficient


def test_classify_strict_model_not_ip_sufficient():
    cls = classify(open_unit())
    assert not cls.is_closed
    assert cls.lu_partition == (frozenset(), frozenset())
    assert not cls.ip_sufficient


def test_classify_unused_parameter_defaults_to_lower():
    pta = build(clocks=("x",), params=("p", "q"),
                edges=((("l0", "l0", (atom("x", "<=", ("q",)),), ("x",)),)),
                bounds=(("p", Interval(0, 1)), ("q", Interval(0, 1))))
    cls = classify(pta)
    assert cls.lu_partition == (frozenset({"p"}), frozenset({"q"}))


def test_classify_unbounded_parameterless():
    pta = build(edges=(("l0", "l0", (), ("x",)),))
    cls = classify(pta)
    assert cls.is_bounded and cls.bounds_all_closed


def test_classify_open_bounds_flagged():
    pta = build(params=("p",),
                edges=((("l0", "l0", (atom("x", "<=", ("p",)),), ("x",)),)),
                bounds=(("p", Interval(0, 1, sup_open=True)),))
    cls = classify(pta)
    assert cls.is_bounded and not cls.bounds_all_closed


# ---------------------------------------------------------------------------
# instantiation


def test_instantiate_integer_valuation():
    ta = instantiate(edge_xp(), ParamValuation.of({"p": 2}))
    assert ta.scale == 1
    (edge,) = ta.edges
    assert sorted((a.op, a.constant) for a in edge.guard) == [("<=", 2), (">=", 2)]


def test_instantiate_rational_valuation_scales():
    ta = instantiate(edge_xp(), ParamValuation.of({"p": Fraction(1, 2)}))
    assert ta.scale == 2
    (edge,) = ta.edges
    assert sorted((a.op, a.constant) for a in edge.guard) == [("<=", 1), (">=", 1)]


def test_instantiate_requires_full_domain():
    with pytest.raises(UnknownIdentifierError):
        instantiate(edge_xp(), ParamValuation.of({}))


def test_extreme_valuation_bounded():
    pta = loop_xy()
    assert extreme_valuation(pta, "min_lower_max_upper") == {"p": Fraction(3)}
    assert extreme_valuation(pta, "max_lower_min_upper") == {"p": Fraction(0)}


def test_extreme_valuation_unbounded_upper_is_stripped():
    pta = build(clocks=("x",), params=("q",),
                locs=(("l0", ()), ("l1", ())),
                edges=((("l0", "l1", (atom("x", ">=", constant=1),
                                      atom("x", "<=", ("q",))), ()),)))
    assert extreme_valuation(pta, "min_lower_max_upper") == {"q": None}
    ta = instantiate_extreme(pta, "min_lower_max_upper")
    (edge,) = ta.edges
    assert [(a.op, a.constant) for a in edge.guard] == [(">=", 1)]
    with pytest.raises(UnboundedUniversalityError):
        extreme_valuation(pta, "max_lower_min_upper")


def test_extreme_valuation_rejects_non_lu_and_open_bounds():
    with pytest.raises(NotLUError):
        extreme_valuation(xp_selfloop(), "min_lower_max_upper")
    pta = build(params=("p",),
                edges=((("l0", "l0", (atom("x", "<=", ("p",)),), ("x",)),)),
                bounds=(("p", Interval(0, 1, sup_open=True)),))
    with pytest.raises(OpenBoundsError):
        extreme_valuation(pta, "min_lower_max_upper")


def test_eq_atoms_pair():
    pair = eq_atoms("x", ("p",), 1)
    assert {a.op for a in pair} == {"<=", ">="}
    assert all(a.params == frozenset({"p"}) and a.constant == 1 for a in pair)
