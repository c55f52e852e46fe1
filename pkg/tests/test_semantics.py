import random

import pytest

from nnmdl.semantics import (
    FrameClass,
    ModelTooLargeError,
    NeighbourhoodModel,
    add_unit,
    check_frame_class,
    close_intersection,
    close_supplementation,
    interpret_concept,
    satisfies,
    truth_set_concept,
    truth_set_formula,
)
from nnmdl.syntax import (
    AtomicConcept,
    Bot,
    Box,
    BoxF,
    CI,
    DiaF,
    Exists,
    Not,
    Top,
    normalize,
    parse_formula,
)

from corpus import random_raw_formula_any

A = AtomicConcept("A")


def make_model(
    worlds,
    domains,
    concepts=None,
    roles=None,
    neighbourhoods=None,
    constant=False,
):
    return NeighbourhoodModel(
        worlds=tuple(worlds),
        constant_domain=constant,
        domains={w: frozenset(d) for w, d in domains.items()},
        concepts={
            w: {a: frozenset(m) for a, m in ext.items()}
            for w, ext in (concepts or {}).items()
        },
        roles={
            w: {r: frozenset(tuple(p) for p in pairs) for r, pairs in ext.items()}
            for w, ext in (roles or {}).items()
        },
        neighbourhoods={
            i: {w: frozenset(frozenset(s) for s in coll) for w, coll in per.items()}
            for i, per in (neighbourhoods or {}).items()
        },
    )


def single_world(neigh=None, a_ext=("d",)):
    return make_model(
        ["w"],
        {"w": {"d"}},
        concepts={"w": {"A": set(a_ext)}},
        neighbourhoods={1: {"w": neigh if neigh is not None else []}},
    )


# -- concept interpretation ---------------------------------------------------

def test_interpret_complement():
    model = single_world()
    assert interpret_concept(model, "w", Not(A)) == frozenset()


def test_interpret_box_via_truth_set():
    model = single_world(neigh=[{"w"}])
    assert interpret_concept(model, "w", Box(1, A)) == frozenset({"d"})


def test_interpret_box_missing_neighbourhood():
    model = single_world(neigh=[])
    assert interpret_concept(model, "w", Box(1, A)) == frozenset()


def test_interpret_unknown_world():
    with pytest.raises(ValueError, match="unknown world"):
        interpret_concept(single_world(), "v", A)


def test_interpret_modality_out_of_range():
    with pytest.raises(ValueError, match="out of range"):
        interpret_concept(single_world(), "w", Box(2, A))


def test_interpret_exists_two_world_table():
    model = make_model(
        ["u", "v"],
        {"u": {"d", "e"}, "v": {"d"}},
        concepts={"u": {"A": {"e"}}, "v": {"A": {"d"}}},
        roles={
            "u": {"r": [("d", "e"), ("e", "e")]},
            "v": {"r": [("d", "d")]},
        },
    )
    # Hand enumeration: at u, members with an r-successor in A = {d, e};
    # at v, d loops onto itself and d is in A.
    assert interpret_concept(model, "u", Exists("r", A)) == frozenset({"d", "e"})
    assert interpret_concept(model, "v", Exists("r", A)) == frozenset({"d"})
    assert interpret_concept(model, "u", Exists("r", Not(A))) == frozenset()


# -- truth sets ---------------------------------------------------------------

def test_truth_set_top_is_domain_membership():
    model = make_model(
        ["u", "v"],
        {"u": {"d", "e"}, "v": {"d"}},
    )
    assert truth_set_concept(model, "e", Top()) == frozenset({"u"})
    assert truth_set_concept(model, "d", Top()) == frozenset({"u", "v"})


def test_truth_set_bot_empty():
    model = single_world()
    assert truth_set_concept(model, "d", Bot()) == frozenset()


def test_truth_set_varying_domain_excludes_absent():
    model = make_model(
        ["u", "v"],
        {"u": {"d", "e"}, "v": {"d"}},
        concepts={"u": {"A": {"d", "e"}}, "v": {"A": {"d"}}},
    )
    assert truth_set_concept(model, "e", A) == frozenset({"u"})
    assert truth_set_concept(model, "e", Not(A)) == frozenset()


# -- formula satisfaction ------------------------------------------------------

def test_trivially_valid_inclusion():
    model = single_world()
    assert satisfies(model, "w", CI(Bot(), Top()))


def test_diamond_with_empty_neighbourhood():
    model = single_world(neigh=[])
    for text in ["(sub top (atom A))", "(not (sub top (atom A)))", "(sub top bot)"]:
        assert satisfies(model, "w", DiaF(1, parse_formula(text)))


def test_box_formula_single_world():
    psi = CI(Top(), A)
    model = single_world(neigh=[{"w"}])
    assert satisfies(model, "w", psi)
    assert satisfies(model, "w", BoxF(1, psi))
    model2 = single_world(neigh=[set()])
    assert not satisfies(model2, "w", BoxF(1, psi))


def test_satisfaction_invariant_under_normalization():
    rng = random.Random(13)
    model = make_model(
        ["u", "v"],
        {"u": {"d", "e"}, "v": {"d"}},
        concepts={"u": {"A": {"d"}, "B": {"e"}}, "v": {"A": {"d"}, "B": set()}},
        roles={"u": {"r": [("d", "e")]}, "v": {"r": []}},
        neighbourhoods={
            1: {"u": [{"u"}, {"u", "v"}], "v": [set()]},
            2: {"u": [], "v": [{"v"}]},
        },
    )
    for _ in range(300):
        phi = random_raw_formula_any(rng)
        for w in model.worlds:
            assert satisfies(model, w, phi) == satisfies(model, w, normalize(phi))


def test_formula_truth_set():
    model = make_model(
        ["u", "v"],
        {"u": {"d"}, "v": {"d"}},
        concepts={"u": {"A": {"d"}}, "v": {"A": set()}},
    )
    assert truth_set_formula(model, CI(Top(), A)) == frozenset({"u"})


# -- frame classes --------------------------------------------------------------

def two_world_model(neigh_w):
    return make_model(
        ["w", "v"],
        {"w": {"d"}, "v": {"d"}},
        neighbourhoods={1: {"w": neigh_w, "v": []}},
    )


def test_supplemented_counterexample():
    model = two_world_model([{"w"}])
    assert not check_frame_class(model, FrameClass.M)


def test_full_powerset_in_every_class():
    model = two_world_model([set(), {"w"}, {"v"}, {"w", "v"}])
    model.neighbourhoods[1]["v"] = model.neighbourhoods[1]["w"]
    for fc in (FrameClass.E, FrameClass.M, FrameClass.C, FrameClass.N):
        assert check_frame_class(model, fc)


def test_intersection_counterexample():
    model = two_world_model([{"w"}, {"v"}])
    assert not check_frame_class(model, FrameClass.C)


def test_unit_check_covers_all_worlds():
    model = two_world_model([{"w", "v"}])
    assert not check_frame_class(model, FrameClass.N)  # v lacks the unit
    model.neighbourhoods[1]["v"] = frozenset({frozenset({"w", "v"})})
    assert check_frame_class(model, FrameClass.N)


def test_supplementation_check_size_guard():
    worlds = [f"w{i}" for i in range(17)]
    model = make_model(
        worlds,
        {w: {"d"} for w in worlds},
        neighbourhoods={1: {w: [] for w in worlds}},
    )
    with pytest.raises(ModelTooLargeError):
        check_frame_class(model, FrameClass.M)


# -- closure operations -----------------------------------------------------------

def test_close_intersection_example():
    model = two_world_model([{"w"}, {"v"}])
    closed = close_intersection(model)
    assert closed.neighbourhoods[1]["w"] == frozenset(
        {frozenset({"w"}), frozenset({"v"}), frozenset()}
    )


def test_close_supplementation_example():
    model = two_world_model([{"w"}])
    closed = close_supplementation(model)
    assert closed.neighbourhoods[1]["w"] == frozenset(
        {frozenset({"w"}), frozenset({"w", "v"})}
    )


def test_add_unit_example():
    model = two_world_model([])
    assert add_unit(model).neighbourhoods[1]["w"] == frozenset(
        {frozenset({"w", "v"})}
    )


def _random_two_world_models(rng, count):
    worlds = ("w", "v")
    subsets = [frozenset(), frozenset({"w"}), frozenset({"v"}), frozenset(worlds)]
    for _ in range(count):
        yield make_model(
            worlds,
            {"w": {"d"}, "v": {"d"}},
            neighbourhoods={
                1: {
                    w: rng.sample(subsets, rng.randint(0, 4))
                    for w in worlds
                }
            },
        )


def test_closures_establish_their_class_and_are_idempotent():
    rng = random.Random(3)
    ops = [
        (close_supplementation, FrameClass.M),
        (close_intersection, FrameClass.C),
        (add_unit, FrameClass.N),
    ]
    for model in _random_two_world_models(rng, 100):
        for op, fc in ops:
            closed = op(model)
            assert check_frame_class(closed, fc)
            again = op(closed)
            assert again.neighbourhoods == closed.neighbourhoods
            for i, per in model.neighbourhoods.items():
                for w, coll in per.items():
                    assert coll <= closed.neighbourhoods[i][w]


# -- JSON ------------------------------------------------------------------------

def test_json_round_trip_bit_exact():
    model = make_model(
        ["u", "v"],
        {"u": {"d", "e"}, "v": {"d"}},
        concepts={"u": {"A": {"d"}}, "v": {"A": set()}},
        roles={"u": {"r": [("d", "e")]}, "v": {"r": []}},
        neighbourhoods={1: {"u": [{"u"}, set()], "v": [{"u", "v"}]}},
    )
    text = model.to_json()
    back = NeighbourhoodModel.from_json(text)
    assert back.to_json() == text
    assert back.domains == model.domains
    assert back.neighbourhoods == model.neighbourhoods


def test_invariant_rejects_bad_extension():
    model = make_model(["w"], {"w": {"d"}}, concepts={"w": {"A": {"zzz"}}})
    with pytest.raises(ValueError, match="exceeds the domain"):
        model.check_invariants()
