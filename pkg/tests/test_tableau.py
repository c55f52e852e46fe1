import random

import pytest

from nnmdl.oracle import SAT, brute_force_sat
from nnmdl.semantics import FrameClass
from nnmdl.syntax import (
    And,
    AndF,
    AtomicConcept,
    BoxF,
    CI,
    DiaF,
    Exists,
    Not,
    NotF,
    Or,
    OrF,
    Top,
    TOP,
    closure,
    neg_nnf,
    normalize,
    parse_formula,
    serialize,
)
from nnmdl.tableau import (
    R_AND,
    R_EQ,
    R_EXISTS,
    R_L,
    R_NEQ,
    R_SQCAP,
    EngineError,
    SolveOptions,
    StaleInstanceError,
    apply,
    blocked,
    blocking_witness,
    find_applicable,
    init,
    is_clash,
    is_complete,
    label_budget,
    solve,
)

from corpus import random_normalized_formula

A = AtomicConcept("A")
B = AtomicConcept("B")
P = CI(Top(), A)
Q = CI(Top(), B)


def test_init_holds_formula_and_domain_seed():
    phi = normalize(P)
    tableau = init(phi)
    assert tableau.label_order == [0]
    system = tableau.systems[0]
    assert system.formulas == {phi}
    assert system.concepts == {(TOP, 0)}
    assert tableau.stats.steps == 0
    assert tableau.stats.labels_created == 0


def test_clash_same_label():
    tableau = init(normalize(P))
    tableau.add_concept(0, A, 0)
    tableau.add_concept(0, Not(A), 0)
    assert is_clash(tableau)


def test_no_clash_across_labels():
    phi = normalize(AndF(BoxF(1, P), DiaF(1, P)))
    tableau = init(phi)
    system = tableau.new_label(FrameClass.E)
    tableau.add_concept(0, A, 0)
    var = tableau.new_variable()
    tableau.add_concept(system.label, Not(A), var)
    assert not is_clash(tableau)


def test_bottom_concept_is_a_clash():
    phi = normalize(CI(Top(), Bot_c := Not(Top())))
    tableau = init(phi)
    from nnmdl.syntax import BOT

    tableau.add_concept(0, BOT, 0)
    assert is_clash(tableau)


def test_blocking_subset_and_order():
    phi = normalize(CI(Top(), Exists("r", A)))
    tableau = init(phi)
    system = tableau.systems[0]
    tableau.add_concept(0, A, 0)
    var = tableau.new_variable()
    system.variables.add(var)
    system.concepts.add((TOP, var))
    assert blocked(var, system)  # {top} <= {top, A}
    assert not blocked(0, system)
    assert blocking_witness(var, system) == 0


def test_find_applicable_single_conjunction():
    phi = normalize(AndF(P, Q))
    instances = find_applicable(init(phi), FrameClass.E)
    assert [inst.rule for inst in instances] == [R_AND]


def test_modal_rule_shapes_per_class():
    phi = normalize(AndF(BoxF(1, P), DiaF(1, Q)))
    tableau = init(phi)
    tableau.add_formula(0, BoxF(1, P))
    tableau.add_formula(0, DiaF(1, Q))
    modal_m = [
        i for i in find_applicable(tableau, FrameClass.M) if i.rule == R_L
    ]
    assert len(modal_m) == 1
    assert modal_m[0].branch_count == 1
    modal_e = [
        i for i in find_applicable(tableau, FrameClass.E) if i.rule == R_L
    ]
    assert len(modal_e) == 1
    assert modal_e[0].branch_count == 2
    modal_n = [
        i for i in find_applicable(tableau, FrameClass.N) if i.rule == R_L
    ]
    # paired shape plus the diamond-only unit shape
    assert sorted(i.branch_count for i in modal_n) == [1, 2]


def test_intersection_class_enumerates_box_subsets():
    phi = normalize(AndF(AndF(BoxF(1, P), BoxF(1, Q)), DiaF(1, CI(Top(), Top()))))
    tableau = init(phi)
    tableau.add_formula(0, BoxF(1, P))
    tableau.add_formula(0, BoxF(1, Q))
    tableau.add_formula(0, DiaF(1, CI(Top(), Top())))
    modal = [i for i in find_applicable(tableau, FrameClass.C) if i.rule == R_L]
    assert len(modal) == 3  # {P}, {Q}, {P, Q} each with the diamond
    assert sorted(i.branch_count for i in modal) == [2, 2, 3]


def test_apply_conjunction_of_concepts():
    phi = normalize(CI(Top(), And(A, B)))
    tableau = init(phi)
    tableau.add_concept(0, And(A, B), 0)
    inst = next(
        i for i in find_applicable(tableau, FrameClass.E) if i.rule == R_SQCAP
    )
    out = apply(tableau, inst, 0)
    assert (A, 0) in out.systems[0].concepts
    assert (B, 0) in out.systems[0].concepts
    # application is pure: the input is untouched
    assert (A, 0) not in tableau.systems[0].concepts


def test_apply_refuted_inclusion_allocates_fresh_variable():
    phi = normalize(NotF(P))
    tableau = init(phi)
    inst = next(
        i for i in find_applicable(tableau, FrameClass.E) if i.rule == R_NEQ
    )
    out = apply(tableau, inst, 0)
    assert (Not(A), 1) in out.systems[0].concepts
    assert (TOP, 1) in out.systems[0].concepts
    assert out.next_var == 2


def test_apply_modal_rule_negated_branch():
    phi = normalize(AndF(BoxF(1, P), DiaF(1, Q)))
    tableau = init(phi)
    tableau.add_formula(0, BoxF(1, P))
    tableau.add_formula(0, DiaF(1, Q))
    inst = next(
        i for i in find_applicable(tableau, FrameClass.E) if i.rule == R_L
    )
    out = apply(tableau, inst, 1)
    fresh = out.label_order[-1]
    assert fresh == 1
    assert neg_nnf(P) in out.systems[fresh].formulas
    assert neg_nnf(Q) in out.systems[fresh].formulas
    # formula-only label still gets a domain seed
    assert out.systems[fresh].variables


def test_apply_stale_instance_rejected():
    phi = normalize(AndF(P, Q))
    tableau = init(phi)
    inst = find_applicable(tableau, FrameClass.E)[0]
    out = apply(tableau, inst, 0)
    with pytest.raises(StaleInstanceError):
        apply(out, inst, 0)


def test_apply_branch_out_of_range():
    phi = normalize(AndF(P, Q))
    tableau = init(phi)
    inst = find_applicable(tableau, FrameClass.E)[0]
    with pytest.raises(ValueError, match="out of range"):
        apply(tableau, inst, 5)


def test_completeness_checks():
    phi = normalize(CI(Top(), A))
    tableau = init(phi)
    assert not is_complete(tableau, FrameClass.E)  # R_eq pending
    inst = find_applicable(tableau, FrameClass.E)[0]
    assert inst.rule == R_EQ
    out = apply(tableau, inst, 0)
    assert is_complete(out, FrameClass.E)


def test_trivial_inclusion_complete_immediately():
    # top(x) is already present, so the inclusion's conclusion needs nothing
    phi = normalize(CI(Top(), Top()))
    assert is_complete(init(phi), FrameClass.E)


def test_pending_conjunction_not_complete():
    phi = normalize(AndF(P, Q))
    assert not is_complete(init(phi), FrameClass.E)


def test_diamond_without_boxes_complete_under_e():
    phi = normalize(DiaF(1, NotF(CI(Top(), Top()))))
    result = solve(phi, FrameClass.E)
    assert result.verdict == "sat"
    assert is_complete(result.completion, FrameClass.E)
    assert len(result.completion.label_order) == 1


# -- solve ---------------------------------------------------------------------

def test_box_diamond_contradiction_unsat_everywhere():
    phi = AndF(BoxF(1, P), DiaF(1, neg_nnf(P)))
    for fc in FrameClass:
        assert solve(phi, fc).verdict == "unsat"


def test_two_boxes_refuted_conjunction():
    phi = AndF(AndF(BoxF(1, P), BoxF(1, Q)), NotF(BoxF(1, AndF(P, Q))))
    expected = {
        FrameClass.E: "sat",
        FrameClass.M: "sat",
        FrameClass.C: "unsat",
        FrameClass.N: "sat",
    }
    for fc, verdict in expected.items():
        assert solve(phi, fc).verdict == verdict, fc


def test_boxed_conjunction_refuted_conjunct():
    phi = AndF(BoxF(1, normalize(AndF(P, Q))), DiaF(1, neg_nnf(normalize(P))))
    expected = {
        FrameClass.E: "sat",
        FrameClass.M: "unsat",
        FrameClass.C: "sat",
        FrameClass.N: "sat",
    }
    for fc, verdict in expected.items():
        assert solve(phi, fc).verdict == verdict, fc


def test_refuted_valid_inclusion_under_unit_class():
    phi = DiaF(1, NotF(CI(Top(), Top())))
    assert solve(phi, FrameClass.N).verdict == "unsat"
    assert solve(phi, FrameClass.E).verdict == "sat"


def test_existential_with_blocking_terminates():
    phi = CI(Top(), Exists("r", A))
    result = solve(phi, FrameClass.E)
    assert result.verdict == "sat"
    system = result.completion.systems[0]
    assert len(system.variables) == 3  # root, witness, blocked witness
    assert result.model is not None


def test_solve_normalizes_input():
    assert solve(NotF(NotF(P)), FrameClass.E).verdict == "sat"


def test_solve_trace_records_path():
    phi = normalize(AndF(P, Q))
    result = solve(phi, FrameClass.E, SolveOptions(trace=True))
    assert result.trace
    assert result.trace[0]["rule"] == R_AND
    assert all({"step", "rule", "label", "branch", "added"} <= e.keys() for e in result.trace)


def test_modal_negation_pair_is_an_immediate_clash():
    # The diamond of the negated body is itself the box's NNF negation.
    phi = normalize(AndF(BoxF(1, P), DiaF(1, neg_nnf(P))))
    tableau = init(phi)
    out = apply(tableau, find_applicable(tableau, FrameClass.E)[0], 0)
    assert is_clash(out)


def test_streaming_callback_sees_backtracked_steps():
    seen = []
    phi = AndF(BoxF(1, normalize(AndF(P, Q))), DiaF(1, neg_nnf(normalize(P))))
    result = solve(phi, FrameClass.E, SolveOptions(on_step=seen.append))
    assert result.verdict == "sat"
    assert any(e["rule"] == R_L for e in seen)
    # branch 0 of the modal rule clashes and is backtracked before branch 1
    branches = [e["branch"] for e in seen if e["rule"] == R_L]
    assert branches == [0, 1]


def test_step_cap_raises_engine_error():
    phi = normalize(CI(Top(), Exists("r", A)))
    with pytest.raises(EngineError, match="step cap"):
        solve(phi, FrameClass.E, SolveOptions(step_cap=1))


def test_label_budget_values():
    assert label_budget(6, FrameClass.E) == 36
    assert label_budget(6, FrameClass.C) == 2**6 * 6


# -- invariants over the corpus ---------------------------------------------------

def test_monotone_growth_and_closure_membership():
    rng = random.Random(55)
    for _ in range(30):
        phi = random_normalized_formula(rng)
        clo = closure(phi)
        tableau = init(phi)
        for fc in FrameClass:
            state = tableau.copy()
            for _ in range(60):
                if is_clash(state):
                    break
                instances = find_applicable(state, fc)
                if not instances:
                    break
                before = {
                    n: state.systems[n].constraint_count()
                    for n in state.label_order
                }
                state = apply(state, instances[0], 0)
                for n, count in before.items():
                    assert state.systems[n].constraint_count() >= count
                for system in state.systems.values():
                    for psi in system.formulas:
                        assert psi in clo.for_neg
                    for concept, _ in system.concepts:
                        assert concept in clo.con_neg
                    for role, _, _ in system.roles:
                        assert role in clo.roles


def test_verdict_class_containment_on_corpus():
    rng = random.Random(77)
    for _ in range(40):
        phi = random_normalized_formula(rng)
        base = solve(phi, FrameClass.E, SolveOptions(extract=False)).verdict
        for fc in (FrameClass.M, FrameClass.C, FrameClass.N):
            if solve(phi, fc, SolveOptions(extract=False)).verdict == "sat":
                assert base == "sat"


def test_differential_agreement_sample():
    rng = random.Random(88)
    for _ in range(25):
        phi = random_normalized_formula(rng)
        for fc in FrameClass:
            tableau_verdict = solve(phi, fc).verdict
            oracle = brute_force_sat(phi, fc)
            if oracle.verdict == SAT:
                assert tableau_verdict == "sat", serialize(phi)
