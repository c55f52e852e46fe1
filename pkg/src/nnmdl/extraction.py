"""Countermodel construction from a saturated, clash-free completion set.

Worlds are the labels; each label's domain is its occurring variables.
A constraint asserted at a label fixes membership from below, while the
absence of its negation leaves room above: the floor/ceiling pair of a
term brackets every admissible truth set.  Neighbourhood collections are
materialized extensionally from those brackets, per frame class:

  E  every set between the floor and ceiling of some asserted box body;
  M  every superset of the floor of some asserted box body;
  C  every set between the intersected floors and intersected ceilings
     of a non-empty selection of asserted box bodies (which makes the
     result closed under binary intersection);
  N  as for E, plus the full world set in every collection.

Role edges at a label are the asserted ones, plus edges lent to a blocked
variable by each variable that blocks it.  The construction is a pure
function of the completion set and safe to run concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

from .semantics import (
    FrameClass,
    NeighbourhoodModel,
    check_frame_class,
    satisfies,
)
from .syntax import (
    AtomicConcept,
    Box,
    BoxF,
    Concept,
    Exists,
    Forall,
    Formula,
    neg_nnf,
    sort_key,
)
from .tableau import CompletionSet, ConstraintSystem, blockers


@dataclass(frozen=True)
class TruthApproximation:
    """Labels forced to carry a term (floor) and labels merely allowed
    to (ceiling).  floor <= ceiling whenever the source set is clash-free."""

    floor: frozenset[int]
    ceil: frozenset[int]


def floors_ceilings(
    tableau: CompletionSet,
    term: Concept | Formula,
    var: int | None = None,
) -> TruthApproximation:
    """Bracket of a term: floor collects labels asserting it (at the given
    variable for concepts), the ceiling drops labels asserting its negation."""
    if isinstance(term, Concept) and var is None:
        raise ValueError("concept terms need a variable")
    labels = tableau.label_order
    negated = neg_nnf(term)
    if isinstance(term, Concept):
        floor = frozenset(
            n for n in labels if (term, var) in tableau.systems[n].concepts
        )
        ceil = frozenset(
            n
            for n in labels
            if (negated, var) not in tableau.systems[n].concepts
        )
    else:
        floor = frozenset(
            n for n in labels if term in tableau.systems[n].formulas
        )
        ceil = frozenset(
            n for n in labels if negated not in tableau.systems[n].formulas
        )
    return TruthApproximation(floor, ceil)


def _window(
    floor: frozenset[int], ceil: frozenset[int]
) -> set[frozenset[str]]:
    """All world sets between a floor and a ceiling, as world-id strings."""
    slack = sorted(ceil - floor)
    out = set()
    for r in range(len(slack) + 1):
        for extra in combinations(slack, r):
            out.add(frozenset(str(n) for n in floor | set(extra)))
    return out


def _box_bodies(system: ConstraintSystem, index: int):
    """(body, variable-or-None) of each box constraint with this modality."""
    bodies = []
    for psi in system.formulas:
        if isinstance(psi, BoxF) and psi.index == index:
            bodies.append((psi.arg, None))
    for concept, var in system.concepts:
        if isinstance(concept, Box) and concept.index == index:
            bodies.append((concept.arg, var))
    bodies.sort(key=lambda b: (sort_key(b[0]), -1 if b[1] is None else b[1]))
    return bodies


def extract_model(
    tableau: CompletionSet, frame_class: FrameClass
) -> NeighbourhoodModel:
    """Read a finite model off a saturated clash-free completion set.

    The result's frame lies in the requested class by construction, and
    the formula the completion set was built for holds at world "0".
    Raises ValueError when the state still has a clash or an applicable
    rule (checked via the clash test only; saturation is the caller's
    responsibility and is re-checked by `validate`).
    """
    from .tableau import is_clash

    if is_clash(tableau):
        raise ValueError("completion set has a clash")
    labels = tableau.label_order
    world_ids = tuple(str(n) for n in labels)
    full = frozenset(world_ids)
    modalities = sorted(
        {c.index for c in tableau.closure.con_neg if isinstance(c, Box)}
        | {f.index for f in tableau.closure.for_neg if isinstance(f, BoxF)}
    )

    domains = {}
    concept_ext: dict[str, dict[str, frozenset[str]]] = {}
    role_ext: dict[str, dict[str, frozenset[tuple[str, str]]]] = {}
    atom_names = sorted(
        {
            c.name
            for c in tableau.closure.con_neg
            if isinstance(c, AtomicConcept)
        }
    )
    role_names = sorted(tableau.closure.roles)
    for n in labels:
        system = tableau.systems[n]
        world = str(n)
        variables = sorted(system.variables)
        if not variables:
            raise ValueError(f"label {n} has no variables")
        domains[world] = frozenset(f"x{v}" for v in variables)
        concept_ext[world] = {
            a: frozenset(
                f"x{v}"
                for c, v in system.concepts
                if isinstance(c, AtomicConcept) and c.name == a
            )
            for a in atom_names
        }
        per_role: dict[str, set[tuple[str, str]]] = {r: set() for r in role_names}
        for role, x, y in system.roles:
            per_role[role].add((f"x{x}", f"x{y}"))
        for var in variables:
            for z in blockers(var, system):
                for role, x, y in system.roles:
                    if x == z:
                        per_role[role].add((f"x{var}", f"x{y}"))
        role_ext[world] = {r: frozenset(pairs) for r, pairs in per_role.items()}

    neighbourhoods: dict[int, dict[str, frozenset[frozenset[str]]]] = {}
    for index in modalities:
        per_world: dict[str, frozenset[frozenset[str]]] = {}
        for n in labels:
            system = tableau.systems[n]
            bodies = _box_bodies(system, index)
            collection: set[frozenset[str]] = set()
            if frame_class is FrameClass.C:
                for size in range(1, len(bodies) + 1):
                    for chosen in combinations(bodies, size):
                        approxes = [
                            floors_ceilings(tableau, body, var)
                            for body, var in chosen
                        ]
                        floor = frozenset(labels)
                        ceil = frozenset(labels)
                        for approx in approxes:
                            floor &= approx.floor
                            ceil &= approx.ceil
                        collection |= _window(floor, ceil)
            else:
                for body, var in bodies:
                    approx = floors_ceilings(tableau, body, var)
                    if frame_class is FrameClass.M:
                        collection |= _window(approx.floor, frozenset(labels))
                    else:  # E and N share the bracketed shape
                        collection |= _window(approx.floor, approx.ceil)
            if frame_class is FrameClass.N:
                collection.add(full)
            per_world[str(n)] = frozenset(collection)
        neighbourhoods[index] = per_world

    model = NeighbourhoodModel(
        worlds=world_ids,
        constant_domain=False,
        domains=domains,
        concepts=concept_ext,
        roles=role_ext,
        neighbourhoods=neighbourhoods,
    )
    model.check_invariants()
    return model


def validate(
    tableau: CompletionSet, phi: Formula, frame_class: FrameClass
) -> bool:
    """Full check of the construction: the extracted model's frame lies in
    the class and the formula holds at world "0"."""
    model = extract_model(tableau, frame_class)
    return check_frame_class(model, frame_class) and satisfies(model, "0", phi)
