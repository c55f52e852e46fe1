"""Brute-force satisfiability by exhaustive small-model enumeration.

This is the independent ground truth the main engine is tested against:
it knows nothing about the calculus, it simply builds every neighbourhood
model within the given bounds (up to a fixed naming of worlds w0, w1, ...
and elements d0, d1, ...) and evaluates the formula semantically.  A SAT
answer is therefore unconditionally sound; the negative answer only means
"no model within bounds" and is reported as such.

Enumeration order is fixed (world count, then domain sizes, then concept
extensions, then role extensions, then neighbourhood collections, each
axis in lexicographic bitmask order) so the first witness is reproducible.
Chunks of the space could be evaluated concurrently and merged by
disjunction; the implementation is sequential.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Iterator

from .semantics import (
    EvaluationCache,
    Evaluator,
    FrameClass,
    NeighbourhoodModel,
    intersection_closed_collection,
    supplemented_collection,
)
from .syntax import (
    Box,
    BoxF,
    Dia,
    DiaF,
    Formula,
    Not,
    NotF,
    concept_names,
    formula_concepts,
    modality_count,
    role_names,
    subformulas,
)

DEFAULT_MAX_WORLDS = 2
DEFAULT_MAX_DOMAIN = 2
DEFAULT_CANDIDATE_CAP = 10**8

SAT = "sat"
UNSAT_WITHIN_BOUNDS = "unsat-within-bounds"

_SIGNATURE_LIMITS = (3, 2, 2)  # concept names, role names, modalities


class BoundsTooLargeError(ValueError):
    """The enumeration space exceeds the configured candidate cap."""


@dataclass(frozen=True)
class Signature:
    concept_names: tuple[str, ...]
    role_names: tuple[str, ...]
    modalities: int


@dataclass(frozen=True)
class OracleBounds:
    max_worlds: int = DEFAULT_MAX_WORLDS
    max_domain: int = DEFAULT_MAX_DOMAIN
    domain_mode: str = "varying"  # or "constant"
    candidate_cap: int = DEFAULT_CANDIDATE_CAP

    def __post_init__(self):
        if self.max_worlds < 1 or self.max_domain < 1:
            raise ValueError("bounds must be at least 1")
        if self.max_worlds > 2 * DEFAULT_MAX_WORLDS:
            raise ValueError(f"max_worlds {self.max_worlds} beyond supported range")
        if self.max_domain > 2 * DEFAULT_MAX_DOMAIN:
            raise ValueError(f"max_domain {self.max_domain} beyond supported range")
        if self.domain_mode not in ("varying", "constant"):
            raise ValueError(f"unknown domain mode {self.domain_mode!r}")


@dataclass
class OracleResult:
    verdict: str
    model: NeighbourhoodModel | None
    world: str | None
    models_checked: int


def formula_signature(phi: Formula) -> Signature:
    return Signature(
        tuple(sorted(concept_names(phi))),
        tuple(sorted(role_names(phi))),
        modality_count(phi),
    )


def _check_signature(signature: Signature) -> None:
    max_names, max_roles, max_mods = _SIGNATURE_LIMITS
    if len(signature.concept_names) > max_names:
        raise ValueError(f"too many concept names: {signature.concept_names}")
    if len(signature.role_names) > max_roles:
        raise ValueError(f"too many role names: {signature.role_names}")
    if signature.modalities > max_mods:
        raise ValueError(f"too many modalities: {signature.modalities}")


def _size_combos(bounds: OracleBounds, wcount: int) -> list[tuple[int, ...]]:
    if bounds.domain_mode == "constant":
        return [(s,) * wcount for s in range(1, bounds.max_domain + 1)]
    return list(product(range(1, bounds.max_domain + 1), repeat=wcount))


def count_candidates(signature: Signature, bounds: OracleBounds) -> int:
    """Size of the raw enumeration space (before any frame-class filter)."""
    total = 0
    n_names = len(signature.concept_names)
    n_roles = len(signature.role_names)
    for wcount in range(1, bounds.max_worlds + 1):
        collections = 2 ** (2**wcount)
        nbhd = collections ** (wcount * signature.modalities)
        for sizes in _size_combos(bounds, wcount):
            ext = 1
            for s in sizes:
                ext *= 2 ** (s * n_names)
                ext *= 2 ** (s * s * n_roles)
            total += ext * nbhd
    return total


def _subsets(universe: tuple, as_pairs: bool = False) -> list[frozenset]:
    items = (
        tuple((d, e) for d in universe for e in universe) if as_pairs else universe
    )
    out = []
    for mask in range(2 ** len(items)):
        out.append(frozenset(x for i, x in enumerate(items) if mask >> i & 1))
    return out


def _frame_collections(
    worlds: tuple[str, ...], frame_class: FrameClass
) -> list[frozenset[frozenset[str]]]:
    """All neighbourhood collections over the world set admitted by the class."""
    ws = frozenset(worlds)
    world_subsets = _subsets(worlds)
    out = []
    for mask in range(2 ** len(world_subsets)):
        collection = frozenset(
            s for i, s in enumerate(world_subsets) if mask >> i & 1
        )
        if frame_class is FrameClass.M and not supplemented_collection(
            collection, ws
        ):
            continue
        if frame_class is FrameClass.C and not intersection_closed_collection(
            collection
        ):
            continue
        if frame_class is FrameClass.N and ws not in collection:
            continue
        out.append(collection)
    return out


def _enumerate(
    signature: Signature, bounds: OracleBounds, frame_class: FrameClass
) -> Iterator[tuple[bool, NeighbourhoodModel]]:
    """Yields (fresh_skeleton, model); fresh_skeleton marks the first model
    built on a new (domains, concepts, roles) choice."""
    _check_signature(signature)
    candidates = count_candidates(signature, bounds)
    if candidates > bounds.candidate_cap:
        raise BoundsTooLargeError(
            f"{candidates} candidate models exceed the cap of {bounds.candidate_cap}"
        )
    names = signature.concept_names
    roles = signature.role_names
    constant = bounds.domain_mode == "constant"
    for wcount in range(1, bounds.max_worlds + 1):
        worlds = tuple(f"w{i}" for i in range(wcount))
        collections = _frame_collections(worlds, frame_class)
        nbhd_axes = [
            (i, w) for i in range(1, signature.modalities + 1) for w in worlds
        ]
        for sizes in _size_combos(bounds, wcount):
            elements = {
                w: tuple(f"d{i}" for i in range(s)) for w, s in zip(worlds, sizes)
            }
            domains = {w: frozenset(elements[w]) for w in worlds}
            concept_axes = [(w, a) for w in worlds for a in names]
            role_axes = [(w, r) for w in worlds for r in roles]
            concept_options = [_subsets(elements[w]) for w, _ in concept_axes]
            role_options = [
                _subsets(elements[w], as_pairs=True) for w, _ in role_axes
            ]
            for concept_choice in product(*concept_options):
                concepts: dict[str, dict[str, frozenset[str]]] = {
                    w: {} for w in worlds
                }
                for (w, a), members in zip(concept_axes, concept_choice):
                    concepts[w][a] = members
                for role_choice in product(*role_options):
                    role_ext: dict[str, dict[str, frozenset]] = {
                        w: {} for w in worlds
                    }
                    for (w, r), pairs in zip(role_axes, role_choice):
                        role_ext[w][r] = pairs
                    # Models within one neighbourhood sweep share the ALC
                    # part; treat yielded models as immutable.
                    fresh = True
                    for nbhd_choice in product(collections, repeat=len(nbhd_axes)):
                        neighbourhoods: dict[int, dict[str, frozenset]] = {
                            i: {} for i in range(1, signature.modalities + 1)
                        }
                        for (i, w), coll in zip(nbhd_axes, nbhd_choice):
                            neighbourhoods[i][w] = coll
                        model = NeighbourhoodModel(
                            worlds=worlds,
                            constant_domain=constant,
                            domains=domains,
                            concepts=concepts,
                            roles=role_ext,
                            neighbourhoods=neighbourhoods,
                        )
                        yield fresh, model
                        fresh = False


def enumerate_models(
    signature: Signature,
    bounds: OracleBounds,
    frame_class: FrameClass,
) -> Iterator[NeighbourhoodModel]:
    """Every model within bounds whose frame lies in the class.

    Models are produced up to the fixed naming w0.. / d0.. (domains are
    prefixes of the element pool; no further isomorphism pruning).
    """
    for _, model in _enumerate(signature, bounds, frame_class):
        yield model


def _evaluation_nodes(phi: Formula):
    """Modality-free subterms the evaluator touches, including the
    negations its diamond clauses introduce, plus the truth-set requests
    made by modal operators directly above them."""
    formulas = set(subformulas(phi))
    for psi in list(formulas):
        if isinstance(psi, DiaF):
            formulas.add(NotF(psi.arg))
    concepts = set(formula_concepts(phi))
    for c in list(concepts):
        if isinstance(c, Dia):
            concepts.add(Not(c.arg))
    free_concepts = [c for c in concepts if modality_count(c) == 0]
    free_formulas = [f for f in formulas if modality_count(f) == 0]
    formula_set_args = [
        arg
        for psi in formulas
        if isinstance(psi, BoxF)
        for arg in (psi.arg,)
        if modality_count(arg) == 0
    ] + [
        NotF(psi.arg)
        for psi in formulas
        if isinstance(psi, DiaF) and modality_count(psi.arg) == 0
    ]
    concept_set_args = [
        c.arg
        for c in concepts
        if isinstance(c, Box) and modality_count(c.arg) == 0
    ] + [
        Not(c.arg)
        for c in concepts
        if isinstance(c, Dia) and modality_count(c.arg) == 0
    ]
    return free_concepts, free_formulas, formula_set_args, concept_set_args


def brute_force_sat(
    phi: Formula,
    frame_class: FrameClass,
    bounds: OracleBounds | None = None,
) -> OracleResult:
    """SAT iff some enumerated model has a world satisfying the formula.

    The signature enumerated is the one actually occurring in the
    formula.  Stops at the first witness; the negative verdict is
    explicitly bounds-relative.  Values of modality-free subterms are
    shared across all models with the same ALC part, which changes
    nothing observable.
    """
    if bounds is None:
        bounds = OracleBounds()
    signature = formula_signature(phi)
    free_concepts, free_formulas, formula_set_args, concept_set_args = (
        _evaluation_nodes(phi)
    )
    checked = 0
    cache = EvaluationCache()
    for fresh, model in _enumerate(signature, bounds, frame_class):
        checked += 1
        if fresh:
            seed = Evaluator(model)
            elements = sorted(set().union(*model.domains.values()))
            for w in model.worlds:
                for c in free_concepts:
                    seed.concept_ext(w, c)
                for f in free_formulas:
                    seed.holds(w, f)
            for f in formula_set_args:
                seed.formula_truth_set(f)
            for c in concept_set_args:
                for d in elements:
                    seed.concept_truth_set(d, c)
            cache = seed.export_cache()
        evaluator = Evaluator(model, cache)
        for world in model.worlds:
            if evaluator.holds(world, phi):
                return OracleResult(SAT, model, world, checked)
    return OracleResult(UNSAT_WITHIN_BOUNDS, None, None, checked)
