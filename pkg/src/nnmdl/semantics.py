"""Finite neighbourhood models and their evaluation.

A model is a non-empty set of worlds, a neighbourhood function per
modality index (mapping each world to a set of sets of worlds), and a
per-world ALC interpretation with a non-empty domain.  Evaluation follows
the two-sorted semantics: concepts denote sets of domain elements at a
world, formulas are true or false at a world, and a box tests membership
of a truth set in the world's neighbourhood collection.

Models are treated as immutable after construction and evaluation is
pure, so values can be shared freely across threads or solver instances.

An element d may be absent from the domain of some world v; such v never
enters a truth set of d (membership of d in any concept at v is read as
false).  This matches the literal evaluation of per-world interpretations
and is the only reading implemented.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum

from .syntax import (
    And,
    AndF,
    AtomicConcept,
    Bot,
    Box,
    BoxF,
    CI,
    Concept,
    Dia,
    DiaF,
    Exists,
    Forall,
    Formula,
    Not,
    NotF,
    Or,
    OrF,
    Top,
)

#: Supplementation checks and closures enumerate subsets of the world set;
#: models beyond this many worlds are rejected rather than silently skipped.
MAX_WORLDS_FOR_SUPPLEMENTATION = 16


class FrameClass(str, Enum):
    """Frame condition the neighbourhood functions must satisfy.

    E: none; M: closed under supersets; C: closed under binary
    intersection; N: the full world set belongs to every collection.
    """

    E = "E"
    M = "M"
    C = "C"
    N = "N"


class ModelTooLargeError(ValueError):
    """Raised when a check would enumerate subsets of too many worlds."""


@dataclass
class NeighbourhoodModel:
    """Extensional finite neighbourhood model.

    worlds is kept as an ordered tuple (the first world is the
    distinguished one for validation); all set-valued fields use
    frozensets.  neighbourhoods maps modality index -> world ->
    collection of world sets.
    """

    worlds: tuple[str, ...]
    constant_domain: bool
    domains: dict[str, frozenset[str]]
    concepts: dict[str, dict[str, frozenset[str]]]
    roles: dict[str, dict[str, frozenset[tuple[str, str]]]]
    neighbourhoods: dict[int, dict[str, frozenset[frozenset[str]]]] = field(
        default_factory=dict
    )

    def world_set(self) -> frozenset[str]:
        return frozenset(self.worlds)

    def check_invariants(self) -> None:
        if not self.worlds:
            raise ValueError("model has no worlds")
        ws = self.world_set()
        for w in self.worlds:
            if not self.domains.get(w):
                raise ValueError(f"world {w!r} has an empty domain")
        if self.constant_domain:
            first = self.domains[self.worlds[0]]
            if any(self.domains[w] != first for w in self.worlds):
                raise ValueError("constant-domain flag with varying domains")
        for w, ext in self.concepts.items():
            for name, members in ext.items():
                if not members <= self.domains[w]:
                    raise ValueError(f"{name} at {w!r} exceeds the domain")
        for w, ext in self.roles.items():
            dom = self.domains[w]
            for name, pairs in ext.items():
                for d, e in pairs:
                    if d not in dom or e not in dom:
                        raise ValueError(f"{name} at {w!r} exceeds the domain")
        for index, per_world in self.neighbourhoods.items():
            if index < 1:
                raise ValueError(f"modality index {index} out of range")
            for w, collection in per_world.items():
                for alpha in collection:
                    if not alpha <= ws:
                        raise ValueError(
                            f"neighbourhood member at {w!r} is not a set of worlds"
                        )

    # -- JSON interchange ---------------------------------------------------

    def to_json_dict(self) -> dict:
        return {
            "worlds": list(self.worlds),
            "constant_domain": self.constant_domain,
            "domains": {w: sorted(self.domains[w]) for w in self.worlds},
            "concepts": {
                w: {a: sorted(members) for a, members in sorted(ext.items())}
                for w, ext in sorted(self.concepts.items())
            },
            "roles": {
                w: {
                    r: sorted([list(p) for p in pairs])
                    for r, pairs in sorted(ext.items())
                }
                for w, ext in sorted(self.roles.items())
            },
            "neighbourhoods": {
                str(index): {
                    w: sorted([sorted(alpha) for alpha in collection])
                    for w, collection in sorted(per_world.items())
                }
                for index, per_world in sorted(self.neighbourhoods.items())
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True, indent=2)

    @classmethod
    def from_json_dict(cls, data: dict) -> "NeighbourhoodModel":
        model = cls(
            worlds=tuple(data["worlds"]),
            constant_domain=bool(data.get("constant_domain", False)),
            domains={
                w: frozenset(members) for w, members in data["domains"].items()
            },
            concepts={
                w: {a: frozenset(m) for a, m in ext.items()}
                for w, ext in data.get("concepts", {}).items()
            },
            roles={
                w: {
                    r: frozenset((d, e) for d, e in pairs)
                    for r, pairs in ext.items()
                }
                for w, ext in data.get("roles", {}).items()
            },
            neighbourhoods={
                int(index): {
                    w: frozenset(frozenset(alpha) for alpha in collection)
                    for w, collection in per_world.items()
                }
                for index, per_world in data.get("neighbourhoods", {}).items()
            },
        )
        model.check_invariants()
        return model

    @classmethod
    def from_json(cls, text: str) -> "NeighbourhoodModel":
        return cls.from_json_dict(json.loads(text))


_MISS = object()


class EvaluationCache:
    """Read-only evaluation results shared across models that agree on
    everything except their neighbourhood functions.

    Only entries for modality-free terms may be stored here; their values
    never depend on the neighbourhoods.
    """

    __slots__ = ("concept_ext", "formula_holds", "concept_sets", "formula_sets")

    def __init__(self):
        self.concept_ext: dict = {}
        self.formula_holds: dict = {}
        self.concept_sets: dict = {}
        self.formula_sets: dict = {}


_EMPTY_CACHE = EvaluationCache()


class Evaluator:
    """Memoizing evaluator bound to a single model."""

    def __init__(
        self,
        model: NeighbourhoodModel,
        cache: EvaluationCache | None = None,
    ):
        self.model = model
        self._base = cache if cache is not None else _EMPTY_CACHE
        self._concept_memo: dict[tuple[str, Concept], frozenset[str]] = {}
        self._formula_memo: dict[tuple[str, Formula], bool] = {}
        self._concept_set_memo: dict[tuple[str, Concept], frozenset[str]] = {}
        self._formula_set_memo: dict[Formula, frozenset[str]] = {}

    def _neighbourhood(self, index: int, world: str) -> frozenset[frozenset[str]]:
        per_world = self.model.neighbourhoods.get(index)
        if per_world is None:
            raise ValueError(f"modality index {index} out of range")
        return per_world.get(world, frozenset())

    def concept_ext(self, world: str, concept: Concept) -> frozenset[str]:
        if world not in self.model.domains:
            raise ValueError(f"unknown world {world!r}")
        key = (world, concept)
        cached = self._concept_memo.get(key, _MISS)
        if cached is _MISS:
            cached = self._base.concept_ext.get(key, _MISS)
        if cached is not _MISS:
            return cached
        model = self.model
        dom = model.domains[world]
        if isinstance(concept, AtomicConcept):
            out = model.concepts.get(world, {}).get(concept.name, frozenset())
        elif isinstance(concept, Top):
            out = dom
        elif isinstance(concept, Bot):
            out = frozenset()
        elif isinstance(concept, Not):
            out = dom - self.concept_ext(world, concept.arg)
        elif isinstance(concept, And):
            out = self.concept_ext(world, concept.left) & self.concept_ext(
                world, concept.right
            )
        elif isinstance(concept, Or):
            out = self.concept_ext(world, concept.left) | self.concept_ext(
                world, concept.right
            )
        elif isinstance(concept, Exists):
            pairs = model.roles.get(world, {}).get(concept.role, frozenset())
            targets = self.concept_ext(world, concept.arg)
            out = frozenset(d for d, e in pairs if e in targets)
        elif isinstance(concept, Forall):
            pairs = model.roles.get(world, {}).get(concept.role, frozenset())
            targets = self.concept_ext(world, concept.arg)
            bad = frozenset(d for d, e in pairs if e not in targets)
            out = dom - bad
        elif isinstance(concept, Box):
            collection = self._neighbourhood(concept.index, world)
            out = frozenset(
                d
                for d in dom
                if self.concept_truth_set(d, concept.arg) in collection
            )
        elif isinstance(concept, Dia):
            collection = self._neighbourhood(concept.index, world)
            out = frozenset(
                d
                for d in dom
                if self.concept_truth_set(d, Not(concept.arg)) not in collection
            )
        else:
            raise TypeError(f"not a concept: {concept!r}")
        self._concept_memo[key] = out
        return out

    def concept_truth_set(self, element: str, concept: Concept) -> frozenset[str]:
        key = (element, concept)
        cached = self._concept_set_memo.get(key, _MISS)
        if cached is _MISS:
            cached = self._base.concept_sets.get(key, _MISS)
        if cached is not _MISS:
            return cached
        out = frozenset(
            v
            for v in self.model.worlds
            if element in self.concept_ext(v, concept)
        )
        self._concept_set_memo[key] = out
        return out

    def holds(self, world: str, phi: Formula) -> bool:
        if world not in self.model.domains:
            raise ValueError(f"unknown world {world!r}")
        key = (world, phi)
        cached = self._formula_memo.get(key, _MISS)
        if cached is _MISS:
            cached = self._base.formula_holds.get(key, _MISS)
        if cached is not _MISS:
            return cached
        if isinstance(phi, CI):
            out = self.concept_ext(world, phi.left) <= self.concept_ext(
                world, phi.right
            )
        elif isinstance(phi, NotF):
            out = not self.holds(world, phi.arg)
        elif isinstance(phi, AndF):
            out = self.holds(world, phi.left) and self.holds(world, phi.right)
        elif isinstance(phi, OrF):
            out = self.holds(world, phi.left) or self.holds(world, phi.right)
        elif isinstance(phi, BoxF):
            out = self.formula_truth_set(phi.arg) in self._neighbourhood(
                phi.index, world
            )
        elif isinstance(phi, DiaF):
            out = self.formula_truth_set(NotF(phi.arg)) not in self._neighbourhood(
                phi.index, world
            )
        else:
            raise TypeError(f"not a formula: {phi!r}")
        self._formula_memo[key] = out
        return out

    def formula_truth_set(self, phi: Formula) -> frozenset[str]:
        cached = self._formula_set_memo.get(phi, _MISS)
        if cached is _MISS:
            cached = self._base.formula_sets.get(phi, _MISS)
        if cached is not _MISS:
            return cached
        out = frozenset(v for v in self.model.worlds if self.holds(v, phi))
        self._formula_set_memo[phi] = out
        return out

    def export_cache(self) -> EvaluationCache:
        """Snapshot of everything computed so far, for reuse on models with
        the same modality-free part.  Only meaningful when every request
        made of this evaluator concerned modality-free terms."""
        cache = EvaluationCache()
        cache.concept_ext.update(self._base.concept_ext)
        cache.concept_ext.update(self._concept_memo)
        cache.formula_holds.update(self._base.formula_holds)
        cache.formula_holds.update(self._formula_memo)
        cache.concept_sets.update(self._base.concept_sets)
        cache.concept_sets.update(self._concept_set_memo)
        cache.formula_sets.update(self._base.formula_sets)
        cache.formula_sets.update(self._formula_set_memo)
        return cache


def interpret_concept(
    model: NeighbourhoodModel, world: str, concept: Concept
) -> frozenset[str]:
    """Extension of a concept at a world; always a subset of its domain."""
    return Evaluator(model).concept_ext(world, concept)


def truth_set_concept(
    model: NeighbourhoodModel, element: str, concept: Concept
) -> frozenset[str]:
    """Worlds whose interpretation contains the element.

    Worlds whose domain lacks the element are excluded.
    """
    return Evaluator(model).concept_truth_set(element, concept)


def truth_set_formula(model: NeighbourhoodModel, phi: Formula) -> frozenset[str]:
    return Evaluator(model).formula_truth_set(phi)


def satisfies(model: NeighbourhoodModel, world: str, phi: Formula) -> bool:
    """Truth of a formula at a world (full syntax, no NNF required)."""
    return Evaluator(model).holds(world, phi)


# ---------------------------------------------------------------------------
# Frame classes
# ---------------------------------------------------------------------------

def _collections(model: NeighbourhoodModel):
    # Worlds absent from a neighbourhood map carry the empty collection.
    for index, per_world in model.neighbourhoods.items():
        for world in model.worlds:
            yield index, world, per_world.get(world, frozenset())


def supplemented_collection(
    collection: frozenset[frozenset[str]], worlds: frozenset[str]
) -> bool:
    """Closure under supersets, checked by single-world extensions."""
    for alpha in collection:
        for w in worlds - alpha:
            if alpha | {w} not in collection:
                return False
    return True


def intersection_closed_collection(
    collection: frozenset[frozenset[str]],
) -> bool:
    return all(a & b in collection for a in collection for b in collection)


def check_frame_class(model: NeighbourhoodModel, frame_class: FrameClass) -> bool:
    """Membership of the model's frame in the given class.

    The supplementation check refuses models with more than
    MAX_WORLDS_FOR_SUPPLEMENTATION worlds (the condition ranges over
    subsets of the world set).
    """
    if frame_class is FrameClass.E:
        return True
    ws = model.world_set()
    if frame_class is FrameClass.M:
        if len(ws) > MAX_WORLDS_FOR_SUPPLEMENTATION:
            raise ModelTooLargeError(
                f"supplementation check: {len(ws)} worlds, too large to verify"
            )
        return all(
            supplemented_collection(collection, ws)
            for _, _, collection in _collections(model)
        )
    if frame_class is FrameClass.C:
        return all(
            intersection_closed_collection(collection)
            for _, _, collection in _collections(model)
        )
    if frame_class is FrameClass.N:
        return all(
            ws in collection for _, _, collection in _collections(model)
        )
    raise ValueError(f"unknown frame class {frame_class!r}")


def _rebuild_neighbourhoods(model, transform) -> NeighbourhoodModel:
    return NeighbourhoodModel(
        worlds=model.worlds,
        constant_domain=model.constant_domain,
        domains=dict(model.domains),
        concepts={w: dict(ext) for w, ext in model.concepts.items()},
        roles={w: dict(ext) for w, ext in model.roles.items()},
        neighbourhoods={
            index: {
                world: transform(per_world.get(world, frozenset()))
                for world in model.worlds
            }
            for index, per_world in model.neighbourhoods.items()
        },
    )


def close_supplementation(model: NeighbourhoodModel) -> NeighbourhoodModel:
    """Smallest pointwise extension closed under supersets; idempotent."""
    ws = model.world_set()
    if len(ws) > MAX_WORLDS_FOR_SUPPLEMENTATION:
        raise ModelTooLargeError(
            f"supplementation closure: {len(ws)} worlds, too large to verify"
        )

    def up_close(collection):
        out = set(collection)
        frontier = list(collection)
        while frontier:
            alpha = frontier.pop()
            for w in ws - alpha:
                bigger = alpha | {w}
                if bigger not in out:
                    out.add(bigger)
                    frontier.append(bigger)
        return frozenset(out)

    return _rebuild_neighbourhoods(model, up_close)


def close_intersection(model: NeighbourhoodModel) -> NeighbourhoodModel:
    """Smallest pointwise extension closed under binary intersection."""

    def meet_close(collection):
        out = set(collection)
        changed = True
        while changed:
            changed = False
            for a in list(out):
                for b in list(out):
                    meet = a & b
                    if meet not in out:
                        out.add(meet)
                        changed = True
        return frozenset(out)

    return _rebuild_neighbourhoods(model, meet_close)


def add_unit(model: NeighbourhoodModel) -> NeighbourhoodModel:
    """Adds the full world set to every neighbourhood collection."""
    ws = model.world_set()
    return _rebuild_neighbourhoods(model, lambda collection: collection | {ws})
