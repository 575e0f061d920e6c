"""Modular graphs of marked nodal curves.

A modular graph records the combinatorial type of a marked nodal curve:
one vertex per irreducible component (labelled with the genus of its
normalization), one half-edge per special point, an involution pairing the
two branches of each node, and labelled tails for the marked points.
Self-edges are involution 2-cycles whose half-edges share a vertex.
"""

from __future__ import annotations

import hashlib
import itertools
import json
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional

from .errors import DomainError

# An edge is the sorted pair of half-edge ids forming an involution 2-cycle.
Edge = tuple[str, str]

MAX_CANONICAL_VERTICES = 12
MAX_CANONICAL_ORDERINGS = 2_000_000


@dataclass(frozen=True, eq=True)
class ModularGraph:
    """Immutable modular graph.

    ``genus`` maps vertex id to the genus of the component's normalization,
    ``attach`` maps half-edge id to its vertex, ``involution`` is the node
    pairing (tails are its fixed points), and ``tails`` maps each fixed
    half-edge to its marked-point label.
    """

    vertices: tuple[str, ...]
    genus: Mapping[str, int]
    half_edges: tuple[str, ...]
    attach: Mapping[str, str]
    involution: Mapping[str, str]
    tails: Mapping[str, str]

    @classmethod
    def build(
        cls,
        genus: Mapping[str, int],
        edges: Iterable[tuple[str, str]] = (),
        tails: Mapping[str, str] = (),
    ) -> "ModularGraph":
        """Assemble a graph from vertex genera, edges ``(v1, v2)`` and a
        mapping of marked-point labels to vertices.  Half-edge ids are
        generated deterministically (``e{k}a``/``e{k}b`` and ``t_{label}``).
        """
        vertices = tuple(genus)
        halves: list[str] = []
        attach: dict[str, str] = {}
        involution: dict[str, str] = {}
        tail_map: dict[str, str] = {}
        for k, (v1, v2) in enumerate(edges):
            h1, h2 = f"e{k}a", f"e{k}b"
            halves += [h1, h2]
            attach[h1], attach[h2] = v1, v2
            involution[h1], involution[h2] = h2, h1
        for label in sorted(dict(tails)):
            h = f"t_{label}"
            halves.append(h)
            attach[h] = dict(tails)[label]
            involution[h] = h
            tail_map[h] = label
        return cls(vertices, dict(genus), tuple(halves), attach, involution, tail_map)

    # -- derived views -------------------------------------------------

    def edges(self) -> tuple[Edge, ...]:
        """Involution 2-cycles as sorted half-edge pairs, in sorted order."""
        seen = set()
        out = []
        for h in self.half_edges:
            j = self.involution[h]
            if j != h:
                e = (h, j) if h < j else (j, h)
                if e not in seen:
                    seen.add(e)
                    out.append(e)
        return tuple(sorted(out))

    def edge_endpoints(self, edge: Edge) -> tuple[str, str]:
        return (self.attach[edge[0]], self.attach[edge[1]])

    def is_self_edge(self, edge: Edge) -> bool:
        v1, v2 = self.edge_endpoints(edge)
        return v1 == v2

    def split_edges(self) -> tuple[Edge, ...]:
        return tuple(e for e in self.edges() if not self.is_self_edge(e))

    def self_edges(self) -> tuple[Edge, ...]:
        return tuple(e for e in self.edges() if self.is_self_edge(e))

    def halves_at(self, v: str) -> tuple[str, ...]:
        return tuple(h for h in self.half_edges if self.attach[h] == v)

    def tails_at(self, v: str) -> tuple[str, ...]:
        return tuple(sorted(self.tails[h] for h in self.halves_at(v) if h in self.tails))

    def tail_labels(self) -> tuple[str, ...]:
        return tuple(sorted(self.tails.values()))


@dataclass(frozen=True)
class ValidationReport:
    errors: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.errors


def validate(g: ModularGraph) -> ValidationReport:
    """Check every structural invariant; total, never raises."""
    errors: list[str] = []
    if len(set(g.vertices)) != len(g.vertices):
        errors.append("duplicate vertex ids")
    if len(set(g.half_edges)) != len(g.half_edges):
        errors.append("duplicate half-edge ids")
    vset, hset = set(g.vertices), set(g.half_edges)
    if set(g.genus) != vset:
        errors.append("genus map not defined on exactly the vertex set")
    else:
        for v, gv in g.genus.items():
            if not isinstance(gv, int) or gv < 0:
                errors.append(f"genus of {v} is not a non-negative integer")
    if set(g.attach) != hset:
        errors.append("attachment map not defined on exactly the half-edge set")
    else:
        for h, v in g.attach.items():
            if v not in vset:
                errors.append(f"half-edge {h} attaches to unknown vertex {v}")
    if set(g.involution) != hset or any(v not in hset for v in g.involution.values()):
        errors.append("involution not a map of the half-edge set to itself")
    else:
        if any(g.involution[g.involution[h]] != h for h in g.half_edges):
            errors.append("involution not self-inverse")
        else:
            fixed = {h for h in g.half_edges if g.involution[h] == h}
            if set(g.tails) != fixed:
                errors.append("tail labels not a bijection from the involution fixed points")
            elif len(set(g.tails.values())) != len(g.tails):
                errors.append("tail labels not distinct")
    if not errors and g.vertices:
        seen = {g.vertices[0]}
        frontier = [g.vertices[0]]
        while frontier:
            v = frontier.pop()
            for h in g.half_edges:
                if g.attach[h] == v:
                    w = g.attach[g.involution[h]]
                    if w not in seen:
                        seen.add(w)
                        frontier.append(w)
        if seen != vset:
            errors.append("disconnected")
    if not g.vertices:
        errors.append("empty vertex set")
    return ValidationReport(tuple(errors))


def _require_valid(g: ModularGraph) -> None:
    report = validate(g)
    if not report.ok:
        raise DomainError("invalid graph: " + "; ".join(report.errors))


def total_genus(g: ModularGraph) -> int:
    """Sum of vertex genera plus the first Betti number of the graph."""
    _require_valid(g)
    return sum(g.genus.values()) + len(g.edges()) - len(g.vertices) + 1


def special_point_count(g: ModularGraph, v: str) -> int:
    """Half-edges at ``v``; a self-node counts twice on the normalization."""
    if v not in g.vertices:
        raise DomainError(f"unknown vertex {v}")
    return len(g.halves_at(v))


def is_stable(g: ModularGraph) -> bool:
    """Every genus-0 vertex carries >= 3 special points, genus-1 >= 1."""
    _require_valid(g)
    for v in g.vertices:
        sp = special_point_count(g, v)
        if g.genus[v] == 0 and sp < 3:
            return False
        if g.genus[v] == 1 and sp < 1:
            return False
    return True


# -- canonical form ----------------------------------------------------
#
# Exhaustive minimization of a faithful encoding over vertex orderings,
# restricted to the classes of an iterated degree/genus/tail refinement.
# The encoding reconstructs the graph, so equal encodings are isomorphic
# by construction and the refinement only prunes the search.


def _vertex_profiles(g: ModularGraph, extra: Optional[Mapping[str, int]]):
    loops = {v: 0 for v in g.vertices}
    for e in g.self_edges():
        loops[g.attach[e[0]]] += 1
    profiles = {}
    for v in g.vertices:
        ex = (1, extra[v]) if extra is not None else (0, 0)
        profiles[v] = (g.genus[v], ex, g.tails_at(v), len(g.halves_at(v)), loops[v])
    return profiles


def _refined_classes(g: ModularGraph, extra: Optional[Mapping[str, int]]):
    profiles = _vertex_profiles(g, extra)
    order = sorted(set(profiles.values()))
    color = {v: order.index(profiles[v]) for v in g.vertices}
    neighbors = []  # (v, w) with multiplicity, per split-edge end
    for e in g.split_edges():
        v1, v2 = g.edge_endpoints(e)
        neighbors += [(v1, v2), (v2, v1)]
    while True:
        keys = {
            v: (color[v], tuple(sorted(color[w] for (u, w) in neighbors if u == v)))
            for v in g.vertices
        }
        order = sorted(set(keys.values()))
        new_color = {v: order.index(keys[v]) for v in g.vertices}
        if len(set(new_color.values())) == len(set(color.values())):
            color = new_color
            break
        color = new_color
    classes: dict[int, list[str]] = {}
    for v in sorted(g.vertices):
        classes.setdefault(color[v], []).append(v)
    return [classes[c] for c in sorted(classes)]


def _encode(g: ModularGraph, extra, position: Mapping[str, int]):
    rows = [None] * len(g.vertices)
    for v, i in position.items():
        ex = (1, extra[v]) if extra is not None else (0, 0)
        rows[i] = (g.genus[v], ex, g.tails_at(v))
    erows = sorted(
        tuple(sorted((position[v1], position[v2])))
        for (v1, v2) in (g.edge_endpoints(e) for e in g.edges())
    )
    return (tuple(rows), tuple(erows))


def _canonical_order(
    g: ModularGraph,
    extra: Optional[Mapping[str, int]] = None,
    max_vertices: int = MAX_CANONICAL_VERTICES,
):
    """Minimal encoding and the vertex order achieving it."""
    _require_valid(g)
    if len(g.vertices) > max_vertices:
        raise DomainError(
            f"canonical form limited to {max_vertices} vertices, got {len(g.vertices)}"
        )
    classes = _refined_classes(g, extra)
    count = 1
    for cls in classes:
        for k in range(2, len(cls) + 1):
            count *= k
        if count > MAX_CANONICAL_ORDERINGS:
            raise DomainError("canonical form: ordering search space too large")
    best = None
    for perm_choice in itertools.product(*(itertools.permutations(c) for c in classes)):
        order = [v for chunk in perm_choice for v in chunk]
        position = {v: i for i, v in enumerate(order)}
        enc = _encode(g, extra, position)
        if best is None or enc < best[0]:
            best = (enc, tuple(order))
    return best


def canonical_key(g: ModularGraph, extra: Optional[Mapping[str, int]] = None):
    """Isomorphism-invariant encoding (with optional per-vertex labels)."""
    return _canonical_order(g, extra)[0]


@dataclass(frozen=True)
class CanonicalGraph:
    graph: ModularGraph
    digest: str
    vertex_map: Mapping[str, str]
    half_edge_map: Mapping[str, str]


def canonical_form(g: ModularGraph, max_vertices: int = MAX_CANONICAL_VERTICES) -> CanonicalGraph:
    """Relabel ``g`` canonically; isomorphic graphs get identical digests."""
    enc, order = _canonical_order(g, None, max_vertices)
    position = {v: i for i, v in enumerate(order)}
    vertex_map = {v: f"v{position[v]}" for v in g.vertices}
    genus = {vertex_map[v]: g.genus[v] for v in g.vertices}

    half_edge_map: dict[str, str] = {}
    labels = g.tail_labels()
    for h, label in g.tails.items():
        half_edge_map[h] = f"t{labels.index(label)}"

    def edge_key(e: Edge):
        v1, v2 = g.edge_endpoints(e)
        return (tuple(sorted((position[v1], position[v2]))), e)

    halves: list[str] = []
    attach: dict[str, str] = {}
    involution: dict[str, str] = {}
    tails: dict[str, str] = {}
    for k, e in enumerate(sorted(g.edges(), key=edge_key)):
        ends = sorted(e, key=lambda h: (position[g.attach[h]], h))
        for offset, h in enumerate(ends):
            name = f"h{2 * k + offset}"
            half_edge_map[h] = name
            halves.append(name)
            attach[name] = vertex_map[g.attach[h]]
        involution[f"h{2 * k}"] = f"h{2 * k + 1}"
        involution[f"h{2 * k + 1}"] = f"h{2 * k}"
    for h, label in sorted(g.tails.items(), key=lambda kv: kv[1]):
        name = half_edge_map[h]
        halves.append(name)
        attach[name] = vertex_map[g.attach[h]]
        involution[name] = name
        tails[name] = label

    canon = ModularGraph(
        tuple(f"v{i}" for i in range(len(order))),
        genus,
        tuple(halves),
        attach,
        involution,
        tails,
    )
    digest = hashlib.sha256(json.dumps(enc, sort_keys=True).encode()).hexdigest()
    return CanonicalGraph(canon, digest, vertex_map, half_edge_map)


# -- JSON interface ----------------------------------------------------


def graph_to_json(g: ModularGraph) -> dict:
    return {
        "vertices": [{"id": v, "genus": g.genus[v]} for v in g.vertices],
        "half_edges": [{"id": h, "vertex": g.attach[h]} for h in g.half_edges],
        "involution": [list(e) for e in g.edges()],
        "tails": {h: g.tails[h] for h in sorted(g.tails)},
    }


def graph_from_json(data: dict) -> ModularGraph:
    if not isinstance(data, dict):
        raise DomainError("graph document must be a JSON object")
    allowed = {"vertices", "half_edges", "involution", "tails"}
    unknown = set(data) - allowed
    if unknown:
        raise DomainError(f"unknown graph keys: {sorted(unknown)}")
    missing = allowed - set(data)
    if missing:
        raise DomainError(f"missing graph keys: {sorted(missing)}")
    try:
        vertices = tuple(row["id"] for row in data["vertices"])
        genus = {row["id"]: row["genus"] for row in data["vertices"]}
        half_edges = tuple(row["id"] for row in data["half_edges"])
        attach = {row["id"]: row["vertex"] for row in data["half_edges"]}
    except (TypeError, KeyError) as exc:
        raise DomainError(f"malformed graph document: {exc}") from exc
    involution = {h: h for h in half_edges}
    for pair in data["involution"]:
        if not isinstance(pair, list) or len(pair) != 2:
            raise DomainError(f"involution entries must be pairs, got {pair!r}")
        h1, h2 = pair
        involution[h1] = h2
        involution[h2] = h1
    tails = {h: str(label) for h, label in data["tails"].items()}
    return ModularGraph(vertices, genus, half_edges, attach, involution, tails)
