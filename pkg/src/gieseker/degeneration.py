"""Multidegree-labelled graphs, Gieseker validity, and the degeneration calculus.

A degeneracy type is a modular graph together with a bundle degree on each
vertex.  It is a valid stratum label when every unstable vertex is a
Gieseker bubble (a genus-0 vertex with exactly two node branches carrying
degree 1), no two bubbles are adjacent, and contracting the bubbles leaves
a stable graph.  The three elementary degenerations and their inverse
resolutions generate the closure order on stratum labels.
"""

from __future__ import annotations

import hashlib
import itertools
import json
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .errors import DomainError
from .modular_graph import (
    Edge,
    ModularGraph,
    canonical_key,
    graph_from_json,
    graph_to_json,
    special_point_count,
    validate,
)

MAX_CLOSURE_STRATA = 50_000


@dataclass(frozen=True, eq=True)
class DegeneracyType:
    """A modular graph with a multidegree labelling, one stratum label."""

    graph: ModularGraph
    multidegree: Mapping[str, int]

    @property
    def total_degree(self) -> int:
        return sum(self.multidegree.values())

    def degree(self, v: str) -> int:
        return self.multidegree[v]


def _require_labelled(dt: DegeneracyType) -> None:
    report = validate(dt.graph)
    if not report.ok:
        raise DomainError("invalid graph: " + "; ".join(report.errors))
    if set(dt.multidegree) != set(dt.graph.vertices):
        raise DomainError("multidegree not defined on exactly the vertex set")


def degeneracy_key(dt: DegeneracyType) -> str:
    """Canonical digest of the labelled graph (degrees included)."""
    enc = canonical_key(dt.graph, extra=dict(dt.multidegree))
    return hashlib.sha256(json.dumps(enc, sort_keys=True).encode()).hexdigest()


@dataclass(frozen=True)
class GiesekerVerdict:
    valid: bool
    bubbles: frozenset[str]
    reasons: tuple[str, ...]


def classify_gieseker(dt: DegeneracyType) -> GiesekerVerdict:
    """Decide whether the labelled graph is a Gieseker stratum label."""
    _require_labelled(dt)
    g = dt.graph
    reasons: list[str] = []
    bubbles: set[str] = set()
    for v in g.vertices:
        if g.genus[v] != 0:
            continue
        sp = special_point_count(g, v)
        if sp < 2:
            reasons.append(f"genus-0 vertex {v} has fewer than 2 special points")
        elif sp == 2:
            halves = g.halves_at(v)
            if any(h in g.tails for h in halves):
                reasons.append(f"unstable vertex {v} carries a marked point (bubbles only at nodes)")
            elif g.involution[halves[0]] == halves[1]:
                reasons.append(f"unstable vertex {v} closes up into a self-edge")
            elif dt.multidegree[v] != 1:
                reasons.append(f"bubble degree != 1 at vertex {v}")
            else:
                bubbles.add(v)
    for e in g.edges():
        v1, v2 = g.edge_endpoints(e)
        if v1 in bubbles and v2 in bubbles:
            reasons.append(f"adjacent bubbles {v1}, {v2}")
    # Contracting bubbles keeps every other vertex's special-point count, so
    # stability of the contraction means stability of each non-bubble vertex.
    for v in g.vertices:
        if v in bubbles:
            continue
        sp = special_point_count(g, v)
        if g.genus[v] == 1 and sp < 1:
            reasons.append(f"contraction unstable: genus-1 vertex {v} has no special point")
    return GiesekerVerdict(not reasons, frozenset(bubbles), tuple(reasons))


@dataclass(frozen=True)
class Stabilization:
    """Stable model of a Gieseker type.  Bundle data is dropped; the
    contraction map sends kept vertices to themselves and each bubble to
    the node marker of the merged edge (its sorted half-edge pair)."""

    graph: ModularGraph
    contraction: Mapping[str, object]


def stabilize(dt: DegeneracyType) -> Stabilization:
    verdict = classify_gieseker(dt)
    if not verdict.valid:
        raise DomainError("not a Gieseker type: " + "; ".join(verdict.reasons))
    g = dt.graph
    involution = dict(g.involution)
    removed: set[str] = set()
    contraction: dict[str, object] = {v: v for v in g.vertices if v not in verdict.bubbles}
    for b in sorted(verdict.bubbles):
        hb1, hb2 = sorted(g.halves_at(b))
        hu, hw = involution[hb1], involution[hb2]
        involution[hu], involution[hw] = hw, hu
        removed |= {hb1, hb2}
        contraction[b] = (hu, hw) if hu < hw else (hw, hu)
    stable = ModularGraph(
        tuple(v for v in g.vertices if v not in verdict.bubbles),
        {v: g.genus[v] for v in g.vertices if v not in verdict.bubbles},
        tuple(h for h in g.half_edges if h not in removed),
        {h: v for h, v in g.attach.items() if h not in removed},
        {h: j for h, j in involution.items() if h not in removed},
        dict(g.tails),
    )
    return Stabilization(stable, contraction)


# -- elementary deformations (smoothings) and degenerations --------------


def deform_resolve_self(dt: DegeneracyType, edge: Edge) -> DegeneracyType:
    """Delete a self-edge and raise the genus of its vertex by one."""
    _require_labelled(dt)
    g = dt.graph
    if edge not in g.edges() or not g.is_self_edge(edge):
        raise DomainError(f"{edge} is not a self-edge")
    v = g.attach[edge[0]]
    keep = [h for h in g.half_edges if h not in edge]
    graph = ModularGraph(
        g.vertices,
        {u: gu + (1 if u == v else 0) for u, gu in g.genus.items()},
        tuple(keep),
        {h: g.attach[h] for h in keep},
        {h: g.involution[h] for h in keep},
        dict(g.tails),
    )
    return DegeneracyType(graph, dict(dt.multidegree))


def deform_resolve_split(dt: DegeneracyType, edge: Edge) -> DegeneracyType:
    """Merge the two endpoints of a splitting edge, adding genera and
    degrees; other edges between them become self-edges."""
    _require_labelled(dt)
    g = dt.graph
    if edge not in g.edges() or g.is_self_edge(edge):
        raise DomainError(f"{edge} is not a splitting edge")
    v1, v2 = sorted(g.edge_endpoints(edge))
    keep = [h for h in g.half_edges if h not in edge]
    genus = {u: gu for u, gu in g.genus.items() if u != v2}
    genus[v1] = g.genus[v1] + g.genus[v2]
    degrees = {u: d for u, d in dt.multidegree.items() if u != v2}
    degrees[v1] = dt.multidegree[v1] + dt.multidegree[v2]
    graph = ModularGraph(
        tuple(u for u in g.vertices if u != v2),
        genus,
        tuple(keep),
        {h: (v1 if g.attach[h] == v2 else g.attach[h]) for h in keep},
        {h: g.involution[h] for h in keep},
        dict(g.tails),
    )
    return DegeneracyType(graph, degrees)


def _fresh_ids(existing: Iterable[str], prefix: str, count: int) -> list[str]:
    taken = set(existing)
    out: list[str] = []
    i = 0
    while len(out) < count:
        cand = f"{prefix}{i}"
        if cand not in taken:
            taken.add(cand)
            out.append(cand)
        i += 1
    return out


def degenerate_self(dt: DegeneracyType, vertex: str) -> DegeneracyType:
    """Lower the genus of ``vertex`` by one and add a self-edge."""
    _require_labelled(dt)
    g = dt.graph
    if vertex not in g.vertices:
        raise DomainError(f"unknown vertex {vertex}")
    if g.genus[vertex] < 1:
        raise DomainError(f"vertex {vertex} has genus 0, nothing to degenerate")
    h1, h2 = _fresh_ids(g.half_edges, "x", 2)
    graph = ModularGraph(
        g.vertices,
        {u: gu - (1 if u == vertex else 0) for u, gu in g.genus.items()},
        g.half_edges + (h1, h2),
        {**g.attach, h1: vertex, h2: vertex},
        {**g.involution, h1: h2, h2: h1},
        dict(g.tails),
    )
    return DegeneracyType(graph, dict(dt.multidegree))


def degenerate_split(
    dt: DegeneracyType,
    vertex: str,
    genus_split: tuple[int, int],
    degree_split: tuple[int, int],
    moved: Iterable[str] = (),
) -> DegeneracyType:
    """Split ``vertex`` into two vertices joined by a new edge.  ``moved``
    lists the incident half-edges that migrate to the new vertex; genera
    and degrees must split additively."""
    _require_labelled(dt)
    g = dt.graph
    if vertex not in g.vertices:
        raise DomainError(f"unknown vertex {vertex}")
    g1, g2 = genus_split
    d1, d2 = degree_split
    if g1 < 0 or g2 < 0 or g1 + g2 != g.genus[vertex]:
        raise DomainError(f"genus split {genus_split} does not sum to {g.genus[vertex]}")
    if d1 + d2 != dt.multidegree[vertex]:
        raise DomainError(f"degree split {degree_split} does not sum to {dt.multidegree[vertex]}")
    moved = set(moved)
    if not moved <= set(g.halves_at(vertex)):
        raise DomainError("moved half-edges must be attached to the split vertex")
    (new_v,) = _fresh_ids(g.vertices, "w", 1)
    h1, h2 = _fresh_ids(g.half_edges, "x", 2)
    attach = {h: (new_v if h in moved else g.attach[h]) for h in g.half_edges}
    graph = ModularGraph(
        g.vertices + (new_v,),
        {**{u: gu for u, gu in g.genus.items()}, vertex: g1, new_v: g2},
        g.half_edges + (h1, h2),
        {**attach, h1: vertex, h2: new_v},
        {**g.involution, h1: h2, h2: h1},
        dict(g.tails),
    )
    degrees = {**dict(dt.multidegree), vertex: d1, new_v: d2}
    return DegeneracyType(graph, degrees)


def gieseker_bubble(dt: DegeneracyType, edge: Edge, side: str) -> DegeneracyType:
    """Replace an edge between stable vertices by a bubble (genus 0,
    degree 1) joined to both ends, subtracting 1 from the degree on
    ``side``."""
    _require_labelled(dt)
    g = dt.graph
    if edge not in g.edges():
        raise DomainError(f"unknown edge {edge}")
    v1, v2 = g.edge_endpoints(edge)
    for v in {v1, v2}:
        sp = special_point_count(g, v)
        if (g.genus[v] == 0 and sp < 3) or (g.genus[v] == 1 and sp < 1):
            raise DomainError(f"edge endpoint {v} is not a stable vertex")
    if side not in (v1, v2):
        raise DomainError(f"side {side} is not an endpoint of {edge}")
    (bubble,) = _fresh_ids(g.vertices, "b", 1)
    hb1, hb2 = _fresh_ids(g.half_edges, "x", 2)
    h1, h2 = edge
    graph = ModularGraph(
        g.vertices + (bubble,),
        {**dict(g.genus), bubble: 0},
        g.half_edges + (hb1, hb2),
        {**dict(g.attach), hb1: bubble, hb2: bubble},
        {**dict(g.involution), h1: hb1, hb1: h1, h2: hb2, hb2: h2},
        dict(g.tails),
    )
    degrees = {**dict(dt.multidegree), bubble: 1}
    degrees[side] -= 1
    return DegeneracyType(graph, degrees)


# -- closure enumeration -------------------------------------------------


def _in_band(dt: DegeneracyType, band: tuple[int, int]) -> bool:
    lo, hi = band
    return all(lo <= d <= hi for d in dt.multidegree.values())


def _elementary_moves(dt: DegeneracyType, band: tuple[int, int]):
    """All single elementary degenerations staying inside the band."""
    lo, hi = band
    g = dt.graph
    for v in g.vertices:
        if g.genus[v] >= 1:
            yield "degenerate_self", degenerate_self(dt, v)
    for v in g.vertices:
        gv, dv = g.genus[v], dt.multidegree[v]
        halves = g.halves_at(v)
        for g1 in range(gv + 1):
            for d1 in range(max(lo, dv - hi), min(hi, dv - lo) + 1):
                for r in range(len(halves) + 1):
                    for moved in itertools.combinations(halves, r):
                        yield (
                            "degenerate_split",
                            degenerate_split(dt, v, (g1, gv - g1), (d1, dv - d1), moved),
                        )
    if lo <= 1 <= hi:
        for e in g.edges():
            v1, v2 = g.edge_endpoints(e)
            if any(
                (g.genus[v] == 0 and special_point_count(g, v) < 3)
                or (g.genus[v] == 1 and special_point_count(g, v) < 1)
                for v in {v1, v2}
            ):
                continue
            for side in sorted({v1, v2}):
                if dt.multidegree[side] - 1 >= lo:
                    yield "gieseker_bubble", gieseker_bubble(dt, e, side)


def closure_poset(
    dt: DegeneracyType,
    band: tuple[int, int],
    max_strata: int = MAX_CLOSURE_STRATA,
) -> tuple[dict[str, DegeneracyType], list[tuple[str, str, str]]]:
    """Breadth-first closure of a stratum label under the elementary
    degenerations, with multidegrees confined to the band ``(lo, hi)``.

    Only Gieseker-valid labels are retained: the elementary operations can
    never repair an invalid vertex, so invalid labels have no valid
    descendants and pruning them loses nothing.  Returns the strata keyed
    by canonical digest and the covering arrows labelled by operation.
    """
    lo, hi = band
    if lo > hi:
        raise DomainError("empty degree band")
    if not classify_gieseker(dt).valid:
        raise DomainError("closure of a non-Gieseker label")
    if not _in_band(dt, band):
        raise DomainError("starting multidegree outside the band")
    start = degeneracy_key(dt)
    strata = {start: dt}
    arrows: list[tuple[str, str, str]] = []
    seen_arrows: set[tuple[str, str, str]] = set()
    frontier = [start]
    while frontier:
        next_frontier: list[str] = []
        for key in frontier:
            current = strata[key]
            for op, cand in _elementary_moves(current, band):
                if not _in_band(cand, band) or not classify_gieseker(cand).valid:
                    continue
                ck = degeneracy_key(cand)
                arrow = (key, ck, op)
                if arrow not in seen_arrows:
                    seen_arrows.add(arrow)
                    arrows.append(arrow)
                if ck not in strata:
                    strata[ck] = cand
                    next_frontier.append(ck)
                    if len(strata) > max_strata:
                        raise DomainError("closure enumeration exceeded the stratum cap")
        frontier = next_frontier
    return strata, sorted(arrows)


def closure_strata(
    dt: DegeneracyType, band: tuple[int, int], max_strata: int = MAX_CLOSURE_STRATA
) -> dict[str, DegeneracyType]:
    """Digest-keyed set of strata in the closure of ``dt`` within the band."""
    return closure_poset(dt, band, max_strata)[0]


# -- deformations of a base graph ----------------------------------------


@dataclass(frozen=True)
class DeformationOfBase:
    """A stratum over a fixed base: the kept nodes, the partition of base
    vertices into deformed components, the stable degree on each block,
    and which kept nodes carry bubbles."""

    base: ModularGraph
    kept_edges: tuple[Edge, ...]
    blocks: tuple[tuple[str, ...], ...]
    block_degrees: Mapping[tuple[str, ...], int]
    bubbled_edges: tuple[Edge, ...]

    def block_of(self, v: str) -> tuple[str, ...]:
        for block in self.blocks:
            if v in block:
                return block
        raise DomainError(f"vertex {v} not covered by the partition")

    @property
    def total_degree(self) -> int:
        return sum(self.block_degrees.values()) + len(self.bubbled_edges)


def _dropped_components(base: ModularGraph, kept: Sequence[Edge]) -> tuple[tuple[str, ...], ...]:
    dropped = [e for e in base.edges() if e not in set(kept)]
    parent = {v: v for v in base.vertices}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for e in dropped:
        v1, v2 = base.edge_endpoints(e)
        parent[find(v1)] = find(v2)
    groups: dict[str, list[str]] = {}
    for v in sorted(base.vertices):
        groups.setdefault(find(v), []).append(v)
    return tuple(sorted(tuple(sorted(g)) for g in groups.values()))


def induced_blocks(base: ModularGraph, kept_edges: Iterable[Edge]) -> tuple[tuple[str, ...], ...]:
    """Partition forced by a choice of kept edges: the components of the
    dropped ones (vertices merge only along smoothed nodes)."""
    return _dropped_components(base, tuple(kept_edges))


def make_deformation(
    base: ModularGraph,
    kept_edges: Iterable[Edge],
    block_degrees: Mapping[tuple[str, ...], int],
    bubbled_edges: Iterable[Edge] = (),
) -> DeformationOfBase:
    """Build a deformation from its kept edges; the partition is forced
    (blocks are the components of the dropped edges, which are the only
    way vertices can merge)."""
    kept = tuple(sorted(set(kept_edges)))
    if not set(kept) <= set(base.edges()):
        raise DomainError("kept edges must be edges of the base")
    blocks = _dropped_components(base, kept)
    if set(block_degrees) != set(blocks):
        raise DomainError("block degrees must be indexed by the induced blocks")
    bubbled = tuple(sorted(set(bubbled_edges)))
    if not set(bubbled) <= set(kept):
        raise DomainError("bubbled edges must be kept edges")
    return DeformationOfBase(base, kept, blocks, dict(block_degrees), bubbled)


def quotient_graph(defo: DeformationOfBase) -> tuple[ModularGraph, Mapping[str, str]]:
    """Stable model of the deformation (no bubbles): vertices are the
    blocks (named by their smallest member), kept edges survive with their
    base half-edge ids, dropped edges internal to a block feed its genus."""
    base = defo.base
    block_name = {block: block[0] for block in defo.blocks}
    vmap = {v: block_name[defo.block_of(v)] for v in base.vertices}
    dropped = [e for e in base.edges() if e not in set(defo.kept_edges)]
    genus = {}
    for block in defo.blocks:
        internal = [e for e in dropped if set(base.edge_endpoints(e)) <= set(block)]
        genus[block_name[block]] = sum(base.genus[v] for v in block) + len(internal) - len(block) + 1
    halves = [h for h in base.half_edges if h in base.tails or any(h in e for e in defo.kept_edges)]
    graph = ModularGraph(
        tuple(block_name[b] for b in defo.blocks),
        genus,
        tuple(halves),
        {h: vmap[base.attach[h]] for h in halves},
        {h: (base.involution[h] if base.involution[h] in halves else h) for h in halves},
        dict(base.tails),
    )
    return graph, vmap


def find_isomorphism(g1: ModularGraph, g2: ModularGraph):
    """Genus- and tail-respecting isomorphism, as a (vertex map, edge map)
    pair, or ``None``.  Tail labels must match pointwise, so vertices
    carrying tails are pinned."""
    if len(g1.vertices) != len(g2.vertices) or len(g1.edges()) != len(g2.edges()):
        return None
    if g1.tail_labels() != g2.tail_labels():
        return None
    pinned: dict[str, str] = {}
    at2 = {label: g2.attach[h] for h, label in g2.tails.items()}
    for h, label in g1.tails.items():
        target = at2[label]
        v = g1.attach[h]
        if pinned.get(v, target) != target:
            return None
        pinned[v] = target
    free1 = [v for v in sorted(g1.vertices) if v not in pinned]
    used = set(pinned.values())
    free2 = [v for v in sorted(g2.vertices) if v not in used]
    if len(set(pinned.values())) != len(pinned):
        return None
    for perm in itertools.permutations(free2):
        vmap = dict(pinned)
        vmap.update(zip(free1, perm))
        if any(g1.genus[v] != g2.genus[vmap[v]] for v in g1.vertices):
            continue
        pairs1: dict[tuple[str, str], list[Edge]] = {}
        for e in g1.edges():
            pairs1.setdefault(tuple(sorted((vmap[v] for v in g1.edge_endpoints(e)))), []).append(e)
        pairs2: dict[tuple[str, str], list[Edge]] = {}
        for e in g2.edges():
            pairs2.setdefault(tuple(sorted(g2.edge_endpoints(e))), []).append(e)
        if {k: len(v) for k, v in pairs1.items()} != {k: len(v) for k, v in pairs2.items()}:
            continue
        emap = {}
        for key, group in pairs1.items():
            for e1, e2 in zip(sorted(group), sorted(pairs2[key])):
                emap[e1] = e2
        return vmap, emap
    return None


def deformation_of(dt: DegeneracyType, base: ModularGraph) -> DeformationOfBase:
    """Express a Gieseker type over ``base``: contract its bubbles, then
    search for kept edges whose quotient matches the stable model."""
    report = validate(base)
    if not report.ok:
        raise DomainError("invalid base graph: " + "; ".join(report.errors))
    st = stabilize(dt)
    markers = {marker for marker in st.contraction.values() if isinstance(marker, tuple)}
    base_edges = base.edges()
    for r in range(len(base_edges), -1, -1):
        for kept in itertools.combinations(base_edges, r):
            blocks = _dropped_components(base, kept)
            defo0 = DeformationOfBase(base, kept, blocks, {b: 0 for b in blocks}, ())
            q, _ = quotient_graph(defo0)
            match = find_isomorphism(q, st.graph)
            if match is None:
                continue
            vmap, emap = match
            block_name = {block: block[0] for block in blocks}
            degrees = {b: dt.multidegree[vmap[block_name[b]]] for b in blocks}
            bubbled = tuple(sorted(e for e in kept if emap[e] in markers))
            return DeformationOfBase(base, tuple(sorted(kept)), blocks, degrees, bubbled)
    raise DomainError("not expressible as a deformation of the base")


# -- JSON interface ------------------------------------------------------


def degeneracy_to_json(dt: DegeneracyType) -> dict:
    data = graph_to_json(dt.graph)
    data["multidegree"] = {v: dt.multidegree[v] for v in dt.graph.vertices}
    return data


def degeneracy_from_json(data: dict) -> DegeneracyType:
    if not isinstance(data, dict) or "multidegree" not in data:
        raise DomainError("degeneracy document must carry a multidegree")
    rest = {k: v for k, v in data.items() if k != "multidegree"}
    graph = graph_from_json(rest)
    multidegree = {v: int(d) for v, d in data["multidegree"].items()}
    return DegeneracyType(graph, multidegree)
