"""Twisted invariants of the classifying stack of line bundles, in the
two explicit genus-0 cases, computed as truncation-stable integers.

The three-pointed case reduces to a single block variable per degree.
The four-pointed case is computed on the boundary fiber: an endless chain
of rational curves whose fixed points carry the labels (d+n-1, 1, -n) and
whose charts give tangent weights (1,-1) and (-1,1).  Two independent
engines compute the chain Euler characteristic: explicit section
progressions glued over the nodes, and per-component fixed-point terms
expanded by exact division.  The invariant is the weight-zero part, and
finiteness shows up as stability under window padding.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Optional

from .atlas import FixedComponentLabel, Partition, nt2b
from .character import (
    AdmissibleClassSpec,
    LaurentCharacter,
    char_add,
    char_mul,
    char_pow,
    class_weight,
    degree_range,
    index_character,
    vanishing_bounds,
    weight_zero_part,
)
from .degeneration import DegeneracyType
from .errors import DomainError
from .modular_graph import ModularGraph

Vector = tuple[Fraction, Fraction]

TANGENT_Z: Vector = (Fraction(1), Fraction(-1))
TANGENT_W: Vector = (Fraction(-1), Fraction(1))

CHAIN_MARKINGS_PLUS = ("1", "2")
CHAIN_MARKINGS_MINUS = ("3", "4")


def chain_base_graph() -> ModularGraph:
    """The nodal four-pointed genus-0 curve: two rational components, one
    node, two marked points on each side.  Vertex ``a`` is the plus side
    (it carries the smallest id, fixing the orientation convention)."""
    return ModularGraph.build(
        {"a": 0, "b": 0},
        edges=[("a", "b")],
        tails={"1": "a", "2": "a", "3": "b", "4": "b"},
    )


def chain_point_blocks() -> dict[str, tuple[str, ...]]:
    blocks = {label: ("a",) for label in CHAIN_MARKINGS_PLUS}
    blocks.update({label: ("b",) for label in CHAIN_MARKINGS_MINUS})
    return blocks


def _vec_add(a: Vector, b: Vector) -> Vector:
    return (a[0] + b[0], a[1] + b[1])


def _vec_scale(c, a: Vector) -> Vector:
    c = Fraction(c)
    return (c * a[0], c * a[1])


@dataclass(frozen=True)
class InvariantResult:
    value: int
    contributing_degrees: tuple[int, ...]
    breakdown: Mapping[int, int]
    stabilization_truncation: int


@dataclass(frozen=True)
class ChainFixedPoint:
    n: int
    sums: tuple[int, int]  # (plus content d+n-1, minus content -n)
    tangent_weights: tuple[Vector, Vector]
    weight: LaurentCharacter
    stratum: DegeneracyType


@dataclass(frozen=True)
class ChainComponent:
    n: int
    endpoints: tuple[int, int]
    stratum: DegeneracyType


@dataclass(frozen=True)
class ChainModel:
    total_degree: int
    window: tuple[int, int]
    points: tuple[ChainFixedPoint, ...]
    components: tuple[ChainComponent, ...]
    boundary_strata: tuple[DegeneracyType, DegeneracyType]

    def point(self, n: int) -> ChainFixedPoint:
        for p in self.points:
            if p.n == n:
                return p
        raise DomainError(f"fixed point {n} outside the window")


def _chain_fixed_stratum(d: int, n: int) -> DegeneracyType:
    graph = ModularGraph.build(
        {"a": 0, "bub": 0, "b": 0},
        edges=[("a", "bub"), ("bub", "b")],
        tails={"1": "a", "2": "a", "3": "b", "4": "b"},
    )
    return DegeneracyType(graph, {"a": d + n - 1, "bub": 1, "b": -n})


def _chain_open_stratum(d: int, n: int) -> DegeneracyType:
    return DegeneracyType(chain_base_graph(), {"a": d + n, "b": -n})


def _chain_label(d: int, n: int) -> FixedComponentLabel:
    partition = Partition.of([("a",), ("b",)])
    return FixedComponentLabel(partition, {("a",): d + n - 1, ("b",): -n})


def build_chain_model(d: int, spec: AdmissibleClassSpec, window: tuple[int, int]) -> ChainModel:
    """Chain of rational curves over the boundary point, truncated to the
    fixed points pt_n with n in the window; components join consecutive
    fixed points, with a half component hanging off each end."""
    lo, hi = window
    if lo > hi:
        raise DomainError("empty chain window")
    genera = {("a",): 0, ("b",): 0}
    point_blocks = chain_point_blocks()
    points = []
    for n in range(lo, hi + 1):
        label = _chain_label(d, n)
        points.append(
            ChainFixedPoint(
                n,
                (d + n - 1, -n),
                (TANGENT_Z, TANGENT_W),
                class_weight(spec, label, genera, point_blocks),
                _chain_fixed_stratum(d, n),
            )
        )
    components = tuple(
        ChainComponent(n, (n, n + 1), _chain_open_stratum(d, n)) for n in range(lo, hi)
    )
    boundary = (_chain_open_stratum(d, lo - 1), _chain_open_stratum(d, hi))
    return ChainModel(d, window, tuple(points), components, boundary)


# -- line data on the chain ---------------------------------------------------


@dataclass(frozen=True)
class ChainLineData:
    """Restriction of a class to the chain: a line bundle given by its
    per-component integer degrees and per-fixed-point fiber exponents,
    times an optional locally-constant multiplier character per point."""

    degrees: Mapping[int, int]
    fibers: Mapping[int, Vector]
    multipliers: Optional[Mapping[int, LaurentCharacter]] = None

    def multiplier(self, n: int) -> LaurentCharacter:
        if self.multipliers is None:
            return LaurentCharacter.one(2)
        return self.multipliers[n]


def _check_line_data(model: ChainModel, line: ChainLineData) -> None:
    lo, hi = model.window
    for n in range(lo, hi + 1):
        if n not in line.fibers:
            raise DomainError(f"missing fiber weight at point {n}")
    for comp in model.components:
        n = comp.n
        if n not in line.degrees:
            raise DomainError(f"missing degree on component {n}")
        m = line.degrees[n]
        expected = _vec_add(line.fibers[n], _vec_scale(-m, TANGENT_Z))
        if tuple(line.fibers[n + 1]) != expected:
            raise DomainError(
                f"inconsistent fiber weights across component {n}: "
                f"degree {m} forces {expected}, got {tuple(line.fibers[n + 1])}"
            )


def _sections_progression(m: int, fiber: Vector) -> LaurentCharacter:
    """chi of a degree-m line bundle on one component, by the arithmetic
    progression of section weights: m+1 lattice points stepping by the
    tangent direction away from the given end for m >= 0, zero for
    m = -1, and minus the interior progression for m <= -2."""
    if m >= 0:
        terms: dict = {}
        for j in range(m + 1):
            exp = _vec_add(fiber, _vec_scale(-j, TANGENT_Z))
            terms[exp] = terms.get(exp, 0) + 1
        return LaurentCharacter.from_terms(2, terms)
    if m == -1:
        return LaurentCharacter.zero(2)
    terms = {}
    for j in range(1, -m):
        exp = _vec_add(fiber, _vec_scale(j, TANGENT_Z))
        terms[exp] = terms.get(exp, 0) - 1
    return LaurentCharacter.from_terms(2, terms)


def _divide_one_minus(numerator: LaurentCharacter, direction: Vector) -> LaurentCharacter:
    """Exact division by (1 - t^direction); the quotient exists exactly
    when the coefficients along each direction line sum to zero."""
    lines: dict[Vector, dict[Fraction, int]] = {}
    for exp, coef in numerator.terms:
        # position along the direction line through exp
        k = None
        for e, u in zip(exp, direction):
            if u != 0:
                k = e / u
                break
        if k is None:
            raise DomainError("division direction is zero")
        anchor = _vec_add(exp, _vec_scale(-k, direction))
        lines.setdefault(anchor, {})[k] = lines.setdefault(anchor, {}).get(k, 0) + coef
    out: dict = {}
    for anchor, coefs in lines.items():
        ks = sorted(coefs)
        running = 0
        # q(x) = n(x)/(1-x): coefficient of x^k in q is the prefix sum of n
        position = ks[0]
        while position <= ks[-1]:
            running += coefs.get(position, 0)
            if running:
                exp = _vec_add(anchor, _vec_scale(position, direction))
                out[exp] = out.get(exp, 0) + running
            position += 1
        if running != 0:
            raise DomainError("inexact division: geometric series does not terminate")
    return LaurentCharacter.from_terms(2, out)


def _sections_localization(m: int, fiber_a: Vector, fiber_b: Vector) -> LaurentCharacter:
    """chi of a degree-m line bundle on one component, by summing the two
    fixed-point terms t^{phi}/(1 - t^{-tangent}) and expanding exactly."""
    numerator = char_add(
        LaurentCharacter.monomial(2, fiber_b),
        LaurentCharacter.monomial(2, _vec_add(fiber_a, TANGENT_Z), -1),
    )
    return _divide_one_minus(numerator, TANGENT_Z)


def _chain_chi(model: ChainModel, line: ChainLineData, engine: str) -> LaurentCharacter:
    _check_line_data(model, line)
    lo, hi = model.window
    if lo == hi:
        return char_mul(LaurentCharacter.monomial(2, line.fibers[lo]), line.multiplier(lo))
    total = LaurentCharacter.zero(2)
    for comp in model.components:
        n = comp.n
        if engine == "cech":
            sections = _sections_progression(line.degrees[n], line.fibers[n])
        else:
            sections = _sections_localization(line.degrees[n], line.fibers[n], line.fibers[n + 1])
        total = char_add(total, char_mul(sections, line.multiplier(n)))
    for n in range(lo + 1, hi):
        node = char_mul(LaurentCharacter.monomial(2, line.fibers[n]), line.multiplier(n))
        total = char_add(total, -node)
    return total


def chain_euler_character_cech(model: ChainModel, line: ChainLineData) -> LaurentCharacter:
    """Euler characteristic of the line data over the truncated chain:
    per-component section progressions minus one fiber term per interior
    node (the overlap of consecutive charts)."""
    return _chain_chi(model, line, "cech")


def chain_euler_character_localization(model: ChainModel, line: ChainLineData) -> LaurentCharacter:
    """Same contract as the Cech route, computed from per-component
    fixed-point contributions expanded as exact geometric progressions."""
    return _chain_chi(model, line, "localization")


# -- the (0,3) invariant ------------------------------------------------------


def _g0n3_character(spec: AdmissibleClassSpec, d: int) -> LaurentCharacter:
    """Single-variable fixed-point character at total degree d: the moduli
    space is one point per degree with a one-dimensional stabilizer."""
    out = LaurentCharacter.monomial(1, (spec.q * (d + 1),))
    for ev in spec.evaluations:
        out = char_mul(out, LaurentCharacter.monomial(1, (Fraction(-ev.weight),)))
    for ins in spec.indices:
        factor = LaurentCharacter.monomial(1, (Fraction(-ins.weight),), ins.weight * d + 1)
        out = char_mul(out, char_pow(factor, ins.power))
    return out


def invariant_g0_n3(
    spec: AdmissibleClassSpec, scan: Optional[Iterable[int]] = None
) -> InvariantResult:
    """Three-pointed genus-0 invariant: sum over degrees of the invariant
    part of the fixed-point character."""
    degrees = sorted(scan) if scan is not None else list(degree_range(spec, 0, 3))
    breakdown = {d: weight_zero_part(_g0n3_character(spec, d)) for d in degrees}
    contributing = tuple(sorted(d for d, v in breakdown.items() if v))
    truncation = max((abs(d) for d in contributing), default=0)
    return InvariantResult(sum(breakdown.values()), contributing, breakdown, truncation)


# -- the (0,4) boundary invariant ----------------------------------------------


def _assemble_line_data(
    spec: AdmissibleClassSpec, d: int, window: tuple[int, int]
) -> ChainLineData:
    """Split the admissible class on the chain into its line-bundle part
    (twist line bundle and evaluations; every component has degree -q)
    and the index factors as locally constant multipliers."""
    if spec.q.denominator != 1:
        raise DomainError(
            "the boundary-chain computation needs integer component degrees; "
            f"the twist line bundle has degree -q = {-spec.q} per component"
        )
    q = int(spec.q)
    lo, hi = window
    eval_shift = [Fraction(0), Fraction(0)]
    point_blocks = chain_point_blocks()
    for ev in spec.evaluations:
        if ev.label not in point_blocks:
            raise DomainError(f"marked point {ev.label} is not one of the four markings")
        side = 0 if point_blocks[ev.label] == ("a",) else 1
        eval_shift[side] -= ev.weight
    fibers = {}
    multipliers = {}
    genera = {("a",): 0, ("b",): 0}
    for n in range(lo, hi + 1):
        fibers[n] = (
            Fraction(spec.q * (d + n)) + eval_shift[0],
            Fraction(spec.q * (1 - n)) + eval_shift[1],
        )
        mult = LaurentCharacter.one(2)
        label = _chain_label(d, n)
        for ins in spec.indices:
            mult = char_mul(mult, char_pow(index_character(label, genera, ins.weight), ins.power))
        multipliers[n] = mult
    degrees = {n: -q for n in range(lo, hi)}
    return ChainLineData(degrees, fibers, multipliers)


def _chain_value(spec: AdmissibleClassSpec, d: int, window: tuple[int, int], engine: str) -> int:
    model = build_chain_model(d, spec, window)
    line = _assemble_line_data(spec, d, window)
    return weight_zero_part(_chain_chi(model, line, engine))


def _auto_window(spec: AdmissibleClassSpec, d: int, pad: int) -> tuple[int, int]:
    bounds = vanishing_bounds(spec, chain_base_graph(), d)
    (r,) = nt2b(chain_base_graph())
    return (bounds.lower(r) - pad, bounds.upper(r) + pad)


def _invariant_g0_n4(
    spec: AdmissibleClassSpec,
    engine: str,
    window: Optional[tuple[int, int]] = None,
    scan: Optional[Iterable[int]] = None,
) -> InvariantResult:
    degrees = sorted(scan) if scan is not None else list(degree_range(spec, 0, 4))
    breakdown = {}
    for d in degrees:
        win = window if window is not None else _auto_window(spec, d, 2)
        value = _chain_value(spec, d, win, engine)
        padded = (win[0] - 3, win[1] + 3)
        check = _chain_value(spec, d, padded, engine)
        if check != value:
            raise RuntimeError(
                "stabilization failure: enlarging the chain window changed the "
                f"value at degree {d} ({value} -> {check})"
            )
        breakdown[d] = value
    contributing = tuple(sorted(d for d, v in breakdown.items() if v))
    total = sum(breakdown.values())
    # truncation sweep over the degrees that can carry weight zero at all
    # (elsewhere the diagonal weight is non-zero at every window size)
    sweep = sorted(set(degrees) & set(degree_range(spec, 0, 4)))
    truncation = 0
    if sweep:
        t_max = max(max(abs(b) for b in _auto_window(spec, d, 2)) for d in sweep) + 3
        values = []
        for t in range(t_max + 1):
            values.append(sum(_chain_value(spec, d, (-t, t), engine) for d in sweep))
        truncation = t_max
        for t in range(t_max, -1, -1):
            if values[t] != total:
                break
            truncation = t
    return InvariantResult(total, contributing, breakdown, truncation)


def invariant_g0_n4_boundary(
    spec: AdmissibleClassSpec,
    window: Optional[tuple[int, int]] = None,
    scan: Optional[Iterable[int]] = None,
) -> InvariantResult:
    """Four-pointed genus-0 invariant over the boundary fiber, via the
    Cech engine; re-runs with a padded window and insists on stability."""
    return _invariant_g0_n4(spec, "cech", window, scan)


def invariant_g0_n4_localization(
    spec: AdmissibleClassSpec,
    window: Optional[tuple[int, int]] = None,
    scan: Optional[Iterable[int]] = None,
) -> InvariantResult:
    """Independent route to the same number, via exact geometric series."""
    return _invariant_g0_n4(spec, "localization", window, scan)


# -- stabilization reports -------------------------------------------------


@dataclass(frozen=True)
class StabilizationReport:
    case: str
    rows: tuple[tuple[int, int], ...]
    observed: int
    predicted: int
    value: int


def stabilization_report(spec: AdmissibleClassSpec, case: str) -> StabilizationReport:
    """Truncation -> value table demonstrating that the invariant becomes
    constant no later than the vanishing-bound prediction."""
    if case == "g0n3":
        supported = degree_range(spec, 0, 3)
        predicted = max((abs(d) for d in supported), default=0)
        final = invariant_g0_n3(spec).value
        rows = []
        for t in range(predicted + 4):
            rows.append((t, invariant_g0_n3(spec, scan=range(-t, t + 1)).value))
    elif case == "g0n4-boundary":
        supported = degree_range(spec, 0, 4)
        predicted = 0
        for d in supported:
            lo, hi = _auto_window(spec, d, 2)
            predicted = max(predicted, abs(lo), abs(hi))
        final = invariant_g0_n4_boundary(spec).value if supported else 0
        rows = []
        for t in range(predicted + 4):
            rows.append(
                (t, sum(_chain_value(spec, d, (-t, t), "cech") for d in supported))
            )
    else:
        raise DomainError(f"unknown case {case!r}")
    observed = len(rows) - 1
    for t in range(len(rows) - 1, -1, -1):
        if rows[t][1] != final:
            break
        observed = t
    if observed > predicted:
        raise RuntimeError(
            f"observed stabilization {observed} exceeds the predicted bound {predicted}"
        )
    return StabilizationReport(case, tuple(rows), observed, predicted, final)
