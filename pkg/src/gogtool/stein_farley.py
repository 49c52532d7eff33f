"""Expansion-complex vertices as count classes and their descending links.

A vertex of the expansion complex is an equivalence class of admissible
trees determined by its count vector (interior count and typed leaf
counts); its height is the total number of leaves.  A descending move
contracts a caret whose terminal leaves sit inside the tree's leaf set,
so the descending link is a matching-style complex: vertices are
(caret type, labelled leaf subset) pairs, and a set of them spans a face
iff the subsets are pairwise disjoint and the residual counts are
realizable with enough residual leaves of each type to re-attach every
removed caret.

Leaf slots within a type are interchangeable positions 1..L_i; any
type-preserving relabelling of leaves is realised by an actual
rearrangement, which is what justifies working with labelled subsets.
The definition-level oracle below re-derives links from explicit tree
enumeration and is compared against the fast path at desk scale; the
fast path itself is only claimed for systems with the viral expansion
property.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property

from .count_algebra import (
    NOTE_BEYOND_CAPS,
    NOTE_HOMOLOGY_PROXY,
    CountVector,
    History,
    expansion_matrix,
    predict_counts,
    realizable,
    thresholds as compute_thresholds,
    weighted_vectors,
)
from .errors import CapExceeded, ValidationError
from .gates import GateSystem
from .model import GraphOfGroups
from .patches import (
    CaretTable,
    TreePatch,
    _expand_vertex,
    caret_table,
    enumerate_admissible,
)
from .simplicial import SimplicialComplex, homology, lemma_connectivity_bound

DEFAULT_LINK_VERTEX_CAP = 100_000
DEFAULT_LEMMA_CHECK_CAP = 400


@dataclass(frozen=True, order=True)
class SFVertex:
    """A count class of admissible trees."""

    counts: CountVector

    @property
    def height(self) -> int:
        return self.counts.height


def is_viral(table: CaretTable, base: CountVector) -> bool:
    k = len(table.I)
    return all(table.M[i][i] >= 3 for i in range(k)) and all(
        l >= 2 for l in base.leaves
    )


def sf_vertices_at_height(h: int, table: CaretTable, base: CountVector) -> tuple[SFVertex, ...]:
    """All realizable count classes of height h.

    Requires every caret to strictly increase the leaf count (true under
    the viral property), which makes the search finite; otherwise use the
    enumeration fallback.
    """
    k = len(table.I)
    mm = expansion_matrix(table)
    adds = [sum(mm[i][j] for i in range(k)) for j in range(k)]
    if any(a < 1 for a in adds):
        raise ValidationError(
            "height search needs every caret to increase the leaf count "
            "(viral systems do); use sf_vertices_at_height_enumerated instead"
        )
    delta = h - base.height
    if delta < 0:
        return ()
    out = {
        predict_counts(History(n), table, base)
        for n in weighted_vectors(delta, adds)
    }
    return tuple(SFVertex(c) for c in sorted(out))


def sf_vertices_at_height_enumerated(
    h: int,
    g: GraphOfGroups,
    gs: GateSystem,
    t0: TreePatch,
    max_expansions: int,
    max_trees: int = 200_000,
) -> tuple[SFVertex, ...]:
    """Fallback for non-viral systems: read count classes off an explicit
    bounded tree enumeration (complete only within the expansion bound)."""
    trees = enumerate_admissible(g, gs, t0, max_expansions, max_trees)
    found = {t.counts() for t in trees}
    return tuple(SFVertex(c) for c in sorted(found) if c.height == h)


@dataclass(frozen=True, order=True)
class LinkVertex:
    """One descending move: a caret type and, per gate type, the sorted
    leaf-slot subset its terminal leaves occupy."""

    caret_type: int
    slots: tuple[tuple[int, ...], ...]

    def to_json_dict(self) -> dict:
        return {"type": self.caret_type + 1, "slots": [list(s) for s in self.slots]}


@dataclass(frozen=True)
class DescendingLink:
    """The descending link of a count-class vertex.

    ``higher_faces[d-1]`` holds the dimension-d faces as sorted tuples of
    indices into ``vertices``; dimension-0 faces are the vertices
    themselves.
    """

    x: SFVertex
    vertices: tuple[LinkVertex, ...]
    higher_faces: tuple[tuple[tuple[int, ...], ...], ...]

    @property
    def f_vector(self) -> tuple[int, ...]:
        return (len(self.vertices),) + tuple(len(fs) for fs in self.higher_faces)

    @property
    def edge_count(self) -> int:
        return len(self.higher_faces[0]) if self.higher_faces else 0

    @property
    def dimension(self) -> int:
        return len(self.higher_faces)

    @cached_property
    def maximal_faces(self) -> tuple[frozenset, ...]:
        levels: list[list[tuple[int, ...]]] = [[(i,) for i in range(len(self.vertices))]]
        levels += [list(fs) for fs in self.higher_faces]
        non_max: set[tuple[int, ...]] = set()
        for d in range(len(levels) - 1, 0, -1):
            for face in levels[d]:
                for sub in itertools.combinations(face, d):
                    non_max.add(sub)
        out = [frozenset(f) for level in levels for f in level if f not in non_max]
        return tuple(sorted(out, key=lambda f: (len(f), tuple(sorted(f)))))

    def to_complex(self) -> SimplicialComplex:
        return SimplicialComplex(tuple(range(len(self.vertices))), self.maximal_faces)

    def to_json_dict(self) -> dict:
        return {
            "x": {"interior": self.x.counts.interior, "leaves": list(self.x.counts.leaves)},
            "height": self.x.height,
            "f_vector": list(self.f_vector),
            "vertices": [v.to_json_dict() for v in self.vertices],
            "maximal_faces": [sorted(f) for f in self.maximal_faces],
        }


def _residual_checker(x: SFVertex, table: CaretTable, base: CountVector):
    """Memoised face predicate on caret-type multisets.

    A multiset mu is allowed iff the residual counts after removing the
    carets are realizable and keep at least mu[t] leaves of every type t
    (the contracted tree needs a leaf of the right type per caret).
    """
    k = len(table.I)
    mm = expansion_matrix(table)
    leaves, interior = x.counts.leaves, x.counts.interior
    cache: dict[tuple[int, ...], bool] = {}

    def ok(mu: tuple[int, ...]) -> bool:
        got = cache.get(mu)
        if got is not None:
            return got
        res_i = interior - sum(table.I[j] * mu[j] for j in range(k))
        res_l = tuple(
            leaves[i] - sum(mm[i][j] * mu[j] for j in range(k)) for i in range(k)
        )
        good = (
            res_i >= base.interior
            and all(l >= 0 for l in res_l)
            and all(res_l[t] >= mu[t] for t in range(k))
            and bool(realizable(CountVector(res_i, res_l), table, base, viral=True))
        )
        cache[mu] = good
        return good

    return ok


def _max_face_size(k: int, ok) -> int:
    s = 0
    while True:
        if not any(
            ok(tuple(c.count(j) for j in range(k)))
            for c in itertools.combinations_with_replacement(range(k), s + 1)
        ):
            return s
        s += 1


def descending_link(
    x: SFVertex,
    table: CaretTable,
    base: CountVector,
    max_vertices: int = DEFAULT_LINK_VERTEX_CAP,
) -> DescendingLink:
    """Fast-path construction of the descending link from count data only.

    Only claimed for systems with the viral expansion property; the
    oracle below validates the reduction at desk scale.
    """
    if not is_viral(table, base):
        raise ValidationError(
            "descending_link's count-level face predicate is only claimed for "
            "systems with the viral expansion property; use the oracle instead"
        )
    k = len(table.I)
    leaves = x.counts.leaves
    ok = _residual_checker(x, table, base)

    vertices: list[LinkVertex] = []
    total = 0
    for j in range(k):
        mu = tuple(1 if t == j else 0 for t in range(k))
        if not ok(mu):
            continue
        combos = 1
        for i in range(k):
            need = table.M[i][j]
            pick = 1
            for t in range(need):
                pick = pick * (leaves[i] - t) // (t + 1)
            combos *= pick
        total += combos
        if total > max_vertices:
            raise CapExceeded(
                f"descending link would have more than {max_vertices} vertices"
            )
        for choice in itertools.product(
            *(itertools.combinations(range(leaves[i]), table.M[i][j]) for i in range(k))
        ):
            vertices.append(LinkVertex(j, tuple(choice)))
    vertices.sort()

    slot_sets = [tuple(frozenset(s) for s in v.slots) for v in vertices]
    types = [v.caret_type for v in vertices]
    smax = _max_face_size(k, ok)

    def disjoint(a: int, join: tuple[frozenset, ...]) -> bool:
        return all(not (slot_sets[a][i] & join[i]) for i in range(k))

    higher: list[tuple[tuple[int, ...], ...]] = []
    current = [
        ((i,), tuple(1 if t == types[i] else 0 for t in range(k)), slot_sets[i])
        for i in range(len(vertices))
    ]
    for _dim in range(1, smax):
        nxt = []
        for face, mu, join in current:
            for b in range(face[-1] + 1, len(vertices)):
                mu2 = tuple(m + (1 if t == types[b] else 0) for t, m in enumerate(mu))
                if not ok(mu2):
                    continue
                if not disjoint(b, join):
                    continue
                join2 = tuple(join[i] | slot_sets[b][i] for i in range(k))
                nxt.append((face + (b,), mu2, join2))
        if not nxt:
            break
        higher.append(tuple(f for f, _, _ in nxt))
        current = nxt
    return DescendingLink(x, tuple(vertices), tuple(higher))


# -- definition-level oracle ---------------------------------------------


def _removable_carets(t: TreePatch, t0: TreePatch) -> list[tuple]:
    """Expansion vertices of t whose grown caret is terminal in t, i.e.
    whose entire subtree is exactly the caret material.  Removing any
    subset of them leaves an admissible tree containing t0."""
    system = t.system
    gs = system.gates
    out = []
    for addr in sorted(t.interior_addresses):
        if addr in t0.interior_addresses:
            continue
        entry = system.entry_of(addr)
        if entry is None or entry not in gs:
            continue
        depth = len(addr)
        below = {a for a in t.nodes if len(a) > depth and a[:depth] == addr}
        material = _expand_vertex(system, frozenset(), addr, entry)
        if below == material:
            out.append((addr, gs.type_index(entry)))
    return out


def _assignments(mu: tuple[int, ...], table: CaretTable, leaves: tuple[int, ...]):
    """All labelled realisations of a caret-type multiset: per caret, a
    per-type slot subset, pairwise disjoint within each type."""
    k = len(leaves)
    carets = [j for j in range(k) for _ in range(mu[j])]

    def rec(idx: int, used: tuple[frozenset, ...], acc: list[LinkVertex]):
        if idx == len(carets):
            yield frozenset(acc)
            return
        j = carets[idx]
        pools = [
            [c for c in itertools.combinations(range(leaves[i]), table.M[i][j])
             if not (set(c) & used[i])]
            for i in range(k)
        ]
        for choice in itertools.product(*pools):
            used2 = tuple(used[i] | set(choice[i]) for i in range(k))
            yield from rec(idx + 1, used2, acc + [LinkVertex(j, tuple(choice))])

    yield from rec(0, tuple(frozenset() for _ in range(k)), [])


def oracle_descending_link(
    x: SFVertex,
    g: GraphOfGroups,
    gs: GateSystem,
    t0: TreePatch,
    max_trees: int = 200_000,
) -> DescendingLink:
    """Definition-level descending link via explicit tree enumeration.

    Enumerates every admissible tree with the counts of x, reads off all
    sets of disjoint removable carets, and assembles labelled faces
    through explicit type-preserving leaf matchings (every matching is
    realised by a rearrangement, so each witness contributes all slot
    assignments of its caret-type multiset).  Deduplication is by value.
    """
    t0.require_admissible("t0")
    table = caret_table(g, gs)
    base = t0.counts()
    leaves = x.counts.leaves
    delta = x.counts.interior - base.interior

    mus: set[tuple[int, ...]] = set()
    if delta >= 0:
        k = gs.k
        trees = [
            t
            for t in enumerate_admissible(g, gs, t0, delta, max_trees)
            if t.counts() == x.counts
        ]
        for t in trees:
            removable = _removable_carets(t, t0)
            for r in range(1, len(removable) + 1):
                for subset in itertools.combinations(removable, r):
                    mu = tuple(
                        sum(1 for _, j in subset if j == tt) for tt in range(k)
                    )
                    mus.add(mu)

    vertex_set: set[LinkVertex] = set()
    for mu in mus:
        if sum(mu) == 1:
            for face in _assignments(mu, table, leaves):
                vertex_set.update(face)
    vertices = tuple(sorted(vertex_set))
    index = {v: i for i, v in enumerate(vertices)}

    by_dim: dict[int, set[tuple[int, ...]]] = {}
    for mu in sorted(mus, key=sum):
        d = sum(mu) - 1
        if d < 1:
            continue
        for face in _assignments(mu, table, leaves):
            by_dim.setdefault(d, set()).add(tuple(sorted(index[v] for v in face)))
    max_d = max(by_dim, default=0)
    higher = tuple(tuple(sorted(by_dim.get(d, ()))) for d in range(1, max_d + 1))
    return DescendingLink(x, vertices, higher)


def link_difference(a: DescendingLink, b: DescendingLink) -> str | None:
    """None when the links are equal as labelled complexes (canonical
    vertex order); otherwise a minimal witness of the mismatch."""
    if a.x != b.x:
        return f"different count classes: {a.x} vs {b.x}"
    if a.vertices != b.vertices:
        sa, sb = set(a.vertices), set(b.vertices)
        extra = sorted(sa ^ sb)[0]
        side = "first" if extra in sa else "second"
        return f"vertex {extra} only in {side} link"
    if a.f_vector != b.f_vector:
        return f"f-vectors differ: {a.f_vector} vs {b.f_vector}"
    for d in range(max(len(a.higher_faces), len(b.higher_faces))):
        fa = set(a.higher_faces[d]) if d < len(a.higher_faces) else set()
        fb = set(b.higher_faces[d]) if d < len(b.higher_faces) else set()
        if fa != fb:
            extra = sorted(fa ^ fb)[0]
            side = "first" if extra in fa else "second"
            return f"dimension-{d + 1} face {extra} only in {side} link"
    return None


def links_equal(a: DescendingLink, b: DescendingLink) -> bool:
    return link_difference(a, b) is None


# -- connectivity reports -----------------------------------------------


@dataclass(frozen=True)
class LinkReport:
    x: SFVertex
    f_vector: tuple[int, ...]
    betti: tuple[int, ...] | None
    betti_note: str
    per_m: tuple[dict, ...]
    caveats: tuple[str, ...]

    def to_json_dict(self) -> dict:
        return {
            "x": {"interior": self.x.counts.interior, "leaves": list(self.x.counts.leaves)},
            "height": self.x.height,
            "f_vector": list(self.f_vector),
            "betti": list(self.betti) if self.betti is not None else None,
            "betti_note": self.betti_note,
            "thresholds": list(self.per_m),
            "caveats": list(self.caveats),
        }

    def csv_row(self) -> str:
        betti = ";".join(str(b) for b in self.betti) if self.betti is not None else "n/a"
        fv = ";".join(str(n) for n in self.f_vector)
        status = " | ".join(d["status"] for d in self.per_m)
        ne = self.f_vector[1] if len(self.f_vector) > 1 else 0
        return f"{self.x.height},{self.f_vector[0]},{ne},{fv},{betti},{status}"


CSV_HEADER = "height,vertices,edges,f_vector,betti,threshold_status"


def link_connectivity_report(
    x: SFVertex,
    table: CaretTable,
    base: CountVector,
    m_max: int = 0,
    link: DescendingLink | None = None,
    max_vertices: int = DEFAULT_LINK_VERTEX_CAP,
    lemma_cap: int = DEFAULT_LEMMA_CHECK_CAP,
    dickson_box: int = 64,
) -> LinkReport:
    """Homology of the descending link juxtaposed with the threshold
    constants, so below/above-threshold status is explicit.

    When the link contains a face made of C(m)/2 same-type carets, the
    connectivity-lemma checker is run with that face as the ground
    pseudosimplex (ground parameter k = beta).
    """
    if link is None:
        link = descending_link(x, table, base, max_vertices)
    cx = link.to_complex()
    if link.vertices:
        betti_report = homology(cx, max_dim=max(m_max, 1))
        betti = betti_report.betti
        betti_note = "integer homology of the constructed link"
    else:
        betti = None
        betti_note = "empty link: (-1)-connected only"

    per_m = []
    for m in range(m_max + 1):
        th = compute_thresholds(m, table, base, box=dickson_box)
        side = "below" if x.height < th.r else "at or above"
        status = f"m={m}: height {x.height} {side} threshold r({m})={th.r}"
        sigma_result: str
        want = th.C // 2
        if not link.vertices:
            sigma_result = "no vertices, no ground pseudosimplex"
        elif len(link.vertices) > lemma_cap:
            sigma_result = f"lemma check skipped (link exceeds cap {lemma_cap})"
        else:
            sigma = _planted_same_type_face(link, table, base, want)
            if sigma is None:
                sigma_result = (
                    f"no face of {want} same-type carets exists at this height"
                )
            else:
                cb = lemma_connectivity_bound(cx, sigma, m + 1, th.beta)
                if cb.bound is not None:
                    sigma_result = f"lemma checker bound {cb.bound} from planted ground"
                else:
                    sigma_result = f"lemma hypotheses did not verify: {cb.failed}"
        per_m.append(
            {
                "m": m,
                "beta": th.beta,
                "C": th.C,
                "alpha": th.alpha_value,
                "alpha_complete": th.alpha_complete,
                "r": th.r,
                "status": status,
                "ground_check": sigma_result,
            }
        )
    return LinkReport(
        x=x,
        f_vector=link.f_vector,
        betti=betti,
        betti_note=betti_note,
        per_m=tuple(per_m),
        caveats=(NOTE_HOMOLOGY_PROXY, NOTE_BEYOND_CAPS),
    )


def _planted_same_type_face(
    link: DescendingLink, table: CaretTable, base: CountVector, size: int
) -> tuple[int, ...] | None:
    """Greedily look for a link face made of ``size`` disjoint type-1 carets."""
    if size <= 0:
        return None
    k = len(table.I)
    ok = _residual_checker(link.x, table, base)
    chosen: list[int] = []
    join = tuple(frozenset() for _ in range(k))
    for i, v in enumerate(link.vertices):
        if v.caret_type != 0:
            continue
        if any(set(v.slots[t]) & join[t] for t in range(k)):
            continue
        mu = tuple(
            (len(chosen) + 1) if t == 0 else 0 for t in range(k)
        )
        if not ok(mu):
            continue
        chosen.append(i)
        join = tuple(join[t] | set(v.slots[t]) for t in range(k))
        if len(chosen) == size:
            return tuple(chosen)
    return None
