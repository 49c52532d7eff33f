import itertools

import pytest

import gogtool as gt
from gogtool.errors import CapExceeded, ValidationError
from gogtool.stein_farley import (
    DescendingLink,
    SFVertex,
    descending_link,
    is_viral,
    link_connectivity_report,
    link_difference,
    links_equal,
    oracle_descending_link,
    sf_vertices_at_height,
    sf_vertices_at_height_enumerated,
)

from conftest import System


def xv(interior, leaves):
    return SFVertex(gt.CountVector(interior, leaves))


def test_sf_vertices_examples(loop33: System):
    assert sf_vertices_at_height(6, loop33.table, loop33.base) == (xv(1, (3, 3)),)
    assert sf_vertices_at_height(10, loop33.table, loop33.base) == (xv(2, (5, 5)),)
    assert sf_vertices_at_height(7, loop33.table, loop33.base) == ()
    assert sf_vertices_at_height(14, loop33.table, loop33.base) == (xv(3, (7, 7)),)
    assert sf_vertices_at_height(2, loop33.table, loop33.base) == ()


def test_sf_vertices_need_growing_carets(z_line: System):
    with pytest.raises(ValidationError, match="sf_vertices_at_height_enumerated"):
        sf_vertices_at_height(2, z_line.table, z_line.base)
    found = sf_vertices_at_height_enumerated(2, z_line.g, z_line.gs, z_line.t0, 3)
    assert found == (xv(1, (1, 1)), xv(2, (1, 1)), xv(3, (1, 1)), xv(4, (1, 1)))


def test_descending_link_base_is_empty(loop33: System):
    link = descending_link(xv(1, (3, 3)), loop33.table, loop33.base)
    assert link.f_vector == (0,)
    assert link.vertices == ()


def test_descending_link_200_isolated_vertices(loop33: System):
    link = descending_link(xv(2, (5, 5)), loop33.table, loop33.base)
    assert link.f_vector == (200,)
    assert link.edge_count == 0
    per_type = {0: 0, 1: 0}
    for v in link.vertices:
        per_type[v.caret_type] += 1
        sizes = tuple(len(s) for s in v.slots)
        assert sizes == ((3, 2) if v.caret_type == 0 else (2, 3))
    assert per_type == {0: 100, 1: 100}


def test_descending_link_height14(loop33: System):
    link = descending_link(xv(3, (7, 7)), loop33.table, loop33.base)
    assert link.f_vector == (1470, 73500)
    # dimension law: an l-face removes l+1 carets and the residual interior
    # count stays at least the base interior count
    for a, b in link.higher_faces[0][:200]:
        mu = [0, 0]
        mu[link.vertices[a].caret_type] += 1
        mu[link.vertices[b].caret_type] += 1
        res = link.x.counts.interior - sum(
            loop33.table.I[j] * mu[j] for j in range(2)
        )
        assert res >= loop33.base.interior


def test_descending_link_downward_closed(loop33: System):
    link = descending_link(xv(3, (7, 7)), loop33.table, loop33.base)
    verts = set(range(len(link.vertices)))
    for face in link.higher_faces[0][:500]:
        assert set(face) <= verts
    if len(link.higher_faces) > 1:
        edges = set(link.higher_faces[0])
        for face in link.higher_faces[1]:
            for sub in itertools.combinations(face, 2):
                assert sub in edges


def test_descending_link_requires_viral(z_line: System):
    assert not is_viral(z_line.table, z_line.base)
    with pytest.raises(ValidationError, match="viral"):
        descending_link(xv(1, (1, 1)), z_line.table, z_line.base)


def test_descending_link_vertex_cap(loop33: System):
    with pytest.raises(CapExceeded):
        descending_link(xv(3, (7, 7)), loop33.table, loop33.base, max_vertices=100)


def test_oracle_equivalence_small_heights(loop33: System):
    for h in (6, 10):
        for x in sf_vertices_at_height(h, loop33.table, loop33.base):
            fast = descending_link(x, loop33.table, loop33.base)
            slow = oracle_descending_link(x, loop33.g, loop33.gs, loop33.t0)
            assert links_equal(fast, slow)


def test_oracle_equivalence_bs23_aug_base(bs23_aug: System):
    (x,) = sf_vertices_at_height(15, bs23_aug.table, bs23_aug.base)
    fast = descending_link(x, bs23_aug.table, bs23_aug.base)
    slow = oracle_descending_link(x, bs23_aug.g, bs23_aug.gs, bs23_aug.t0)
    assert fast.f_vector == (0,)
    assert links_equal(fast, slow)


def test_link_difference_reports_witness(loop33: System):
    link = descending_link(xv(2, (5, 5)), loop33.table, loop33.base)
    smaller = DescendingLink(link.x, link.vertices[:-1], link.higher_faces)
    diff = link_difference(link, smaller)
    assert diff is not None and "only in first" in diff
    other = descending_link(xv(1, (3, 3)), loop33.table, loop33.base)
    assert "count classes" in link_difference(link, other)


def test_link_to_complex_and_json(loop33: System):
    link = descending_link(xv(2, (5, 5)), loop33.table, loop33.base)
    cx = link.to_complex()
    assert len(cx.maximal_faces) == 200
    data = link.to_json_dict()
    assert data["f_vector"] == [200]
    assert len(data["vertices"]) == 200
    assert data["vertices"][0]["type"] in (1, 2)


def test_link_report_below_threshold(loop33: System):
    x = xv(2, (5, 5))
    rep = link_connectivity_report(x, loop33.table, loop33.base, m_max=0)
    assert rep.betti is not None and rep.betti[0] == 200
    assert rep.per_m[0]["r"] == 36
    assert "below" in rep.per_m[0]["status"]
    joined = " ".join(rep.caveats)
    assert "beyond construction caps" in joined
    assert "necessary condition" in joined
    row = rep.csv_row()
    assert row.startswith("10,200,0,")


def test_link_report_empty_link(loop33: System):
    rep = link_connectivity_report(xv(1, (3, 3)), loop33.table, loop33.base, m_max=0)
    assert rep.betti is None
    assert "(-1)-connected" in rep.betti_note


def test_link_report_json_schema(loop33: System):
    rep = link_connectivity_report(xv(2, (5, 5)), loop33.table, loop33.base, m_max=0)
    data = rep.to_json_dict()
    assert set(data) >= {"x", "height", "f_vector", "betti", "thresholds", "caveats"}
    assert data["thresholds"][0]["beta"] == 5
    assert data["thresholds"][0]["C"] == 16
