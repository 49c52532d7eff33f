"""Command-line pipeline for the toolkit.

Every subcommand reads a .gog description (or a complex JSON), prints a
deterministic artifact to stdout, and optionally writes artifacts into
--out.  Exit codes: 0 success, 1 validation failure, 2 cap exceeded,
3 internal invariant violation (always a bug).
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from .count_algebra import thresholds as compute_thresholds
from .errors import (
    CapExceeded,
    GogError,
    GogSyntaxError,
    InvariantViolation,
    ValidationError,
)
from .gates import GateSystem, default_gates, escape_ray, is_admissible
from .model import (
    GogDocument,
    augment,
    glue,
    parse_document,
    parse_halfedge,
    serialize_gog,
    tree_degrees,
)
from .patches import (
    base_tree,
    caret_table,
    check_viral,
    enumerate_admissible,
    patch_to_dot,
)
from .simplicial import (
    SimplicialComplex,
    homology,
    lemma_connectivity_bound,
    random_complex,
)
from .stein_farley import (
    CSV_HEADER,
    descending_link,
    link_connectivity_report,
    link_difference,
    oracle_descending_link,
    sf_vertices_at_height,
)


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _load_doc(path: str) -> GogDocument:
    return parse_document(Path(path).read_text())


def _resolve_gates(doc: GogDocument, args) -> GateSystem:
    g = doc.graph
    if getattr(args, "gates", None):
        hs = tuple(parse_halfedge(t) for t in args.gates.split(","))
        return GateSystem(g, hs)
    if getattr(args, "default_gates", False) or not doc.gates:
        order = doc.order
        if getattr(args, "order", None):
            order = tuple(args.order.split(","))
        return default_gates(g, order)
    return GateSystem(g, doc.gates)


def _emit(args, artifacts: dict[str, str]) -> None:
    multiple = len(artifacts) > 1
    for name, text in artifacts.items():
        if multiple:
            sys.stdout.write(f"# artifact: {name}\n")
        sys.stdout.write(text)
    out = getattr(args, "out", None)
    if out:
        outdir = Path(out)
        outdir.mkdir(parents=True, exist_ok=True)
        for name, text in artifacts.items():
            (outdir / name).write_text(text)


# -- subcommand handlers ---------------------------------------------------


def _cmd_validate(args) -> tuple[int, dict[str, str]]:
    doc = _load_doc(args.file)
    g = doc.graph
    report = {
        "vertices": list(g.vertices),
        "edges": {
            e.name: {
                "iota": e.iota,
                "tau": e.tau,
                "index_iota": e.index_iota,
                "index_tau": e.index_tau,
            }
            for e in g.edges
        },
        "tree_degrees": tree_degrees(g).as_dict(),
        "gates_in_file": [str(h) for h in doc.gates],
        "order": list(doc.order) if doc.order else None,
        "valid": True,
    }
    return 0, {"validate.json": _dumps(report)}


def _cmd_degrees(args) -> tuple[int, dict[str, str]]:
    doc = _load_doc(args.file)
    return 0, {"degrees.json": _dumps(tree_degrees(doc.graph).as_dict())}


def _cmd_augment(args) -> tuple[int, dict[str, str]]:
    doc = _load_doc(args.file)
    return 0, {"augmented.gog": serialize_gog(augment(doc.graph), doc.gates, doc.order)}


def _cmd_glue(args) -> tuple[int, dict[str, str]]:
    d1 = _load_doc(args.file1)
    d2 = _load_doc(args.file2)
    g = glue(d1.graph, args.v, d2.graph, args.w, args.idx_v, args.idx_w)
    return 0, {"glued.gog": serialize_gog(g)}


def _cmd_gates(args) -> tuple[int, dict[str, str]]:
    doc = _load_doc(args.file)
    gs = _resolve_gates(doc, args)
    cert = is_admissible(doc.graph, gs)
    report = {
        "gates": [str(h) for h in gs.gates],
        "admissible": cert.admissible,
    }
    if cert.admissible:
        report["topological_order"] = [str(h) for h in cert.topological_order or ()]
    else:
        report["witness_cycle"] = [str(h) for h in cert.witness_cycle or ()]
        report["escape_ray"] = [str(h) for h in escape_ray(doc.graph, gs, cert)]
    return (0 if cert.admissible else 1), {"gates.json": _dumps(report)}


def _cmd_carets(args) -> tuple[int, dict[str, str]]:
    doc = _load_doc(args.file)
    gs = _resolve_gates(doc, args)
    table = caret_table(doc.graph, gs)
    return 0, {"carets.json": _dumps(table.to_json_dict())}


def _root(doc: GogDocument, args) -> str:
    if getattr(args, "root", None):
        return args.root
    return doc.graph.vertices[0]


def _cmd_viral(args) -> tuple[int, dict[str, str]]:
    doc = _load_doc(args.file)
    gs = _resolve_gates(doc, args)
    t0 = base_tree(doc.graph, gs, _root(doc, args))
    report = check_viral(doc.graph, gs, t0, repair_budget=args.repair_budget)
    body = report.to_json_dict()
    body["base_tree_counts"] = {
        "interior": t0.counts().interior,
        "leaves": list(t0.counts().leaves),
    }
    return (0 if report.passed else 1), {"viral.json": _dumps(body)}


def _cmd_enumerate(args) -> tuple[int, dict[str, str]]:
    doc = _load_doc(args.file)
    gs = _resolve_gates(doc, args)
    t0 = base_tree(doc.graph, gs, _root(doc, args))
    patches = enumerate_admissible(
        doc.graph, gs, t0, args.max_expansions, max_trees=args.max_trees
    )
    by_height: dict[int, int] = {}
    rows = []
    for p in patches:
        c = p.counts()
        by_height[c.height] = by_height.get(c.height, 0) + 1
        rows.append({"interior": c.interior, "leaves": list(c.leaves), "height": c.height})
    report = {
        "total": len(patches),
        "by_height": {str(h): n for h, n in sorted(by_height.items())},
        "patches": rows,
    }
    artifacts = {"enumerate.json": _dumps(report)}
    if args.dot:
        artifacts["base_tree.dot"] = patch_to_dot(t0, "base_tree")
    return 0, artifacts


def _cmd_sf(args) -> tuple[int, dict[str, str]]:
    doc = _load_doc(args.file)
    gs = _resolve_gates(doc, args)
    t0 = base_tree(doc.graph, gs, _root(doc, args))
    table = caret_table(doc.graph, gs)
    verts = sf_vertices_at_height(args.height, table, t0.counts())
    report = {
        "height": args.height,
        "vertices": [
            {"interior": v.counts.interior, "leaves": list(v.counts.leaves)} for v in verts
        ],
    }
    return 0, {"sf.json": _dumps(report)}


def _cmd_desclink(args) -> tuple[int, dict[str, str]]:
    doc = _load_doc(args.file)
    gs = _resolve_gates(doc, args)
    t0 = base_tree(doc.graph, gs, _root(doc, args))
    table = caret_table(doc.graph, gs)
    base = t0.counts()
    verts = sf_vertices_at_height(args.height, table, base)
    artifacts: dict[str, str] = {}
    reports = []
    csv_lines = [CSV_HEADER]
    started = time.time()
    for i, x in enumerate(verts):
        link = descending_link(x, table, base, max_vertices=args.max_link_vertices)
        rep = link_connectivity_report(
            x,
            table,
            base,
            m_max=args.m_max,
            link=link,
            dickson_box=args.dickson_box,
        )
        body = rep.to_json_dict()
        if args.oracle:
            oracle = oracle_descending_link(x, doc.graph, gs, t0, max_trees=args.max_trees)
            diff = link_difference(link, oracle)
            if diff is not None:
                raise InvariantViolation(
                    f"fast-path link disagrees with the oracle at {x}: {diff}"
                )
            body["oracle_agrees"] = True
        reports.append(body)
        csv_lines.append(rep.csv_row())
        artifacts[f"link_h{args.height}_{i}.json"] = _dumps(link.to_json_dict())
    summary = {
        "height": args.height,
        "links": reports,
        "elapsed_seconds": round(time.time() - started, 3),
    }
    artifacts["desclink.json"] = _dumps(summary)
    artifacts["desclink.csv"] = "\n".join(csv_lines) + "\n"
    # stdout gets the summary and csv; full link JSONs only land in --out
    printed = {"desclink.json": artifacts["desclink.json"], "desclink.csv": artifacts["desclink.csv"]}
    if args.out:
        return 0, artifacts
    return 0, printed


def _cmd_homology(args) -> tuple[int, dict[str, str]]:
    data = json.loads(Path(args.infile).read_text())
    cx = SimplicialComplex.from_json_dict(data)
    report = homology(cx, max_dim=args.max_dim)
    return 0, {"homology.json": _dumps(report.to_json_dict())}


def _parse_vertex_label(tok: str):
    try:
        return int(tok)
    except ValueError:
        return tok


def _cmd_lemma_check(args) -> tuple[int, dict[str, str]]:
    data = json.loads(Path(args.infile).read_text())
    cx = SimplicialComplex.from_json_dict(data)
    sigma = tuple(_parse_vertex_label(t) for t in args.sigma.split(","))
    cb = lemma_connectivity_bound(cx, sigma, args.m, args.k)
    report = {
        "sigma": list(cb.sigma),
        "m": cb.m,
        "k": cb.k,
        "bound": cb.bound,
        "failed_hypothesis": cb.failed,
        "note": cb.note,
    }
    return 0, {"lemma_check.json": _dumps(report)}


def _cmd_threshold(args) -> tuple[int, dict[str, str]]:
    doc = _load_doc(args.file)
    gs = _resolve_gates(doc, args)
    t0 = base_tree(doc.graph, gs, _root(doc, args))
    table = caret_table(doc.graph, gs)
    th = compute_thresholds(args.m, table, t0.counts(), box=args.dickson_box)
    return 0, {"threshold.json": _dumps(th.to_json_dict())}


def _cmd_random_complex(args) -> tuple[int, dict[str, str]]:
    cx = random_complex(
        args.seed,
        args.vertices,
        args.density,
        ground=args.ground,
        drop=args.drop,
        max_dim=args.max_dim,
    )
    return 0, {"complex.json": _dumps(cx.to_json_dict())}


# -- parser ---------------------------------------------------------------


def _add_gate_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--gates", help="explicit gate list, e.g. e1.tau,e2.iota")
    p.add_argument(
        "--default-gates",
        action="store_true",
        help="use the higher-endpoint rule (loops gated on both sides)",
    )
    p.add_argument("--order", help="comma-separated vertex order for default gates")


def _add_tree_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--root", help="root vertex of the base tree (default: first vertex)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gogtool",
        description="graphs of groups: gates, carets, count algebra, descending links",
    )
    parser.add_argument("--out", help="directory to write artifacts into")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="parse and validate a .gog file")
    p.add_argument("file")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("degrees", help="tree degrees of every vertex")
    p.add_argument("file")
    p.set_defaults(func=_cmd_degrees)

    p = sub.add_parser("augment", help="multiply every half-edge index by 3")
    p.add_argument("file")
    p.set_defaults(func=_cmd_augment)

    p = sub.add_parser("glue", help="join two graphs with a fresh edge")
    p.add_argument("file1")
    p.add_argument("v")
    p.add_argument("file2")
    p.add_argument("w")
    p.add_argument("idx_v", type=int)
    p.add_argument("idx_w", type=int)
    p.set_defaults(func=_cmd_glue)

    p = sub.add_parser("gates", help="resolve a gate system and decide admissibility")
    p.add_argument("file")
    _add_gate_flags(p)
    p.set_defaults(func=_cmd_gates)

    p = sub.add_parser("carets", help="caret table (M, I, leaf multisets)")
    p.add_argument("file")
    _add_gate_flags(p)
    p.set_defaults(func=_cmd_carets)

    p = sub.add_parser("viral", help="check the viral expansion property")
    p.add_argument("file")
    _add_gate_flags(p)
    _add_tree_flags(p)
    p.add_argument("--repair-budget", type=int, default=32)
    p.set_defaults(func=_cmd_viral)

    p = sub.add_parser("enumerate", help="enumerate admissible trees from the base tree")
    p.add_argument("file")
    _add_gate_flags(p)
    _add_tree_flags(p)
    p.add_argument("--max-expansions", type=int, required=True)
    p.add_argument("--max-trees", type=int, default=200_000)
    p.add_argument("--dot", action="store_true", help="also emit the base tree as DOT")
    p.set_defaults(func=_cmd_enumerate)

    p = sub.add_parser("sf", help="count classes at a given height")
    p.add_argument("file")
    _add_gate_flags(p)
    _add_tree_flags(p)
    p.add_argument("--height", type=int, required=True)
    p.set_defaults(func=_cmd_sf)

    p = sub.add_parser("desclink", help="descending links at a given height")
    p.add_argument("file")
    _add_gate_flags(p)
    _add_tree_flags(p)
    p.add_argument("--height", type=int, required=True)
    p.add_argument("--oracle", action="store_true", help="cross-check against the tree-level oracle")
    p.add_argument("--m-max", type=int, default=0)
    p.add_argument("--max-link-vertices", type=int, default=100_000)
    p.add_argument("--max-trees", type=int, default=200_000)
    p.add_argument("--dickson-box", type=int, default=64)
    p.set_defaults(func=_cmd_desclink)

    p = sub.add_parser("homology", help="integer homology of a complex JSON")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--max-dim", type=int, default=None)
    p.set_defaults(func=_cmd_homology)

    p = sub.add_parser("lemma-check", help="pseudosimplex connectivity checker")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--sigma", required=True, help="comma-separated vertex labels")
    p.add_argument("-m", type=int, required=True)
    p.add_argument("-k", type=int, required=True)
    p.set_defaults(func=_cmd_lemma_check)

    p = sub.add_parser("threshold", help="connectivity threshold constants")
    p.add_argument("file")
    _add_gate_flags(p)
    _add_tree_flags(p)
    p.add_argument("-m", type=int, required=True)
    p.add_argument("--dickson-box", type=int, default=64)
    p.set_defaults(func=_cmd_threshold)

    p = sub.add_parser("random-complex", help="seeded pseudorandom complex")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--vertices", type=int, required=True)
    p.add_argument("--density", type=float, required=True)
    p.add_argument("--ground", type=int, default=0)
    p.add_argument("--drop", type=float, default=0.0)
    p.add_argument("--max-dim", type=int, default=None)
    p.set_defaults(func=_cmd_random_complex)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        code, artifacts = args.func(args)
    except (GogSyntaxError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except CapExceeded as exc:
        print(f"cap exceeded: {exc}", file=sys.stderr)
        return 2
    except InvariantViolation as exc:
        print(f"internal invariant violated (bug): {exc}", file=sys.stderr)
        return 3
    except GogError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    _emit(args, artifacts)
    return code


if __name__ == "__main__":
    sys.exit(main())
