"""JSON sections for the command-line front end.

Every builder returns plain dicts and lists so that :func:`dumps` yields the
same bytes for the same input, parameters and version.
"""
from __future__ import annotations

import dataclasses
import hashlib
import json
import math
from typing import Any, Dict, List, Optional, Sequence, Tuple

from . import __version__
from .defining_graph import DefiningGraph, classify, to_dict
from .links import (
    MetricGraph,
    build_link,
    certify_girth,
    coned_link,
    link_threshold,
    vertex_types,
)
from .metric_synth import MetricParams
from .standard_trees import build_cut_graph, stabilizer_presentation


def plain(obj: Any) -> Any:
    """Convert to JSON-ready values; non-finite floats become strings."""
    if isinstance(obj, float):
        if math.isnan(obj):
            return "nan"
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        return obj
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: plain(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): plain(v) for k, v in obj.items()}
    if isinstance(obj, (frozenset, set)):
        return sorted(plain(v) for v in obj)
    if isinstance(obj, (list, tuple)):
        return [plain(v) for v in obj]
    return obj


def dumps(doc: Any) -> str:
    return json.dumps(plain(doc), indent=2, allow_nan=False) + "\n"


def parameter_hash(command: str, input_text: Optional[str], params: Dict[str, Any]) -> str:
    blob = json.dumps({"command": command, "input": input_text, "params": params, "version": __version__},
                      sort_keys=True)
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def type_name(vertex_type: Tuple[str, ...]) -> str:
    return "{" + ",".join(vertex_type) + "}"


# --- sections ---------------------------------------------------------------------------

def classification(g: DefiningGraph) -> dict:
    c = classify(g)
    return {
        "two_dimensional": c.two_dimensional,
        "hyperbolic_type": c.hyperbolic_type,
        "irreducible": c.irreducible,
        "witness": plain(c.witness),
        "dimension_witness": plain(c.dimension_witness),
        "hyperbolic_witness": plain(c.hyperbolic_witness),
        "reducibility_witness": plain(c.reducibility_witness),
    }


def metric(p: MetricParams) -> dict:
    table = {}
    for m, row in sorted(p.table.items()):
        table[str(m)] = {
            "theta": row.theta,
            "angles": list(row.shape.angles),
            "sides": list(row.shape.sides),
            "area": row.shape.area,
            "d": row.d,
            "cone_angle": row.cone_angle,
        }
    out = {"mode": p.mode, "epsilon": p.epsilon, "ell": p.ell, "table": table,
           "invariant_violations": p.invariant_violations()}
    if p.certificate is not None:
        cert = p.certificate
        out["certificate"] = {
            "binding": {"name": cert.binding.name, "source": cert.binding.source, "limit": cert.binding.limit},
            "bounds": [{"name": b.name, "source": b.source, "limit": b.limit, "slack": b.slack(cert.epsilon)}
                       for b in cert.bounds],
            "cycle_cap": cert.cycle_cap,
            "cycle_checks": [{"cycle": list(c), "slack": s} for c, s in cert.cycle_checks],
            "violated_at_double": cert.violated(2 * cert.epsilon),
        }
    return out


def _certificate(cert) -> dict:
    return {
        "status": cert.status,
        "threshold": cert.threshold,
        "girth": cert.girth,
        "shortest_cycle": plain(cert.shortest_cycle),
        "method": cert.method,
        "radius": cert.radius,
        "analytic_cases": [{"name": n, "bound": b, "slack": s} for n, b, s in cert.analytic_cases],
    }


def links(g: DefiningGraph, p: MetricParams, radius: int, coned: bool) -> Tuple[List[dict], Dict[str, MetricGraph]]:
    """Girth certificates per vertex type, plain or coned, and the graphs that were certified."""
    threshold = link_threshold(p)
    rows, graphs = [], {}
    for vt in vertex_types(g):
        L = build_link(g, p, vt, radius)
        if coned:
            if not vt:
                continue
            L = coned_link(L, vt, p)
        graphs[type_name(vt)] = L
        rows.append({"vertex_type": type_name(vt), "nodes": len(L.nodes), "edges": len(L.edges),
                     **_certificate(certify_girth(L, threshold))})
    return rows, graphs


def trees(g: DefiningGraph) -> Tuple[List[dict], str]:
    cg = build_cut_graph(g)
    rows = []
    for r in g.generators:
        pres = stabilizer_presentation(g, r, cg)
        d = pres.to_dict()
        pairs = [n for n in pres.component if n[0] == "pair"]
        names, i = [], 0
        for kind, w in zip(pres.kinds, d["free_basis"]):
            if kind == "central":
                _, s, t, _ = pairs[i]
                names.append(f"z_{s}{t}")
                i += 1
            else:
                names.append(w)
        d["basis_names"] = names
        d["presentation"] = f"<{r}> x F({', '.join(names)})" if names else f"<{r}>"
        d["isomorphism_type"] = {0: "Z", 1: "Z^2"}.get(pres.rank, f"Z x F_{pres.rank}")
        rows.append(d)
    return rows, cg.to_dot()


def graph_input(g: DefiningGraph) -> dict:
    return to_dict(g)


def all_verified(rows: Sequence[dict]) -> bool:
    return all(r["status"] == "verified" for r in rows)


# --- geodesic experiments ---------------------------------------------------------------

def geodesic_summary(name: str, Y, trials: int, seed: int) -> dict:
    from .geodesic import Cover, angle_check, cover_check, cover_constants, run_stability_trials
    from .geodesic.cover import analytic_margins
    from .geodesic.stability import acyl_constants, fellow_travel_length, gallery_constant, star_bound

    acute, witness = Y.is_acute()
    out: Dict[str, Any] = {"complex": name, "triangles": len(Y.triangles), "vertices": len(Y.vertices),
                           "acute": acute, "acute_witness": plain(witness),
                           "link_girths": {str(v): g for v, g in sorted(Y.link_girths.items())}}
    k = cover_constants(Y, seed=seed)
    cover = Cover(Y, k)
    out["cover_constants"] = k.to_dict()
    out["analytic_margins"] = analytic_margins(Y, k)
    if trials > 0:
        rep = run_stability_trials(Y, cover, trials, seed=seed)
        control = run_stability_trials(Y, cover, trials, seed=seed, perturbation=10.0)
        out["stability"] = rep.to_dict(records=False)
        out["stability_control_10eps"] = control.to_dict(records=False)
        out["cover_check"] = cover_check(Y, cover, 10 * trials, seed=seed).to_dict()
        out["angle_check"] = angle_check(Y, cover, 10 * trials, seed=seed).to_dict()
    B = star_bound(Y)
    C = gallery_constant(Y, k.alpha, seed=seed)
    ft = fellow_travel_length(k.epsilon, k.epsilon)
    out["acylindricity"] = {
        "B": B, "C": C, "C_note": "measured over sampled geodesics, not a proof",
        "fellow_travel": dataclasses.asdict(ft),
        "example": acyl_constants(k.epsilon, 1.0, 1, ft.length, B, C).to_dict(),
    }
    return out


def envelope(command: str, input_text: Optional[str], params: Dict[str, Any], body: Dict[str, Any]) -> dict:
    return {"tool": "deligne", "version": __version__, "command": command, "parameters": params,
            "parameter_hash": parameter_hash(command, input_text, params), **body}

