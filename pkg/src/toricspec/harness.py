"""Sweep orchestration: mode solves across s, comparison against limit spectra.

A sweep solves every lattice mode of every requested level at every s, matches
quantized modes to their limit oscillators through m = k b, and turns the
comparison into tables and verdicts.  The paper-side statement is qualitative
(spectral convergence without rates), so verdict thresholds are engineering
choices; they are recorded in the report header and in VERDICT_NOTES.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import numpy as np

from .errors import ToricSpecError
from .limit import predicted_limit
from .mesh import build_mesh
from .operator import OperatorFactory, map_dbar, mode_set, solve_eigs
from .polytope import bs_points, polytope_from_json, validate_delzant
from .potential import PotentialSpec, make_potential_spec, potential_spec_from_json
from .reports import ensure_dir, svg_line_plot, write_csv, write_json

KERNEL_TOL = 1e-3
BS_ZERO_TOL = 5e-4
LIMIT_REL_TOL = 0.05
TAIL_NOISE = 1.10
TAIL_ABS = 1e-3
LOCALIZATION_MASS = 0.99

VERDICT_NOTES = {
    "kernel_tol": "mode counts as holomorphic when its lowest dbar eigenvalue < 1e-3",
    "bs_zero_tol": "quantized modes must keep their lowest dbar eigenvalue < 5e-4 at every s",
    "gap_normalization": "gap_j = |lambda_j - predicted_j| / max(predicted_j, k)",
    "limit_match": "raw gap at the smallest s <= max(0.05, 2 x discretization estimate) "
    "for j <= 2; richardson gap extrapolates the last two s values with sqrt(s) rate",
    "tail_monotone": "gap at the smallest s <= 1.1 x previous gap + 1e-3",
    "localization": "smallest c on a 0.25-grid with >= 99% quadrature mass inside "
    "the union of balls B(b, c sqrt(s)) over quantized points",
}


@dataclass
class SweepConfig:
    """Inputs of one sweep; h(s) defaults to sqrt(s)/h_factor with a floor.

    An explicit h_list (one mesh target per s, same order) overrides the rule.
    """

    spec: PotentialSpec
    k_list: tuple
    s_list: tuple            # descending positive
    h_factor: float = 40.0
    h_floor: float = None
    h_list: tuple = None
    eig_count: int = 4
    mode_margin: int = 1
    grading_ratio: float = 0.7
    workers: int = 1
    c_grid: tuple = tuple(np.arange(0.5, 10.01, 0.25))

    def __post_init__(self):
        s = list(self.s_list)
        if any(v <= 0 for v in s) or sorted(s, reverse=True) != s:
            raise ValueError("s_list must be positive and descending")
        if self.eig_count < 1:
            raise ValueError("eig_count must be >= 1")
        if self.h_floor is None:
            self.h_floor = 1.0 / 800.0 if self.spec.polytope.dim == 1 else 1.0 / 80.0
        if self.h_list is not None:
            if len(self.h_list) != len(self.s_list) or any(h <= 0 for h in self.h_list):
                raise ValueError("h_list must give one positive target per s")

    def h_of(self, s):
        if self.h_list is not None:
            return float(self.h_list[list(self.s_list).index(s)])
        return max(float(np.sqrt(s)) / self.h_factor, self.h_floor)


def sweep_config_from_json(data, base_dir="."):
    """SweepConfig from the sweep JSON schema (file paths or inline objects)."""
    def load(key, parser, inline_parser):
        val = data.get(key)
        if val is None:
            return None
        if isinstance(val, str):
            with open(os.path.join(base_dir, val), encoding="ascii") as f:
                return parser(f.read())
        return inline_parser(val)

    P = load(
        "polytope",
        polytope_from_json,
        lambda v: validate_delzant([(f["normal"], f["offset"]) for f in v["facets"]], dim=v["dim"]),
    )
    if P is None:
        raise ValueError("sweep config needs a polytope")
    spec = load("potential", lambda t: potential_spec_from_json(P, t), lambda v: potential_spec_from_json(P, v))
    if spec is None:
        spec = make_potential_spec(P)
    kwargs = {}
    for key in ("h_factor", "h_floor", "eig_count", "mode_margin", "grading_ratio", "workers"):
        if key in data:
            kwargs[key] = data[key]
    if "h_list" in data:
        kwargs["h_list"] = tuple(float(h) for h in data["h_list"])
    return SweepConfig(
        spec=spec,
        k_list=tuple(int(k) for k in data["k_list"]),
        s_list=tuple(float(s) for s in data["s_list"]),
        **kwargs,
    )


@dataclass
class ConvergenceReport:
    """All sweep tables plus pass/fail verdicts."""

    meta: dict
    eig_rows: list = field(default_factory=list)
    kernel_rows: list = field(default_factory=list)
    trajectories: dict = field(default_factory=dict)   # (k, b) -> list of rows
    localization_rows: list = field(default_factory=list)
    verdicts: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)
    notes: dict = field(default_factory=lambda: dict(VERDICT_NOTES))
    elapsed_s: float = 0.0      # wall time; kept out of the serialized report

    @property
    def partial(self):
        return bool(self.failures)

    def passed(self):
        return all(v.get("ok", False) for v in self.verdicts.values()) and not self.partial

    def to_json(self):
        return {
            "meta": self.meta,
            "notes": self.notes,
            "eigenvalues": self.eig_rows,
            "kernel_counts": self.kernel_rows,
            "trajectories": {
                f"k={k} b=({', '.join(str(c) for c in b)})": rows
                for (k, b), rows in sorted(self.trajectories.items())
            },
            "localization": self.localization_rows,
            "verdicts": self.verdicts,
            "failures": self.failures,
        }


def _count_lattice(P, k):
    return len(bs_points(P, k))


def _solve_mode(factory, mode, count):
    op = factory.operator(mode)
    spectrum = solve_eigs(op, count)
    return map_dbar(spectrum, factory.k, factory.mesh.dim), spectrum


def run_sweep(config: SweepConfig):
    """Solve every (k, s, mode), compare quantized modes to their limits."""
    import time

    t_start = time.time()
    spec = config.spec
    P = spec.polytope
    n = P.dim
    report = ConvergenceReport(
        meta={
            "dim": n,
            "k_list": list(config.k_list),
            "s_list": list(config.s_list),
            "h": {repr(float(s)): config.h_of(s) for s in config.s_list},
            "eig_count": config.eig_count,
            "mode_margin": config.mode_margin,
        }
    )

    for k in config.k_list:
        points = bs_points(P, k)
        by_mode = {b.mode: b for b in points}
        predictions = predicted_limit(spec, k, count=config.eig_count + 2)
        modes = mode_set(P, k, config.mode_margin)
        lattice_count = len(points)
        non_bs_lowest = {m: [] for m in modes if m not in by_mode}

        for s in config.s_list:
            mesh = build_mesh(P, config.h_of(s), config.grading_ratio)
            factory = OperatorFactory(spec, s, k, mesh)
            results = {}

            def solve(mode):
                try:
                    return mode, _solve_mode(factory, mode, config.eig_count), None
                except ToricSpecError as exc:
                    return mode, None, exc

            if config.workers > 1:
                with ThreadPoolExecutor(max_workers=config.workers) as pool:
                    raw = list(pool.map(solve, modes))
            else:
                raw = [solve(m) for m in modes]
            outcomes = []
            for mode, result, exc in raw:
                if exc is not None:
                    report.failures.append(
                        {"k": k, "s": float(s), "mode": list(mode), "error": str(exc)}
                    )
                else:
                    outcomes.append((mode, result))
            for mode, (dbar, spectrum) in outcomes:
                results[mode] = (dbar, spectrum)
                report.eig_rows.append(
                    {
                        "k": int(k),
                        "s": float(s),
                        "mode": list(mode),
                        "is_bs": mode in by_mode,
                        "dbar": [float(v) for v in dbar],
                    }
                )

            zero_modes = [m for m, (d, _) in results.items() if d[0] < KERNEL_TOL]
            report.kernel_rows.append(
                {
                    "k": int(k),
                    "s": float(s),
                    "zero_modes": len(zero_modes),
                    "lattice_count": lattice_count,
                }
            )
            for m in non_bs_lowest:
                if m in results:
                    non_bs_lowest[m].append(float(results[m][0][0]))

            # trajectories and localization for quantized modes
            mass_cache = _localization_masses(
                factory, points, [by_mode[m] for m in results if m in by_mode],
                {m: results[m][1] for m in results if m in by_mode}, s, config.c_grid
            )
            for mode, (dbar, spectrum) in results.items():
                if mode not in by_mode:
                    continue
                b = by_mode[mode]
                pred = predictions[b].flat(config.eig_count)
                gaps = [
                    abs(dbar[j] - pred[j]) / max(pred[j], float(k))
                    for j in range(min(len(pred), len(dbar)))
                ]
                report.trajectories.setdefault((k, tuple(str(c) for c in b.point)), []).append(
                    {
                        "s": float(s),
                        "dbar": [float(v) for v in dbar],
                        "predicted": [float(v) for v in pred],
                        "gaps": [float(g) for g in gaps],
                    }
                )
                c_min = mass_cache[mode]
                report.localization_rows.append(
                    {
                        "k": int(k),
                        "s": float(s),
                        "mode": list(mode),
                        "c_min": c_min,
                        "mass_at_c5": mass_cache[(mode, "mass5")],
                    }
                )

        _judge_level(report, config, k, predictions, by_mode, non_bs_lowest)
    report.elapsed_s = time.time() - t_start
    return report


def _localization_masses(factory, all_points, bs_list, spectra, s, c_grid):
    """Smallest c with 99% mass in union of B(b, c sqrt(s)), per quantized mode."""
    out = {}
    q = factory.qpoints()
    centers = np.array([[float(c) for c in b.point] for b in all_points])
    d2 = np.min(
        np.sum((q[:, :, None, :] - centers[None, None, :, :]) ** 2, axis=-1), axis=-1
    )
    dmin = np.sqrt(d2)
    for b in bs_list:
        spectrum = spectra[b.mode]
        v = spectrum.vectors[:, 0]
        total = factory.quadrature_l2(v)
        c_min = None
        mass5 = None
        for c in c_grid:
            mask = (dmin <= c * np.sqrt(s)).astype(float)
            frac = factory.quadrature_l2(v, mask) / total
            if abs(c - 5.0) < 1e-9:
                mass5 = frac
            if c_min is None and frac >= LOCALIZATION_MASS:
                c_min = float(c)
        if mass5 is None:
            mask = (dmin <= 5.0 * np.sqrt(s)).astype(float)
            mass5 = factory.quadrature_l2(v, mask) / total
        out[b.mode] = c_min if c_min is not None else float("inf")
        out[(b.mode, "mass5")] = float(mass5)
    return out


def _richardson_gap(rows, pred, j, k):
    """sqrt(s)-rate extrapolation of eigenvalue j from the last two s values."""
    if len(rows) < 2:
        return None
    s1, s2 = rows[-2]["s"], rows[-1]["s"]
    l1, l2 = rows[-2]["dbar"][j], rows[-1]["dbar"][j]
    w1, w2 = np.sqrt(s1), np.sqrt(s2)
    lam = l2 + (l2 - l1) * w2 / (w1 - w2)
    return abs(lam - pred[j]) / max(pred[j], float(k))


def _judge_level(report, config, k, predictions, by_mode, non_bs_lowest):
    kernel_ok = all(
        row["zero_modes"] == row["lattice_count"]
        for row in report.kernel_rows
        if row["k"] == k
    )
    report.verdicts[f"kernel_identity_k{k}"] = {
        "ok": bool(kernel_ok),
        "detail": [r for r in report.kernel_rows if r["k"] == k],
    }

    bs_zero_ok = True
    limit_ok = True
    tail_ok = True
    limit_detail = {}
    for (kk, bkey), rows in report.trajectories.items():
        if kk != k:
            continue
        rows = sorted(rows, key=lambda r: -r["s"])
        lowest = [r["dbar"][0] for r in rows]
        if max(lowest) >= BS_ZERO_TOL:
            bs_zero_ok = False
        pred = rows[-1]["predicted"]
        gaps_last = rows[-1]["gaps"]
        rich = [
            _richardson_gap(rows, pred, j, k) for j in range(min(3, len(pred)))
        ]
        n_check = min(3, len(gaps_last))
        raw_ok = all(g <= LIMIT_REL_TOL for g in gaps_last[:n_check])
        rich_ok = all(g is None or g <= LIMIT_REL_TOL for g in rich[:n_check])
        # with three or more s values the verdict extrapolates (sqrt-s rate);
        # shorter sweeps are judged on the raw gap at the smallest s
        if not (rich_ok if len(rows) >= 3 else raw_ok):
            limit_ok = False
        if len(rows) >= 2:
            for j in range(n_check):
                g_prev = rows[-2]["gaps"][j]
                g_last = rows[-1]["gaps"][j]
                if g_last > TAIL_NOISE * g_prev + TAIL_ABS:
                    tail_ok = False
        limit_detail[f"b=({bkey[0] if len(bkey) == 1 else ', '.join(bkey)})"] = {
            "raw_gaps_at_smallest_s": [float(g) for g in gaps_last[:n_check]],
            "richardson_gaps": [None if g is None else float(g) for g in rich[:n_check]],
        }
    report.verdicts[f"bs_zero_persistence_k{k}"] = {"ok": bool(bs_zero_ok)}
    report.verdicts[f"limit_match_k{k}"] = {"ok": bool(limit_ok), "detail": limit_detail}
    report.verdicts[f"gap_tail_monotone_k{k}"] = {"ok": bool(tail_ok)}

    divergent = {}
    for m, vals in non_bs_lowest.items():
        if len(vals) >= 2:
            divergent[str(list(m))] = bool(vals[-1] > vals[0])
    report.verdicts[f"non_bs_divergence_k{k}"] = {
        "ok": True,                  # informational flag, not a pass criterion
        "increasing": divergent,
    }


# ---------------------------------------------------------------------------
# standalone checks
# ---------------------------------------------------------------------------

def localization_check(spec: PotentialSpec, s_list, k, c_grid=None, h_factor=40.0):
    """Mass concentration of quantized ground modes near their base points."""
    c_grid = tuple(np.arange(0.5, 10.01, 0.25)) if c_grid is None else tuple(c_grid)
    P = spec.polytope
    points = bs_points(P, k)
    rows = []
    for s in sorted(s_list, reverse=True):
        h = max(np.sqrt(s) / h_factor, 1.0 / 800.0 if P.dim == 1 else 1.0 / 80.0)
        mesh = build_mesh(P, h)
        factory = OperatorFactory(spec, s, k, mesh)
        spectra = {}
        for b in points:
            spectra[b.mode] = solve_eigs(factory.operator(b.mode), 1)
        masses = _localization_masses(factory, points, points, spectra, s, c_grid)
        for b in points:
            rows.append(
                {
                    "k": int(k),
                    "s": float(s),
                    "mode": list(b.mode),
                    "c_min": masses[b.mode],
                    "mass_at_c5": masses[(b.mode, "mass5")],
                }
            )
    return rows


def fiber_diameter_check(spec: PotentialSpec, s_list, grid_per_dim=9):
    """Proxy for the sqrt(s) fiber-diameter law: sup lambda_max(G_s^-1) <= C s.

    Returns (rows, fitted_C, analytic_bound); the per-s suprema rise toward
    the bound lambda_max((Hess psi)^-1) as s decreases.
    """
    P = spec.polytope
    lo, hi = P.bounding_box()
    axes = [np.linspace(float(a), float(b), grid_per_dim + 2)[1:-1] for a, b in zip(lo, hi)]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([g.ravel() for g in mesh], axis=-1)
    inside = (pts @ P.normals_array().T - P.offsets_array()).min(axis=1) > 1e-9
    pts = pts[inside]
    # graded points toward facet midpoints catch the boundary behavior
    center = np.array([float(c) for c in P.interior_point()])
    extra = []
    for v in P.vertices:
        vv = np.array([float(c) for c in v])
        for eps in (1e-2, 1e-4):
            extra.append(center + (1 - eps) * (vv - center))
    pts = np.vstack([pts, np.array(extra)])

    from .potential import PotentialFamily

    rows = []
    fitted = 0.0
    for s in s_list:
        fam = PotentialFamily.of_spec(spec, s)
        G = fam.hessian(pts)
        lam_max = np.linalg.eigvalsh(np.linalg.inv(G))[:, -1]
        sup = float(lam_max.max() / s)
        rows.append({"s": float(s), "sup_lambda_max_over_s": sup})
        fitted = max(fitted, sup)
    hess_psi = spec.psi.hessian(pts)
    bound = float(np.linalg.eigvalsh(np.linalg.inv(hess_psi))[:, -1].max())
    return rows, fitted, bound


# ---------------------------------------------------------------------------
# emission
# ---------------------------------------------------------------------------

def emit_reports(report: ConvergenceReport, out_dir):
    """Write report.json, per-level eigenvalue CSVs, localization and kernel
    CSVs, and one trajectory SVG per quantized point.  Deterministic."""
    ensure_dir(out_dir)
    write_json(os.path.join(out_dir, "report.json"), report.to_json())
    files = ["report.json"]

    for k in sorted({row["k"] for row in report.eig_rows}) if report.eig_rows else []:
        rows = [r for r in report.eig_rows if r["k"] == k]
        count = max(len(r["dbar"]) for r in rows)
        header = ["s"] + [f"m{i}" for i in range(len(rows[0]["mode"]))] + [
            "is_bs"
        ] + [f"dbar{j}" for j in range(count)]
        csv_rows = []
        for r in sorted(rows, key=lambda r: (-r["s"], r["mode"])):
            csv_rows.append(
                [r["s"]] + r["mode"] + [int(r["is_bs"])] + [float(v) for v in r["dbar"]]
            )
        name = f"eigs_k{k}.csv"
        write_csv(os.path.join(out_dir, name), header, csv_rows)
        files.append(name)

    if report.localization_rows:
        header = ["k", "s"] + [
            f"m{i}" for i in range(len(report.localization_rows[0]["mode"]))
        ] + ["c_min", "mass_at_c5"]
        rows = [
            [r["k"], r["s"]] + r["mode"] + [float(r["c_min"]), float(r["mass_at_c5"])]
            for r in sorted(
                report.localization_rows, key=lambda r: (r["k"], -r["s"], r["mode"])
            )
        ]
        write_csv(os.path.join(out_dir, "localization.csv"), header, rows)
        files.append("localization.csv")

    if report.kernel_rows:
        write_csv(
            os.path.join(out_dir, "kernel_counts.csv"),
            ["k", "s", "zero_modes", "lattice_count"],
            [
                [r["k"], r["s"], r["zero_modes"], r["lattice_count"]]
                for r in sorted(report.kernel_rows, key=lambda r: (r["k"], -r["s"]))
            ],
        )
        files.append("kernel_counts.csv")

    for i, ((k, bkey), rows) in enumerate(sorted(report.trajectories.items())):
        rows = sorted(rows, key=lambda r: -r["s"])
        xs = [r["s"] for r in rows]
        count = len(rows[0]["dbar"])
        series = [
            (f"eig {j}", xs, [r["dbar"][j] for r in rows]) for j in range(count)
        ]
        hlines = rows[0]["predicted"][:count]
        name = f"plot_b{i}.svg"
        svg_line_plot(
            os.path.join(out_dir, name),
            title=f"k={k} b=({', '.join(bkey)})",
            xlabel="s",
            ylabel="dbar eigenvalue",
            series=series,
            hlines=hlines,
        )
        files.append(name)
    return files
