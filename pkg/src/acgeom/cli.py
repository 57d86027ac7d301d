"""Command-line verification driver.

Loads chart-germ descriptions from JSON, dispatches the check suites, and
emits reports as aligned text tables or schema-stable JSON (the JSON payload
is byte-reproducible for identical inputs).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import chern, geodesic, normal
from .forms import FrameCalculus, fundamental_identities_check
from .jets import Jet, JetError, JetMatrix, QC
from .structure import (AlmostComplexStructure, structure_from_deformation,
                        torsion_tensor, nijenhuis_check)

REPORT_SCHEMA = "acgeom-report/1"
STRUCTURE_KINDS = ("J0", "B-normal", "deformation")
COMMANDS = ("validate", "torsion", "normalize", "identities", "curvature",
            "decompose", "asymptotics", "geodesic")


class SpecError(ValueError):
    """Manifold-spec parsing or validation failure, with a path."""

    def __init__(self, path, message):
        super().__init__(f"{path}: {message}")
        self.path = path


@dataclass
class ManifoldSpec:
    n: int
    order: int
    kind: str
    structure_entries: list = field(default_factory=list)
    metric_entries: list = field(default_factory=list)
    seed: int = 0
    name: str = "inline"

    def to_document(self):
        return {
            "n": self.n,
            "order": self.order,
            "seed": self.seed,
            "structure": {"kind": self.kind,
                          "entries": sorted(self.structure_entries,
                                            key=_entry_key)},
            "metric": {"entries": sorted(self.metric_entries, key=_entry_key)},
        }


def _entry_key(e):
    return (sum(e["alpha"]) + sum(e["beta"]), tuple(e["alpha"]),
            tuple(e["beta"]), e["k"], e["l"])


def _check_entry(path, e, n, order, field_names=("k", "l")):
    for key in ("alpha", "beta", "re", "im", *field_names):
        if key not in e:
            raise SpecError(path, f"missing field {key!r}")
    for key in ("alpha", "beta"):
        vec = e[key]
        if len(vec) != n or any((not isinstance(x, int)) or x < 0 for x in vec):
            raise SpecError(f"{path}.{key}",
                            f"must be {n} non-negative integers")
    if sum(e["alpha"]) + sum(e["beta"]) > order:
        raise SpecError(path, f"total degree exceeds order {order}")
    for key in field_names:
        if not 1 <= e[key] <= n:
            raise SpecError(f"{path}.{key}", f"index out of range 1..{n}")
    return {"alpha": list(e["alpha"]), "beta": list(e["beta"]),
            "k": e["k"], "l": e["l"], "re": float(e["re"]),
            "im": float(e["im"])}


def parse_manifold_spec(text, name="inline") -> ManifoldSpec:
    """Parse and validate a chart-germ document (JSON text)."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError("$", f"not valid JSON: {exc}") from exc
    for key in ("n", "order", "structure"):
        if key not in doc:
            raise SpecError("$", f"missing top-level field {key!r}")
    n, order = doc["n"], doc["order"]
    if not isinstance(n, int) or not 1 <= n <= 4:
        raise SpecError("$.n", "dimension must be an integer in 1..4")
    if not isinstance(order, int) or not 2 <= order <= 6:
        raise SpecError("$.order", "truncation order must be an integer in 2..6")
    sblock = doc["structure"]
    kind = sblock.get("kind")
    if kind not in STRUCTURE_KINDS:
        raise SpecError("$.structure.kind", f"must be one of {STRUCTURE_KINDS}")
    entries = []
    for i, e in enumerate(sblock.get("entries", [])):
        cleaned = _check_entry(f"$.structure.entries[{i}]", e, n, order)
        if kind == "B-normal":
            if sum(cleaned["alpha"]) < 1:
                raise SpecError(f"$.structure.entries[{i}].alpha",
                                "B coefficients need |alpha| >= 1")
            if cleaned["l"] - 1 >= normal.lmax(cleaned["alpha"]):
                raise SpecError(
                    f"$.structure.entries[{i}]",
                    "entry violates the normal-form vanishing pattern")
        entries.append(cleaned)
    metric_entries = []
    for i, e in enumerate(doc.get("metric", {}).get("entries", [])):
        metric_entries.append(_check_entry(f"$.metric.entries[{i}]", e, n, order))
    ms = ManifoldSpec(n=n, order=order, kind=kind, structure_entries=entries,
                      metric_entries=metric_entries,
                      seed=int(doc.get("seed", 0)), name=name)
    build_structure(ms)   # validation includes the J^2 residual check
    return ms


def serialize_manifold_spec(ms: ManifoldSpec) -> str:
    return json.dumps(ms.to_document(), sort_keys=True, indent=2) + "\n"


def _b_family_from_entries(entries, n):
    fam = {}
    for e in entries:
        key = (tuple(e["alpha"]), tuple(e["beta"]))
        fam.setdefault(key, np.zeros((n, n), dtype=complex))
        fam[key][e["k"] - 1, e["l"] - 1] += complex(e["re"], e["im"])
    return fam


def build_structure(ms: ManifoldSpec) -> AlmostComplexStructure:
    if ms.kind == "J0":
        s = AlmostComplexStructure.standard(ms.n, ms.order)
    elif ms.kind == "B-normal":
        fam = _b_family_from_entries(ms.structure_entries, ms.n)
        s = normal.structure_from_b_family(fam, ms.n, ms.order)
    else:
        s = structure_from_deformation(ms.n, ms.order, seed=ms.seed)
    rep = s.validate()
    if rep.max_residual > 1e-9:
        raise SpecError("$.structure",
                        f"J^2 residual {rep.max_residual:.2e} over threshold")
    return s


def build_metric(ms: ManifoldSpec) -> chern.HermitianData:
    """Identity plus the listed h_{k,l} perturbations (one-based row/column);
    the result is hermitian-symmetrized."""
    h = JetMatrix.identity(ms.n, ms.n, ms.order)
    for e in ms.metric_entries:
        row, col = e["k"] - 1, e["l"] - 1
        h.entries[row][col] = h.entries[row][col] + Jet.monomial(
            ms.n, ms.order, tuple(e["alpha"]), tuple(e["beta"]),
            complex(e["re"], e["im"]))
    return chern.HermitianData.from_matrix(h, symmetrize=True)


# -- reports ------------------------------------------------------------------

@dataclass
class ReportRow:
    check: str
    residual: float | None
    tolerance: float | None
    value: str | None = None

    @property
    def passed(self):
        if self.tolerance is None or self.residual is None:
            return True
        return self.residual <= self.tolerance


@dataclass
class Report:
    command: str
    fixture: str
    rows: list
    wall_time: float = 0.0

    @property
    def passed(self):
        return all(r.passed for r in self.rows)

    def to_document(self):
        return {
            "schema": REPORT_SCHEMA,
            "command": self.command,
            "fixture": self.fixture,
            "pass": self.passed,
            "rows": [{
                "check": r.check,
                "residual": r.residual,
                "tolerance": r.tolerance,
                "value": r.value,
                "pass": r.passed,
            } for r in self.rows],
        }


def emit_report(report: Report, fmt="text") -> str:
    if fmt == "json":
        return json.dumps(report.to_document(), sort_keys=True, indent=2) + "\n"
    lines = [f"# {report.command} on {report.fixture}"]
    header = f"{'check':<44} {'residual':>12} {'tolerance':>12} {'value':>14} {'status':>7}"
    lines.append(header)
    lines.append("-" * len(header))
    for r in report.rows:
        res = "-" if r.residual is None else f"{r.residual:.3e}"
        tol = "-" if r.tolerance is None else f"{r.tolerance:.1e}"
        val = "-" if r.value is None else str(r.value)
        status = "PASS" if r.passed else "FAIL"
        lines.append(f"{r.check:<44} {res:>12} {tol:>12} {val:>14} {status:>7}")
    lines.append(f"[{'PASS' if report.passed else 'FAIL'}] "
                 f"{len(report.rows)} checks in {report.wall_time:.2f}s")
    return "\n".join(lines) + "\n"


# -- command implementations ---------------------------------------------------

def _row(check, residual, tol, value=None):
    return ReportRow(check, None if residual is None else float(residual),
                     tol, value)


def _cmd_validate(ms, opts):
    s = build_structure(ms)
    rep = s.validate()
    rows = [
        _row("J^2 square-block residual", rep.residual_square, opts.tol),
        _row("J^2 mixed-block residual", rep.residual_mixed, opts.tol),
        _row("adapted at origin", 0.0 if s.is_adapted(1e-10) else 1.0, 0.0),
    ]
    if opts.exact and ms.kind == "B-normal":
        rows.append(_row("closed-form A vs exact solver",
                         _exact_a_crosscheck(ms), 0.0))
    return rows


def _exact_a_crosscheck(ms):
    n, order = ms.n, ms.order
    b = JetMatrix.zeros(n, n, n, order, exact=True)
    fam = {}
    for e in ms.structure_entries:
        key = (tuple(e["alpha"]), tuple(e["beta"]))
        mat = fam.setdefault(key, np.full((n, n), QC(0), dtype=object))
        c = QC(Fraction(repr(e["re"])), Fraction(repr(e["im"])))
        mat[e["k"] - 1, e["l"] - 1] = mat[e["k"] - 1, e["l"] - 1] + c
        b.entries[e["k"] - 1][e["l"] - 1] = b.entries[e["k"] - 1][e["l"] - 1] \
            + Jet.monomial(n, order, key[0], key[1], c, exact=True)
    a = normal.solve_a_degree_by_degree(b)
    half_i = QC(0, Fraction(1, 2))
    for alpha in normal._multi_indices(n, order):
        if sum(alpha) < 1:
            continue
        for beta in normal._multi_indices(n, order - sum(alpha)):
            if sum(beta) < 1:
                continue
            closed = normal.a_from_b_closed_form(fam, alpha, beta, n, exact=True)
            for k in range(n):
                for l in range(n):
                    if a[k, l].coeff(alpha, beta) != half_i * closed[k, l]:
                        return 1.0
    return 0.0


def _cmd_torsion(ms, opts):
    s = build_structure(ms)
    tors = torsion_tensor(s)
    rows = [
        _row("frame torsion vs bracket identity", nijenhuis_check(s, tors),
             opts.tol),
    ]
    anti = max((tors.nbar[r] + tors.nbar[r].T).max_abs() for r in range(s.n))
    rows.append(_row("antisymmetry of coefficients", anti, opts.tol))
    for r in range(s.n):
        for k in range(s.n):
            for l in range(k + 1, s.n):
                c = tors.coefficient(r, k, l).constant_term
                if abs(c) > opts.tol:
                    rows.append(_row(f"nbar[{r + 1};{k + 1},{l + 1}](0)", None,
                                     None, f"{c.real:+.6f}{c.imag:+.6f}i"))
    return rows


def _cmd_normalize(ms, opts, payload):
    s = build_structure(ms)
    target = min(opts.order or s.order, s.order)
    res = normal.normalize_to_order(s, target)
    rows = [
        _row("vanishing-pattern violation", res.violation, opts.tol),
        _row("output J^2 residual", res.structure.validate().max_residual,
             opts.tol),
    ]
    rerun = normal.normalize_to_order(res.structure, target)
    ident = [Jet.variable(ms.n, target + 1, k) for k in range(ms.n)]
    drift = max((p - i).max_abs() for p, i in zip(rerun.phi, ident))
    rows.append(_row("idempotence (second pass is identity)", drift, opts.tol))
    payload["phi"] = [p.to_records() for p in res.phi]
    payload["phi_stages"] = [[p.to_records() for p in stage]
                             for stage in res.phi_stages]
    payload["b_family"] = _family_records(res.b_family())
    payload["a_family"] = _family_records(res.a_family())
    return rows


def _family_records(fam):
    out = []
    for (alpha, beta) in sorted(fam, key=lambda k: (sum(k[0]) + sum(k[1]), k)):
        mat = fam[(alpha, beta)]
        for k in range(mat.shape[0]):
            for l in range(mat.shape[1]):
                c = mat[k, l]
                if abs(c) > 1e-13:
                    out.append({"alpha": list(alpha), "beta": list(beta),
                                "k": k + 1, "l": l + 1,
                                "re": c.real, "im": c.imag})
    return out


def _identity_forms(calc, seed):
    rng = np.random.default_rng(seed)
    forms = []
    for base in calc.monomial_forms(2):
        terms = {}
        for _ in range(3):
            d = int(rng.integers(0, calc.order + 1))
            exps = [0] * (2 * calc.n)
            for _ in range(d):
                exps[int(rng.integers(0, 2 * calc.n))] += 1
            c = complex(int(rng.integers(-256, 257)),
                        int(rng.integers(-256, 257))) / 256
            terms[(tuple(exps[:calc.n]), tuple(exps[calc.n:]))] = c
        forms.append(base * Jet(calc.n, calc.order, terms))
    return forms


def _cmd_identities(ms, opts):
    calc = FrameCalculus(build_structure(ms))
    forms = _identity_forms(calc, opts.seed)
    table = fundamental_identities_check(calc, forms)
    return [_row(rowd["identity"], rowd["max_residual"], opts.tol,
                 value=f"deg<={rowd['order_checked']}") for rowd in table]


def _cmd_curvature(ms, opts):
    s = build_structure(ms)
    calc = FrameCalculus(s)
    hd = build_metric(ms)
    conn = chern.chern_connection(calc, hd)
    blocks = chern.curvature(calc, conn)
    rows = [_row("hermitian symmetry of C(0)",
                 chern.hermitian_curvature_symmetry(blocks), opts.tol)]
    try:
        c_direct = chern.curvature_origin_formula(hd, s)
        diff = np.abs(blocks.c_tensor_at_origin() - c_direct).max()
        rows.append(_row("operator curvature vs origin formula", diff, opts.tol))
        c = blocks.c_tensor_at_origin()
        idx = np.unravel_index(np.argmax(np.abs(c)), c.shape)
        cv = c[idx]
        rows.append(_row(
            f"C[{idx[0] + 1},{idx[1] + 1};{idx[2] + 1},{idx[3] + 1}](0)",
            None, None, f"{cv.real:+.6f}{cv.imag:+.6f}i"))
    except JetError as exc:
        rows.append(_row(f"origin formula inapplicable: {exc}", 1.0, 0.0))
    try:
        rows.append(_row("pointwise curvature expression",
                         chern.pointwise_curvature_residual(calc, hd, conn,
                                                            blocks), opts.tol))
    except JetError:
        rows.append(_row("pointwise expression skipped (frame not "
                         "delbar-flat at 0)", None, None))
    rows.append(_row("hermitian compatibility of the connection",
                     chern.hermitian_compat_residual(calc, hd, conn), opts.tol))
    return rows


def _cmd_decompose(ms, opts):
    s = build_structure(ms)
    calc = FrameCalculus(s)
    hd = build_metric(ms)
    dec = chern.ChernLeviCivita(calc, hd)
    rows = [
        _row("connection decomposition residual",
             dec.decomposition_residual(), opts.tol),
        _row("torsion formula residual", dec.torsion_formula_residual(),
             opts.tol),
    ]
    domega = chern.domega_max(calc, hd)
    delta = dec.delta_max()
    nmax = dec.n_omega_max()
    tmax = torsion_tensor(s).max_abs()
    rows.append(_row("delta = 0 iff d omega = 0",
                     0.0 if (delta <= opts.tol) == (domega <= opts.tol)
                     else 1.0, 0.0, value=f"delta={delta:.2e}"))
    rows.append(_row("N = 0 iff torsion = 0",
                     0.0 if (nmax <= opts.tol) == (tmax <= opts.tol) else 1.0,
                     0.0, value=f"N={nmax:.2e}"))
    if tmax <= opts.tol:
        rows.append(_row("gamma^{0,2} vanishes (integrable case)",
                         dec.gamma02_max(), opts.tol))
    return rows


def _cmd_asymptotics(ms, opts):
    s = build_structure(ms)
    calc = FrameCalculus(s)
    hd = build_metric(ms)
    rows = [
        _row("coefficient families vs full connection",
             chern.asymptotics_vs_full_connection(calc, hd), opts.tol),
        _row("normal-form metric expansion",
             chern.metric_coordinate_residual(calc, hd), opts.tol),
    ]
    return rows


def _parse_vector(text, n):
    parts = text.split(",")
    if len(parts) != 2 * n:
        raise SpecError("$", f"need {2 * n} comma-separated floats "
                        f"(re,im per component)")
    vals = [float(p) for p in parts]
    return np.array([complex(vals[2 * i], vals[2 * i + 1]) for i in range(n)])


def _cmd_geodesic(ms, opts, payload):
    s = build_structure(ms)
    calc = FrameCalculus(s)
    hd = build_metric(ms)
    lab = geodesic.GeodesicLab(calc, hd)
    z = _parse_vector(opts.z, ms.n) if opts.z else np.zeros(ms.n, complex)
    v = _parse_vector(opts.v, ms.n) if opts.v else \
        np.full(ms.n, 0.04 / max(ms.n, 1), dtype=complex)
    scales = tuple(float(x) for x in opts.scales.split(",")) if opts.scales \
        else (1.0, 0.5, 0.25, 0.125)
    probe = geodesic.error_scaling_probe(lab, z, v, scales=scales,
                                         steps=opts.steps)
    rows = []
    payload["scales"] = [{"s": r["scale"], "e": r["error"],
                          "slope_partial": r.get("slope_partial")}
                         for r in probe["rows"]]
    for r in probe["rows"]:
        extra = f"slope={r['slope_partial']:.3f}" if "slope_partial" in r else ""
        rows.append(_row(f"scale {r['scale']:g}", None, None,
                         value=f"e={r['error']:.3e} {extra}".strip()))
    if probe["exact"]:
        rows.append(_row("error at integrator noise floor (exact)", 0.0, 0.0))
    else:
        slope = probe["slope"]
        rows.append(_row(f"fitted slope >= {opts.slope_bound}",
                         max(0.0, opts.slope_bound - slope), 0.0,
                         value=f"slope={slope:.3f}"))
    return rows


@dataclass
class Options:
    tol: float = 1e-10
    order: int | None = None
    seed: int = 0
    exact: bool = False
    z: str | None = None
    v: str | None = None
    scales: str | None = None
    steps: int = 256
    slope_bound: float = 2.8


def run_command(command, ms: ManifoldSpec, opts: Options) -> tuple[Report, dict]:
    """Dispatch a verification command; deterministic given (spec, flags)."""
    if command not in COMMANDS:
        raise SpecError("$", f"unknown command {command!r}")
    payload = {}
    start = time.perf_counter()
    try:
        if command == "validate":
            rows = _cmd_validate(ms, opts)
        elif command == "torsion":
            rows = _cmd_torsion(ms, opts)
        elif command == "normalize":
            rows = _cmd_normalize(ms, opts, payload)
        elif command == "identities":
            rows = _cmd_identities(ms, opts)
        elif command == "curvature":
            rows = _cmd_curvature(ms, opts)
        elif command == "decompose":
            rows = _cmd_decompose(ms, opts)
        elif command == "asymptotics":
            rows = _cmd_asymptotics(ms, opts)
        else:
            rows = _cmd_geodesic(ms, opts, payload)
    except (JetError, SpecError) as exc:
        rows = [_row(f"error: {exc}", 1.0, 0.0)]
    report = Report(command, ms.name, rows, time.perf_counter() - start)
    return report, payload


def _run_file(args_tuple):
    command, path, opts_dict = args_tuple
    opts = Options(**opts_dict)
    try:
        with open(path, "r", encoding="utf-8") as fh:
            ms = parse_manifold_spec(fh.read(), name=os.path.basename(path))
    except (OSError, SpecError) as exc:
        report = Report(command, os.path.basename(path),
                        [_row(f"spec error: {exc}", 1.0, 0.0)])
        return report, {}
    return run_command(command, ms, opts)


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="acgeom",
        description="verification suites for almost complex chart germs")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("paths", nargs="+",
                        help="manifold spec files or a directory of them")
    parser.add_argument("--tol", type=float, default=1e-10)
    parser.add_argument("--order", type=int, default=None,
                        help="override the normalization order")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--json", action="store_true", dest="as_json")
    parser.add_argument("--exact", action="store_true",
                        help="rational-arithmetic cross-checks where supported")
    parser.add_argument("--z", type=str, default=None,
                        help="base point: re,im pairs, comma separated")
    parser.add_argument("--v", type=str, default=None,
                        help="tangent vector: re,im pairs, comma separated")
    parser.add_argument("--scales", type=str, default=None)
    parser.add_argument("--steps", type=int, default=256)
    parser.add_argument("--slope-bound", type=float, default=2.8,
                        dest="slope_bound")
    parser.add_argument("--jobs", type=int, default=min(4, os.cpu_count() or 1))
    args = parser.parse_args(argv)

    paths = []
    for p in args.paths:
        if os.path.isdir(p):
            paths.extend(sorted(
                os.path.join(p, f) for f in os.listdir(p) if f.endswith(".json")))
        else:
            paths.append(p)
    if not paths:
        print("no spec files found", file=sys.stderr)
        return 2

    opts_dict = {"tol": args.tol, "order": args.order, "seed": args.seed,
                 "exact": args.exact, "z": args.z, "v": args.v,
                 "scales": args.scales, "steps": args.steps,
                 "slope_bound": args.slope_bound}
    tasks = [(args.command, p, opts_dict) for p in paths]
    if len(tasks) > 1 and args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_run_file, tasks))
    else:
        results = [_run_file(t) for t in tasks]

    all_pass = True
    out = []
    for (report, payload) in results:
        all_pass = all_pass and report.passed
        if args.as_json:
            doc = report.to_document()
            if payload:
                doc["data"] = payload
            out.append(json.dumps(doc, sort_keys=True, indent=2))
        else:
            out.append(emit_report(report, "text"))
    sys.stdout.write("\n".join(out) + ("\n" if args.as_json else ""))
    return 0 if all_pass else 1


if __name__ == "__main__":
    sys.exit(main())
