"""Problem files, matrix interchange formats, and report bundles.

A problem file is a JSON document listing the settings (label, short estimate,
bias bounds) plus a rho specification, which may be an inline pair list, a
square CSV in the split-triangle convention (upper triangle holds upper
bounds, lower triangle lower bounds, blank cells mean unrestricted), or a
generator recipe (supershort / decay / adjacency).
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

from .bounds import (
    BiasBound,
    Restricted,
    RhoMatrix,
    SettingEstimate,
    Violation,
    transitivity_audit,
)
from .intervals import Interval
from .polytope import ConstraintGraph, PinResult, SolvedPolytope, build, close, pin, pin_at_fraction

FLOAT_SIGNIFICANT_DIGITS = 12
TABLE_DECIMALS = 3


class ProblemError(ValueError):
    pass


@dataclass
class Problem:
    estimates: list[SettingEstimate]
    nus: list[BiasBound]
    rho: Optional[RhoMatrix]
    symmetric: bool = False
    epsilon: float = 1e-6

    @property
    def labels(self) -> list[str]:
        return [e.setting for e in self.estimates]

    def build_graph(self) -> ConstraintGraph:
        return build(self.estimates, self.nus, self.rho, symmetric=self.symmetric)


# ---------------------------------------------------------------------------
# canonical JSON

def _round_floats(obj: Any) -> Any:
    if isinstance(obj, float):
        return float(f"%.{FLOAT_SIGNIFICANT_DIGITS}g" % obj)
    if isinstance(obj, dict):
        return {k: _round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_floats(v) for v in obj]
    return obj


def canonical_json(obj: Any) -> str:
    """Deterministic JSON: sorted keys, compact separators, floats rounded to
    a fixed number of significant digits."""
    return json.dumps(_round_floats(obj), sort_keys=True, separators=(",", ":"))


# ---------------------------------------------------------------------------
# rho matrix interchange

def rho_matrix_to_csv(m: RhoMatrix) -> str:
    labels = list(m.settings)
    index = {s: i for i, s in enumerate(labels)}
    grid = [["" for _ in labels] for _ in labels]
    for j, k, bound in m.restricted_pairs():
        ji, ki = index[j], index[k]
        grid[ji][ki] = f"%.{FLOAT_SIGNIFICANT_DIGITS}g" % bound.rho_u
        grid[ki][ji] = f"%.{FLOAT_SIGNIFICANT_DIGITS}g" % bound.rho_l
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["setting", *labels])
    for label, row in zip(labels, grid):
        writer.writerow([label, *row])
    return out.getvalue()


def rho_matrix_from_csv(text: str) -> RhoMatrix:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        raise ProblemError("empty rho matrix CSV")
    labels = [c.strip() for c in rows[0][1:]]
    body = rows[1:]
    if len(body) != len(labels):
        raise ProblemError(
            f"rho matrix must be square: {len(labels)} columns but {len(body)} rows"
        )
    cells = {}
    for row in body:
        row_label = row[0].strip()
        if row_label not in labels:
            raise ProblemError(f"row label {row_label!r} not among columns {labels}")
        for col_label, cell in zip(labels, row[1:]):
            cells[(row_label, col_label)] = cell.strip()
    m = RhoMatrix(tuple(labels))
    for i, j_lab in enumerate(labels):
        for k_lab in labels[i + 1 :]:
            up = cells.get((j_lab, k_lab), "")
            lo = cells.get((k_lab, j_lab), "")
            if up == "" and lo == "":
                continue
            if up == "" or lo == "":
                raise ProblemError(
                    f"pair ({j_lab}, {k_lab}) has only one triangle filled in"
                )
            m.set_pair(j_lab, k_lab, Restricted(float(lo), float(up)))
    return m


def rho_matrix_to_json_dict(m: RhoMatrix) -> dict:
    return {
        "settings": list(m.settings),
        "pairs": [
            {"j": j, "k": k, "rho_l": b.rho_l, "rho_u": b.rho_u}
            for j, k, b in m.restricted_pairs()
        ],
    }


def rho_matrix_from_json_dict(doc: dict) -> RhoMatrix:
    m = RhoMatrix(tuple(doc["settings"]))
    for pair in doc.get("pairs", []):
        m.set_pair(pair["j"], pair["k"], Restricted(float(pair["rho_l"]), float(pair["rho_u"])))
    return m


# ---------------------------------------------------------------------------
# problem loading

def _rho_from_spec(spec: Any, labels: list[str], base_dir: Path, epsilon: float) -> Optional[RhoMatrix]:
    if spec is None:
        return None
    if isinstance(spec, str):
        spec = {"matrix_csv": spec}
    if not isinstance(spec, dict):
        raise ProblemError(f"unrecognized rho specification: {spec!r}")
    if "matrix_csv" in spec:
        path = base_dir / spec["matrix_csv"]
        if not path.exists():
            raise ProblemError(f"rho matrix file not found: {path}")
        m = rho_matrix_from_csv(path.read_text())
    elif "pairs" in spec:
        m = rho_matrix_from_json_dict({"settings": spec.get("settings", labels), "pairs": spec["pairs"]})
    elif "decay" in spec:
        d = spec["decay"]
        positions = d.get("positions") or {lab: i for i, lab in enumerate(labels)}
        m = RhoMatrix.from_decay(positions, float(d["base"]), d.get("max_distance"))
    elif "adjacency" in spec:
        a = spec["adjacency"]
        pairs = [tuple(p) for p in a["pairs"]]
        m = RhoMatrix.from_adjacency(labels, pairs, float(a["value"]))
    elif "supershort" in spec:
        m = _rho_from_supershort_spec(spec["supershort"], base_dir, epsilon)
    else:
        raise ProblemError(f"unrecognized rho specification keys: {sorted(spec)}")
    if set(m.settings) != set(labels):
        raise ProblemError(
            f"rho matrix settings {sorted(m.settings)} do not match problem settings {sorted(labels)}"
        )
    return m


def _rho_from_supershort_spec(spec: dict, base_dir: Path, epsilon: float) -> RhoMatrix:
    from .estimator import Dataset, RegressionSpec, short_supershort
    import pandas as pd

    path = base_dir / spec["data"]
    if not path.exists():
        raise ProblemError(f"dataset not found: {path}")
    frame = pd.read_csv(path)
    data = Dataset(frame, weight_column=spec.get("weights"))
    reg = RegressionSpec(
        outcome=spec["outcome"],
        treatment=spec["treatment"],
        controls_core=tuple(spec.get("controls_core", ())),
        controls_bench=tuple(spec.get("controls_bench", ())),
        weight_column=spec.get("weights"),
    )
    by = spec["by"]
    b_ss = {}
    for label, group in frame.groupby(by, sort=True):
        sub = Dataset(group.reset_index(drop=True), weight_column=spec.get("weights"))
        result = short_supershort(sub, reg, setting=str(label))
        b_ss[str(label)] = result.b_ss
    return RhoMatrix.from_supershort(b_ss, epsilon=spec.get("epsilon", epsilon))


def load_problem(path: str | Path) -> Problem:
    path = Path(path)
    doc = json.loads(path.read_text())
    return problem_from_dict(doc, base_dir=path.parent)


def problem_from_dict(doc: dict, base_dir: Path = Path(".")) -> Problem:
    settings = doc.get("settings")
    if not settings:
        raise ProblemError("problem file must list at least one setting")
    estimates, nus, labels = [], [], []
    for entry in settings:
        label = str(entry["label"])
        if label in labels:
            raise ProblemError(f"duplicate setting label {label!r}")
        labels.append(label)
        estimates.append(SettingEstimate(label, float(entry["theta_s"]), entry.get("n")))
        nus.append(BiasBound(float(entry["nu_l"]), float(entry["nu_u"])))
    options = doc.get("options", {})
    epsilon = float(options.get("epsilon", 1e-6))
    rho = _rho_from_spec(doc.get("rho"), labels, base_dir, epsilon)
    return Problem(
        estimates=estimates,
        nus=nus,
        rho=rho,
        symmetric=bool(options.get("symmetric", False)),
        epsilon=epsilon,
    )


def problem_to_dict(problem: Problem) -> dict:
    doc = {
        "settings": [
            {"label": e.setting, "theta_s": e.theta_s, "nu_l": nu.nu_l, "nu_u": nu.nu_u}
            for e, nu in zip(problem.estimates, problem.nus)
        ],
        "options": {"symmetric": problem.symmetric, "epsilon": problem.epsilon},
    }
    doc["rho"] = rho_matrix_to_json_dict(problem.rho) if problem.rho is not None else None
    return doc


# ---------------------------------------------------------------------------
# report bundle

@dataclass
class ReportBundle:
    problem: Problem
    solved: SolvedPolytope
    violations: list[Violation]
    pin_results: list[tuple[str, Optional[float], PinResult]] = field(default_factory=list)

    @property
    def feasible(self) -> bool:
        return self.solved.feasible

    def univariate_rows(self) -> list[dict]:
        rows = []
        for e, nu in zip(self.problem.estimates, self.problem.nus):
            label = e.setting
            original = Interval(e.theta_s - nu.nu_u, e.theta_s - nu.nu_l)
            row = {
                "setting": label,
                "estimate": e.theta_s,
                "original_lower": original.lower,
                "original_upper": original.upper,
            }
            if self.solved.feasible:
                projected = self.solved.marginals[label]
                row["new_lower"] = projected.lower
                row["new_upper"] = projected.upper
            else:
                row["new_lower"] = None
                row["new_upper"] = None
            rows.append(row)
        return rows

    def to_dict(self) -> dict:
        doc = {
            "feasible": self.solved.feasible,
            "univariate_table": self.univariate_rows(),
            "audits": {
                "feasible": self.solved.feasible,
                "transitivity_violations": [
                    {
                        "triple": list(v.triple),
                        "direct": [v.direct.lower, v.direct.upper],
                        "implied": [v.implied.lower, v.implied.upper],
                    }
                    for v in self.violations
                ],
            },
            "plot_data": self._plot_data(),
        }
        if self.pin_results:
            doc["pin_tables"] = [
                {
                    "setting": setting,
                    "fraction": fraction,
                    "pinned_value": result.pinned_value,
                    "feasible": result.feasible,
                    "conditional": (
                        {
                            lab: [iv.lower, iv.upper]
                            for lab, iv in result.conditional.items()
                        }
                        if result.feasible
                        else None
                    ),
                }
                for setting, fraction, result in self.pin_results
            ]
        return doc

    def _plot_data(self) -> list[dict]:
        data = []
        for e, nu in zip(self.problem.estimates, self.problem.nus):
            label = e.setting
            entry = {
                "setting": label,
                "estimate": e.theta_s,
                "original": [e.theta_s - nu.nu_u, e.theta_s - nu.nu_l],
            }
            if self.solved.feasible:
                m = self.solved.marginals[label]
                entry["projected"] = [m.lower, m.upper]
            data.append(entry)
        return data

    def to_json(self) -> str:
        return canonical_json(self.to_dict())

    def to_text(self) -> str:
        if not self.solved.feasible:
            lines = [
                "INFEASIBLE: the bounds imposed on the settings are inconsistent",
                "with the data and must be relaxed.",
            ]
            if self.violations:
                lines.append(f"transitivity violations detected: {len(self.violations)}")
            return "\n".join(lines)
        headers = ["Setting", "Estimate", "New Lower", "New Upper", "Orig Lower", "Orig Upper"]
        rows = []
        for r in self.univariate_rows():
            rows.append(
                [
                    r["setting"],
                    _fmt(r["estimate"]),
                    _fmt(r["new_lower"]),
                    _fmt(r["new_upper"]),
                    _fmt(r["original_lower"]),
                    _fmt(r["original_upper"]),
                ]
            )
        lines = [_render_table(headers, rows)]
        if self.violations:
            lines.append(f"\nWARNING: {len(self.violations)} transitivity violation(s) in the rho matrix")
        for setting, fraction, result in self.pin_results:
            title = f"\nPinned {setting} at {_fmt(result.pinned_value)}"
            if fraction is not None:
                title += f" (fraction {fraction:g})"
            lines.append(title)
            if not result.feasible:
                lines.append("  infeasible pin: value lies outside the joint polytope")
                continue
            pin_rows = [
                [lab, _fmt(iv.lower), _fmt(iv.upper)]
                for lab, iv in result.conditional.items()
            ]
            lines.append(_render_table(["Setting", "Cond Lower", "Cond Upper"], pin_rows))
        return "\n".join(lines)

    def to_svg(self, width: int = 640, row_height: int = 28) -> str:
        return render_intervals_svg(self._plot_data(), width=width, row_height=row_height)


def _fmt(x: Optional[float]) -> str:
    if x is None:
        return "-"
    return f"%.{TABLE_DECIMALS}f" % x


def _render_table(headers: list[str], rows: list[list[str]]) -> str:
    widths = [len(h) for h in headers]
    for row in rows:
        widths = [max(w, len(c)) for w, c in zip(widths, row)]
    def line(cells):
        return "  ".join(c.ljust(w) for c, w in zip(cells, widths)).rstrip()
    sep = "  ".join("-" * w for w in widths)
    return "\n".join([line(headers), sep, *[line(r) for r in rows]])


def render_intervals_svg(plot_data: list[dict], width: int = 640, row_height: int = 28) -> str:
    """Layered interval bars, one row per setting: original (light), projected
    (dark), conditional (accent) when present."""
    if not plot_data:
        return "<svg xmlns='http://www.w3.org/2000/svg' width='0' height='0'/>"
    label_pad = 90
    lo = min(d["original"][0] for d in plot_data)
    hi = max(d["original"][1] for d in plot_data)
    span = (hi - lo) or 1.0
    lo -= 0.05 * span
    hi += 0.05 * span
    scale = (width - label_pad - 10) / (hi - lo)

    def x(v):
        return label_pad + (v - lo) * scale

    height = row_height * len(plot_data) + 10
    parts = [
        f"<svg xmlns='http://www.w3.org/2000/svg' width='{width}' height='{height}' font-family='sans-serif' font-size='12'>"
    ]
    for i, d in enumerate(plot_data):
        y = 5 + i * row_height
        mid = y + row_height / 2
        parts.append(f"<text x='4' y='{mid + 4:.1f}'>{d['setting']}</text>")
        o0, o1 = d["original"]
        parts.append(
            f"<rect x='{x(o0):.1f}' y='{y + 9:.1f}' width='{max((o1 - o0) * scale, 1):.1f}' height='10' fill='#c9d7ea'/>"
        )
        if "projected" in d:
            p0, p1 = d["projected"]
            parts.append(
                f"<rect x='{x(p0):.1f}' y='{y + 11:.1f}' width='{max((p1 - p0) * scale, 1):.1f}' height='6' fill='#2d5f9e'/>"
            )
        if "conditional" in d:
            c0, c1 = d["conditional"]
            parts.append(
                f"<rect x='{x(c0):.1f}' y='{y + 12:.1f}' width='{max((c1 - c0) * scale, 1):.1f}' height='4' fill='#d95f02'/>"
            )
        est = d.get("estimate")
        if est is not None:
            parts.append(
                f"<line x1='{x(est):.1f}' y1='{y + 6:.1f}' x2='{x(est):.1f}' y2='{y + 22:.1f}' stroke='#222' stroke-width='1.5'/>"
            )
    parts.append("</svg>")
    return "\n".join(parts)


def solve_problem(
    problem: Problem,
    pins: Optional[list[tuple[str, Optional[float], Optional[float]]]] = None,
) -> ReportBundle:
    """Build, close, audit, and optionally pin.

    ``pins`` entries are (setting, value, fraction); exactly one of value or
    fraction must be given per entry.
    """
    graph = problem.build_graph()
    solved = close(graph)
    violations = transitivity_audit(problem.rho) if problem.rho is not None else []
    bundle = ReportBundle(problem=problem, solved=solved, violations=violations)
    for setting, value, fraction in pins or []:
        if (value is None) == (fraction is None):
            raise ProblemError("each pin needs exactly one of value or fraction")
        if fraction is not None:
            result = pin_at_fraction(graph, setting, fraction)
        else:
            result = pin(graph, setting, value)
        bundle.pin_results.append((setting, fraction, result))
    return bundle
