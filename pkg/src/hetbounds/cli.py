"""Command-line surface: estimation, rho proposals, solving, pinning, auditing,
and the local explorer service."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import pandas as pd

from .bounds import RhoMatrix, transitivity_audit
from .estimator import Dataset, EstimationError, RegressionSpec, short_supershort
from .problem import (
    canonical_json,
    load_problem,
    rho_matrix_to_csv,
    rho_matrix_to_json_dict,
    solve_problem,
)


@click.group()
def main():
    """Joint partial-identification bounds for effects that vary by setting."""


def _comma_list(value: str) -> tuple[str, ...]:
    return tuple(c.strip() for c in value.split(",") if c.strip()) if value else ()


# ---------------------------------------------------------------------------
# estimate

@main.command()
@click.option("--data", "data_path", required=True, type=click.Path(exists=True))
@click.option("--outcome", required=True)
@click.option("--treatment", required=True)
@click.option("--controls-core", default="", help="comma-separated column names")
@click.option("--controls-bench", required=True, help="comma-separated column names")
@click.option("--by", "by_column", required=True, help="setting column")
@click.option("--weights", "weight_column", default=None)
@click.option("--min-rows", default=10, show_default=True, help="skip settings with fewer rows")
@click.option("--format", "fmt", type=click.Choice(["text", "json"]), default="text")
def estimate(data_path, outcome, treatment, controls_core, controls_bench, by_column,
             weight_column, min_rows, fmt):
    """Short and supershort estimates with observed-bias changes per setting."""
    frame = pd.read_csv(data_path)
    if by_column not in frame.columns:
        raise click.ClickException(f"setting column {by_column!r} not found")
    spec = RegressionSpec(
        outcome=outcome,
        treatment=treatment,
        controls_core=_comma_list(controls_core),
        controls_bench=_comma_list(controls_bench),
        weight_column=weight_column,
    )
    rows, errors = [], []
    for label, group in frame.groupby(by_column, sort=True):
        label = str(label)
        if len(group) < min_rows:
            click.echo(f"warning: setting {label!r} has {len(group)} rows (< {min_rows}); skipped", err=True)
            continue
        try:
            data = Dataset(group.reset_index(drop=True), weight_column=weight_column)
            result = short_supershort(data, spec, setting=label)
        except EstimationError as exc:
            errors.append((label, str(exc)))
            click.echo(f"error in setting {label!r}: {exc}", err=True)
            continue
        rows.append(
            {"setting": label, "theta_s": result.theta_s, "theta_ss": result.theta_ss, "b_ss": result.b_ss}
        )
    if fmt == "json":
        click.echo(canonical_json({"settings": rows, "errors": [{"setting": s, "error": e} for s, e in errors]}))
    else:
        click.echo(f"{'Setting':<12}{'theta_s':>12}{'theta_ss':>12}{'b_ss':>12}")
        for r in rows:
            click.echo(f"{r['setting']:<12}{r['theta_s']:>12.6f}{r['theta_ss']:>12.6f}{r['b_ss']:>12.6f}")
    if not rows and errors:
        sys.exit(1)


# ---------------------------------------------------------------------------
# rho proposals

@main.group()
def rho():
    """Generate a rho bounds matrix (CSV plus JSON twin)."""


def _emit_matrix(m: RhoMatrix, out: str | None):
    csv_text = rho_matrix_to_csv(m)
    json_text = canonical_json(rho_matrix_to_json_dict(m))
    if out:
        out_path = Path(out)
        out_path.write_text(csv_text)
        out_path.with_suffix(".json").write_text(json_text + "\n")
        click.echo(f"wrote {out_path} and {out_path.with_suffix('.json')}")
    else:
        click.echo(csv_text, nl=False)


@rho.command("supershort")
@click.option("--data", "data_path", type=click.Path(exists=True))
@click.option("--outcome")
@click.option("--treatment")
@click.option("--controls-core", default="")
@click.option("--controls-bench", default="")
@click.option("--by", "by_column")
@click.option("--weights", "weight_column", default=None)
@click.option("--b-ss", "b_ss_args", multiple=True, help="label=value, bypassing estimation")
@click.option("--epsilon", default=1e-6, show_default=True)
@click.option("--out", default=None, type=click.Path())
def rho_supershort(data_path, outcome, treatment, controls_core, controls_bench,
                   by_column, weight_column, b_ss_args, epsilon, out):
    """Propose rho bounds from observed-bias changes (supershort comparison)."""
    if b_ss_args:
        b_ss = {}
        for arg in b_ss_args:
            label, _, value = arg.partition("=")
            if not value:
                raise click.ClickException(f"--b-ss expects label=value, got {arg!r}")
            b_ss[label] = float(value)
    else:
        if not (data_path and outcome and treatment and by_column and controls_bench):
            raise click.ClickException(
                "either provide --b-ss entries or --data/--outcome/--treatment/--controls-bench/--by"
            )
        frame = pd.read_csv(data_path)
        spec = RegressionSpec(
            outcome=outcome,
            treatment=treatment,
            controls_core=_comma_list(controls_core),
            controls_bench=_comma_list(controls_bench),
            weight_column=weight_column,
        )
        b_ss = {}
        for label, group in frame.groupby(by_column, sort=True):
            data = Dataset(group.reset_index(drop=True), weight_column=weight_column)
            b_ss[str(label)] = short_supershort(data, spec, setting=str(label)).b_ss
    _emit_matrix(RhoMatrix.from_supershort(b_ss, epsilon=epsilon), out)


@rho.command("decay")
@click.option("--base", required=True, type=float)
@click.option("--settings", "settings_arg", required=True, help="comma-separated labels")
@click.option("--positions", default=None, help="comma-separated label=position pairs")
@click.option("--max-distance", default=None, type=int)
@click.option("--out", default=None, type=click.Path())
def rho_decay(base, settings_arg, positions, max_distance, out):
    """Rho bounds that widen geometrically with distance between settings."""
    labels = _comma_list(settings_arg)
    if positions:
        pos = {}
        for chunk in _comma_list(positions):
            label, _, value = chunk.partition("=")
            pos[label] = float(value)
        missing = [lab for lab in labels if lab not in pos]
        if missing:
            raise click.ClickException(f"positions missing for: {missing}")
        pos = {lab: pos[lab] for lab in labels}
    else:
        pos = {lab: float(i) for i, lab in enumerate(labels)}
    _emit_matrix(RhoMatrix.from_decay(pos, base, max_distance), out)


@rho.command("adjacency")
@click.option("--value", required=True, type=float)
@click.option("--settings", "settings_arg", required=True, help="comma-separated labels")
@click.option("--pairs", required=True, help="comma-separated a:b adjacent pairs")
@click.option("--out", default=None, type=click.Path())
def rho_adjacency(value, settings_arg, pairs, out):
    """Symmetric rho bounds for adjacent pairs only."""
    labels = _comma_list(settings_arg)
    pair_list = []
    for chunk in _comma_list(pairs):
        a, _, b = chunk.partition(":")
        if not b:
            raise click.ClickException(f"--pairs expects a:b entries, got {chunk!r}")
        pair_list.append((a, b))
    _emit_matrix(RhoMatrix.from_adjacency(labels, pair_list, value), out)


# ---------------------------------------------------------------------------
# solve / pin / audit / serve

def _load(problem_path: str):
    try:
        return load_problem(problem_path)
    except (ValueError, KeyError, json.JSONDecodeError) as exc:
        raise click.ClickException(f"failed to load problem: {exc}")


@main.command()
@click.option("--problem", "problem_path", required=True, type=click.Path(exists=True))
@click.option("--symmetric", is_flag=True, default=False)
@click.option("--format", "fmt", type=click.Choice(["text", "json", "svg"]), default="text")
@click.option("--out", default=None, type=click.Path())
def solve(problem_path, symmetric, fmt, out):
    """Build and close the joint polytope; report univariate bounds."""
    problem = _load(problem_path)
    if symmetric:
        problem.symmetric = True
    bundle = solve_problem(problem)
    if fmt == "json":
        text = bundle.to_json()
    elif fmt == "svg":
        text = bundle.to_svg()
    else:
        text = bundle.to_text()
    if out:
        Path(out).write_text(text + "\n")
        click.echo(f"wrote {out}")
    else:
        click.echo(text)
    if not bundle.feasible and fmt == "text":
        sys.exit(2)


@main.command("pin")
@click.option("--problem", "problem_path", required=True, type=click.Path(exists=True))
@click.option("--setting", required=True)
@click.option("--value", "values", multiple=True, type=float)
@click.option("--fraction", "fractions", multiple=True, type=float)
@click.option("--format", "fmt", type=click.Choice(["text", "json"]), default="text")
def pin_cmd(problem_path, setting, values, fractions, fmt):
    """Pin a setting's effect and report conditional intervals for all settings."""
    if not values and not fractions:
        raise click.ClickException("provide at least one --value or --fraction")
    problem = _load(problem_path)
    pins = [(setting, v, None) for v in values] + [(setting, None, f) for f in fractions]
    bundle = solve_problem(problem, pins=pins)
    if not bundle.feasible:
        click.echo(bundle.to_text())
        sys.exit(2)
    if fmt == "json":
        click.echo(bundle.to_json())
    else:
        click.echo(bundle.to_text())


@main.command()
@click.option("--problem", "problem_path", required=True, type=click.Path(exists=True))
@click.option("--format", "fmt", type=click.Choice(["text", "json"]), default="text")
def audit(problem_path, fmt):
    """Transitivity and feasibility checks for a problem."""
    problem = _load(problem_path)
    violations = transitivity_audit(problem.rho) if problem.rho is not None else []
    from .polytope import close

    solved = close(problem.build_graph())
    if fmt == "json":
        click.echo(
            canonical_json(
                {
                    "feasible": solved.feasible,
                    "transitivity_violations": [
                        {
                            "triple": list(v.triple),
                            "direct": [v.direct.lower, v.direct.upper],
                            "implied": [v.implied.lower, v.implied.upper],
                        }
                        for v in violations
                    ],
                }
            )
        )
    else:
        click.echo(f"feasible: {solved.feasible}")
        if violations:
            click.echo(f"{len(violations)} transitivity violation(s):")
            for v in violations:
                click.echo(
                    f"  {v.triple}: direct [{v.direct.lower:.6g}, {v.direct.upper:.6g}]"
                    f" vs implied [{v.implied.lower:.6g}, {v.implied.upper:.6g}]"
                )
        else:
            click.echo("no transitivity violations")
    if not solved.feasible:
        sys.exit(2)


@main.command()
@click.option("--problem", "problem_path", required=True, type=click.Path(exists=True))
@click.option("--port", default=8321, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--static-dir", default=None, type=click.Path(exists=True),
              help="directory of explorer UI assets (defaults to bundled frontend/dist if present)")
def serve(problem_path, port, host, static_dir):
    """Serve the explorer UI and JSON API for a problem."""
    import uvicorn

    from .server import create_app

    problem = _load(problem_path)
    app = create_app(problem, static_dir=static_dir)
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
