"""The joint identified polytope as a difference-bound constraint system.

Every restriction the engine supports is either a box constraint on a single
setting's effect or a bound on the difference of two settings' effects.  Such
a system is a difference-bound matrix over the K settings plus a virtual zero
node; its all-pairs shortest-path closure is simultaneously the feasibility
test and the exact per-coordinate projection, so no LP solver is needed.

Edge convention: weight(a, b) is an upper bound on theta_a - theta_b, with the
zero node carrying box constraints (theta_i <= U as weight(i, 0) = U and
theta_i >= L as weight(0, i) = -L).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .bounds import (
    BiasBound,
    RhoMatrix,
    SettingEstimate,
    Unrestricted,
    bias_difference_bounds,
    difference_interval,
    individual_set,
)
from .intervals import Interval

FEASIBILITY_TOL = 1e-9


class InfeasiblePolytopeError(ValueError):
    """Raised when an operation requires a feasible polytope but the
    constraint system admits no point."""


@dataclass(frozen=True)
class ConstraintGraph:
    settings: tuple[str, ...]
    weights: np.ndarray  # (K+1, K+1); node K is the virtual zero node
    theta_s: tuple[float, ...]
    boxes: tuple[Interval, ...]  # individual sets, kept for sharpening reports
    n_constraints: int

    def __post_init__(self):
        self.weights.setflags(write=False)

    @property
    def k(self) -> int:
        return len(self.settings)

    def index(self, setting: str) -> int:
        try:
            return self.settings.index(setting)
        except ValueError:
            raise KeyError(f"unknown setting {setting!r}") from None

    def weight(self, a: int, b: int) -> float:
        return float(self.weights[a, b])

    def with_weights(self, weights: np.ndarray, extra_constraints: int = 0) -> "ConstraintGraph":
        return ConstraintGraph(
            settings=self.settings,
            weights=weights,
            theta_s=self.theta_s,
            boxes=self.boxes,
            n_constraints=self.n_constraints + extra_constraints,
        )


@dataclass(frozen=True)
class SharpeningRecord:
    original: Interval
    projected: Interval
    lower_raised: bool
    upper_lowered: bool
    lower_shift: float
    upper_shift: float


@dataclass(frozen=True)
class SolvedPolytope:
    graph: ConstraintGraph
    feasible: bool
    marginals: Optional[dict[str, Interval]]
    sharpening: Optional[dict[str, SharpeningRecord]]


@dataclass(frozen=True)
class PinResult:
    pinned_setting: str
    pinned_value: float
    feasible: bool
    conditional: Optional[dict[str, Interval]]


def build(
    estimates: Sequence[SettingEstimate],
    nus: Sequence[BiasBound],
    rhos: Optional[RhoMatrix] = None,
    symmetric: bool = False,
) -> ConstraintGraph:
    """Assemble box constraints from the individual sets and difference
    constraints from every restricted ordered pair of settings."""
    if len(estimates) != len(nus):
        raise ValueError("estimates and bias bounds must align one-to-one")
    labels = tuple(e.setting for e in estimates)
    if len(set(labels)) != len(labels):
        raise ValueError("setting labels must be unique")
    if rhos is not None and tuple(rhos.settings) != labels:
        if set(rhos.settings) != set(labels):
            raise ValueError(
                f"rho matrix settings {rhos.settings} do not match estimates {labels}"
            )
        # same labels, different order: re-anchor lookups by label below
    k = len(labels)
    zero = k
    w = np.full((k + 1, k + 1), np.inf)
    np.fill_diagonal(w, 0.0)
    boxes = []
    n_constraints = 0
    for i, (est, nu) in enumerate(zip(estimates, nus)):
        box = individual_set(est, nu)
        boxes.append(box)
        w[i, zero] = min(w[i, zero], box.upper)
        w[zero, i] = min(w[zero, i], -box.lower)
        n_constraints += 2
    if rhos is not None:
        by_label = {e.setting: (i, e, nus[i]) for i, e in enumerate(estimates)}
        for j_lab in labels:
            for k_lab in labels:
                if j_lab == k_lab:
                    continue
                rho = rhos.get(j_lab, k_lab)
                if isinstance(rho, Unrestricted):
                    continue
                ji, est_j, _ = by_label[j_lab]
                ki, est_k, nu_k = by_label[k_lab]
                c = bias_difference_bounds(nu_k, rho, symmetric=symmetric)
                diff = difference_interval(est_j, est_k, c)
                w[ji, ki] = min(w[ji, ki], diff.upper)
                w[ki, ji] = min(w[ki, ji], -diff.lower)
                n_constraints += 2
    return ConstraintGraph(
        settings=labels,
        weights=w,
        theta_s=tuple(e.theta_s for e in estimates),
        boxes=tuple(boxes),
        n_constraints=n_constraints,
    )


def _shortest_path_closure(w: np.ndarray) -> tuple[np.ndarray, bool]:
    """One Floyd-Warshall pass over the difference-bound matrix.

    Self-distances that dip negative by no more than the feasibility tolerance
    are rounding artifacts of a zero-weight cycle (a binding pin or an exactly
    tight pair of constraints); they are clamped to zero.  Returns the closed
    matrix and whether any clamping happened.  A diagonal entry below the
    tolerance means the system is infeasible and the matrix is returned as-is.
    """
    d = w.copy()
    for m in range(d.shape[0]):
        np.minimum(d, d[:, m : m + 1] + d[m : m + 1, :], out=d)
    diag = np.diag(d).copy()
    if diag.min() < -FEASIBILITY_TOL:
        return d, False
    clamped = bool(diag.min() < 0.0)
    if clamped:
        np.fill_diagonal(d, np.maximum(diag, 0.0))
    return d, clamped


def close(graph: ConstraintGraph) -> SolvedPolytope:
    """Close the constraint system and read off feasibility, marginals, and
    the per-setting sharpening record."""
    d, clamped = _shortest_path_closure(graph.weights)
    if np.any(np.diag(d) < -FEASIBILITY_TOL):
        return SolvedPolytope(
            graph=graph.with_weights(d), feasible=False, marginals=None, sharpening=None
        )
    if clamped:
        warnings.warn(
            "near-degenerate constraint system: tiny negative self-distances clamped to 0",
            stacklevel=2,
        )
    k = graph.k
    zero = k
    marginals = {}
    sharpening = {}
    for i, label in enumerate(graph.settings):
        lo, hi = -float(d[zero, i]) + 0.0, float(d[i, zero]) + 0.0
        if lo > hi:
            # rounding can cross the endpoints by at most the feasibility
            # tolerance; collapse to the midpoint
            lo = hi = 0.5 * (lo + hi)
        projected = Interval(lo, hi)
        marginals[label] = projected
        original = graph.boxes[i]
        tol = FEASIBILITY_TOL * (1.0 + abs(graph.theta_s[i]))
        lower_shift = projected.lower - original.lower
        upper_shift = original.upper - projected.upper
        sharpening[label] = SharpeningRecord(
            original=original,
            projected=projected,
            lower_raised=lower_shift > tol,
            upper_lowered=upper_shift > tol,
            lower_shift=lower_shift,
            upper_shift=upper_shift,
        )
    return SolvedPolytope(
        graph=graph.with_weights(d), feasible=True, marginals=marginals, sharpening=sharpening
    )


def project(graph: ConstraintGraph, setting: str) -> Interval:
    """Marginal interval for one setting; errors on an infeasible system."""
    solved = close(graph)
    if not solved.feasible:
        raise InfeasiblePolytopeError("cannot project an infeasible constraint system")
    return solved.marginals[setting]


def pin(graph: ConstraintGraph, setting: str, value: float) -> PinResult:
    """Fix one setting's effect at a value and re-close.

    A value outside the setting's marginal makes the system infeasible; that
    is reported in the result rather than raised, since interactive probing
    expects to brush against the boundary.
    """
    i = graph.index(setting)
    zero = graph.k
    w = np.array(graph.weights)
    w[i, zero] = min(w[i, zero], value)
    w[zero, i] = min(w[zero, i], -value)
    pinned = graph.with_weights(w, extra_constraints=2)
    solved = close(pinned)
    if not solved.feasible:
        return PinResult(pinned_setting=setting, pinned_value=value, feasible=False, conditional=None)
    return PinResult(
        pinned_setting=setting,
        pinned_value=value,
        feasible=True,
        conditional=dict(solved.marginals),
    )


def pin_at_fraction(graph: ConstraintGraph, setting: str, fraction: float) -> PinResult:
    """Pin at lower + fraction * width of the setting's marginal interval."""
    if not 0.0 <= fraction <= 1.0:
        raise ValueError(f"fraction must be in [0, 1], got {fraction}")
    marginal = project(graph, setting)
    return pin(graph, setting, marginal.at_fraction(fraction))


def sharpening_report(solved: SolvedPolytope) -> dict[str, SharpeningRecord]:
    if not solved.feasible:
        raise InfeasiblePolytopeError("no sharpening report for an infeasible system")
    return solved.sharpening
