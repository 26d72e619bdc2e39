"""Interval algebra for per-setting bias bounds and cross-setting proportionality.

Each setting carries a short-regression estimate and an assumed interval for
its omitted variable bias.  Pairs of settings may additionally be tied together
by a proportionality interval on the ratio of their biases; the machinery here
turns those restrictions into bounds on bias *differences*, which is what the
polytope module consumes.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Optional

from .intervals import Interval

RECIPROCAL_TOL = 1e-12


@dataclass(frozen=True)
class SettingEstimate:
    """A setting label and its short-regression point estimate."""

    setting: str
    theta_s: float
    n: Optional[int] = None

    def __post_init__(self):
        if not math.isfinite(self.theta_s):
            raise ValueError(f"theta_s for setting {self.setting!r} must be finite")


@dataclass(frozen=True)
class BiasBound:
    """Assumed interval [nu_l, nu_u] containing a setting's omitted variable bias."""

    nu_l: float
    nu_u: float

    def __post_init__(self):
        if not (math.isfinite(self.nu_l) and math.isfinite(self.nu_u)):
            raise ValueError("bias bounds must be finite")
        if self.nu_l > self.nu_u:
            raise ValueError(f"bias bound requires nu_l <= nu_u, got [{self.nu_l}, {self.nu_u}]")

    @property
    def width(self) -> float:
        return self.nu_u - self.nu_l


class Unrestricted:
    """Marker for a pair of settings with no modeled bias relationship."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "Unrestricted"


UNRESTRICTED = Unrestricted()


@dataclass(frozen=True)
class Restricted:
    """Proportionality interval [rho_l, rho_u] for a pair of biases.

    The proportionality assumption wants the interval to bracket 1 (a ratio of
    exactly 1 is always admissible), and every generator here produces such
    intervals.  Hand-specified matrices may violate it, which is exactly what
    the transitivity audit exists to catch, so only positivity is enforced.
    """

    rho_l: float
    rho_u: float

    def __post_init__(self):
        if not (math.isfinite(self.rho_l) and math.isfinite(self.rho_u)):
            raise ValueError("rho bounds must be finite; use UNRESTRICTED for no constraint")
        if not 0.0 < self.rho_l <= self.rho_u:
            raise ValueError(
                f"rho bounds must satisfy 0 < rho_l <= rho_u, got [{self.rho_l}, {self.rho_u}]"
            )

    @property
    def brackets_one(self) -> bool:
        return self.rho_l <= 1.0 <= self.rho_u

    def reciprocal(self) -> "Restricted":
        return Restricted(1.0 / self.rho_u, 1.0 / self.rho_l)

    def symmetrized(self) -> "Restricted":
        """Force rho_l = 1/rho_u, keeping the wider of the two readings."""
        u = max(self.rho_u, 1.0 / self.rho_l)
        return Restricted(1.0 / u, u)


RhoBound = Restricted | Unrestricted


@dataclass(frozen=True)
class DifferenceBound:
    """Bounds [c_l, c_u] on the difference between two settings' biases."""

    c_l: float
    c_u: float

    def __post_init__(self):
        if self.c_l > self.c_u:
            raise ValueError(f"difference bound requires c_l <= c_u, got [{self.c_l}, {self.c_u}]")


@dataclass(frozen=True)
class Violation:
    """A transitivity failure: the direct rho interval for (j, m) cannot be
    written as a product of the (j, k) and (k, m) intervals."""

    triple: tuple[str, str, str]
    direct: Interval
    implied: Interval


def individual_set(est: SettingEstimate, nu: BiasBound) -> Interval:
    """Identified set for a single setting: [theta_s - nu_u, theta_s - nu_l]."""
    return Interval(est.theta_s - nu.nu_u, est.theta_s - nu.nu_l)


def bias_difference_bounds(
    nu_k: BiasBound, rho: RhoBound, symmetric: bool = False
) -> Optional[DifferenceBound]:
    """Extremes of (rho - 1) * B over the rho interval and B in nu_k.

    Returns None for an Unrestricted pair.  Under ``symmetric`` the lower rho
    bound is replaced by 1/rho_u.
    """
    if isinstance(rho, Unrestricted):
        return None
    rho_l = 1.0 / rho.rho_u if symmetric else rho.rho_l
    rho_u = rho.rho_u
    candidates = (
        (rho_l - 1.0) * nu_k.nu_l,
        (rho_u - 1.0) * nu_k.nu_l,
        (rho_l - 1.0) * nu_k.nu_u,
        (rho_u - 1.0) * nu_k.nu_u,
    )
    return DifferenceBound(min(candidates), max(candidates))


def difference_interval(
    est_j: SettingEstimate, est_k: SettingEstimate, c: DifferenceBound
) -> Interval:
    """Interval for theta_j - theta_k implied by a bias-difference bound."""
    delta = est_j.theta_s - est_k.theta_s
    return Interval(delta - c.c_u, delta - c.c_l)


def supershort_rho(b_ss_j: float, b_ss_k: float, epsilon: float = 1e-6) -> RhoBound:
    """Propose a rho interval from observed bias shifts in two settings.

    The ratio and its reciprocal bracket 1 by construction.  Sign mismatches
    and near-zero shifts (below ``epsilon`` relative to the larger magnitude)
    carry no usable information and map to UNRESTRICTED.
    """
    big = max(abs(b_ss_j), abs(b_ss_k))
    if big == 0.0 or min(abs(b_ss_j), abs(b_ss_k)) < epsilon * big:
        return UNRESTRICTED
    if (b_ss_j > 0) != (b_ss_k > 0):
        return UNRESTRICTED
    r = b_ss_j / b_ss_k
    return Restricted(min(r, 1.0 / r), max(r, 1.0 / r))


def rho_from_decay(base: float, distance: int) -> Restricted:
    """Rho interval [base^d, base^-d] that widens with distance between settings."""
    if not 0.0 < base < 1.0:
        raise ValueError(f"decay base must be in (0, 1), got {base}")
    if distance < 0:
        raise ValueError("distance must be nonnegative")
    if distance == 0:
        return Restricted(1.0, 1.0)
    return Restricted(base**distance, base ** (-distance))


def rho_from_adjacency(adjacent: bool, rho_value: float) -> RhoBound:
    """Symmetric interval [1/v, v] for adjacent pairs, no constraint otherwise."""
    if rho_value < 1.0:
        raise ValueError(f"adjacency rho value must be >= 1, got {rho_value}")
    if not adjacent:
        return UNRESTRICTED
    return Restricted(1.0 / rho_value, rho_value)


@dataclass
class RhoMatrix:
    """Pairwise rho bounds for an ordered list of settings.

    One interval is stored per unordered pair, anchored to the ordering given
    by the settings list; the reverse ordering is served as the exact
    reciprocal, so reciprocal coherence holds by construction.
    """

    settings: tuple[str, ...]
    _entries: dict[tuple[str, str], Restricted] = field(default_factory=dict)

    def __post_init__(self):
        self.settings = tuple(self.settings)
        if len(set(self.settings)) != len(self.settings):
            raise ValueError("setting labels must be unique")
        self._index = {s: i for i, s in enumerate(self.settings)}

    def _check(self, label: str):
        if label not in self._index:
            raise KeyError(f"unknown setting {label!r}")

    def _canonical(self, j: str, k: str) -> tuple[str, str]:
        return (j, k) if self._index[j] < self._index[k] else (k, j)

    def set_pair(self, j: str, k: str, bound: RhoBound):
        """Set the rho bound for rho^{jk}; the reverse pair becomes its reciprocal."""
        self._check(j)
        self._check(k)
        if j == k:
            raise ValueError("diagonal entries are fixed at [1, 1]")
        key = self._canonical(j, k)
        if isinstance(bound, Unrestricted):
            self._entries.pop(key, None)
            return
        self._entries[key] = bound if key == (j, k) else bound.reciprocal()

    def get(self, j: str, k: str) -> RhoBound:
        self._check(j)
        self._check(k)
        if j == k:
            return Restricted(1.0, 1.0)
        key = self._canonical(j, k)
        entry = self._entries.get(key)
        if entry is None:
            return UNRESTRICTED
        return entry if key == (j, k) else entry.reciprocal()

    def restricted_pairs(self) -> Iterator[tuple[str, str, Restricted]]:
        """Canonical-order restricted pairs."""
        for (j, k), bound in sorted(
            self._entries.items(), key=lambda it: (self._index[it[0][0]], self._index[it[0][1]])
        ):
            yield j, k, bound

    def symmetrized(self) -> "RhoMatrix":
        out = RhoMatrix(self.settings)
        for j, k, bound in self.restricted_pairs():
            out.set_pair(j, k, bound.symmetrized())
        return out

    @classmethod
    def from_supershort(
        cls, b_ss: Mapping[str, float], epsilon: float = 1e-6
    ) -> "RhoMatrix":
        m = cls(tuple(b_ss))
        labels = list(b_ss)
        for a, b in itertools.combinations(labels, 2):
            m.set_pair(a, b, supershort_rho(b_ss[a], b_ss[b], epsilon=epsilon))
        return m

    @classmethod
    def from_decay(
        cls,
        positions: Mapping[str, float],
        base: float,
        max_distance: Optional[int] = None,
    ) -> "RhoMatrix":
        """Distance between settings is the absolute gap in their positions,
        rounded to the nearest integer step."""
        m = cls(tuple(positions))
        labels = list(positions)
        for a, b in itertools.combinations(labels, 2):
            d = round(abs(positions[a] - positions[b]))
            if max_distance is not None and d > max_distance:
                continue
            m.set_pair(a, b, rho_from_decay(base, d))
        return m

    @classmethod
    def from_adjacency(
        cls,
        settings: list[str] | tuple[str, ...],
        adjacent_pairs: list[tuple[str, str]],
        rho_value: float,
    ) -> "RhoMatrix":
        m = cls(tuple(settings))
        for a, b in adjacent_pairs:
            m.set_pair(a, b, rho_from_adjacency(True, rho_value))
        return m


def transitivity_audit(m: RhoMatrix) -> list[Violation]:
    """Check every ordered triple of restricted pairs for chain consistency.

    The direct interval for rho^{jm} must intersect the product interval
    implied by rho^{jk} * rho^{km}; triples touching an Unrestricted pair are
    vacuously consistent.
    """
    violations = []
    for j, k, mm in itertools.permutations(m.settings, 3):
        r_jk = m.get(j, k)
        r_km = m.get(k, mm)
        r_jm = m.get(j, mm)
        if any(isinstance(r, Unrestricted) for r in (r_jk, r_km, r_jm)):
            continue
        implied = Interval(r_jk.rho_l * r_km.rho_l, r_jk.rho_u * r_km.rho_u)
        direct = Interval(r_jm.rho_l, r_jm.rho_u)
        if not direct.intersects(implied):
            violations.append(Violation(triple=(j, k, mm), direct=direct, implied=implied))
    return violations
