"""Symmetry parameters, admissibility conditions, and the adapted frequency basis.

The configuration is N equal-mass bodies chasing each other on one closed
curve plus 3 more chasing each other on a second curve, all with period 1.
The symmetry group is a product of three cyclic actions:

  g1: advance time by 1/r and rotate the plane by 2*pi*d/r,
  g2: advance time by 1/3 and cyclically relabel the three-body chain,
  g3: advance time by 1/N and cyclically relabel the main chain.

A loop fixed under all three is determined by two generating bodies (body 1
and body N+1), and in the complex-plane representation q(t) = sum_m c_m
e^(2*pi*i*m*t) the fixed-point conditions become per-frequency congruences:
main-generator frequencies satisfy m = 0 (mod 3) and m = d (mod r); triple
frequencies satisfy m = 0 (mod N) and m = d (mod r).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

ROLE_MAIN = "main"
ROLE_TRIPLE = "triple"


@dataclass(frozen=True)
class SymmetryParams:
    """Integer tuple (N, r, d, k1, k2) describing one symmetric family.

    n_main  -- bodies on the first curve (N >= 4); total bodies = n_main + 3
    r       -- rotation order of g1 (>= 2)
    d       -- rotation multiplier, stored modulo r
    k1      -- prescribed winding number of main-curve pair differences
    k2      -- prescribed winding number of triple-curve pair differences

    All masses are 1 and the period is 1. Construction does not validate the
    admissibility conditions; see ``compatibility_check``.
    """

    n_main: int
    r: int
    d: int
    k1: int
    k2: int

    def __post_init__(self):
        for name in ("n_main", "r", "d", "k1", "k2"):
            value = getattr(self, name)
            if not isinstance(value, (int, np.integer)):
                raise TypeError(f"{name} must be an integer, got {value!r}")
            object.__setattr__(self, name, int(value))
        if self.r >= 1:
            object.__setattr__(self, "d", self.d % self.r)

    @property
    def n_bodies(self) -> int:
        return self.n_main + 3

    @property
    def grid_unit(self) -> int:
        """Smallest sample count on which every symmetry shift is integral."""
        return math.lcm(3, self.n_main, self.r)

    def default_grid(self) -> int:
        """Default sample count: resolves the finest collision lattice 3*N*r."""
        return 16 * self.grid_unit


@dataclass(frozen=True)
class CompatibilityResult:
    ok: bool
    violations: tuple[str, ...]

    def __bool__(self) -> bool:
        return self.ok


def compatibility_check(params: SymmetryParams) -> CompatibilityResult:
    """Check the admissibility conditions linking (N, r, d, k1, k2).

    Returns an ok result exactly when all conditions hold; otherwise lists
    every violated condition by name. Invalid input is a reported outcome,
    never an exception.
    """
    n, r, d, k1, k2 = params.n_main, params.r, params.d, params.k1, params.k2
    violations = []
    if n < 4:
        violations.append("N < 4")
    if r < 2:
        violations.append("r < 2")
    if math.gcd(n, 3) != 1:
        violations.append("gcd(N,3) != 1")
    if r >= 2 and math.gcd(r, 3) != 1:
        violations.append("gcd(r,3) != 1")
    if k1 % 3 != 0:
        violations.append("k1 not multiple of 3")
    if n >= 1 and k2 % n != 0:
        violations.append("k2 not multiple of N")
    if r >= 2:
        if (k1 - d) % r != 0:
            violations.append("k1 != d (mod r)")
        if (k2 - d) % r != 0:
            violations.append("k2 != d (mod r)")
    return CompatibilityResult(ok=not violations, violations=tuple(violations))


def rotation_apply(theta: float, v) -> np.ndarray:
    """Rotate the planar vector v counterclockwise by theta radians."""
    v = np.asarray(v, dtype=float)
    c, s = math.cos(theta), math.sin(theta)
    return np.array([c * v[0] - s * v[1], s * v[0] + c * v[1]])


def _anchor_modulus(params: SymmetryParams, role: str) -> int:
    if role == ROLE_MAIN:
        return 3
    if role == ROLE_TRIPLE:
        return params.n_main
    raise ValueError(f"unknown role {role!r} (expected 'main' or 'triple')")


def frequency_allowed(params: SymmetryParams, role: str, m: int) -> bool:
    """True when frequency m satisfies both congruences for the given role."""
    a = _anchor_modulus(params, role)
    return m % a == 0 and (m - params.d) % params.r == 0


def allowed_frequencies(params: SymmetryParams, role: str, cutoff: int) -> list[int]:
    """All frequencies m with |m| <= cutoff admissible for the role, ascending.

    The admissible set is the intersection of two arithmetic progressions;
    when gcd(anchor, r) does not divide d the intersection is empty and an
    "empty basis" error is raised, as it is when the cutoff is below the
    smallest admissible |m|.
    """
    if cutoff < 1:
        raise ValueError("cutoff must be a positive integer")
    a = _anchor_modulus(params, role)
    r = params.r
    step = math.lcm(a, r)
    anchor = next((m for m in range(step) if m % a == 0 and (m - params.d) % r == 0), None)
    if anchor is None:
        raise ValueError(
            f"empty basis: no frequency satisfies m=0 (mod {a}) and m={params.d} (mod {r})"
        )
    lo = -((cutoff + anchor) // step)
    hi = (cutoff - anchor) // step
    freqs = [anchor + k * step for k in range(lo, hi + 1)]
    freqs = [m for m in freqs if -cutoff <= m <= cutoff]
    if not freqs:
        raise ValueError(
            f"empty basis: smallest admissible |m| for role {role!r} exceeds cutoff {cutoff}"
        )
    return freqs


@dataclass(frozen=True)
class FrequencyClass:
    """The symmetry-allowed frequency set of one generator, up to a cutoff."""

    role: str
    params: SymmetryParams
    cutoff: int

    @property
    def anchor_modulus(self) -> int:
        return _anchor_modulus(self.params, self.role)

    def frequencies(self) -> list[int]:
        return allowed_frequencies(self.params, self.role, self.cutoff)

    def contains(self, m: int) -> bool:
        return abs(m) <= self.cutoff and frequency_allowed(self.params, self.role, m)
