"""Action lower bounds on the collision set via exact collision-time lattices.

If two bodies of a symmetric loop ever coincide, the symmetry relations force
them (and relabeled partners) to coincide on a whole lattice of times. Times
are handled exactly as integer ticks modulo L = 3*N*r, on which every
symmetry shift (1/r, 1/3, 1/N) is an integer, so the propagation closure and
the distinctness checks involve no floating point at all.

Each pair's contribution to the action is bounded below with the two-body
bounds: between consecutive forced collisions by the fixed-end bound, and for
never-colliding pairs by the zero-mean periodic bound applied on the pair's
natural relative period (1/3 for main-main, 1/N for triple-triple, 1 for
cross pairs). Summing over all pairs and dividing by the body count N+3
(valid because the center of mass vanishes) gives a lower bound for the full
action of any loop exhibiting the seed collision.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

from .symmetry import SymmetryParams

GORDON_COEFF = 1.5 * (2.0 * math.pi) ** (2.0 / 3.0)


def gordon_segment(strength: float, duration: float) -> float:
    """Least two-body action over a duration whose endpoints are collisions.

    Minimal value of integral (|x'|^2/2 + strength/|x|) dt over arcs with
    x = 0 at both ends: (3/2) (2 pi)^(2/3) strength^(2/3) duration^(1/3),
    the same closed form the circular Kepler orbit attains (minimize
    T*(w^2 R^2/2 + strength/R) over R with w = 2 pi/T).
    """
    if strength <= 0 or duration <= 0:
        raise ValueError("strength and duration must be positive")
    return GORDON_COEFF * strength ** (2.0 / 3.0) * duration ** (1.0 / 3.0)


def gordon_periodic(strength: float, period: float) -> float:
    """Least two-body action over one period among zero-mean periodic motions."""
    if strength <= 0 or period <= 0:
        raise ValueError("strength and period must be positive")
    return GORDON_COEFF * strength ** (2.0 / 3.0) * period ** (1.0 / 3.0)


@dataclass(frozen=True)
class TimeLattice:
    """Sorted set of collision ticks modulo L = 3*N*r (tick/L is the time)."""

    modulus: int
    ticks: tuple[int, ...]

    def __post_init__(self):
        ts = tuple(sorted(int(t) % self.modulus for t in self.ticks))
        if len(set(ts)) != len(ts):
            raise ValueError("duplicate ticks")
        object.__setattr__(self, "ticks", ts)

    @property
    def size(self) -> int:
        return len(self.ticks)

    def durations(self) -> list[float]:
        """Lengths of the consecutive inter-collision intervals (wrap included)."""
        ts = self.ticks
        gaps = [ts[i + 1] - ts[i] for i in range(len(ts) - 1)]
        gaps.append(self.modulus + ts[0] - ts[-1])
        return [g / self.modulus for g in gaps]

    @property
    def is_arithmetic(self) -> bool:
        ts = self.ticks
        if len(ts) < 2:
            return True
        gaps = {ts[i + 1] - ts[i] for i in range(len(ts) - 1)}
        gaps.add(self.modulus + ts[0] - ts[-1])
        return len(gaps) == 1


def _canonical(i: int, j: int) -> tuple[int, int]:
    return (i, j) if i < j else (j, i)


def collision_closure(
    params: SymmetryParams, seed: tuple[int, int]
) -> dict[tuple[int, int], TimeLattice]:
    """All (pair, time) collision facts forced by a seed collision at t = 0.

    Propagation rules on ticks mod L = 3*N*r:
      any pair:        t -> t + L/r            (rotate by 2 pi d/r)
      main-main:       t -> t + L/3            (main bodies are 1/3-periodic)
                       (i, j) -> (succ i, succ j), t -> t - L/N
      triple-triple:   t -> t + L/N            (triple bodies are 1/N-periodic)
                       (i, j) -> (succ i, succ j), t -> t - L/3
      cross:           succ on the main index with t -> t - L/N,
                       succ on the triple index with t -> t - L/3
    where succ is the cyclic successor on its chain. Returns every reachable
    pair with its full tick lattice.
    """
    n, r = params.n_main, params.r
    B = n + 3
    i0, j0 = seed
    if not (1 <= i0 <= B and 1 <= j0 <= B) or i0 == j0:
        raise ValueError(f"seed pair {seed} invalid for {B} bodies")
    L = 3 * n * r
    rot = L // r
    third = L // 3
    enth = L // n

    def succ_main(i):
        return i % n + 1

    def succ_triple(i):
        return n + 1 + (i - n) % 3

    start = (*_canonical(i0, j0), 0)
    seen = {start}
    queue = deque([start])
    while queue:
        i, j, t = queue.popleft()
        nexts = [(i, j, (t + rot) % L)]
        if j <= n:
            nexts.append((i, j, (t + third) % L))
            nexts.append((*_canonical(succ_main(i), succ_main(j)), (t - enth) % L))
        elif i > n:
            nexts.append((i, j, (t + enth) % L))
            nexts.append((*_canonical(succ_triple(i), succ_triple(j)), (t - third) % L))
        else:
            nexts.append((*_canonical(succ_main(i), j), (t - enth) % L))
            nexts.append((i, succ_triple(j), (t - third) % L))
        for state in nexts:
            if state not in seen:
                seen.add(state)
                queue.append(state)

    by_pair: dict[tuple[int, int], set[int]] = {}
    for i, j, t in seen:
        by_pair.setdefault((i, j), set()).add(t)
    return {
        pair: TimeLattice(L, tuple(sorted(ticks)))
        for pair, ticks in sorted(by_pair.items())
    }


@dataclass(frozen=True)
class CaseBound:
    """Action lower bound for one collision case (identified by its seed pair)."""

    label: str
    pair: tuple[int, int]
    lattice_sizes: tuple[int, ...]  # per colliding pair, sorted
    bound: float

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "pair": list(self.pair),
            "lattice_sizes": list(self.lattice_sizes),
            "bound": self.bound,
        }


def _relative_period(params: SymmetryParams, i: int, j: int) -> float:
    n = params.n_main
    if j <= n:
        return 1.0 / 3.0
    if i > n:
        return 1.0 / n
    return 1.0


def case_lower_bound(
    params: SymmetryParams, seed: tuple[int, int], label: str | None = None
) -> CaseBound:
    """Lower bound of the action over loops where the seed pair collides.

    Colliding pairs contribute the fixed-end bound summed over their
    inter-collision intervals; all other pairs contribute the periodic bound
    on their relative period, repeated 1/period times to cover [0, 1).
    """
    closure = collision_closure(params, seed)
    n = params.n_main
    B = n + 3
    strength = float(B)
    total = 0.0
    sizes = []
    for i in range(1, B + 1):
        for j in range(i + 1, B + 1):
            lattice = closure.get((i, j))
            if lattice is not None:
                sizes.append(lattice.size)
                total += sum(gordon_segment(strength, d) for d in lattice.durations())
            else:
                p = _relative_period(params, i, j)
                total += gordon_periodic(strength, p) / p
    return CaseBound(
        label=label if label is not None else f"seed {seed}",
        pair=_canonical(*seed),
        lattice_sizes=tuple(sorted(sizes)),
        bound=total / B,
    )


@dataclass(frozen=True)
class ThresholdReport:
    """Per-case bounds and their minimum: the collision-set action threshold."""

    params: SymmetryParams
    cases: tuple[CaseBound, ...]
    threshold: float
    parity: str

    def to_dict(self) -> dict:
        return {
            "cases": [c.to_dict() for c in self.cases],
            "threshold": self.threshold,
            "parity": self.parity,
        }


def representative_seeds(params: SymmetryParams) -> list[tuple[str, tuple[int, int]]]:
    """One seed per orbit of unordered pairs under the relabeling symmetry.

    Main pairs reduce to (1, 1+s) by chain shifts, s = 1..floor(N/2); cross
    pairs to (1, N+1); triple pairs to (N+1, N+2).
    """
    n = params.n_main
    seeds = [("1", (1, 2))]
    sub = "2" if n % 2 == 0 else "2'"
    for k in range(1, math.ceil(n / 2) - 1):
        seeds.append((f"{sub}(k={k})", (1, k + 2)))
    if n % 2 == 0:
        seeds.append(("3", (1, n // 2 + 1)))
    seeds.append(("4", (1, n + 1)))
    seeds.append(("5", (n + 1, n + 2)))
    return seeds


def collision_threshold(params: SymmetryParams) -> ThresholdReport:
    """Minimum of the case bounds over every collision case."""
    cases = tuple(
        case_lower_bound(params, seed, label) for label, seed in representative_seeds(params)
    )
    parity = (
        "N even: threshold over cases 1, 2, 3, 4, 5"
        if params.n_main % 2 == 0
        else "N odd: threshold over cases 1, 2', 4, 5"
    )
    return ThresholdReport(
        params=params,
        cases=cases,
        threshold=min(c.bound for c in cases),
        parity=parity,
    )


# -- exact distinctness checks for the collision-time grids ---------------------

@dataclass(frozen=True)
class LatticeCheck:
    name: str
    passed: bool
    witness: tuple | None  # ((indices a), (indices b), tick, denominator)


@dataclass(frozen=True)
class LatticeCheckReport:
    params: SymmetryParams
    checks: tuple[LatticeCheck, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def first_failure(self) -> LatticeCheck | None:
        return next((c for c in self.checks if not c.passed), None)


def _distinct(name: str, states, denominator: int) -> LatticeCheck:
    """All (indices -> tick mod denominator) values distinct, exact integers."""
    seen: dict[int, tuple] = {}
    for indices, tick in states:
        tick %= denominator
        if tick in seen:
            return LatticeCheck(name, False, (seen[tick], indices, tick, denominator))
        seen[tick] = indices
    return LatticeCheck(name, True, None)


def verify_time_lemmas(params: SymmetryParams) -> LatticeCheckReport:
    """Exhaustive distinctness scans behind the lattice cardinalities.

    Each check asserts that a family of rational collision times, reduced to
    integer ticks over the common denominator, contains no coincidences. They
    justify, respectively: the refinement of {i/r} by thirds to a 3r-lattice;
    distinctness across main-chain shifts of that lattice; the sixths
    refinement to a 6r-lattice; distinctness across shifts of the 6r-lattice;
    and the joint rotation/main-shift/thirds grid.

    The two sixths scans run only for even N: they describe the antipodal
    main-pair lattice, which exists only then. (For compatible parameters
    with even N, r is odd, which the sixths distinctness needs; with the
    generic d it can fail for even r, e.g. i/8 + j/6 has 4/8 = 3/6.)

    With 3 | r the first scan finds a coincidence, which is what a caller
    probing bad parameters sees.
    """
    n, r = params.n_main, params.r

    checks = []

    # i/r vs j/r + k/3 over 3r
    states = [((i, k), 3 * i + k * r) for k in range(3) for i in range(r)]
    checks.append(_distinct("rotation-vs-thirds", states, 3 * r))

    # i/(3r) + j/N over 3rN, j = 1..N-1
    states = [
        ((i, j), n * i + 3 * r * j) for j in range(1, n) for i in range(3 * r)
    ]
    checks.append(_distinct("thirds-lattice-vs-main-shifts", states, 3 * r * n))

    if n % 2 == 0:
        # i/r + j/6 over 6r
        states = [((i, j), 6 * i + r * j) for j in range(6) for i in range(r)]
        checks.append(_distinct("rotation-vs-sixths", states, 6 * r))

        # i/(6r) + j/N over 6rN, j = 1..N/2-1
        states = [
            ((i, j), n * i + 6 * r * j)
            for j in range(1, n // 2)
            for i in range(6 * r)
        ]
        checks.append(_distinct("sixths-lattice-vs-main-shifts", states, 6 * r * n))

    # i/r + j/N + k/3 over 3rN, j = 1..N-1
    states = [
        ((i, j, k), 3 * n * i + 3 * r * j + n * r * k)
        for k in range(3)
        for j in range(1, n)
        for i in range(r)
    ]
    checks.append(_distinct("rotation-main-thirds-joint", states, 3 * r * n))

    return LatticeCheckReport(params=params, checks=tuple(checks))
