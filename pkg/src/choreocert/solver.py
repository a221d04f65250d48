"""Action minimization over the symmetry-reduced coefficient space.

The descent runs on the packed real coefficient vector of the two generator
spectra after center-of-mass projection. Directions come from an L-BFGS
two-loop recursion seeded with the inverse kinetic Hessian (a diagonal, which
removes the (2 pi m)^2 scale disparity between frequencies); steps are
accepted by Armijo backtracking and, in addition, only if the minimum pair
separation stays above the guard and no pair winding number changes. Once the
evaluated action saturates float64 resolution near the minimum, acceptance
switches to strict gradient-norm contraction so the gradient tolerance stays
reachable. A run is a pure function of (start, options): repeated runs are
identical bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .action import DISTANCE_FLOOR, ActionWorkspace
from .bounds import collision_threshold
from .loops import (
    GeneratorSpectrum,
    MinSeparation,
    SystemLoop,
    com_drift,
    evaluate,
    max_symmetry_residual,
    min_separation,
    sample,
    winding_number,
)
from .symmetry import ROLE_MAIN, ROLE_TRIPLE, SymmetryParams, allowed_frequencies


@dataclass(frozen=True)
class MinimizeOptions:
    """Knobs of the descent; defaults are echoed into results for reproducibility."""

    cutoff: int                    # frequency cutoff K of the reduced basis
    m_samples: int | None = None   # quadrature grid; default 16*lcm(3, N, r)
    max_iterations: int = 500
    gtol: float = 1e-8             # stop when the projected gradient norm drops below
    eps_sep: float = 1e-3          # reject any step with min pair separation below
    shrink: float = 0.5            # line-search backtracking factor
    armijo: float = 1e-4           # sufficient-decrease constant
    memory: int = 12               # L-BFGS history length

    def __post_init__(self):
        if self.gtol <= 0:
            raise ValueError("gtol must be positive")
        if self.eps_sep < 1e-6:
            raise ValueError("eps_sep must be at least 1e-6")
        if not (0 < self.shrink < 1):
            raise ValueError("shrink must lie in (0, 1)")

    def to_dict(self) -> dict:
        return {
            "cutoff": self.cutoff,
            "m_samples": self.m_samples,
            "max_iterations": self.max_iterations,
            "gtol": self.gtol,
            "eps_sep": self.eps_sep,
            "shrink": self.shrink,
            "armijo": self.armijo,
            "memory": self.memory,
        }


@dataclass(frozen=True)
class LogRow:
    iteration: int
    action: float
    gradient_norm: float
    min_separation: float
    step: float


@dataclass(frozen=True)
class MinimizeResult:
    system: SystemLoop
    action: float
    gradient_norm: float
    iterations: int
    evaluations: int
    termination: str               # converged | max_iterations | no_admissible_step
    ode_residual: float
    windings: dict
    windings_preserved: bool
    min_separation: MinSeparation
    symmetry_residual: float
    com_drift: float
    threshold: float
    certificate: str | None
    options: MinimizeOptions
    log: tuple[LogRow, ...] = field(repr=False)

    def to_dict(self) -> dict:
        from .loops import system_to_dict

        ms = self.min_separation
        return {
            "loop": system_to_dict(self.system),
            "action": self.action,
            "gradient_norm": self.gradient_norm,
            "iterations": self.iterations,
            "evaluations": self.evaluations,
            "termination": self.termination,
            "ode_residual": self.ode_residual,
            "windings": self.windings,
            "windings_preserved": self.windings_preserved,
            "min_separation": {
                "pair": list(ms.pair),
                "time_index": ms.time_index,
                "distance": ms.distance,
            },
            "symmetry_residual": self.symmetry_residual,
            "com_drift": self.com_drift,
            "threshold": self.threshold,
            "certificate": self.certificate,
            "claim": "critical point with action below the collision-set lower bound"
            if self.certificate
            else "no certificate",
            "options": self.options.to_dict(),
        }

    def log_csv(self) -> str:
        lines = ["iter,action,gradnorm,minsep,step"]
        for row in self.log:
            lines.append(
                f"{row.iteration},{row.action:.17g},{row.gradient_norm:.17g},"
                f"{row.min_separation:.17g},{row.step:.17g}"
            )
        return "\n".join(lines) + "\n"


def _pack(cm: np.ndarray, ct: np.ndarray) -> np.ndarray:
    return np.concatenate([cm.view(float), ct.view(float)])


def _unpack(x: np.ndarray, n_main_coeffs: int) -> tuple[np.ndarray, np.ndarray]:
    k = 2 * n_main_coeffs
    return (
        np.ascontiguousarray(x[:k]).view(complex),
        np.ascontiguousarray(x[k:]).view(complex),
    )


def _pair_windings(params: SymmetryParams, positions: np.ndarray) -> dict:
    """Winding table of all main-main and triple-triple pairs from samples."""
    n = params.n_main
    origin = (0.0, 0.0)
    main, triple = [], []
    for i in range(n):
        for j in range(i + 1, n):
            main.append([i + 1, j + 1, winding_number(positions[i] - positions[j], origin)])
    for i in range(n, n + 3):
        for j in range(i + 1, n + 3):
            triple.append([i + 1, j + 1, winding_number(positions[i] - positions[j], origin)])
    return {"main": main, "triple": triple}


def minimize(start: SystemLoop, options: MinimizeOptions) -> MinimizeResult:
    """Descend the discretized action from a starting loop.

    Terminates when the projected gradient norm falls below gtol, on the
    iteration cap, or when no admissible step exists (sufficient decrease
    plus separation and winding guards). The recorded action sequence across
    accepted steps decreases strictly while decreases are resolvable in
    float64; near the minimum, where the evaluated action is constant to
    rounding, acceptance switches to strict gradient-norm contraction (with
    the action pinned to its rounding floor), which is what lets the gradient
    reach gtol at all.
    """
    params = start.params
    if options.cutoff < params.n_main:
        raise ValueError("cutoff must be at least N so the triple basis is nonempty")
    m_samples = options.m_samples or params.default_grid()
    ws = ActionWorkspace(
        params,
        allowed_frequencies(params, ROLE_MAIN, options.cutoff),
        allowed_frequencies(params, ROLE_TRIPLE, options.cutoff),
        m_samples,
    )
    nm = len(ws.main_freqs)
    cm, ct = ws.project(*ws.coefficients_of(start))

    pos = ws.positions(cm, ct)
    start_minsep = kernels.min_separation_scan(pos)[0]
    if start_minsep < options.eps_sep:
        raise ValueError(
            f"separation guard hit at start: min separation {start_minsep:.3e} "
            f"< eps_sep {options.eps_sep:.3e}"
        )
    ref_windings = _pair_windings(params, pos)

    f, gm, gt = ws.value_and_gradient(cm, ct)
    x = _pack(cm, ct)
    g = _pack(gm, gt)
    evaluations = 1
    prec = np.concatenate(
        [
            np.repeat(np.maximum(ws.kinetic_weights_main, 1.0), 2),
            np.repeat(np.maximum(ws.kinetic_weights_triple, 1.0), 2),
        ]
    )
    eps64 = float(np.finfo(float).eps)
    history: list[tuple[np.ndarray, np.ndarray, float]] = []
    log = [LogRow(0, f, float(np.linalg.norm(g)), start_minsep, 0.0)]
    termination = "max_iterations"
    iterations = 0

    def admissible_probe(base, direction, step):
        """Projected step as (x, cm, ct, positions, minsep), or None on guard."""
        xn = _pack(*ws.project(*_unpack(base + step * direction, nm)))
        cmn, ctn = _unpack(xn, nm)
        pos = ws.positions(cmn, ctn)
        minsep = kernels.min_separation_scan(pos)[0]
        if minsep < options.eps_sep:
            return None
        return xn, cmn, ctn, pos, minsep

    def windings_unchanged(pos):
        try:
            return _pair_windings(params, pos) == ref_windings
        except ValueError:
            return False

    def flat_probe(base, direction, step):
        """Probe with value and gradient, for the gradient-contraction regime."""
        nonlocal evaluations
        hit = admissible_probe(base, direction, step)
        if hit is None:
            return None
        xn, cmn, ctn, pos, minsep = hit
        fn, gmn, gtn = ws.value_and_gradient(cmn, ctn)
        evaluations += 1
        return xn, fn, _pack(gmn, gtn), pos, minsep

    def flat_search(direction, gnorm, f_floor):
        """Smallest-|g| admissible point along the ray, expanding from step 1."""
        step = 1.0
        hit = flat_probe(x, direction, step)
        if hit is not None and hit[1] <= f_floor and np.linalg.norm(hit[2]) <= 0.999 * gnorm:
            best, best_step = hit, step
            while step < 2.0**40:
                step *= 2.0
                nxt = flat_probe(x, direction, step)
                if not (
                    nxt is not None
                    and nxt[1] <= f_floor
                    and np.linalg.norm(nxt[2]) < np.linalg.norm(best[2])
                ):
                    break
                best, best_step = nxt, step
            return best_step, best
        while step > 1e-18:
            step *= options.shrink
            hit = flat_probe(x, direction, step)
            if hit is not None and hit[1] <= f_floor and np.linalg.norm(hit[2]) <= 0.999 * gnorm:
                return step, hit
        return None

    for it in range(1, options.max_iterations + 1):
        gnorm = float(np.linalg.norm(g))
        if gnorm <= options.gtol:
            termination = "converged"
            break

        # L-BFGS two-loop recursion with the inverse kinetic diagonal as seed
        q = g.copy()
        alphas = []
        for s, y, sy in reversed(history):
            a = float(s @ q) / sy
            alphas.append(a)
            q -= a * y
        q /= prec
        for (s, y, sy), a in zip(history, reversed(alphas)):
            q += (a - float(y @ q) / sy) * s
        direction = -q
        slope = float(g @ direction)
        if slope >= 0.0:
            history.clear()
            direction = -g / prec
            slope = float(g @ direction)

        # When the Armijo margin is below the resolution of f, value
        # comparisons are meaningless: switch to gradient contraction.
        flat = abs(options.armijo * slope) < 64.0 * eps64 * max(1.0, abs(f))

        accepted = None  # (xn, f, g, pos, minsep, step)
        if not flat:
            step = 1.0
            for _ in range(200):
                hit = admissible_probe(x, direction, step)
                if hit is not None:
                    xn, cmn, ctn, pos, minsep = hit
                    fn = ws.kinetic(cmn, ctn) + float(
                        kernels.pair_mean_inverse_distance(pos).sum()
                    )
                    evaluations += 1
                    if fn <= f + options.armijo * step * slope:
                        fn2, gmn, gtn = ws.value_and_gradient(cmn, ctn)
                        evaluations += 1
                        accepted = (xn, fn2, _pack(gmn, gtn), pos, minsep, step)
                        break
                step *= options.shrink
                if step < 1e-18:
                    break
        else:
            f_floor = f + 256.0 * eps64 * max(1.0, abs(f))
            found = flat_search(direction, gnorm, f_floor)
            if found is None and history:
                history.clear()
                found = flat_search(-g / prec, gnorm, f_floor)
            if found is not None:
                step, (xn, fn2, gn_vec, pos, minsep) = found
                accepted = (xn, fn2, gn_vec, pos, minsep, step)

        if accepted is not None and not windings_unchanged(accepted[3]):
            accepted = None
        if accepted is None:
            termination = "no_admissible_step"
            break

        xn, fn2, gn_vec, pos, minsep, step = accepted
        s_vec, y_vec = xn - x, gn_vec - g
        sy = float(s_vec @ y_vec)
        meaningful = float(np.linalg.norm(s_vec)) > 1e-13 * (1.0 + float(np.linalg.norm(x)))
        if meaningful and sy > 1e-12 * float(np.linalg.norm(s_vec)) * float(
            np.linalg.norm(y_vec)
        ):
            history.append((s_vec, y_vec, sy))
            if len(history) > options.memory:
                history.pop(0)
        x, f, g = xn, fn2, gn_vec
        iterations = it
        log.append(LogRow(it, f, float(np.linalg.norm(g)), minsep, step))

    cm, ct = _unpack(x, nm)
    final = SystemLoop(
        params,
        GeneratorSpectrum(ROLE_MAIN, tuple(int(m) for m in ws.main_freqs), cm),
        GeneratorSpectrum(ROLE_TRIPLE, tuple(int(m) for m in ws.triple_freqs), ct),
    )
    traj = sample(final, m_samples)
    windings = _pair_windings(params, traj.positions)
    minsep_info = min_separation(traj)
    threshold = collision_threshold(params).threshold
    certified = (
        termination == "converged"
        and f < threshold
        and minsep_info.distance >= options.eps_sep
    )
    return MinimizeResult(
        system=final,
        action=f,
        gradient_norm=float(np.linalg.norm(g)),
        iterations=iterations,
        evaluations=evaluations,
        termination=termination,
        ode_residual=ode_residual(final, m_samples),
        windings=windings,
        windings_preserved=windings == ref_windings,
        min_separation=minsep_info,
        symmetry_residual=max_symmetry_residual(traj),
        com_drift=com_drift(traj),
        threshold=threshold,
        certificate="collision-free certified by threshold" if certified else None,
        options=options,
        log=tuple(log),
    )


def acceleration_residual_rms(positions: np.ndarray, accelerations: np.ndarray) -> float:
    """RMS of |a_i(t) - sum_{j != i} (q_j - q_i)/|q_i - q_j|^3| over bodies and nodes.

    Raw-array form of the equations-of-motion residual for unit masses; the
    pair force sum reuses the potential-gradient kernel.
    """
    d = kernels.min_separation_scan(positions)[0]
    if d < DISTANCE_FLOOR:
        raise ValueError("near-collision sample: residual undefined at a collision")
    forces = kernels.pair_forces(positions)
    diff = np.asarray(accelerations, dtype=float) - forces
    return float(np.sqrt((diff[..., 0] ** 2 + diff[..., 1] ** 2).mean()))


def ode_residual(system: SystemLoop, m_samples: int) -> float:
    """Equations-of-motion residual of a loop, with exact spectral acceleration."""
    traj = sample(system, m_samples)
    acc = np.empty_like(traj.positions)
    for body in range(1, system.params.n_bodies + 1):
        acc[body - 1] = evaluate(system, body, traj.times, derivative=2)
    return acceleration_residual_rms(traj.positions, acc)


@dataclass(frozen=True)
class MembershipReport:
    """Diagnostics of membership in the constrained loop class."""

    windings: dict                 # winding or None per pair, with error notes
    winding_errors: tuple[str, ...]
    symmetry_residual: float       # max over the three group generators
    min_separation: MinSeparation
    com_drift: float

    def to_dict(self) -> dict:
        ms = self.min_separation
        return {
            "windings": self.windings,
            "winding_errors": list(self.winding_errors),
            "symmetry_residual": self.symmetry_residual,
            "min_separation": {
                "pair": list(ms.pair),
                "time_index": ms.time_index,
                "distance": ms.distance,
            },
            "com_drift": self.com_drift,
        }


def membership_check(system: SystemLoop, m_samples: int | None = None) -> MembershipReport:
    """Windings of every same-chain pair, symmetry residual, separation, drift."""
    if m_samples is None:
        m_samples = system.params.default_grid()
    traj = sample(system, m_samples)
    n = system.params.n_main
    origin = (0.0, 0.0)
    errors = []
    table: dict[str, list] = {"main": [], "triple": []}
    for key, lo, hi in (("main", 0, n), ("triple", n, n + 3)):
        for i in range(lo, hi):
            for j in range(i + 1, hi):
                try:
                    w = winding_number(traj.positions[i] - traj.positions[j], origin)
                except ValueError as exc:
                    w = None
                    errors.append(f"pair ({i + 1},{j + 1}): {exc}")
                table[key].append([i + 1, j + 1, w])
    return MembershipReport(
        windings=table,
        winding_errors=tuple(errors),
        symmetry_residual=max_symmetry_residual(traj),
        min_separation=min_separation(traj),
        com_drift=com_drift(traj),
    )
