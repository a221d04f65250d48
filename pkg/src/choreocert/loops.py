"""Loop representation: generator spectra, sampling, winding numbers, diagnostics.

A system loop stores only the two generating bodies as truncated planar
trigonometric spectra; the remaining bodies are time shifts of them:

  q_i(t)     = q_1(t + (i-1)/N)        for i = 2..N,
  q_{N+j}(t) = q_{N+1}(t + (j-1)/3)    for j = 2, 3.

The plane is identified with the complex numbers, so a generator is
q(t) = sum_m c_m e^(2*pi*i*m*t) with complex coefficients c_m restricted to
the symmetry-allowed frequencies of its role.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .symmetry import ROLE_MAIN, ROLE_TRIPLE, SymmetryParams, frequency_allowed

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class GeneratorSpectrum:
    """Finite frequency -> planar coefficient map for one generating body."""

    role: str
    freqs: tuple[int, ...]
    coeffs: np.ndarray  # complex128, aligned with freqs

    def __post_init__(self):
        if self.role not in (ROLE_MAIN, ROLE_TRIPLE):
            raise ValueError(f"unknown role {self.role!r}")
        freqs = tuple(int(m) for m in self.freqs)
        if len(set(freqs)) != len(freqs):
            raise ValueError("duplicate frequencies in spectrum")
        if any(freqs[i] >= freqs[i + 1] for i in range(len(freqs) - 1)):
            order = np.argsort(freqs)
            object.__setattr__(self, "freqs", tuple(freqs[i] for i in order))
            object.__setattr__(
                self, "coeffs", np.asarray(self.coeffs, dtype=complex)[order]
            )
        else:
            object.__setattr__(self, "freqs", freqs)
            object.__setattr__(
                self, "coeffs", np.array(self.coeffs, dtype=complex, copy=True)
            )
        if self.coeffs.shape != (len(self.freqs),):
            raise ValueError("coeffs must align with freqs")
        self.coeffs.setflags(write=False)

    @classmethod
    def from_pairs(cls, role: str, entries) -> "GeneratorSpectrum":
        """Build from [(m, cx, cy), ...] rows."""
        freqs = [int(e[0]) for e in entries]
        coeffs = [complex(float(e[1]), float(e[2])) for e in entries]
        return cls(role, tuple(freqs), np.array(coeffs, dtype=complex))

    def coefficient(self, m: int) -> complex:
        for f, c in zip(self.freqs, self.coeffs):
            if f == m:
                return complex(c)
        return 0.0 + 0.0j

    def to_rows(self) -> list[list]:
        return [[m, float(c.real), float(c.imag)] for m, c in zip(self.freqs, self.coeffs)]


@dataclass(frozen=True)
class SystemLoop:
    """Symmetric loop of all N+3 bodies, generated by two spectra."""

    params: SymmetryParams
    main: GeneratorSpectrum
    triple: GeneratorSpectrum

    def __post_init__(self):
        if self.main.role != ROLE_MAIN or self.triple.role != ROLE_TRIPLE:
            raise ValueError("spectra roles must be (main, triple)")
        for spec in (self.main, self.triple):
            for m in spec.freqs:
                if not frequency_allowed(self.params, spec.role, m):
                    raise ValueError(
                        f"frequency {m} not admissible for role {spec.role!r} "
                        f"with params {self.params}"
                    )

    def body_shift(self, body: int) -> float:
        """Time shift applied to the generator to obtain body ``body`` (1-based)."""
        n = self.params.n_main
        if 1 <= body <= n:
            return (body - 1) / n
        if n < body <= n + 3:
            return (body - 1 - n) / 3
        raise IndexError(f"body index {body} out of range 1..{n + 3}")

    def generator_for(self, body: int) -> GeneratorSpectrum:
        return self.main if body <= self.params.n_main else self.triple


def _spectral_sum(freqs, coeffs, u, derivative: int = 0) -> np.ndarray:
    """sum_m c_m (2*pi*i*m)^derivative e^(2*pi*i*m*u), elementwise over u.

    Accumulates frequency by frequency in ascending order so the result is
    identical bit for bit regardless of the shape of u.
    """
    u = np.asarray(u, dtype=float)
    out = np.zeros(u.shape, dtype=complex)
    for m, c in zip(freqs, coeffs):
        factor = c * (TWO_PI * 1j * m) ** derivative
        out += factor * np.exp((TWO_PI * m) * 1j * u)
    return out


def _complex_to_planar(z: np.ndarray) -> np.ndarray:
    return np.stack([z.real, z.imag], axis=-1)


def evaluate(system: SystemLoop, body: int, t, derivative: int = 0) -> np.ndarray:
    """Position (or time derivative) of one body at time(s) t, shape (..., 2)."""
    spec = system.generator_for(body)
    u = np.asarray(t, dtype=float) + system.body_shift(body)
    return _complex_to_planar(_spectral_sum(spec.freqs, spec.coeffs, u, derivative))


@dataclass(frozen=True)
class Trajectory:
    """Uniform samples of every body on [0, 1): positions and exact velocities."""

    params: SymmetryParams
    m_samples: int
    times: np.ndarray       # (M,)
    positions: np.ndarray   # (B, M, 2)
    velocities: np.ndarray  # (B, M, 2)

    @property
    def n_bodies(self) -> int:
        return self.positions.shape[0]


def valid_grid(params: SymmetryParams, m_samples: int) -> bool:
    return m_samples > 0 and m_samples % params.grid_unit == 0


def sample(system: SystemLoop, m_samples: int) -> Trajectory:
    """Sample all bodies at t_k = k/M. M must be a multiple of lcm(3, N, r)."""
    params = system.params
    if not valid_grid(params, m_samples):
        raise ValueError(
            f"invalid grid: M={m_samples} must be a positive multiple of "
            f"lcm(3, N, r) = {params.grid_unit}"
        )
    times = np.arange(m_samples) / m_samples
    B = params.n_bodies
    pos = np.empty((B, m_samples, 2))
    vel = np.empty((B, m_samples, 2))
    for body in range(1, B + 1):
        pos[body - 1] = evaluate(system, body, times)
        vel[body - 1] = evaluate(system, body, times, derivative=1)
    return Trajectory(params, m_samples, times, pos, vel)


def com_project(system: SystemLoop) -> SystemLoop:
    """Orthogonal projection of the coefficients onto zero total center of mass.

    The main chain contributes N*c_m and the triple chain 3*b_m to the
    center-of-mass Fourier coefficient at frequency m, and only frequencies
    divisible by 3N survive either chain's internal averaging. At each such m
    the constraint N*c_m + 3*b_m = 0 is enforced by the least-squares update;
    all other coefficients are unchanged. Idempotent.
    """
    n = system.params.n_main
    coupling = 3 * n
    main_c = dict(zip(system.main.freqs, system.main.coeffs))
    tri_c = dict(zip(system.triple.freqs, system.triple.coeffs))
    for m in sorted(set(main_c) | set(tri_c)):
        if m % coupling != 0:
            continue
        c = main_c.get(m, 0.0 + 0.0j)
        b = tri_c.get(m, 0.0 + 0.0j)
        lam = (n * c + 3.0 * b) / (n * n + 9.0)
        main_c[m] = c - n * lam
        tri_c[m] = b - 3.0 * lam
    main = GeneratorSpectrum(
        ROLE_MAIN, tuple(sorted(main_c)), np.array([main_c[m] for m in sorted(main_c)])
    )
    triple = GeneratorSpectrum(
        ROLE_TRIPLE, tuple(sorted(tri_c)), np.array([tri_c[m] for m in sorted(tri_c)])
    )
    return SystemLoop(system.params, main, triple)


def com_drift(traj: Trajectory) -> float:
    """max_t |sum_i q_i(t)|: distance from the zero center-of-mass constraint."""
    total = traj.positions.sum(axis=0)
    return float(np.sqrt(total[:, 0] ** 2 + total[:, 1] ** 2).max())


_GENERATORS = ("g1", "g2", "g3")


def group_action_residual(traj: Trajectory, generator: str) -> float:
    """max |(g.q)_i(t_k) - q_i(t_k)| over bodies and samples, for one generator.

    g1 rotates by 2*pi*d/r and shifts time by 1/r; g2 shifts by 1/3 and cycles
    the triple chain; g3 shifts by 1/N and cycles the main chain. Zero residual
    (<= 1e-10) means the sampled loop lies in the symmetric fixed-point space.
    """
    if generator not in _GENERATORS:
        raise ValueError(f"generator must be one of {_GENERATORS}")
    p = traj.params
    M = traj.m_samples
    if not valid_grid(p, M):
        raise ValueError(
            f"trajectory grid M={M} is not a multiple of lcm(3, N, r) = {p.grid_unit}"
        )
    pos = traj.positions
    n = p.n_main
    if generator == "g1":
        shifted = np.roll(pos, -M // p.r, axis=1)
        theta = -TWO_PI * p.d / p.r
        c, s = math.cos(theta), math.sin(theta)
        acted = np.empty_like(shifted)
        acted[..., 0] = c * shifted[..., 0] - s * shifted[..., 1]
        acted[..., 1] = s * shifted[..., 0] + c * shifted[..., 1]
    elif generator == "g2":
        shifted = np.roll(pos, -M // 3, axis=1)
        order = list(range(n)) + [n + 2, n, n + 1]
        acted = shifted[order]
    else:
        shifted = np.roll(pos, -M // n, axis=1)
        order = [n - 1] + list(range(n - 1)) + [n, n + 1, n + 2]
        acted = shifted[order]
    diff = acted - pos
    return float(np.sqrt(diff[..., 0] ** 2 + diff[..., 1] ** 2).max())


def max_symmetry_residual(traj: Trajectory) -> float:
    return max(group_action_residual(traj, g) for g in _GENERATORS)


def winding_number(points, base) -> int:
    """Signed turns of a closed sampled curve around a base point.

    Accumulates the angle of (x - base)/|x - base| step by step; each step must
    stay below pi in magnitude, which makes the rounded total exact. Positive
    means counterclockwise. The closing segment from the last sample back to
    the first is included.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 3:
        raise ValueError("need at least 3 planar points")
    rel = pts - np.asarray(base, dtype=float)
    if np.any((rel[:, 0] == 0.0) & (rel[:, 1] == 0.0)):
        raise ValueError("base point lies on the curve")
    nxt = np.roll(rel, -1, axis=0)
    cross = rel[:, 0] * nxt[:, 1] - rel[:, 1] * nxt[:, 0]
    dot = rel[:, 0] * nxt[:, 0] + rel[:, 1] * nxt[:, 1]
    steps = np.arctan2(cross, dot)
    if np.any(np.abs(steps) >= np.pi * (1.0 - 1e-12)):
        raise ValueError("undersampled: angular step >= pi between adjacent samples")
    total = steps.sum() / TWO_PI
    n = round(total)
    if abs(total - n) > 1e-6:
        raise ValueError(f"accumulated angle {total!r} turns is not an integer")
    return int(n)


@dataclass(frozen=True)
class MinSeparation:
    pair: tuple[int, int]  # 1-based body indices, i < j
    time_index: int
    distance: float


def min_separation(traj: Trajectory) -> MinSeparation:
    """Global minimum of |q_i - q_j| over pairs and samples; lexicographic ties."""
    d, i, j, k = kernels.min_separation_scan(traj.positions)
    return MinSeparation(pair=(i + 1, j + 1), time_index=k, distance=d)


def winding_table(traj: Trajectory) -> dict[str, list[list[int]]]:
    """deg(q_i - q_j) for all main-main and triple-triple pairs, 1-based rows."""
    n = traj.params.n_main
    pos = traj.positions
    main_rows, triple_rows = [], []
    for i in range(n):
        for j in range(i + 1, n):
            main_rows.append([i + 1, j + 1, winding_number(pos[i] - pos[j], (0.0, 0.0))])
    for i in range(n, n + 3):
        for j in range(i + 1, n + 3):
            triple_rows.append([i + 1, j + 1, winding_number(pos[i] - pos[j], (0.0, 0.0))])
    return {"main": main_rows, "triple": triple_rows}


# -- serialization --------------------------------------------------------------

def system_to_dict(system: SystemLoop) -> dict:
    p = system.params
    return {
        "params": {"n": p.n_main, "r": p.r, "d": p.d, "k1": p.k1, "k2": p.k2},
        "main": system.main.to_rows(),
        "triple": system.triple.to_rows(),
    }


def system_from_dict(doc: dict) -> SystemLoop:
    if "loop" in doc and "params" not in doc:
        doc = doc["loop"]
    p = doc["params"]
    params = SymmetryParams(
        n_main=int(p["n"]), r=int(p["r"]), d=int(p["d"]), k1=int(p["k1"]), k2=int(p["k2"])
    )
    return SystemLoop(
        params,
        GeneratorSpectrum.from_pairs(ROLE_MAIN, doc["main"]),
        GeneratorSpectrum.from_pairs(ROLE_TRIPLE, doc["triple"]),
    )


def system_to_json(system: SystemLoop) -> str:
    return json.dumps(system_to_dict(system), indent=2)


def system_from_json(text: str) -> SystemLoop:
    return system_from_dict(json.loads(text))


def trajectory_to_csv(traj: Trajectory) -> str:
    """CSV with header t,body,x,y,vx,vy; row-major by time then body; 17 digits."""
    lines = ["t,body,x,y,vx,vy"]
    for k in range(traj.m_samples):
        t = traj.times[k]
        for b in range(traj.n_bodies):
            x, y = traj.positions[b, k]
            vx, vy = traj.velocities[b, k]
            lines.append(f"{t:.17g},{b + 1},{x:.17g},{y:.17g},{vx:.17g},{vy:.17g}")
    return "\n".join(lines) + "\n"
