"""Lagrangian action of a system loop, pairwise decomposition, and gradient.

The action over one period is

    f = integral_0^1 ( 1/2 sum_i |dq_i/dt|^2 + sum_{i<j} 1/|q_i - q_j| ) dt.

The kinetic part is evaluated in closed form from the generator spectra
(every body is a time shift of its generator, so all bodies of a chain share
one speed profile). The potential part uses the trapezoid rule on a uniform
periodic grid, which for smooth non-collision loops converges spectrally and
reduces to the plain node average. The gradient is the exact gradient of the
discretized functional, projected onto the zero center-of-mass subspace.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .loops import SystemLoop, sample, valid_grid
from .symmetry import SymmetryParams

TWO_PI = 2.0 * np.pi
DISTANCE_FLOOR = 1e-12


@dataclass(frozen=True)
class ActionBreakdown:
    """Kinetic/potential split plus the per-pair two-body action terms.

    Each pair term is integral of (1/2 |v_i - v_j|^2 + (N+3)/|q_i - q_j|);
    their sum divided by N+3 must reproduce the total when the center of
    mass vanishes identically.
    """

    kinetic: float
    potential: float
    total: float
    pairs: tuple[tuple[tuple[int, int], float], ...]  # ((i, j) 1-based, value)

    @property
    def pairwise_total(self) -> float:
        n_bodies = max(j for (_, j), _ in self.pairs)
        return sum(v for _, v in self.pairs) / n_bodies

    def to_dict(self) -> dict:
        return {
            "kinetic": self.kinetic,
            "potential": self.potential,
            "total": self.total,
            "pairs": [[i, j, v] for (i, j), v in self.pairs],
        }


@dataclass(frozen=True)
class CoefficientGradient:
    """Gradient of the discretized action per generator coefficient.

    Entries are complex numbers whose real/imaginary parts are the partial
    derivatives with respect to the x/y parts of the coefficient.
    """

    main_freqs: tuple[int, ...]
    main: np.ndarray
    triple_freqs: tuple[int, ...]
    triple: np.ndarray

    def norm(self) -> float:
        return float(
            np.sqrt((np.abs(self.main) ** 2).sum() + (np.abs(self.triple) ** 2).sum())
        )


def kinetic_action(system: SystemLoop) -> float:
    """Exact kinetic action: N/2 sum (2 pi m)^2 |c_m|^2 + 3/2 sum (2 pi m)^2 |b_m|^2."""
    n = system.params.n_main
    fm = np.array(system.main.freqs, dtype=float)
    ft = np.array(system.triple.freqs, dtype=float)
    km = 0.5 * n * np.sum((TWO_PI * fm) ** 2 * np.abs(system.main.coeffs) ** 2)
    kt = 0.5 * 3 * np.sum((TWO_PI * ft) ** 2 * np.abs(system.triple.coeffs) ** 2)
    return float(km + kt)


def _check_separation(positions: np.ndarray) -> None:
    d, i, j, k = kernels.min_separation_scan(positions)
    if d < DISTANCE_FLOOR:
        raise ValueError(
            f"near-collision sample: bodies {i + 1} and {j + 1} at node {k} "
            f"are {d:.3e} apart"
        )


def potential_action(system: SystemLoop, m_samples: int) -> float:
    """Trapezoid quadrature of sum_{i<j} 1/|q_i - q_j| over one period."""
    traj = sample(system, m_samples)
    _check_separation(traj.positions)
    per_pair = kernels.pair_mean_inverse_distance(traj.positions)
    return float(per_pair.sum())


def total_action(system: SystemLoop, m_samples: int) -> ActionBreakdown:
    """Full action with the per-pair two-body decomposition."""
    traj = sample(system, m_samples)
    _check_separation(traj.positions)
    inv_d = kernels.pair_mean_inverse_distance(traj.positions)
    rel_v2 = kernels.pair_mean_square_relative_velocity(traj.velocities)
    kin = kinetic_action(system)
    pot = float(inv_d.sum())
    n_bodies = system.params.n_bodies
    pair_ids = kernels.pair_index_table(n_bodies)
    pairs = tuple(
        ((int(i) + 1, int(j) + 1), float(0.5 * v2 + n_bodies * invd))
        for (i, j), v2, invd in zip(pair_ids, rel_v2, inv_d)
    )
    return ActionBreakdown(kinetic=kin, potential=pot, total=kin + pot, pairs=pairs)


class ActionWorkspace:
    """Cached phase tables for repeated evaluation on a fixed frequency basis.

    Coefficients are passed as two complex arrays (cm, ct) aligned with
    main_freqs and triple_freqs. All evaluations share one discretization, so
    value_and_gradient returns the exact gradient of the value it reports.
    """

    def __init__(self, params: SymmetryParams, main_freqs, triple_freqs, m_samples: int):
        if not valid_grid(params, m_samples):
            raise ValueError(
                f"invalid grid: M={m_samples} must be a positive multiple of "
                f"lcm(3, N, r) = {params.grid_unit}"
            )
        self.params = params
        self.m_samples = m_samples
        self.main_freqs = np.array(sorted(int(m) for m in main_freqs), dtype=np.int64)
        self.triple_freqs = np.array(sorted(int(m) for m in triple_freqs), dtype=np.int64)
        n = params.n_main
        times = np.arange(m_samples) / m_samples
        shifts_main = np.arange(n) / n
        shifts_tri = np.arange(3) / 3
        u_main = shifts_main[:, None] + times[None, :]   # (N, M)
        u_tri = shifts_tri[:, None] + times[None, :]     # (3, M)
        self._em = np.exp(2j * np.pi * self.main_freqs[None, :, None] * u_main[:, None, :])
        self._et = np.exp(2j * np.pi * self.triple_freqs[None, :, None] * u_tri[:, None, :])
        self.kinetic_weights_main = n * (TWO_PI * self.main_freqs.astype(float)) ** 2
        self.kinetic_weights_triple = 3 * (TWO_PI * self.triple_freqs.astype(float)) ** 2
        coupling = 3 * n
        self._coupled = [
            (im, int(np.where(self.triple_freqs == m)[0][0]))
            for im, m in enumerate(self.main_freqs)
            if m % coupling == 0 and m in set(self.triple_freqs.tolist())
        ]

    @classmethod
    def for_system(cls, system: SystemLoop, m_samples: int) -> "ActionWorkspace":
        return cls(system.params, system.main.freqs, system.triple.freqs, m_samples)

    # -- coefficient-space helpers --

    def project(self, cm: np.ndarray, ct: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Least-squares enforcement of N*c_m + 3*b_m = 0 at coupled frequencies."""
        cm, ct = cm.copy(), ct.copy()
        n = self.params.n_main
        for im, it in self._coupled:
            lam = (n * cm[im] + 3.0 * ct[it]) / (n * n + 9.0)
            cm[im] -= n * lam
            ct[it] -= 3.0 * lam
        return cm, ct

    def complex_positions(self, cm: np.ndarray, ct: np.ndarray) -> np.ndarray:
        pm = np.einsum("f,bft->bt", cm, self._em)
        pt = np.einsum("f,bft->bt", ct, self._et)
        return np.concatenate([pm, pt], axis=0)

    def positions(self, cm: np.ndarray, ct: np.ndarray) -> np.ndarray:
        z = self.complex_positions(cm, ct)
        return np.ascontiguousarray(np.stack([z.real, z.imag], axis=-1))

    def velocities(self, cm: np.ndarray, ct: np.ndarray) -> np.ndarray:
        vm = cm * (2j * np.pi * self.main_freqs)
        vt = ct * (2j * np.pi * self.triple_freqs)
        z = np.concatenate(
            [np.einsum("f,bft->bt", vm, self._em), np.einsum("f,bft->bt", vt, self._et)],
            axis=0,
        )
        return np.ascontiguousarray(np.stack([z.real, z.imag], axis=-1))

    def accelerations(self, cm: np.ndarray, ct: np.ndarray) -> np.ndarray:
        am = cm * -((TWO_PI * self.main_freqs.astype(float)) ** 2)
        at = ct * -((TWO_PI * self.triple_freqs.astype(float)) ** 2)
        z = np.concatenate(
            [np.einsum("f,bft->bt", am, self._em), np.einsum("f,bft->bt", at, self._et)],
            axis=0,
        )
        return np.ascontiguousarray(np.stack([z.real, z.imag], axis=-1))

    def kinetic(self, cm: np.ndarray, ct: np.ndarray) -> float:
        return float(
            0.5 * np.sum(self.kinetic_weights_main * np.abs(cm) ** 2)
            + 0.5 * np.sum(self.kinetic_weights_triple * np.abs(ct) ** 2)
        )

    def min_separation(self, cm: np.ndarray, ct: np.ndarray) -> float:
        return kernels.min_separation_scan(self.positions(cm, ct))[0]

    def value(self, cm: np.ndarray, ct: np.ndarray) -> float:
        pos = self.positions(cm, ct)
        _check_separation(pos)
        return self.kinetic(cm, ct) + float(kernels.pair_mean_inverse_distance(pos).sum())

    def value_and_gradient(self, cm, ct) -> tuple[float, np.ndarray, np.ndarray]:
        """Discretized action and its exact coefficient gradient (projected)."""
        pos = self.positions(cm, ct)
        _check_separation(pos)
        pot = float(kernels.pair_mean_inverse_distance(pos).sum())
        forces = kernels.pair_forces(pos)
        fz = forces[..., 0] + 1j * forces[..., 1]  # dU/dq_i as complex numbers
        n = self.params.n_main
        gm = self.kinetic_weights_main * cm + np.einsum("bt,bft->f", fz[:n], np.conj(self._em)) / self.m_samples
        gt = self.kinetic_weights_triple * ct + np.einsum("bt,bft->f", fz[n:], np.conj(self._et)) / self.m_samples
        gm, gt = self.project(gm, gt)
        return self.kinetic(cm, ct) + pot, gm, gt

    def coefficients_of(self, system: SystemLoop) -> tuple[np.ndarray, np.ndarray]:
        """Embed a system's spectra into this workspace's frequency basis."""
        cm = np.zeros(len(self.main_freqs), dtype=complex)
        ct = np.zeros(len(self.triple_freqs), dtype=complex)
        for m, c in zip(system.main.freqs, system.main.coeffs):
            hits = np.where(self.main_freqs == m)[0]
            if not len(hits):
                raise ValueError(f"main frequency {m} outside workspace basis")
            cm[hits[0]] = c
        for m, c in zip(system.triple.freqs, system.triple.coeffs):
            hits = np.where(self.triple_freqs == m)[0]
            if not len(hits):
                raise ValueError(f"triple frequency {m} outside workspace basis")
            ct[hits[0]] = c
        return cm, ct


def action_gradient(system: SystemLoop, m_samples: int) -> CoefficientGradient:
    """One-shot exact gradient of the discretized action for a system loop."""
    ws = ActionWorkspace.for_system(system, m_samples)
    cm, ct = ws.coefficients_of(system)
    _, gm, gt = ws.value_and_gradient(cm, ct)
    return CoefficientGradient(
        main_freqs=tuple(int(m) for m in ws.main_freqs),
        main=gm,
        triple_freqs=tuple(int(m) for m in ws.triple_freqs),
        triple=gt,
    )


def wirtinger_margins(system: SystemLoop) -> dict[str, float]:
    """Per-chain margin of the zero-mean kinetic inequality.

    For a zero-mean 1-periodic loop, integral |dq/dt|^2 >= (2 pi)^2 integral
    |q|^2; in spectral form the margin is sum ((2 pi m)^2 - (2 pi)^2) |c_m|^2.
    Nonnegative whenever every allowed frequency has |m| >= 1.
    """
    out = {}
    for name, spec in (("main", system.main), ("triple", system.triple)):
        m = np.array(spec.freqs, dtype=float)
        a2 = np.abs(spec.coeffs) ** 2
        out[name] = float(np.sum(((TWO_PI * m) ** 2 - TWO_PI**2) * a2))
    return out


def sobolev_margins(system: SystemLoop, m_samples: int) -> dict[str, float]:
    """Per-chain margin of max|q| <= sqrt(1/12) (integral |dq/dt|^2)^(1/2)."""
    traj = sample(system, m_samples)
    n = system.params.n_main
    out = {}
    for name, body, spec in (("main", 0, system.main), ("triple", n, system.triple)):
        m = np.array(spec.freqs, dtype=float)
        energy = float(np.sum((TWO_PI * m) ** 2 * np.abs(spec.coeffs) ** 2))
        peak = float(np.sqrt((traj.positions[body] ** 2).sum(axis=1)).max())
        out[name] = float(np.sqrt(energy / 12.0) - peak)
    return out


def lagrangian_identity_gap(breakdown: ActionBreakdown) -> float:
    """|direct total - pairwise total|: zero when the center of mass vanishes."""
    return abs(breakdown.total - breakdown.pairwise_total)
