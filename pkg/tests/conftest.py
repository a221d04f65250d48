"""Shared fixtures: reference parameter sets, random admissible systems, oracles."""

import math

import numpy as np
import pytest

from choreocert import kernels
from choreocert.loops import GeneratorSpectrum, SystemLoop, com_project, sample
from choreocert.symmetry import (
    ROLE_MAIN,
    ROLE_TRIPLE,
    SymmetryParams,
    allowed_frequencies,
)

# The three certified parameter families with their published test radii.
REFERENCE_CASES = [
    {"params": SymmetryParams(4, 7, 3, 3, -4), "a": 0.2300, "b": 0.0880},
    {"params": SymmetryParams(5, 8, 3, 3, -5), "a": 0.2450, "b": 0.0760},
    {"params": SymmetryParams(7, 10, 3, 3, -7), "a": 0.2500, "b": 0.0640},
]


@pytest.fixture(scope="session", autouse=True)
def _warm_kernels():
    """Compile the JIT kernels once so timed tests measure steady state."""
    kernels.warmup()


@pytest.fixture(params=range(3), ids=["N4", "N5", "N7"])
def reference_case(request):
    return REFERENCE_CASES[request.param]


def random_admissible_system(
    params: SymmetryParams,
    cutoff: int,
    seed: int,
    noise: float = 0.03,
    min_sep: float = 0.05,
) -> SystemLoop:
    """Random well-separated loop: circular base plus decaying spectral noise.

    Draws are resampled until the sampled minimum pair separation clears
    ``min_sep``, so every returned system is usable with the Newtonian
    potential. Deterministic in ``seed``.
    """
    rng = np.random.default_rng(seed)
    fm = allowed_frequencies(params, ROLE_MAIN, cutoff)
    ft = allowed_frequencies(params, ROLE_TRIPLE, cutoff)
    probe = 4 * params.grid_unit
    for _ in range(60):
        cm = np.array(
            [
                (0.20 if m == 3 else 0.0)
                + noise
                * (rng.standard_normal() + 1j * rng.standard_normal())
                / (1.0 + (abs(m) / 4.0) ** 2)
                for m in fm
            ]
        )
        ct = np.array(
            [
                (0.08 if m == -params.n_main else 0.0)
                + 0.4
                * noise
                * (rng.standard_normal() + 1j * rng.standard_normal())
                / (1.0 + (abs(m) / 4.0) ** 2)
                for m in ft
            ]
        )
        system = com_project(
            SystemLoop(
                params,
                GeneratorSpectrum(ROLE_MAIN, tuple(fm), cm),
                GeneratorSpectrum(ROLE_TRIPLE, tuple(ft), ct),
            )
        )
        traj = sample(system, probe)
        if kernels.min_separation_scan(traj.positions)[0] >= min_sep:
            return system
    raise RuntimeError("could not draw a well-separated random system")


def brute_force_frequencies(params: SymmetryParams, role: str, cutoff: int) -> list[int]:
    """Literal congruence scan used as the oracle for allowed_frequencies."""
    anchor = 3 if role == ROLE_MAIN else params.n_main
    return [
        m
        for m in range(-cutoff, cutoff + 1)
        if m % anchor == 0 and (m - params.d) % params.r == 0
    ]


def brute_potential(system: SystemLoop, m_samples: int) -> float:
    """Independent node-average potential: direct complex evaluation, no kernels."""
    p = system.params
    n, B = p.n_main, p.n_bodies
    t = np.arange(m_samples) / m_samples
    pos = np.empty((B, m_samples), dtype=complex)
    for body in range(1, B + 1):
        shift = (body - 1) / n if body <= n else (body - 1 - n) / 3
        spec = system.main if body <= n else system.triple
        z = np.zeros(m_samples, dtype=complex)
        for m, c in zip(spec.freqs, spec.coeffs):
            z += c * np.exp(2j * np.pi * m * (t + shift))
        pos[body - 1] = z
    total = 0.0
    for i in range(B):
        for j in range(i + 1, B):
            total += float(np.mean(1.0 / np.abs(pos[i] - pos[j])))
    return total


def circular_kinetic(params: SymmetryParams, a: float, b: float) -> float:
    """Closed-form kinetic action of the circular family: per-body speed 2*pi*|m|*R."""
    n = params.n_main
    return n * 0.5 * (2 * math.pi * 3 * a) ** 2 + 3 * 0.5 * (2 * math.pi * n * b) ** 2
