import numpy as np
import pytest

from choreocert.action import (
    ActionWorkspace,
    action_gradient,
    kinetic_action,
    lagrangian_identity_gap,
    potential_action,
    sobolev_margins,
    total_action,
    wirtinger_margins,
)
from choreocert.loops import GeneratorSpectrum, SystemLoop
from choreocert.symmetry import SymmetryParams
from choreocert.testorbits import build_test_orbit

from conftest import (
    REFERENCE_CASES,
    brute_potential,
    circular_kinetic,
    random_admissible_system,
)

PARAMS4 = SymmetryParams(4, 7, 3, 3, -4)

# Frozen circular-family actions at M = 16 lcm(3, N, r); the quadrature is
# spectrally converged there (grid doubling moves them by < 1e-8).
EXPECTED_ACTION = {4: 135.514969, 5: 175.531485, 7: 266.634481}


class TestKinetic:
    def test_matches_circular_speed_oracle(self, reference_case):
        p, a, b = reference_case["params"], reference_case["a"], reference_case["b"]
        system = build_test_orbit(p, a, b)
        assert abs(kinetic_action(system) - circular_kinetic(p, a, b)) <= 1e-10

    def test_zero_spectrum(self):
        system = SystemLoop(
            PARAMS4,
            GeneratorSpectrum("main", (3,), np.array([0.0 + 0.0j])),
            GeneratorSpectrum("triple", (-4,), np.array([0.0 + 0.0j])),
        )
        assert kinetic_action(system) == 0.0

    def test_degree_two_homogeneity(self):
        system = random_admissible_system(PARAMS4, 45, seed=1)
        doubled = SystemLoop(
            PARAMS4,
            GeneratorSpectrum("main", system.main.freqs, 2.0 * system.main.coeffs),
            GeneratorSpectrum("triple", system.triple.freqs, 2.0 * system.triple.coeffs),
        )
        assert abs(kinetic_action(doubled) - 4.0 * kinetic_action(system)) <= 1e-9


class TestPotential:
    def test_grid_refinement_agreement(self):
        system = build_test_orbit(PARAMS4, 0.23, 0.088)
        assert abs(potential_action(system, 1344) - potential_action(system, 2688)) <= 1e-8

    def test_matches_independent_evaluation(self, reference_case):
        p = reference_case["params"]
        system = build_test_orbit(p, reference_case["a"], reference_case["b"])
        m = 4 * p.grid_unit
        assert abs(potential_action(system, m) - brute_potential(system, m)) <= 1e-9

    def test_collision_guard(self):
        system = SystemLoop(
            PARAMS4,
            GeneratorSpectrum("main", (3,), np.array([0.0 + 0.0j])),  # all four at origin
            GeneratorSpectrum("triple", (-4,), np.array([0.088 + 0.0j])),
        )
        with pytest.raises(ValueError, match="near-collision sample"):
            potential_action(system, 84)


class TestTotalAction:
    def test_reference_orbit_values(self, reference_case):
        p = reference_case["params"]
        system = build_test_orbit(p, reference_case["a"], reference_case["b"])
        breakdown = total_action(system, p.default_grid())
        assert abs(breakdown.total - EXPECTED_ACTION[p.n_main]) <= 1e-5
        assert breakdown.total == pytest.approx(breakdown.kinetic + breakdown.potential)
        assert breakdown.kinetic == pytest.approx(
            circular_kinetic(p, reference_case["a"], reference_case["b"])
        )

    def test_pair_table_complete(self):
        system = build_test_orbit(PARAMS4, 0.23, 0.088)
        breakdown = total_action(system, 1344)
        assert len(breakdown.pairs) == 21
        assert breakdown.pairs[0][0] == (1, 2)
        assert all(value > 0 for _, value in breakdown.pairs)

    def test_lagrangian_identity_on_random_systems(self):
        for seed, case in zip((21, 22, 23), REFERENCE_CASES):
            p = case["params"]
            system = random_admissible_system(p, 40, seed=seed)
            breakdown = total_action(system, 8 * p.grid_unit)
            assert lagrangian_identity_gap(breakdown) <= 1e-6

    def test_identity_needs_zero_center_of_mass(self):
        # un-projected coupled coefficients break the pairwise identity
        system = SystemLoop(
            PARAMS4,
            GeneratorSpectrum("main", (3, 24), np.array([0.23 + 0j, 0.06 + 0j])),
            GeneratorSpectrum("triple", (-4,), np.array([0.088 + 0j])),
        )
        breakdown = total_action(system, 1344)
        assert lagrangian_identity_gap(breakdown) > 1e-3

    def test_json_dict_shape(self):
        system = build_test_orbit(PARAMS4, 0.23, 0.088)
        doc = total_action(system, 1344).to_dict()
        assert set(doc) == {"kinetic", "potential", "total", "pairs"}
        assert doc["pairs"][0][:2] == [1, 2]


class TestInvariance:
    def test_global_rotation(self):
        system = random_admissible_system(PARAMS4, 45, seed=2)
        phase = np.exp(1j * 0.7343)
        rotated = SystemLoop(
            PARAMS4,
            GeneratorSpectrum("main", system.main.freqs, phase * system.main.coeffs),
            GeneratorSpectrum("triple", system.triple.freqs, phase * system.triple.coeffs),
        )
        f0 = total_action(system, 672)
        f1 = total_action(rotated, 672)
        assert abs(f0.total - f1.total) <= 1e-10
        assert abs(f0.kinetic - f1.kinetic) <= 1e-10

    def test_time_shift(self):
        system = random_admissible_system(PARAMS4, 45, seed=4)
        tau = 0.3117
        shifted = SystemLoop(
            PARAMS4,
            GeneratorSpectrum(
                "main",
                system.main.freqs,
                system.main.coeffs
                * np.exp(2j * np.pi * np.array(system.main.freqs) * tau),
            ),
            GeneratorSpectrum(
                "triple",
                system.triple.freqs,
                system.triple.coeffs
                * np.exp(2j * np.pi * np.array(system.triple.freqs) * tau),
            ),
        )
        diff = total_action(system, 672).total - total_action(shifted, 672).total
        assert abs(diff) <= 1e-10


class TestGradient:
    def _finite_difference(self, ws, cm, ct, h=1e-6):
        x = np.concatenate([cm.view(float), ct.view(float)])
        k = 2 * len(cm)

        def value(vec):
            c = np.ascontiguousarray(vec[:k]).view(complex)
            t = np.ascontiguousarray(vec[k:]).view(complex)
            return ws.value(*ws.project(c, t))

        grad = np.empty_like(x)
        for idx in range(len(x)):
            plus, minus = x.copy(), x.copy()
            plus[idx] += h
            minus[idx] -= h
            grad[idx] = (value(plus) - value(minus)) / (2 * h)
        return grad

    def test_matches_finite_differences(self):
        for seed in (31, 32, 33):
            system = random_admissible_system(PARAMS4, 45, seed=seed)
            ws = ActionWorkspace.for_system(system, 4 * PARAMS4.grid_unit)
            cm, ct = ws.project(*ws.coefficients_of(system))
            _, gm, gt = ws.value_and_gradient(cm, ct)
            analytic = np.concatenate([gm.view(float), gt.view(float)])
            numeric = self._finite_difference(ws, cm, ct)
            err = np.abs(analytic - numeric)
            assert (err <= 1e-6 * np.maximum(1.0, np.abs(analytic))).all()

    def test_far_separated_system_is_kinetic_dominated(self):
        system = random_admissible_system(PARAMS4, 45, seed=6)
        scale = 1000.0
        big = SystemLoop(
            PARAMS4,
            GeneratorSpectrum("main", system.main.freqs, scale * system.main.coeffs),
            GeneratorSpectrum("triple", system.triple.freqs, scale * system.triple.coeffs),
        )
        ws = ActionWorkspace.for_system(big, 672)
        cm, ct = ws.coefficients_of(big)
        _, gm, gt = ws.value_and_gradient(cm, ct)
        kin_m, kin_t = ws.project(ws.kinetic_weights_main * cm, ws.kinetic_weights_triple * ct)
        scale_ref = max(np.abs(kin_m).max(), np.abs(kin_t).max())
        rel = max(np.abs(gm - kin_m).max(), np.abs(gt - kin_t).max()) / scale_ref
        assert rel <= 1e-6

    def test_gradient_is_com_projected(self):
        system = SystemLoop(
            PARAMS4,
            GeneratorSpectrum("main", (3, 24), np.array([0.23 + 0j, 0.01 + 0j])),
            GeneratorSpectrum("triple", (-4, 24), np.array([0.088 + 0j, 0.0 + 0j])),
        )
        grad = action_gradient(system, 1344)
        c = grad.main[list(grad.main_freqs).index(24)]
        b = grad.triple[list(grad.triple_freqs).index(24)]
        assert abs(4 * c + 3 * b) <= 1e-12 * max(1.0, abs(c))


class TestDiagnostics:
    def test_wirtinger_margin_nonnegative(self):
        for case in REFERENCE_CASES:
            system = random_admissible_system(case["params"], 40, seed=8)
            margins = wirtinger_margins(system)
            assert min(margins.values()) >= -1e-12

    def test_sobolev_margin_nonnegative(self):
        for case in REFERENCE_CASES:
            p = case["params"]
            system = random_admissible_system(p, 40, seed=9)
            margins = sobolev_margins(system, 8 * p.grid_unit)
            assert min(margins.values()) >= -1e-12
