import math

import numpy as np
import pytest

from edamcc.benchmarks import (
    FUNCTION_IDS,
    ProblemInstanceSpec,
    TransformOrthogonalityError,
    TransformParseError,
    TransformShapeError,
    generate_rotation,
    instantiate,
    load_transforms,
    save_transforms,
    transform_path,
)


def oracle_eval(problem, x):
    """Independent single-point evaluator: plain loops and math only."""
    fid, n = problem.fid, problem.n
    o = problem.shift
    bias = problem.bias
    if fid == "F1":
        return sum(x[i] ** 2 for i in range(n)) + bias
    if fid == "F2":
        return sum((x[i] - o[i]) ** 2 for i in range(n)) + bias
    if fid == "F3":
        return max(abs(x[i]) for i in range(n)) + bias
    if fid == "F4":
        return max(abs(x[i] - o[i]) for i in range(n)) + bias
    if fid in ("F5", "F6"):
        z = list(x) if fid == "F5" else [x[i] - o[i] + 1.0 for i in range(n)]
        return sum((z[0] - z[i] ** 2) ** 2 + (z[i] - 1.0) ** 2 for i in range(n)) + bias
    if fid in ("F7", "F8"):
        z = list(x) if fid == "F7" else [x[i] - o[i] + 1.0 for i in range(n)]
        return sum(100.0 * (z[i + 1] - z[i] ** 2) ** 2 + (z[i] - 1.0) ** 2
                   for i in range(n - 1)) + bias
    if fid == "F9":
        rot = problem.rotation
        z = [sum((x[j] - o[j]) * rot[j][i] for j in range(n)) for i in range(n)]
        return sum((10.0 ** 6) ** (i / (n - 1)) * z[i] ** 2 for i in range(n)) + bias
    if fid == "F10":
        a, b = problem.linear_system
        return max(abs(sum(a[i][j] * x[j] for j in range(n)) - b[i]) for i in range(n)) + bias
    if fid in ("F11", "F12"):
        if fid == "F11":
            z = list(x)
        else:
            rot = problem.rotation
            z = [sum((x[j] - o[j]) * rot[j][i] for j in range(n)) for i in range(n)]
        return sum(z[i] ** 2 - 10.0 * math.cos(2.0 * math.pi * z[i]) + 10.0
                   for i in range(n)) + bias
    if fid == "F13":
        z = [x[i] - o[i] + 1.0 for i in range(n)]
        total = 0.0
        for i in range(n):
            a, b = z[i], z[(i + 1) % n]
            r = 100.0 * (a ** 2 - b) ** 2 + (a - 1.0) ** 2
            total += r ** 2 / 4000.0 - math.cos(r) + 1.0
        return total + bias
    raise AssertionError(fid)


class TestEvaluateExamples:
    def test_sphere_origin(self):
        p = instantiate(ProblemInstanceSpec("F1", 5, seed=0))
        assert p.evaluate(np.zeros(5)) == 0.0

    def test_rosenbrock_points(self):
        p = instantiate(ProblemInstanceSpec("F7", 2, seed=0))
        assert p.evaluate(np.ones(2)) == 0.0
        assert p.evaluate(np.zeros(2)) == 1.0

    def test_max_abs(self):
        p = instantiate(ProblemInstanceSpec("F3", 3, seed=0))
        assert p.evaluate(np.array([3.0, -7.0, 2.0])) == 7.0

    def test_rastrigin_origin(self):
        p = instantiate(ProblemInstanceSpec("F11", 4, seed=0))
        assert p.evaluate(np.zeros(4)) == 0.0

    def test_schwefel_ones(self):
        p = instantiate(ProblemInstanceSpec("F5", 6, seed=0))
        assert p.evaluate(np.ones(6)) == 0.0

    @pytest.mark.parametrize("fid", ["F2", "F4", "F6", "F8", "F9", "F10", "F12", "F13"])
    def test_shifted_functions_at_their_shift(self, fid):
        p = instantiate(ProblemInstanceSpec(fid, 8, seed=1))
        assert p.evaluate(p.shift) == pytest.approx(p.bias, abs=1e-9)

    def test_dimension_mismatch_rejected(self):
        p = instantiate(ProblemInstanceSpec("F1", 5, seed=0))
        with pytest.raises(ValueError):
            p.evaluate(np.zeros(4))

    def test_evaluation_is_pure(self):
        p = instantiate(ProblemInstanceSpec("F9", 6, seed=2))
        x = np.random.default_rng(0).uniform(-100, 100, 6)
        assert p.evaluate(x) == p.evaluate(x)


class TestOracleAgreement:
    @pytest.mark.parametrize("fid", FUNCTION_IDS)
    def test_matches_plain_python_oracle(self, fid):
        p = instantiate(ProblemInstanceSpec(fid, 7, seed=3))
        rng = np.random.default_rng(4)
        points = rng.uniform(p.lower, p.upper, size=(20, 7))
        batch = p.evaluate_many(points)
        for k in range(20):
            expected = oracle_eval(p, points[k])
            assert batch[k] == pytest.approx(expected, rel=1e-9, abs=1e-12)


class TestZeroAtOptimum:
    @pytest.mark.parametrize("fid", FUNCTION_IDS)
    @pytest.mark.parametrize("n", [2, 10, 50])
    def test_known_optimizer(self, fid, n):
        p = instantiate(ProblemInstanceSpec(fid, n, seed=5))
        assert abs(p.evaluate(p.optimum_point) - p.optimum_value) <= 1e-9


class TestShiftCovariance:
    @pytest.mark.parametrize("pair", [("F1", "F2"), ("F3", "F4"), ("F5", "F6"), ("F7", "F8")])
    def test_shifted_equals_translated_unshifted(self, pair):
        plain_id, shifted_id = pair
        n = 6
        plain = instantiate(ProblemInstanceSpec(plain_id, n, seed=6))
        shifted = instantiate(ProblemInstanceSpec(shifted_id, n, seed=6))
        rng = np.random.default_rng(7)
        # z = x - o (F2, F4) or z = x - o + 1 (F6, F8); undo it on the input
        offset = shifted.shift if shifted_id in ("F2", "F4") else shifted.shift - 1.0
        for _ in range(10):
            x = rng.uniform(-2.0, 2.0, size=n)
            expected = plain.evaluate(x) + shifted.bias
            assert shifted.evaluate(x + offset) == pytest.approx(expected, rel=1e-9, abs=1e-9)


class TestInstantiate:
    def test_f1_plain(self):
        p = instantiate(ProblemInstanceSpec("F1", 10, seed=0))
        assert p.shift is None and p.rotation is None
        assert p.optimum_value == 0.0

    def test_f10_construction(self):
        p = instantiate(ProblemInstanceSpec("F10", 9, seed=8))
        a, b = p.linear_system
        np.testing.assert_array_equal(b, a @ p.shift)
        assert p.evaluate(p.shift) == p.bias
        quarter = math.ceil(9 / 4)
        assert np.all(p.shift[:quarter] == -100.0)
        assert np.all(p.shift[-quarter:] == 100.0)
        assert np.all(a == np.round(a))
        assert np.all(np.abs(a) <= 500)

    def test_deterministic_transforms(self):
        a = instantiate(ProblemInstanceSpec("F9", 6, seed=9))
        b = instantiate(ProblemInstanceSpec("F9", 6, seed=9))
        np.testing.assert_array_equal(a.shift, b.shift)
        np.testing.assert_array_equal(a.rotation, b.rotation)

    def test_shift_restricted_to_interior(self):
        for seed in range(5):
            p = instantiate(ProblemInstanceSpec("F2", 20, seed=seed))
            assert np.all(p.shift >= -80.0) and np.all(p.shift <= 80.0)

    def test_dimension_below_two_rejected(self):
        with pytest.raises(ValueError):
            ProblemInstanceSpec("F13", 1, seed=0)

    def test_elliptic_with_identity_rotation_reduces(self):
        import dataclasses
        p = instantiate(ProblemInstanceSpec("F9", 5, seed=10))
        ident = dataclasses.replace(p, rotation=np.eye(5))
        x = np.random.default_rng(11).uniform(-10, 10, 5)
        z = x - p.shift
        weights = np.power(1e6, np.arange(5) / 4.0)
        expected = float((weights * z ** 2).sum()) + p.bias
        assert ident.evaluate(x) == pytest.approx(expected, rel=1e-12)

    def test_f13_wraps_around(self):
        import dataclasses
        p = instantiate(ProblemInstanceSpec("F13", 3, seed=12))
        zeroed = dataclasses.replace(p, shift=np.zeros(3))

        def griewank1(r):
            return r ** 2 / 4000.0 - math.cos(r) + 1.0

        x = np.array([0.0, 0.0, -0.5])  # z = (1, 1, 0.5)
        r_12 = 100.0 * (1.0 - 1.0) ** 2 + 0.0
        r_23 = 100.0 * (1.0 - 0.5) ** 2 + 0.0
        r_31 = 100.0 * (0.5 ** 2 - 1.0) ** 2 + (0.5 - 1.0) ** 2
        expected = griewank1(r_12) + griewank1(r_23) + griewank1(r_31)
        assert zeroed.evaluate(x) == pytest.approx(expected, rel=1e-12)


class TestGenerateRotation:
    def test_orthogonality(self):
        for n in (2, 5, 17):
            m = generate_rotation(n, np.random.default_rng(n))
            assert np.linalg.norm(m @ m.T - np.eye(n)) <= 1e-8

    def test_isometry(self):
        m = generate_rotation(6, np.random.default_rng(13))
        v = np.random.default_rng(14).normal(size=6)
        assert abs(np.linalg.norm(m @ v) - np.linalg.norm(v)) <= 1e-10

    def test_angles_uniform(self):
        # chi-square over 8 bins; critical value for 7 dof at p = 0.001
        rng = np.random.default_rng(15)
        angles = []
        for _ in range(10_000):
            m = generate_rotation(2, rng)
            angles.append(math.atan2(m[1, 0], m[0, 0]) % (2.0 * math.pi))
        counts, _ = np.histogram(angles, bins=8, range=(0.0, 2.0 * math.pi))
        expected = 10_000 / 8
        chi2 = float(((counts - expected) ** 2 / expected).sum())
        assert chi2 < 24.32


class TestTransformFiles:
    def test_round_trip(self, tmp_path):
        p = instantiate(ProblemInstanceSpec("F9", 5, seed=16))
        save_transforms(str(tmp_path), p)
        loaded = load_transforms(str(tmp_path), "F9", 5)
        np.testing.assert_array_equal(loaded["shift"], p.shift)
        np.testing.assert_array_equal(loaded["rotation"], p.rotation)
        reloaded = instantiate(ProblemInstanceSpec("F9", 5, transform_dir=str(tmp_path)))
        x = np.random.default_rng(17).uniform(-50, 50, 5)
        assert reloaded.evaluate(x) == p.evaluate(x)

    def test_f10_round_trip(self, tmp_path):
        p = instantiate(ProblemInstanceSpec("F10", 6, seed=18))
        save_transforms(str(tmp_path), p)
        reloaded = instantiate(ProblemInstanceSpec("F10", 6, transform_dir=str(tmp_path)))
        np.testing.assert_array_equal(reloaded.linear_system[0], p.linear_system[0])
        np.testing.assert_array_equal(reloaded.linear_system[1], p.linear_system[1])

    def test_size_mismatch(self, tmp_path):
        path = transform_path(str(tmp_path), "F2", 4, "shift")
        with open(path, "w") as handle:
            handle.write("1.0 2.0 3.0\n")
        with pytest.raises(TransformShapeError):
            load_transforms(str(tmp_path), "F2", 4)

    def test_parse_failure(self, tmp_path):
        path = transform_path(str(tmp_path), "F2", 2, "shift")
        with open(path, "w") as handle:
            handle.write("1.0 banana\n")
        with pytest.raises(TransformParseError):
            load_transforms(str(tmp_path), "F2", 2)

    def test_non_orthogonal_rejected(self, tmp_path):
        bad = np.eye(3)
        bad[0, 1] = 0.5
        path = transform_path(str(tmp_path), "F9", 3, "rot")
        with open(path, "w") as handle:
            for row in bad:
                handle.write(" ".join(str(v) for v in row) + "\n")
        with pytest.raises(TransformOrthogonalityError):
            load_transforms(str(tmp_path), "F9", 3)

    def test_missing_required_shift(self, tmp_path):
        with pytest.raises(Exception):
            instantiate(ProblemInstanceSpec("F2", 3, transform_dir=str(tmp_path)))
