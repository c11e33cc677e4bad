import numpy as np
import pytest

from boltzkit.errors import DomainError
from boltzkit.geometry import (
    involution_T,
    involution_jacobian_fd,
    japanese_bracket,
    kinematic_lower_bound_gap,
    post_collision,
    r_map,
    r_map_inverse,
    r_map_jacobian,
)

RNG_SEED = 20240811


def random_unit(rng, n):
    s = rng.normal(size=(n, 3))
    return s / np.linalg.norm(s, axis=-1, keepdims=True)


@pytest.fixture(scope="module")
def samples():
    rng = np.random.default_rng(RNG_SEED)
    n = 10_000
    v = rng.uniform(-5.0, 5.0, size=(n, 3))
    v1 = rng.uniform(-5.0, 5.0, size=(n, 3))
    sigma = random_unit(rng, n)
    return v, v1, sigma


class TestPostCollision:
    def test_head_on(self):
        out = post_collision([1, 0, 0], [-1, 0, 0], [0, 0, 1])
        assert np.allclose(out.v_star, [0, 0, -1], atol=1e-15)
        assert np.allclose(out.v1_star, [0, 0, 1], atol=1e-15)
        assert np.allclose(out.center, 0.0)
        assert np.linalg.norm(out.relative) == pytest.approx(2.0)

    def test_sigma_aligned_with_u_swaps(self, samples):
        v, v1, _ = samples
        u = v - v1
        sigma = u / np.linalg.norm(u, axis=-1, keepdims=True)
        out = post_collision(v, v1, sigma)
        # V - |u|/2 u^ = v1 identically
        assert np.max(np.abs(out.v_star - v1)) < 1e-12
        assert np.max(np.abs(out.v1_star - v)) < 1e-12

    def test_conservation_on_random_samples(self, samples):
        out = post_collision(*samples)
        mom, en, rel = out.conservation_residuals()
        assert np.max(mom) <= 1e-12
        assert np.max(en) <= 1e-12
        assert np.max(rel) <= 1e-12

    def test_equal_velocities_legal(self):
        v = np.array([0.3, -0.2, 1.0])
        out = post_collision(v, v, [0, 1, 0])
        assert np.allclose(out.v_star, v)
        assert np.allclose(out.v1_star, v)


class TestRMap:
    def test_simple_values(self):
        rp = r_map([2, 0, 0], [0, 1, 0], "+")
        rm = r_map([2, 0, 0], [0, 1, 0], "-")
        assert np.allclose(rp, [1, 1, 0])
        assert np.allclose(rm, [1, -1, 0])
        assert rp @ rm == pytest.approx(0.0, abs=1e-15)

    def test_sigma_parallel(self):
        assert np.allclose(r_map([2, 0, 0], [1, 0, 0], "+"), [2, 0, 0])
        assert np.allclose(r_map([2, 0, 0], [1, 0, 0], "-"), [0, 0, 0])

    def test_zero_input(self):
        assert np.allclose(r_map([0, 0, 0], [0, 0, 1], "+"), 0.0)

    def test_split_identities(self, samples):
        rng = np.random.default_rng(RNG_SEED + 1)
        y = rng.uniform(-5, 5, size=(10_000, 3))
        sigma = random_unit(rng, 10_000)
        rp = r_map(y, sigma, +1)
        rm = r_map(y, sigma, -1)
        y2 = np.sum(y * y, axis=-1)
        assert np.max(np.abs(rp + rm - y)) <= 1e-12
        assert np.max(np.abs(np.sum(rp * rm, axis=-1))) <= 1e-12 * np.maximum(y2, 1).max()
        pyth = np.sum(rp * rp, axis=-1) + np.sum(rm * rm, axis=-1) - y2
        assert np.max(np.abs(pyth)) <= 1e-12 * np.max(np.maximum(y2, 1.0))

    def test_sign_magnitude_angle_relations(self, samples):
        rng = np.random.default_rng(RNG_SEED + 2)
        y = rng.uniform(-5, 5, size=(10_000, 3))
        sigma = random_unit(rng, 10_000)
        yn = np.linalg.norm(y, axis=-1)
        yhat_dot = np.sum(y * sigma, axis=-1) / yn
        for eps in (+1, -1):
            r = r_map(y, sigma, eps)
            rn = np.linalg.norm(r, axis=-1)
            dot = np.sum(r * sigma, axis=-1)
            ok = rn > 1e-10  # avoid the measure-zero collapse y.sigma = -eps|y|
            # sign: |R.sigma| = eps (R.sigma)
            assert np.max(np.abs(np.abs(dot[ok]) - eps * dot[ok])) <= 1e-12 * yn[ok].max()
            # magnitude: |y| = |R| / |R^.sigma|
            mag = rn[ok] / np.abs(dot[ok] / rn[ok])
            assert np.max(np.abs(mag - yn[ok]) / yn[ok]) <= 1e-10
            # angle: y^.sigma = eps (2 |R^.sigma|^2 - 1)
            ang = eps * (2.0 * (dot[ok] / rn[ok]) ** 2 - 1.0)
            assert np.max(np.abs(ang - yhat_dot[ok])) <= 1e-10

    def test_direction_cosine_split(self):
        rng = np.random.default_rng(RNG_SEED + 3)
        y = rng.uniform(-5, 5, size=(10_000, 3))
        sigma = random_unit(rng, 10_000)
        rp = r_map(y, sigma, +1)
        rm = r_map(y, sigma, -1)
        cp = np.sum(rp * sigma, axis=-1) / np.linalg.norm(rp, axis=-1)
        cm = np.sum(rm * sigma, axis=-1) / np.linalg.norm(rm, axis=-1)
        assert np.max(np.abs(cp**2 + cm**2 - 1.0)) <= 1e-10

    def test_r_plus_connects_to_outgoing(self):
        rng = np.random.default_rng(RNG_SEED + 4)
        v = rng.uniform(-5, 5, size=(100, 3))
        v1 = rng.uniform(-5, 5, size=(100, 3))
        sigma = random_unit(rng, 100)
        out = post_collision(v, v1, sigma)
        u = v - v1
        # exact: post_collision is built on the same split
        assert np.array_equal(out.v_star, v - r_map(u, sigma, +1))
        assert np.array_equal(out.v1_star, v - r_map(u, sigma, -1))


class TestRMapInverse:
    def test_round_trip_example(self):
        assert np.allclose(r_map_inverse([1, 1, 0], [0, 1, 0], "+"), [2, 0, 0])

    def test_boundary_rejected(self):
        with pytest.raises(DomainError):
            r_map_inverse([1, 0, 0], [0, 1, 0], "+")
        with pytest.raises(DomainError):
            r_map_inverse([0, 0, 0], [0, 1, 0], "+")
        with pytest.raises(DomainError):
            r_map_inverse([0, 1, 0], [0, 1, 0], "-")

    def test_round_trips(self):
        rng = np.random.default_rng(RNG_SEED + 5)
        nu = rng.uniform(-5, 5, size=(10_000, 3))
        sigma = random_unit(rng, 10_000)
        dot = np.sum(nu * sigma, axis=-1)
        for eps in (+1, -1):
            keep = eps * dot > 1e-3
            y = r_map_inverse(nu[keep], sigma[keep], eps)
            back = r_map(y, sigma[keep], eps)
            scale = np.linalg.norm(nu[keep], axis=-1)
            assert np.max(np.linalg.norm(back - nu[keep], axis=-1) / scale) <= 1e-10


class TestRMapJacobian:
    def test_aligned_values(self):
        assert r_map_jacobian([2, 0, 0], [1, 0, 0]) == pytest.approx(4.0)
        s = np.array([1.0, 1.0, 0.0]) / np.sqrt(2)
        assert r_map_jacobian([3, 0, 0], s) == pytest.approx(8.0)

    def test_degenerate_rejected(self):
        with pytest.raises(DomainError):
            r_map_jacobian([1, 0, 0], [0, 0, 1])

    def test_matches_finite_differences(self):
        rng = np.random.default_rng(RNG_SEED + 6)
        count = 0
        h = 1e-6
        eye = np.eye(3)
        while count < 1000:
            nu = rng.uniform(-3, 3, size=3)
            sigma = rng.normal(size=3)
            sigma /= np.linalg.norm(sigma)
            cos = nu @ sigma / np.linalg.norm(nu)
            if abs(cos) < 0.1:
                continue
            eps = 1 if cos > 0 else -1
            jac_fd = np.empty((3, 3))
            for k in range(3):
                fp = r_map_inverse(nu + h * eye[k], sigma, eps)
                fm = r_map_inverse(nu - h * eye[k], sigma, eps)
                jac_fd[:, k] = (fp - fm) / (2 * h)
            det = abs(np.linalg.det(jac_fd))
            expected = r_map_jacobian(nu, sigma)
            assert abs(det - expected) / expected <= 1e-6
            count += 1


class TestInvolution:
    def test_head_on(self):
        vs, v1s, eta = involution_T([1, 0, 0], [-1, 0, 0], [0, 0, 1])
        assert np.allclose(vs, [0, 0, -1])
        assert np.allclose(v1s, [0, 0, 1])
        assert np.allclose(eta, [-1, 0, 0])
        # T^2 = identity
        v2, v12, s2 = involution_T(vs, v1s, eta)
        assert np.allclose(v2, [1, 0, 0], atol=1e-15)
        assert np.allclose(v12, [-1, 0, 0], atol=1e-15)
        assert np.allclose(s2, [0, 0, 1], atol=1e-15)

    def test_diagonal_rejected(self):
        with pytest.raises(DomainError):
            involution_T([1, 2, 3], [1, 2, 3], [0, 0, 1])

    def test_double_application(self, samples):
        v, v1, sigma = samples
        vs, v1s, eta = involution_T(v, v1, sigma)
        v2, v12, s2 = involution_T(vs, v1s, eta)
        err = max(
            np.max(np.abs(v2 - v)),
            np.max(np.abs(v12 - v1)),
            np.max(np.abs(s2 - sigma)),
        )
        assert err <= 1e-12

    def test_chart_jacobian_is_one(self):
        rng = np.random.default_rng(RNG_SEED + 7)
        for _ in range(25):
            v = rng.uniform(-3, 3, size=3)
            v1 = rng.uniform(-3, 3, size=3)
            if np.linalg.norm(v - v1) < 0.5:
                continue
            sigma = rng.normal(size=3)
            sigma /= np.linalg.norm(sigma)
            det = involution_jacobian_fd(v, v1, sigma)
            assert abs(abs(det) - 1.0) <= 1e-5


class TestLowerBounds:
    def test_head_on_slacks(self):
        # direct evaluation of the slack formulas: the outgoing directions
        # are parallel to sigma, so both direction factors vanish and the
        # slacks equal <v*> = <v1*> = sqrt(2)
        s1, s2 = kinematic_lower_bound_gap([1, 0, 0], [-1, 0, 0], [0, 0, 1])
        assert s1 == pytest.approx(np.sqrt(2.0), abs=1e-14)
        assert s2 == pytest.approx(np.sqrt(2.0), abs=1e-14)

    def test_equal_velocity_slack(self):
        rng = np.random.default_rng(RNG_SEED + 8)
        v = rng.uniform(-4, 4, size=(200, 3))
        sigma = random_unit(rng, 200)
        s1, s2 = kinematic_lower_bound_gap(v, v, sigma)
        lower = 0.5 * japanese_bracket(v)
        assert np.all(s1 >= lower - 1e-12)
        assert np.all(s2 >= lower - 1e-12)

    def test_large_random_ensemble_nonnegative(self):
        rng = np.random.default_rng(RNG_SEED + 9)
        n = 100_000
        v = rng.uniform(-20, 20, size=(n, 3))
        v1 = rng.uniform(-20, 20, size=(n, 3))
        sigma = random_unit(rng, n)
        s1, s2 = kinematic_lower_bound_gap(v, v1, sigma)
        assert np.min(s1) >= -1e-12
        assert np.min(s2) >= -1e-12
