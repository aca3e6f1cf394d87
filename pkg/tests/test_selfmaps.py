import cmath

import numpy as np
import pytest

from copop.errors import ConstantMapError, DomainError, NotASelfMapError
from copop.selfmaps import (blaschke, compose_moebius, dilation, eval_map, identity,
                            map_from_descriptor, moebius, polynomial, power_coefficients,
                            power_table, preimages, rational, rotate, rotation, sigma,
                            taylor_coefficients, validate_selfmap)


class TestEvaluation:
    def test_square(self):
        assert eval_map(polynomial([0, 0, 1]), 0.3j) == pytest.approx(-0.09)

    def test_automorphism(self):
        s = moebius(0.5)
        assert abs(eval_map(s, 0.5)) < 1e-16
        assert eval_map(s, 0.0, order=1) == pytest.approx(-0.75)

    def test_involution(self):
        z = np.array([0.1, -0.4 + 0.3j, 0.9j])
        assert np.allclose(sigma(0.5 + 0.2j, sigma(0.5 + 0.2j, z)), z)

    def test_derivative_matches_difference(self, maps):
        z = np.array([0.2 + 0.1j, -0.5j, 0.7])
        h = 1e-6
        for phi in maps.values():
            fd = (phi.evaluate(z + h) - phi.evaluate(z - h)) / (2 * h)
            assert np.allclose(phi.derivative(z), fd, atol=1e-8)

    def test_outside_disk_rejected(self):
        with pytest.raises(DomainError):
            eval_map(identity(), 1.0)


class TestValidation:
    def test_boundary_contact_allowed(self):
        rep = validate_selfmap(polynomial([0, 0.5, 0.5]))
        assert rep.passes
        assert rep.max_modulus == pytest.approx(1.0, abs=1e-15)
        assert rep.location == pytest.approx(1.0)

    def test_rejects_expansion(self):
        with pytest.raises(NotASelfMapError) as info:
            polynomial([0, 2])
        assert info.value.modulus == pytest.approx(2.0)
        assert not validate_selfmap(polynomial([0, 2], check=False)).passes

    def test_blaschke_structural(self):
        rep = validate_selfmap(blaschke([0.5, -0.3]))
        assert rep.passes and rep.structural

    def test_parameter_checks(self):
        with pytest.raises(NotASelfMapError):
            moebius(1.0)
        with pytest.raises(NotASelfMapError):
            blaschke([0.2, 1.1])
        with pytest.raises(NotASelfMapError):
            rational([0, 1], [0.5, 1])


class TestPreimages:
    def test_square(self):
        pts = sorted(preimages(polynomial([0, 0, 1]), 0.25), key=lambda t: t[0].real)
        assert [m for _, m in pts] == [1, 1]
        assert pts[0][0] == pytest.approx(-0.5) and pts[1][0] == pytest.approx(0.5)

    def test_square_at_origin(self):
        pts = preimages(polynomial([0, 0, 1]), 0.0)
        assert len(pts) == 1 and pts[0][1] == 2 and abs(pts[0][0]) < 1e-6
        assert preimages(polynomial([0, 0, 1]), 0.0, multiplicity=False)[0][1] == 1

    def test_automorphism(self):
        z = 0.3 - 0.4j
        pts = preimages(moebius(0.5), z)
        assert len(pts) == 1 and pts[0][0] == pytest.approx(sigma(0.5, z))

    def test_outside_image(self):
        assert preimages(dilation(0.5), 0.6) == []

    def test_blaschke_full_valence(self):
        b = blaschke([0.5, -0.3, 0.2j])
        rng = np.random.default_rng(0)
        for z in rng.uniform(0, 0.99, 20) * np.exp(2j * np.pi * rng.uniform(size=20)):
            assert sum(m for _, m in preimages(b, z)) == 3

    def test_constant_rejected(self):
        with pytest.raises(ConstantMapError):
            preimages(polynomial([0.3]), 0.3)

    def test_round_trip(self, maps):
        rng = np.random.default_rng(11)
        a = np.sqrt(rng.uniform(0, 0.98, 100)) * np.exp(2j * np.pi * rng.uniform(size=100))
        for phi in maps.values():
            for x in a:
                pts = [p for p, _ in preimages(phi, complex(phi.evaluate(x)))]
                assert min(abs(p - x) for p in pts) <= 1e-9


class TestFamilies:
    def test_rotate_within_family(self, maps):
        z = np.array([0.3 + 0.2j, -0.6j])
        for phi in maps.values():
            r = rotate(phi, post=0.7, pre=-1.1)
            expected = cmath.exp(0.7j) * phi.evaluate(cmath.exp(-1.1j) * z)
            assert np.allclose(r.evaluate(z), expected, atol=1e-14)

    def test_compose_moebius(self, maps):
        z = np.array([0.1, 0.4 - 0.5j, -0.8j])
        for phi in maps.values():
            b = phi.phi0 if phi.phi0 != 0 else 0.3
            psi = compose_moebius(b, phi)
            assert np.allclose(psi.evaluate(z), sigma(b, phi.evaluate(z)), atol=1e-13)
        psi = compose_moebius(moebius(0.5).phi0, moebius(0.5))
        assert psi.family == "moebius" and abs(psi.phi0) < 1e-15

    def test_descriptors_round_trip(self, maps):
        z = np.array([0.2, -0.3 + 0.6j])
        for phi in list(maps.values()) + [rotation(0.4), moebius(0.2 + 0.1j, 1.0)]:
            again = map_from_descriptor(phi.to_descriptor())
            assert np.allclose(again.evaluate(z), phi.evaluate(z), atol=1e-15)

    def test_unknown_family(self):
        with pytest.raises(DomainError):
            map_from_descriptor({"family": "spline"})


class TestPowerSeries:
    def test_square_power(self):
        c = power_coefficients(polynomial([0, 0, 1]), 3, 8).coeffs
        expected = np.zeros(9)
        expected[6] = 1
        assert np.array_equal(c, expected)

    def test_dilation_power(self):
        c = power_coefficients(dilation(0.7), 5, 9).coeffs
        assert c[5] == pytest.approx(0.7 ** 5) and np.count_nonzero(c) == 1

    def test_self_convolution(self):
        c = power_coefficients(polynomial([0, 0.5, 0.5]), 2, 4).coeffs
        assert np.allclose(c, [0, 0, 0.25, 0.5, 0.25])

    def test_first_power_is_taylor(self, maps):
        for phi in maps.values():
            assert np.allclose(power_coefficients(phi, 1, 30).coeffs, taylor_coefficients(phi, 30))

    def test_automorphism_taylor(self):
        # sigma_a(z) = a - (1 - |a|^2) sum conj(a)^(k-1) z^k
        a = 0.5 + 0.2j
        c = taylor_coefficients(moebius(a), 6)
        k = np.arange(1, 7)
        assert c[0] == pytest.approx(a)
        assert np.allclose(c[1:], -(1 - abs(a) ** 2) * np.conj(a) ** (k - 1))

    def test_parseval_on_circle(self, maps):
        r = 0.9
        t = 2 * np.pi * np.arange(4096) / 4096
        for phi in maps.values():
            coeffs, tails = power_table(phi, 4, 400)
            for n in (1, 4):
                direct = np.mean(np.abs(phi.evaluate(r * np.exp(1j * t))) ** (2 * n))
                series = np.sum(np.abs(coeffs[n - 1]) ** 2 * r ** (2 * np.arange(401)))
                assert series == pytest.approx(direct, rel=1e-6)

    def test_tail_bound(self):
        _, tails = power_table(moebius(0.5), 3, 10)
        assert np.all(tails >= 0) and tails[0] > 0
        _, tails = power_table(polynomial([0, 0, 1]), 3, 6)
        assert np.all(tails == 0)
