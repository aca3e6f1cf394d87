import numpy as np
import pytest

from copop.counting import (check_submean, counting_function, counting_values, tau,
                            verify_change_of_variables)
from copop.errors import ConstantMapError, GeometryError
from copop.selfmaps import dilation, identity, moebius, polynomial, rotate, rotation, sigma
from copop.weights import eval_weight, standard_weight

W1 = standard_weight(1)


class TestPointwise:
    def test_identity(self):
        s = counting_function(identity(), W1, 0.6)
        assert s.value == pytest.approx(0.64, abs=1e-15) and s.preimage_count == 1

    def test_square(self):
        z = 0.49 * np.exp(0.3j)
        s = counting_function(polynomial([0, 0, 1]), W1, z)
        assert s.value == pytest.approx(1.02, abs=1e-13) and s.preimage_count == 2

    def test_automorphism(self):
        for z in (0.2, -0.5 + 0.3j, 0.9j):
            got = counting_function(moebius(0.5), W1, z).value
            assert got == pytest.approx(eval_weight(W1, abs(sigma(0.5, z))), rel=1e-13)

    def test_outside_image(self):
        s = counting_function(dilation(0.5), W1, 0.8)
        assert s.value == 0 and s.preimage_count == 0

    def test_phi0_flag(self):
        phi = polynomial([0.2, 0.5])
        assert counting_function(phi, W1, 0.2).at_phi0
        assert not counting_function(phi, W1, 0.3).at_phi0

    def test_tau(self):
        assert tau(identity(), W1, 0.4 + 0.1j) == pytest.approx(1.0, abs=1e-15)
        assert tau(moebius(0), standard_weight(2.5), 0.7j) == pytest.approx(1.0, abs=1e-14)
        assert tau(dilation(0.5), W1, 0.3) == pytest.approx(0.64 / 0.91, rel=1e-14)

    def test_vectorized_matches_scalar(self, maps):
        rng = np.random.default_rng(1)
        z = rng.uniform(0, 0.99, 30) * np.exp(2j * np.pi * rng.uniform(size=30))
        for phi in maps.values():
            vec = counting_values(phi, W1, z)
            one = [counting_function(phi, W1, x).value for x in z]
            assert np.allclose(vec, one, rtol=1e-12, atol=1e-300)
            assert np.all(vec >= 0)

    def test_multiplicity_flag(self):
        sq = polynomial([0, 0, 1])
        assert counting_values(sq, W1, np.array([0.0]), jitter_critical=False)[0] == pytest.approx(2.0)
        assert counting_values(sq, W1, np.array([0.0]), multiplicity=False,
                               jitter_critical=False)[0] == pytest.approx(1.0)

    def test_constant_rejected(self):
        with pytest.raises(ConstantMapError):
            counting_function(polynomial([0.1]), W1, 0.1)

    def test_radiality(self, maps):
        z = np.array([0.3 + 0.4j, -0.7j, 0.55])
        th = 1.3
        for phi in maps.values():
            pre = rotate(phi, pre=th)
            post = rotate(phi, post=th)
            assert np.allclose(counting_values(pre, W1, z), counting_values(phi, W1, z), atol=1e-12)
            assert np.allclose(counting_values(post, W1, z),
                               counting_values(phi, W1, np.exp(-1j * th) * z), atol=1e-12)


class TestChangeOfVariables:
    def test_dilation_closed_form(self):
        for lam in (0.3, 0.5, 0.8):
            c = verify_change_of_variables(dilation(lam), W1, lambda z: np.ones(z.shape))
            assert c.lhs == pytest.approx(lam * lam / 2, rel=1e-12)
            assert c.rhs == pytest.approx(lam * lam / 2, rel=1e-6)

    def test_identity_exact(self):
        c = verify_change_of_variables(identity(), W1, lambda z: np.abs(z) ** 2)
        assert c.reldiff == 0.0

    def test_square(self):
        c = verify_change_of_variables(polynomial([0, 0, 1]), W1, lambda z: np.ones(z.shape))
        # lhs = 4 int |z|^2 w dA = 4 * (1/2 - 1/3)
        assert c.lhs == pytest.approx(2 / 3, rel=1e-12)
        assert c.reldiff <= 1e-4

    def test_rotation(self):
        c = verify_change_of_variables(rotation(2.0), W1, lambda z: np.real(z) + 1)
        assert c.reldiff <= 1e-12


class TestSubmean:
    def test_identity(self):
        assert check_submean(identity(), W1, 0.7, 0.1).holds

    def test_square(self):
        chk = check_submean(polynomial([0, 0, 1]), W1, 0.7, 0.05)
        assert chk.holds and chk.lhs > 0

    def test_geometry(self):
        with pytest.raises(GeometryError):
            check_submean(identity(), W1, 0.55, 0.1)
        with pytest.raises(GeometryError):
            check_submean(identity(), W1, 0.95, 0.1)
