import math

import numpy as np
import pytest

from copop.counting import tau_values
from copop.diagnostics import (berezin_transform, closed_range_probe, closed_range_ratio,
                               compactness_verdict, essential_norm_profile,
                               kernel_test_function, monomial, probe_family,
                               schatten_integral, test_function_norm, weight_comparability)
from copop.errors import DomainError
from copop.selfmaps import dilation, identity, moebius, polynomial, rotate, rotation
from copop.weights import check_admissible, standard_weight

W1 = standard_weight(1)


def automorphism_tau_band(a, r):
    # tau = (1 - |sigma_a(z)|^2) / (1 - |z|^2) = (1 - |a|^2) / |1 - a z|^2 on |z| = r
    return (1 - a * a) / (1 - a * r) ** 2, (1 - a * a) / (1 + a * r) ** 2


class TestEssentialNorm:
    def test_dilation_compact(self):
        prof = essential_norm_profile(dilation(0.5), W1)
        assert np.all(prof.sup_values == 0)
        assert prof.verdict == "Compact"

    def test_identity(self):
        for w in (W1, standard_weight(0.5)):
            prof = essential_norm_profile(identity(), w)
            assert np.allclose(prof.sup_values, 1.0, atol=1e-14)
            assert prof.extrapolated_limsup == pytest.approx(1.0)
            assert prof.verdict == "NotCompact"

    def test_automorphism_closed_form(self):
        prof = essential_norm_profile(moebius(0.5), W1)
        for r, s, lo in zip(prof.radii, prof.sup_values, prof.inf_values):
            hi_exact, lo_exact = automorphism_tau_band(0.5, r)
            assert s == pytest.approx(hi_exact, rel=1e-6)
            assert lo == pytest.approx(lo_exact, rel=1e-6)
        assert np.all(prof.sup_values <= 3.0) and np.all(prof.inf_values >= 1 / 3)
        assert prof.verdict == "NotCompact"
        assert prof.angular_argmax[-1] == pytest.approx(0.0, abs=1e-2)

    def test_verdict_override(self):
        prof = essential_norm_profile(dilation(0.5), W1)
        assert compactness_verdict(prof) == "Compact"
        prof = essential_norm_profile(identity(), W1)
        assert compactness_verdict(prof) == "NotCompact"
        assert compactness_verdict(prof, tol=2.0) == "Compact"

    def test_same_code_path(self, maps):
        for phi in maps.values():
            prof = essential_norm_profile(phi, W1, angles_per_radius=64)
            pts = prof.radii * np.exp(1j * prof.angular_argmax)
            again = np.array([tau_values(phi, W1, np.array([p]))[0] for p in pts])
            assert np.array_equal(again, prof.sup_values)

    def test_rotation_invariance(self, maps):
        for phi in maps.values():
            base = essential_norm_profile(phi, W1, angles_per_radius=256).verdict
            for th, th2 in ((math.pi / 3, 0.0), (math.pi, math.pi / 3), (0.0, math.pi)):
                rot = rotate(phi, post=th, pre=th2)
                assert essential_norm_profile(rot, W1, angles_per_radius=256).verdict == base

    def test_bad_radii(self):
        with pytest.raises(DomainError):
            essential_norm_profile(identity(), W1, radii=(0.9, 0.5))

    def test_csv(self):
        lines = essential_norm_profile(identity(), W1).to_csv().splitlines()
        assert lines[0] == "r,sup_tau" and len(lines) == 5

    def test_stamp(self):
        assert essential_norm_profile(identity(), W1).stamp["admissible"] is True
        with pytest.warns(RuntimeWarning):
            prof = essential_norm_profile(identity(), standard_weight(0))
        assert prof.stamp["admissible"] is False


class TestSchatten:
    @pytest.mark.parametrize("p", [0.5, 1.0, 2.0, 4.0])
    def test_dilation_in_every_class(self, p):
        rep = schatten_integral(dilation(0.5), W1, p, R_sequence=(0.6, 0.9, 0.99))
        assert rep.verdict == "in-Sp"
        assert np.ptp(rep.integral_values) < 1e-10

    def test_dilation_p2_closed_form(self):
        # tau = (1 - 4r^2) / (1 - r^2) on r < 1/2; int tau dlambda = 2 int r(1-4r^2)(1-r^2)^-3 dr
        rep = schatten_integral(dilation(0.5), W1, 2.0, R_sequence=(0.6, 0.9))
        exact = 1.0 / 6.0
        assert rep.integral_values[-1] == pytest.approx(exact, rel=1e-10)

    def test_identity_not_in_class(self):
        rep = schatten_integral(identity(), W1, 2.0, R_sequence=(0.9, 0.99, 0.999))
        R = np.array(rep.R_sequence)
        assert np.allclose(rep.integral_values, R * R / (1 - R * R), rtol=1e-8)
        assert rep.verdict == "not-in-Sp"

    def test_monotone_in_R_and_p(self):
        for lam in (0.3, 0.5, 0.8):
            vals = [schatten_integral(dilation(lam), W1, p, R_sequence=(0.9, 0.99)).integral_values
                    for p in (0.5, 1.0, 2.0, 4.0)]
            for v in vals:
                assert np.all(np.diff(v) >= 0)
            last = [v[-1] for v in vals]
            assert np.all(np.diff(last) <= 0)

    def test_bad_p(self):
        with pytest.raises(DomainError):
            schatten_integral(identity(), W1, 0.0)


class TestBerezin:
    def test_identity_origin(self):
        assert berezin_transform(identity(), W1, 0, 0.5) == pytest.approx(0.21875, abs=1e-14)

    def test_empty_support(self):
        assert berezin_transform(dilation(0.5), W1, 0.9, 0.3) == 0.0

    def test_square_bound(self):
        r, z = 0.3, 0.7
        phi = polynomial([0, 0, 1])
        psi = float(tau_values(phi, W1, np.array([z]))[0])
        assert psi <= 2 / r ** 2 * berezin_transform(phi, W1, z, r)


class TestAuxiliaryChecks:
    def test_test_function_at_origin(self):
        for a in (0.0, 0.5, 2.0):
            assert test_function_norm(standard_weight(a), 0, 1.0) == 1.0

    def test_test_function_bounded(self):
        delta = check_admissible(W1).delta
        norms = [test_function_norm(W1, a, delta) for a in (0, 0.5, 0.9, 0.99)]
        assert max(norms) / min(norms) <= 10
        assert 0.1 <= test_function_norm(W1, 0.9, 1.0) <= 10

    def test_test_function_series_closed_form(self):
        # omega_0 (alpha = 0): H_w is the Dirichlet space; check a small |a| by direct sum
        w = standard_weight(0)
        a, d = 0.3, 1.0
        k = np.arange(1, 200)
        b = (1 - a * a) ** 2 * (k + 1) * a ** k
        expected = math.sqrt((1 - a * a) ** 4 + np.sum(b * b * k))
        assert test_function_norm(w, a, d) == pytest.approx(expected, rel=1e-12)

    def test_comparability(self):
        assert weight_comparability(W1, 0) == (1.0, 1.0)
        hi, lo = weight_comparability(W1, 0.5)
        assert hi == pytest.approx(3.0, rel=1e-5) and lo == pytest.approx(1 / 3, rel=1e-5)
        assert hi * lo == pytest.approx(1.0, rel=1e-4)
        assert 0.2 <= lo <= hi <= 5


class TestClosedRange:
    def test_identity_and_rotation(self):
        for phi in (identity(), rotation(1.0), moebius(0, 2.0)):
            rep = closed_range_probe(phi, W1)
            assert rep.infimum == pytest.approx(1.0, abs=1e-9)
            assert rep.verdict == "necessary-condition-passes"

    def test_dilation_monomials(self):
        for n in (1, 3, 8):
            assert closed_range_ratio(dilation(0.5), W1, monomial(n)) == pytest.approx(0.25 ** n, rel=1e-9)
        rep = closed_range_probe(dilation(0.5), W1)
        assert rep.verdict == "fails"

    def test_automorphism(self):
        rep = closed_range_probe(moebius(0.5), W1)
        assert rep.infimum >= 1 / 3 - 1e-9
        assert rep.verdict == "necessary-condition-passes"

    def test_normalize_origin(self):
        rep = closed_range_probe(moebius(0.5), W1, normalize_origin=True)
        assert rep.normalized_origin
        assert rep.infimum == pytest.approx(1.0, abs=1e-9)

    def test_family(self):
        fam = probe_family(5, (0.5,), 0.25)
        assert [f.name for f in fam[:2]] == ["z^1", "z^2"] and fam[-1].kind == "test"
        with pytest.raises(DomainError):
            monomial(0)
        with pytest.raises(DomainError):
            kernel_test_function(0, 1.0)

    def test_csv(self):
        lines = closed_range_probe(identity(), W1, probe_family(3, (0.5,))).to_csv().splitlines()
        assert lines[0] == "test_fn,ratio" and len(lines) == 5
