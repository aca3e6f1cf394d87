import numpy as np

from copop.roots import aberth, cluster, polish, root_bound, solve


class TestAberth:
    def test_known_roots(self):
        roots = np.array([0.5, -0.3 + 0.2j, 0.9j, -0.95])
        coeffs = np.poly(roots)
        found = np.sort_complex(solve(coeffs))
        assert np.allclose(found, np.sort_complex(roots), atol=1e-12)

    def test_batched_rows(self):
        rng = np.random.default_rng(3)
        roots = rng.normal(size=(50, 6)) + 1j * rng.normal(size=(50, 6))
        coeffs = np.array([np.poly(r) for r in roots])
        found = aberth(coeffs)
        for f, r in zip(found, roots):
            assert np.allclose(np.sort_complex(f), np.sort_complex(r), atol=1e-8)

    def test_against_numpy_roots(self):
        rng = np.random.default_rng(4)
        for _ in range(20):
            c = rng.normal(size=9) + 1j * rng.normal(size=9)
            ours = np.sort_complex(solve(c))
            ref = np.sort_complex(np.roots(c))
            assert np.allclose(ours, ref, atol=1e-8)

    def test_double_root_clusters(self):
        r = solve(np.array([1.0, 0.0, 0.0]))
        groups = cluster(r)
        assert len(groups) == 1 and groups[0][1] == 2
        assert abs(groups[0][0]) < 1e-6

    def test_linear(self):
        assert np.allclose(solve(np.array([2.0, -1.0])), [0.5])

    def test_leading_zeros_trimmed(self):
        assert np.allclose(np.sort(solve(np.array([0.0, 1.0, -1.0]))), [1.0])

    def test_bound_and_polish(self):
        c = np.poly([0.1, 0.2, 3.0]).astype(complex)[None, :]
        assert root_bound(c)[0] >= 3.0
        z = polish(c, np.array([[0.1001, 0.1999, 3.001]]), steps=6)
        assert np.allclose(z[0], [0.1, 0.2, 3.0], atol=1e-12)
