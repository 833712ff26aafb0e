import itertools
import math

import numpy as np
import pytest

from hosi import (
    TrigPolynomial,
    VarSubset,
    build_block_design,
    build_spectral_design,
    dirichlet_kernel,
    dirichlet_polynomial,
    estimate_spectral_index,
    estimate_weighted_spectral,
    exact_multilinear,
    exact_weighted_spectral,
    multilinear_product,
    spectral_index_exact,
    spectral_moment,
)
from hosi.oracles import rectangle_indices
from hosi.functions import rectangle_spec, gfunction_spec


def tone(k, dim=1, coeff=1.0):
    return TrigPolynomial({tuple(np.atleast_1d(k)): coeff}, dim)


def real_poly(dim, entries):
    """Conjugate-symmetric polynomial from {k: c} pairs (k's positive half)."""
    terms = {}
    for k, c in entries.items():
        k = tuple(np.atleast_1d(k))
        terms[k] = terms.get(k, 0) + c
        mk = tuple(-v for v in k)
        if mk != k:
            terms[mk] = terms.get(mk, 0) + np.conj(c)
    return TrigPolynomial(terms, dim)


def zscore(est, oracle):
    if est.std_error == 0.0:
        return 0.0 if est.value == oracle else math.inf
    return (est.value - oracle) / est.std_error


class TestTrigPolynomial:
    def test_real_eval(self):
        poly = real_poly(1, {1: 0.5})
        x = 0.3
        assert poly((x,)) == pytest.approx(math.cos(2 * math.pi * x))

    def test_mean_and_anova_part(self):
        poly = TrigPolynomial({(0, 0): 2.0, (1, 0): 0.5, (-1, 0): 0.5, (1, 2): 0.25, (-1, -2): 0.25}, 2)
        assert poly.mean == 2.0
        part = poly.anova_part(VarSubset.from_indices([1], 2))
        assert set(part.terms) == {(1, 0), (-1, 0)}

    def test_is_real_valued(self):
        assert real_poly(1, {2: 1 + 2j}).is_real_valued()
        assert not TrigPolynomial({(1,): 1.0}, 1).is_real_valued()


class TestExactOperator:
    def test_fundamental_pattern_exhaustive(self):
        # on pure tones the operator is 1 iff k_j = (-1)^j k_0 (d=1, |k|<=2)
        for p in (2, 3, 4):
            for ks in itertools.product(range(-2, 3), repeat=p):
                value = exact_multilinear([tone(k) for k in ks])
                expected = 1.0 if all(ks[j] == (-1) ** j * ks[0] for j in range(p)) else 0.0
                assert value == pytest.approx(expected, abs=1e-12), ks

    def test_fundamental_pattern_d2_sampled(self):
        freqs = list(itertools.product(range(-2, 3), repeat=2))
        rng = np.random.default_rng(0)
        for p in (2, 3, 4):
            for _ in range(300):
                ks = [freqs[i] for i in rng.integers(0, len(freqs), size=p)]
                value = exact_multilinear([tone(k, dim=2) for k in ks])
                expected = 1.0 if all(
                    ks[j] == tuple((-1) ** j * v for v in ks[0]) for j in range(p)
                ) else 0.0
                assert value == pytest.approx(expected, abs=1e-12)

    def test_spectral_moment_examples(self):
        poly = real_poly(1, {1: 0.5})  # coefficients 1/2 at +-1
        assert spectral_moment(poly, 4) == pytest.approx(2 * 0.5**4)
        assert spectral_moment(TrigPolynomial({(0,): 1.0}, 1), 7) == pytest.approx(1.0)
        # p=2 is Parseval
        poly2 = real_poly(1, {0: 1.0, 1: 0.25 + 0.1j, 3: 0.5})
        parseval = sum(abs(c) ** 2 for c in poly2.terms.values())
        assert spectral_moment(poly2, 2) == pytest.approx(parseval)

    def test_decomposition_additivity(self):
        # sigma_p of the whole equals the sum over ANOVA parts, d=2
        poly = real_poly(2, {(1, 0): 0.4, (0, 2): 0.3 + 0.2j, (1, 1): 0.25, (2, -1): 0.1j, (0, 0): 0.7})
        for p in (2, 3, 4):
            whole = spectral_moment(poly, p)
            parts = 0.0
            for u in [VarSubset(m, 2) for m in range(4)]:
                parts += spectral_moment(poly.anova_part(u), p)
            assert abs(whole - parts) < 1e-12

    def test_moebius_consistency_theorem(self):
        # cumulative index + mu^p equals the subset sums of part measures
        poly = real_poly(2, {(1, 0): 0.4, (0, 1): 0.3, (1, 1): 0.2, (0, 0): 0.9})
        for p in (2, 4):
            for u in [VarSubset(m, 2) for m in range(4)]:
                lhs = spectral_index_exact(poly, u, p) + np.real(poly.mean**p)
                rhs = 0.0
                for mask in range(4):
                    if mask & u.mask == mask:
                        rhs += np.real(spectral_moment(poly.anova_part(VarSubset(mask, 2)), p))
                assert lhs == pytest.approx(rhs, abs=1e-12)

    def test_single_tone_exact_index(self):
        poly = real_poly(1, {1: 0.5})
        poly = TrigPolynomial({**poly.terms, (0,): 1.0}, 1)
        assert spectral_index_exact(poly, VarSubset.full(1), 4) == pytest.approx(0.125)


class TestMultilinearMC:
    def test_all_ones(self):
        one = TrigPolynomial({(0,): 1.0}, 1)
        design = build_block_design(seed=1, n=2000, d=1, p=3)
        est = multilinear_product([one, one, one], design)
        assert est.value == pytest.approx(1.0)
        assert est.std_error == 0.0

    def test_parseval_single_tone(self):
        # p=2 of sqrt(2) cos(2 pi x): integral of f^2 = 1
        f = real_poly(1, {1: math.sqrt(2) / 2})
        design = build_block_design(seed=2, n=50_000, d=1, p=2)
        est = multilinear_product([f, f], design)
        assert abs(zscore(est, 1.0)) < 3.0

    def test_conforming_tone_pair(self):
        # <phi_k, phi_-k>_2 = 1 exactly in expectation; the integrand is
        # cos(...)-free only after taking real parts, so just check 3 SE
        f = real_poly(1, {1: 0.5})
        design = build_block_design(seed=3, n=50_000, d=1, p=2)
        est = multilinear_product([f, f], design)
        assert abs(zscore(est, spectral_moment(f, 2).real)) < 3.0


class TestSpectralEstimators:
    def test_empty_subset(self):
        f = real_poly(1, {1: 0.5})
        u = VarSubset.empty(1)
        design = build_spectral_design(seed=0, n=100, d=1, p=4, u=u)
        est = estimate_spectral_index(f, u, 4, design)
        assert est.value == 0.0 and est.std_error == 0.0

    def test_trig_poly_p4(self):
        poly = TrigPolynomial({(0,): 1.0, (1,): 0.5, (-1,): 0.5}, 1)
        u = VarSubset.full(1)
        exact = spectral_index_exact(poly, u, 4)
        assert exact == pytest.approx(0.125)
        for reduced in (False, True):
            design = build_spectral_design(seed=4, n=100_000, d=1, p=4, u=u, reduced=reduced)
            est = estimate_spectral_index(poly, u, 4, design)
            assert abs(zscore(est, exact)) < 3.0, reduced

    def test_rectangle_p4_reduced(self):
        eps = (0.25,)
        f = rectangle_spec(eps).function()
        u = VarSubset.full(1)
        oracle = rectangle_indices(eps, u, 4, "fourier").index
        assert oracle + 0.25**4 == pytest.approx((2 / 3) * 0.25**3)
        design = build_spectral_design(seed=5, n=200_000, d=1, p=4, u=u, reduced=True)
        est = estimate_spectral_index(f, u, 4, design)
        assert abs(zscore(est, oracle)) < 3.0

    def test_mixed_subset_measure_convention(self):
        # validates integrating the complement blocks in the defining
        # integral: MC must match the coefficient-space oracle for a
        # genuinely mixed polynomial, u a strict subset
        poly = real_poly(2, {(1, 0): 0.4, (0, 1): 0.3, (1, 1): 0.2, (0, 0): 0.9})
        u = VarSubset.from_indices([1], 2)
        exact = spectral_index_exact(poly, u, 4)
        design = build_spectral_design(seed=6, n=150_000, d=2, p=4, u=u)
        est = estimate_spectral_index(poly, u, 4, design)
        assert abs(zscore(est, exact)) < 3.5

    def test_full_vs_reduced_agreement(self):
        from hosi import estimate_spectral_index_reduced

        f = gfunction_spec((0.0, 1.0, 9.0)).function()
        u = VarSubset.from_indices([1], 3)
        d_full = build_spectral_design(seed=7, n=50_000, d=3, p=4, u=u)
        d_red = build_spectral_design(seed=8, n=50_000, d=3, p=4, u=u, reduced=True)
        a = estimate_spectral_index(f, u, 4, d_full)
        b = estimate_spectral_index_reduced(f, u, 4, d_red)
        combined = math.hypot(a.std_error, b.std_error)
        assert abs(a.value - b.value) < 3.0 * combined
        # even-p estimands are nonnegative; estimates may dip below zero by
        # no more than sampling noise
        assert a.value > -3.0 * a.std_error
        assert b.value > -3.0 * b.std_error

    def test_reduced_wrapper_rejects_full_design(self):
        from hosi import estimate_spectral_index_reduced

        f = gfunction_spec((0.0, 1.0)).function()
        u = VarSubset.from_indices([1], 2)
        d_full = build_spectral_design(seed=7, n=100, d=2, p=4, u=u)
        with pytest.raises(ValueError):
            estimate_spectral_index_reduced(f, u, 4, d_full)

    def test_odd_p_notes(self):
        f = real_poly(1, {1: 0.5, 0: 1.0})
        u = VarSubset.full(1)
        design = build_spectral_design(seed=9, n=1000, d=1, p=3, u=u)
        est = estimate_spectral_index(f, u, 3, design)
        assert any("experimental" in n for n in est.notes)


class TestDirichlet:
    def test_n0_is_one(self):
        for x in (0.0, 0.3, 0.77):
            assert dirichlet_kernel(0, (x,)) == pytest.approx(1.0)

    def test_lattice_point_value(self):
        assert dirichlet_kernel(3, (0.0,)) == pytest.approx(7.0)
        assert dirichlet_kernel(2, (0.0, 0.5)) == pytest.approx(5.0 * dirichlet_kernel(2, (0.5,)))

    def test_half_point(self):
        assert dirichlet_kernel(1, (0.5,)) == pytest.approx(-1.0)

    def test_near_singularity_stable(self):
        for delta in (1e-12, 1e-10, 1e-9):
            val = dirichlet_kernel(2, (delta,))
            assert val == pytest.approx(5.0, rel=1e-6)

    def test_matches_coefficient_sum(self):
        # kernel equals its defining exponential sum
        x = 0.2137
        n_max = 3
        direct = sum(math.cos(2 * math.pi * k * x) for k in range(-n_max, n_max + 1))
        assert dirichlet_kernel(n_max, (x,)) == pytest.approx(direct)

    def test_polynomial_matches_kernel(self):
        poly = dirichlet_polynomial(2, 1)
        for x in (0.1, 0.35, 0.8):
            assert poly((x,)) == pytest.approx(dirichlet_kernel(2, (x,)))


class TestWeightedSpectral:
    def test_constant_function(self):
        one = TrigPolynomial({(0,): 1.0}, 1)
        design = build_block_design(seed=10, n=20_000, d=1, p=3)
        est = estimate_weighted_spectral(one, 3, 1, (0,), design)
        assert abs(zscore(est, 1.0)) < 3.0

    def test_tone_example(self):
        # f = 1 + sqrt(2) cos(2 pi x): sum_{|k|<=1} |c(k)|^2 = 1 + 2 (1/2) = 2
        f = real_poly(1, {0: 1.0, 1: math.sqrt(2) / 2})
        assert exact_weighted_spectral(f, 3, 1, (0,)) == pytest.approx(2.0)
        assert exact_weighted_spectral(f, 3, 0, (0,)) == pytest.approx(1.0)
        design = build_block_design(seed=11, n=100_000, d=1, p=3)
        est = estimate_weighted_spectral(f, 3, 1, (0,), design)
        assert abs(zscore(est, 2.0)) < 3.0

    def test_modulation_shifts_window(self):
        f = real_poly(1, {0: 1.0, 3: 0.5})
        # window {-0..0} shifted by m=3 sees |c(3)|^2 only
        assert exact_weighted_spectral(f, 3, 0, (3,)) == pytest.approx(0.25)
        design = build_block_design(seed=12, n=100_000, d=1, p=3)
        est = estimate_weighted_spectral(f, 3, 0, (3,), design)
        assert abs(zscore(est, 0.25)) < 3.0

    def test_exact_via_multilinear(self):
        f = real_poly(1, {0: 0.7, 1: 0.3, 2: 0.1 + 0.2j})
        lhs = exact_multilinear([f, f, dirichlet_polynomial(1, 1)])
        rhs = exact_weighted_spectral(f, 3, 1, (0,))
        assert lhs.real == pytest.approx(rhs, abs=1e-12)
        assert abs(lhs.imag) < 1e-12

    def test_non_integer_modulation_rejected(self):
        f = real_poly(1, {0: 1.0})
        design = build_block_design(seed=0, n=100, d=1, p=3)
        with pytest.raises(ValueError):
            estimate_weighted_spectral(f, 3, 1, (0.5,), design)

    def test_even_p_rejected(self):
        f = real_poly(1, {0: 1.0})
        design = build_block_design(seed=0, n=100, d=1, p=4)
        with pytest.raises(ValueError):
            estimate_weighted_spectral(f, 4, 1, (0,), design)
