"""Scattering data and the randomized solvability test."""

import numpy as np
import pytest

import bethe_forge as bf
from bethe_forge.constraints import scattering_amplitude

from conftest import cdraw, draw_free, family_instance, random_params


class TestLambda:
    def test_zero_params(self, rng):
        z1, z2 = cdraw(rng), cdraw(rng)
        assert bf.lambda_fn(bf.HamiltonianParams(), z1, z2) == 0

    def test_gzf_proportional_to_closed_form(self, rng):
        """For the gZF family Lambda factorizes; S built from it must match
        the family's printed two-parameter form."""
        h = bf.construct("gZF", draw_free("gZF", rng))
        red = bf.family_reduced("gZF", {k: getattr(h, k) for k in
                                        ("p", "tp", "t2", "s1")})
        for _ in range(20):
            z1, z2 = cdraw(rng), cdraw(rng)
            s = bf.s_matrix(h, z1, z2)
            s_fam = bf.family_s_matrix("gZF", red, z1, z2)
            assert abs(s - s_fam) < 1e-10 * abs(s_fam)

    def test_equal_momenta_smoke(self, rng):
        h = random_params(rng)
        z = cdraw(rng)
        val = bf.lambda_fn(h, z, z)
        assert np.isfinite(val)

    def test_gradient(self, rng):
        from bethe_forge.constraints import lambda_grad
        h = random_params(rng)
        z1, z2 = cdraw(rng), cdraw(rng)
        d1, d2 = lambda_grad(h, z1, z2)
        eps = 1e-7
        fd1 = (bf.lambda_fn(h, z1 + eps, z2) - bf.lambda_fn(h, z1 - eps, z2)) / (2 * eps)
        fd2 = (bf.lambda_fn(h, z1, z2 + eps) - bf.lambda_fn(h, z1, z2 - eps)) / (2 * eps)
        assert abs(d1 - fd1) < 1e-6 * max(1, abs(fd1))
        assert abs(d2 - fd2) < 1e-6 * max(1, abs(fd2))


class TestSMatrix:
    def test_equal_momenta(self, rng):
        h = random_params(rng)
        z = cdraw(rng)
        assert abs(bf.s_matrix(h, z, z) + 1) < 1e-12

    def test_unitarity(self, rng):
        for _ in range(100):
            h = random_params(rng)
            z1, z2 = cdraw(rng), cdraw(rng)
            assert abs(bf.s_matrix(h, z1, z2) * bf.s_matrix(h, z2, z1) - 1) < 1e-10

    def test_trivial_for_17v1a(self, rng):
        h, _ = family_instance("17V1a", rng)
        for _ in range(10):
            z1, z2 = cdraw(rng), cdraw(rng)
            assert abs(bf.s_matrix(h, z1, z2) + 1) < 1e-12

    def test_singular_s_raises(self, rng):
        # 14V1 has S = -(z2 - tau_p)/(z1 - tau_p): pole at z1 = tau_p
        free = draw_free("14V1", rng)
        h = bf.construct("14V1", free, {"eps": 1})
        taup = free["tp"] / free["p"]
        with pytest.raises(ValueError, match="singular S"):
            bf.s_matrix(h, taup, cdraw(rng))


class TestNFactor:
    def test_antisymmetric_zero(self, rng):
        h = random_params(rng)
        z = cdraw(rng)
        scale = abs(bf.n_factor(h, z, 1.31 * z))
        assert abs(bf.n_factor(h, z, z)) <= 1e-12 * max(scale, 1)

    def test_gzf_closed_form(self, rng):
        free = draw_free("gZF", rng)
        h = bf.construct("gZF", free)
        red = bf.family_reduced("gZF", free)
        for _ in range(20):
            z1, z2 = cdraw(rng), cdraw(rng)
            expect = bf.family_n_factor("gZF", red, z1, z2)
            assert abs(bf.n_factor(h, z1, z2) - expect) < 1e-10 * max(1, abs(expect))

    def test_14v2_closed_form(self, rng):
        free = draw_free("14V2", rng)
        h = bf.construct("14V2", free)
        taup = free["tp"] / free["p"]
        tau2 = free["t2"] / free["p"]
        for _ in range(20):
            z1, z2 = cdraw(rng), cdraw(rng)
            expect = (tau2 * (z1 - z2) * (z1 * z2 + taup**2)
                      / (2 * taup * (z1 - taup) * (z2 - taup)))
            assert abs(bf.n_factor(h, z1, z2) - expect) < 1e-10 * max(1, abs(expect))


class TestAmplitude:
    def test_identity(self, rng):
        h = random_params(rng)
        z = cdraw(rng, 3)
        assert scattering_amplitude(h, z, (0, 1, 2)) == 1

    def test_transposition(self, rng):
        h = random_params(rng)
        z = cdraw(rng, 2)
        expect = bf.s_matrix(h, z[0], z[1])
        assert abs(scattering_amplitude(h, z, (1, 0)) - expect) < 1e-12


class TestConstraintSums:
    def test_gzf_residuals(self, rng):
        h = bf.construct("gZF", draw_free("gZF", rng))
        for _ in range(10):
            z3, z4 = cdraw(rng, 3), cdraw(rng, 4)
            for fn, z in ((bf.constraint_e21, z3), (bf.constraint_e12, z3),
                          (bf.constraint_e22, z4)):
                assert abs(fn(h, z)) < 1e-9

    def test_gik_e12_and_perturbation(self, rng):
        h, _ = family_instance("gIK", rng)
        z3 = cdraw(rng, 3)
        assert abs(bf.constraint_e12(h, z3)) < 1e-9
        hp = h.replace(t3=h.t3 + 0.1)
        assert abs(bf.constraint_e12(hp, z3)) > 1e-3

    def test_gb_e22_and_perturbation(self, rng):
        h, _ = family_instance("gB", rng)
        z4 = cdraw(rng, 4)
        assert abs(bf.constraint_e22(h, z4)) < 1e-9
        hp = h.replace(tp=h.tp + 0.1)
        assert abs(bf.constraint_e22(hp, z4)) > 1e-6

    def test_perturbed_gzf_fails(self, rng):
        h = bf.construct("gZF", draw_free("gZF", rng))
        hp = h.replace(s3=h.s3 + 0.1)
        assert abs(bf.constraint_e21(hp, cdraw(rng, 3))) > 1e-3

    def test_smoke_t2_only(self, rng):
        # Lambda vanishes identically on this ray: must evaluate, not raise
        h = bf.HamiltonianParams(t2=1)
        bf.constraint_e21(h, cdraw(rng, 3))

    def test_symmetrized_vanishing_for_families(self, rng):
        # on solvable points the sums vanish for every input ordering
        for _ in range(20):
            h, _ = family_instance("SpR", rng)
            z3, z4 = cdraw(rng, 3), cdraw(rng, 4)
            for fn, z in ((bf.constraint_e21, z3), (bf.constraint_e12, z3),
                          (bf.constraint_e22, z4)):
                perm = list(z)
                rng.shuffle(perm)
                assert abs(fn(h, z)) < 1e-9 and abs(fn(h, perm)) < 1e-9

    def test_permutation_cocycle(self, rng):
        # relabeling the momenta multiplies the symmetrized sum by the
        # inverse scattering amplitude of the relabeling permutation
        for _ in range(25):
            h = random_params(rng)
            z3, z4 = cdraw(rng, 3), cdraw(rng, 4)
            for fn, z in ((bf.constraint_e21, z3), (bf.constraint_e12, z3),
                          (bf.constraint_e22, z4)):
                base = fn(h, z)
                pi = tuple(rng.permutation(len(z)))
                permuted = [z[i] for i in pi]
                a_pi = scattering_amplitude(h, z, pi)
                assert abs(fn(h, permuted) * a_pi - base) < 1e-9 * max(1, abs(base))


class TestSolvability:
    def test_families_pass(self, rng):
        for tag in bf.FAMILY_ORDER:
            h, _ = family_instance(tag, rng)
            verdict = bf.is_cba_solvable(h, seed=1)
            assert verdict.solvable, (tag, verdict.max_residual)
            assert verdict.max_residual <= 1e-9

    def test_random_draw_fails(self, rng):
        verdict = bf.is_cba_solvable(random_params(rng), seed=1)
        assert not verdict.solvable
        assert verdict.failing_constraint in ("E21", "E12", "E22")

    def test_small_perturbation_detected(self, rng):
        h = bf.construct("gZF", draw_free("gZF", rng))
        hp = h.replace(t3=h.t3 + 1e-3)
        verdict = bf.is_cba_solvable(hp, seed=1)
        assert not verdict.solvable

    def test_rank2_gate(self):
        h = bf.HamiltonianParams(p=1, q=1)
        with pytest.raises(bf.GateViolation, match="rank-2"):
            bf.is_cba_solvable(h)

    def test_pseudo_excitation_gate(self):
        h = bf.HamiltonianParams(t1=1, t2=1)
        with pytest.raises(bf.GateViolation, match="pseudo-excitation"):
            bf.is_cba_solvable(h)

    def test_verdict_consistency(self, rng):
        h, _ = family_instance("17V2", rng)
        verdict = bf.is_cba_solvable(h, n_samples=7, tol=1e-8)
        assert verdict.samples == 7 and verdict.tol == 1e-8
        assert verdict.solvable == (verdict.max_residual <= verdict.tol)
