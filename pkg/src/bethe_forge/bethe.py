"""Bethe-equation solving and explicit eigenvector assembly.

Momenta live in the z = e^{ik} variable throughout.  The quantization
conditions on a periodic chain of length L with M excitations are

    z_j^L = prod_{n != j} S(z_n, z_j),    j = 1..M.

M = 1 is exact (L-th roots of unity).  For M >= 2 a damped Newton iteration
runs on the denominator-cleared polynomial system

    F_j = z_j^L prod_{n != j} Lambda(z_j, z_n)
          - (-1)^(M-1) prod_{n != j} Lambda(z_n, z_j),

seeded from all multisets of the trivial-scattering roots z^L = (-1)^(M-1)
plus random points.  Families with S identically -1 bypass Newton: their
solutions are exactly those multisets.

Eigenvectors are plane-wave superpositions over ordered excitation positions
x_1 <= ... <= x_M (a doubly occupied site appears twice); coordinates carry
one scattering factor per permutation inversion and one decay factor N per
doubled position.  Vectors are returned unnormalized with their norm.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .constraints import lambda_fn, lambda_grad, s_matrix, n_factor, random_momenta
from .hamiltonian import invariants, occupation_to_positions, sector_basis


@dataclass(frozen=True)
class BetheSolution:
    z: tuple
    energy: complex
    bae_residual: float
    degenerate_flag: bool = False


@dataclass
class SolverConfig:
    seed: int = 0
    random_seeds: int = 100
    max_iter: int = 200
    damping: float = 0.5
    newton_tol: float = 1e-12
    bae_tol: float = 1e-10
    dedup_tol: float = 1e-8
    degenerate_tol: float = 1e-6
    trivial_s_probes: int = 6


@dataclass
class SectorEigenvector:
    M: int
    coords: dict                    # ordered position tuple -> amplitude
    norm: float
    amp_scale: float                # largest pre-cancellation term magnitude
    degenerate_flag: bool = False

    @property
    def is_null(self):
        return self.norm <= 1e-10 * max(self.amp_scale, 1e-300)

    def to_vector(self, L):
        basis = sector_basis(L, self.M)
        vec = np.zeros(len(basis), complex)
        for i, s in enumerate(basis):
            vec[i] = self.coords.get(occupation_to_positions(s), 0j)
        return vec


def energy(params, z):
    """E = M V + sum_n (q z_n + p / z_n)."""
    z = [complex(w) for w in z]
    if any(w == 0 for w in z):
        raise ValueError("invalid momentum z = 0")
    V = invariants(params).V
    return len(z) * V + sum(params.q * w + params.p / w for w in z)


def bae_residual(params, z, L):
    """max_j |z_j^L - prod_{n != j} S(z_n, z_j)|; +inf at an S singularity."""
    z = [complex(w) for w in z]
    res = 0.0
    for j, zj in enumerate(z):
        prod = 1.0 + 0j
        try:
            for n, zn in enumerate(z):
                if n != j:
                    prod *= s_matrix(params, zn, zj)
        except ValueError:
            return float("inf")
        val = abs(zj**L - prod)
        if not np.isfinite(val):
            return float("inf")
        res = max(res, val)
    return res


def _is_trivial_s(params, rng, probes):
    for _ in range(probes):
        z1, z2 = random_momenta(rng, 2)
        try:
            if abs(s_matrix(params, z1, z2) + 1) > 1e-10:
                return False
        except ValueError:
            return False
    return True


def _bae_system_batch(params, Z, L, sign):
    """F_j for a (n, M) batch of momentum tuples."""
    n, M = Z.shape
    lam = {(i, j): lambda_fn(params, Z[:, i], Z[:, j])
           for i in range(M) for j in range(M) if i != j}
    F = np.empty((n, M), complex)
    for j in range(M):
        pj = np.ones(n, complex)
        qj = np.ones(n, complex)
        for m in range(M):
            if m != j:
                pj = pj * lam[j, m]
                qj = qj * lam[m, j]
        F[:, j] = Z[:, j]**L * pj - sign * qj
    return F


def _bae_jacobian_batch(params, Z, L, sign):
    n, M = Z.shape
    lam = {(i, j): lambda_fn(params, Z[:, i], Z[:, j])
           for i in range(M) for j in range(M) if i != j}
    grad = {(i, j): lambda_grad(params, Z[:, i], Z[:, j])
            for i in range(M) for j in range(M) if i != j}

    def prod_excl(pairs, skip):
        out = np.ones(n, complex)
        for pr in pairs:
            if pr != skip:
                out = out * lam[pr]
        return out

    J = np.zeros((n, M, M), complex)
    for j in range(M):
        pj_pairs = [(j, m) for m in range(M) if m != j]
        qj_pairs = [(m, j) for m in range(M) if m != j]
        pj = prod_excl(pj_pairs, None)
        dP = sum(grad[j, m][0] * prod_excl(pj_pairs, (j, m))
                 for m in range(M) if m != j)
        dQ = sum(grad[m, j][1] * prod_excl(qj_pairs, (m, j))
                 for m in range(M) if m != j)
        J[:, j, j] = L * Z[:, j]**(L - 1) * pj + Z[:, j]**L * dP - sign * dQ
        for k in range(M):
            if k == j:
                continue
            dPk = grad[j, k][1] * prod_excl(pj_pairs, (j, k))
            dQk = grad[k, j][0] * prod_excl(qj_pairs, (k, j))
            J[:, j, k] = Z[:, j]**L * dPk - sign * dQk
    return J


def _newton_batch(params, Z0, L, cfg):
    """Damped Newton on the cleared BAE system, over a batch of seeds.

    Returns the converged rows.
    """
    Z = np.array(Z0, complex)
    n, M = Z.shape
    sign = (-1.0) ** (M - 1)

    def resnorm(Zc):
        F = _bae_system_batch(params, Zc, L, sign)
        scale = np.maximum(1.0, np.max(np.abs(Zc), axis=1)**L)
        r = np.max(np.abs(F), axis=1) / scale
        return F, r

    F, res = resnorm(Z)
    active = np.isfinite(res)
    done = ~active  # rows that converged (or were abandoned as non-finite)
    converged = np.zeros(n, bool)

    for _ in range(cfg.max_iter):
        hit = active & (res <= cfg.newton_tol)
        converged |= hit
        active &= ~hit
        if not active.any():
            break
        J = _bae_jacobian_batch(params, Z, L, sign)
        det = np.linalg.det(J)
        bad = active & (~np.isfinite(det) | (np.abs(det) == 0))
        active &= ~bad
        if not active.any():
            break
        step = np.zeros_like(Z)
        idx = np.where(active)[0]
        try:
            step[idx] = np.linalg.solve(J[idx], -F[idx, :, None])[:, :, 0]
        except np.linalg.LinAlgError:
            for i in idx:
                try:
                    step[i] = np.linalg.solve(J[i], -F[i])
                except np.linalg.LinAlgError:
                    active[i] = False
        if not active.any():
            break
        damp = np.ones(n)
        trial, rt = None, None
        for _ in range(25):
            trial = Z + damp[:, None] * step
            Ft, rt = resnorm(trial)
            worse = active & ~(rt < res) & (damp > 1e-8)
            if not worse.any():
                break
            damp[worse] *= cfg.damping
        stuck = active & ~(rt < res)
        active &= ~stuck
        upd = active
        Z[upd] = trial[upd]
        F[upd] = Ft[upd]
        res[upd] = rt[upd]
    hit = active & (res <= cfg.newton_tol)
    converged |= hit
    return Z[converged]


def _canonical(z, tol):
    zs = sorted((complex(w) for w in z), key=lambda w: (w.real, w.imag))
    return tuple(zs)


def _same(za, zb, tol):
    return all(abs(a - b) <= tol for a, b in zip(za, zb))


def _multiset_seeds(L, M, sign_roots):
    return [tuple(c) for c in
            itertools.combinations_with_replacement(sign_roots, M)]


def solve_bae(params, L, M, config=None):
    """All distinct Bethe-equation solutions found for the (L, M) sector."""
    cfg = config or SolverConfig()
    if M < 1 or M > 3:
        raise ValueError("M <= 3 supported")
    rng = np.random.default_rng(cfg.seed)

    if M == 1:
        out = []
        for n in range(L):
            z = np.exp(2j * np.pi * n / L)
            out.append(BetheSolution((z,), energy(params, [z]), 0.0, False))
        return out

    sign = (-1.0) ** (M - 1)
    phase = 0.0 if sign == 1 else np.pi / L
    free_roots = [np.exp(1j * (2 * np.pi * n / L + phase)) for n in range(L)]

    if _is_trivial_s(params, rng, cfg.trivial_s_probes):
        out = []
        for zs in _multiset_seeds(L, M, free_roots):
            res = bae_residual(params, zs, L)
            degen = min(abs(a - b) for a, b in
                        itertools.combinations(zs, 2)) <= cfg.degenerate_tol
            out.append(BetheSolution(_canonical(zs, cfg.dedup_tol),
                                     energy(params, zs), res, degen))
        return out

    seeds = list(_multiset_seeds(L, M, free_roots))
    # coincident entries can sit on a singular Jacobian; perturbed copies
    # give Newton a way off the symmetric point
    for s in list(seeds):
        if len(set(s)) < M:
            wiggle = 1e-2 * random_momenta(rng, M)
            seeds.append(tuple(np.array(s) * (1 + wiggle)))
    seeds += [tuple(random_momenta(rng, M)) for _ in range(cfg.random_seeds)]

    found = []
    for z in _newton_batch(params, np.array(seeds, complex), L, cfg):
        if np.any(np.abs(z) < 1e-8):
            continue
        res = bae_residual(params, z, L)
        if not (res <= cfg.bae_tol):
            continue
        zs = _canonical(z, cfg.dedup_tol)
        if any(_same(zs, prev.z, cfg.dedup_tol) for prev in found):
            continue
        degen = min(abs(a - b) for a, b in
                    itertools.combinations(zs, 2)) <= cfg.degenerate_tol
        found.append(BetheSolution(zs, energy(params, zs), res, degen))
    return found


def amplitude(params, z, sigma, doubled=()):
    """Plane-wave coefficient for permutation sigma with decay factors for the
    doubled position indices (A_id = 1; one S factor per inversion, one N per
    doubled index)."""
    sigma = tuple(sigma)
    pos = {v: i for i, v in enumerate(sigma)}
    out = 1.0 + 0j
    for a in range(len(sigma)):
        for b in range(a + 1, len(sigma)):
            if pos[a] > pos[b]:
                out *= s_matrix(params, z[a], z[b])
    for j in doubled:
        out *= n_factor(params, z[sigma[j]], z[sigma[j + 1]])
    return out


def assemble_eigenvector(params, z, L):
    """Coordinates a(x_1..x_M) of the Bethe vector for momenta z."""
    z = [complex(w) for w in z]
    M = len(z)
    degen = (M >= 2 and min(abs(a - b) for a, b in
                            itertools.combinations(z, 2)) <= 1e-6)
    try:
        S = {(a, b): s_matrix(params, z[a], z[b])
             for a in range(M) for b in range(M) if a != b}
        N = {(a, b): n_factor(params, z[a], z[b])
             for a in range(M) for b in range(M) if a != b}
    except ValueError as exc:
        raise ValueError(f"degenerate amplitude; solution flagged ({exc})")
    perms = []
    for sigma in itertools.permutations(range(M)):
        pos = {v: i for i, v in enumerate(sigma)}
        A = 1.0 + 0j
        for a in range(M):
            for b in range(a + 1, M):
                if pos[a] > pos[b]:
                    A *= S[a, b]
        perms.append((sigma, A))
    zpow = [[z[n] ** x for x in range(L + 1)] for n in range(M)]
    coords = {}
    scale = 0.0
    for s in sector_basis(L, M):
        xs = occupation_to_positions(s)
        doubles = tuple(j for j in range(M - 1) if xs[j + 1] == xs[j])
        total = 0j
        for sigma, A in perms:
            term = A
            for j in doubles:
                term *= N[sigma[j], sigma[j + 1]]
            for n in range(M):
                term *= zpow[sigma[n]][xs[n]]
            total += term
            scale = max(scale, abs(term))
        coords[xs] = total
    norm = float(np.sqrt(sum(abs(a)**2 for a in coords.values())))
    return SectorEigenvector(M=M, coords=coords, norm=norm, amp_scale=scale,
                             degenerate_flag=degen)


def verify_eigenpair(H, psi, E, tol=1e-8, L=None):
    """Relative eigenpair residual ||H psi - E psi|| / ||psi||."""
    if isinstance(psi, SectorEigenvector):
        if L is None:
            raise TypeError("pass L to expand a SectorEigenvector")
        vec = psi.to_vector(L)
    else:
        vec = np.asarray(psi, dtype=complex)
    nrm = np.linalg.norm(vec)
    if nrm == 0:
        raise ValueError("null Bethe vector")
    return float(np.linalg.norm(H @ vec - complex(E) * vec) / nrm)
