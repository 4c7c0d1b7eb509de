"""Scattering data and solvability constraints for the coordinate Bethe ansatz.

Momenta are represented by z = e^{ik} directly (k itself is never stored, so
there are no branch cuts).  The central object is the function Lambda(z1, z2);
the two-body scattering amplitude is S(z1, z2) = -Lambda(z1, z2)/Lambda(z2, z1)
and the double-occupancy decay coefficient is

    N(z1, z2) = (z1 - z2)(p + q z1 z2)(t2 + t1 z1 z2) / (2 Lambda(z2, z1)).

A Hamiltonian is CBA-solvable iff three symmetrized sums vanish identically in
the momenta; this module tests that by randomized evaluation (a rational
function vanishing at generic sample points vanishes identically, up to a
measure-zero failure set).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .hamiltonian import invariants

S_SING_TOL = 1e-13

_PERMS3 = list(itertools.permutations(range(3)))
_PERMS4 = list(itertools.permutations(range(4)))


def _inversion_pairs(perm):
    pos = {v: i for i, v in enumerate(perm)}
    return [(a, b) for a in range(len(perm)) for b in range(a + 1, len(perm))
            if pos[a] > pos[b]]


_INV3 = {perm: _inversion_pairs(perm) for perm in _PERMS3}
_INV4 = {perm: _inversion_pairs(perm) for perm in _PERMS4}


def _coeffs(params):
    """(p, q, s1, s2, t1, t2, tp, sp, X11, Y), memoized on the instance."""
    c = getattr(params, "_lambda_coeffs", None)
    if c is None:
        inv = invariants(params)
        c = (params.p, params.q, params.s1, params.s2, params.t1, params.t2,
             params.tp, params.sp, inv.X11, inv.Y)
        object.__setattr__(params, "_lambda_coeffs", c)
    return c


def lambda_fn(params, z1, z2):
    """Lambda(z1, z2); polynomial in both momenta.  Vectorizes over arrays."""
    p, q, s1, s2, t1, t2, tp, sp, X11, Y = _coeffs(params)
    zz = z1 * z2
    u = z2 * (s1 + s2 * zz) * (t2 + t1 * zz)
    a = Y * zz - q * zz * (z1 + z2) - p * (z1 + z2) + sp * zz * zz + tp
    b = X11 * z2 - q * zz - p
    return u - a * b


def lambda_grad(params, z1, z2):
    """(d/dz1, d/dz2) of lambda_fn, for Newton iterations on the BAE."""
    p, q, s1, s2, t1, t2, tp, sp, X11, Y = _coeffs(params)
    zz = z1 * z2
    f1 = s1 + s2 * zz
    f2 = t2 + t1 * zz
    a = Y * zz - q * zz * (z1 + z2) - p * (z1 + z2) + sp * zz * zz + tp
    b = X11 * z2 - q * zz - p
    da1 = Y * z2 - q * z2 * (2 * z1 + z2) - p + 2 * sp * z1 * z2 * z2
    da2 = Y * z1 - q * z1 * (z1 + 2 * z2) - p + 2 * sp * z1 * z1 * z2
    d1 = z2 * z2 * (s2 * f2 + t1 * f1) - da1 * b - a * (-q * z2)
    d2 = f1 * f2 + zz * (s2 * f2 + t1 * f1) - da2 * b - a * (X11 - q * z1)
    return d1, d2


def s_matrix(params, z1, z2):
    """Two-body scattering amplitude S(z1, z2) = -Lambda(z1,z2)/Lambda(z2,z1)."""
    num = lambda_fn(params, z1, z2)
    den = lambda_fn(params, z2, z1)
    scale = max(abs(num), abs(den))
    if abs(den) <= S_SING_TOL * max(scale, 1e-300):
        raise ValueError(f"singular S at ({z1}, {z2})")
    return -num / den


def n_factor(params, z1, z2):
    """Decay coefficient attaching to a doubly occupied site."""
    den = 2 * lambda_fn(params, z2, z1)
    num = (z1 - z2) * (params.p + params.q * z1 * z2) * (params.t2 + params.t1 * z1 * z2)
    if abs(den) <= S_SING_TOL * max(abs(num), abs(den), 1e-300):
        raise ValueError(f"singular N at ({z1}, {z2})")
    return num / den


def scattering_amplitude(params, z, perm):
    """Plane-wave coefficient A_sigma: product of S over the inversions of sigma
    (A_id = 1, A_{sigma T_j} = S(z_{sigma(j)}, z_{sigma(j+1)}) A_sigma)."""
    out = 1.0 + 0j
    for a, b in _inversion_pairs(tuple(perm)):
        out *= s_matrix(params, z[a], z[b])
    return out


class _PairTable:
    """Vectorized Lambda/S/N for all ordered pairs of an (nsamp, M) momentum batch."""

    def __init__(self, params, Z):
        self.Z = Z
        M = Z.shape[1]
        self.lam = {}
        for i in range(M):
            for j in range(M):
                if i != j:
                    self.lam[i, j] = lambda_fn(params, Z[:, i], Z[:, j])
        self.params = params

    def singular(self):
        bad = np.zeros(self.Z.shape[0], bool)
        scale = max(np.max(np.abs(v)) for v in self.lam.values())
        for v in self.lam.values():
            bad |= np.abs(v) <= S_SING_TOL * max(scale, 1e-300)
        return bad

    def S(self, i, j):
        return -self.lam[i, j] / self.lam[j, i]

    def N(self, i, j):
        h, Z = self.params, self.Z
        zz = Z[:, i] * Z[:, j]
        return ((Z[:, i] - Z[:, j]) * (h.p + h.q * zz) * (h.t2 + h.t1 * zz)
                / (2 * self.lam[j, i]))

    def A(self, perm, inv_table):
        out = np.ones(self.Z.shape[0], complex)
        for a, b in inv_table[perm]:
            out = out * self.S(a, b)
        return out


def _e21_terms(params, table):
    h, inv, Z = params, invariants(params), table.Z
    terms = []
    for perm in _PERMS3:
        a, b, c = (Z[:, i] for i in perm)
        i, j, k = perm
        w = c * (table.N(i, j) * (inv.X21 - h.q * (a + b)
                                  - h.p * (1 / a + 1 / b + 1 / c)
                                  + h.tp / (a * b))
                 + table.N(j, k) * h.s3 * b + h.t2 / a)
        terms.append(table.A(perm, _INV3) * w)
    return terms


def _e12_terms(params, table):
    h, inv, Z = params, invariants(params), table.Z
    terms = []
    for perm in _PERMS3:
        a, b, c = (Z[:, i] for i in perm)
        i, j, k = perm
        w = (1 / a) * (table.N(j, k) * (inv.X12 - h.q * (a + b + c)
                                        - h.p * (1 / b + 1 / c) + h.sp * b * c)
                       + table.N(i, j) * h.t3 / b + h.t1 * c)
        terms.append(table.A(perm, _INV3) * w)
    return terms


def _e22_terms(params, table):
    h, inv, Z = params, invariants(params), table.Z
    terms = []
    for perm in _PERMS4:
        a, b, c, d = (Z[:, i] for i in perm)
        i, j, k, l = perm
        w = c * d * (table.N(i, j) * table.N(k, l)
                     * (inv.X22 + inv.Y + h.tp / (a * b)
                        - h.q * (a + b + c + d) + h.sp * c * d
                        - h.p * (1 / a + 1 / b + 1 / c + 1 / d))
                     + table.N(k, l) * h.t2 / a + table.N(i, j) * h.t1 * d)
        terms.append(table.A(perm, _INV4) * w)
    return terms


_CONSTRAINTS = {"E21": (3, _e21_terms), "E12": (3, _e12_terms), "E22": (4, _e22_terms)}


def _constraint_batch(params, Z, which):
    """(relative residuals, singular mask) for one constraint over a momentum batch."""
    _, term_fn = _CONSTRAINTS[which]
    table = _PairTable(params, Z)
    bad = table.singular()
    terms = term_fn(params, table)
    total = sum(terms)
    scale = np.maximum.reduce([np.abs(t) for t in terms])
    rel = np.abs(total) / np.where(scale > 0, scale, 1.0)
    return rel, bad


def _single(params, z, which):
    M, _ = _CONSTRAINTS[which]
    z = [complex(w) for w in z]
    if len(z) != M:
        raise ValueError(f"{which} takes {M} momenta")
    if any(w == 0 for w in z):
        raise ValueError("invalid momentum z = 0")
    Z = np.array([z])
    table = _PairTable(params, Z)
    if table.singular()[0]:
        if any(v[0] != 0 for v in table.lam.values()):
            raise ValueError("resample momenta: Lambda singular at this point")
        # Lambda vanishes identically on this parameter ray; resampling
        # cannot help, so return the literal IEEE evaluation instead.
        with np.errstate(divide="ignore", invalid="ignore"):
            return complex(sum(_CONSTRAINTS[which][1](params, table))[0])
    return complex(sum(_CONSTRAINTS[which][1](params, table))[0])


def constraint_e21(params, z):
    """Symmetrized sum over S3 of the double+right-neighbour integrand."""
    return _single(params, z, "E21")


def constraint_e12(params, z):
    """Symmetrized sum over S3 of the double+left-neighbour integrand."""
    return _single(params, z, "E12")


def constraint_e22(params, z):
    """Symmetrized sum over S4 of the adjacent double-double integrand."""
    return _single(params, z, "E22")


@dataclass(frozen=True)
class SolvabilityVerdict:
    solvable: bool
    max_residual: float
    samples: int
    failing_constraint: str | None = None
    tol: float = 1e-9


def random_momenta(rng, shape, rmin=0.5, rmax=2.0):
    """Uniform draws on the annulus rmin <= |z| <= rmax."""
    r = rng.uniform(rmin, rmax, shape)
    ph = rng.uniform(0.0, 2 * np.pi, shape)
    return r * np.exp(1j * ph)


def is_cba_solvable(params, n_samples=20, tol=1e-9, seed=0, rng=None):
    """Randomized identity test of the three solvability constraint sums.

    Each constraint is evaluated at n_samples independent momentum tuples
    drawn on an annulus (resampled where Lambda degenerates); the residual is
    the sum magnitude relative to the largest individual summand, so the test
    is scale-invariant in the parameters.
    """
    params.check_gates()
    if rng is None:
        rng = np.random.default_rng(seed)
    worst = 0.0
    failing = None
    for which in ("E21", "E12", "E22"):
        M = _CONSTRAINTS[which][0]
        rel = np.empty(0)
        for _ in range(8):
            need = n_samples - rel.size
            if need <= 0:
                break
            Z = random_momenta(rng, (need, M))
            r, bad = _constraint_batch(params, Z, which)
            rel = np.concatenate([rel, r[~bad]])
        if rel.size < n_samples:
            raise RuntimeError("could not draw nonsingular momenta")
        m = float(np.max(rel))
        if m > worst:
            worst = m
        if m > tol and failing is None:
            failing = which
    return SolvabilityVerdict(solvable=worst <= tol, max_residual=worst,
                              samples=n_samples, failing_constraint=failing,
                              tol=tol)
