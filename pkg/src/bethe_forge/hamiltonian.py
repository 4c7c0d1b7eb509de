"""Two-site and full-chain Hamiltonians for three-state U(1)-invariant spin chains.

Conventions used throughout the package:

* Local basis |0>, |1>, |2> with s^z|j> = j|j>.  A two-site state |i1 i2>
  maps to the tensor index 3*i1 + i2, i.e. site 1 is the most significant
  trit.  This ordering is frozen: eigenvector comparisons depend on it.
* The two-site matrix carries ten off-diagonal amplitudes
  (p, q, t1, t2, s1, s2, t3, s3, tp, sp) plus a 3x3 array of diagonal
  entries v[i, j]; U(1) invariance (row and column trit sums equal) holds
  by construction.
* Chains are periodic: site L+1 is identified with site 1.

All arithmetic is complex double precision.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, replace

import numpy as np

OFFDIAG_KEYS = ("p", "q", "t1", "t2", "s1", "s2", "t3", "s3", "tp", "sp")

# (row pair, column pair) slots of the off-diagonal amplitudes
OFFDIAG_SLOTS = {
    "p": ((0, 1), (1, 0)),
    "q": ((1, 0), (0, 1)),
    "t1": ((2, 0), (1, 1)),
    "s1": ((1, 1), (2, 0)),
    "t2": ((0, 2), (1, 1)),
    "s2": ((1, 1), (0, 2)),
    "t3": ((1, 2), (2, 1)),
    "s3": ((2, 1), (1, 2)),
    "tp": ((0, 2), (2, 0)),
    "sp": ((2, 0), (0, 2)),
}

DEFAULT_L_MAX = 9


class GateViolation(ValueError):
    """Input lies outside the classification hypotheses (rank-2 symmetry or
    no pseudo-excitation channel)."""


def max_chain_length():
    """Dense-ED memory guard; override with the BETHE_FORGE_LMAX env var."""
    env = os.environ.get("BETHE_FORGE_LMAX")
    return int(env) if env else DEFAULT_L_MAX


@dataclass(frozen=True)
class HamiltonianParams:
    """Parameters of the two-site Hamiltonian: ten hopping/pair amplitudes
    and the 3x3 diagonal array v[i, j]."""

    p: complex = 0j
    q: complex = 0j
    t1: complex = 0j
    t2: complex = 0j
    s1: complex = 0j
    s2: complex = 0j
    t3: complex = 0j
    s3: complex = 0j
    tp: complex = 0j
    sp: complex = 0j
    v: np.ndarray = field(default_factory=lambda: np.zeros((3, 3), complex))

    def __post_init__(self):
        for k in OFFDIAG_KEYS:
            object.__setattr__(self, k, complex(getattr(self, k)))
        v = np.array(self.v, dtype=complex)
        if v.shape != (3, 3):
            raise ValueError("v must be a 3x3 array")
        v.setflags(write=False)
        object.__setattr__(self, "v", v)

    def offdiag(self):
        return {k: getattr(self, k) for k in OFFDIAG_KEYS}

    def replace(self, **kw):
        return replace(self, **kw)

    def has_rank1_symmetry(self):
        return any(abs(getattr(self, k)) > 0 for k in ("t1", "t2", "s1", "s2"))

    def has_pseudo_excitation(self):
        return any(abs(getattr(self, k)) > 0 for k in ("p", "q", "t3", "s3"))

    def check_gates(self):
        """Raise GateViolation unless both classification hypotheses hold."""
        if not self.has_rank1_symmetry():
            raise GateViolation(
                "rank-2 symmetry: (t1, t2, s1, s2) = (0, 0, 0, 0) is outside "
                "the classification hypotheses")
        if not self.has_pseudo_excitation():
            raise GateViolation(
                "no pseudo-excitation channel: (p, q, t3, s3) = (0, 0, 0, 0) "
                "is outside the classification hypotheses")


@dataclass(frozen=True)
class DiagonalInvariants:
    """Combinations of the diagonal entries invariant under telescoping."""

    V: complex = 0j
    X11: complex = 0j
    Y: complex = 0j
    X12: complex = 0j
    X21: complex = 0j
    X22: complex = 0j

    def as_dict(self):
        return {k: getattr(self, k) for k in ("V", "X11", "Y", "X12", "X21", "X22")}


@dataclass(frozen=True)
class ChainSpec:
    """Periodic chain of L three-state sites."""

    L: int
    boundary: str = "periodic"

    def __post_init__(self):
        if self.L < 2:
            raise ValueError("chain length must be at least 2")
        if self.boundary != "periodic":
            raise ValueError("only periodic boundaries are supported")
        if self.L > max_chain_length():
            raise ValueError(
                f"chain too large: L={self.L} exceeds L_max={max_chain_length()}")


def two_site_matrix(params):
    """The 9x9 two-site matrix in the |00>,|01>,...,|22> basis."""
    m = np.zeros((9, 9), complex)
    for key, ((r1, r2), (c1, c2)) in OFFDIAG_SLOTS.items():
        m[3 * r1 + r2, 3 * c1 + c2] = getattr(params, key)
    for i in range(3):
        for j in range(3):
            m[3 * i + j, 3 * i + j] += params.v[i, j]
    return m


def invariants(params):
    """Telescoping-invariant combinations of the diagonal entries."""
    v = params.v
    V = v[0, 1] + v[1, 0] - 2 * v[0, 0]
    return DiagonalInvariants(
        V=V,
        X11=v[1, 1] - v[0, 0] - V,
        Y=v[0, 2] + v[2, 0] - 2 * v[0, 0] - 2 * V,
        X12=v[1, 2] + v[2, 0] - v[1, 0] - v[0, 0] - 2 * V,
        X21=v[2, 1] + v[0, 2] - v[0, 1] - v[0, 0] - 2 * V,
        X22=v[2, 2] - v[0, 0] - 2 * V,
    )


def symmetric_diagonal(inv):
    """Diagonal array realizing the given invariants, symmetric in i <-> j.

    This is the canonical telescoping representative used by the family
    constructors and the reduction maps (v00 = 0, v01 = v10, v02 = v20).
    """
    V, Y = inv.V, inv.Y
    v = np.zeros((3, 3), complex)
    v[0, 1] = v[1, 0] = V / 2
    v[0, 2] = v[2, 0] = Y / 2 + V
    v[1, 1] = inv.X11 + V
    v[1, 2] = inv.X12 - Y / 2 + 1.5 * V
    v[2, 1] = inv.X21 - Y / 2 + 1.5 * V
    v[2, 2] = inv.X22 + 2 * V
    return v


def with_zero_v00(params):
    """Subtract v00 * Identity so the pseudo-vacuum has eigenvalue zero.

    On the coupling table this lowers every v[i, j] by the same constant.
    """
    return params.replace(v=params.v - params.v[0, 0] * np.ones((3, 3)))


# ---------------------------------------------------------------------------
# discrete transformations
# ---------------------------------------------------------------------------

def apply_parity(params):
    """Site-order reversal: p<->q, t1<->t2, s1<->s2, t3<->s3, tp<->sp, v -> v^T."""
    return HamiltonianParams(
        p=params.q, q=params.p, t1=params.t2, t2=params.t1,
        s1=params.s2, s2=params.s1, t3=params.s3, s3=params.t3,
        tp=params.sp, sp=params.tp, v=params.v.T,
    )


def apply_time_reversal(params):
    """Matrix transpose: p<->q, t1<->s1, t2<->s2, t3<->s3, tp<->sp; v fixed."""
    return HamiltonianParams(
        p=params.q, q=params.p, t1=params.s1, t2=params.s2,
        s1=params.t1, s2=params.t2, t3=params.s3, s3=params.t3,
        tp=params.sp, sp=params.tp, v=params.v,
    )


def apply_charge_conjugation(params):
    """Relabel the local states 0 <-> 2 on the matrix indices.

    On parameters: p<->s3, q<->t3, t1<->t2, s1<->s2, tp<->sp and
    v[i, j] -> v[2-i, 2-j].
    """
    return HamiltonianParams(
        p=params.s3, q=params.t3, t1=params.t2, t2=params.t1,
        s1=params.s2, s2=params.s1, t3=params.q, s3=params.p,
        tp=params.sp, sp=params.tp, v=params.v[::-1, ::-1],
    )


FRAME_ACTIONS = {
    "P": apply_parity,
    "C": apply_charge_conjugation,
    "T": apply_time_reversal,
}

FRAME_WORDS = ("", "P", "C", "T", "PC", "PT", "CT", "PCT")


def apply_frame(params, word):
    """Apply a word over {P, C, T} (the letters commute and are involutions)."""
    out = params
    for ch in word:
        out = FRAME_ACTIONS[ch](out)
    return out


def apply_gauge(params, g):
    """Conjugate by G (x) G with G = diag(g0, g1, g2).

    Only the combination g0*g2/g1^2 acts: it rescales (t1, t2) and inversely
    (s1, s2); all other parameters are unchanged.
    """
    g0, g1, g2 = (complex(x) for x in g)
    if g0 == 0 or g1 == 0 or g2 == 0:
        raise ValueError("singular gauge")
    gamma = g0 * g2 / g1**2
    return params.replace(
        t1=params.t1 * gamma, t2=params.t2 * gamma,
        s1=params.s1 / gamma, s2=params.s2 / gamma,
    )


def apply_telescopic(params, a):
    """Add A_j - A_{j+1} with diagonal A = diag(a0, a1, a2): v[i,j] += a_i - a_j."""
    a = np.asarray(a, dtype=complex)
    shift = a[:, None] - a[None, :]
    return params.replace(v=params.v + shift)


# ---------------------------------------------------------------------------
# chains and sectors
# ---------------------------------------------------------------------------

def _as_chain_spec(spec):
    return spec if isinstance(spec, ChainSpec) else ChainSpec(int(spec))


def _column_actions(m2):
    """For each two-site input pair, the list of (output pair, amplitude)."""
    cols = {}
    for c in range(9):
        nz = np.nonzero(m2[:, c])[0]
        cols[(c // 3, c % 3)] = [((r // 3, r % 3), m2[r, c]) for r in nz]
    return cols


def _apply_bonds(m2, states, index, L):
    dim = len(states)
    H = np.zeros((dim, dim), complex)
    cols = _column_actions(m2)
    for s in states:
        j = index[s]
        for bond in range(L):
            nxt = (bond + 1) % L
            for (r1, r2), val in cols[(s[bond], s[nxt])]:
                new = list(s)
                new[bond], new[nxt] = r1, r2
                H[index[tuple(new)], j] += val
    return H


def chain_matrix(params, spec):
    """Full 3^L x 3^L periodic chain matrix, sum of L embedded two-site terms."""
    spec = _as_chain_spec(spec)
    L = spec.L
    m2 = two_site_matrix(params)
    states = list(np.ndindex(*(3,) * L))
    index = {s: i for i, s in enumerate(states)}
    return _apply_bonds(m2, states, index, L)


def sector_basis(L, M):
    """Occupation strings over {0,1,2} of length L with digit sum M,
    in lexicographic order (site 1 first)."""
    if not 0 <= M <= 2 * L:
        return []
    out = []

    def rec(prefix, rem, sites_left):
        if sites_left == 0:
            if rem == 0:
                out.append(tuple(prefix))
            return
        for d in range(3):
            if d <= rem and rem - d <= 2 * (sites_left - 1):
                rec(prefix + [d], rem - d, sites_left - 1)

    rec([], M, L)
    return out


def sz_matrix(L):
    """Diagonal total-S^z in the full product basis."""
    states = list(np.ndindex(*(3,) * L))
    return np.diag([float(sum(s)) for s in states]).astype(complex)


def occupation_to_positions(s):
    """Occupation string -> sorted excitation-position tuple (1-based)."""
    xs = []
    for site, n in enumerate(s, start=1):
        xs.extend([site] * n)
    return tuple(xs)


def positions_to_occupation(xs, L):
    s = [0] * L
    for x in xs:
        s[x - 1] += 1
    if any(n > 2 for n in s):
        raise ValueError("more than two excitations on one site")
    return tuple(s)


# ---------------------------------------------------------------------------
# JSON wire format: complex numbers as [re, im]
# ---------------------------------------------------------------------------

def _c_to_pair(z):
    z = complex(z)
    return [z.real, z.imag]


def _pair_to_c(x):
    if isinstance(x, (int, float)):
        return complex(x)
    if isinstance(x, (list, tuple)) and len(x) == 2:
        return complex(float(x[0]), float(x[1]))
    raise ValueError(f"cannot parse complex value from {x!r}")


def params_to_dict(params):
    d = {k: _c_to_pair(getattr(params, k)) for k in OFFDIAG_KEYS}
    d["v"] = [[_c_to_pair(params.v[i, j]) for j in range(3)] for i in range(3)]
    return d


def params_from_dict(d):
    kw = {k: _pair_to_c(d[k]) for k in OFFDIAG_KEYS if k in d}
    v = np.zeros((3, 3), complex)
    if "v" in d:
        rows = d["v"]
        if len(rows) != 3 or any(len(r) != 3 for r in rows):
            raise ValueError("v must be a 3x3 array")
        for i in range(3):
            for j in range(3):
                v[i, j] = _pair_to_c(rows[i][j])
    return HamiltonianParams(v=v, **kw)
