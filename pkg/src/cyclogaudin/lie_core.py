"""Simple Lie algebras, finite-order automorphisms and derived data.

The algebra is built from its root system with the Frenkel-Kac sign cocycle.
Basis order is ``H_1..H_r, E_beta (beta in positive roots), F_beta``, positive
roots sorted by height and then lexicographically on simple-root coordinates.

Sign convention: with ``eps(alpha_i, alpha_j) = -1`` if ``i == j`` or
(``i < j`` and the nodes are joined), ``+1`` otherwise, extended
bimultiplicatively, we set ``[e_a, e_b] = eps(a, b) e_{a+b}`` and
``[e_a, e_{-a}] = -h_a``.  The basis uses ``E_a = e_a`` and ``F_a = -e_{-a}``
so that ``[E_a, F_a] = H_a``.

Weights live in simple-root coordinates throughout.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

SUPPORTED = {("A", 1), ("A", 2), ("A", 3), ("A", 4), ("D", 4)}


class UnsupportedAlgebraError(ValueError):
    pass


class AutomorphismError(ValueError):
    pass


def cartan_matrix(series: str, rank: int) -> np.ndarray:
    if (series, rank) not in SUPPORTED:
        raise UnsupportedAlgebraError(
            f"unsupported algebra {series}_{rank}; supported: "
            + ", ".join(f"{s}_{r}" for s, r in sorted(SUPPORTED))
        )
    A = 2 * np.eye(rank, dtype=int)
    edges = [(i, i + 1) for i in range(rank - 1)]
    if series == "D":
        edges = [(0, 1), (1, 2), (1, 3)]
    for i, j in edges:
        A[i, j] = A[j, i] = -1
    return A


def _positive_roots(A: np.ndarray) -> list[tuple[int, ...]]:
    # simply-laced: alpha + alpha_i is a root iff (alpha, alpha_i) = -1
    r = A.shape[0]
    simple = [tuple(int(i == j) for j in range(r)) for i in range(r)]
    roots = set(simple)
    frontier = list(simple)
    while frontier:
        new = []
        for a in frontier:
            for i in range(r):
                if np.dot(A[i], a) == -1:
                    b = tuple(a[j] + (j == i) for j in range(r))
                    if b not in roots:
                        roots.add(b)
                        new.append(b)
        frontier = new
    return sorted(roots, key=lambda a: (sum(a), tuple(-x for x in a)))


@dataclass(frozen=True, eq=False)
class SimpleLieAlgebra:
    """Cartan-Weyl basis, structure constants and the normalized invariant form."""

    series: str
    rank: int
    cartan: np.ndarray
    positive_roots: list
    structure: np.ndarray  # [b_i, b_j] = sum_k structure[i, j, k] b_k
    form: np.ndarray
    dual_coxeter: int

    @property
    def dim(self) -> int:
        return self.rank + 2 * len(self.positive_roots)

    @property
    def n_pos(self) -> int:
        return len(self.positive_roots)

    def h_index(self, i: int) -> int:
        return i

    def e_index(self, k: int) -> int:
        return self.rank + k

    def f_index(self, k: int) -> int:
        return self.rank + self.n_pos + k

    @cached_property
    def root_index(self) -> dict:
        return {a: k for k, a in enumerate(self.positive_roots)}

    @cached_property
    def labels(self) -> list[str]:
        def name(a):
            return "".join(str(x) for x in a)

        return (
            [f"H{i + 1}" for i in range(self.rank)]
            + [f"E{name(a)}" for a in self.positive_roots]
            + [f"F{name(a)}" for a in self.positive_roots]
        )

    @cached_property
    def height(self) -> np.ndarray:
        return np.array([sum(a) for a in self.positive_roots])

    def bracket(self, x, y) -> np.ndarray:
        return np.einsum("i,j,ijk->k", x, y, self.structure)

    @cached_property
    def ad(self) -> np.ndarray:
        """``ad[i]`` is the matrix of ``ad_{b_i}`` acting on column vectors."""
        return np.transpose(self.structure, (0, 2, 1))

    def basis_vector(self, i: int) -> np.ndarray:
        v = np.zeros(self.dim, dtype=complex)
        v[i] = 1.0
        return v

    @cached_property
    def h_gram(self) -> np.ndarray:
        r = self.rank
        return self.form[:r, :r]

    @cached_property
    def weight_gram(self) -> np.ndarray:
        """Gram matrix of the induced form on h* in simple-root coordinates."""
        A = self.cartan.astype(float)
        return A.T @ np.linalg.inv(self.h_gram) @ A

    def pair(self, lam, mu) -> complex:
        return np.asarray(lam) @ self.weight_gram @ np.asarray(mu)

    def weight_values(self, lam) -> np.ndarray:
        """Values ``lam(H_i)`` of a weight given in simple-root coordinates."""
        return self.cartan @ np.asarray(lam)

    def from_fundamental(self, labels) -> np.ndarray:
        return np.linalg.solve(self.cartan.astype(float), np.asarray(labels, dtype=complex))

    def weight_on(self, lam, x) -> complex:
        """Evaluate ``lam`` on the Cartan component of ``x`` (zero on root vectors)."""
        return self.weight_values(lam) @ np.asarray(x)[: self.rank]

    @cached_property
    def rho(self) -> np.ndarray:
        return 0.5 * np.sum(np.array(self.positive_roots, dtype=float), axis=0)

    @cached_property
    def highest_root(self) -> tuple:
        return self.positive_roots[-1]

    def jacobi_residual(self) -> float:
        C = self.structure
        # [[x,y],z] + [[y,z],x] + [[z,x],y]
        t = np.einsum("ijm,mkn->ijkn", C, C)
        res = t + np.transpose(t, (1, 2, 0, 3)) + np.transpose(t, (2, 0, 1, 3))
        return float(np.max(np.abs(res)))

    def invariance_residual(self) -> float:
        # <[x,y],z> + <y,[x,z]>
        C, G = self.structure, self.form
        t = np.einsum("ijm,mk->ijk", C, G) + np.einsum("ikm,jm->ijk", C, G)
        return float(np.max(np.abs(t)))

    def to_json(self) -> dict:
        nz = np.argwhere(np.abs(self.structure) > 1e-12)
        return {
            "series": self.series,
            "rank": self.rank,
            "basis": self.labels,
            "cartan": self.cartan.tolist(),
            "positive_roots": [list(a) for a in self.positive_roots],
            "structure_constants": [
                [int(i), int(j), int(k), float(self.structure[i, j, k])] for i, j, k in nz
            ],
            "dual_coxeter": self.dual_coxeter,
        }


def build_simple_lie_algebra(series: str, rank: int) -> SimpleLieAlgebra:
    A = cartan_matrix(series, rank)
    pos = _positive_roots(A)
    r, n = rank, len(pos)
    dim = r + 2 * n
    s = np.zeros((r, r), dtype=int)
    for i in range(r):
        for j in range(r):
            s[i, j] = int(i == j or (i < j and A[i, j] == -1))

    def eps(a, b):
        return -1 if (np.asarray(a) @ s @ np.asarray(b)) % 2 else 1

    # e-basis: H_i, e_a (a > 0), e_{-a}
    roots = [np.array(a) for a in pos] + [-np.array(a) for a in pos]
    index = {tuple(a): r + k for k, a in enumerate(roots)}
    C = np.zeros((dim, dim, dim))
    for i in range(r):
        for k, a in enumerate(roots):
            val = A[i] @ a
            C[i, r + k, r + k] = val
            C[r + k, i, r + k] = -val
    for ka, a in enumerate(roots):
        for kb, b in enumerate(roots):
            c = a + b
            if not c.any():
                # [e_a, e_{-a}] = eps(a,-a) h_a with eps(a,-a) = -1
                sign = eps(a, b)
                for i in range(r):
                    C[r + ka, r + kb, i] = sign * a[i]
            elif tuple(c) in index:
                C[r + ka, r + kb, index[tuple(c)]] = eps(a, b)
    # change to F_a = -e_{-a}
    P = np.ones(dim)
    P[r + n :] = -1.0
    C = np.einsum("i,j,ijk,k->ijk", P, P, C, P)

    kill = np.einsum("ikj,ljk->il", np.transpose(C, (0, 2, 1)), np.transpose(C, (0, 2, 1)))
    # normalize so that long roots have square length 2
    theta = np.array(pos[-1], dtype=float)
    hk = kill[:r, :r]
    vals = A @ theta
    theta_sq_kill = vals @ np.linalg.inv(hk) @ vals
    # form = kill / (2 h^vee); induced form on h* scales inversely
    scale = theta_sq_kill / 2.0
    form = kill * scale
    hv = int(round(1.0 / (2.0 * scale)))
    form[np.abs(form) < 1e-14] = 0.0
    return SimpleLieAlgebra(series, rank, A, pos, C, form, hv)


@dataclass(frozen=True, eq=False)
class DualBasisPair:
    """Rows of ``lower`` are the ``I_a``; rows of ``upper`` are the ``I^a``."""

    lower: np.ndarray
    upper: np.ndarray

    def pairing(self, form) -> np.ndarray:
        return self.lower @ form @ self.upper.T


def dual_bases(L: SimpleLieAlgebra) -> DualBasisPair:
    if abs(np.linalg.det(L.form)) < 1e-12:
        raise RuntimeError("invariant form is singular")
    lower = np.eye(L.dim)
    upper = np.linalg.inv(L.form).T
    return DualBasisPair(lower, upper)


@dataclass(frozen=True, eq=False)
class Automorphism:
    """Finite-order automorphism ``sigma`` with cyclic group of order ``T``."""

    lie: SimpleLieAlgebra
    perm: tuple
    taus: tuple
    T: int
    omega: complex
    matrix: np.ndarray  # columns: sigma(b_j)
    root_taus: np.ndarray  # tau_alpha for each positive root
    root_perm: tuple  # index of sigma(alpha)
    tol: float = 1e-10
    _pow_cache: dict = field(default_factory=dict, repr=False)

    def power(self, m: int) -> np.ndarray:
        m %= self.T
        if m not in self._pow_cache:
            self._pow_cache[m] = np.linalg.matrix_power(self.matrix, m)
        return self._pow_cache[m]

    def projector(self, k: int) -> np.ndarray:
        """Projector onto the ``omega^k`` eigenspace of sigma on g."""
        k %= self.T
        key = ("P", k)
        if key not in self._pow_cache:
            P = sum(self.omega ** (-m * k) * self.power(m) for m in range(self.T)) / self.T
            self._pow_cache[key] = P
        return self._pow_cache[key]

    @cached_property
    def dual_matrix(self) -> np.ndarray:
        """Matrix of ``L_sigma: eta -> eta o sigma^{-1}`` in simple-root coordinates."""
        L = self.lie
        r = L.rank
        Sh = self.matrix[:r, :r]
        A = L.cartan.astype(float)
        return np.linalg.inv(A) @ np.linalg.inv(Sh).T @ A

    def dual_power(self, m: int) -> np.ndarray:
        return np.linalg.matrix_power(self.dual_matrix, m % self.T)

    def projector_dual(self, k: int) -> np.ndarray:
        k %= self.T
        return sum(self.omega ** (-m * k) * self.dual_power(m) for m in range(self.T)) / self.T

    def sigma_dual(self, eta) -> np.ndarray:
        return self.dual_matrix @ np.asarray(eta)

    def eigenbasis(self, k: int) -> np.ndarray:
        """Rows form a basis of ``Pi_k g`` chosen among projected basis vectors."""
        k %= self.T
        key = ("B", k)
        if key not in self._pow_cache:
            P = self.projector(k)
            rows = []
            for j in range(self.lie.dim):
                v = P[:, j]
                if np.max(np.abs(v)) < 1e-12:
                    continue
                trial = np.array(rows + [v])
                if np.linalg.matrix_rank(trial, tol=1e-9) == len(rows) + 1:
                    rows.append(v)
            B = np.array(rows, dtype=complex).reshape(len(rows), self.lie.dim)
            self._pow_cache[key] = B
        return self._pow_cache[key]

    def eigen_dim(self, k: int) -> int:
        return self.eigenbasis(k).shape[0]

    @cached_property
    def orbits(self) -> list[tuple[int, ...]]:
        """Orbits of the diagram permutation on simple-root indices."""
        seen, out = set(), []
        for i in range(self.lie.rank):
            if i in seen:
                continue
            orb, j = [], i
            while j not in orb:
                orb.append(j)
                j = self.perm[j]
            seen.update(orb)
            out.append(tuple(sorted(orb)))
        return out

    def orbit_depth(self, root_coords) -> tuple:
        """Sum of simple-root coordinates over each diagram orbit (Pi_0-weight key)."""
        c = np.asarray(root_coords)
        return tuple(int(round(sum(c[i].real for i in o))) for o in self.orbits)

    def homomorphism_residual(self) -> float:
        L, S = self.lie, self.matrix
        lhs = np.einsum("kl,ijl->ijk", S, L.structure)
        rhs = np.einsum("ai,bj,abk->ijk", S, S, L.structure)
        scale = 1.0 + np.max(np.abs(L.structure))
        return float(np.max(np.abs(lhs - rhs)) / scale)

    def form_residual(self) -> float:
        S, G = self.matrix, self.lie.form
        return float(np.max(np.abs(S.T @ G @ S - G)))

    def order_residual(self) -> float:
        # power() reduces mod T, so raise the matrix directly
        return float(np.max(np.abs(np.linalg.matrix_power(self.matrix, self.T) - np.eye(self.lie.dim))))

    def projector_residual(self) -> float:
        T, d = self.T, self.lie.dim
        worst = np.max(np.abs(sum(self.projector(k) for k in range(T)) - np.eye(d)))
        for k in range(T):
            Pk = self.projector(k)
            worst = max(worst, np.max(np.abs(self.matrix @ Pk - self.omega**k * Pk)))
            for l in range(T):
                target = Pk if k == l else 0.0
                worst = max(worst, np.max(np.abs(Pk @ self.projector(l) - target)))
        return float(worst)

    def is_chi_admissible(self, chi, tol: float = 1e-12) -> tuple[bool, float]:
        chi = np.asarray(chi, dtype=complex)
        res = float(np.max(np.abs(self.sigma_dual(chi) - self.omega * chi), initial=0.0))
        scale = 1.0 + float(np.max(np.abs(chi), initial=0.0))
        return res <= tol * scale, res

    def to_json(self) -> dict:
        return {
            "diagram_perm": list(self.perm),
            "tau_simple": [[complex(t).real, complex(t).imag] for t in self.taus],
            "T": self.T,
            "omega": [self.omega.real, self.omega.imag],
            "sigma_matrix": [[[v.real, v.imag] for v in row] for row in self.matrix],
        }


def _is_primitive_root(omega: complex, T: int, tol: float = 1e-12) -> bool:
    if abs(omega**T - 1) > tol:
        return False
    return all(abs(omega**d - 1) > tol for d in range(1, T))


def build_automorphism(L: SimpleLieAlgebra, diagram_perm, taus, T: int, omega=None) -> Automorphism:
    r = L.rank
    perm = tuple(int(p) for p in diagram_perm)
    if sorted(perm) != list(range(r)):
        raise AutomorphismError(f"diagram_perm {perm} is not a permutation of {r} nodes")
    A = L.cartan
    if any(A[perm[i], perm[j]] != A[i, j] for i in range(r) for j in range(r)):
        raise AutomorphismError(f"diagram_perm {perm} is not a Dynkin diagram symmetry")
    if T < 1:
        raise AutomorphismError("T must be a positive integer")
    if omega is None:
        omega = cmath.exp(2j * cmath.pi / T)
    omega = complex(omega)
    if not _is_primitive_root(omega, T, 1e-10):
        raise AutomorphismError(f"omega={omega} is not a primitive {T}-th root of unity")
    taus = tuple(complex(t) for t in taus)
    if len(taus) != r:
        raise AutomorphismError(f"expected {r} tau values, got {len(taus)}")
    for i, t in enumerate(taus):
        if min(abs(t - omega**k) for k in range(T)) > 1e-10:
            raise AutomorphismError(f"tau[{i}]={t} is not a power of omega")

    def permute_root(a):
        b = [0] * r
        for i in range(r):
            b[perm[i]] += a[i]
        return tuple(b)

    root_perm = tuple(L.root_index[permute_root(a)] for a in L.positive_roots)
    S = np.zeros((L.dim, L.dim), dtype=complex)
    for i in range(r):
        S[perm[i], i] = 1.0
    simple = {tuple(int(i == j) for j in range(r)): i for i in range(r)}
    for k, a in enumerate(L.positive_roots):
        if a in simple:
            i = simple[a]
            S[L.e_index(root_perm[k]), L.e_index(k)] = taus[i]
            S[L.f_index(root_perm[k]), L.f_index(k)] = 1.0 / taus[i]
            continue
        for i in range(r):
            b = tuple(a[j] - (j == i) for j in range(r))
            if b in L.root_index:
                kb = L.root_index[b]
                break
        else:  # pragma: no cover - every non-simple root has such a split
            raise AutomorphismError(f"cannot decompose root {a}")
        ki = L.root_index[tuple(int(i == j) for j in range(r))]
        for idx in (L.e_index, L.f_index):
            N = L.structure[idx(ki), idx(kb), idx(k)]
            val = L.bracket(S[:, idx(ki)], S[:, idx(kb)]) / N
            S[:, idx(k)] = val
    root_taus = np.array(
        [S[L.e_index(root_perm[k]), L.e_index(k)] for k in range(L.n_pos)], dtype=complex
    )
    aut = Automorphism(L, perm, taus, T, omega, S, root_taus, root_perm)
    if aut.homomorphism_residual() > 1e-10:
        raise AutomorphismError("extension of sigma is not a Lie algebra automorphism")
    if aut.order_residual() > 1e-10:
        raise AutomorphismError(f"order of sigma does not divide T={T}")
    return aut


def element_F(L: SimpleLieAlgebra, aut: Automorphism) -> np.ndarray:
    """``F = 1/2 sum_p omega^p [sigma^p I^a, I_a] / (omega^p - 1)``."""
    db = dual_bases(L)
    F = np.zeros(L.dim, dtype=complex)
    for p in range(1, aut.T):
        w = aut.omega**p
        up = db.upper @ aut.power(p).T  # rows sigma^p I^a
        br = np.einsum("ai,aj,ijk->k", up, db.lower, L.structure)
        F += 0.5 * w * br / (w - 1)
    if np.max(np.abs(aut.matrix @ F - F)) > 1e-10:
        raise AssertionError("F is not sigma-invariant")
    return F


def scalar_K(L: SimpleLieAlgebra, aut: Automorphism, level=None) -> complex:
    if level is None:
        level = -L.dual_coxeter
    db = dual_bases(L)
    K = 0.0j
    for p in range(1, aut.T):
        w = aut.omega**p
        tr = np.einsum("ai,ij,aj->", db.upper, aut.power(p).T @ L.form, db.lower)
        K += 0.5 * w * tr * level / (w - 1) ** 2
    return complex(K)


def lambda0_trace(L: SimpleLieAlgebra, aut: Automorphism) -> np.ndarray:
    """``Lambda_0(h) = sum_r tr_n(sigma^{-r} ad_h) / (1 - omega^r)``, in root coordinates."""
    r = L.rank
    n_idx = [L.e_index(k) for k in range(L.n_pos)]
    vals = np.zeros(r, dtype=complex)
    for rr in range(1, aut.T):
        Sinv = aut.power(-rr)
        for i in range(r):
            M = (Sinv @ L.ad[i])[np.ix_(n_idx, n_idx)]
            vals[i] += np.trace(M) / (1 - aut.omega**rr)
    return np.linalg.solve(L.cartan.astype(float), vals)


def lambda0_roots(L: SimpleLieAlgebra, aut: Automorphism) -> np.ndarray:
    """Same weight through sigma-fixed roots and products of tau's."""
    lam = np.zeros(L.rank, dtype=complex)
    for rr in range(1, aut.T):
        for k, a in enumerate(L.positive_roots):
            chain, j = [], k
            for _ in range(rr):
                chain.append(j)
                j = aut.root_perm[j]
            if j != k:
                continue
            coef = np.prod([1.0 / aut.root_taus[c] for c in chain])
            lam += coef * np.array(a) / (1 - aut.omega**rr)
    return lam


def sigma_dual(aut: Automorphism, eta) -> np.ndarray:
    return aut.sigma_dual(eta)


def coadjoint_centralizer(L: SimpleLieAlgebra, aut: Automorphism, chi) -> np.ndarray:
    """Rows span ``{X in g^sigma : chi([X, Y]) = 0 for all Y in Pi_{-1} g}``."""
    B0 = aut.eigenbasis(0)
    Bm = aut.eigenbasis(-1)
    chi_g = chi_functional(L, chi)
    if B0.shape[0] == 0:
        return B0
    M = np.einsum("ai,bj,ijk,k->ab", B0, Bm, L.structure, chi_g) if Bm.shape[0] else np.zeros((B0.shape[0], 0))
    if M.shape[1] == 0:
        return B0
    _, s, vh = np.linalg.svd(M.T)
    rank = int(np.sum(s > 1e-10 * max(1.0, s[0] if len(s) else 1.0)))
    null = vh[rank:].conj()
    return null @ B0


def chi_functional(L: SimpleLieAlgebra, chi) -> np.ndarray:
    """Coefficients of chi extended by zero on n and n-, as a functional on g."""
    out = np.zeros(L.dim, dtype=complex)
    out[: L.rank] = L.weight_values(np.asarray(chi, dtype=complex))
    return out


__all__ = [
    "SimpleLieAlgebra",
    "DualBasisPair",
    "Automorphism",
    "UnsupportedAlgebraError",
    "AutomorphismError",
    "build_simple_lie_algebra",
    "dual_bases",
    "build_automorphism",
    "element_F",
    "scalar_K",
    "lambda0_trace",
    "lambda0_roots",
    "sigma_dual",
    "coadjoint_centralizer",
    "chi_functional",
]
