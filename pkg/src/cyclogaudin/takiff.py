"""Truncated current algebra, degree-two PBW normal forms and the S(u) identity.

Modes are ``X[p]_{z_i}`` (``0 <= p < n_{z_i}``), equivariant modes ``X[p]_0``
with ``X`` in ``Pi_{p mod T} g`` (``0 <= p < n_0``) and ``X[p]_inf`` with
``X`` in ``Pi_{p mod T} g`` (``-(n_inf - 1) <= p <= -1``).  Infinity modes
carry the opposite bracket.

Normal order: infinity modes, then point modes by point index, then origin
modes; inside one site by ``|power|`` and then by local basis index.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from math import comb
from typing import NamedTuple

import numpy as np

from .lie_core import Automorphism, SimpleLieAlgebra, dual_bases, element_F, scalar_K

INF, POINT, ORIGIN = "inf", "z", "origin"
_KIND_RANK = {INF: 0, POINT: 1, ORIGIN: 2}


class ConfigurationError(ValueError):
    pass


class DegreeError(ValueError):
    pass


class Mode(NamedTuple):
    kind: str
    point: int  # point index for POINT modes, 0 otherwise
    power: int
    local: int  # index in the g basis (points) or in the eigenbasis of Pi_power


def binom(n: int, k: int) -> int:
    """Binomial coefficient, zero unless ``0 <= k <= n``."""
    if k < 0 or n < k:
        return 0
    return comb(n, k)


def check_orbits(z, omega: complex, T: int, tol: float = 1e-10) -> None:
    z = [complex(v) for v in z]
    for i, zi in enumerate(z):
        if abs(zi) < tol:
            raise ConfigurationError(f"point z[{i}] = {zi} must be nonzero")
    for i in range(len(z)):
        for j in range(i + 1, len(z)):
            for k in range(T):
                if abs(z[i] - omega**k * z[j]) < tol * (1 + abs(z[i])):
                    raise ConfigurationError(
                        f"Gamma-orbits of z[{i}] and z[{j}] collide (z[{i}] = omega^{k} z[{j}])"
                    )


class CurrentAlgebra:
    """Truncated, Gamma-equivariant current algebra with its mode basis."""

    def __init__(self, lie: SimpleLieAlgebra, aut: Automorphism, z, n_inf: int, n_sites, n0: int):
        self.lie, self.aut = lie, aut
        self.z = np.array([complex(v) for v in z], dtype=complex)
        self.n_sites = tuple(int(n) for n in n_sites)
        self.n_inf, self.n0 = int(n_inf), int(n0)
        if len(self.n_sites) != len(self.z):
            raise ConfigurationError("one truncation order per point is required")
        if min((self.n_inf, self.n0) + self.n_sites) < 1:
            raise ConfigurationError("all truncation orders must be >= 1")
        check_orbits(self.z, aut.omega, aut.T)
        T, d = aut.T, lie.dim
        modes, blocks = [], {}

        def add(kind, point, power, dim):
            blocks[(kind, point, power)] = (len(modes), dim)
            modes.extend(Mode(kind, point, power, j) for j in range(dim))

        for q in range(1, self.n_inf):
            add(INF, 0, -q, aut.eigen_dim(-q))
        for i, ni in enumerate(self.n_sites):
            for p in range(ni):
                add(POINT, i, p, d)
        for p in range(self.n0):
            add(ORIGIN, 0, p, aut.eigen_dim(p))
        self.modes = modes
        self.blocks = {k: v for k, v in blocks.items() if v[1] > 0}
        self._coord = {k % T: np.linalg.pinv(aut.eigenbasis(k).T) for k in range(T)}

    @property
    def N(self) -> int:
        return len(self.z)

    @property
    def dim(self) -> int:
        return len(self.modes)

    def expected_dim(self) -> int:
        a, d = self.aut, self.lie.dim
        return (
            sum(self.n_sites) * d
            + sum(a.eigen_dim(p) for p in range(self.n0))
            + sum(a.eigen_dim(-q) for q in range(1, self.n_inf))
        )

    def mode_vector(self, m: Mode) -> np.ndarray:
        """The g-component of a basis mode."""
        if m.kind == POINT:
            return self.lie.basis_vector(m.local)
        return self.aut.eigenbasis(m.power)[m.local]

    def label(self, m: Mode) -> str:
        if m.kind == POINT:
            return f"{self.lie.labels[m.local]}[{m.power}]_z{m.point + 1}"
        return f"b{m.power % self.aut.T}.{m.local}[{m.power}]_{m.kind}"

    def embedding(self, kind: str, point: int, power: int, check=None):
        """Linear map g -> mode coordinates for ``X[power]`` at a site, or None if truncated.

        For origin and infinity the argument must lie in ``Pi_power g``; when
        ``check`` (a matrix whose columns are the intended arguments) is given,
        membership is verified.
        """
        key = (kind, point, power)
        if key not in self.blocks:
            return None
        start, dim = self.blocks[key]
        E = np.zeros((self.dim, self.lie.dim), dtype=complex)
        if kind == POINT:
            E[start : start + dim] = np.eye(dim)
            return E
        if check is not None:
            P = self.aut.projector(power)
            if np.max(np.abs(P @ check - check), initial=0.0) > 1e-9:
                raise AssertionError(f"argument of {kind} mode at power {power} leaves Pi_{power} g")
        E[start : start + dim] = self._coord[power % self.aut.T]
        return E

    @cached_property
    def structure(self) -> np.ndarray:
        n, L = self.dim, self.lie
        C = np.zeros((n, n, n), dtype=complex)
        vecs = [self.mode_vector(m) for m in self.modes]
        for (kind, point, p), (s1, d1) in self.blocks.items():
            for (kind2, point2, q), (s2, d2) in self.blocks.items():
                if (kind, point) != (kind2, point2):
                    continue
                E = self.embedding(kind, point, p + q)
                if E is None:
                    continue
                for a in range(s1, s1 + d1):
                    for b in range(s2, s2 + d2):
                        br = L.bracket(vecs[a], vecs[b])
                        if kind == INF:
                            br = -br
                        C[a, b] = E @ br
        return C

    def truncation_ok(self, kind: str, power: int, point: int = 0) -> bool:
        if kind == POINT:
            return 0 <= power < self.n_sites[point]
        if kind == ORIGIN:
            return 0 <= power < self.n0
        return 1 <= -power <= self.n_inf - 1

    def bracket_residuals(self) -> tuple[float, float]:
        C = self.structure
        anti = float(np.max(np.abs(C + np.transpose(C, (1, 0, 2))), initial=0.0))
        t = np.einsum("ijm,mkn->ijkn", C, C)
        jac = t + np.transpose(t, (1, 2, 0, 3)) + np.transpose(t, (2, 0, 1, 3))
        return anti, float(np.max(np.abs(jac), initial=0.0))

    def without_infinity(self) -> "CurrentAlgebra":
        return CurrentAlgebra(self.lie, self.aut, self.z, 1, self.n_sites, self.n0)

    # -- element constructors -------------------------------------------------

    def zero(self) -> "UElement":
        n = self.dim
        return UElement(self, 0j, np.zeros(n, dtype=complex), np.zeros((n, n), dtype=complex))

    def scalar(self, c) -> "UElement":
        e = self.zero()
        e.const = complex(c)
        return e

    def linear(self, coeffs) -> "UElement":
        e = self.zero()
        e.lin = np.asarray(coeffs, dtype=complex).copy()
        return e

    def mode(self, kind: str, point: int, power: int, X) -> "UElement":
        """``X[power]`` at the given site (zero if truncated)."""
        X = np.asarray(X, dtype=complex)
        E = self.embedding(kind, point, power, check=X[:, None])
        if E is None:
            return self.zero()
        return self.linear(E @ X)

    def straighten(self, M) -> "UElement":
        """Normal form of ``sum_ab M[a, b] m_a m_b``."""
        low = np.tril(M, -1)
        e = self.zero()
        e.quad = np.triu(M) + low.T
        e.lin = np.einsum("ab,abk->k", low, self.structure)
        return e

    def pair_sum(self, left, right) -> "UElement":
        """Normal form of ``sum_a left_a right_a`` for rows of mode-coordinate matrices."""
        return self.straighten(np.asarray(left).T @ np.asarray(right))

    def casimir(self, left_map, left_site, right_map, right_site, coef=1.0) -> "UElement":
        """``coef * sum_a (left_map I_a)[..] (right_map I^a)[..]`` with sites ``(kind, point, power)``."""
        db = dual_bases(self.lie)
        lo = left_map @ db.lower.T  # columns: left_map I_a
        up = right_map @ db.upper.T
        El = self.embedding(*left_site, check=lo)
        Er = self.embedding(*right_site, check=up)
        if El is None or Er is None:
            return self.zero()
        return self.pair_sum((El @ lo).T * coef, (Er @ up).T)


@dataclass(eq=False)
class UElement:
    """Element of degree <= 2 of the truncated enveloping algebra, in PBW normal form."""

    alg: CurrentAlgebra
    const: complex
    lin: np.ndarray
    quad: np.ndarray  # upper triangular, quad[a, b] for a <= b

    @property
    def degree(self) -> int:
        if np.any(self.quad != 0):
            return 2
        if np.any(self.lin != 0):
            return 1
        return 0

    def copy(self) -> "UElement":
        return UElement(self.alg, self.const, self.lin.copy(), self.quad.copy())

    def _check(self, other: "UElement") -> None:
        if other.alg is not self.alg:
            raise ValueError("elements belong to different algebras")

    def __add__(self, other):
        if isinstance(other, UElement):
            self._check(other)
            return UElement(self.alg, self.const + other.const, self.lin + other.lin, self.quad + other.quad)
        return UElement(self.alg, self.const + other, self.lin.copy(), self.quad.copy())

    __radd__ = __add__

    def __neg__(self):
        return UElement(self.alg, -self.const, -self.lin, -self.quad)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, UElement):
            return u_product(self, other)
        return UElement(self.alg, self.const * other, self.lin * other, self.quad * other)

    def __rmul__(self, other):
        return self * other

    def __truediv__(self, c):
        return self * (1.0 / c)

    def max_abs(self) -> float:
        return float(max(abs(self.const), np.max(np.abs(self.lin), initial=0.0), np.max(np.abs(self.quad), initial=0.0)))

    def terms(self, tol: float = 0.0) -> dict:
        """Nonzero coefficients keyed by ``()``, ``(a,)`` or ``(a, b)`` with ``a <= b``."""
        out = {}
        if abs(self.const) > tol:
            out[()] = self.const
        for a in np.flatnonzero(np.abs(self.lin) > tol):
            out[(int(a),)] = self.lin[a]
        for a, b in np.argwhere(np.abs(self.quad) > tol):
            out[(int(a), int(b))] = self.quad[a, b]
        return out

    def pretty(self, tol: float = 1e-12) -> str:
        lab = [self.alg.label(m) for m in self.alg.modes]
        parts = []
        for k, v in self.terms(tol).items():
            parts.append(f"({v:.6g})" + "".join(" " + lab[a] for a in k))
        return " + ".join(parts) if parts else "0"


def u_product(x: UElement, y: UElement) -> UElement:
    x._check(y)
    if x.degree + y.degree > 2:
        raise DegreeError(f"product of degrees {x.degree} and {y.degree} exceeds 2")
    alg = x.alg
    out = alg.straighten(np.outer(x.lin, y.lin))
    out.const = x.const * y.const
    out.lin = out.lin + x.const * y.lin + y.const * x.lin
    out.quad = out.quad + x.const * y.quad + y.const * x.quad
    return out


def build_current_algebra(lie, aut, z, n_inf, n_sites, n0) -> CurrentAlgebra:
    return CurrentAlgebra(lie, aut, z, n_inf, n_sites, n0)


# -- A(u), S(u) -------------------------------------------------------------


def _check_u(alg: CurrentAlgebra, u: complex) -> None:
    if abs(u) < 1e-12:
        raise ValueError("u = 0 is a pole")
    for i, zi in enumerate(alg.z):
        for k in range(alg.aut.T):
            if abs(u - alg.aut.omega ** (-k) * zi) < 1e-12:
                raise ValueError(f"u lies on the pole omega^-{k} z[{i}]")


def current_matrix(alg: CurrentAlgebra, u: complex) -> np.ndarray:
    """Row ``j`` holds the mode coordinates of ``A(u)`` for ``X = b_j``."""
    _check_u(alg, u)
    aut, T = alg.aut, alg.aut.T
    om = aut.omega
    out = np.zeros((alg.lie.dim, alg.dim), dtype=complex)
    for i, zi in enumerate(alg.z):
        for k in range(T):
            Sk = aut.power(k)
            for n in range(alg.n_sites[i]):
                E = alg.embedding(POINT, i, n)
                out += (om ** (-k * n) / (u - om ** (-k) * zi) ** (n + 1)) * (E @ Sk).T
    for n in range(alg.n0):
        E = alg.embedding(ORIGIN, 0, n)
        if E is not None:
            out += (T / u ** (n + 1)) * (E @ aut.projector(n)).T
    for n in range(alg.n_inf - 1):
        E = alg.embedding(INF, 0, -n - 1)
        if E is not None:
            out += (T * u**n) * (E @ aut.projector(-n - 1)).T
    return out


def current_A_of_u(X, u: complex, alg: CurrentAlgebra) -> UElement:
    return alg.linear(np.asarray(X, dtype=complex) @ current_matrix(alg, u))


def S_of_u(u: complex, alg: CurrentAlgebra) -> UElement:
    """``S(u) = 1/2 I_a(u) I^a(u) + F(u)/u + K/u^2`` at the critical level."""
    L = alg.lie
    db = dual_bases(L)
    Am = current_matrix(alg, u)
    out = alg.pair_sum(0.5 * (db.lower @ Am), db.upper @ Am)
    F = element_F(L, alg.aut)
    out = out + alg.linear(F @ Am) / u
    return out + scalar_K(L, alg.aut) / u**2


# -- partial-fraction Hamiltonians ------------------------------------------


class HamiltonianFamily:
    """The u-independent coefficients ``H_{i,p}``, ``H_{0,p}``, ``H_{inf,p}``."""

    def __init__(self, alg: CurrentAlgebra):
        self.alg = alg
        L, aut = alg.lie, alg.aut
        self.T = aut.T
        self.F = element_F(L, aut)
        self.K = scalar_K(L, aut)
        top = 2 * max((alg.n_inf, alg.n0) + alg.n_sites) + 2
        self.site = {(i, p): self._site(i, p) for i in range(alg.N) for p in range(top)}
        self.origin = {p: self._origin(p) for p in range(top) if (p - 1) % self.T == 0}
        self.inf = {p: self._inf(p) for p in range(top) if (p + 2) % self.T == 0}

    def _site(self, i: int, p: int) -> UElement:
        alg, aut, T = self.alg, self.alg.aut, self.T
        om, z = aut.omega, alg.z
        Id = np.eye(alg.lie.dim)
        ni = alg.n_sites[i]
        H = alg.zero()
        for j in range(alg.N):
            if j == i:
                continue
            for l in range(T):
                Sl = aut.power(l)
                zij = z[i] - om ** (-l) * z[j]
                for n in range(ni - p):
                    for m in range(alg.n_sites[j]):
                        c = (-1) ** n * binom(n + m, m) * om ** (-l * m) / zij ** (n + m + 1)
                        H += alg.casimir(Id, (POINT, i, n + p), Sl, (POINT, j, m), c)
        for l in range(1, T):
            Sl = aut.power(l)
            d = (1 - om ** (-l)) * z[i]
            for r in range(ni - p):
                for m in range(ni):
                    c = om ** (-l * m) * (-1) ** r * binom(r + m, m) / d ** (r + m + 1)
                    H += alg.casimir(Id, (POINT, i, r + p), Sl, (POINT, i, m), 0.5 * c)
                    H += alg.casimir(Sl, (POINT, i, m), Id, (POINT, i, r + p), 0.5 * c)
        for n in range(p):
            H += alg.casimir(Id, (POINT, i, n), Id, (POINT, i, p - n - 1), 0.5)
        for n in range(ni - p):
            for m in range(alg.n0):
                c = T * (-1) ** n * binom(n + m, m) / z[i] ** (n + m + 1)
                H += alg.casimir(Id, (POINT, i, n + p), aut.projector(m), (ORIGIN, 0, m), c)
        for n in range(ni - p):
            H += alg.mode(POINT, i, n + p, self.F) * ((-1) ** n / z[i] ** (n + 1))
        for n in range(alg.n_inf):
            for m in range(ni - p):
                q = n + m + 1
                if q > alg.n_inf - 1:
                    continue
                c = T * z[i] ** n * binom(n + m, m)
                H += alg.casimir(aut.projector(-q), (INF, 0, -q), Id, (POINT, i, p + m), c)
        return H

    def _origin(self, p: int) -> UElement:
        alg, aut, T = self.alg, self.alg.aut, self.T
        P, z = aut.projector, alg.z
        H = alg.zero()
        # site-origin cross term: only origin powers >= p reach the pole at 0
        for i in range(alg.N):
            for n in range(alg.n_sites[i]):
                for m in range(alg.n0 - p):
                    c = T**2 * (-1) ** (n + 1) * binom(n + m, m) / z[i] ** (n + m + 1)
                    H += alg.casimir(P(-m - 1), (POINT, i, n), P(m + p), (ORIGIN, 0, m + p), c)
        # origin-infinity cross term, summed over origin powers n >= p
        for q in range(alg.n_inf - 1):
            n = p + q
            H += alg.casimir(P(n), (ORIGIN, 0, n), P(-q - 1), (INF, 0, -q - 1), T**2)
        for n in range(p):
            H += alg.casimir(P(n), (ORIGIN, 0, n), P(p - n - 1), (ORIGIN, 0, p - n - 1), T**2 / 2)
        if p >= 1:
            H += alg.mode(ORIGIN, 0, p - 1, P(p - 1) @ self.F) * T
        return H

    def _inf(self, p: int) -> UElement:
        alg, aut, T = self.alg, self.alg.aut, self.T
        P, z = aut.projector, alg.z
        H = alg.zero()
        for i in range(alg.N):
            for m in range(alg.n_inf - 1):
                for n in range(alg.n_sites[i]):
                    c = binom(m - 1 - p, n)
                    if c == 0:
                        continue
                    c = T**2 * z[i] ** (m - n - 1 - p) * c
                    H += alg.casimir(P(-m - 1), (INF, 0, -m - 1), P(m - p - 1), (POINT, i, n), c)
        for n in range(alg.n0):
            H += alg.casimir(P(n), (ORIGIN, 0, n), P(-p - n - 2), (INF, 0, -p - n - 2), T**2)
        for n in range(p + 1):
            H += alg.casimir(P(-n - 1), (INF, 0, -n - 1), P(-p + n - 1), (INF, 0, -p + n - 1), T**2 / 2)
        H += alg.mode(INF, 0, -p - 2, P(-p - 2) @ self.F) * T
        return H

    def evaluate(self, u: complex) -> UElement:
        """``K/u^2`` plus the partial-fraction sum over all families."""
        alg, om = self.alg, self.alg.aut.omega
        _check_u(alg, u)
        out = alg.scalar(self.K / u**2)
        for (i, p), H in self.site.items():
            coef = sum(
                om ** (-k * p + k) / (u - om ** (-k) * alg.z[i]) ** (p + 1) for k in range(self.T)
            )
            out += H * coef
        for p, H in self.origin.items():
            out += H / u ** (p + 1)
        for p, H in self.inf.items():
            out += H * u**p
        return out


_FAMILY_CACHE: dict = {}


def hamiltonian_family(alg: CurrentAlgebra) -> HamiltonianFamily:
    key = id(alg)
    fam = _FAMILY_CACHE.get(key)
    if fam is None or fam.alg is not alg:
        fam = HamiltonianFamily(alg)
        _FAMILY_CACHE[key] = fam
    return fam


def hamiltonian_pf_sum(u: complex, alg: CurrentAlgebra) -> UElement:
    return hamiltonian_family(alg).evaluate(u)


def sample_points(alg: CurrentAlgebra, count: int, seed: int) -> list[complex]:
    """Seeded points on an annulus, away from 0 and every Gamma-translate of z."""
    rng = np.random.default_rng(seed)
    om, T = alg.aut.omega, alg.aut.T
    poles = [0j] + [om**k * zi for zi in alg.z for k in range(T)]
    gaps = [abs(a - b) for i, a in enumerate(poles) for b in poles[i + 1 :]]
    gap = min(gaps) if gaps else 1.0
    mods = [abs(zi) for zi in alg.z] or [1.0]
    r_lo, r_hi = 0.5 * min(mods), 2.0 * max(mods)
    out = []
    while len(out) < count:
        r = rng.uniform(r_lo, r_hi)
        phi = rng.uniform(0, 2 * np.pi)
        u = r * np.exp(1j * phi)
        if min(abs(u - q) for q in poles) >= 0.1 * gap:
            out.append(complex(u))
    return out


def surat_residual(alg: CurrentAlgebra, u: complex) -> float:
    """Relative coefficient-wise mismatch between S(u) and its partial-fraction form."""
    s = S_of_u(u, alg)
    h = hamiltonian_pf_sum(u, alg)
    return (s - h).max_abs() / (1.0 + max(s.max_abs(), h.max_abs()))


# -- residue theorem utility ------------------------------------------------


@dataclass
class RationalFunction:
    """``sum_i sum_k coeffs[i][k] / (t - poles[i])^(k+1) + sum_n poly[n] t^n``."""

    poles: list
    coeffs: list
    poly: list

    def __call__(self, t: complex) -> complex:
        val = sum(c * t**n for n, c in enumerate(self.poly))
        for x, cs in zip(self.poles, self.coeffs):
            val += sum(c / (t - x) ** (k + 1) for k, c in enumerate(cs))
        return val

    def laurent_at(self, x0: complex, order: int) -> dict:
        """Coefficients of ``(t - x0)^n`` for ``n >= -max pole order`` up to ``order``."""
        out: dict = {}
        for n, c in enumerate(self.poly):
            # t^n = (x0 + s)^n
            for j in range(n + 1):
                out[j] = out.get(j, 0) + c * comb(n, j) * x0 ** (n - j)
        for x, cs in zip(self.poles, self.coeffs):
            d = x0 - x
            for k, c in enumerate(cs):
                if abs(d) < 1e-14:
                    out[-k - 1] = out.get(-k - 1, 0) + c
                    continue
                # (d + s)^(-k-1) = sum_j binom(-k-1, j) d^(-k-1-j) s^j
                for j in range(order + 1):
                    coef = (-1) ** j * comb(k + j, j) * d ** (-k - 1 - j)
                    out[j] = out.get(j, 0) + c * coef
        return out

    def laurent_at_infinity(self, order: int) -> dict:
        """Coefficients of ``t^n`` in the expansion in powers of ``1/t`` (n down to -order)."""
        out: dict = {}
        for n, c in enumerate(self.poly):
            out[n] = out.get(n, 0) + c
        for x, cs in zip(self.poles, self.coeffs):
            for k, c in enumerate(cs):
                # (t - x)^(-k-1) = t^(-k-1) sum_j binom(k+j, j) x^j t^-j
                for j in range(order):
                    e = -k - 1 - j
                    if e < -order:
                        break
                    out[e] = out.get(e, 0) + c * comb(k + j, j) * x**j
        return out


def residue_identity_check(f: RationalFunction) -> float:
    """``|-res_{1/t} t^2 f + sum_i res_{t - x_i} f|``."""
    at_inf = f.laurent_at_infinity(order=2)
    total = -at_inf.get(-1, 0)
    for x in f.poles:
        total += f.laurent_at(x, order=0).get(-1, 0)
    return abs(total)


__all__ = [
    "Mode",
    "CurrentAlgebra",
    "UElement",
    "ConfigurationError",
    "DegreeError",
    "build_current_algebra",
    "u_product",
    "current_A_of_u",
    "current_matrix",
    "S_of_u",
    "HamiltonianFamily",
    "hamiltonian_family",
    "hamiltonian_pf_sum",
    "sample_points",
    "surat_residual",
    "RationalFunction",
    "residue_identity_check",
    "binom",
]
