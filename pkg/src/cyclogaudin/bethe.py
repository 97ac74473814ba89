"""Cyclotomic Bethe equations, the recursive weight function and eigenvector checks.

The terms ``<alpha, lambda_0>`` and ``<alpha, chi>`` in the Bethe equations and
the eigenvalues carry the factors ``origin_scale`` and ``chi_scale``.  Both
default to ``T``, the normalization under which the origin module is acted on
by ``g^sigma`` directly and ``chi`` enters the Hamiltonians through
``T I^a chi(Pi_{-1} I_a)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .lie_core import Automorphism, SimpleLieAlgebra, lambda0_roots
from .rep_blocks import TensorModule, _axpy, _prune


class DomainError(ValueError):
    pass


@dataclass(eq=False)
class BetheProblem:
    lie: SimpleLieAlgebra
    aut: Automorphism
    z: np.ndarray
    lams: list  # site weights, simple-root coordinates
    lam0: np.ndarray
    chi: np.ndarray
    colors: tuple  # 0-based simple-root indices
    origin_scale: complex | None = None
    chi_scale: complex | None = None
    Lam0: np.ndarray = field(init=False)

    def __post_init__(self):
        L = self.lie
        self.z = np.array([complex(v) for v in self.z], dtype=complex)
        self.lams = [np.asarray(l, dtype=complex) for l in self.lams]
        self.lam0 = np.asarray(self.lam0, dtype=complex)
        self.chi = np.asarray(self.chi, dtype=complex)
        self.colors = tuple(int(c) for c in self.colors)
        if any(c < 0 or c >= L.rank for c in self.colors):
            raise DomainError(f"colors must lie in 0..{L.rank - 1}")
        if self.origin_scale is None:
            self.origin_scale = self.aut.T
        if self.chi_scale is None:
            self.chi_scale = self.aut.T
        self.Lam0 = lambda0_roots(L, self.aut)

    @property
    def T(self) -> int:
        return self.aut.T

    @property
    def omega(self) -> complex:
        return self.aut.omega

    @property
    def m(self) -> int:
        return len(self.colors)

    def simple(self, c: int) -> np.ndarray:
        return np.eye(self.lie.rank)[c].astype(complex)

    def pair(self, a, b) -> complex:
        return complex(self.lie.pair(a, b))

    def Lr(self, r: int, eta) -> np.ndarray:
        return self.aut.dual_power(r) @ np.asarray(eta)


@dataclass
class BetheSolution:
    roots: np.ndarray
    residual: float
    iterations: int
    key: tuple


def lambda_infinity(p: BetheProblem) -> np.ndarray:
    P0 = p.aut.projector_dual(0)
    out = p.lam0.copy()
    for l in p.lams:
        out = out + P0 @ l
    for c in p.colors:
        out = out - P0 @ p.simple(c)
    return out


def check_roots(w, p: BetheProblem, tol: float = 1e-9) -> None:
    w = np.asarray(w, dtype=complex)
    om, T = p.omega, p.T
    for j, wj in enumerate(w):
        if abs(wj) < tol:
            raise DomainError(f"root w[{j}] sits at the origin")
        for i, zi in enumerate(p.z):
            if min(abs(wj - om**r * zi) for r in range(T)) < tol:
                raise DomainError(f"root w[{j}] lies on the orbit of z[{i}]")
        for k in range(j):
            if min(abs(wj - om**r * w[k]) for r in range(T)) < tol:
                raise DomainError(f"roots w[{k}] and w[{j}] share an orbit")


def _tables(p: BetheProblem):
    T, m, N = p.T, p.m, len(p.z)
    al = [p.simple(c) for c in p.colors]
    A_site = np.array([[[p.pair(al[j], p.Lr(r, p.lams[i])) for r in range(T)] for i in range(N)] for j in range(m)])
    A_root = np.array([[[p.pair(al[j], p.Lr(r, al[k])) for r in range(T)] for k in range(m)] for j in range(m)])
    const = np.array(
        [
            -0.5 * sum(A_root[j, j, r] for r in range(1, T))
            + p.origin_scale * p.pair(al[j], p.lam0)
            + p.pair(al[j], p.Lam0)
            for j in range(m)
        ]
    )
    twist = np.array([p.chi_scale * p.pair(al[j], p.chi) for j in range(m)])
    return A_site.reshape(m, N, T), A_root.reshape(m, m, T), const, twist


def bethe_residual(w, p: BetheProblem, check: bool = True) -> np.ndarray:
    w = np.asarray(w, dtype=complex)
    if check:
        check_roots(w, p)
    m, T, om = p.m, p.T, p.omega
    if m == 0:
        return np.zeros(0, dtype=complex)
    A_site, A_root, const, twist = _tables(p)
    pw = om ** np.arange(T)
    out = np.zeros(m, dtype=complex)
    for j in range(m):
        out[j] = np.sum(A_site[j] / (w[j] - np.outer(p.z, pw)))
        for k in range(m):
            if k != j:
                out[j] -= np.sum(A_root[j, k] / (w[j] - pw * w[k]))
        out[j] += const[j] / w[j] + twist[j]
    return out


def bethe_jacobian(w, p: BetheProblem) -> np.ndarray:
    w = np.asarray(w, dtype=complex)
    m, T, om = p.m, p.T, p.omega
    A_site, A_root, const, _ = _tables(p)
    pw = om ** np.arange(T)
    J = np.zeros((m, m), dtype=complex)
    for j in range(m):
        J[j, j] = -np.sum(A_site[j] / (w[j] - np.outer(p.z, pw)) ** 2) - const[j] / w[j] ** 2
        for k in range(m):
            if k == j:
                continue
            d = w[j] - pw * w[k]
            J[j, j] += np.sum(A_root[j, k] / d**2)
            J[j, k] -= np.sum(A_root[j, k] * pw / d**2)
    return J


def _canonical(w, colors) -> tuple:
    groups = {}
    for c, x in zip(colors, w):
        groups.setdefault(c, []).append(complex(x))
    return tuple((c, tuple(sorted(groups[c], key=lambda v: (round(v.real, 6), round(v.imag, 6))))) for c in sorted(groups))


def _newton(w0, p: BetheProblem, tol: float, max_iter: int):
    # colliding or runaway iterates give inf/nan values; the line search rejects them
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        return _newton_raw(w0, p, tol, max_iter)


def _newton_raw(w0, p: BetheProblem, tol: float, max_iter: int):
    w = np.array(w0, dtype=complex)
    try:
        F = bethe_residual(w, p)
    except DomainError:
        return None
    norm = np.max(np.abs(F))
    for it in range(max_iter):
        if norm <= tol:
            return w, float(norm), it
        try:
            step = np.linalg.solve(bethe_jacobian(w, p), -F)
        except np.linalg.LinAlgError:
            return None
        t = 1.0
        for _ in range(41):
            trial = w + t * step
            try:
                Ft = bethe_residual(trial, p)
                nt = np.max(np.abs(Ft))
            except DomainError:
                nt = np.inf
            if nt < norm:
                break
            t *= 0.5
        else:
            return None
        w, F, norm = trial, Ft, nt
    return (w, float(norm), max_iter) if norm <= tol else None


def solve_bethe(
    p: BetheProblem,
    n_starts: int = 200,
    seed: int = 0,
    tol: float = 1e-10,
    max_iter: int = 100,
    dedup: float = 1e-7,
    starts=None,
    bound: float = 1e3,
) -> list[BetheSolution]:
    """Damped Newton from seeded starts on an annulus; distinct converged solutions."""
    if p.m == 0:
        raise DomainError("at least one Bethe root is required")
    rng = np.random.default_rng(seed)
    mods = [abs(v) for v in p.z] or [1.0]
    lo, hi = 0.5 * min(mods), 2.0 * max(mods)
    if starts is None:
        r = rng.uniform(lo, hi, size=(n_starts, p.m))
        phi = rng.uniform(0, 2 * np.pi, size=(n_starts, p.m))
        starts = r * np.exp(1j * phi)
    found: list[BetheSolution] = []
    for w0 in starts:
        res = _newton(w0, p, tol, max_iter)
        if res is None:
            continue
        w, norm, it = res
        if np.max(np.abs(w)) > bound * hi:
            continue  # runaway towards infinity, where every term decays
        try:
            check_roots(w, p, tol=1e-6)
        except DomainError:
            continue
        key = _canonical(w, p.colors)
        flat = np.array([v for _, vs in key for v in vs])
        if any(np.max(np.abs(flat - np.array([v for _, vs in s.key for v in vs]))) < dedup for s in found):
            continue
        found.append(BetheSolution(w, norm, it, key))
    found.sort(key=lambda s: tuple((round(v.real, 8), round(v.imag, 8)) for _, vs in s.key for v in vs))
    return found


# -- weight function ----------------------------------------------------------


def weight_function(w, p: BetheProblem, module: TensorModule) -> dict:
    """The Bethe vector as a sparse dict over tensor monomials."""
    w = np.asarray(w, dtype=complex)
    if len(w) != p.m:
        raise DomainError("one root per color is required")
    check_roots(w, p)
    L, aut = p.lie, p.aut
    T, om, N = p.T, p.omega, module.N
    ys0 = [L.basis_vector(L.f_index(L.root_index[tuple(int(k == c) for k in range(L.rank))])) for c in p.colors]
    P0 = aut.projector(0)

    def rec(x: dict, ys: list) -> dict:
        s = len(ys)
        if s == 0:
            return x
        y, rest, ws = ys[-1], ys[:-1], w[s - 1]
        out: dict = {}
        _axpy(out, rec(module.act_site(T * (P0 @ y), N, x), rest), 1.0 / ws)
        for j in range(T):
            yj = aut.power(j) @ y
            for i in range(N):
                _axpy(out, rec(module.act_site(yj, i, x), rest), 1.0 / (ws - om ** (-j) * p.z[i]))
            for i in range(s - 1):
                new = list(rest)
                new[i] = L.bracket(yj, rest[i])
                if np.max(np.abs(new[i])) > 1e-14:
                    _axpy(out, rec(x, new), 1.0 / (ws - om ** (-j) * w[i]))
        return _prune(out, 0.0)

    psi = rec({module.highest(): 1.0}, ys0)
    return {k: (-1) ** p.m * v for k, v in psi.items()}


def block_weight(module: TensorModule, key: tuple) -> np.ndarray:
    """Exact ``Pi_0``-weight of a tensor monomial."""
    P0 = module.aut.projector_dual(0)
    total = module.origin.weight + sum(P0 @ s.weight for s in module.sites)
    lowered = sum(f.root_content(m) for f, m in zip(module.factors, key))
    return total - P0 @ lowered


# -- eigenvalues and certification ----------------------------------------------


def eigenvalue_Ei(w, p: BetheProblem, i: int) -> complex:
    T, om = p.T, p.omega
    li, zi = p.lams[i], p.z[i]
    E = 0j
    for j, lj in enumerate(p.lams):
        if j != i:
            E += sum(p.pair(li, p.Lr(s, lj)) / (zi - om**s * p.z[j]) for s in range(T))
    for c, wj in zip(p.colors, w):
        E -= sum(p.pair(li, p.Lr(s, p.simple(c))) / (zi - om**s * wj) for s in range(T))
    local = p.origin_scale * p.pair(li, p.lam0) + p.pair(li, p.Lam0)
    local += 0.5 * sum(p.pair(li, p.Lr(s, li)) for s in range(1, T))
    return E + local / zi + p.chi_scale * p.pair(li, p.chi)


def _dict_norm(v: dict) -> float:
    return float(np.sqrt(sum(abs(c) ** 2 for c in v.values())))


def _dict_sub(a: dict, b: dict, cb=1.0) -> dict:
    out = dict(a)
    _axpy(out, b, -cb)
    return out


def verify_eigenvector(psi: dict, hs, module: TensorModule, energies: dict) -> dict:
    """Relative residuals of ``H psi - E psi``; Rayleigh quotients where no formula is given."""
    from .rep_blocks import apply_uelement

    norm = _dict_norm(psi)
    scale = max((abs(c) for c in psi.values()), default=0.0)
    report = {"norm": norm, "inconclusive": norm <= 1e-13 * max(scale, 1.0), "ops": {}}
    if report["inconclusive"]:
        return report
    for label, e in hs.ops.items():
        Hpsi = apply_uelement(e, module, psi)
        if label in energies:
            E = energies[label]
            res = _dict_norm(_dict_sub(Hpsi, psi, E)) / norm
            report["ops"][label] = {"eigenvalue": complex(E), "residual": res, "asserted": True}
        else:
            q = sum(np.conj(psi[k]) * Hpsi.get(k, 0) for k in psi) / norm**2
            res = _dict_norm(_dict_sub(Hpsi, psi, q)) / norm
            hn = _dict_norm(Hpsi)
            sine = res * norm / hn if hn > 0 else 0.0
            report["ops"][label] = {"eigenvalue": complex(q), "residual": res, "sine": sine, "asserted": False}
    return report


def verify_singular(psi: dict, p: BetheProblem, module: TensorModule) -> float:
    """Largest ``||Delta(X) psi|| / ||psi||`` over a basis of ``Pi_0 n``."""
    norm = _dict_norm(psi)
    if norm == 0:
        return float("nan")
    worst = 0.0
    for X in module.origin.raising:
        worst = max(worst, _dict_norm(module.act_diagonal(X, psi)) / norm)
    return worst


# -- master function ------------------------------------------------------------


def nu_of_t(p: BetheProblem, w):
    """``nu(t)`` as a callable returning simple-root coordinates."""
    w = np.asarray(w, dtype=complex)
    T, om = p.T, p.omega
    residue0 = T * p.lam0 + p.Lam0

    def nu(t: complex) -> np.ndarray:
        out = p.chi.astype(complex).copy()
        for r in range(T):
            for zi, li in zip(p.z, p.lams):
                out = out + p.Lr(r, li) / (t - om**r * zi)
            for c, wj in zip(p.colors, w):
                out = out - p.Lr(r, p.simple(c)) / (t - om**r * wj)
        return out + residue0 / t

    return nu


def nu_pairing(p: BetheProblem, w, j: int) -> complex:
    """``<nu_j^0, alpha_{c(j)}>``: the regular part of ``nu`` at ``w_j`` paired with its color."""
    w = np.asarray(w, dtype=complex)
    T, om = p.T, p.omega
    al = p.simple(p.colors[j])
    out = p.chi.astype(complex).copy() + (T * p.lam0 + p.Lam0) / w[j]
    for r in range(T):
        for zi, li in zip(p.z, p.lams):
            out = out + p.Lr(r, li) / (w[j] - om**r * zi)
        for k, (c, wk) in enumerate(zip(p.colors, w)):
            if (r, k) != (0, j):
                out = out - p.Lr(r, p.simple(c)) / (w[j] - om**r * wk)
    return p.pair(out, al)


__all__ = [
    "BetheProblem",
    "BetheSolution",
    "DomainError",
    "lambda_infinity",
    "check_roots",
    "bethe_residual",
    "bethe_jacobian",
    "solve_bethe",
    "weight_function",
    "block_weight",
    "eigenvalue_Ei",
    "verify_eigenvector",
    "verify_singular",
    "nu_of_t",
    "nu_pairing",
]
