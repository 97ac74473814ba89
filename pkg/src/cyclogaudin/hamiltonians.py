"""Quadratic Hamiltonians with a module at the origin and a twist at infinity."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .lie_core import (
    Automorphism,
    SimpleLieAlgebra,
    chi_functional,
    coadjoint_centralizer,
    dual_bases,
    element_F,
    scalar_K,
)
from .rep_blocks import TensorModule, WeightBlock, apply_uelement, realize_uelement
from .takiff import INF, ORIGIN, POINT, CurrentAlgebra, UElement, hamiltonian_family


class ChiError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class ChiForm:
    """``chi`` in simple-root coordinates, extended by zero on ``n`` and ``n-``."""

    aut: Automorphism
    weight: np.ndarray

    @property
    def functional(self) -> np.ndarray:
        return chi_functional(self.aut.lie, self.weight)

    def value(self, x) -> complex:
        return complex(self.functional @ np.asarray(x))

    def leakage(self) -> float:
        """Largest value of ``chi`` on ``Pi_k g`` with ``k != -1``."""
        f = self.functional
        T = self.aut.T
        return max((float(np.max(np.abs(f @ self.aut.projector(k)))) for k in range(T) if (k + 1) % T), default=0.0)


def make_chi(aut: Automorphism, weight, tol: float = 1e-12) -> ChiForm:
    weight = np.asarray(weight, dtype=complex)
    ok, res = aut.is_chi_admissible(weight, tol)
    if not ok:
        raise ChiError(f"chi must satisfy L_sigma chi = omega chi (residual {res:.3e})")
    chi = ChiForm(aut, weight)
    if chi.leakage() > 1e-10:
        raise AssertionError("chi does not vanish on Pi_k g for k != -1")
    return chi


def chi_substitute(e: UElement, chi: ChiForm, target: CurrentAlgebra) -> UElement:
    """Replace every ``Y[-1]_inf`` by ``chi(Y)``; infinity modes sit leftmost in normal order."""
    alg = e.alg
    n_inf = sum(1 for m in alg.modes if m.kind == INF)
    if any(m.kind == INF and m.power != -1 for m in alg.modes):
        raise ValueError("only infinity modes of power -1 can be replaced by chi")
    if target.dim != alg.dim - n_inf:
        raise ValueError("target algebra does not match the source without infinity modes")
    vals = np.array([chi.value(alg.mode_vector(m)) for m in alg.modes[:n_inf]], dtype=complex)
    out = target.zero()
    k = n_inf
    out.const = e.const + vals @ e.lin[:k] + vals @ e.quad[:k, :k] @ vals
    out.lin = e.lin[k:] + vals @ e.quad[:k, k:]
    out.quad = e.quad[k:, k:].copy()
    return out


@dataclass
class HamiltonianSet:
    alg: CurrentAlgebra
    chi: ChiForm
    K: complex
    ops: dict = field(default_factory=dict)  # label -> UElement

    def labels(self) -> list[str]:
        return list(self.ops)


def _chi_dual_vector(L: SimpleLieAlgebra, aut: Automorphism, chi: ChiForm, lower: bool) -> np.ndarray:
    """``sum_a chi(Pi_{-1} I_a) I^a`` (``lower``) or ``sum_a chi(Pi_{-1} I^a) I_a``."""
    db = dual_bases(L)
    Pm = aut.projector(-1)
    f = chi.functional
    if lower:
        return (f @ Pm @ db.lower.T) @ db.upper
    return (f @ Pm @ db.upper.T) @ db.lower


def build_hamiltonians(L: SimpleLieAlgebra, aut: Automorphism, z, chi: ChiForm) -> HamiltonianSet:
    """The five families at orders ``(2, (1, ..., 1), 1)`` written out directly."""
    N = len(z)
    alg = CurrentAlgebra(L, aut, z, 1, (1,) * N, 1)
    T, om = aut.T, aut.omega
    Id = np.eye(L.dim)
    P0, Pm = aut.projector(0), aut.projector(-1)
    hs = HamiltonianSet(alg, chi, scalar_K(L, aut))
    y_low = _chi_dual_vector(L, aut, chi, lower=True)
    y_up = _chi_dual_vector(L, aut, chi, lower=False)
    F = element_F(L, aut)
    for i in range(N):
        H = alg.zero()
        for j in range(N):
            if j == i:
                continue
            for l in range(T):
                c = 1.0 / (alg.z[i] - om ** (-l) * alg.z[j])
                H += alg.casimir(Id, (POINT, i, 0), aut.power(l), (POINT, j, 0), c)
        for l in range(1, T):
            c = 1.0 / ((1 - om ** (-l)) * alg.z[i])
            H += alg.casimir(aut.power(l), (POINT, i, 0), Id, (POINT, i, 0), c)
        H += alg.casimir(Id, (POINT, i, 0), P0, (ORIGIN, 0, 0), T / alg.z[i])
        H += alg.mode(POINT, i, 0, y_low) * T
        hs.ops[f"H_{i + 1},0"] = H
    for i in range(N):
        hs.ops[f"H_{i + 1},1"] = alg.casimir(Id, (POINT, i, 0), Id, (POINT, i, 0), 0.5)
    H00 = alg.zero()
    for i in range(N):
        H00 += alg.casimir(Pm, (POINT, i, 0), P0, (ORIGIN, 0, 0), -(T**2) / alg.z[i])
    H00 += alg.mode(ORIGIN, 0, 0, P0 @ y_up) * T**2
    hs.ops["H_0,0"] = H00
    hs.ops["H_0,1"] = alg.casimir(P0, (ORIGIN, 0, 0), P0, (ORIGIN, 0, 0), T**2 / 2) + alg.mode(ORIGIN, 0, 0, F) * T
    db = dual_bases(L)
    f = chi.functional
    hinf = 0.5 * T**2 * np.sum((f @ Pm @ db.lower.T) * (f @ Pm @ db.upper.T))
    hs.ops["H_inf,0"] = alg.scalar(hinf)
    return hs


def hamiltonians_from_family(L, aut, z, chi: ChiForm) -> HamiltonianSet:
    """Same five families, from the general p-indexed coefficients followed by ``chi``."""
    N = len(z)
    src = CurrentAlgebra(L, aut, z, 2, (1,) * N, 1)
    tgt = CurrentAlgebra(L, aut, z, 1, (1,) * N, 1)
    fam = hamiltonian_family(src)
    hs = HamiltonianSet(tgt, chi, scalar_K(L, aut))
    for i in range(N):
        hs.ops[f"H_{i + 1},0"] = chi_substitute(fam.site[(i, 0)], chi, tgt)
    for i in range(N):
        hs.ops[f"H_{i + 1},1"] = chi_substitute(fam.site[(i, 1)], chi, tgt)
    hs.ops["H_0,0"] = chi_substitute(fam._origin(0), chi, tgt)
    hs.ops["H_0,1"] = chi_substitute(fam._origin(1), chi, tgt)
    hs.ops["H_inf,0"] = chi_substitute(fam._inf(0), chi, tgt)
    return hs


def family_mismatch(a: HamiltonianSet, b: HamiltonianSet) -> float:
    """Largest coefficient difference between two sets built on equal algebras."""
    worst = 0.0
    for k, x in a.ops.items():
        y = b.ops[k]
        worst = max(
            worst,
            abs(x.const - y.const),
            float(np.max(np.abs(x.lin - y.lin), initial=0.0)),
            float(np.max(np.abs(x.quad - y.quad), initial=0.0)),
        )
    return worst


def structural_zero_residuals(hs: HamiltonianSet) -> dict:
    T = hs.alg.aut.T
    out = {}
    if T >= 2:
        out["H_0,0"] = hs.ops["H_0,0"].max_abs()
    if T >= 3:
        out["H_inf,0"] = hs.ops["H_inf,0"].max_abs()
    return out


def block_matrices(hs: HamiltonianSet, block: WeightBlock) -> dict:
    return {k: realize_uelement(e, block).matrix for k, e in hs.ops.items()}


def _norm(M) -> float:
    return float(np.max(np.abs(M), initial=0.0))


def check_commutativity(hs: HamiltonianSet, blocks) -> dict:
    """Per block, the worst ``||PQ - QP|| / (1 + ||P|| ||Q||)`` over pairs of the set."""
    report = {}
    for block in blocks:
        if block.dim == 0:
            continue
        mats = block_matrices(hs, block)
        keys = list(mats)
        worst, pair = 0.0, None
        for a in range(len(keys)):
            for b in range(a + 1, len(keys)):
                P, Q = mats[keys[a]], mats[keys[b]]
                r = _norm(P @ Q - Q @ P) / (1 + _norm(P) * _norm(Q))
                if r >= worst:
                    worst, pair = r, (keys[a], keys[b])
        report[block.depth] = {"dim": block.dim, "residual": worst, "pair": pair}
    return report


def check_invariance(hs: HamiltonianSet, blocks) -> dict:
    """Worst ``||[H, Delta(X)] v||`` over block basis vectors ``v`` and ``X`` spanning ``g^sigma_chi``."""
    L, aut = hs.alg.lie, hs.alg.aut
    cent = coadjoint_centralizer(L, aut, hs.chi.weight)
    report = {}
    for block in blocks:
        if block.dim == 0:
            continue
        mod: TensorModule = block.module
        worst = 0.0
        for key in block.basis:
            v = {key: 1.0}
            for X in cent:
                dv = mod.act_diagonal(X, v)
                for e in hs.ops.values():
                    a = apply_uelement(e, mod, dv)
                    b = mod.act_diagonal(X, apply_uelement(e, mod, v))
                    keys = set(a) | set(b)
                    r = max((abs(a.get(k, 0) - b.get(k, 0)) for k in keys), default=0.0)
                    worst = max(worst, r / (1 + e.max_abs()))
        report[block.depth] = {"dim": block.dim, "residual": worst, "centralizer_dim": int(cent.shape[0])}
    return report


__all__ = [
    "ChiForm",
    "ChiError",
    "make_chi",
    "chi_substitute",
    "HamiltonianSet",
    "build_hamiltonians",
    "hamiltonians_from_family",
    "family_mismatch",
    "structural_zero_residuals",
    "block_matrices",
    "check_commutativity",
    "check_invariance",
]
