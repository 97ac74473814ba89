"""Verma modules over g and g^sigma, tensor products and exact Pi_0-weight blocks.

Vectors are sparse dicts keyed by PBW exponent tuples (a single module) or by
tuples of exponent tuples (tensor products, origin factor last).  Lowering
operators are applied in a fixed order ``f_1^{m_1} ... f_r^{m_r} v``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .lie_core import Automorphism, SimpleLieAlgebra

_TINY = 1e-14


class ResourceError(RuntimeError):
    pass


class RealizationError(ValueError):
    pass


def _axpy(out: dict, vec: dict, c) -> None:
    for k, v in vec.items():
        out[k] = out.get(k, 0) + c * v


def _prune(vec: dict, tol: float = _TINY) -> dict:
    return {k: v for k, v in vec.items() if abs(v) > tol}


class LoweringModule:
    """Highest-weight module spanned by ordered lowering monomials.

    ``lowering`` rows span the negative nilpotent part, ``cartan`` rows the
    Cartan part and ``raising`` rows the positive part of the acting algebra.
    ``roots[k]`` is a representative positive root for ``lowering[k]``.
    """

    def __init__(self, lie: SimpleLieAlgebra, weight, lowering, cartan, raising, roots, depth_of):
        self.lie = lie
        self.weight = np.asarray(weight, dtype=complex)
        self.lowering = np.asarray(lowering, dtype=complex).reshape(-1, lie.dim)
        self.cartan = np.asarray(cartan, dtype=complex).reshape(-1, lie.dim)
        self.raising = np.asarray(raising, dtype=complex).reshape(-1, lie.dim)
        self.roots = [tuple(int(x) for x in r) for r in roots]
        self.depths = [tuple(depth_of(r)) for r in self.roots]
        self._zero_depth = tuple(0 for _ in depth_of((0,) * lie.rank))
        self.r = len(self.lowering)
        gens = np.vstack([self.lowering, self.cartan, self.raising])
        self.generators = gens
        self._coords = np.linalg.pinv(gens.T)
        self._memo: dict = {}
        # weight of each lowering vector as eigenvalues under the Cartan rows
        self._lower_shift = np.zeros((self.r, len(self.cartan)), dtype=complex)
        for k, f in enumerate(self.lowering):
            for c, h in enumerate(self.cartan):
                br = lie.bracket(h, f)
                self._lower_shift[k, c] = self._scalar_multiple(br, f)
        self._top = np.array([lie.weight_on(self.weight, h) for h in self.cartan], dtype=complex)

    @staticmethod
    def _scalar_multiple(v, f) -> complex:
        j = int(np.argmax(np.abs(f)))
        c = v[j] / f[j]
        if np.max(np.abs(v - c * f)) > 1e-9:
            raise AssertionError("lowering vector is not a Cartan weight vector")
        return complex(c)

    @property
    def n_generators(self) -> int:
        return len(self.generators)

    def coordinates(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=complex)
        c = self._coords @ x
        if np.max(np.abs(self.generators.T @ c - x), initial=0.0) > 1e-9 * (1 + np.max(np.abs(x))):
            raise RealizationError("element lies outside the acting algebra")
        return c

    def depth(self, mono) -> tuple:
        out = list(self._zero_depth)
        for k, m in enumerate(mono):
            if m:
                for a, d in enumerate(self.depths[k]):
                    out[a] += m * d
        return tuple(out)

    def height(self, mono) -> int:
        return sum(m * sum(self.roots[k]) for k, m in enumerate(mono))

    def root_content(self, mono) -> np.ndarray:
        out = np.zeros(self.lie.rank)
        for k, m in enumerate(mono):
            out += m * np.array(self.roots[k])
        return out

    # -- action -------------------------------------------------------------

    def _lower(self, k: int, mono: tuple) -> dict:
        """``f_k`` times a monomial, straightened."""
        key = ("f", k, mono)
        if key in self._memo:
            return self._memo[key]
        j = next((i for i, m in enumerate(mono) if m), None)
        if j is None or k <= j:
            m = list(mono)
            m[k] += 1
            out = {tuple(m): 1.0}
        else:
            rest = list(mono)
            rest[j] -= 1
            rest = tuple(rest)
            out: dict = {}
            for m2, c in self._lower(k, rest).items():
                _axpy(out, self._lower(j, m2), c)
            br = self.coordinates(self.lie.bracket(self.lowering[k], self.lowering[j]))
            for l in np.flatnonzero(np.abs(br) > _TINY):
                if l >= self.r:
                    raise AssertionError("lowering part is not a subalgebra")
                _axpy(out, self._lower(int(l), rest), br[l])
            out = _prune(out)
        self._memo[key] = out
        return out

    def act_generator(self, g: int, mono: tuple) -> dict:
        key = ("g", g, mono)
        if key in self._memo:
            return self._memo[key]
        r, nc = self.r, len(self.cartan)
        if g < r:
            out = self._lower(g, mono)
        elif g < r + nc:
            c = g - r
            val = self._top[c] + sum(m * self._lower_shift[k, c] for k, m in enumerate(mono))
            out = {mono: val} if abs(val) > _TINY else {}
        else:
            j = next((i for i, m in enumerate(mono) if m), None)
            if j is None:
                out = {}
            else:
                rest = list(mono)
                rest[j] -= 1
                rest = tuple(rest)
                out = {}
                for m2, c in self.act_generator(g, rest).items():
                    _axpy(out, self._lower(j, m2), c)
                br = self.coordinates(self.lie.bracket(self.generators[g], self.lowering[j]))
                for l in np.flatnonzero(np.abs(br) > _TINY):
                    _axpy(out, self.act_generator(int(l), rest), br[l])
                out = _prune(out)
        self._memo[key] = out
        return out

    def act(self, x, mono: tuple) -> dict:
        c = self.coordinates(x)
        out: dict = {}
        for g in np.flatnonzero(np.abs(c) > _TINY):
            _axpy(out, self.act_generator(int(g), mono), c[g])
        return out

    def act_vector(self, x, vec: dict) -> dict:
        out: dict = {}
        for mono, c in vec.items():
            _axpy(out, self.act(x, mono), c)
        return _prune(out, 0.0)

    @property
    def highest(self) -> tuple:
        return (0,) * self.r

    def monomials(self, max_depth: tuple) -> list[tuple]:
        """All monomials whose orbit depth is componentwise at most ``max_depth``."""
        out = []

        def rec(k, mono, used):
            if k == self.r:
                out.append(tuple(mono))
                return
            d = self.depths[k]
            m = 0
            while all(u + m * di <= cap for u, di, cap in zip(used, d, max_depth)):
                rec(k + 1, mono + [m], [u + m * di for u, di in zip(used, d)])
                m += 1
                if not any(d):
                    break

        rec(0, [], [0] * len(max_depth))
        out.sort(key=lambda mono: (self.height(mono), tuple(-m for m in mono)))
        return out

    def basis(self, height_cap: int) -> list[tuple]:
        """PBW monomials of total height at most ``height_cap``."""
        out = []
        hts = [sum(r) for r in self.roots]

        def rec(k, mono, h):
            if k == self.r:
                out.append(tuple(mono))
                return
            m = 0
            while h + m * hts[k] <= height_cap:
                rec(k + 1, mono + [m], h + m * hts[k])
                m += 1

        rec(0, [], 0)
        out.sort(key=lambda mono: (self.height(mono), tuple(-m for m in mono)))
        return out


def verma_module(L: SimpleLieAlgebra, weight, aut: Automorphism | None = None) -> LoweringModule:
    """Verma module ``M_lambda`` over g; ``weight`` in simple-root coordinates."""
    r = L.rank
    F = np.array([L.basis_vector(L.f_index(k)) for k in range(L.n_pos)])
    H = np.array([L.basis_vector(i) for i in range(r)])
    E = np.array([L.basis_vector(L.e_index(k)) for k in range(L.n_pos)])
    depth = aut.orbit_depth if aut is not None else (lambda a: tuple(int(x) for x in a))
    return LoweringModule(L, weight, F, H, E, L.positive_roots, depth)


def sigma_verma_module(L: SimpleLieAlgebra, aut: Automorphism, weight) -> LoweringModule:
    """Verma module over ``g^sigma`` with triangular decomposition ``(Pi_0 n-, h^sigma, Pi_0 n)``."""
    weight = np.asarray(weight, dtype=complex)
    if np.max(np.abs(aut.sigma_dual(weight) - weight), initial=0.0) > 1e-10:
        raise ValueError("origin weight must be sigma-invariant")
    P0 = aut.projector(0)

    def greedy(vectors, roots):
        rows, reps = [], []
        for v, a in zip(vectors, roots):
            if np.max(np.abs(v)) < 1e-12:
                continue
            if np.linalg.matrix_rank(np.array(rows + [v]), tol=1e-9) == len(rows) + 1:
                rows.append(v)
                reps.append(a)
        return rows, reps

    lower, roots = greedy([P0[:, L.f_index(k)] for k in range(L.n_pos)], L.positive_roots)
    raise_, _ = greedy([P0[:, L.e_index(k)] for k in range(L.n_pos)], L.positive_roots)
    cartan, _ = greedy([P0[:, i] for i in range(L.rank)], [None] * L.rank)
    return LoweringModule(L, weight, lower, cartan, raise_, roots, aut.orbit_depth)


def verma_basis(L: SimpleLieAlgebra, weight, height_cap: int) -> list[tuple]:
    return verma_module(L, weight).basis(height_cap)


def sigma_verma_basis(L: SimpleLieAlgebra, aut: Automorphism, weight, height_cap: int) -> list[tuple]:
    return sigma_verma_module(L, aut, weight).basis(height_cap)


def verma_action(module: LoweringModule, x, basis: list[tuple]) -> np.ndarray:
    """Matrix of ``x`` on the span of ``basis``; raises if the image leaves it."""
    idx = {m: k for k, m in enumerate(basis)}
    M = np.zeros((len(basis), len(basis)), dtype=complex)
    for col, mono in enumerate(basis):
        for m2, c in module.act(x, mono).items():
            if m2 not in idx:
                raise ResourceError(f"image monomial {m2} lies beyond the basis cap")
            M[idx[m2], col] = c
    return M


# -- tensor products ----------------------------------------------------------


@dataclass
class TensorModule:
    """``M_{lambda_1} x ... x M_{lambda_N} x M^sigma_{lambda_0}``."""

    lie: SimpleLieAlgebra
    aut: Automorphism
    sites: list
    origin: LoweringModule
    safety_cap: int = 20000

    @property
    def factors(self) -> list:
        return list(self.sites) + [self.origin]

    @property
    def N(self) -> int:
        return len(self.sites)

    def highest(self) -> tuple:
        return tuple(m.highest for m in self.factors)

    def depth(self, key: tuple) -> tuple:
        d = [0] * len(self.aut.orbits)
        for mod, mono in zip(self.factors, key):
            for a, x in enumerate(mod.depth(mono)):
                d[a] += x
        return tuple(d)

    def act_site(self, x, site: int, vec: dict) -> dict:
        """``x`` acting in tensor factor ``site`` (``site == N`` is the origin)."""
        mod = self.factors[site]
        if site == self.N:
            P0 = self.aut.projector(0)
            if np.max(np.abs(P0 @ x - x), initial=0.0) > 1e-9:
                raise RealizationError("origin factor only accepts elements of g^sigma")
        out: dict = {}
        for key, c in vec.items():
            for m2, c2 in mod.act(x, key[site]).items():
                nk = key[:site] + (m2,) + key[site + 1 :]
                out[nk] = out.get(nk, 0) + c * c2
        return _prune(out, 0.0)

    def act_diagonal(self, x, vec: dict) -> dict:
        """``Delta(x) = sum_i x^(i) + x^(0)``."""
        out: dict = {}
        for s in range(self.N + 1):
            _axpy(out, self.act_site(x, s, vec), 1.0)
        return _prune(out, 0.0)


@dataclass
class WeightBlock:
    module: TensorModule
    depth: tuple
    basis: list
    index: dict = field(repr=False)

    @property
    def dim(self) -> int:
        return len(self.basis)

    def vector(self, vec: dict) -> np.ndarray:
        out = np.zeros(self.dim, dtype=complex)
        for k, c in vec.items():
            if k not in self.index:
                if abs(c) > 1e-12:
                    raise RealizationError(f"vector component {k} lies outside the block")
                continue
            out[self.index[k]] += c
        return out

    def as_dict(self, v) -> dict:
        return {self.basis[k]: c for k, c in enumerate(v) if c != 0}

    def weight(self) -> np.ndarray:
        """``Pi_0``-weight of the block in simple-root coordinates."""
        mod = self.module
        P0 = mod.aut.projector_dual(0)
        total = mod.origin.weight + sum(P0 @ s.weight for s in mod.sites)
        key = self.basis[0] if self.basis else mod.highest()
        lowered = sum(f.root_content(m) for f, m in zip(mod.factors, key))
        return total - P0 @ lowered


@dataclass
class BlockOperator:
    source: WeightBlock
    target: WeightBlock
    matrix: np.ndarray


def tensor_module(L, aut, site_weights, origin_weight, safety_cap: int = 20000) -> TensorModule:
    sites = [verma_module(L, w, aut) for w in site_weights]
    return TensorModule(L, aut, sites, sigma_verma_module(L, aut, origin_weight), safety_cap)


def tensor_block(module: TensorModule, depth) -> WeightBlock:
    """Every tensor monomial whose total orbit depth equals ``depth``."""
    depth = tuple(int(d) for d in depth)
    per_factor = [f.monomials(depth) for f in module.factors]
    basis = []

    def rec(k, key, used):
        if k == len(per_factor):
            if tuple(used) == depth:
                basis.append(tuple(key))
                if len(basis) > module.safety_cap:
                    raise ResourceError(
                        f"weight block {depth} exceeds the safety cap of {module.safety_cap} vectors"
                    )
            return
        f = module.factors[k]
        for mono in per_factor[k]:
            d = f.depth(mono)
            nu = [u + x for u, x in zip(used, d)]
            if all(a <= b for a, b in zip(nu, depth)):
                rec(k + 1, key + [mono], nu)

    rec(0, [], [0] * len(depth))
    return WeightBlock(module, depth, basis, {k: i for i, k in enumerate(basis)})


def depths_up_to(aut: Automorphism, max_height: int) -> list[tuple]:
    """Orbit-depth keys whose total height (sum of simple-root coordinates) is at most ``max_height``."""
    n = len(aut.orbits)
    out = [d for d in product(range(max_height + 1), repeat=n) if sum(d) <= max_height]
    out.sort(key=lambda d: (sum(d), d))
    return out


def site_operator(x, site: int, block: WeightBlock, target: WeightBlock | None = None) -> BlockOperator:
    mod = block.module
    cols = [mod.act_site(np.asarray(x, dtype=complex), site, {k: 1.0}) for k in block.basis]
    if target is None:
        keys = [k for col in cols for k in col]
        depth = mod.depth(keys[0]) if keys else block.depth
        if any(mod.depth(k) != depth for k in keys):
            raise RealizationError("operator does not have a definite Pi_0-weight")
        target = tensor_block(mod, depth)
    M = np.column_stack([target.vector(c) for c in cols]) if cols else np.zeros((target.dim, 0))
    return BlockOperator(block, target, M)


def apply_uelement(e, module: TensorModule, vec: dict) -> dict:
    """Action of a degree-two element with zero-mode site and origin modes only."""
    from .takiff import ORIGIN, POINT

    alg = e.alg
    sites = []
    for m in alg.modes:
        if m.kind == POINT and m.power == 0:
            sites.append(m.point)
        elif m.kind == ORIGIN and m.power == 0:
            sites.append(module.N)
        else:
            if abs(e.lin[len(sites)]) > 0 or np.any(e.quad[len(sites)] != 0) or np.any(e.quad[:, len(sites)] != 0):
                raise RealizationError(f"mode {alg.label(m)} has no realization on this module")
            sites.append(None)
    vecs = np.array([alg.mode_vector(m) for m in alg.modes]) if alg.modes else np.zeros((0, alg.lie.dim))
    site_ids = sorted({s for s in sites if s is not None})
    mask = {s: np.array([t == s for t in sites]) for s in site_ids}

    def apply_lin(coeffs, v):
        out: dict = {}
        for s in site_ids:
            c = coeffs * mask[s]
            if np.any(c != 0):
                _axpy(out, module.act_site(c @ vecs, s, v), 1.0)
        return out

    out: dict = {}
    if e.const != 0:
        _axpy(out, vec, e.const)
    _axpy(out, apply_lin(e.lin, vec), 1.0)
    for b in np.flatnonzero(np.any(e.quad != 0, axis=0)):
        w = module.act_site(vecs[b], sites[b], vec)
        if w:
            _axpy(out, apply_lin(e.quad[:, b], w), 1.0)
    return _prune(out, 0.0)


def realize_uelement(e, block: WeightBlock) -> BlockOperator:
    """Matrix of a weight-preserving element on one block."""
    cols = [block.vector(apply_uelement(e, block.module, {k: 1.0})) for k in block.basis]
    M = np.column_stack(cols) if cols else np.zeros((0, 0), dtype=complex)
    return BlockOperator(block, block, M)


__all__ = [
    "LoweringModule",
    "TensorModule",
    "WeightBlock",
    "BlockOperator",
    "ResourceError",
    "RealizationError",
    "verma_module",
    "sigma_verma_module",
    "verma_basis",
    "sigma_verma_basis",
    "verma_action",
    "tensor_module",
    "tensor_block",
    "depths_up_to",
    "site_operator",
    "apply_uelement",
    "realize_uelement",
]
