"""Acceptance criteria 1-10, one PASS/FAIL line each.

Run with ``pytest tests/test_acceptance.py -v`` (lines appear in the terminal
summary) or directly with ``python3 tests/test_acceptance.py``.
"""

import json
from functools import lru_cache

import numpy as np
import pytest

from cyclogaudin.bethe import (
    BetheProblem,
    bethe_jacobian,
    bethe_residual,
    block_weight,
    eigenvalue_Ei,
    lambda_infinity,
    solve_bethe,
    verify_eigenvector,
    verify_singular,
    weight_function,
)
from cyclogaudin.config import parse_config_dict
from cyclogaudin.hamiltonians import (
    build_hamiltonians,
    check_commutativity,
    make_chi,
    structural_zero_residuals,
)
from cyclogaudin.lie_core import lambda0_roots, lambda0_trace
from cyclogaudin.rep_blocks import depths_up_to, tensor_block, tensor_module
from cyclogaudin.takiff import (
    CurrentAlgebra,
    RationalFunction,
    hamiltonian_family,
    residue_identity_check,
    sample_points,
    surat_residual,
)

from conftest import ACCEPTANCE_LINES, CONFIGS, algebra_and_aut

TOL = {
    "axioms": 1e-10,
    "lambda0": 1e-12,
    "surat": 1e-8,
    "zero": 1e-12,
    "commute": 1e-9,
    "eigen": 1e-8,
    "singular": 1e-9,
    "weight": 1e-12,
    "jacobian": 1e-6,
    "fd_step": 1e-6,
    "residue": 1e-12,
    "negative": 1e-3,
}


def report(n: int, ok: bool, detail: str) -> None:
    line = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def config(name: str, **override):
    raw = json.loads((CONFIGS / f"{name}.json").read_text())
    raw.update(override)
    return parse_config_dict(raw)


def problem(cfg) -> BetheProblem:
    return BetheProblem(cfg.lie, cfg.aut, cfg.z, cfg.lams, cfg.lam0, cfg.chi, cfg.colors)


# -- shared Bethe runs for criteria 6, 7 and 10 --------------------------------

BETHE_CASES = {
    "sl2 closed form": ("bethe_sl2_closed_form", {}),
    "sl3 flip m=1 chi=0": ("flip_sl3_bethe", {"colors": [0]}),
    "sl3 flip m=1 chi!=0": ("flip_sl3_chi", {"colors": [0]}),
    "sl3 flip m=2 chi=0": ("flip_sl3_bethe", {}),
    "sl3 flip m=2 chi!=0": ("flip_sl3_chi", {}),
}


@lru_cache(maxsize=None)
def bethe_run(case: str):
    name, override = BETHE_CASES[case]
    cfg = config(name, **override)
    p = problem(cfg)
    sols = solve_bethe(p, n_starts=cfg.n_starts, seed=cfg.seed, tol=cfg.tolerances["solver"])
    mod = tensor_module(cfg.lie, cfg.aut, cfg.lams, cfg.lam0)
    hs = build_hamiltonians(cfg.lie, cfg.aut, cfg.z, make_chi(cfg.aut, cfg.chi))
    out = []
    for s in sols:
        psi = weight_function(s.roots, p, mod)
        E = {f"H_{i + 1},0": eigenvalue_Ei(s.roots, p, i) for i in range(len(cfg.z))}
        rep = verify_eigenvector(psi, hs, mod, E)
        out.append((s, psi, rep))
    return cfg, p, mod, hs, out


# -- criteria ---------------------------------------------------------------


def test_criterion_01_lie_axioms():
    worst = 0.0
    for kind in ["sl2", "sl2_inner", "sl3", "sl3_flip"]:
        L, aut = algebra_and_aut(kind)
        worst = max(
            worst,
            L.jacobi_residual(),
            L.invariance_residual(),
            aut.homomorphism_residual(),
            aut.order_residual(),
            aut.projector_residual(),
        )
    report(1, worst <= TOL["axioms"], f"Lie and automorphism axioms, max residual {worst:.2e} <= {TOL['axioms']:.0e}")


def test_criterion_02_lambda0():
    agree = 0.0
    for kind in ["sl2", "sl2_inner", "sl3", "sl3_flip"]:
        L, aut = algebra_and_aut(kind)
        agree = max(agree, float(np.max(np.abs(lambda0_trace(L, aut) - lambda0_roots(L, aut)))))
    L, aut = algebra_and_aut("sl2_inner")
    half_alpha = float(np.max(np.abs(lambda0_roots(L, aut) - np.array([-0.5]))))
    L, aut = algebra_and_aut("sl3_flip")
    half_theta = float(np.max(np.abs(lambda0_roots(L, aut) - np.array([-0.5, -0.5]))))
    worst = max(agree, half_alpha, half_theta)
    report(
        2,
        worst <= TOL["lambda0"],
        f"Lambda0 trace vs root formula {agree:.1e}; -alpha/2 err {half_alpha:.1e}; -theta/2 err {half_theta:.1e}",
    )


def test_criterion_03_surat_identity():
    parts = []
    worst = 0.0
    for name in ["surat_sl2", "surat_sl3_flip"]:
        cfg = config(name)
        alg = CurrentAlgebra(cfg.lie, cfg.aut, cfg.z, cfg.n_inf, cfg.n_sites, cfg.n0)
        us = sample_points(alg, 8, cfg.seed)
        r = max(surat_residual(alg, u) for u in us)
        worst = max(worst, r)
        parts.append(f"{name} {r:.1e}")
    report(3, worst <= TOL["surat"], f"S(u) vs partial fractions at 8 points: {', '.join(parts)}")


def test_criterion_04_structural_zeros():
    vals = {}
    # displayed set: T=2 with chi != 0, and the order-four toy
    L, aut = algebra_and_aut("sl3_flip")
    hs = build_hamiltonians(L, aut, [1.0, 2.3 + 0.4j], make_chi(aut, L.from_fundamental([1.5, -1.5])))
    vals["H_0,0 display T=2"] = structural_zero_residuals(hs)["H_0,0"]
    L, aut = algebra_and_aut("sl2_i")
    hs = build_hamiltonians(L, aut, [1.0 + 0.3j], make_chi(aut, np.zeros(1)))
    vals["H_inf,0 display T=4"] = structural_zero_residuals(hs)["H_inf,0"]
    # general coefficients at higher truncation orders
    L, aut = algebra_and_aut("sl3_flip")
    fam = hamiltonian_family(CurrentAlgebra(L, aut, [1.3 + 0.2j], 3, (2,), 2))
    vals["H_0,0 family T=2"] = fam._origin(0).max_abs()
    L, aut = algebra_and_aut("sl2_i")
    fam = hamiltonian_family(CurrentAlgebra(L, aut, [1.1 + 0.3j], 4, (2,), 3))
    vals["H_inf,0 family T=4"] = fam._inf(0).max_abs()
    worst = max(vals.values())
    report(4, worst <= TOL["zero"], "; ".join(f"{k} {v:.1e}" for k, v in vals.items()))


def test_criterion_05_commutativity():
    parts, worst = [], 0.0
    for name in ["gaudin_sl2", "inner_sl2_t2", "flip_sl3_chi"]:
        cfg = config(name)
        hs = build_hamiltonians(cfg.lie, cfg.aut, cfg.z, make_chi(cfg.aut, cfg.chi))
        mod = tensor_module(cfg.lie, cfg.aut, cfg.lams, cfg.lam0)
        blocks = [b for b in (tensor_block(mod, d) for d in depths_up_to(cfg.aut, 6)) if b.dim]
        rep = check_commutativity(hs, blocks)
        r = max(v["residual"] for v in rep.values())
        worst = max(worst, r)
        parts.append(f"{name} {r:.1e} ({len(blocks)} blocks, max dim {max(b.dim for b in blocks)})")
    report(5, worst <= TOL["commute"], "height <= 6: " + "; ".join(parts))


def test_criterion_06_bethe_eigenvectors():
    parts, ok = [], True
    cfg, p, mod, hs, runs = bethe_run("sl2 closed form")
    roots = [complex(s.roots[0]) for s, _, _ in runs]
    found = any(abs(r - 0.5) <= 1e-9 for r in roots)
    ok &= found
    for case in BETHE_CASES:
        cfg, p, mod, hs, runs = bethe_run(case)
        res = [max(v["residual"] for v in rep["ops"].values() if v["asserted"]) for _, _, rep in runs]
        inconclusive = any(rep["inconclusive"] for _, _, rep in runs)
        good = bool(runs) and not inconclusive and max(res) <= TOL["eigen"]
        ok &= good
        parts.append(f"{case}: {len(runs)} sol, max {max(res, default=float('nan')):.1e}")
    report(6, ok, f"w=1/2 found: {found}; " + "; ".join(parts))


def test_criterion_07_singular_vectors():
    parts, ok = [], True
    for case in ["sl2 closed form", "sl3 flip m=1 chi=0", "sl3 flip m=2 chi=0"]:
        cfg, p, mod, hs, runs = bethe_run(case)
        lam_inf = lambda_infinity(p)
        sing = [verify_singular(psi, p, mod) for _, psi, _ in runs]
        wt = max(
            (float(np.max(np.abs(block_weight(mod, k) - lam_inf))) for _, psi, _ in runs for k in psi), default=0.0
        )
        good = bool(runs) and max(sing) <= TOL["singular"] and wt <= TOL["weight"]
        ok &= good
        parts.append(f"{case}: singular {max(sing, default=float('nan')):.1e}, weight {wt:.0e}")
    report(7, ok, "; ".join(parts))


def test_criterion_08_jacobian_and_determinism():
    rng = np.random.default_rng(8)
    worst = 0.0
    h = TOL["fd_step"]
    for case in ["sl3 flip m=2 chi!=0", "sl3 flip m=2 chi=0", "sl2 closed form"]:
        name, override = BETHE_CASES[case]
        p = problem(config(name, **override))
        for _ in range(5):
            w = rng.uniform(0.3, 2.5, p.m) * np.exp(2j * np.pi * rng.uniform(size=p.m))
            J = bethe_jacobian(w, p)
            fd = np.column_stack(
                [(bethe_residual(w + h * e, p) - bethe_residual(w - h * e, p)) / (2 * h) for e in np.eye(p.m)]
            )
            worst = max(worst, float(np.max(np.abs(J - fd)) / (1 + np.max(np.abs(J)))))
    cfg = config("flip_sl3_chi")
    a = [s.roots.tobytes() for s in solve_bethe(problem(cfg), n_starts=60, seed=cfg.seed)]
    b = [s.roots.tobytes() for s in solve_bethe(problem(cfg), n_starts=60, seed=cfg.seed)]
    same = bool(a) and a == b
    report(8, worst <= TOL["jacobian"] and same, f"Jacobian vs central differences {worst:.1e}; identical roots: {same}")


def test_criterion_09_residue_identity():
    rng = np.random.default_rng(9)
    worst = 0.0
    for _ in range(200):
        poles = list(rng.normal(size=5) + 1j * rng.normal(size=5))
        coeffs = [list(rng.normal(size=k) + 1j * rng.normal(size=k)) for k in rng.integers(1, 4, size=5)]
        poly = list(rng.normal(size=2) + 1j * rng.normal(size=2))
        f = RationalFunction(poles, coeffs, poly)
        scale = 1 + sum(abs(c) for cs in coeffs for c in cs)
        worst = max(worst, residue_identity_check(f) / scale)
    report(9, worst <= TOL["residue"], f"200 random 5-pole functions, max |total residue|/scale {worst:.1e}")


def test_criterion_10_negative_control():
    parts, ok = [], True
    for case in ["sl2 closed form", "sl3 flip m=2 chi!=0"]:
        cfg, p, mod, hs, runs = bethe_run(case)
        w = runs[0][0].roots.copy()
        w[0] += 0.1
        psi = weight_function(w, p, mod)
        E = {f"H_{i + 1},0": eigenvalue_Ei(w, p, i) for i in range(len(cfg.z))}
        rep = verify_eigenvector(psi, hs, mod, E)
        r = max(v["residual"] for v in rep["ops"].values() if v["asserted"])
        ok &= r >= TOL["negative"]
        parts.append(f"{case}: {r:.1e}")
    report(10, ok, "perturbed root eigen residual >= 1e-3: " + "; ".join(parts))


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
