"""Command-line entry point: ``cyclogaudin <command> --config run.json``."""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import bethe as bt
from .config import ConfigError, RunConfig, parse_config
from .hamiltonians import (
    build_hamiltonians,
    block_matrices,
    check_commutativity,
    check_invariance,
    family_mismatch,
    hamiltonians_from_family,
    make_chi,
    structural_zero_residuals,
)
from .lie_core import coadjoint_centralizer, element_F, lambda0_roots, lambda0_trace, scalar_K
from .rep_blocks import depths_up_to, tensor_block, tensor_module
from .takiff import CurrentAlgebra, hamiltonian_family, sample_points, surat_residual

COMMANDS = ("info", "commute", "surat", "bethe-solve", "bethe-verify", "singular", "all")


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("CYCLOGAUDIN_THREADS", "1")))
    except ValueError:
        return 1


def _c(x) -> list:
    x = complex(x)
    return [x.real, x.imag]


def _cv(v) -> list:
    return [_c(x) for x in np.asarray(v).ravel()]


def _jsonable(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"cannot serialize {type(o).__name__}")


def run_info(cfg: RunConfig, opts) -> dict:
    L, aut = cfg.lie, cfg.aut
    lt, lr = lambda0_trace(L, aut), lambda0_roots(L, aut)
    checks = {
        "jacobi": L.jacobi_residual(),
        "invariance": L.invariance_residual(),
        "automorphism": aut.homomorphism_residual(),
        "order": aut.order_residual(),
        "projectors": aut.projector_residual(),
        "lambda0_agreement": float(np.max(np.abs(lt - lr), initial=0.0)),
    }
    alg = CurrentAlgebra(L, aut, cfg.z, cfg.n_inf, cfg.n_sites, cfg.n0)
    out = {
        "dim_g": L.dim,
        "dual_coxeter": L.dual_coxeter,
        "eigenspace_dims": [aut.eigen_dim(k) for k in range(aut.T)],
        "F": _cv(element_F(L, aut)),
        "K": _c(scalar_K(L, aut)),
        "Lambda0": _cv(lr),
        "current_algebra_dim": alg.dim,
        "centralizer_dim": int(coadjoint_centralizer(L, aut, cfg.chi).shape[0]),
        "residuals": checks,
        "pass": all(v <= 1e-10 for v in checks.values()),
    }
    if opts.dump_algebra:
        out["algebra"] = L.to_json()
        out["automorphism"] = aut.to_json()
    return out


def run_surat(cfg: RunConfig, opts) -> dict:
    alg = CurrentAlgebra(cfg.lie, cfg.aut, cfg.z, cfg.n_inf, cfg.n_sites, cfg.n0)
    hamiltonian_family(alg)
    us = sample_points(alg, cfg.samples, cfg.seed)
    with ThreadPoolExecutor(_workers()) as ex:
        res = list(ex.map(lambda u: surat_residual(alg, u), us))
    worst = max(res)
    return {
        "samples": [_c(u) for u in us],
        "residuals": res,
        "max_residual": worst,
        "tolerance": cfg.tolerances["identity"],
        "pass": worst <= cfg.tolerances["identity"],
    }


def _module(cfg: RunConfig):
    return tensor_module(cfg.lie, cfg.aut, cfg.lams, cfg.lam0, cfg.block_cap)


def run_commute(cfg: RunConfig, opts) -> dict:
    chi = make_chi(cfg.aut, cfg.chi)
    hs = build_hamiltonians(cfg.lie, cfg.aut, cfg.z, chi)
    alt = hamiltonians_from_family(cfg.lie, cfg.aut, cfg.z, chi)
    mod = _module(cfg)
    blocks = [b for b in (tensor_block(mod, d) for d in depths_up_to(cfg.aut, cfg.block_height)) if b.dim]
    comm = check_commutativity(hs, blocks)
    inv = check_invariance(hs, blocks)
    zeros = structural_zero_residuals(hs)
    worst_c = max(v["residual"] for v in comm.values())
    worst_i = max(v["residual"] for v in inv.values())
    mismatch = family_mismatch(hs, alt)
    tol = cfg.tolerances["commute"]
    out = {
        "blocks": [
            {"depth": list(d), "dim": v["dim"], "commutator": v["residual"], "worst_pair": list(v["pair"] or []),
             "invariance": inv[d]["residual"]}
            for d, v in comm.items()
        ],
        "max_commutator": worst_c,
        "max_invariance": worst_i,
        "centralizer_dim": next(iter(inv.values()))["centralizer_dim"],
        "family_mismatch": mismatch,
        "structural_zeros": zeros,
        "tolerance": tol,
        "pass": worst_c <= tol and worst_i <= tol and mismatch <= 1e-10 and all(v <= 1e-12 for v in zeros.values()),
    }
    if opts.dump_matrices:
        out["matrices"] = {
            ",".join(map(str, b.depth)): {k: [[_c(x) for x in row] for row in M] for k, M in block_matrices(hs, b).items()}
            for b in blocks
        }
    return out


def _problem(cfg: RunConfig) -> bt.BetheProblem:
    if not cfg.colors:
        raise ConfigError("colors: at least one Bethe root color is required for this command")
    return bt.BetheProblem(cfg.lie, cfg.aut, cfg.z, cfg.lams, cfg.lam0, cfg.chi, cfg.colors)


def run_bethe_solve(cfg: RunConfig, opts) -> dict:
    p = _problem(cfg)
    sols = bt.solve_bethe(p, n_starts=cfg.n_starts, seed=cfg.seed, tol=cfg.tolerances["solver"])
    out = []
    for s in sols:
        out.append(
            {
                "roots": _cv(s.roots),
                "residual": s.residual,
                "iterations": s.iterations,
                "nu_pairing": [_c(bt.nu_pairing(p, s.roots, j)) for j in range(p.m)],
            }
        )
    return {
        "colors": list(p.colors),
        "lambda_infinity": _cv(bt.lambda_infinity(p)),
        "solutions": out,
        "pass": bool(sols),
        "diagnostic": None if sols else "no start converged",
    }


def _verified(cfg: RunConfig, with_eigen: bool, with_singular: bool) -> dict:
    p = _problem(cfg)
    sols = bt.solve_bethe(p, n_starts=cfg.n_starts, seed=cfg.seed, tol=cfg.tolerances["solver"])
    mod = _module(cfg)
    chi = make_chi(cfg.aut, cfg.chi)
    hs = build_hamiltonians(cfg.lie, cfg.aut, cfg.z, chi)
    lam_inf = bt.lambda_infinity(p)
    reports, ok = [], bool(sols)
    for s in sols:
        psi = bt.weight_function(s.roots, p, mod)
        weight_ok = all(np.allclose(bt.block_weight(mod, k), lam_inf, atol=1e-12) for k in psi)
        entry = {"roots": _cv(s.roots), "weight_matches": weight_ok}
        ok &= weight_ok
        if with_eigen:
            E = {f"H_{i + 1},0": bt.eigenvalue_Ei(s.roots, p, i) for i in range(cfg.N)}
            rep = bt.verify_eigenvector(psi, hs, mod, E)
            entry["inconclusive"] = rep["inconclusive"]
            entry["eigen"] = {
                k: {kk: (_c(vv) if isinstance(vv, complex) else vv) for kk, vv in v.items()}
                for k, v in rep["ops"].items()
            }
            asserted = [v["residual"] for v in rep["ops"].values() if v["asserted"]]
            entry["max_eigen_residual"] = max(asserted, default=0.0)
            ok &= (not rep["inconclusive"]) and entry["max_eigen_residual"] <= cfg.tolerances["eigen"]
        if with_singular:
            r = bt.verify_singular(psi, p, mod)
            entry["singular_residual"] = r
            ok &= r <= cfg.tolerances["singular"]
        reports.append(entry)
    return {"colors": list(p.colors), "solutions": reports, "pass": bool(ok)}


def run_bethe_verify(cfg: RunConfig, opts) -> dict:
    return _verified(cfg, True, False)


def run_singular(cfg: RunConfig, opts) -> dict:
    if np.max(np.abs(cfg.chi), initial=0.0) > 0:
        raise ConfigError("chi: the singular-vector check requires chi = 0")
    return _verified(cfg, False, True)


def run_all(cfg: RunConfig, opts) -> dict:
    subs = {"info": run_info(cfg, opts), "surat": run_surat(cfg, opts), "commute": run_commute(cfg, opts)}
    if cfg.colors:
        subs["bethe-verify"] = run_bethe_verify(cfg, opts)
        if np.max(np.abs(cfg.chi), initial=0.0) == 0:
            subs["singular"] = run_singular(cfg, opts)
    return {"reports": subs, "pass": all(r["pass"] for r in subs.values())}


RUNNERS = {
    "info": run_info,
    "commute": run_commute,
    "surat": run_surat,
    "bethe-solve": run_bethe_solve,
    "bethe-verify": run_bethe_verify,
    "singular": run_singular,
    "all": run_all,
}


def run_command(cfg: RunConfig, cmd: str, opts) -> dict:
    t0 = time.perf_counter()
    body = RUNNERS[cmd](cfg, opts)
    return {
        "command": cmd,
        "config_hash": cfg.digest(),
        "seed": cfg.seed,
        "result": body,
        "pass": bool(body["pass"]),
        "wall_time": time.perf_counter() - t0,
    }


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cyclogaudin", description="Cyclotomic Gaudin model checks.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", required=True, help="JSON run configuration")
    ap.add_argument("--out", help="write the JSON report here instead of stdout")
    ap.add_argument("--seed", type=int, help="override the config seed")
    ap.add_argument("--dump-matrices", action="store_true", help="include Hamiltonian block matrices")
    ap.add_argument("--dump-algebra", action="store_true", help="include structure constants and sigma")
    return ap


def main(argv=None) -> int:
    opts = build_parser().parse_args(argv)
    try:
        cfg = parse_config(opts.config)
        if opts.seed is not None:
            cfg.seed = opts.seed
        report = run_command(cfg, opts.command, opts)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    text = json.dumps(report, sort_keys=True, indent=2, default=_jsonable)
    if opts.out:
        with open(opts.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0 if report["pass"] else 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
