"""JSON run configuration: parsing, validation and conversion to library objects."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .lie_core import (
    Automorphism,
    AutomorphismError,
    SimpleLieAlgebra,
    UnsupportedAlgebraError,
    build_automorphism,
    build_simple_lie_algebra,
)
from .takiff import ConfigurationError, check_orbits

DEFAULT_TOLERANCES = {
    "identity": 1e-8,
    "commute": 1e-9,
    "eigen": 1e-8,
    "singular": 1e-9,
    "solver": 1e-10,
}


class ConfigError(ValueError):
    """Invalid configuration; the message names the field."""


def _complex(v, where: str) -> complex:
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        return complex(v)
    if isinstance(v, (list, tuple)) and len(v) == 2 and all(isinstance(x, (int, float)) for x in v):
        return complex(v[0], v[1])
    raise ConfigError(f"{where}: expected a number or an [re, im] pair, got {v!r}")


def _cvec(v, where: str) -> np.ndarray:
    if not isinstance(v, list):
        raise ConfigError(f"{where}: expected a list")
    return np.array([_complex(x, f"{where}[{k}]") for k, x in enumerate(v)], dtype=complex)


@dataclass
class RunConfig:
    raw: dict
    lie: SimpleLieAlgebra
    aut: Automorphism
    z: np.ndarray
    lams: list  # simple-root coordinates
    lam0: np.ndarray
    chi: np.ndarray
    colors: tuple
    n_inf: int
    n_sites: tuple
    n0: int
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    seed: int = 0
    samples: int = 8
    n_starts: int = 200
    block_height: int = 6
    block_cap: int = 20000

    @property
    def N(self) -> int:
        return len(self.z)

    def digest(self) -> str:
        blob = json.dumps(self.raw, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def parse_config_dict(raw: dict) -> RunConfig:
    if not isinstance(raw, dict):
        raise ConfigError("config: top level must be an object")
    alg = raw.get("algebra")
    if not isinstance(alg, dict) or "series" not in alg or "rank" not in alg:
        raise ConfigError("algebra: needs 'series' and 'rank'")
    try:
        L = build_simple_lie_algebra(str(alg["series"]), int(alg["rank"]))
    except UnsupportedAlgebraError as exc:
        raise ConfigError(f"algebra: {exc}") from exc
    r = L.rank

    a = raw.get("automorphism", {"diagram_perm": list(range(r)), "tau_simple": [1] * r, "T": 1})
    try:
        perm = [int(x) for x in a.get("diagram_perm", list(range(r)))]
        taus = _cvec(a.get("tau_simple", [1] * r), "automorphism.tau_simple")
        T = int(a.get("T", 1))
        omega = raw.get("omega")
        omega = None if omega is None else _complex(omega, "omega")
        aut = build_automorphism(L, perm, taus, T, omega)
    except AutomorphismError as exc:
        raise ConfigError(f"automorphism: {exc}") from exc

    z = _cvec(raw.get("points", []), "points")
    try:
        check_orbits(z, aut.omega, aut.T)
    except ConfigurationError as exc:
        raise ConfigError(f"points: {exc}") from exc

    lam_raw = raw.get("weights", [[0] * r for _ in z])
    if len(lam_raw) != len(z):
        raise ConfigError(f"weights: expected {len(z)} weights, one per point")
    lams = []
    for k, w in enumerate(lam_raw):
        v = _cvec(w, f"weights[{k}]")
        if len(v) != r:
            raise ConfigError(f"weights[{k}]: expected {r} fundamental coordinates")
        lams.append(L.from_fundamental(v))
    lam0 = _cvec(raw.get("lambda0", [0] * r), "lambda0")
    if len(lam0) != r:
        raise ConfigError(f"lambda0: expected {r} fundamental coordinates")
    lam0 = L.from_fundamental(lam0)
    res = float(np.max(np.abs(aut.sigma_dual(lam0) - lam0)))
    if res > 1e-10:
        raise ConfigError(f"lambda0: must be sigma-invariant (residual {res:.3e})")
    chi = _cvec(raw.get("chi", [0] * r), "chi")
    if len(chi) != r:
        raise ConfigError(f"chi: expected {r} fundamental coordinates")
    chi = L.from_fundamental(chi)
    ok, res = aut.is_chi_admissible(chi, 1e-12)
    if not ok:
        raise ConfigError(f"chi: violates L_sigma chi = omega chi (residual {res:.3e})")

    colors = raw.get("colors", [])
    if not isinstance(colors, list) or any(not isinstance(c, int) or c < 0 or c >= r for c in colors):
        raise ConfigError(f"colors: expected a list of 0-based simple-root indices below {r}")

    tr = raw.get("truncation", {})
    n_inf = int(tr.get("n_inf", 2))
    n_sites = tuple(int(x) for x in tr.get("n_sites", [1] * len(z)))
    n0 = int(tr.get("n0", 1))
    if len(n_sites) != len(z):
        raise ConfigError(f"truncation.n_sites: expected {len(z)} orders, one per point")
    if min((n_inf, n0) + n_sites) < 1:
        raise ConfigError("truncation: every order must be >= 1")

    tol = dict(DEFAULT_TOLERANCES)
    for k, v in raw.get("tolerances", {}).items():
        if k not in tol:
            raise ConfigError(f"tolerances.{k}: unknown tolerance")
        tol[k] = float(v)
    return RunConfig(
        raw=raw,
        lie=L,
        aut=aut,
        z=z,
        lams=lams,
        lam0=lam0,
        chi=chi,
        colors=tuple(colors),
        n_inf=n_inf,
        n_sites=n_sites,
        n0=n0,
        tolerances=tol,
        seed=int(raw.get("seed", 0)),
        samples=int(raw.get("samples", 8)),
        n_starts=int(raw.get("n_starts", 200)),
        block_height=int(raw.get("block_height", 6)),
        block_cap=int(raw.get("block_cap", 20000)),
    )


def parse_config(path) -> RunConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except FileNotFoundError as exc:
        raise ConfigError(f"config: file {path} not found") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config: invalid JSON ({exc})") from exc
    return parse_config_dict(raw)


__all__ = ["RunConfig", "ConfigError", "parse_config", "parse_config_dict", "DEFAULT_TOLERANCES"]
