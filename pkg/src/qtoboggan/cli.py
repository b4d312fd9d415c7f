"""Batch front-end: config in, spectra / metric matrices / residual reports out.

Commands: spectrum, metric, shoot, compare, validate.  Exit codes: 0 success,
2 validation failure, 3 solver error, 4 config error.

Heavy numeric imports are deferred until after the TOBOGGAN_THREADS
environment variable has been applied, so BLAS thread caps take effect.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from typing import Any, Dict, List, Optional, Tuple

from .errors import (
    ConfigError,
    IllConditionedS,
    IncompleteBasis,
    QTobogganError,
    SchemaMismatch,
    SelfOrthogonalMode,
)

__all__ = ["RunConfig", "load_config", "run", "report_render", "main"]

SCHEMA_VERSION = 1
_TOP_KEYS = {"version", "command", "model", "grid", "shoot", "tolerances", "output_dir", "seed"}
_GRID_KEYS = {"half_width", "n"}
_SHOOT_KEYS = {
    "gamma_max",
    "steps",
    "match_gamma",
    "root_tol",
    "max_iter",
    "phase_resolution",
    "seed_ratio",
    "guesses",
    "scan",
}
_SCAN_KEYS = {"start", "stop", "count"}
_COMMANDS = ("spectrum", "metric", "shoot", "compare", "validate")
_DIAG_SCHEMA = ("quasiH", "quasiW", "hermiticity", "min_eig", "cond_S", "cond_Theta")

DEFAULT_TOLERANCES: Dict[str, float] = {
    "filter_im": 1e-6,
    "pairing": 1e-12,
    "sigma_floor": 1e-12,
    "compare_rel": 1e-3,
    "residual": 1e-8,
    "gram": 1e-8,
    "completeness": 1e-8,
    "rebuild": 1e-8,
    "ms_identity": 1e-10,
    "delta_identity": 1e-8,
    "quasi_hermiticity": 1e-8,
    "theta_hermiticity": 1e-8,
    "kappa_invariance": 1e-12,
    "pt": 1e-12,
    "w_identity_offdiag": 1e-8,
    "degeneration": 1e-10,
    "epsilon_independence": 1e-6,
}


class RunConfig:
    """Parsed and validated run configuration (model, contour, grid, command...)."""

    def __init__(
        self,
        model: Any,
        contour: Any,
        grid: Optional[Any],
        command: Optional[str],
        tolerances: Dict[str, float],
        output_dir: str,
        seed: int,
        shoot_cfg: Optional[Any],
        guesses: List[complex],
        scan: Optional[Dict[str, float]],
    ) -> None:
        self.model = model
        self.contour = contour
        self.grid = grid
        self.command = command
        self.tolerances = tolerances
        self.output_dir = output_dir
        self.seed = seed
        self.shoot_cfg = shoot_cfg
        self.guesses = guesses
        self.scan = scan


def _apply_override(raw: Dict[str, Any], spec: str) -> None:
    if "=" not in spec:
        raise ConfigError(f"override must look like KEY=VALUE, got {spec!r}")
    key, text = spec.split("=", 1)
    try:
        value = json.loads(text)
    except json.JSONDecodeError:
        value = text
    node = raw
    parts = key.split(".")
    for part in parts[:-1]:
        node = node.setdefault(part, {})
        if not isinstance(node, dict):
            raise ConfigError(f"override path {key!r} crosses a non-object value")
    node[parts[-1]] = value


def _check_keys(section: str, payload: Dict[str, Any], allowed: set) -> None:
    unknown = set(payload) - allowed
    if unknown:
        raise ConfigError(f"unknown {section} keys: {sorted(unknown)}")


def parse_config_dict(raw: Dict[str, Any]) -> RunConfig:
    """Validate the raw config mapping and build the typed RunConfig."""
    from .discrete import GridSpec
    from .model import model_from_dict
    from .shoot import ShootConfig

    if not isinstance(raw, dict):
        raise ConfigError("config root must be an object")
    if "version" not in raw:
        raise SchemaMismatch("config is missing the schema 'version' field")
    if raw["version"] != SCHEMA_VERSION:
        raise SchemaMismatch(
            f"config schema version {raw['version']!r} != supported {SCHEMA_VERSION}"
        )
    _check_keys("config", raw, _TOP_KEYS)
    if "model" not in raw:
        raise ConfigError("config is missing the 'model' section")
    model, contour = model_from_dict(raw["model"])

    grid = None
    if "grid" in raw:
        _check_keys("grid", raw["grid"], _GRID_KEYS)
        try:
            grid = GridSpec(
                half_width=float(raw["grid"]["half_width"]),
                n=int(raw["grid"]["n"]),
                epsilon=contour.epsilon,
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"malformed grid section: {exc}") from exc

    command = raw.get("command")
    if command is not None and command not in _COMMANDS:
        raise ConfigError(f"unknown command {command!r}; expected one of {_COMMANDS}")

    tolerances = dict(DEFAULT_TOLERANCES)
    for key, val in raw.get("tolerances", {}).items():
        if not isinstance(val, (int, float)) or not val > 0:
            raise ConfigError(f"tolerance {key!r} must be a positive number, got {val!r}")
        tolerances[str(key)] = float(val)

    shoot_cfg = None
    guesses: List[complex] = []
    scan = None
    if "shoot" in raw:
        section = dict(raw["shoot"])
        _check_keys("shoot", section, _SHOOT_KEYS)
        raw_guesses = section.pop("guesses", [])
        try:
            guesses = [complex(g) if not isinstance(g, list) else complex(*g) for g in raw_guesses]
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"malformed shoot.guesses: {exc}") from exc
        if "scan" in section:
            scan_raw = section.pop("scan")
            _check_keys("shoot.scan", scan_raw, _SCAN_KEYS)
            try:
                scan = {
                    "start": float(scan_raw["start"]),
                    "stop": float(scan_raw["stop"]),
                    "count": int(scan_raw["count"]),
                }
            except (KeyError, TypeError, ValueError) as exc:
                raise ConfigError(f"malformed shoot.scan section: {exc}") from exc
            if scan["count"] < 2:
                raise ConfigError("shoot.scan.count must be >= 2")
        try:
            shoot_cfg = ShootConfig(**section)
        except TypeError as exc:
            raise ConfigError(f"malformed shoot section: {exc}") from exc

    seed = raw.get("seed", 0)
    if not isinstance(seed, int):
        raise ConfigError(f"seed must be an integer, got {seed!r}")

    output_dir = raw.get("output_dir", ".")
    if not isinstance(output_dir, str):
        raise ConfigError(f"output_dir must be a string, got {output_dir!r}")

    return RunConfig(
        model=model,
        contour=contour,
        grid=grid,
        command=command,
        tolerances=tolerances,
        output_dir=output_dir,
        seed=seed,
        shoot_cfg=shoot_cfg,
        guesses=guesses,
        scan=scan,
    )


def load_config(path: str, overrides: Optional[List[str]] = None) -> RunConfig:
    """Read a JSON config file, apply --override entries, validate the schema."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    for spec in overrides or []:
        _apply_override(raw, spec)
    return parse_config_dict(raw)


def _json_dump(payload: Dict[str, Any], path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def report_render(diagnostics: Dict[str, Any]) -> str:
    """Deterministic text table of metric diagnostics (fixed order, 10 sig digits)."""
    if not isinstance(diagnostics, dict):
        raise SchemaMismatch("diagnostics must be a mapping")
    unknown = set(diagnostics) - set(_DIAG_SCHEMA)
    if unknown:
        raise SchemaMismatch(f"unknown diagnostics keys: {sorted(unknown)}")
    header = f"{'quantity':<14} {'value':>18}"
    lines = [header, "-" * len(header)]
    for key in _DIAG_SCHEMA:
        if key not in diagnostics:
            continue
        value = diagnostics[key]
        if value is None:
            text = "n/a"
        elif isinstance(value, (int, float)):
            text = format(float(value), ".10g")
        else:
            raise SchemaMismatch(f"diagnostics[{key!r}] must be numeric or null, got {value!r}")
        lines.append(f"{key:<14} {text:>18}")
    return "\n".join(lines) + "\n"


def _require_grid(config: RunConfig) -> None:
    if config.grid is None:
        raise ConfigError("this command needs a 'grid' section in the config")


def _require_shoot(config: RunConfig) -> None:
    if config.shoot_cfg is None:
        raise ConfigError("this command needs a 'shoot' section in the config")
    if not config.guesses:
        raise ConfigError("this command needs shoot.guesses in the config")


def _grid_eigensystem(config: RunConfig, return_raw: bool = False):
    """Rectify, discretize, solve, filter, and normalize; returns (pair, es).

    With return_raw=True also returns the unfiltered eigensystem so callers can
    normalize the complete mode set without solving twice.
    """
    from . import discrete, model, spectra

    rect = model.rectify_model(config.model, config.contour.winding)
    pair = discrete.build_operators(rect, config.grid)
    es_raw = spectra.solve_generalized(pair, tol=config.tolerances["pairing"])
    es = spectra.filter_real(es_raw, tol_im=config.tolerances["filter_im"])
    es = spectra.normalize_biorthogonal(es, pair.W, sigma_tol=config.tolerances["sigma_floor"])
    if return_raw:
        return pair, es, es_raw
    return pair, es


def _write_spectrum_artifacts(config: RunConfig, out_dir: str, pair, es) -> None:
    import numpy as np

    from . import discrete, spectra

    spectra.save_spectrum_csv(es, os.path.join(out_dir, "spectrum.csv"))
    gram_off = es.gram - np.eye(es.m)
    payload = {
        "n": pair.n,
        "retained_modes": es.m,
        "discarded_modes": es.discarded,
        "pt_residual": discrete.pt_residual(pair),
        "max_residual_right": float(es.residual_right.max()),
        "max_residual_left": float(es.residual_left.max()),
        "max_offdiag_gram": float(np.abs(gram_off).max()),
        "weight_condition": pair.weight_condition,
    }
    _json_dump(payload, os.path.join(out_dir, "residuals.json"))


def _cmd_spectrum(config: RunConfig, out_dir: str) -> int:
    _require_grid(config)
    pair, es = _grid_eigensystem(config)
    _write_spectrum_artifacts(config, out_dir, pair, es)
    return 0


def _cmd_metric(config: RunConfig, out_dir: str) -> int:
    from . import discrete, metric

    _require_grid(config)
    pair, es = _grid_eigensystem(config)
    _write_spectrum_artifacts(config, out_dir, pair, es)
    result = metric.build_metric(es, pair)
    h = config.grid.h
    eps = config.grid.epsilon
    discrete.save_matrix_bin(result.Theta, os.path.join(out_dir, "theta.bin"), h, eps)
    discrete.save_matrix_bin(result.S, os.path.join(out_dir, "S.bin"), h, eps)
    _json_dump(result.diagnostics, os.path.join(out_dir, "diagnostics.json"))
    sys.stdout.write(report_render(result.diagnostics))
    return 0


def _shoot_roots(config: RunConfig):
    import numpy as np

    from . import shoot

    roots = shoot.find_eigenvalues(
        config.model,
        config.contour.winding,
        config.contour,
        config.shoot_cfg,
        config.guesses,
    )
    return np.asarray(roots)


def _cmd_shoot(config: RunConfig, out_dir: str) -> int:
    import csv

    import numpy as np

    from . import shoot

    _require_shoot(config)
    roots = _shoot_roots(config)
    with open(os.path.join(out_dir, "roots.csv"), "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", "re_E", "im_E"])
        for j, r in enumerate(roots):
            writer.writerow([j, repr(float(r.real)), repr(float(r.imag))])
    if config.scan is not None:
        energies = np.linspace(config.scan["start"], config.scan["stop"], config.scan["count"])
    elif len(roots):
        lo = float(roots.real.min()) - 1.0
        hi = float(roots.real.max()) + 1.0
        energies = np.linspace(lo, hi, 101)
    else:
        g = np.asarray(config.guesses)
        energies = np.linspace(float(g.real.min()) - 1.0, float(g.real.max()) + 1.0, 101)
    abs_F = shoot.scan_mismatch(
        config.model, config.contour.winding, config.contour, config.shoot_cfg, energies
    )
    shoot.save_scan_csv(os.path.join(out_dir, "scan.csv"), energies, abs_F)
    return 0


def _cmd_compare(config: RunConfig, out_dir: str) -> int:
    import csv

    _require_grid(config)
    _require_shoot(config)
    pair, es = _grid_eigensystem(config)
    roots = _shoot_roots(config)
    k = min(len(roots), es.m)
    if k == 0:
        raise ConfigError("compare found no modes on one of the two routes")
    rel_tol = config.tolerances["compare_rel"]
    rows = []
    worst = 0.0
    for j in range(k):
        e_grid = float(es.lambdas[j].real)
        e_shoot = float(roots[j].real)
        delta = abs(e_grid - e_shoot)
        rel = delta / max(1.0, abs(e_grid))
        worst = max(worst, rel)
        rows.append([j, repr(e_grid), repr(e_shoot), repr(delta), repr(rel)])
    with open(os.path.join(out_dir, "delta.csv"), "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", "re_E_grid", "re_E_shoot", "abs_delta", "rel_delta"])
        writer.writerows(rows)
    _json_dump(
        {"compared_modes": k, "max_rel_delta": worst, "tolerance": rel_tol},
        os.path.join(out_dir, "compare.json"),
    )
    if worst > rel_tol:
        sys.stderr.write(
            f"compare: max relative delta {worst:.3e} exceeds tolerance {rel_tol:.1e}\n"
        )
        return 2
    return 0


def _cmd_validate(config: RunConfig, out_dir: str) -> int:
    """Run the module invariant suite on the configured problem; stop on first failure."""
    import numpy as np

    from . import discrete, metric, spectra
    from .contour import ContourSpec

    _require_grid(config)
    tol = config.tolerances
    rng = np.random.default_rng(config.seed)
    checks: List[Tuple[str, float, float, bool]] = []  # (name, value, limit, ok)

    def check(name: str, value: float, limit: float, larger_ok: bool = False) -> bool:
        ok = value > limit if larger_ok else value <= limit
        checks.append((name, float(value), float(limit), bool(ok)))
        word = "PASS" if ok else "FAIL"
        cmp = ">" if larger_ok else "<="
        sys.stdout.write(f"{word} {name}: {value:.6e} {cmp} {limit:.6e}\n")
        return ok

    def bail() -> int:
        _json_dump(
            {
                "checks": [
                    {"name": n, "value": v, "limit": l, "pass": ok} for n, v, l, ok in checks
                ],
                "passed": all(ok for *_, ok in checks),
            },
            os.path.join(out_dir, "validate.json"),
        )
        return 0 if all(ok for *_, ok in checks) else 2

    pair, es, es_raw = _grid_eigensystem(config, return_raw=True)
    # The complete mode set (no reality filter) supports resolution-of-identity
    # checks; normalization of it can fail on defective pairs, which we report
    # as a failed check rather than a crash.
    try:
        es_all = spectra.normalize_biorthogonal(
            es_raw, pair.W, sigma_tol=tol["sigma_floor"]
        )
    except SelfOrthogonalMode:
        es_all = None
    if es_all is None:
        check("full_set_biorthogonal", math.inf, tol["gram"])
        return bail()

    if config.model.pt_flag:
        if not check("pt_residual", discrete.pt_residual(pair), tol["pt"]):
            return bail()
    if not check("max_mode_residual", max(es.residual_right.max(), es.residual_left.max()), tol["residual"]):
        return bail()
    gram_off = float(np.abs(es.gram - np.eye(es.m)).max())
    if not check("gram_offdiag", gram_off, tol["gram"]):
        return bail()
    if not check("completeness", spectra.completeness_residual(es_all, pair.W), tol["completeness"]):
        return bail()
    if not check("rebuild", spectra.spectral_rebuild_residual(es_all, pair), tol["rebuild"]):
        return bail()

    # kappa invariance of spectrum-level quantities
    kappa = rng.uniform(0.5, 2.0, es.m) * np.exp(1j * rng.uniform(0, 2 * np.pi, es.m))
    es_k = spectra.apply_kappa(es, kappa)
    WV = pair.W @ es_k.right
    gram_k = es_k.left.conj().T @ WV
    # Rescaling moves each gram entry by exactly kappa_i / kappa_j; compare
    # against that prediction so solver noise in the off-diagonals cancels.
    predicted = (kappa[:, None] / kappa[None, :]) * es.gram
    if not check("kappa_gram_drift", float(np.abs(gram_k - predicted).max()), tol["kappa_invariance"]):
        return bail()
    kappa_all = rng.uniform(0.5, 2.0, es_all.m) * np.exp(
        1j * rng.uniform(0, 2 * np.pi, es_all.m)
    )
    drift = abs(
        spectra.spectral_rebuild_residual(spectra.apply_kappa(es_all, kappa_all), pair)
        - spectra.spectral_rebuild_residual(es_all, pair)
    )
    if not check("kappa_rebuild_drift", drift, tol["kappa_invariance"]):
        return bail()

    result = metric.build_metric(es, pair)
    ms = float(
        np.linalg.norm(result.M @ result.S - np.eye(es.m)) / np.linalg.norm(np.eye(es.m))
    )
    if not check("ms_identity", ms, tol["ms_identity"]):
        return bail()
    if not check(
        "delta_identity",
        metric.delta_identity_residual(es, pair, result.Theta),
        tol["delta_identity"],
    ):
        return bail()
    if not check("quasiH", result.diagnostics["quasiH"], tol["quasi_hermiticity"]):
        return bail()
    if not check("quasiW", result.diagnostics["quasiW"], tol["quasi_hermiticity"]):
        return bail()
    if not check("theta_hermiticity", result.diagnostics["hermiticity"], tol["theta_hermiticity"]):
        return bail()
    if not check("theta_min_eig", result.diagnostics["min_eig"], 0.0, larger_ok=True):
        return bail()

    # uniform-kappa homogeneity: Theta[2 kappa] = 4 Theta[kappa]
    r2 = metric.build_metric(es, pair, kappa=2.0 * result.kappa_used)
    hom = float(
        np.linalg.norm(r2.Theta - 4.0 * result.Theta) / np.linalg.norm(result.Theta)
    )
    if not check("kappa_homogeneity", hom, tol["kappa_invariance"]):
        return bail()

    try:
        result_full = metric.build_metric(es_all, pair)
    except IllConditionedS:
        result_full = None
    if result_full is None:
        check("full_set_metric_conditioning", math.inf, metric.COND_S_THRESHOLD)
        return bail()

    if config.contour.winding == 0:
        off = result_full.S - np.diag(np.diag(result_full.S))
        ratio = float(
            np.linalg.norm(off) / np.linalg.norm(np.diag(np.diag(result_full.S)))
        )
        if not check("degeneration_S_offdiag", ratio, tol["w_identity_offdiag"]):
            return bail()
        single = metric.single_series_theta(es_all)
        dd = float(np.linalg.norm(result_full.Theta - single) / np.linalg.norm(single))
        if not check("degeneration_theta", dd, tol["degeneration"]):
            return bail()

    lam_t = np.linalg.eigvals(
        np.linalg.solve(result_full.Theta, pair.H.conj().T @ result_full.Theta)
    )
    lam_h = np.linalg.eigvals(pair.H)
    dist = np.abs(lam_t[np.newaxis, :] - lam_h[:, np.newaxis]).min(axis=1)
    spec_eq = float(np.max(dist / np.maximum(1.0, np.abs(lam_h))))
    if not check("theta_similarity_spectrum", spec_eq, tol["quasi_hermiticity"]):
        return bail()

    if config.shoot_cfg is not None and config.guesses:
        from dataclasses import replace as dc_replace

        from . import shoot

        roots1 = _shoot_roots(config)
        contour2 = ContourSpec(
            epsilon=2.0 * config.contour.epsilon, winding=config.contour.winding
        )
        roots2 = np.asarray(
            shoot.find_eigenvalues(
                config.model,
                contour2.winding,
                contour2,
                config.shoot_cfg,
                config.guesses,
            )
        )
        k = min(len(roots1), len(roots2))
        if k == 0:
            check("shoot_epsilon_independence", 1.0, tol["epsilon_independence"])
            return bail()
        rel = float(
            np.max(np.abs(roots1[:k] - roots2[:k]) / np.maximum(1.0, np.abs(roots1[:k])))
        )
        if not check("shoot_epsilon_independence", rel, tol["epsilon_independence"]):
            return bail()

        # refinement order: uniform-grid eigenvalue error must fall ~16x per halving
        base = min(config.shoot_cfg.steps, 400)
        seq = []
        for steps in (base, 2 * base, 4 * base):
            cfg_u = dc_replace(config.shoot_cfg, steps=steps, phase_resolution=None)
            r = shoot.find_eigenvalues(
                config.model,
                config.contour.winding,
                config.contour,
                cfg_u,
                config.guesses[:1],
            )
            if len(r) != 1:
                check("shoot_refinement_order", 0.0, 1.0, larger_ok=True)
                return bail()
            seq.append(complex(r[0]))
        d1 = abs(seq[0] - seq[1])
        d2 = abs(seq[1] - seq[2])
        if d1 < 1e-11:  # already at the noise floor: refinement trivially converged
            check("shoot_refinement_order", 16.0, 6.0, larger_ok=True)
        else:
            ratio = d1 / max(d2, 1e-300)
            if not check("shoot_refinement_order", ratio, 6.0, larger_ok=True):
                return bail()

    return bail()


def run(config: RunConfig, command: Optional[str] = None, out_dir: Optional[str] = None) -> int:
    """Execute one command; returns the process exit code."""
    cmd = command or config.command
    if cmd is None:
        raise ConfigError("no command given (config 'command' key or --command flag)")
    if cmd not in _COMMANDS:
        raise ConfigError(f"unknown command {cmd!r}; expected one of {_COMMANDS}")
    target = out_dir or config.output_dir
    os.makedirs(target, exist_ok=True)
    handler = {
        "spectrum": _cmd_spectrum,
        "metric": _cmd_metric,
        "shoot": _cmd_shoot,
        "compare": _cmd_compare,
        "validate": _cmd_validate,
    }[cmd]
    return handler(config, target)


def _apply_thread_cap() -> None:
    cap = os.environ.get("TOBOGGAN_THREADS")
    if not cap:
        return
    for var in (
        "OMP_NUM_THREADS",
        "OPENBLAS_NUM_THREADS",
        "MKL_NUM_THREADS",
        "NUMEXPR_NUM_THREADS",
    ):
        os.environ.setdefault(var, cap)


def main(argv: Optional[List[str]] = None) -> int:
    _apply_thread_cap()
    parser = argparse.ArgumentParser(
        prog="qtoboggan",
        description="Winding-contour eigenproblems: rectified spectra, metric operators, shooting.",
    )
    parser.add_argument("--config", required=True, help="path to a JSON run configuration")
    parser.add_argument("--command", choices=_COMMANDS, help="override the config's command")
    parser.add_argument("--out", help="override the config's output directory")
    parser.add_argument(
        "--override",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override a config entry by dotted path (repeatable), e.g. grid.n=800",
    )
    args = parser.parse_args(argv)
    try:
        config = load_config(args.config, overrides=args.override)
        return run(config, command=args.command, out_dir=args.out)
    except (ConfigError, SchemaMismatch) as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return 4
    except IncompleteBasis as exc:
        sys.stderr.write(f"validation error: {exc}\n")
        return 2
    except QTobogganError as exc:
        sys.stderr.write(f"solver error: {exc}\n")
        return 3


if __name__ == "__main__":
    sys.exit(main())
