"""Command-line entry point: ``critspde <subcommand> [--config FILE] [flags]``.

Configuration is a JSON object.  Values are taken from the file first, then
from environment variables ``CRITSPDE_<KEY>`` (upper case), then from flags.
Exit codes: 0 when the run's checks pass, 1 for invalid configuration, 2 for
blow-up, non-contraction or a failed check.
"""

from __future__ import annotations

import argparse
import io
import json
import os
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .space_index import DomainError

EXIT_OK, EXIT_CONFIG, EXIT_RUN = 0, 1, 2
FLAG_KEYS = ("seed", "out", "paths", "dt", "modes")
ENV_PREFIX = "CRITSPDE_"


class ConfigError(Exception):
    pass


def _exact(x):
    """Parse ``3``, ``"3/2"`` or ``0.5`` into an exact rational (floats via their decimal text)."""
    if isinstance(x, bool):
        raise ConfigError(f"expected a number, got {x!r}")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, (float, str)):
        try:
            return Fraction(str(x))
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"cannot parse number {x!r}") from exc
    raise ConfigError(f"expected a number, got {x!r}")


def _plain(x):
    if isinstance(x, Fraction):
        return int(x) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    return x


def load_config(args: argparse.Namespace) -> dict:
    cfg: dict = {}
    if args.config:
        try:
            cfg = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        if not isinstance(cfg, dict):
            raise ConfigError("config must be a JSON object")
    for key in FLAG_KEYS + ("scan",):
        env = os.environ.get(ENV_PREFIX + key.upper())
        if env is not None:
            cfg[key] = _coerce_env(key, env)
    for key in FLAG_KEYS:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    if getattr(args, "scan", False):
        cfg["scan"] = True
    return cfg


def _coerce_env(key: str, value: str):
    try:
        if key in ("seed", "paths", "modes"):
            return int(value)
        if key == "dt":
            return float(value)
        if key == "scan":
            return value.lower() in ("1", "true", "yes")
    except ValueError as exc:
        raise ConfigError(f"bad value for {ENV_PREFIX}{key.upper()}: {value!r}") from exc
    return value


def _f17(x) -> str:
    return f"{float(x):.17g}"


def _emit(cfg: dict, name: str, text: str) -> None:
    out = cfg.get("out")
    if out:
        Path(out).mkdir(parents=True, exist_ok=True)
        (Path(out) / name).write_text(text)
    else:
        sys.stdout.write(text)


def _report(cfg: dict, result: dict, started: float) -> str:
    rep = {
        "config": cfg,
        "seed": cfg.get("seed", 0),
        "version": __version__,
        "duration_s": time.perf_counter() - started,
        "result": result,
    }
    return json.dumps(rep, indent=2, sort_keys=True, default=_plain) + "\n"


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def _family(cfg: dict):
    from .criticality import make_family

    name = cfg.get("family")
    if not name:
        raise ConfigError("missing 'family'")
    params = {k: _exact(v) for k, v in (cfg.get("params") or {}).items()}
    try:
        return make_family(name, **params)
    except (TypeError, KeyError) as exc:
        raise ConfigError(f"invalid family or parameters: {exc}") from exc


def cmd_critical(cfg: dict) -> tuple:
    from .criticality import ParamPoint, critical_weight

    fam = _family(cfg)
    if cfg.get("scan"):
        grid = cfg.get("grid") or {}
        axes = {k: [_exact(v) for v in grid.get(k, [])] for k in ("p", "q", "kappa", "s")}
        ds = [int(v) for v in grid.get("d", [])]
        buf = io.StringIO()
        buf.write("family,d,p,q,kappa,s,admissible,kappa_crit\n")
        for d in ds:
            for p in axes["p"]:
                for q in axes["q"]:
                    for kappa in axes["kappa"]:
                        for s in axes["s"]:
                            try:
                                rep = critical_weight(fam, ParamPoint(d, p, q, kappa, s))
                                adm, kc = rep.admissible, rep.kappa_crit
                            except DomainError:
                                adm, kc = False, None
                            kc_txt = "" if kc is None else str(_plain(kc))
                            buf.write(f"{fam.name},{d},{_plain(p)},{_plain(q)},{_plain(kappa)},{_plain(s)},{str(adm).lower()},{kc_txt}\n")
        return {"csv": buf.getvalue()}, EXIT_OK
    pt = cfg.get("point") or {}
    try:
        kappa = pt.get("kappa")
        point = ParamPoint(int(pt["d"]), _exact(pt["p"]), _exact(pt["q"]), None if kappa is None else _exact(kappa), _exact(pt.get("s", 0)))
    except KeyError as exc:
        raise ConfigError(f"point is missing {exc}") from exc
    rep = critical_weight(fam, point)
    return rep.to_dict(), EXIT_OK if rep.admissible else EXIT_RUN


def cmd_parabolicity(cfg: dict) -> tuple:
    from .parabolicity import brute_force_margin, degenerate_check, ellipticity_margin

    if "a" not in cfg or "b" not in cfg:
        raise ConfigError("parabolicity needs 'a' and 'b' arrays")
    a = np.asarray(cfg["a"], dtype=float)
    b = np.asarray(cfg["b"], dtype=float)
    margin = ellipticity_margin(a, b)
    out = {"margin": margin, "brute_force": brute_force_margin(a, b, n_samples=int(cfg.get("samples", 10_000))), "parabolic": margin > 0}
    if "delta" in cfg:
        out["degenerate_ok"] = degenerate_check(a, b, float(cfg["delta"]))
    return out, EXIT_OK if margin > 0 else EXIT_RUN


def _noise_model(cfg: dict):
    from .noise import NoiseModel

    spec = cfg.get("noise")
    if not spec:
        return None
    kind = spec.get("kind", "none")
    coeffs = spec.get("coeffs")
    return NoiseModel(kind, None if coeffs is None else np.asarray(coeffs, dtype=float), float(spec.get("delta", 0.0)), float(spec.get("sigma", 1.0)))


def _initial(cfg: dict, grid):
    from .field import from_physical

    modes = cfg.get("initial") or {"sin": {"1": 1.0}}
    x = grid.points()
    vals = np.zeros(grid.shape)
    for kind, table in modes.items():
        fn = {"sin": np.sin, "cos": np.cos}.get(kind)
        if fn is None:
            raise ConfigError(f"unknown initial profile {kind!r}")
        for k, amp in table.items():
            vals = vals + float(amp) * fn(int(k) * x[0])
    vals = vals + float(cfg.get("offset", 0.0))
    return from_physical(grid, vals)


def _finite_mean(values) -> float | None:
    """Average over the paths that did not blow up; ``None`` when none survived."""
    ok = np.isfinite(values)
    return float(np.mean(values[ok])) if ok.any() else None


def cmd_simulate(cfg: dict) -> tuple:
    from .field import TorusGrid, sobolev_norms
    from .simulate import StepperConfig, build_equation, simulate_path

    grid = TorusGrid(int(cfg.get("d", 1)), int(cfg.get("modes", 32)))
    rhs = build_equation(cfg.get("equation", "heat"), cfg.get("params"), grid, _noise_model(cfg), check_parabolicity=bool(cfg.get("check_parabolicity", True)))
    sc = StepperConfig(cfg.get("scheme", "exponential"), float(cfg.get("dt", 1e-3)), float(cfg.get("T", 0.1)), int(cfg.get("seed", 0)), int(cfg.get("paths", 1)))
    every = int(cfg.get("record_every", max(1, sc.n_steps // 10)))
    res = simulate_path(sc, rhs, _initial(cfg, grid), record_every=every)
    idx = (slice(None), slice(None)) + (0,) * grid.d
    means = np.real(res.states[idx])
    l2 = sobolev_norms(grid, res.states, 0.0, 2.0)
    buf = io.StringIO()
    buf.write("path,t,mean,l2\n")
    for m in range(sc.paths):
        for i, t in enumerate(res.mesh):
            buf.write(f"{m},{_f17(t)},{_f17(means[i, m])},{_f17(l2[i, m])}\n")
    blown = [int(s) for s in res.blowup_step]
    summary = {
        "steps": sc.n_steps,
        "blowup_steps": blown,
        "final_mean_avg": _finite_mean(means[-1]),
        "final_l2_avg": _finite_mean(l2[-1]),
        "margin": rhs.margin,
    }
    code = EXIT_RUN if any(s >= 0 for s in blown) else EXIT_OK
    return {"csv": buf.getvalue(), "summary": summary}, code


def cmd_picard(cfg: dict) -> tuple:
    from .criticality import ParamPoint, growth_terms, make_family
    from .field import TorusGrid, from_physical
    from .noise import NoiseModel, WienerBank
    from .picard import SplitRHS, TruncatedProblem, TruncationSpaces, fixed_point_residual, picard_iterate, xfrak_terms
    from .simulate import build_equation
    from .space_index import TimeWeightIndex

    n = int(cfg.get("modes", 64))
    dt = float(cfg.get("dt", 1e-4))
    T = float(cfg.get("T", 0.05))
    steps = int(round(T / dt))
    grid = TorusGrid(1, n)
    linear = cfg.get("equation", "burgers") == "heat"
    sigma = float(cfg.get("sigma", 0.1))
    delta = float(cfg.get("delta", 1.0))
    full = build_equation("heat" if linear else "burgers", None, grid, NoiseModel("colored", delta=delta, sigma=sigma))
    lin = build_equation("heat", None, grid)
    fam = make_family("burgers-white", h=3, m=Fraction(21, 20))
    pt = ParamPoint(1, 4, 3, Fraction(0), Fraction(3, 5))
    tw = TimeWeightIndex(4, 0)
    spaces = TruncationSpaces(fam.pair(pt), tw, tuple(xfrak_terms(growth_terms(fam, pt)[:1], tw)))
    amp = float(cfg.get("amplitude", 0.05))
    x = grid.points()[0]
    w0 = from_physical(grid, amp * (np.sin(x) + 0.5 * np.cos(2 * x)))
    bank = WienerBank(full.n_drivers, dt, int(cfg.get("seed", 0)))
    reports = []
    ok = True
    for path in range(int(cfg.get("paths", 1))):
        dw = bank.increments(0, steps, [path])[0]
        gdw = full.noise(np.zeros((steps,) + grid.shape, dtype=complex), dw)
        split = SplitRHS(critical_drift=None if linear else full.drift)
        prob = TruncatedProblem(lin, split, spaces, w0, dt, steps, float(cfg.get("lam", 0.5)), gdw=gdw)
        res = picard_iterate(prob, int(cfg.get("max_iters", 50)), float(cfg.get("tol", 1e-10)))
        res.residual = fixed_point_residual(res, full, dw)
        rep = json.loads(res.to_json())
        rep["path"] = path
        reports.append(rep)
        ok &= res.converged and res.contracting
    return {"paths": reports}, EXIT_OK if ok else EXIT_RUN


def cmd_scaling(cfg: dict) -> tuple:
    from .scaling import besov_scaling_exponent, critical_smoothness, drift_noise_power_match

    fam = _family(cfg)
    out = {}
    try:
        a, noise, match = drift_noise_power_match(fam)
        out.update({"drift_power": a, "noise_power": noise, "match": match})
    except DomainError as exc:
        out["match_error"] = str(exc)
    if "q" in cfg and "d" in cfg:
        q, d = _exact(cfg["q"]), int(cfg["d"])
        out["critical_smoothness"] = critical_smoothness(fam, q, d)
        out["besov_exponent"] = besov_scaling_exponent(fam, q, _exact(cfg.get("p", 2)), d)
    return out, EXIT_OK


def cmd_smr_probe(cfg: dict) -> tuple:
    from .field import TorusGrid
    from .simulate import build_equation, estimate_smr_constants
    from .space_index import TimeWeightIndex

    n = int(cfg.get("modes", 32))
    dt = float(cfg.get("dt", 1e-3))
    T = float(cfg.get("T", 0.5))
    grid = TorusGrid(1, n)
    rhs = build_equation("heat", None, grid)
    steps = int(round(T / dt))
    x = grid.points()[0]
    probes = []
    for k in cfg.get("probe_modes", [1, 2, 4]):
        f = np.fft.fft(np.sin(int(k) * x)) / n
        probes.append(np.broadcast_to(f, (steps,) + grid.shape).copy())
    sto = [np.stack([np.fft.fft(np.cos(int(k) * x)) / n]) for k in cfg.get("probe_modes", [1, 2, 4])]
    tw = TimeWeightIndex(_exact(cfg.get("p", 2)), _exact(cfg.get("kappa", 0)))
    kd, ks = estimate_smr_constants(rhs, tw, float(cfg.get("theta", 0.0)), probes, sto, dt, T, int(cfg.get("paths", 8)), int(cfg.get("seed", 0)))
    return {"K_det_lower": kd, "K_sto_lower": ks, "note": "lower bounds from a surrogate norm"}, EXIT_OK


COMMANDS = {
    "critical": cmd_critical,
    "parabolicity": cmd_parabolicity,
    "simulate": cmd_simulate,
    "picard": cmd_picard,
    "scaling": cmd_scaling,
    "smr-probe": cmd_smr_probe,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="critspde", description="Critical spaces, parabolicity and SPDE simulation tools.")
    ap.add_argument("--version", action="version", version=f"critspde {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON configuration file")
        p.add_argument("--seed", type=int)
        p.add_argument("--out", help="output directory (stdout when omitted)")
        p.add_argument("--paths", type=int)
        p.add_argument("--dt", type=float)
        p.add_argument("--modes", type=int)
        p.add_argument("--scan", action="store_true", help="emit a CSV grid scan (critical only)")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    started = time.perf_counter()
    try:
        cfg = load_config(args)
        result, code = COMMANDS[args.command](cfg)
    except (ConfigError, DomainError, ValueError, TypeError) as exc:
        sys.stderr.write(f"critspde: {exc}\n")
        return EXIT_CONFIG
    csv_text = result.pop("csv", None) if isinstance(result, dict) else None
    if csv_text is not None:
        _emit(cfg, f"{args.command}.csv", csv_text)
    if result or csv_text is None:
        _emit(cfg, f"{args.command}.json", _report(cfg, result, started))
    return code


if __name__ == "__main__":
    sys.exit(main())
