"""Command-line experiment driver.

Usage::

    heatchannel SUBCOMMAND CONFIG [--out PATH] [--bits]

``SUBCOMMAND`` is one of ``bounds``, ``simulate``, ``slope``,
``concentration``, ``bler``, ``classify`` or ``run`` (take the subcommand from
the config's ``command`` key).  ``CONFIG`` is a JSON or YAML mapping.  CSV goes
to ``--out`` (or the config's ``output`` key, or stdout); a short summary goes
to stderr.  Exit status: 0 success, 2 configuration error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import sys
from pathlib import Path
from typing import Any, Mapping

import numpy as np
import yaml

from .bounds import ach_limit, bound_report
from .channel import HeatingChannel, NoiseModel
from .codec import bler_sim
from .errors import ConfigError, HeatChannelError
from .estimate import concentration_check, slope_estimate
from .profiles import alpha_subsampled, classify, profile_from_spec

__all__ = ["main", "run_config", "load_config", "COLUMNS", "EXIT_OK", "EXIT_CONFIG", "EXIT_RUNTIME"]

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3

COLUMNS = {
    "bounds": [
        "profile", "snr", "L", "alpha", "alpha_L", "fb_upper", "unit_cost",
        "ach_limit", "ach_rate", "neg_log_beta_tilde",
    ],
    "simulate": ["k", "x", "theta", "y"],
    "slope": [
        "config_hash", "snr", "estimate", "stderr", "trials", "seed", "raw",
        "clamped", "fb_upper_over_snr", "unit_cost",
    ],
    "concentration": [
        "n", "m", "eps", "empirical_prob", "stderr", "exact_mean_y", "exact_mean_z",
        "limit_mean_y", "limit_mean_z", "sample_mean_y", "sample_mean_z", "trials", "seed",
    ],
    "bler": [
        "profile", "P", "L", "n", "rate", "bler", "stderr", "power_violation_fraction",
        "seed", "method", "num_messages",
    ],
    "classify": [
        "profile", "verdict", "annotation", "heuristic", "ratio_tail_min", "ratio_tail_max", "reason",
    ],
}

# columns holding nats that --bits converts
NAT_COLUMNS = {
    "bounds": {"fb_upper", "unit_cost", "ach_limit", "ach_rate", "neg_log_beta_tilde"},
    "slope": {"estimate", "stderr", "raw", "fb_upper_over_snr", "unit_cost"},
    "bler": {"rate"},
}


# -- config access ------------------------------------------------------------


def load_config(path: str | Path) -> dict:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}", field="config") from exc
    try:
        data = json.loads(text) if p.suffix == ".json" else yaml.safe_load(text)
    except (json.JSONDecodeError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot parse config: {exc}", field="config") from exc
    if not isinstance(data, dict):
        raise ConfigError("top level must be a mapping", field="config")
    return data


_MISSING = object()


def _get(cfg: Mapping, key: str, kind, default=_MISSING):
    if key not in cfg:
        if default is _MISSING:
            raise ConfigError("missing required key", field=key)
        return default
    v = cfg[key]
    if kind is float:
        # YAML 1.1 reads exponents without a sign (1.0e4) as strings
        if isinstance(v, str):
            try:
                return float(v)
            except ValueError:
                pass
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ConfigError(f"expected a number, got {v!r}", field=key)
        return float(v)
    if kind is int:
        if isinstance(v, bool) or not isinstance(v, int):
            raise ConfigError(f"expected an integer, got {v!r}", field=key)
        return v
    if kind is str:
        if not isinstance(v, str):
            raise ConfigError(f"expected a string, got {v!r}", field=key)
        return v
    return v


def _list(cfg: Mapping, key: str, kind, default=_MISSING) -> list:
    v = cfg.get(key, default)
    if v is _MISSING:
        raise ConfigError("missing required key", field=key)
    items = v if isinstance(v, list) else [v]
    return [_get({key: item}, key, kind) for item in items]


def _profile(cfg: Mapping):
    if "profile" not in cfg:
        raise ConfigError("missing required key", field="profile")
    prof, phys_sigma2 = profile_from_spec(cfg["profile"])
    sigma2 = _get(cfg, "sigma2", float, phys_sigma2 if phys_sigma2 is not None else 1.0)
    if not sigma2 > 0:
        raise ConfigError("must be positive", field="sigma2")
    return prof, sigma2


def _noise(cfg: Mapping) -> NoiseModel:
    spec = cfg.get("noise", {"type": "iid"})
    if not isinstance(spec, Mapping):
        raise ConfigError("expected a mapping", field="noise")
    kind = spec.get("type", "iid")
    if kind == "iid":
        return NoiseModel.iid()
    if kind == "ar1":
        a = _get(spec, "a", float)
        if not 0 <= a < 1:
            raise ConfigError("AR(1) coefficient must lie in [0, 1)", field="noise.a")
        return NoiseModel.ar1(a)
    raise ConfigError(f"unknown noise type {kind!r}", field="noise.type")


def config_hash(cfg: Mapping) -> str:
    canon = json.dumps(cfg, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()[:12]


# -- subcommands ------------------------------------------------------------------


def _cmd_bounds(cfg):
    prof, sigma2 = _profile(cfg)
    snrs = _list(cfg, "snr", float)
    Ls = _list(cfg, "L", int, 1)
    eps = _get(cfg, "eps", float, None)
    ell0 = _get(cfg, "ell0", int, 1)
    rows = []
    for L in Ls:
        for snr in snrs:
            r = bound_report(prof, snr, L, sigma2, eps, ell0)
            rows.append([r.profile, snr, L, r.alpha, r.alpha_L, r.fb_upper, r.unit_cost,
                         r.ach_limit, r.ach_rate, r.neg_log_beta_tilde])
    return rows, f"{len(rows)} bound rows for {prof.label()}"


def _inputs(cfg, rng) -> np.ndarray:
    spec = cfg.get("inputs")
    if isinstance(spec, list):
        return np.asarray([_get({"inputs": v}, "inputs", float) for v in spec])
    if isinstance(spec, Mapping):
        kind = spec.get("type")
        n = _get(spec, "n", int)
        if kind == "gaussian":
            return math.sqrt(_get(spec, "P", float)) * rng.standard_normal(n)
        if kind == "zeros":
            return np.zeros(n)
        if kind == "constant":
            return np.full(n, _get(spec, "value", float))
        raise ConfigError(f"unknown input type {kind!r}", field="inputs.type")
    raise ConfigError("expected a list of numbers or an input generator mapping", field="inputs")


def _cmd_simulate(cfg):
    from .seeding import rng_for

    prof, sigma2 = _profile(cfg)
    seed = _get(cfg, "seed", int, 0)
    xs = _inputs(cfg, rng_for(seed, "simulate/inputs", 0))
    history = _get(cfg, "history", str, "auto")
    ch = HeatingChannel(prof, sigma2, _noise(cfg), seed=seed, history=history)
    tx = ch.transmit(xs)
    rows = [[k + 1, tx.x[k], tx.theta[k], tx.y[k]] for k in range(len(xs))]
    return rows, f"{len(xs)} steps, mean power {tx.mean_power:.6g}"


def _cmd_slope(cfg):
    prof, sigma2 = _profile(cfg)
    grid = _list(cfg, "snr", float)
    L = _get(cfg, "L", int)
    x = _get(cfg, "xi2_over_sigma2", float)
    trials = _get(cfg, "trials", int, 100_000)
    seed = _get(cfg, "seed", int, 0)
    rep = slope_estimate(prof, sigma2, grid, L, x, trials, seed, workers=_get(cfg, "workers", int, 1))
    h = config_hash(cfg)
    rows = []
    for snr, pt, fbs in zip(grid, rep.extras["points"], rep.extras["fb_upper_over_snr"]):
        rows.append([h, snr, pt.estimate / snr, pt.stderr / snr, trials, seed,
                     pt.extras["raw"] / snr, pt.extras["clamped"], fbs, rep.extras["unit_cost"]])
    summary = (
        f"unit-cost lower estimate {rep.estimate:.6g} +/- {rep.stderr:.2g} at snr={rep.extras['best_snr']:g}; "
        f"unit_cost={rep.extras['unit_cost']:.6g}; deterministic gain-penalty={rep.extras['gain_minus_penalty']:.6g}"
    )
    return rows, summary


def _cmd_concentration(cfg):
    prof, sigma2 = _profile(cfg)
    P = _get(cfg, "P", float)
    L = _get(cfg, "L", int)
    ns = _list(cfg, "n", int)
    trials = _get(cfg, "trials", int, 200)
    seed = _get(cfg, "seed", int, 0)
    if "eps" in cfg:
        eps = _get(cfg, "eps", float)
    else:
        eps = _get(cfg, "eps_rel", float, 0.05) * (sigma2 + P + alpha_subsampled(prof, L) * P)
    rows = []
    for i, n in enumerate(ns):
        r = concentration_check(prof, P, sigma2, L, n, eps, trials, seed + i,
                                noise=_noise(cfg), workers=_get(cfg, "workers", int, 1))
        rows.append([n, r.m, eps, r.empirical_prob, r.stderr, r.exact_mean_y, r.exact_mean_z,
                     r.limit_mean_y, r.limit_mean_z, r.sample_mean_y, r.sample_mean_z, trials, r.seed])
    return rows, f"typical-set frequencies {[row[3] for row in rows]}"


def _cmd_bler(cfg):
    prof, sigma2 = _profile(cfg)
    if "P" in cfg:
        P = _get(cfg, "P", float)
    else:
        P = _get(cfg, "snr", float) * sigma2
    L = _get(cfg, "L", int, 1)
    n = _get(cfg, "n", int)
    if "rate" in cfg:
        rates = _list(cfg, "rate", float)
    else:
        frac = _list(cfg, "rate_fraction", float)
        lim = ach_limit(L, alpha_subsampled(prof, L))
        rates = [f * lim for f in frac]
    trials = _get(cfg, "trials", int, 500)
    seed = _get(cfg, "seed", int, 0)
    method = _get(cfg, "method", str, "ensemble")
    rows = []
    for i, R in enumerate(rates):
        r = bler_sim(prof, sigma2, P, L, n, R, trials, seed + i, method=method,
                     codebook=_get(cfg, "codebook", str, "fresh"), start=_get(cfg, "start", int, 1),
                     noise=_noise(cfg), workers=_get(cfg, "workers", int, 1))
        rows.append([prof.label(), P, L, n, R, r.estimate, r.stderr,
                     r.extras["power_violation_fraction"], r.seed, method, r.extras["num_messages"]])
    return rows, f"BLER {[row[5] for row in rows]}"


def _cmd_classify(cfg):
    specs = cfg.get("profiles")
    if specs is None:
        specs = [cfg.get("profile")]
    if not isinstance(specs, list):
        raise ConfigError("expected a list of profile mappings", field="profiles")
    horizon = _get(cfg, "horizon", int, 200)
    if horizon < 2:
        raise ConfigError("must be >= 2", field="horizon")
    rows = []
    for i, spec in enumerate(specs):
        prof, _ = profile_from_spec(spec, ctx=f"profiles[{i}]" if "profiles" in cfg else "profile")
        c = classify(prof, horizon)
        tail = c.evidence.ratios[-max(1, horizon // 4):]
        rows.append([prof.label(), c.verdict.value, c.annotation.value if c.annotation else "",
                     c.heuristic, float(tail.min()), float(tail.max()), c.reason])
    return rows, "; ".join(f"{r[0]}: {r[1]}" for r in rows)


COMMANDS = {
    "bounds": _cmd_bounds,
    "simulate": _cmd_simulate,
    "slope": _cmd_slope,
    "concentration": _cmd_concentration,
    "bler": _cmd_bler,
    "classify": _cmd_classify,
}


# -- output --------------------------------------------------------------------


def _fmt(v: Any) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def render_csv(command: str, rows: list, bits: bool = False) -> str:
    cols = COLUMNS[command]
    conv = NAT_COLUMNS.get(command, set()) if bits else set()
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for row in rows:
        out = []
        for name, v in zip(cols, row):
            if name in conv and isinstance(v, (float, int)) and not isinstance(v, bool):
                v = float(v) / math.log(2)
            out.append(_fmt(v))
        w.writerow(out)
    return buf.getvalue()


def run_config(command: str, cfg: dict, bits: bool = False) -> tuple[str, str]:
    """Run one subcommand on a parsed config; returns ``(csv_text, summary)``."""
    if command == "run":
        command = _get(cfg, "command", str)
    if command not in COMMANDS:
        raise ConfigError(f"unknown command {command!r}", field="command")
    rows, summary = COMMANDS[command](cfg)
    return render_csv(command, rows, bits), f"{command}: {summary}"


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(prog="heatchannel", description=__doc__.split("\n\n")[0])
    ap.add_argument("command", choices=[*COMMANDS, "run"])
    ap.add_argument("config", help="JSON or YAML experiment configuration")
    ap.add_argument("--out", help="CSV output path (default: config 'output' key or stdout)")
    ap.add_argument("--bits", action="store_true", help="report rates in bits instead of nats")
    args = ap.parse_args(argv)
    try:
        cfg = load_config(args.config)
        text, summary = run_config(args.command, cfg, args.bits)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (HeatChannelError, ValueError, ArithmeticError) as exc:
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    out = args.out or cfg.get("output")
    try:
        if out:
            Path(out).write_text(text, encoding="utf-8")
        else:
            sys.stdout.write(text)
    except OSError as exc:
        print(f"runtime error: cannot write output: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    print(summary, file=sys.stderr)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
