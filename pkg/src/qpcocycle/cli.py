"""Command-line experiment runner.

Exit codes: 0 success, 2 configuration error, 3 numerical-domain error,
4 failed check under ``--assert``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import platform
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from importlib import metadata

import numpy as np

from . import frequency, induction, ldt, products, regularity, spectral
from .cocycle import CocycleParams, potential_from_spec

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_ASSERT = 0, 2, 3, 4


class ConfigError(Exception):
    pass


class AssertionFailed(Exception):
    pass


# ---------------------------------------------------------------------------
# parsing helpers


def _float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _e_range(text: str) -> np.ndarray:
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("--E-range expects a,b,steps")
    try:
        a, b, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad --E-range {text!r}")
    if n < 1 or (n > 1 and b <= a):
        raise argparse.ArgumentTypeError("--E-range needs b > a and steps >= 1")
    return np.linspace(a, b, n)


def fmt(x) -> str:
    """Shortest round-trip representation."""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        return None if not math.isfinite(float(obj)) else float(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def _params(args, E: float = 0.0) -> tuple[CocycleParams, frequency.Frequency]:
    try:
        freq = frequency.from_spec(args.alpha, max_q=args.max_q)
        pot = potential_from_spec(args.v)
    except (ValueError, OSError) as exc:
        raise ConfigError(str(exc)) from None
    lam = getattr(args, "lam", 1.0)
    if isinstance(lam, list):
        lam = lam[0]
    if lam < 0:
        raise ConfigError("--lambda must be >= 0")
    return CocycleParams(pot, float(lam), float(E), freq), freq


class Output:
    """Text sink for ``--out`` / per-command file arguments, defaulting to stdout."""

    def __init__(self, path: str | None):
        self.path = path
        self.buf = io.StringIO()

    def write(self, text: str) -> None:
        self.buf.write(text)

    def close(self) -> None:
        text = self.buf.getvalue()
        if self.path in (None, "-"):
            sys.stdout.write(text)
        else:
            with open(self.path, "w", newline="") as fh:
                fh.write(text)


def _write_csv(path, header, rows) -> None:
    out = Output(path)
    w = csv.writer(out, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    out.close()


def _split(values: np.ndarray, threads: int) -> list[np.ndarray]:
    parts = max(1, min(threads, values.size))
    return [c for c in np.array_split(values, parts) if c.size]


def _map_energies(fn, energies: np.ndarray, threads: int) -> list:
    """Apply ``fn`` to chunks of energies; results come back in grid order."""
    chunks = _split(energies, threads)
    if len(chunks) == 1:
        return list(fn(chunks[0]))
    with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
        parts = list(pool.map(fn, chunks))
    return [item for part in parts for item in part]


def _energies_from(args) -> np.ndarray:
    if args.E_range is not None:
        return args.E_range
    if args.E is None:
        raise ConfigError("give --E or --E-range")
    return np.array([args.E])


# ---------------------------------------------------------------------------
# subcommands


def cmd_freq(args, ctx):
    try:
        f = frequency.from_spec(args.alpha, max_q=args.max_q)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    try:
        beta = frequency.beta_estimate(f).beta_hat
    except ValueError:
        beta = None
    ctx["convergents"] = f.convergents
    payload = {
        "alpha": float(f.alpha),
        "alpha_digits": frequency.mpmath.nstr(f.alpha, 40),
        "partial_quotients": list(f.partial_quotients),
        "convergents": [[p, q] for p, q in f.convergents],
        "beta_hat": beta,
        "flags": sorted(f.flags),
    }
    out = Output(args.out)
    if args.json:
        out.write(json.dumps(_jsonable(payload)) + "\n")
    else:
        out.write(f"alpha {payload['alpha_digits']}\n")
        for (p, q), a in zip(f.convergents[1:], f.partial_quotients):
            out.write(f"a={a} p={p} q={q}\n")
        out.write(f"beta_hat {fmt(beta) if beta is not None else 'n/a'}\n")
    out.close()


def cmd_lyapunov(args, ctx):
    params, freq = _params(args)
    ctx["convergents"] = freq.convergents
    es = _energies_from(args)
    if args.method == "birkhoff":
        ests = _map_energies(
            lambda chunk: spectral.lyapunov_birkhoff(params, args.n, args.phases, args.seed,
                                                     energies=chunk), es, args.threads)
    else:
        def run(chunk):
            return [spectral.lyapunov_avalanche(params.with_(E=float(e)), args.n, args.growth,
                                                args.levels, args.phases, args.seed)
                    for e in chunk]
        ests = _map_energies(run, es, args.threads)
    _write_csv(args.csv or args.out, ["E", "n", "phases", "method", "L", "stderr"],
               [(e.E, e.n, e.phases, e.method, e.value, e.stderr) for e in ests])
    if args.check and args.expect is not None:
        bad = [e.E for e in ests if abs(e.value - args.expect) > args.tol]
        if bad:
            raise AssertionFailed(f"L differs from {args.expect} by more than {args.tol} at E={bad}")


def cmd_ids(args, ctx):
    params, freq = _params(args)
    ctx["convergents"] = freq.convergents
    es = _energies_from(args)
    ests = _map_energies(lambda chunk: spectral.ids_dirichlet(params, chunk, args.n, args.phases,
                                                              args.seed), es, args.threads)
    _write_csv(args.csv or args.out, ["E", "N"], [(e.E, e.value) for e in ests])


def cmd_thouless(args, ctx):
    params, freq = _params(args, E=args.E)
    ctx["convergents"] = freq.convergents
    try:
        data = np.loadtxt(args.ids_csv, delimiter=",", skiprows=1, ndmin=2)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"--ids-csv: {exc}") from None
    integral = spectral.thouless_integral(args.E, data[:, 0], data[:, 1])
    direct = spectral.lyapunov_birkhoff(params, args.n, args.phases, args.seed).value
    diff = abs(direct - integral)
    out = Output(args.out)
    out.write(f"L_direct {fmt(direct)}\nL_thouless {fmt(integral)}\ndiff {fmt(diff)}\n")
    out.close()
    if args.check and diff > args.tol:
        raise AssertionFailed(f"Thouless mismatch {diff} > {args.tol}")


def cmd_ldt(args, ctx):
    lams = args.lam
    params, freq = _params(args, E=args.E)
    ctx["convergents"] = freq.convergents
    rows, failures = [], []
    for lam in lams:
        if lam <= 1:
            raise ConfigError("--lambda must be > 1 for deviation sets")
        if args.method == "grid":
            fr = ldt.grid_fractions(params.with_(lam=lam), args.scales, args.kappa,
                                    args.phases, args.seed)
            with np.errstate(divide="ignore"):
                logs = np.log(fr)
            rep = None
        else:
            rep = ldt.decay_fit(params.with_(lam=lam), args.scales, args.kappa, args.phases,
                                args.seed, method="resonant")
            fr, logs = rep.fractions, rep.log_fractions
        scales = sorted(args.scales)
        running = [ldt.fit_decay(scales[:j], logs[:j], lam)[0] for j in range(1, len(scales) + 1)]
        for i, f, d in zip(scales, fr, running):
            rows.append((lam, i, args.kappa, args.phases, f, d))
        tol = 3.0 / math.sqrt(args.phases)
        if any(b > a + tol for a, b in zip(fr, fr[1:])):
            failures.append(f"lambda={lam}: fractions increase")
        if not (running[-1] > 0):
            failures.append(f"lambda={lam}: delta_hat not positive")
    _write_csv(args.csv or args.out, ["lambda", "i", "kappa", "phases", "fraction",
                                      "delta_hat_running"], rows)
    if args.check and failures:
        raise AssertionFailed("; ".join(failures))


def cmd_induct(args, ctx):
    params, freq = _params(args, E=args.t * args.lam)
    ctx["convergents"] = freq.convergents
    if args.lam <= 1:
        raise ConfigError("--lambda must be > 1 for the induction")
    reports = induction.run_induction(params, args.levels, args.grid, args.samples)
    payload = [_jsonable(r.to_json()) for r in reports]
    out = Output(args.json or args.out)
    out.write(json.dumps(payload, indent=1) + "\n")
    out.close()
    if args.check:
        bad = [r.level for r in reports if r.growth_pass_fraction < 1.0
               or max(r.drift) > r.drift_bound]
        if bad:
            raise AssertionFailed(f"growth or drift check failed at levels {bad}")


def cmd_holder(args, ctx):
    if args.input_csv:
        try:
            data = np.loadtxt(args.input_csv, delimiter=",", skiprows=1, ndmin=2)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"--input-csv: {exc}") from None
        fits = {"curve": regularity.holder_fit(data[:, 0], data[:, -1], args.scales,
                                               noise_floor=args.noise_floor)}
    else:
        params, freq = _params(args)
        ctx["convergents"] = freq.convergents
        rep = regularity.joint_report(params, tuple(args.window), args.grid, args.n,
                                      args.phases, seed=args.seed)
        fits = {"L": rep.lyapunov, "N": rep.ids}
    out = Output(args.out)
    for name, fit in fits.items():
        scales = " ".join(fmt(h) for h in fit.pair_scales)
        out.write(f"{name} sigma_hat {fmt(fit.sigma_hat)} log_C {fmt(fit.log_C)} "
                  f"residual {fmt(fit.residual)} scales {scales}\n")
    out.close()
    if args.check:
        low = [k for k, f in fits.items() if not (f.sigma_hat >= args.min_sigma)]
        if low:
            raise AssertionFailed(f"sigma_hat below {args.min_sigma} for {low}")


def cmd_ap_check(args, ctx):
    rng = np.random.default_rng(args.seed)
    rows, fails = [], 0
    for trial in range(args.trials):
        chain = products.random_chain(rng, args.m, args.mu, args.ensemble)
        rep = products.avalanche_check(chain, args.mu)
        rows.append((trial, rep.m, rep.mu, int(rep.cond8_ok), int(rep.cond9_ok),
                     rep.defect, rep.ratio))
        fails += rep.ratio > 20.0
    _write_csv(args.csv or args.out, ["trial", "m", "mu", "cond8", "cond9", "defect",
                                      "defect_over_bound"], rows)
    if args.check and fails:
        raise AssertionFailed(f"{fails} chains exceed defect 20 m/mu")


# ---------------------------------------------------------------------------
# parser


def _common_model(p):
    p.add_argument("--v", default="amo", help="amo | cosdef:eps2=<e> | table:file=<path>")
    p.add_argument("--alpha", default="golden", help="golden | sqrt2m1 | synth:beta=<b>,seed=<s> | decimal")
    p.add_argument("--max-q", type=int, default=10**6)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qpcocycle", description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--threads", type=int, default=1, help="worker threads (0 = one per CPU)")
    ap.add_argument("--out", default=None, help="output path (default stdout)")
    ap.add_argument("--manifest", default=None, help="write a JSON run manifest here")
    ap.add_argument("--config", default=None, help="JSON file of subcommand options")
    ap.add_argument("--assert", dest="check", action="store_true",
                    help="exit 4 when the subcommand's check fails")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("freq", help="continued-fraction data")
    p.add_argument("--alpha", default="golden")
    p.add_argument("--max-q", type=int, default=1000)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_freq)

    p = sub.add_parser("lyapunov", help="Lyapunov exponent estimates")
    _common_model(p)
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p.add_argument("--E", type=float, default=None)
    p.add_argument("--E-range", dest="E_range", type=_e_range, default=None)
    p.add_argument("--n", type=int, default=10**4)
    p.add_argument("--phases", type=int, default=16)
    p.add_argument("--method", choices=["birkhoff", "avalanche"], default="birkhoff")
    p.add_argument("--growth", type=float, default=8.0)
    p.add_argument("--levels", type=int, default=3)
    p.add_argument("--csv", default=None)
    p.add_argument("--expect", type=float, default=None)
    p.add_argument("--tol", type=float, default=1e-3)
    p.set_defaults(func=cmd_lyapunov)

    p = sub.add_parser("ids", help="integrated density of states")
    _common_model(p)
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p.add_argument("--E", type=float, default=None)
    p.add_argument("--E-range", dest="E_range", type=_e_range, default=None)
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--phases", type=int, default=16)
    p.add_argument("--csv", default=None)
    p.set_defaults(func=cmd_ids)

    p = sub.add_parser("thouless", help="compare L with the Thouless integral of an IDS curve")
    _common_model(p)
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p.add_argument("--E", type=float, required=True)
    p.add_argument("--ids-csv", required=True)
    p.add_argument("--n", type=int, default=10**4)
    p.add_argument("--phases", type=int, default=16)
    p.add_argument("--tol", type=float, default=5e-2)
    p.set_defaults(func=cmd_thouless)

    p = sub.add_parser("ldt", help="deviant-set measures across scales")
    _common_model(p)
    p.add_argument("--lambda", dest="lam", type=_float_list, default=[10.0])
    p.add_argument("--E", type=float, default=0.0)
    p.add_argument("--scales", type=_int_list, default=[50, 100, 200, 400, 800])
    p.add_argument("--kappa", type=float, default=0.9)
    p.add_argument("--phases", type=int, default=10**5)
    p.add_argument("--method", choices=["grid", "resonant"], default="resonant")
    p.add_argument("--csv", default=None)
    p.set_defaults(func=cmd_ldt)

    p = sub.add_parser("induct", help="critical-point induction")
    _common_model(p)
    p.add_argument("--lambda", dest="lam", type=float, default=20.0)
    p.add_argument("--t", type=float, default=0.0)
    p.add_argument("--levels", type=int, default=3)
    p.add_argument("--grid", type=int, default=2**10)
    p.add_argument("--samples", type=int, default=128)
    p.add_argument("--json", default=None)
    p.set_defaults(func=cmd_induct)

    p = sub.add_parser("holder", help="Hölder exponent fits")
    _common_model(p)
    p.add_argument("--input-csv", default=None)
    p.add_argument("--scales", type=_float_list, default=None)
    p.add_argument("--noise-floor", type=float, default=0.0)
    p.add_argument("--lambda", dest="lam", type=float, default=10.0)
    p.add_argument("--window", type=_float_list, default=[-0.5, 0.5])
    p.add_argument("--grid", type=int, default=400)
    p.add_argument("--n", type=int, default=10**5)
    p.add_argument("--phases", type=int, default=16)
    p.add_argument("--min-sigma", type=float, default=0.2)
    p.set_defaults(func=cmd_holder)

    p = sub.add_parser("ap-check", help="Avalanche Principle ensembles")
    p.add_argument("--m", type=int, default=16)
    p.add_argument("--mu", type=float, default=1e3)
    p.add_argument("--ensemble", choices=["aligned", "rotated", "random"], default="random")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--csv", default=None)
    p.set_defaults(func=cmd_ap_check)
    return ap


def _load_config(path: str) -> dict:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"--config: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("--config must hold a JSON object")
    return data


def _config_tokens(data: dict) -> list[str]:
    """Turn a JSON object into flag tokens placed before the command-line ones."""
    tokens = []
    for key, value in data.items():
        flag = "--" + key.replace("_", "-")
        if value is True:
            tokens.append(flag)
        elif value is False or value is None:
            continue
        elif isinstance(value, list):
            tokens.append(f"{flag}={','.join(fmt(v) for v in value)}")
        else:
            tokens.append(f"{flag}={fmt(value)}")
    return tokens


def _strip_config(argv: list[str]) -> list[str]:
    out, skip = [], False
    for t in argv:
        if skip:
            skip = False
        elif t == "--config":
            skip = True
        elif not t.startswith("--config="):
            out.append(t)
    return out


def _with_config(argv: list[str], parser: argparse.ArgumentParser) -> list[str]:
    pick = argparse.ArgumentParser(add_help=False)
    pick.add_argument("--config")
    pre, _ = pick.parse_known_args(argv)
    if not pre.config:
        return argv
    data = _load_config(pre.config)
    rest = _strip_config(argv)
    commands = parser._subparsers._group_actions[0].choices
    k = next((n for n, t in enumerate(rest) if t in commands), len(rest))
    if isinstance(data.get("argv"), list):
        # a run manifest: replay its command, current global flags win
        stored = _strip_config([str(t) for t in data["argv"]])
        j = next((n for n, t in enumerate(stored) if t in commands), None)
        if j is None or k < len(rest):
            raise ConfigError("a manifest replay takes global flags only")
        return stored[:j] + rest + stored[j:]
    if k == len(rest):
        raise ConfigError("no subcommand given")
    return rest[: k + 1] + _config_tokens(data) + rest[k + 1:]


def _versions() -> dict:
    out = {"python": platform.python_version()}
    for name in ("artifact", "numpy", "scipy", "mpmath", "numba"):
        try:
            out[name] = metadata.version(name)
        except metadata.PackageNotFoundError:
            out[name] = None
    return out


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        try:
            args = parser.parse_args(_with_config(argv, parser))
        except SystemExit as exc:
            return EXIT_OK if exc.code == 0 else EXIT_CONFIG
        if args.threads == 0:
            import os
            args.threads = os.cpu_count() or 1
        if args.threads < 0:
            raise ConfigError("--threads must be >= 0")
        ctx: dict = {}
        t0 = time.perf_counter()
        args.func(args, ctx)
        status = EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except AssertionFailed as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        status = EXIT_ASSERT
    except (ValueError, ArithmeticError, RuntimeError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    if args.manifest:
        echo = {k: v for k, v in vars(args).items() if k not in ("func",)}
        manifest = {
            "config": _jsonable(echo),
            "argv": argv,
            "wall_time": time.perf_counter() - t0,
            "versions": _versions(),
            "convergents": [list(c) for c in ctx.get("convergents", ())],
        }
        with open(args.manifest, "w") as fh:
            json.dump(manifest, fh, indent=1)
    return status


if __name__ == "__main__":
    sys.exit(main())
