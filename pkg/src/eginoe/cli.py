"""Command-line interface.

Every subcommand writes one JSON document (or a CSV table) to stdout. Floats
are printed with 17 significant digits, which round-trips every double.
Failures produce a JSON error object on stderr and a nonzero exit code:
2 for invalid arguments, 3 for numerical failures, 4 for consistency or
invariant violations.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import __version__
from .asymgap import genfun_limit_check, ldp_estimate
from .asymptotics import Regime, cumulants, predictions, weak_tau
from .cache import cached_spectrum
from .errors import ConfigurationError, EginoeError
from .genmatrix import build, matrix_hypergeometric
from .identities import run_all
from .montecarlo import SamplerConfig, run
from .probabilities import distribution
from .spectrum import trace_powers

SCHEMA_VERSION = 1
EXIT_CODES = {"argument": 2, "numerical": 3, "consistency": 4, "invariant": 4}

_num = {"type": ["number", "null"]}
_int = {"type": "integer"}


def _obj(props: dict, required=None) -> dict:
    return {
        "type": "object",
        "properties": props,
        "required": list(props) if required is None else required,
    }


def _rows(props: dict) -> dict:
    return {"type": "array", "items": _obj(props)}


SCHEMAS = {
    "matrix": _obj({
        "schema_version": _int, "n": _int, "tau": _num, "route": {"type": "string"},
        "entries": {"type": "array", "items": {"type": "array", "items": _num}},
        "max_scaled_discrepancy": _num,
    }),
    "probs": _obj({
        "schema_version": _int, "n": _int, "N": _int, "tau": _num,
        "rows": _rows({"k": _int, "p": _num, "log_p": _num}),
        "log_p_zero": _num, "total": _num,
    }),
    "traces": _obj({
        "schema_version": _int, "n": _int, "tau": _num,
        "rows": _rows({"m": _int, "trace": _num, "scaled": _num, "limit": _num}),
    }),
    "cumulants": _obj({
        "schema_version": _int, "n": _int, "N": _int, "tau": _num, "regime": {"type": "string"},
        "rows": _rows({"l": _int, "kappa": _num, "predicted": _num}),
    }),
    "ldp": _obj({
        "schema_version": _int, "regime": {"type": "string"}, "param": _num,
        "rows": _rows({
            "n": _int, "N": _int, "tau": _num, "K": _int, "scaled_log_p": _num,
            "scaled_truncated": _num, "scaled_remainder": _num, "remainder_bound": _num,
            "limit": _num, "limit_is_bound": {"type": "boolean"},
        }),
    }),
    "genfun": _obj({
        "schema_version": _int, "n": _int, "tau": _num,
        "rows": _rows({"x": _num, "finite": _num, "limit": _num, "error": _num}),
    }),
    "mc": _obj({
        "schema_version": _int, "N": _int, "tau_or_alpha": _num, "samples": _int, "seed": _int,
        "counts": {"type": "object", "additionalProperties": _int},
        "failures": _int,
        "rows": _rows({"k": _int, "empirical": _num, "exact": _num, "z": _num}),
        "mean_empirical": _num, "mean_exact": _num,
    }),
    "identities": _obj({
        "schema_version": _int, "all_passed": {"type": "boolean"},
        "rows": _rows({
            "name": {"type": "string"}, "params": {"type": "string"}, "lhs": _num, "rhs": _num,
            "error": _num, "tolerance": _num, "passed": {"type": "boolean"},
        }),
    }),
}


# ---------------------------------------------------------------------------
# Serialisation


def format_float(x: float) -> str:
    """17 significant digits; non-finite values become ``null`` in JSON."""
    return format(float(x), ".17g")


def _dump(obj) -> str:
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format_float(obj) if math.isfinite(obj) else "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{_dump(str(k))}: {_dump(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_dump(v) for v in obj) + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps(payload: dict) -> str:
    return _dump(payload) + "\n"


def to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    if not rows:
        return ""
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(list(rows[0]))
    for r in rows:
        w.writerow([format_float(v) if isinstance(v, (float, np.floating)) else v for v in r.values()])
    return buf.getvalue()


def _rows_for_csv(command: str, payload: dict) -> list[dict]:
    if command == "matrix":
        n = payload["n"]
        return [{"j": j + 1, "k": k + 1, "entry": payload["entries"][j][k]} for j in range(n) for k in range(n)]
    return payload["rows"]


# ---------------------------------------------------------------------------
# Commands


def _tau_from(args) -> tuple[float, float | None]:
    if getattr(args, "alpha", None) is not None:
        return weak_tau(args.n, args.alpha), args.alpha
    if args.tau is None:
        raise ConfigurationError("one of --tau or --alpha is required")
    return args.tau, None


def cmd_matrix(args) -> dict:
    if args.route == "hypergeometric":
        entries = matrix_hypergeometric(args.n, args.tau)
        route, scaled = "hypergeometric" if args.tau != 1.0 else "identity", None
    else:
        m = build(args.n, args.tau, args.tolerance_profile)
        entries, route = m.entries, m.route.value
        scaled = m.comparison.scaled if m.comparison is not None else None
    return {
        "schema_version": SCHEMA_VERSION, "n": args.n, "tau": args.tau, "route": route,
        "entries": np.asarray(entries).tolist(), "max_scaled_discrepancy": scaled,
    }


def cmd_probs(args) -> dict:
    tau, alpha = _tau_from(args)
    d = distribution(cached_spectrum(args.n, tau, args.cache_dir, args.tolerance_profile, alpha))
    rows = [{"k": k, "p": p.to_float(), "log_p": p.log_abs()} for k, p in zip(d.counts, d.probs)]
    return {
        "schema_version": SCHEMA_VERSION, "n": args.n, "N": d.N, "tau": tau,
        "rows": rows, "log_p_zero": d.log_p_zero, "total": d.total(),
    }


def cmd_traces(args) -> dict:
    tau, alpha = _tau_from(args)
    s = cached_spectrum(args.n, tau, args.cache_dir, args.tolerance_profile, alpha)
    t = trace_powers(s, args.m_max)
    regime = Regime.weak if alpha is not None else Regime.strong
    rows = []
    for m in range(1, args.m_max + 1):
        if regime is Regime.weak:
            scaled = t[m - 1] / (2 * args.n)
            lim = next(p.value for p in predictions(regime, alpha, m_values=(m,)) if p.quantity == "trace_limit")
        elif tau < 1.0:
            scaled = t[m - 1] / math.sqrt(2 * args.n)
            lim = next(p.value for p in predictions(regime, tau, m_values=(m,)) if p.quantity == "trace_limit")
        else:
            scaled, lim = t[m - 1] / args.n, 1.0
        rows.append({"m": m, "trace": t[m - 1], "scaled": scaled, "limit": lim})
    return {"schema_version": SCHEMA_VERSION, "n": args.n, "tau": tau, "rows": rows}


def cmd_cumulants(args) -> dict:
    tau, alpha = _tau_from(args)
    s = cached_spectrum(args.n, tau, args.cache_dir, args.tolerance_profile, alpha)
    N = 2 * args.n
    pred = {}
    if alpha is not None:
        regime = "weak"
        p = {q.quantity: q.value for q in predictions("weak", alpha, m_values=())}
        pred = {1: p["mean_count"] * N, 2: p["var_count"] * N}
    elif tau < 1.0:
        regime = "strong"
        p = {q.quantity: q.value for q in predictions("strong", tau, m_values=())}
        pred = {1: p["mean_count"] * math.sqrt(N), 2: p["var_count"] * math.sqrt(N)}
    else:
        regime = "hermitian"
        pred = {1: float(N), 2: 0.0, 3: 0.0}
    rows = [{"l": l, "kappa": cumulants(s, l), "predicted": pred.get(l)} for l in (1, 2, 3)]
    return {"schema_version": SCHEMA_VERSION, "n": args.n, "N": N, "tau": tau, "regime": regime, "rows": rows}


def cmd_ldp(args) -> dict:
    rows = []
    for n in args.n_grid:
        tau = args.param if args.regime == "strong" else weak_tau(n, args.param)
        alpha = args.param if args.regime == "weak" else None
        s = cached_spectrum(n, tau, args.cache_dir, args.tolerance_profile, alpha)
        e = ldp_estimate(s, args.regime, args.param, args.K)
        rows.append({
            "n": n, "N": e.N, "tau": tau, "K": e.K_used, "scaled_log_p": e.scaled_log_p,
            "scaled_truncated": e.scaled_truncated, "scaled_remainder": e.scaled_remainder,
            "remainder_bound": e.remainder_bound, "limit": e.limit, "limit_is_bound": e.limit_is_bound,
        })
    return {"schema_version": SCHEMA_VERSION, "regime": args.regime, "param": args.param, "rows": rows}


def cmd_genfun(args) -> dict:
    if args.cache_dir is not None:
        cached_spectrum(args.n, args.tau, args.cache_dir, args.tolerance_profile)
    table = genfun_limit_check([args.n], args.tau, args.x_grid)
    rows = [{"x": r.x, "finite": r.finite, "limit": r.limit, "error": r.error} for r in table.rows]
    return {"schema_version": SCHEMA_VERSION, "n": args.n, "tau": args.tau, "rows": rows}


def cmd_mc(args) -> dict:
    cfg = SamplerConfig(args.N, args.tau, args.samples, args.seed, args.workers, args.backend)
    counts = run(cfg)
    out = counts.to_json()
    out["failures"] = counts.failures
    s = cached_spectrum(args.N // 2, args.tau, args.cache_dir, args.tolerance_profile)
    exact = distribution(s).as_floats()
    rows = []
    for i, k in enumerate(range(0, args.N + 1, 2)):
        p = float(exact[i])
        emp = counts.frequency(k)
        se = math.sqrt(p * (1.0 - p) / counts.samples)
        rows.append({"k": k, "empirical": emp, "exact": p, "z": (emp - p) / se if se > 0 else None})
    out["rows"] = rows
    out["mean_empirical"] = counts.mean()
    out["mean_exact"] = 2.0 * float(trace_powers(s, 1)[0])
    return out


def cmd_identities(args) -> dict:
    results = run_all()
    rows = []
    for r in results:
        rows.append({
            "name": r.name,
            "params": ",".join(f"{k}={v}" for k, v in r.params.items()),
            "lhs": r.lhs, "rhs": r.rhs, "error": r.error, "tolerance": r.tolerance, "passed": r.passed,
        })
    return {"schema_version": SCHEMA_VERSION, "all_passed": all(r.passed for r in results), "rows": rows}


COMMANDS = {
    "matrix": cmd_matrix, "probs": cmd_probs, "traces": cmd_traces, "cumulants": cmd_cumulants,
    "ldp": cmd_ldp, "genfun": cmd_genfun, "mc": cmd_mc, "identities": cmd_identities,
}


# ---------------------------------------------------------------------------
# Parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigurationError(message)


def _float_list(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _int_list(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v.strip()]


def build_parser() -> argparse.ArgumentParser:
    def globals_(suppress: bool) -> argparse.ArgumentParser:
        # subcommands accept the global options too; SUPPRESS keeps them from
        # overwriting values given before the subcommand name
        g = _Parser(add_help=False)
        d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
        g.add_argument("--cache-dir", default=d(None), help="directory for cached spectra")
        g.add_argument("--format", choices=("json", "csv"), default=d("json"))
        g.add_argument("--tolerance-profile", choices=("default", "strict"), default=d("default"))
        return g

    common = globals_(True)
    p = _Parser(prog="eginoe", description="Real-eigenvalue statistics of the real elliptic Ginibre ensemble.", parents=[globals_(False)])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("matrix", parents=[common], help="generating matrix entries")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--tau", type=float, required=True)
    s.add_argument("--route", choices=("quadrature", "hypergeometric"), default="quadrature")

    for name, help_ in (("probs", "distribution of the number of real eigenvalues"),
                        ("traces", "trace powers of the generating matrix"),
                        ("cumulants", "first three cumulants with asymptotic comparison")):
        s = sub.add_parser(name, parents=[common], help=help_)
        s.add_argument("--n", type=int, required=True)
        g = s.add_mutually_exclusive_group(required=True)
        g.add_argument("--tau", type=float)
        g.add_argument("--alpha", type=float, help="weak regime: tau = 1 - alpha^2 / (2n)")
        if name == "traces":
            s.add_argument("--m-max", type=int, default=3)

    s = sub.add_parser("ldp", parents=[common], help="large-deviation estimates along an n grid")
    s.add_argument("--regime", choices=("strong", "weak"), required=True)
    s.add_argument("--param", type=float, required=True, help="tau (strong) or alpha (weak)")
    s.add_argument("--n-grid", type=_int_list, required=True, help="comma-separated n values")
    s.add_argument("--K", type=int, default=None, help="truncation order (default ceil(10 sqrt(N) log N))")

    s = sub.add_parser("genfun", parents=[common], help="generating-function limit table")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--tau", type=float, required=True)
    s.add_argument("--x-grid", type=_float_list, required=True, help="comma-separated x values in [0, 2]")

    s = sub.add_parser("mc", parents=[common], help="Monte Carlo histogram with exact comparison")
    s.add_argument("--N", type=int, required=True)
    s.add_argument("--tau", type=float, required=True)
    s.add_argument("--samples", type=int, required=True)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--backend", choices=("auto", "francis", "lapack"), default="auto")

    sub.add_parser("identities", parents=[common], help="numerical identity checks")
    return p


def _emit_error(err: dict, stream) -> None:
    stream.write(dumps(err))


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    try:
        args = build_parser().parse_args(argv)
        if args.command == "ldp" and args.K is not None and args.K < 1:
            raise ConfigurationError("--K must be >= 1")
        payload = COMMANDS[args.command](args)
        if args.format == "csv":
            stdout.write(to_csv(_rows_for_csv(args.command, payload)))
        else:
            stdout.write(dumps(payload))
        return 0
    except EginoeError as e:
        _emit_error(e.to_dict(), stderr)
        return EXIT_CODES.get(e.kind, 1)
    except (ValueError, ArithmeticError) as e:
        _emit_error({"error": "argument" if isinstance(e, ValueError) else "numerical", "message": str(e)}, stderr)
        return 2 if isinstance(e, ValueError) else 3


if __name__ == "__main__":
    sys.exit(main())
