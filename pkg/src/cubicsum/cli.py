"""``cubicsum`` command line: ``eval``, ``verify`` and ``bench``.

Configuration is resolved in increasing priority: built-in defaults, a
TOML file given by ``--config``, ``CUBICSUM_*`` environment variables, then
explicit flags.  Every JSON report embeds the resolved configuration.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import math
import os
import sys
import time
from fractions import Fraction

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import oracle, suites, transform
from .calibration import KEYS as AUDIT_KEYS, load_audit_constants
from .gauss import FrameError, RationalFrame
from .numkit import CubicPhase

SCHEMA = 1
EXIT_OK, EXIT_INTERNAL, EXIT_PRECONDITION, EXIT_VERIFY = 0, 1, 2, 3
METHODS = ("oracle", "prop1", "prop2", "thm1", "thm2-chain", "prop-rational")
ENV_PREFIX = "CUBICSUM_"
BENCH_HEADER = ["method", "N", "q", "mu", "seconds", "err_radius"]


@dataclasses.dataclass
class RunConfig:
    tol: float = 1e-10
    trunc: int = 0  # 0: each method's own default truncation
    audit_constants: dict = dataclasses.field(default_factory=load_audit_constants)
    seed: int = 7
    threads: int = 1
    output_format: str = "json"

    def validate(self) -> "RunConfig":
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.trunc < 0 or self.threads < 1:
            raise ValueError("trunc must be >= 0 and threads >= 1")
        if self.output_format not in ("json", "csv"):
            raise ValueError("output_format must be json or csv")
        unknown = set(self.audit_constants) - set(AUDIT_KEYS)
        if unknown:
            raise ValueError(f"unknown audit constants: {sorted(unknown)}")
        return self

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


_SCALAR = {"tol": float, "trunc": int, "seed": int, "threads": int, "output_format": str}


def _apply(cfg: RunConfig, key: str, raw, source: str) -> None:
    key = key.lower()
    if key in _SCALAR:
        setattr(cfg, key, _SCALAR[key](raw))
    elif key in AUDIT_KEYS:
        cfg.audit_constants[key] = float(raw)
    else:
        raise ValueError(f"unknown configuration key {key!r} in {source}")


def resolve_config(args, environ=None) -> RunConfig:
    environ = os.environ if environ is None else environ
    cfg = RunConfig()
    if getattr(args, "config", None):
        with open(args.config, "rb") as fh:
            data = tomllib.load(fh)
        for key, val in data.items():
            if key == "audit_constants" and isinstance(val, dict):
                for k, v in val.items():
                    _apply(cfg, k, v, args.config)
            else:
                _apply(cfg, key, val, args.config)
    for name, raw in sorted(environ.items()):
        if name.startswith(ENV_PREFIX):
            _apply(cfg, name[len(ENV_PREFIX):], raw, name)
    for key in _SCALAR:
        val = getattr(args, key, None)
        if val is not None:
            setattr(cfg, key, val)
    for entry in getattr(args, "audit", None) or []:
        key, _, val = entry.partition("=")
        _apply(cfg, key, val, "--audit")
    return cfg.validate()


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def rational(text: str) -> float:
    """Parse ``p/q``, integers or decimals; ``p/q`` is rounded once, correctly."""
    return float(Fraction(text.strip()))


def integer(text: str) -> int:
    fr = Fraction(text.strip())
    if fr.denominator != 1:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer")
    return int(fr)


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="TOML file with key = value defaults")
    p.add_argument("--tol", type=rational)
    p.add_argument("--trunc", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--threads", type=int)
    p.add_argument("--output-format", dest="output_format", choices=("json", "csv"))
    p.add_argument("--audit", action="append", metavar="NAME=VALUE",
                   help=f"override an audit constant ({', '.join(AUDIT_KEYS)})")
    p.add_argument("--out", help="write the report here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cubicsum", description="Cubic exponential sums.")
    sub = parser.add_subparsers(dest="command", required=True)

    ev = sub.add_parser("eval", help="evaluate one sum")
    ev.add_argument("--method", choices=METHODS, default="oracle")
    ev.add_argument("--alpha", type=rational, default=0.0)
    ev.add_argument("--beta", type=rational, default=0.0)
    ev.add_argument("--mu", type=rational, required=True)
    ev.add_argument("--N", type=integer, required=True)
    ev.add_argument("--a", type=integer)
    ev.add_argument("--b", type=integer)
    ev.add_argument("--q", type=integer)
    ev.add_argument("--precision", choices=oracle.PRECISIONS, default="compensated64")
    ev.add_argument("--no-timing", action="store_true", help="omit wall-clock fields")
    _common(ev)

    ve = sub.add_parser("verify", help="run a verification suite")
    ve.add_argument("suite", choices=sorted(suites.SUITES))
    ve.add_argument("--instances", type=int, help="instance count (per ladder rung for ratio suites)")
    ve.add_argument("--qmax", type=int)
    _common(ve)

    be = sub.add_parser("bench", help="time direct summation against the transforms")
    be.add_argument("--N", dest="Ns", type=integer, nargs="+", default=[10 ** 4, 10 ** 5, 10 ** 6])
    be.add_argument("--q", dest="qs", type=integer, nargs="+", default=[1, 8, 32])
    be.add_argument("--methods", nargs="+", default=["oracle", "prop1"],
                    choices=["oracle", "prop1", "prop2", "thm1"])
    be.add_argument("--repeat", type=int, default=1)
    _common(be)
    return parser


# ---------------------------------------------------------------------------
# eval
# ---------------------------------------------------------------------------

def _cplx(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


def _jsonable(x):
    if isinstance(x, complex):
        return _cplx(x)
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, set, frozenset)):
        items = sorted(x) if isinstance(x, (set, frozenset)) else x
        return [_jsonable(v) for v in items]
    if hasattr(x, "item"):  # numpy scalar
        return _jsonable(x.item())
    return x


def _frame_args(args) -> tuple | None:
    given = [v is not None for v in (args.a, args.b, args.q)]
    if any(given) and not all(given):
        raise transform.PreconditionError("--a, --b and --q must be given together")
    return (args.a, args.b, args.q) if all(given) else None


def _frame_and_phase(args):
    """Rational frame and analytic phase for the Poisson-type methods.

    With an explicit frame the target is ``C(N; a, b, q; f)``.  Without one
    the target is ``H_N(alpha, beta, mu)``, rewritten through the Dirichlet
    approximation of ``2 beta`` (conjugating first when ``mu < 0``).
    """
    fa = _frame_args(args)
    if fa is not None:
        return RationalFrame(*fa), CubicPhase(args.alpha, args.beta, args.mu), False
    d = transform.theorem1_data(args.alpha, args.beta, args.mu, args.N)
    return RationalFrame(d["a"], d["b"], d["q"]), CubicPhase(d["eps"], d["eta"], d["mu"]), d["conjugated"]


def evaluate(args, cfg: RunConfig) -> dict:
    method, N, tol = args.method, args.N, cfg.tol
    ac = cfg.audit_constants
    out: dict = {}
    if method == "oracle":
        fa = _frame_args(args)
        if fa is None:
            r = oracle.direct_H(args.alpha, args.beta, args.mu, N, args.precision)
        else:
            r = oracle.direct_C(N, *fa, CubicPhase(args.alpha, args.beta, args.mu), args.precision)
        out.update(value=r.value, err_radius=r.est_err, breakdown={}, info={"precision": r.precision_tag})
    elif method in ("prop1", "prop2"):
        if args.mu == 0:
            raise transform.PreconditionError("mu != 0 required")
        frame, phase, conj = _frame_and_phase(args)
        if phase.mu < 0:
            raise transform.PreconditionError("mu > 0 required with an explicit frame")
        if method == "prop1":
            res = transform.eval_main_theorem(N, frame, phase, tol)
        else:
            res = transform.eval_main_theorem2(N, frame, phase, tol, cfg.trunc or None)
        if conj:
            res = res.conjugate()
        out.update(value=res.value, err_radius=res.err_radius, breakdown=res.breakdown,
                   bounds=res.bounds, info=dict(res.info, a=frame.a, b=frame.b, q=frame.q))
    elif method == "thm1":
        res = transform.eval_theorem_1(args.alpha, args.beta, args.mu, N, tol, kappa=ac["kappa"])
        out.update(value=res.value, err_radius=res.err_radius, breakdown=res.breakdown,
                   bounds=res.bounds, info=res.info)
    elif method == "thm2-chain":
        rep = transform.hmax_chain(args.alpha, args.beta, args.mu, N, c3=ac["c3"], c4=ac["c4"], c_add=ac["c_add"])
        out.update(value=None, bound=rep.bound, err_radius=None, breakdown={},
                   info={"levels": rep.levels, "stop_reason": rep.stop_reason, "terminal": rep.terminal})
    elif method == "prop-rational":
        fa = _frame_args(args)
        if fa is None:
            raise transform.PreconditionError("prop-rational needs --a, --b and --q")
        res = transform.eval_rational_cubic(N, *fa, args.mu, tol, kappa_prime=ac["kappa_prime"])
        out.update(value=res.value, err_radius=res.err_radius, breakdown=res.breakdown,
                   bounds=res.bounds, info=res.info)
    else:  # pragma: no cover - argparse restricts the choices
        raise ValueError(method)
    return out


def cmd_eval(args, cfg: RunConfig) -> tuple[int, dict]:
    inputs = {k: getattr(args, k) for k in ("method", "alpha", "beta", "mu", "N", "a", "b", "q", "precision")}
    t0 = time.perf_counter()
    body = evaluate(args, cfg)
    report = {"schema": SCHEMA, "command": "eval", "status": "ok", "inputs": inputs}
    report.update(body)
    if not args.no_timing:
        report["seconds"] = time.perf_counter() - t0
    report["config"] = cfg.as_dict()
    return EXIT_OK, report


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------

_COUNT_ARG = {"prop1": "count", "prop2": "count", "thm1-ratio": "count", "vdc-ratio": "count",
              "rational-ratio": "count", "poisson": "count"}
_SEEDED = set(_COUNT_ARG)


def cmd_verify(args, cfg: RunConfig) -> tuple[int, dict]:
    fn = suites.SUITES[args.suite]
    kwargs = {}
    if args.instances is not None:
        if args.suite not in _COUNT_ARG:
            raise transform.PreconditionError(f"suite {args.suite} takes no instance count")
        kwargs[_COUNT_ARG[args.suite]] = args.instances
    if args.qmax is not None:
        if args.suite != "gauss-identity":
            raise transform.PreconditionError("--qmax applies to gauss-identity only")
        kwargs["qmax"] = args.qmax
    if args.suite in _SEEDED and args.seed is not None:
        kwargs["seed"] = cfg.seed
    res = fn(**kwargs)
    failures = res.failures()
    report = {"schema": SCHEMA, "command": "verify", "suite": res.name,
              "status": "pass" if res.passed else "fail", "worst": res.worst,
              "summary": res.summary, "records": res.records, "failures": failures,
              "config": cfg.as_dict()}
    return (EXIT_OK if res.passed else EXIT_VERIFY), report


# ---------------------------------------------------------------------------
# bench
# ---------------------------------------------------------------------------

def bench_instance(N: int, q: int) -> dict:
    """Rational-quadratic instance with ``beta = 0`` and ``mu = 1/(24 q N^2)``."""
    b = 1
    return {"N": N, "a": 0, "b": b, "q": q, "alpha": 0.0, "beta": 0.0, "mu": 1.0 / (24 * q * N * N)}


def _time(fn, repeat: int):
    best, out = math.inf, None
    for _ in range(max(1, repeat)):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def run_bench(Ns, qs, methods, tol, repeat=1) -> list[dict]:
    rows = []
    for q in qs:
        for N in Ns:
            inst = bench_instance(N, q)
            frame = RationalFrame(inst["a"], inst["b"], q)
            phase = CubicPhase(inst["alpha"], inst["beta"], inst["mu"])
            for method in methods:
                if method == "oracle":
                    sec, r = _time(lambda: oracle.direct_C(N, 0, 1, q, phase), repeat)
                    radius = r.est_err
                elif method == "prop1":
                    sec, r = _time(lambda: transform.eval_main_theorem(N, frame, phase, tol), repeat)
                    radius = r.err_radius
                elif method == "prop2":
                    sec, r = _time(lambda: transform.eval_main_theorem2(N, frame, phase, tol), repeat)
                    radius = r.err_radius
                else:
                    h_beta = 1.0 / (2 * q)  # H_N with 2 beta = 1/q, i.e. the same sum
                    sec, r = _time(lambda: transform.eval_theorem_1(0.0, h_beta, inst["mu"], N, tol), repeat)
                    radius = r.err_radius
                rows.append({"method": method, "N": N, "q": q, "mu": inst["mu"], "seconds": sec,
                             "err_radius": float(radius)})
    return rows


def crossover(rows: list[dict], method: str = "prop1", accuracy: float | None = None) -> dict:
    """Smallest ``N`` per ``q`` at which ``method`` is faster than the oracle.

    With ``accuracy`` set, only rows whose ``err_radius`` meets it count.
    """
    out = {}
    for q in sorted({r["q"] for r in rows}):
        orc = {r["N"]: r["seconds"] for r in rows if r["q"] == q and r["method"] == "oracle"}
        wins = [r["N"] for r in rows if r["q"] == q and r["method"] == method and r["N"] in orc
                and r["seconds"] < orc[r["N"]] and (accuracy is None or r["err_radius"] <= accuracy)]
        out[q] = min(wins) if wins else None
    return out


def bench_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=BENCH_HEADER, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: (v if isinstance(v, (int, str)) else repr(float(v))) for k, v in r.items()})
    return buf.getvalue()


def cmd_bench(args, cfg: RunConfig) -> tuple[int, str]:
    rows = run_bench(args.Ns, args.qs, args.methods, cfg.tol, args.repeat)
    for method in args.methods:
        if method != "oracle" and "oracle" in args.methods:
            print(f"crossover N ({method} faster than oracle) per q: {crossover(rows, method)}", file=sys.stderr)
    return EXIT_OK, bench_csv(rows)


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def _emit(text: str, path: str | None) -> None:
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _dump(report: dict) -> str:
    return json.dumps(_jsonable(report), indent=2, sort_keys=True, allow_nan=True) + "\n"


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        if args.command == "bench":
            code, text = cmd_bench(args, cfg)
            _emit(text, args.out)
            return code
        handler = cmd_eval if args.command == "eval" else cmd_verify
        code, report = handler(args, cfg)
        _emit(_dump(report), args.out)
        return code
    except (transform.PreconditionError, FrameError) as exc:
        report = {"schema": SCHEMA, "command": args.command, "status": "refused", "error": str(exc)}
        print(f"precondition failed: {exc}", file=sys.stderr)
        _emit(_dump(report), getattr(args, "out", None))
        return EXIT_PRECONDITION
    except Exception as exc:  # noqa: BLE001 - exit-code contract
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
