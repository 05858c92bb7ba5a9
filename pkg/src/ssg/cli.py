"""Command-line front end.

Verbs: validate, solve, value, decide, strategies, reduce, transform,
certify, gen, oracle, bench. Games are read from a file argument or
standard input ('-'). Every verb exits 0 on success, 1 on a domain
error, 2 on a usage error; decide exits 3 when the answer is false and
certify exits 1 when the certificate is rejected.

Output is text by default; --format json emits one structured document
with a schema: 1 field, sorted keys, and rationals as "p/q" strings.
The json output of deterministic verbs is byte-stable across runs for
identical inputs; bench rows carry wall-clock timings and are not.
"""

from __future__ import annotations

import argparse
import json
import os.path
import re
import sys
import time
from fractions import Fraction
from typing import Callable, Union

from . import kernels
from .exceptions import SSGError
from .games import (
    Game,
    Strategy,
    ValueVector,
    VertexKind,
    format_rational,
    parse_game,
    parse_rational,
    serialize_game,
)
from .generate import random_game
from .markov import is_stopping, mc_estimate, reduce_game, solve_value_vector
from .solve import (
    METHODS,
    Certificate,
    DEFAULT_C,
    DEFAULT_ORACLE_BUDGET,
    SolveReport,
    brute_force_oracle,
    solve,
    verify_ovv_certificate,
)
from .stopping import build_stopping_game

SCHEMA = 1

_EDGE_RE = re.compile(r"^\s*(\d+)\s*->\s*(\d+)\s*$")


def _rational_arg(text: str) -> Fraction:
    try:
        return parse_rational(text)
    except SSGError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _weights_arg(text: str) -> tuple[int, int, int]:
    parts = text.split(":")
    if len(parts) != 3 or not all(p.isdigit() for p in parts):
        raise argparse.ArgumentTypeError(
            f"weights must look like 'a:b:c' with nonnegative integers, got {text!r}"
        )
    return (int(parts[0]), int(parts[1]), int(parts[2]))


def _edges_arg(text: str) -> tuple[tuple[int, int], ...]:
    if not text.strip():
        return ()
    edges = []
    for part in text.split(","):
        m = _EDGE_RE.match(part)
        if not m:
            raise argparse.ArgumentTypeError(
                f"strategies are comma-separated 'i->j' pairs, got {part.strip()!r}"
            )
        edges.append((int(m.group(1)), int(m.group(2))))
    return tuple(edges)


def _methods_arg(text: str) -> tuple[str, ...]:
    tokens = tuple(t.strip() for t in text.split(",") if t.strip())
    allowed = set(METHODS) | {"mc"}
    for t in tokens:
        if t not in allowed:
            raise argparse.ArgumentTypeError(
                f"unknown method {t!r}; want a comma list from {', '.join(sorted(allowed))}"
            )
    if not tokens:
        raise argparse.ArgumentTypeError("empty method list")
    return tokens


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def _read_game(path: str) -> Game:
    return parse_game(_read_text(path))


def _decimal(x: Fraction, digits: int) -> str:
    """Fixed-point decimal rendering without going through float."""
    scaled = round(x * 10**digits)
    whole, frac = divmod(scaled, 10**digits)
    return f"{whole}.{frac:0{digits}d}" if digits else str(whole)


def _fmt(x: Fraction, approx: Union[int, None]) -> str:
    text = format_rational(x)
    if approx is not None:
        text += f" ~ {_decimal(x, approx)}"
    return text


def _strategy_text(s: Strategy) -> str:
    if not s.picks:
        return "-"
    return ", ".join(f"{v}->{c}" for v, c in s.picks)


def _strategy_edges(s: Strategy) -> list[list[int]]:
    return [[v, c] for v, c in s.picks]


def _values_json(values: ValueVector) -> list[str]:
    return [format_rational(x) for _, x in values.items()]


def _certificate_json(cert: Certificate, n: int) -> dict:
    return {
        "c": cert.c,
        "n": n,
        "s": _values_json(cert.s),
        "z": _values_json(cert.z),
    }


def _emit_json(doc: dict) -> None:
    doc["schema"] = SCHEMA
    print(json.dumps(doc, indent=2, sort_keys=True))


def _report_doc(verb: str, game: Game, report: SolveReport, approx: Union[int, None]) -> dict:
    doc = {
        "verb": verb,
        "n": game.n,
        "start": game.start,
        "method": report.method,
        "iterations": report.iterations,
        "values": _values_json(report.values),
        "value": format_rational(report.values[game.start]),
        "strategies": {
            "tau": _strategy_edges(report.tau),
            "sigma": _strategy_edges(report.sigma),
        },
        "certificate": (
            _certificate_json(report.certificate, game.n) if report.certificate else None
        ),
    }
    if approx is not None:
        doc["values_approx"] = [_decimal(x, approx) for _, x in report.values.items()]
        doc["value_approx"] = _decimal(report.values[game.start], approx)
    return doc


def _print_report(game: Game, report: SolveReport, approx: Union[int, None]) -> None:
    print(f"method: {report.method}")
    print(f"iterations: {report.iterations}")
    for i, x in report.values.items():
        print(f"v({i}) = {_fmt(x, approx)}")
    print(f"tau: {_strategy_text(report.tau)}")
    print(f"sigma: {_strategy_text(report.sigma)}")
    print(f"value = {_fmt(report.values[game.start], approx)}")


def _write_certificate(path: str, cert: Certificate, n: int) -> None:
    doc = _certificate_json(cert, n)
    doc["schema"] = SCHEMA
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _parse_value_list(raw, what: str) -> ValueVector:
    if not isinstance(raw, list):
        raise SSGError(f"certificate field {what!r} must be a list of 'p/q' strings")
    try:
        return ValueVector(parse_rational(str(x)) for x in raw)
    except SSGError as exc:
        raise SSGError(f"certificate field {what!r}: {exc}") from None


def _load_certificate(path: str) -> Certificate:
    try:
        doc = json.loads(_read_text(path))
    except json.JSONDecodeError as exc:
        raise SSGError(f"certificate file is not valid json: {exc}") from None
    if not isinstance(doc, dict):
        raise SSGError("certificate file must hold a json object")
    for field in ("z", "s", "c"):
        if field not in doc:
            raise SSGError(f"certificate file is missing field {field!r}")
    c = doc["c"]
    if not isinstance(c, int) or c < 1:
        raise SSGError(f"certificate field 'c' must be a positive integer, got {c!r}")
    return Certificate(
        z=_parse_value_list(doc["z"], "z"),
        s=_parse_value_list(doc["s"], "s"),
        c=c,
    )


def _strategy_from_edges(
    game: Game, owner: VertexKind, edges: tuple[tuple[int, int], ...]
) -> Union[Strategy, None]:
    if not game.vertices_of_kind(owner):
        return None
    return Strategy.of(owner, dict(edges))


# ---------------------------------------------------------------- verbs


def _cmd_validate(args) -> int:
    game = _read_game(args.game)
    counts = {
        kind.value: len(game.vertices_of_kind(kind))
        for kind in (VertexKind.MAX, VertexKind.MIN, VertexKind.AVG)
    }
    if args.format == "json":
        _emit_json(
            {
                "verb": "validate",
                "ok": True,
                "n": game.n,
                "start": game.start,
                "kinds": counts,
                "stopping": is_stopping(game),
            }
        )
    else:
        kinds = " ".join(f"{k}={v}" for k, v in counts.items())
        word = "stopping" if is_stopping(game) else "non-stopping"
        print(f"ok: n={game.n} start={game.start} {kinds} ({word})")
    return 0


def _cmd_solve(args) -> int:
    game = _read_game(args.game)
    report = solve(
        game,
        method=args.method,
        c=args.c,
        with_certificate=args.cert_out is not None,
        oracle_budget=args.budget,
    )
    if args.cert_out:
        _write_certificate(args.cert_out, report.certificate, game.n)
    if args.format == "json":
        _emit_json(_report_doc("solve", game, report, args.approx))
    else:
        _print_report(game, report, args.approx)
        if args.cert_out:
            print(f"certificate written to {args.cert_out}")
    return 0


def _cmd_value(args) -> int:
    game = _read_game(args.game)
    value = solve(game, "auto").values[game.start]
    if args.format == "json":
        doc = {"verb": "value", "value": format_rational(value)}
        if args.approx is not None:
            doc["value_approx"] = _decimal(value, args.approx)
        _emit_json(doc)
    else:
        print(_fmt(value, args.approx))
    return 0


def _cmd_decide(args) -> int:
    if not 0 <= args.alpha <= 1:
        raise SSGError(f"alpha must lie in [0, 1], got {format_rational(args.alpha)}")
    game = _read_game(args.game)
    value = solve(game, "auto").values[game.start]
    result = value > args.alpha
    if args.format == "json":
        _emit_json(
            {
                "verb": "decide",
                "alpha": format_rational(args.alpha),
                "value": format_rational(value),
                "result": result,
            }
        )
    else:
        rel = ">" if result else "<="
        print(f"{'true' if result else 'false'} (value {format_rational(value)} "
              f"{rel} alpha {format_rational(args.alpha)})")
    return 0 if result else 3


def _cmd_strategies(args) -> int:
    game = _read_game(args.game)
    report = solve(game, "auto")
    if args.format == "json":
        _emit_json(
            {
                "verb": "strategies",
                "tau": _strategy_edges(report.tau),
                "sigma": _strategy_edges(report.sigma),
            }
        )
    else:
        print(f"tau: {_strategy_text(report.tau)}")
        print(f"sigma: {_strategy_text(report.sigma)}")
    return 0


def _cmd_reduce(args) -> int:
    game = _read_game(args.game)
    tau = _strategy_from_edges(game, VertexKind.MIN, args.tau)
    sigma = _strategy_from_edges(game, VertexKind.MAX, args.sigma)
    rg = reduce_game(game, tau, sigma)
    values = solve_value_vector(rg)
    if args.format == "json":
        doc = {
            "verb": "reduce",
            "values": _values_json(values),
            "value": format_rational(values[game.start]),
            "tau": _strategy_edges(tau) if tau else [],
            "sigma": _strategy_edges(sigma) if sigma else [],
        }
        if args.approx is not None:
            doc["values_approx"] = [_decimal(x, args.approx) for _, x in values.items()]
        _emit_json(doc)
    else:
        for i, x in values.items():
            print(f"v({i}) = {_fmt(x, args.approx)}")
        print(f"value = {_fmt(values[game.start], args.approx)}")
    return 0


def _cmd_transform(args) -> int:
    game = _read_game(args.game)
    transformed, record = build_stopping_game(game, args.c)
    if args.format == "json":
        doc = {
            "verb": "transform",
            "c": args.c,
            "n": transformed.n,
            "game": serialize_game(transformed),
        }
        if args.map:
            doc["map"] = {str(v): record.mapped(v) for v in game.vertices}
        _emit_json(doc)
    else:
        out = serialize_game(transformed)
        if args.map:
            lines = [f"# map {v} -> {record.mapped(v)}" for v in game.vertices]
            out += "".join(line + "\n" for line in lines)
        sys.stdout.write(out)
    return 0


def _cmd_certify(args) -> int:
    game = _read_game(args.game)
    cert = _load_certificate(args.cert)
    accepted = verify_ovv_certificate(game, cert)
    if args.format == "json":
        _emit_json({"verb": "certify", "accepted": accepted, "c": cert.c, "n": game.n})
    else:
        print("certificate accepted" if accepted else "certificate rejected")
    return 0 if accepted else 1


def _cmd_gen(args) -> int:
    game = random_game(
        args.n, weights=args.weights, seed=args.seed, require_stopping=args.stopping
    )
    text = serialize_game(game)
    if args.format == "json":
        _emit_json(
            {
                "verb": "gen",
                "n": args.n,
                "seed": args.seed,
                "weights": ":".join(str(w) for w in args.weights),
                "stopping": args.stopping,
                "game": text,
            }
        )
    else:
        sys.stdout.write(text)
    return 0


def _cmd_oracle(args) -> int:
    game = _read_game(args.game)
    report = brute_force_oracle(game, budget=args.budget)
    if args.format == "json":
        _emit_json(_report_doc("oracle", game, report, args.approx))
    else:
        _print_report(game, report, args.approx)
    return 0


# ---------------------------------------------------------------- bench


def _time_best(fn: Callable, repeat: int):
    result = None
    best = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn()
        dt = time.perf_counter() - t0
        if best is None or dt < best:
            best = dt
    return result, best


def _bench_rows(game: Game, name: str, methods, args):
    backends = ["numba", "numpy"] if kernels.numba_available() else ["numpy"]
    for method in methods:
        if method == "mc":
            report = solve(game, "auto")
            rg = reduce_game(game, report.tau, report.sigma)
            for b in backends:
                mc_estimate(rg, plays=32, seed=args.seed, backend=b)  # warm the jit
                est, secs = _time_best(
                    lambda b=b: mc_estimate(rg, plays=args.plays, seed=args.seed, backend=b),
                    args.repeat,
                )
                yield {
                    "game": name,
                    "n": game.n,
                    "method": "mc",
                    "backend": b,
                    "iterations": est.plays,
                    "ms": round(secs * 1000, 3),
                    "value": format_rational(est.value),
                    "error": None,
                }
        elif method == "vi":
            for b in backends:
                row = {
                    "game": name,
                    "n": game.n,
                    "method": "vi",
                    "backend": b,
                    "iterations": None,
                    "ms": None,
                    "value": None,
                    "error": None,
                }
                try:
                    solve(game, "vi", backend=b)  # warm the jit
                    report, secs = _time_best(
                        lambda b=b: solve(game, "vi", backend=b), args.repeat
                    )
                    row["iterations"] = report.iterations
                    row["ms"] = round(secs * 1000, 3)
                    row["value"] = format_rational(report.values[game.start])
                except SSGError as exc:
                    row["error"] = type(exc).__name__
                yield row
        else:
            row = {
                "game": name,
                "n": game.n,
                "method": method,
                "backend": None,
                "iterations": None,
                "ms": None,
                "value": None,
                "error": None,
            }
            try:
                report, secs = _time_best(
                    lambda: solve(game, method, oracle_budget=args.budget), args.repeat
                )
                row["iterations"] = report.iterations
                row["ms"] = round(secs * 1000, 3)
                row["value"] = format_rational(report.values[game.start])
            except SSGError as exc:
                row["error"] = type(exc).__name__
            yield row


def _cmd_bench(args) -> int:
    suite_dir = "." if args.suite == "-" else os.path.dirname(os.path.abspath(args.suite))
    paths = []
    for raw in _read_text(args.suite).splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            paths.append(line)
    if not paths:
        raise SSGError("bench suite lists no game files")

    rows = []
    for rel in paths:
        full = rel if os.path.isabs(rel) else os.path.join(suite_dir, rel)
        game = _read_game(full)
        rows.extend(_bench_rows(game, rel, args.methods, args))

    if args.format == "json":
        _emit_json({"verb": "bench", "rows": rows})
        return 0

    headers = ["game", "n", "method", "backend", "iters", "ms", "value"]
    table = [
        [
            r["game"],
            str(r["n"]),
            r["method"],
            r["backend"] or "-",
            "-" if r["iterations"] is None else str(r["iterations"]),
            "-" if r["ms"] is None else f"{r['ms']:.3f}",
            r["error"] or r["value"] or "-",
        ]
        for r in rows
    ]
    widths = [max(len(h), *(len(row[i]) for row in table)) for i, h in enumerate(headers)]
    print("  ".join(h.ljust(w) for h, w in zip(headers, widths)).rstrip())
    for row in table:
        print("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip())
    return 0


# ---------------------------------------------------------------- parser


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ssg",
        description="Exact solvers for simple stochastic games.",
    )
    sub = parser.add_subparsers(dest="verb", required=True, metavar="verb")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--format", choices=("text", "json"), default="text", help="output style"
    )
    common.add_argument(
        "--approx",
        type=int,
        metavar="DIGITS",
        help="append a decimal rendering with this many digits",
    )

    def add(verb, handler, help_text, game_arg=True, parents=(common,)):
        p = sub.add_parser(verb, help=help_text, parents=list(parents))
        if game_arg:
            p.add_argument("game", nargs="?", default="-", help="game file, or '-' for stdin")
        p.set_defaults(func=handler)
        return p

    add("validate", _cmd_validate, "parse a game file and report its shape")

    p = add("solve", _cmd_solve, "compute optimal values and strategies")
    p.add_argument("--method", choices=METHODS, default="auto")
    p.add_argument("--c", type=int, default=DEFAULT_C, metavar="C",
                   help="stopping-transform multiplier for the exact pipeline")
    p.add_argument("--budget", type=int, default=DEFAULT_ORACLE_BUDGET,
                   help="strategy-bit budget for --method oracle")
    p.add_argument("--cert-out", metavar="FILE",
                   help="write a verification certificate to FILE")

    add("value", _cmd_value, "print the game value (optimal start-vertex value)")

    p = add("decide", _cmd_decide, "exit 0 if the game value exceeds alpha, 3 if not")
    p.add_argument("--alpha", type=_rational_arg, required=True, metavar="P/Q")

    add("strategies", _cmd_strategies, "print optimal strategies")

    p = add("reduce", _cmd_reduce, "fix strategies and solve the resulting chain")
    p.add_argument("--tau", type=_edges_arg, default=(), metavar="EDGES",
                   help="min strategy as comma-separated i->j pairs")
    p.add_argument("--sigma", type=_edges_arg, default=(), metavar="EDGES",
                   help="max strategy as comma-separated i->j pairs")

    p = add("transform", _cmd_transform, "emit the stopping companion game")
    p.add_argument("--c", type=int, default=DEFAULT_C, metavar="C")
    p.add_argument("--map", action="store_true",
                   help="include the original-to-companion vertex map")

    p = add("certify", _cmd_certify, "check a certificate; exit 1 if rejected")
    p.add_argument("--cert", required=True, metavar="FILE")

    p = add("gen", _cmd_gen, "generate a seeded random game", game_arg=False)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--weights", type=_weights_arg, default=(1, 1, 1), metavar="A:B:C",
                   help="relative frequency of max:min:avg vertices")
    p.add_argument("--stopping", action="store_true",
                   help="retry seeds until the game is stopping")

    p = add("oracle", _cmd_oracle, "solve by enumerating all strategy pairs")
    p.add_argument("--budget", type=int, default=DEFAULT_ORACLE_BUDGET)

    p = add("bench", _cmd_bench, "time solver methods over a suite of games",
            game_arg=False)
    p.add_argument("--suite", required=True, metavar="FILE",
                   help="file listing one game path per line")
    p.add_argument("--methods", type=_methods_arg, default=("auto", "vi"),
                   metavar="LIST", help="comma list, e.g. auto,vi,hk,mc")
    p.add_argument("--repeat", type=int, default=1)
    p.add_argument("--plays", type=int, default=100_000, help="rollouts per mc row")
    p.add_argument("--seed", type=int, default=0, help="rollout seed for mc rows")
    p.add_argument("--budget", type=int, default=DEFAULT_ORACLE_BUDGET)

    return parser


def main(argv: Union[list[str], None] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    try:
        return args.func(args)
    except SSGError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
