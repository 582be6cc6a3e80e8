"""Command-line front end.

Exit codes: 0 ok, 2 HL violation, 3 malformed input, 4 bad generator spec,
5 property failure.
"""
from __future__ import annotations

import argparse
import sys
from concurrent.futures import ProcessPoolExecutor
from typing import Sequence

from . import jsonio
from .checks import SUITES, run_suite
from .exactla import Mat, rat
from .hlpair import HLPair, HLProfile, check_hl, random_hl
from .kunneth import EtaError, RingError, product_pair, ring_by_name, snzdiff
from .split import METHODS, compare, e_good_exists, e_hat, e_tilde, is_e_good, splitting

OK, HL_VIOLATION, MALFORMED, BAD_GENERATOR, PROPERTY_FAILURE = 0, 2, 3, 4, 5


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors, which would read as an HL violation
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(MALFORMED, f"{self.prog}: error: {message}\n")


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _write(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


def _load(path: str) -> HLPair:
    try:
        return jsonio.load_pair(_read(path))
    except OSError as exc:
        raise jsonio.MalformedInput("<file>", str(exc)) from None


def _err(msg: str) -> None:
    sys.stderr.write(msg.rstrip("\n") + "\n")


# -- validate --------------------------------------------------------------------


def validate_report(pair: HLPair) -> dict:
    rep = check_hl(pair)
    gm = pair.model
    return {
        "name": pair.name,
        "range": [-pair.r, pair.r],
        "graded_dims": {str(p): gm.dims[p] for p in gm.indices if gm.dims[p]},
        "hl": {
            "ok": rep.ok,
            "ranks": {
                str(k): {"dim_low": a, "dim_high": b, "rank": c} for k, (a, b, c) in rep.ranks.items()
            },
            "failing": list(rep.failing),
        },
    }


def _validate_one(path: str) -> tuple[int, dict]:
    try:
        pair = _load(path)
    except jsonio.MalformedInput as exc:
        return MALFORMED, {"path": path, "error": str(exc), "field": exc.field}
    rep = validate_report(pair)
    rep["path"] = path
    return (OK if rep["hl"]["ok"] else HL_VIOLATION), rep


def _map(fn, items: Sequence[str], jobs: int):
    if jobs > 1 and len(items) > 1 and "-" not in items:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def _combine(results: list[tuple[int, dict]]) -> tuple[int, object]:
    codes = [c for c, _ in results]
    body = results[0][1] if len(results) == 1 else [r for _, r in results]
    return max(codes), body


def cmd_validate(args) -> int:
    code, body = _combine(_map(_validate_one, args.paths, args.jobs))
    _write(jsonio.dumps(body), args.out)
    return code


# -- split -----------------------------------------------------------------------


def _latex(m: Mat) -> str:
    def cell(x):
        q = rat(x)
        if q.denominator == 1:
            return str(q.numerator)
        sign = "-" if q < 0 else ""
        return f"{sign}\\frac{{{abs(q.numerator)}}}{{{q.denominator}}}"

    rows = [" & ".join(cell(x) for x in row) for row in m.tolist()]
    return "\\begin{pmatrix}\n" + " \\\\\n".join(rows) + "\n\\end{pmatrix}"


def _e_summary(pair: HLPair, s) -> dict:
    et = e_tilde(pair, s)
    eh = e_hat(pair, s)
    return {
        "e_tilde": {
            str(d): jsonio.mat_rows(part) for d, part in sorted(et.parts.items()) if not part.is_zero()
        },
        "e_hat": [
            {"from": list(src), "to": list(tgt), "block": jsonio.mat_rows(blk)}
            for (src, tgt), blk in sorted(eh.blocks.items())
        ],
    }


def split_report(pair: HLPair, methods: Sequence[str]) -> dict:
    sps = {m: splitting(pair, m) for m in methods}
    out = {
        "name": pair.name,
        "splittings": {m: jsonio.splitting_to_json(s) for m, s in sps.items()},
        "e_good": {m: is_e_good(pair, s) for m, s in sps.items()},
        "conjugated_e": {m: _e_summary(pair, s) for m, s in sps.items()},
    }
    if len(methods) > 1:
        names = list(sps)
        out["comparison"] = {
            f"{a}|{b}": compare(sps[a], sps[b]).equal
            for i, a in enumerate(names)
            for b in names[i + 1 :]
        }
        out["e_good_splitting_exists"] = e_good_exists(pair) is not None
    return out


def split_latex(pair: HLPair, methods: Sequence[str]) -> str:
    parts = []
    for m in methods:
        parts.append(f"% {m}\n{_latex(splitting(pair, m).matrix)}")
    return "\n\n".join(parts) + "\n"


def cmd_split(args) -> int:
    try:
        pair = _load(args.path)
    except jsonio.MalformedInput as exc:
        _err(f"malformed input: {exc}")
        return MALFORMED
    rep = check_hl(pair)
    if not rep.ok:
        _err(f"HL violation: {rep.reason}")
        return HL_VIOLATION
    methods = list(METHODS) if args.method == "all" else [args.method]
    if args.latex:
        _write(split_latex(pair, methods), args.out)
    else:
        _write(jsonio.dumps(split_report(pair, methods)), args.out)
    return OK


# -- gen -------------------------------------------------------------------------


def _kv(tokens: Sequence[str]) -> tuple[list[str], dict]:
    pos, kv = [], {}
    for t in tokens:
        key, eq, val = t.partition("=")
        if eq:
            if key in kv:
                raise UsageError(f"repeated key {key!r}")
            kv[key] = val
        else:
            pos.append(t)
    return pos, kv


def _int_arg(kv: dict, key: str, default: int | None = None) -> int:
    if key not in kv:
        if default is None:
            raise UsageError(f"missing {key}=")
        return default
    try:
        return int(kv.pop(key))
    except ValueError:
        raise UsageError(f"{key} must be an integer") from None


def _bool_arg(kv: dict, key: str) -> bool:
    v = kv.pop(key, "0").lower()
    if v in ("1", "true", "yes"):
        return True
    if v in ("0", "false", "no"):
        return False
    raise UsageError(f"{key} must be 0 or 1")


def generate(tokens: Sequence[str], seed: int | None = None) -> HLPair:
    if not tokens:
        raise UsageError("empty generator spec")
    kind, rest = tokens[0], list(tokens[1:])
    pos, kv = _kv(rest)
    if kind == "snzdiff":
        if pos or kv:
            raise UsageError("snzdiff takes no arguments")
        return snzdiff()
    if kind == "random":
        if pos:
            raise UsageError(f"unexpected arguments {pos}")
        if "seed" in kv:
            if seed is not None:
                raise UsageError("seed given twice")
            seed = _int_arg(kv, "seed")
        seed = 0 if seed is None else seed
        r = _int_arg(kv, "r")
        if not 0 <= r <= 12:
            raise UsageError("r must lie in [0, 12]")
        if "q" in kv:
            try:
                q = tuple(int(x) for x in kv.pop("q").split(","))
            except ValueError:
                raise UsageError("q must be a comma-separated list of integers") from None
        else:
            q = (1,) * (r + 1)
        if len(q) != r + 1:
            raise UsageError(f"q needs r+1 = {r + 1} entries")
        if any(x < 0 for x in q) or q[-1] == 0:
            raise UsageError("q entries must be >= 0 and q_r must be positive")
        try:
            density = float(kv.pop("density", "0.5"))
        except ValueError:
            raise UsageError("density must be a number") from None
        if not 0 <= density <= 1:
            raise UsageError("density must lie in [0, 1]")
        profile = HLProfile(
            q,
            density=density,
            coefficient_bound=_int_arg(kv, "bound", 3),
            denominator_bound=_int_arg(kv, "den", 1),
            noise_max_degree=_int_arg(kv, "noise", 0),
            gauge=_bool_arg(kv, "gauge"),
            scramble=_bool_arg(kv, "scramble"),
        )
        if kv:
            raise UsageError(f"unknown keys {sorted(kv)}")
        if profile.coefficient_bound < 1 or profile.denominator_bound < 1:
            raise UsageError("bound and den must be positive")
        if profile.noise_max_degree > 1:
            raise UsageError("noise must be at most 1")
        return random_hl(seed, profile)
    if kind == "product":
        if len(pos) != 2 or set(kv) != {"eta"}:
            raise UsageError("product needs two rings and eta=...")
        try:
            inst = product_pair(ring_by_name(pos[0]), ring_by_name(pos[1]), kv["eta"])
        except (RingError, EtaError) as exc:
            raise UsageError(str(exc)) from None
        if not inst.hl_report.ok:
            raise UsageError(f"eta does not satisfy HL: {inst.hl_report.reason}")
        return inst.pair
    raise UsageError(f"unknown generator {kind!r}")


def cmd_gen(args) -> int:
    try:
        pair = generate(args.spec, args.seed)
    except UsageError as exc:
        _err(f"bad generator spec: {exc}")
        return BAD_GENERATOR
    _write(jsonio.dumps(jsonio.pair_to_json(pair)), args.out)
    return OK


# -- check -----------------------------------------------------------------------


def _check_one(job: tuple[str, str, int]) -> tuple[int, dict]:
    path, suite, seed = job
    try:
        pair = _load(path)
    except jsonio.MalformedInput as exc:
        return MALFORMED, {"path": path, "error": str(exc), "field": exc.field}
    if not check_hl(pair).ok:
        return HL_VIOLATION, {"path": path, "error": check_hl(pair).reason}
    results = run_suite(pair, suite, seed)
    body = {
        "path": path,
        "name": pair.name,
        "suite": suite,
        "results": [{"name": r.name, "ok": r.ok, "detail": r.detail} for r in results],
    }
    failed = [r for r in results if not r.ok]
    if failed:
        body["counterexample"] = {
            "instance": jsonio.pair_to_json(pair),
            "failed": [r.name for r in failed],
        }
        return PROPERTY_FAILURE, body
    return OK, body


def cmd_check(args) -> int:
    jobs = [(p, args.suite, args.seed) for p in args.paths]
    if args.jobs > 1 and len(jobs) > 1 and "-" not in args.paths:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_check_one, jobs))
    else:
        results = [_check_one(j) for j in jobs]
    code, body = _combine(results)
    _write(jsonio.dumps(body), args.out)
    for c, rep in results:
        if c == PROPERTY_FAILURE:
            _err(f"property failure in {rep['path']}: {', '.join(rep['counterexample']['failed'])}")
    return code


# -- entry point -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="hlsplit", description="Exact good splittings of hard-Lefschetz pairs.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    v = sub.add_parser("validate", help="check filtration, range and HL")
    v.add_argument("paths", nargs="+", help="instance files, '-' for stdin")
    v.add_argument("--out", help="write the report here instead of stdout")
    v.add_argument("--jobs", type=int, default=1, help="process files in parallel")
    v.set_defaults(fn=cmd_validate)

    s = sub.add_parser("split", help="compute splittings")
    s.add_argument("path", help="instance file, '-' for stdin")
    s.add_argument("--method", choices=(*METHODS, "all"), default="all")
    s.add_argument("--out", help="write the report here instead of stdout")
    s.add_argument("--latex", action="store_true", help="emit LaTeX matrices instead of JSON")
    s.set_defaults(fn=cmd_split)

    g = sub.add_parser(
        "gen",
        help="generate an instance",
        description="snzdiff | random r=R [q=Q0,..,QR density=D bound=B den=N noise=0|1 "
        "gauge=0|1 scramble=0|1 seed=S] | product RING RING eta=EXPR "
        "(RING is pn:<n> or elliptic)",
    )
    g.add_argument("spec", nargs="+")
    g.add_argument("--seed", type=int, default=None)
    g.add_argument("--out", help="write the instance here instead of stdout")
    g.set_defaults(fn=cmd_gen)

    c = sub.add_parser("check", help="run property suites")
    c.add_argument("paths", nargs="+", help="instance files, '-' for stdin")
    c.add_argument("--suite", choices=SUITES, default="all")
    c.add_argument("--seed", type=int, default=0, help="seed for randomized sub-checks")
    c.add_argument("--out", help="write the report here instead of stdout")
    c.add_argument("--jobs", type=int, default=1, help="process files in parallel")
    c.set_defaults(fn=cmd_check)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
