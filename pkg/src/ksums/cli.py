"""Command-line surface and report serialization.

Output schema is fixed: every row carries the field names
{value_re, value_im, err, terms, bound, ratio, params, method}; JSON uses
null for inapplicable cells, CSV leaves them empty.  Floats print with 17
significant digits, integers as exact decimal text, UTF-8 with LF endings,
so identical configs on the same build serialize to identical bytes.

Exit codes: 0 success, 2 precondition violation, 3 internal inconsistency,
64 usage error.
"""

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from fractions import Fraction

from .arith import factorize
from .counting import CountResult, count_I, count_J, e_roots, kappa, mu_count, nu
from .errors import DomainError, InconsistencyError
from .expsum import (
    ComplexSum,
    RationalSumResult,
    SumSpec,
    WEIGHT_MANGOLDT,
    WEIGHT_PRIMES,
    complete_sum,
    incomplete_sum,
    lambda_sum,
    prime_sum,
    rational_sum,
)
from .tables import sieve
from .vaughan import Decomposition, VaughanParams, choose_params, decompose
from .verify import (
    BoundReport,
    NOT_FOUND,
    count_gsum,
    count_triple,
    decay_factor,
    find_gsum_witness,
    find_triple_witness,
    sweep_lambda_sums,
    threshold_exponent,
    threshold_exponent_composite,
)

FIELDS = ("value_re", "value_im", "err", "terms", "bound", "ratio", "params", "method")

EXIT_OK = 0
EXIT_PRECONDITION = 2
EXIT_INCONSISTENT = 3
EXIT_USAGE = 64


@dataclass
class RunConfig:
    command: str
    parameters: dict = field(default_factory=dict)
    output: str = "-"
    format: str = "json"


class _UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def _fnum(x):
    """17-significant-digit rendering, shared by JSON and CSV."""
    return format(float(x), ".17g")


def _json_value(v):
    if v is None:
        return "null"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if not math.isfinite(v):
            return "null"
        return _fnum(v)
    if isinstance(v, str):
        return json.dumps(v, ensure_ascii=False)
    if isinstance(v, Fraction):
        return json.dumps(f"{v.numerator}/{v.denominator}")
    if isinstance(v, dict):
        inner = ",".join(f"{json.dumps(str(k))}:{_json_value(x)}" for k, x in v.items())
        return "{" + inner + "}"
    if isinstance(v, (list, tuple)):
        return "[" + ",".join(_json_value(x) for x in v) + "]"
    return json.dumps(str(v))


def _csv_cell(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if not math.isfinite(v):
            return ""
        return _fnum(v)
    if isinstance(v, (dict, list, tuple)):
        return _json_value(v)
    return str(v)


def _row(value_re=None, value_im=None, err=None, terms=None, bound=None,
         ratio=None, params=None, method=None):
    return {
        "value_re": value_re,
        "value_im": value_im,
        "err": err,
        "terms": terms,
        "bound": bound,
        "ratio": ratio,
        "params": params,
        "method": method,
    }


def rows_of(obj, params=None, method=None):
    """Normalize any result object into schema rows."""
    params = params or {}
    if isinstance(obj, ComplexSum):
        return [_row(value_re=obj.re, value_im=obj.im, err=obj.err,
                     terms=obj.terms, params=params, method=method)]
    if isinstance(obj, RationalSumResult):
        p = dict(params)
        p["skipped"] = obj.skipped
        return rows_of(obj.sum, params=p, method=method or "rational")
    if isinstance(obj, CountResult):
        p = dict(params)
        if obj.envelope is not None:
            p["envelope"] = obj.envelope
        bound = obj.bound if math.isfinite(obj.bound) else None
        ratio = obj.value / obj.bound if math.isfinite(obj.bound) and obj.bound > 0 else None
        return [_row(value_re=obj.value, bound=bound, ratio=ratio,
                     params=p, method=method or obj.method)]
    if isinstance(obj, Decomposition):
        out = []
        p = dict(params)
        p.update({"V": obj.params.v, "D": obj.params.d, "regime": obj.params.regime})
        for name, cs in obj.components().items():
            out.extend(rows_of(cs, params=p, method=name))
        return out
    if isinstance(obj, BoundReport):
        out = []
        for r in obj.rows:
            pr = {"q": r.q, "X": r.x, "sane": r.sane}
            pr.update(r.params)
            out.append(_row(value_re=r.value_re, value_im=r.value_im, err=r.err,
                            terms=r.terms, bound=r.reference, ratio=r.ratio,
                            params=pr, method=obj.kind))
        for x, note in obj.skipped:
            out.append(_row(params={"q": None, "X": x, "note": note}, method="skipped"))
        return out
    if isinstance(obj, list):
        return obj
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def serialize(obj, fmt="json", params=None, method=None):
    """Render a result to bytes (UTF-8, LF; stable across runs)."""
    rows = rows_of(obj, params=params, method=method)
    if fmt == "json":
        if len(rows) == 1:
            body = "{" + ",".join(
                f"{json.dumps(k)}:{_json_value(v)}" for k, v in rows[0].items()
            ) + "}"
        else:
            body = "[" + ",".join(
                "{" + ",".join(f"{json.dumps(k)}:{_json_value(v)}" for k, v in r.items()) + "}"
                for r in rows
            ) + "]"
        return (body + "\n").encode("utf-8")
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(FIELDS)
        for r in rows:
            w.writerow([_csv_cell(r[k]) for k in FIELDS])
        return buf.getvalue().encode("utf-8")
    raise DomainError(f"unknown format {fmt!r}")


# ---------------------------------------------------------------------------
# Command handlers
# ---------------------------------------------------------------------------


def _parse_grid(spec, as_int=True):
    if spec.startswith("geometric:"):
        _, lo, hi, pts = spec.split(":")
        lo, hi, pts = float(lo), float(hi), int(pts)
        if pts < 1 or lo <= 0 or hi < lo:
            raise DomainError(f"bad grid {spec!r}")
        if pts == 1:
            vals = [lo]
        else:
            r = (hi / lo) ** (1.0 / (pts - 1))
            vals = [lo * r**i for i in range(pts)]
        out = [int(round(v)) for v in vals] if as_int else vals
    else:
        body = spec[len("list:"):] if spec.startswith("list:") else spec
        out = [int(s) for s in body.split(",") if s.strip()]
    seen = []
    for v in out:
        if not seen or v != seen[-1]:
            seen.append(v)
    return seen


def _poly(spec):
    try:
        return [int(s) for s in spec.split(",") if s.strip() != ""]
    except ValueError:
        raise DomainError(f"bad polynomial coefficient list {spec!r}") from None


def _cmd_sum(p):
    kind = p["kind"]
    mod = factorize(p["q"])
    a = p.get("a", 0)
    b = p.get("b", 0)
    ctx = {"q": mod.q, "a": a, "b": b, "kind": kind}
    if kind == "complete":
        return complete_sum(a, b, mod), ctx
    if kind == "incomplete":
        n = p.get("N")
        if n is None:
            raise DomainError("incomplete sum needs --N")
        ctx["N"] = n
        return incomplete_sum(a, b, mod, n), ctx
    x = p.get("X")
    if x is None:
        raise DomainError(f"{kind} sum needs --X")
    ctx["X"] = x
    if kind == "prime":
        if math.gcd(a * b, mod.q) != 1:
            raise DomainError("prime sum needs gcd(ab, q) = 1")
        table = sieve(max(x, 2))
        return prime_sum(SumSpec(q=mod, a=a, b=b, x=x, weight=WEIGHT_PRIMES), table), ctx
    if kind == "lambda":
        if math.gcd(a * b, mod.q) != 1:
            raise DomainError("lambda sum needs gcd(ab, q) = 1")
        table = sieve(max(x, 2))
        return lambda_sum(SumSpec(q=mod, a=a, b=b, x=x, weight=WEIGHT_MANGOLDT), table), ctx
    if kind == "rational":
        pc = _poly(p.get("P") or "")
        qc = _poly(p.get("Qpoly") or "")
        if not pc or not qc:
            raise DomainError("rational sum needs --P and --Qpoly (highest degree first)")
        ctx["P"] = pc
        ctx["Qpoly"] = qc
        table = sieve(max(x, 2))
        return rational_sum(pc, qc, mod, x, table), ctx
    raise DomainError(f"unknown sum kind {kind!r}")


def _cmd_count(p):
    kind = p["kind"]
    method = p.get("method") or ("hashed" if kind in ("kappa", "I", "J") else "fast")
    if kind == "e2":
        n = p.get("n", 2)
        h = p.get("h")
        if h is None:
            raise DomainError("e2 needs --h")
        val = e_roots(n, h)
        return CountResult(value=val, bound=math.inf, method="closed" if n == 2 else "brute"), \
            {"n": n, "h": h, "kind": kind}
    q = p.get("q")
    if q is None:
        raise DomainError(f"count --kind {kind} needs --q")
    ctx = {"q": q, "kind": kind, "method": method}
    if kind == "nu":
        if "A" not in p:
            raise DomainError("nu needs --A")
        ctx["A"] = p["A"]
        return nu(q, p["A"], method=method), ctx
    if kind == "mu":
        if "a" not in p:
            raise DomainError("mu needs --a")
        ctx["a"] = p["a"]
        return mu_count(q, p["a"], method=method), ctx
    if kind == "kappa":
        ctx.update({"a": p.get("a", 1), "b": p.get("b", 1)})
        return kappa(q, p.get("a", 1), p.get("b", 1), method=method), ctx
    if kind == "I":
        if "N" not in p or "N1" not in p:
            raise DomainError("count I needs --N and --N1")
        ctx.update({"N": p["N"], "N1": p["N1"]})
        return count_I(q, p["N"], p["N1"], method=method), ctx
    if kind == "J":
        if "M" not in p:
            raise DomainError("count J needs --M")
        ctx["M"] = p["M"]
        return count_J(q, p["M"], method=method, epsilon=p.get("epsilon", 0.05)), ctx
    raise DomainError(f"unknown count kind {kind!r}")


def _cmd_vaughan(p):
    mod = factorize(p["q"])
    a, b, x = p.get("a", 1), p.get("b", 1), p["X"]
    if math.gcd(a * b, mod.q) != 1:
        raise DomainError("vaughan decomposition needs gcd(ab, q) = 1")
    if p.get("V") is not None:
        params = VaughanParams(v=float(p["V"]), d=float(p.get("D") or p["V"] ** 3),
                               regime="manual")
    else:
        params = choose_params(mod.q, x)
    table = sieve(max(x, 2))
    spec = SumSpec(q=mod, a=a, b=b, x=x, weight=WEIGHT_MANGOLDT)
    return decompose(spec, params, table), {"q": mod.q, "a": a, "b": b, "X": x}


def _cmd_sweep(p):
    mod = factorize(p["q"])
    a, b = p.get("a", 1), p.get("b", 1)
    if math.gcd(a * b, mod.q) != 1:
        raise DomainError("sweep needs gcd(ab, q) = 1")
    xs = _parse_grid(p["grid"])
    if not xs:
        return BoundReport(kind="lambda-sweep"), {}
    table = sieve(max(max(xs), 2))
    return sweep_lambda_sums(mod, xs, a, b, table, epsilon=p.get("epsilon", 0.05)), {}


def _cmd_solve(p):
    cong = p.get("congruence", "triple")
    q = p["q"]
    m = p["m"]
    n = p["N"]
    mod = factorize(q)  # validates q >= 2 before any sieve is built
    if cong == "triple":
        if len(mod.factors) != 1 or mod.factors[0][1] != 1:
            raise DomainError(f"q = {q} must be prime for the triple congruence")
        if math.gcd(m, q) != 1:
            raise DomainError(f"need gcd(m, q) = 1, got m = {m}, q = {q}")
        if n >= q:
            raise DomainError(f"need N < q, got N = {n}, q = {q}")
        table = sieve(max(2 * n, 4))
        res = count_triple(q, m, n, table)
        wit = find_triple_witness(q, m, n, table) if res.value > 0 else NOT_FOUND
        params = {
            "q": q, "m": m, "N": n,
            "main_term": res.main_term,
            "remainder": res.remainder,
            "pi1": res.primes_in_range,
            "witness": list(wit.primes) if wit else None,
        }
        return [_row(value_re=res.value, params=params, method="triple")], {}
    if cong == "gsum":
        k = p.get("k")
        if k is None:
            raise DomainError("gsum solve needs --k")
        a, b = p.get("a", 1), p.get("b", 1)
        if math.gcd(a * b, q) != 1:
            raise DomainError(f"need gcd(ab, q) = 1, got a = {a}, b = {b}, q = {q}")
        table = sieve(max(n, 4))
        res = count_gsum(q, a, b, k, m, n, table)
        wit = find_gsum_witness(q, a, b, k, m, n, table) if res.value > 0 else NOT_FOUND
        params = {
            "q": q, "a": a, "b": b, "k": k, "m": m, "N": n,
            "main_term": res.main_term,
            "delta": res.delta,
            "primes_used": res.primes_used,
            "witness": list(wit.primes) if wit else None,
        }
        return [_row(value_re=res.value, params=params, method="gsum")], {}
    raise DomainError(f"unknown congruence {cong!r}")


def _cmd_bounds(p):
    kind = p["kind"]
    if kind == "delta":
        q, x = p.get("q"), p.get("X")
        if q is None or x is None:
            raise DomainError("delta needs --q and --X")
        val = decay_factor(q, float(x))
        return [_row(value_re=val, params={"q": q, "X": x}, method="delta")], {}
    if kind in ("ck3", "ck4"):
        k = p.get("k")
        if k is None:
            raise DomainError(f"{kind} needs --k")
        frac = threshold_exponent(k) if kind == "ck3" else threshold_exponent_composite(k)
        return [_row(value_re=float(frac),
                     params={"k": k, "rational": f"{frac.numerator}/{frac.denominator}"},
                     method=kind)], {}
    raise DomainError(f"unknown bounds kind {kind!r}")


_HANDLERS = {
    "sum": _cmd_sum,
    "count": _cmd_count,
    "vaughan": _cmd_vaughan,
    "sweep": _cmd_sweep,
    "solve": _cmd_solve,
    "bounds": _cmd_bounds,
}


def run(config):
    """Execute a validated RunConfig; returns (exit status, payload bytes)."""
    handler = _HANDLERS.get(config.command)
    if handler is None:
        raise DomainError(f"unknown command {config.command!r}")
    result, ctx = handler(config.parameters)
    return EXIT_OK, serialize(result, config.format, params=ctx)


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        self.print_usage(sys.stderr)
        raise _UsageError(message)


def _build_parser():
    top = _Parser(prog="ksums", description="Exact Kloosterman-sum workbench")
    sub = top.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--format", choices=("json", "csv"), default="json")
        sp.add_argument("--output", default="-")

    ps = sub.add_parser("sum", help="evaluate an exponential sum")
    ps.add_argument("--kind", required=True,
                    choices=("complete", "incomplete", "prime", "lambda", "rational"))
    ps.add_argument("--q", type=int, required=True)
    ps.add_argument("--a", type=int, default=0)
    ps.add_argument("--b", type=int, default=0)
    ps.add_argument("--X", type=int)
    ps.add_argument("--N", type=int)
    ps.add_argument("--P", type=str, help="numerator coefficients, highest degree first")
    ps.add_argument("--Qpoly", type=str, help="denominator coefficients, highest degree first")
    common(ps)

    pc = sub.add_parser("count", help="count congruence solutions")
    pc.add_argument("--kind", required=True, choices=("nu", "mu", "kappa", "I", "J", "e2"))
    pc.add_argument("--q", type=int)
    pc.add_argument("--A", type=int)
    pc.add_argument("--a", type=int)
    pc.add_argument("--b", type=int)
    pc.add_argument("--N", type=int)
    pc.add_argument("--N1", type=int)
    pc.add_argument("--M", type=int)
    pc.add_argument("--n", type=int)
    pc.add_argument("--h", type=int)
    pc.add_argument("--method", choices=("fast", "brute", "hashed"))
    pc.add_argument("--epsilon", type=float, default=0.05)
    common(pc)

    pv = sub.add_parser("vaughan", help="four-sum decomposition with exact remainder")
    pv.add_argument("--q", type=int, required=True)
    pv.add_argument("--a", type=int, default=1)
    pv.add_argument("--b", type=int, default=1)
    pv.add_argument("--X", type=int, required=True)
    pv.add_argument("--V", type=float)
    pv.add_argument("--D", type=float)
    common(pv)

    pw = sub.add_parser("sweep", help="bound-ratio sweep over an X grid")
    pw.add_argument("--q", type=int, required=True)
    pw.add_argument("--a", type=int, default=1)
    pw.add_argument("--b", type=int, default=1)
    pw.add_argument("--grid", required=True,
                    help="geometric:lo:hi:points or comma list")
    pw.add_argument("--epsilon", type=float, default=0.05)
    common(pw)

    pl = sub.add_parser("solve", help="find a congruence witness in primes")
    pl.add_argument("--congruence", choices=("triple", "gsum"), default="triple")
    pl.add_argument("--q", type=int, required=True)
    pl.add_argument("--m", type=int, required=True)
    pl.add_argument("--N", type=int, required=True)
    pl.add_argument("--k", type=int)
    pl.add_argument("--a", type=int, default=1)
    pl.add_argument("--b", type=int, default=1)
    common(pl)

    pb = sub.add_parser("bounds", help="closed-formula reference values")
    pb.add_argument("--kind", required=True, choices=("delta", "ck3", "ck4"))
    pb.add_argument("--q", type=int)
    pb.add_argument("--X", type=int)
    pb.add_argument("--k", type=int)
    common(pb)

    return top


def parse_argv(argv):
    ns = _build_parser().parse_args(argv)
    params = {k: v for k, v in vars(ns).items()
              if k not in ("command", "format", "output") and v is not None}
    return RunConfig(command=ns.command, parameters=params,
                     output=ns.output, format=ns.format)


def main(argv=None):
    try:
        config = parse_argv(argv if argv is not None else sys.argv[1:])
    except _UsageError:
        return EXIT_USAGE
    try:
        status, payload = run(config)
    except DomainError as exc:
        sys.stderr.write(f"ksums: precondition violation: {exc}\n")
        return EXIT_PRECONDITION
    except InconsistencyError as exc:
        sys.stderr.write(f"ksums: internal inconsistency: {exc}\n")
        return EXIT_INCONSISTENT
    if config.output == "-":
        sys.stdout.buffer.write(payload)
        sys.stdout.buffer.flush()
    else:
        with open(config.output, "wb") as fh:
            fh.write(payload)
    return status


def console_entry():
    sys.exit(main())


if __name__ == "__main__":
    console_entry()
