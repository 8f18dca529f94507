"""Command line front end.

Exit codes: 0 yes/success, 1 no, 2 inconclusive, 3 usage or data error.
With ``--json`` every report is a single JSON object (schema ``v1``) holding
the verdict, the caps used and a ``replay`` command line that reproduces it.
"""
from __future__ import annotations

import argparse
import json
import math
import shlex
import sys
import time

from . import __version__
from .blocks import block_substitution
from .constlen import constant_length_factor_search, injectivation
from .core import (AmbiguityError, CapExceeded, SubstitutionError, as_word, default_seed, describe,
                   fixed_point_window, load_sub, q_formula, show, sorted_language)
from .decide import (Decision, are_isomorphic, exists_factor, inconclusive, is_periodic,
                     properization_language_check, properize, sbc_factor_check)
from .recognition import recognizability_constant, desubstitute
from .renormalize import (LocalFunction, SlidingBlockCode, code_from_dict, coding_code,
                          constant_function,
                          difference, indicator, is_coboundary, parse_coding, radius_bound,
                          reduce_radius, shift_code)
from .returns import return_pairs, return_substitution, return_words

SCHEMA = "v1"
EXIT_ERROR = 3
# refuse --exhaustive when the theoretical search space exceeds 2^BUDGET_LOG2
BUDGET_LOG2 = 40


class UsageError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_ERROR)


# ---------------------------------------------------------------- input helpers

def parse_seed(text):
    """'a' for a one-sided point, 'b.a' for a two-sided point."""
    if text is None:
        return None
    if "." in text:
        b, a = text.split(".", 1)
        return (b, a)
    return text


def parse_markers(args):
    if getattr(args, "set", None):
        return frozenset(as_word(w.strip()) for w in args.set.split(",") if w.strip())
    if getattr(args, "word", None):
        return args.word
    raise UsageError("give --word or --set")


def load_code(args, sigma, tau) -> SlidingBlockCode:
    """Build the map from --coding, --code (JSON) or --shift."""
    if args.coding:
        return coding_code(sigma, tau.alphabet, parse_coding(args.coding))
    if args.code:
        text = args.code
        if not text.lstrip().startswith("{"):
            with open(text) as fh:
                text = fh.read()
        return code_from_dict(json.loads(text), sigma.alphabet, tau.alphabet)
    if args.shift is not None:
        if sigma.alphabet != tau.alphabet:
            raise UsageError("--shift needs equal alphabets")
        return shift_code(sigma, args.shift)
    raise UsageError("give --coding, --code or --shift")


def parse_cocycle(text, sub) -> LocalFunction:
    """const:V | indicator:a[@p] | delta:a[@p] (indicator o S - indicator) | table:R:w=v,..."""
    kind, _, rest = text.partition(":")
    if kind == "const":
        return constant_function(sub, int(rest))
    if kind in ("indicator", "delta"):
        letter, _, pos = rest.partition("@")
        ind = indicator(sub, letter, int(pos) if pos else 0)
        return ind if kind == "indicator" else difference(ind, sub)
    if kind == "table":
        r, _, items = rest.partition(":")
        r = int(r)
        tab = {}
        for item in items.split(","):
            w, _, v = item.partition("=")
            tab[sub.alphabet.encode(as_word(w.strip(), sub.alphabet))] = int(v)
        missing = [w for w in sorted_language(sub, 2 * r + 1) if w not in tab]
        if missing:
            raise UsageError(f"table misses window {show(sub.alphabet.decode(missing[0]))}")
        return LocalFunction(sub.alphabet, r, tab)
    raise UsageError(f"unknown cocycle form {kind!r}")


# ---------------------------------------------------------------- verbs

def cmd_analyze(args):
    s = load_sub(args.sub)
    return "yes", "ok", describe(s), {}


def cmd_fixed_point(args):
    s = load_sub(args.sub)
    seed = parse_seed(args.seed) or default_seed(s)
    w = fixed_point_window(s, seed, args.length)
    return "yes", "ok", {"window": show(w), "length": len(w)}, {"length": args.length}


def cmd_language(args):
    s = load_sub(args.sub)
    words = [show(s.alphabet.decode(w)) for w in sorted_language(s, args.n)]
    return "yes", "ok", {"n": args.n, "count": len(words), "words": words}, {}


def cmd_returns(args):
    s = load_sub(args.sub)
    from .core import oracle
    orc = oracle(s, parse_seed(args.seed))
    m = parse_markers(args)
    st = return_pairs(orc, m) if isinstance(m, frozenset) else return_words(orc, m)
    return "yes", "ok", st.to_dict(), {}


def cmd_return_sub(args):
    s = load_sub(args.sub)
    from .core import oracle
    orc = oracle(s, parse_seed(args.seed)) if args.seed else None
    rs = return_substitution(s, parse_markers(args), orc)
    return "yes", "ok", rs.to_dict(), {}


def cmd_blocks(args):
    b = block_substitution(load_sub(args.sub), args.n)
    return "yes", "ok", {"n": args.n, "rules": b.rules(), "size": b.alphabet.size}, {}


def cmd_recognize(args):
    s = load_sub(args.sub)
    r = recognizability_constant(s, args.cap)
    verdict = "yes" if r.conclusive else "inconclusive"
    return verdict, "recognizability", r.to_dict(s), {"cap": args.cap}


def cmd_desub(args):
    s = load_sub(args.sub)
    d = desubstitute(s, as_word(args.window, s.alphabet), power=args.power)
    d["preimage"] = show(d["preimage"])
    return "yes", "ok", d, {}


def cmd_coboundary(args):
    s = load_sub(args.sub)
    c = parse_cocycle(args.cocycle, s)
    rep = is_coboundary(c, s, require_proper=False)
    return rep.verdict, rep.reason, rep.to_dict(s), {"kernel_power": rep.kernel_power}


def cmd_reduce_radius(args):
    sigma, tau = load_sub(args.sub), load_sub(args.sub2)
    f = load_code(args, sigma, tau)
    res = reduce_radius(f, sigma, tau, n_cap=args.n_cap)
    return res.verdict, res.reason, res.to_dict(), {"n_cap": args.n_cap}


def cmd_properize(args):
    s = load_sub(args.sub)
    p = properize(s, parse_seed(args.seed))
    out = p.to_dict()
    out["language_check"] = properization_language_check(p, s, seed=parse_seed(args.seed))
    return "yes", "ok", out, {}


def cmd_injectivate(args):
    return "yes", "ok", injectivation(load_sub(args.sub)).to_dict(), {}


def _exhaustive_budget(sigma, tau):
    """log2 of the number of radius-bounded codes the exhaustive search would scan."""
    from .core import k_formula
    from .recognition import recognizability_L
    K = k_formula(sigma).exact or 2 ** 64
    rb = radius_bound(sigma, K, recognizability_L(tau))
    q = q_formula(sigma)
    # codes of radius R number |B|^(|A|^(2R+1)); log2 of that is |A|^(2R+1) log2|B|
    R_log = rb.log2
    if R_log < 60:
        windows_log = (2 * 2.0 ** R_log + 1) * math.log2(sigma.alphabet.size)
        size_log = 2.0 ** windows_log * math.log2(tau.alphabet.size) if windows_log < 1000 \
            else float("inf")
    else:
        size_log = float("inf")
    return max(size_log, q.log2), {"radius_bound_log2": rb.log2, "Q_formula_log2": q.log2}


def _refuse_exhaustive(sigma, tau, args):
    if not args.exhaustive:
        return None
    need, est = _exhaustive_budget(sigma, tau)
    if need > BUDGET_LOG2:
        return inconclusive("exhaustive-over-budget", {"budget_log2": BUDGET_LOG2},
                            estimate_log2=need if math.isfinite(need) else "inf", **est)
    return None


def _decision(d: Decision):
    return d.verdict, d.reason, d.witness, d.caps_used


def cmd_factor_check(args):
    sigma, tau = load_sub(args.sub), load_sub(args.sub2)
    f = load_code(args, sigma, tau)
    refused = _refuse_exhaustive(sigma, tau, args)
    if refused is not None:
        return _decision(refused)
    d = sbc_factor_check(f, sigma, tau, u_cap=args.u_cap, v_span=args.v_span,
                         n_lang=args.n_lang)
    return _decision(d)


def cmd_exists_factor(args):
    sigma, tau = load_sub(args.sub), load_sub(args.sub2)
    refused = _refuse_exhaustive(sigma, tau, args)
    if refused is not None:
        return _decision(refused)
    return _decision(exists_factor(sigma, tau, radius_cap=args.radius_cap,
                                   candidate_cap=args.candidate_cap, jobs=args.jobs))


def cmd_isomorphic(args):
    sigma, tau = load_sub(args.sub), load_sub(args.sub2)
    return _decision(are_isomorphic(sigma, tau, radius_cap=args.radius_cap,
                                    candidate_cap=args.candidate_cap, jobs=args.jobs))


def cmd_list_factors(args):
    sigma, tau = load_sub(args.sub), load_sub(args.sub2)
    d, found = constant_length_factor_search(sigma, tau, candidate_cap=args.candidate_cap)
    d.witness["codes"] = [c.to_dict() for c in found]
    return _decision(d)


def cmd_periodic(args):
    return _decision(is_periodic(load_sub(args.sub), cap=args.cap))


# ---------------------------------------------------------------- parser

def _caps(p, *names):
    if "radius" in names:
        p.add_argument("--radius-cap", type=int, default=3)
        p.add_argument("--candidate-cap", type=int, default=2000)
    if "coding" in names:
        g = p.add_mutually_exclusive_group()
        g.add_argument("--coding", help="letter map, e.g. 'a:a,b:b'")
        g.add_argument("--code", help="sliding block code as JSON (inline or file)")
        g.add_argument("--shift", type=int, help="the shift S^k (equal alphabets)")
    if "check" in names:
        p.add_argument("--u-cap", type=int, default=6)
        p.add_argument("--v-span", type=int, default=16)
        p.add_argument("--n-lang", type=int, default=12)
    if "exhaustive" in names:
        p.add_argument("--exhaustive", action="store_true",
                       help="evaluate the theoretical bound first; refuse when over budget")


def build_parser():
    p = Parser(prog="subfactor", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("--json", action="store_true", help="JSON report (schema v1)")
    p.add_argument("--timings", action="store_true",
                   help="add wall-clock seconds to the report (JSON is then not bit-stable)")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for searches")
    sp = p.add_subparsers(dest="verb", required=True, parser_class=Parser)

    def verb(name, fn, two=False, help=None):
        q = sp.add_parser(name, help=help)
        q.add_argument("sub")
        if two:
            q.add_argument("sub2")
        q.set_defaults(fn=fn)
        return q

    verb("analyze", cmd_analyze, help="flags, spectrum and bounds")
    q = verb("fixed-point", cmd_fixed_point, help="prefix of a fixed point")
    q.add_argument("--seed")
    q.add_argument("--length", type=int, default=64)
    q = verb("language", cmd_language, help="factors of length n")
    q.add_argument("-n", type=int, required=True)
    for name, fn in (("returns", cmd_returns), ("return-sub", cmd_return_sub)):
        q = verb(name, fn, help="return words" if name == "returns" else "return substitution")
        q.add_argument("--word")
        q.add_argument("--set", help="comma separated marker words of equal length")
        q.add_argument("--seed")
    q = verb("blocks", cmd_blocks, help="block substitution of radius n")
    q.add_argument("-n", type=int, required=True)
    q = verb("recognize", cmd_recognize, help="recognizability constant")
    q.add_argument("--cap", type=int, default=None, help="default max(64, 4|s|)")
    q = verb("desub", cmd_desub, help="desubstitute a window around its centre")
    q.add_argument("--window", required=True)
    q.add_argument("--power", type=int, default=1)
    q = verb("coboundary", cmd_coboundary, help="is an integer cocycle a coboundary")
    q.add_argument("--cocycle", required=True,
                   help="const:V | indicator:a[@p] | delta:a[@p] | table:R:w=v,...")
    q = verb("reduce-radius", cmd_reduce_radius, two=True, help="shrink a factor map")
    _caps(q, "coding")
    q.add_argument("--n-cap", type=int, default=12)
    q = verb("properize", cmd_properize, help="proper substitution with the same subshift")
    q.add_argument("--seed")
    verb("injectivate", cmd_injectivate, help="merge letters with equal images")
    q = verb("factor-check", cmd_factor_check, two=True, help="is the code a factor map")
    _caps(q, "coding", "check", "exhaustive")
    q = verb("exists-factor", cmd_exists_factor, two=True, help="search for a factor map")
    _caps(q, "radius", "exhaustive")
    q = verb("isomorphic", cmd_isomorphic, two=True, help="factor maps both ways")
    _caps(q, "radius")
    q = verb("list-factors", cmd_list_factors, two=True,
             help="all factor maps up to shifts (constant length)")
    q.add_argument("--candidate-cap", type=int, default=5000)
    q = verb("periodic", cmd_periodic, help="periodic or aperiodic")
    q.add_argument("--cap", type=int, default=64)
    return p


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (set, frozenset)):
        return sorted(_jsonable(v) for v in x)
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    if isinstance(x, (str, int, float, bool)) or x is None:
        return x
    if hasattr(x, "to_json"):
        return x.to_json()
    if hasattr(x, "to_dict"):
        return _jsonable(x.to_dict())
    return str(x)


def _human(verb, verdict, reason, result):
    print(f"{verb}: {verdict} ({reason})")
    for k, v in result.items():
        if isinstance(v, (dict, list)):
            v = json.dumps(_jsonable(v), sort_keys=True)
        print(f"  {k}: {v}")


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    start = time.perf_counter()
    try:
        verdict, reason, result, caps = args.fn(args)
    except (UsageError, SubstitutionError, FileNotFoundError, json.JSONDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR
    except CapExceeded as e:
        verdict, reason, result, caps = "inconclusive", "cap-exceeded", {"message": str(e)}, \
            {"cap": e.cap}
    except AmbiguityError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR
    code = {"yes": 0, "no": 1, "inconclusive": 2}[verdict]
    if args.timings:
        result = dict(result, seconds=round(time.perf_counter() - start, 3))
    if args.json:
        replay = "subfactor " + " ".join(shlex.quote(a) for a in argv)
        report = {"schema": SCHEMA, "verb": args.verb, "verdict": verdict, "reason": reason,
                  "exit_code": code, "caps_used": _jsonable(caps), "result": _jsonable(result),
                  "replay": replay}
        print(json.dumps(report, sort_keys=True, indent=2))
    else:
        _human(args.verb, verdict, reason, result)
    return code


if __name__ == "__main__":
    sys.exit(main())
