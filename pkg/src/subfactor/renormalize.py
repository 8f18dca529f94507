"""Sliding block codes, dill maps, coboundaries and radius reduction.

Every map on points is stored as a finite local rule over windows of the
language.  Rules built from a procedure on windows (``tabulate``) are
evaluated on all windows of a radius large enough for the procedure to
certify its answer, then shrunk to the smallest radius through which the
table factors.  Two such canonical rules are equal exactly when the maps
are equal.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field

from .blocks import block_substitution
from .core import (Alphabet, Bound, Substitution, SubstitutionError,
                   as_word, language_enc, lr_constant_int, oracle, show)
from .recognition import ShortWindow, power_bars, recognizability_L


class NeedMore(Exception):
    """Raised by window procedures when the window radius is too small."""


# ---------------------------------------------------------------- local rules

@dataclass
class LocalFunction:
    """Map from centred windows of radius ``radius`` to arbitrary values."""

    alphabet: Alphabet
    radius: int
    table: dict                 # encoded window -> value

    def at(self, z: str, i: int):
        r = self.radius
        if i - r < 0 or i + r >= len(z):
            raise NeedMore
        return self.table[z[i - r:i + r + 1]]

    def values(self):
        return self.table.values()

    def fingerprint(self) -> str:
        items = sorted((w, v) for w, v in self.table.items())
        blob = json.dumps([self.radius, items], ensure_ascii=True)
        return hashlib.sha1(blob.encode()).hexdigest()[:16]

    def map(self, fn) -> "LocalFunction":
        return LocalFunction(self.alphabet, self.radius, {w: fn(v) for w, v in self.table.items()})

    def to_dict(self, show_value=lambda v: v) -> dict:
        dec = self.alphabet.decode
        return {"radius": self.radius,
                "rule": {show(dec(w)): show_value(v) for w, v in sorted(self.table.items())}}


def minimize(lf: LocalFunction) -> LocalFunction:
    """Smallest radius through which the table factors (languages are extendable)."""
    R = lf.radius
    for r in range(R + 1):
        small, ok = {}, True
        for w, v in lf.table.items():
            key = w[R - r:R + r + 1]
            old = small.setdefault(key, v)
            if old != v:
                ok = False
                break
        if ok:
            return LocalFunction(lf.alphabet, r, small)
    return lf


def tabulate(s: Substitution, fn, r_start: int = 0, r_max: int = 4096) -> LocalFunction:
    """Evaluate ``fn(window_enc, R)`` on L_{2R+1}(s), growing R until it succeeds."""
    R = r_start
    while True:
        try:
            table = {w: fn(w, R) for w in language_enc(s, 2 * R + 1)}
            return minimize(LocalFunction(s.alphabet, R, table))
        except NeedMore:
            if R >= r_max:
                raise SubstitutionError(f"window radius exceeded {r_max}") from None
            R = max(R + 1, R + R // 2)


@dataclass
class SlidingBlockCode:
    """Letter-valued rule on windows x[-t..s]; values are encoded target letters."""

    source: Alphabet
    target: Alphabet
    memory: int
    anticipation: int
    rule: dict

    @property
    def radius(self) -> int:
        return max(self.memory, self.anticipation)

    @property
    def width(self) -> int:
        return self.memory + self.anticipation + 1

    def apply_enc(self, z: str) -> str:
        w = self.width
        if len(z) < w:
            raise SubstitutionError(f"input of length {len(z)} shorter than the window {w}")
        try:
            return "".join(self.rule[z[i:i + w]] for i in range(len(z) - w + 1))
        except KeyError as e:
            raise SubstitutionError(
                f"window {show(self.source.decode(e.args[0]))} outside the rule's language") from None

    def __call__(self, word) -> tuple:
        return self.target.decode(self.apply_enc(self.source.encode(as_word(word, self.source))))

    def centred(self, sub: Substitution) -> LocalFunction:
        t, s = self.memory, self.anticipation
        r = max(t, s)
        table = {w: self.rule[w[r - t:r + s + 1]] for w in language_enc(sub, 2 * r + 1)}
        return LocalFunction(self.source, r, table)

    def fingerprint(self) -> str:
        blob = json.dumps([self.memory, self.anticipation, sorted(self.rule.items())])
        return hashlib.sha1(blob.encode()).hexdigest()[:16]

    def to_dict(self) -> dict:
        dec, tdec = self.source.decode, self.target.decode
        return {"memory": self.memory, "anticipation": self.anticipation,
                "rule": {show(dec(w)): show(tdec(v)) for w, v in sorted(self.rule.items())}}


def code_from_dict(d: dict, source: Alphabet, target: Alphabet) -> SlidingBlockCode:
    """Inverse of SlidingBlockCode.to_dict."""
    rule = {source.encode(as_word(w, source)): target.encode(as_word(v, target))
            for w, v in d["rule"].items()}
    return SlidingBlockCode(source, target, int(d["memory"]), int(d["anticipation"]), rule)


def code_from_local(lf: LocalFunction, target: Alphabet) -> SlidingBlockCode:
    return SlidingBlockCode(lf.alphabet, target, lf.radius, lf.radius, dict(lf.table))


def coding_code(sub: Substitution, target: Alphabet, mapping: dict) -> SlidingBlockCode:
    """Radius-0 code from a letter map (tokens to tokens)."""
    src = sub.alphabet
    missing = [a for a in src if a not in mapping]
    if missing:
        raise SubstitutionError(f"coding undefined on {missing}")
    rule = {src.code(a): target.code(mapping[a]) for a in src}
    return SlidingBlockCode(src, target, 0, 0, rule)


def identity_code(sub: Substitution) -> SlidingBlockCode:
    return coding_code(sub, sub.alphabet, {a: a for a in sub.alphabet})


def shift_code(sub: Substitution, k: int, base: SlidingBlockCode | None = None) -> SlidingBlockCode:
    """S^k composed with ``base`` (identity by default)."""
    base = base or identity_code(sub)
    t, s = base.memory - k, base.anticipation + k
    t2, s2 = max(t, 0), max(s, 0)
    rule = {}
    off = t2 - t
    for w in language_enc(sub, t2 + s2 + 1):
        rule[w] = base.rule[w[off:off + base.width]]
    return SlidingBlockCode(sub.alphabet, base.target, t2, s2, rule)


def parse_coding(text: str) -> dict:
    """'a:a,b:b' -> {'a': 'a', 'b': 'b'}."""
    out = {}
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        if ":" not in item:
            raise SubstitutionError(f"bad coding item {item!r}; expected src:dst")
        a, b = item.split(":", 1)
        out[a.strip()] = b.strip()
    return out


def apply_sbc(code: SlidingBlockCode, word) -> tuple:
    return code(word)


# ---------------------------------------------------------------- dill maps

@dataclass
class DillLocal:
    """Implementation of a dill map: window -> (possibly empty) target word."""

    phi: LocalFunction          # values: encoded target words
    target: Alphabet

    @property
    def radius(self) -> int:
        return self.phi.radius

    @property
    def cocycle(self) -> LocalFunction:
        return self.phi.map(len)

    @property
    def radius_pair(self) -> tuple:
        return self.phi.radius, max(len(v) for v in self.phi.values())

    def is_dill(self) -> bool:
        return any(len(v) > 0 for v in self.phi.values())

    def is_sbc(self) -> bool:
        return all(len(v) == 1 for v in self.phi.values())

    def apply_enc(self, z: str) -> str:
        r = self.radius
        if len(z) < 2 * r + 1:
            raise SubstitutionError("input shorter than the dill window")
        return "".join(self.phi.table[z[i - r:i + r + 1]] for i in range(r, len(z) - r))

    def fingerprint(self) -> str:
        return self.phi.fingerprint()

    def to_dict(self) -> dict:
        tdec = self.target.decode
        d = self.phi.to_dict(lambda v: show(tdec(v)))
        d["radius_pair"] = list(self.radius_pair)
        return d


def apply_dill(local: DillLocal, word) -> tuple:
    src = local.phi.alphabet
    return local.target.decode(local.apply_enc(src.encode(as_word(word, src))))


def dill_of_code(code: SlidingBlockCode, sub: Substitution) -> DillLocal:
    return DillLocal(code.centred(sub), code.target)


# ---------------------------------------------------------------- coboundaries

@dataclass
class CocycleReport:
    verdict: str                # "yes", "no" or "inconclusive"
    reason: str
    kernel_power: int           # p(2r+1)
    k: int | None = None        # smallest k with c^t M^k = 0
    transfer: LocalFunction | None = None
    max_d: int | None = None
    bound: int | None = None    # |s^{p(2r+1)}| * max|c|
    witness: dict | None = None
    partial_sums: list = field(default_factory=list)

    def to_dict(self, sub: Substitution | None = None) -> dict:
        out = {"verdict": self.verdict, "reason": self.reason, "kernel_power": self.kernel_power,
               "k": self.k, "max_d": self.max_d,
               "bound": str(self.bound) if self.bound is not None else None,
               "witness": self.witness, "partial_sums": self.partial_sums}
        if self.transfer is not None:
            out["transfer"] = self.transfer.to_dict()
        return out


def constant_function(sub: Substitution, value) -> LocalFunction:
    return LocalFunction(sub.alphabet, 0, {w: value for w in language_enc(sub, 1)})


def indicator(sub: Substitution, letter: str, position: int = 0) -> LocalFunction:
    """1 when x_position = letter, else 0."""
    r = abs(position)
    c = sub.alphabet.code(letter)
    return LocalFunction(sub.alphabet, r,
                         {w: int(w[r + position] == c) for w in language_enc(sub, 2 * r + 1)})


def difference(d: LocalFunction, sub: Substitution) -> LocalFunction:
    """The cocycle d o S - d."""
    r = d.radius + 1
    tab = {w: d.table[w[2:]] - d.table[w[1:-1]] for w in language_enc(sub, 2 * r + 1)}
    return minimize(LocalFunction(sub.alphabet, r, tab))


def _partial_sums(c: LocalFunction, sub: Substitution, n_max: int = 32, points: int = 4) -> list:
    try:
        orc = oracle(sub)
    except SubstitutionError:
        return []
    r = c.radius
    z = orc.prefix_enc(points * 7 + n_max + 2 * r + 1)
    rows = []
    for p in range(points):
        i0 = r + 7 * p
        acc, row = 0, []
        for n in range(n_max):
            acc += c.table[z[i0 + n - r:i0 + n + r + 1]]
            row.append(acc)
        rows.append({"position": i0, "sums": row})
    return rows


def verify_coboundary(c: LocalFunction, d: LocalFunction, sub: Substitution) -> bool:
    """Check c = d o S - d on every window of the language (exact)."""
    q = max(c.radius, d.radius)
    rd, rc = d.radius, c.radius
    for w in language_enc(sub, 2 * q + 2):
        dy = d.table[w[q - rd:q + rd + 1]]
        dsy = d.table[w[q + 1 - rd:q + rd + 2]]
        if dsy - dy != c.table[w[q - rc:q + rc + 1]]:
            return False
    return True


def is_coboundary(c: LocalFunction, s: Substitution, require_proper: bool = True,
                  L: int | None = None) -> CocycleReport:
    """Decide whether the integer cocycle c is d o S - d for a continuous d.

    The test is exact: c^t M^k over the block substitution of radius r.  A
    zero vector gives the transfer function explicitly.  Without properness
    a non-zero vector is only conclusive when it has constant sign (the mean
    of c is then non-zero), so the caller may pass require_proper=False to
    accept an Inconclusive answer instead of an error.
    """
    if require_proper and not s.flags.proper:
        raise SubstitutionError("is_coboundary needs a proper substitution; run properize first")
    if not s.flags.primitive:
        raise SubstitutionError("is_coboundary needs a primitive substitution")
    r = c.radius
    blk = block_substitution(s, r)
    ba = blk.block_alphabet
    M = blk.matrix
    dim = len(ba.blocks_enc)
    vec = tuple(c.table[b] for b in ba.blocks_enc)
    sums = _partial_sums(c, s)
    maxc = max(abs(v) for v in vec)
    bound = s.length_of_power(dim) * maxc
    k = None
    v = vec
    for step in range(dim + 1):
        if all(x == 0 for x in v):
            k = step
            break
        if all(x > 0 for x in v) or all(x < 0 for x in v):
            return CocycleReport("no", "non-zero mean", dim, witness={
                "power": step, "image_sums": list(v),
                "note": "every image block under this power has a sum of the same sign"},
                bound=bound, partial_sums=sums)
        if step < dim:
            v = M.vecmul(v)
    if k is None:
        j = next(i for i, x in enumerate(v) if x)
        wit = {"power": dim, "block": show(s.alphabet.decode(ba.blocks_enc[j])), "image_sum": v[j]}
        if s.flags.proper:
            return CocycleReport("no", "kernel condition fails", dim, witness=wit,
                                 bound=bound, partial_sums=sums)
        return CocycleReport("inconclusive", "kernel condition fails on a non-proper substitution",
                             dim, witness=wit, bound=bound, partial_sums=sums)
    d = transfer_function(c, s, k, L)
    if not verify_coboundary(c, d, s):
        raise AssertionError("transfer function failed verification")
    maxd = max(abs(x) for x in d.values())
    return CocycleReport("yes", "kernel condition holds", dim, k=k, transfer=d, max_d=maxd,
                         bound=bound, partial_sums=sums)


def transfer_function(c: LocalFunction, s: Substitution, k: int, L: int | None = None) -> LocalFunction:
    """d(y) = sum of c over the part of the s^k-image preceding y."""
    if k == 0:
        return constant_function(s, 0)
    if L is None:
        L = recognizability_L(s)
    rc = c.radius

    def fn(w, R):
        try:
            pb = power_bars(s, w, k, L)
        except ShortWindow:
            raise NeedMore from None
        lo, hi = pb.certified
        if not R < hi:
            raise NeedMore
        bars = [p for p in pb.positions if p <= R]
        if not bars or bars[-1] < lo or bars[-1] - rc < 0:
            raise NeedMore
        b = bars[-1]
        return sum(c.table[w[i - rc:i + rc + 1]] for i in range(b, R))

    return tabulate(s, fn, r_start=max(1, L))


# ---------------------------------------------------------------- F_n

def renormalize_step(f: SlidingBlockCode, sigma: Substitution, tau: Substitution, n: int,
                     L_tau: int | None = None) -> DillLocal:
    """Implementation of F_n where tau^n o F_n = S^{r_n} o f o sigma^n."""
    if n == 0:
        return dill_of_code(f, sigma)
    if L_tau is None:
        L_tau = recognizability_L(tau)
    sn = sigma.power(n)

    def fn(w, R):
        left = sn.apply_enc(w[:R])
        mid = sn.image_enc(w[R])
        img = left + mid + sn.apply_enc(w[R + 1:])
        if len(img) < f.width:
            raise NeedMore
        z = f.apply_enc(img)
        zo = len(left) - f.memory
        try:
            pb = power_bars(tau, z, n, L_tau)
        except ShortWindow:
            raise NeedMore from None
        lo, hi = pb.certified
        if not (lo <= zo and zo + len(mid) <= hi):
            raise NeedMore
        return "".join(c for p, c in zip(pb.positions, pb.letters_enc) if zo <= p < zo + len(mid))

    return DillLocal(tabulate(sigma, fn, r_start=1), tau.alphabet)


def prop55_bound(K, L_tau: int) -> tuple:
    """Radius-pair bound (K^4 (2K^4 + 2 + L), 2 K^4) for F_n."""
    K4 = K ** 4
    return K4 * (2 * K4 + 2 + L_tau), 2 * K4


def radius_bound(sigma: Substitution, K: int, L_tau: int) -> Bound:
    """2K^4(K+1)(2R+1)|sigma^{p(2R+1)}| with R = K^4(2K^4+2+L) and p(n) <= K n."""
    R = K ** 4 * (2 * K ** 4 + 2 + L_tau)
    front = 2 * K ** 4 * (K + 1) * (2 * R + 1)
    p = K * (2 * R + 1)
    lg = math.log2(front) + p * math.log2(max(sigma.max_length, 2))
    return Bound(lg, None)


@dataclass
class ReduceResult:
    verdict: str                # "yes" or "inconclusive"
    reason: str
    g: SlidingBlockCode | None
    shift: int | None
    trace: list
    repetition: tuple | None
    N: int | None = None
    coboundary: CocycleReport | None = None
    bound: Bound | None = None

    def to_dict(self) -> dict:
        return {"verdict": self.verdict, "reason": self.reason,
                "g": self.g.to_dict() if self.g else None, "shift": self.shift,
                "trace": self.trace, "repetition": list(self.repetition) if self.repetition else None,
                "N": self.N, "bound": self.bound.to_json() if self.bound else None,
                "coboundary": self.coboundary.to_dict() if self.coboundary else None}


def _dependency_interval(lf: LocalFunction) -> tuple:
    """Shortest [lo, hi] (relative to the centre) through which the rule factors."""
    R = lf.radius
    best = (-R, R)
    for length in range(1, 2 * R + 2):
        for lo in range(-R, R - length + 2):
            a, b = lo + R, lo + R + length
            seen, ok = {}, True
            for w, v in lf.table.items():
                if seen.setdefault(w[a:b], v) != v:
                    ok = False
                    break
            if ok:
                return lo, lo + length - 1
    return best


def normalize_code(lf: LocalFunction, target: Alphabet, sub: Substitution) -> tuple:
    """Write the rule as S^e o g with g of smallest radius; returns (e, g)."""
    lo, hi = _dependency_interval(lf)
    e = lo + (hi - lo) // 2
    t, s = e - lo, hi - e
    R = lf.radius
    rule = {}
    for w, v in lf.table.items():
        rule[w[R + lo:R + hi + 1]] = v
    return e, SlidingBlockCode(sub.alphabet, target, t, s, rule)


def find_shift(f: SlidingBlockCode, g: LocalFunction, sub: Substitution, span: int) -> int | None:
    """k with f = S^k o g, checked on every window of the language."""
    fl = f.centred(sub)
    for k in sorted(range(-span, span + 1), key=abs):
        q = max(fl.radius, g.radius + abs(k))
        ok = True
        for w in language_enc(sub, 2 * q + 1):
            if fl.table[w[q - fl.radius:q + fl.radius + 1]] != \
                    g.table[w[q + k - g.radius:q + k + g.radius + 1]]:
                ok = False
                break
        if ok:
            return k
    return None


def reduce_radius(f: SlidingBlockCode, sigma: Substitution, tau: Substitution, n_cap: int = 12,
                  L_tau: int | None = None, require_proper: bool = False) -> ReduceResult:
    """Replace a factor map by S^k o g with g of small radius."""
    if L_tau is None:
        L_tau = recognizability_L(tau)
    trace, seen, maps = [], {}, {}
    rep = None
    for n in range(0, n_cap + 1):
        F = renormalize_step(f, sigma, tau, n, L_tau)
        fp = F.fingerprint()
        maps[n] = F
        trace.append({"n": n, "radius_pair": list(F.radius_pair), "fingerprint": fp})
        if n >= 1 and fp in seen:
            rep = (seen[fp], n)
            break
        if n >= 1:
            seen[fp] = n
    if rep is None:
        return ReduceResult("inconclusive", f"no repetition among F_1..F_{n_cap}", None, None,
                            trace, None)
    period = rep[1] - rep[0]
    N = period
    while tau.length_of_power(N) < f.radius:
        N += period
    F = maps.get(N) or renormalize_step(f, sigma, tau, N, L_tau)
    cm1 = F.cocycle.map(lambda v: v - 1)
    rep_c = is_coboundary(minimize(cm1), sigma, require_proper=require_proper)
    if rep_c.verdict != "yes":
        return ReduceResult("inconclusive", f"c-1 coboundary test: {rep_c.reason}", None, None,
                            trace, rep, N, rep_c)
    D = rep_c.transfer
    rF, rd = F.radius, D.radius
    phi = F.phi.table

    def fn(w, R):
        if R < rd:
            raise NeedMore
        j = -D.table[w[R - rd:R + rd + 1]]

        def phi_at(i):
            idx = R + i
            if idx - rF < 0 or idx + rF >= len(w):
                raise NeedMore
            return phi[w[idx - rF:idx + rF + 1]]

        if j >= 0:
            acc, i = "", 0
            while len(acc) <= j:
                acc += phi_at(i)
                i += 1
            return acc[j]
        acc, i = "", -1
        while len(acc) < -j:
            acc = phi_at(i) + acc
            i -= 1
        return acc[len(acc) + j]

    G = tabulate(sigma, fn, r_start=max(rF, rd))
    span = f.radius + G.radius + (rep_c.max_d or 0) + 2 * tau.max_length ** max(N, 1)
    k = find_shift(f, G, sigma, span)
    if k is None:
        raise AssertionError("f and the reduced map are not related by a shift")
    e, g = normalize_code(G, tau.alphabet, sigma)
    K = lr_constant_int(sigma)
    return ReduceResult("yes", "coboundary transfer found", g, k + e, trace, rep, N, rep_c,
                        radius_bound(sigma, K, L_tau))
