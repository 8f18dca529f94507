"""Recognizability: cutting bars, recognizability constants, desubstitution.

The constant is certified exactly: for every word of the language of length
2L+1 and every position inside the image of its centre letter, the image
window of radius L around that position is recorded together with whether
the position starts an image (a cutting bar) and of which letter.  L is
valid when every window determines that information.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .core import (AmbiguityError, CapExceeded, Substitution, SubstitutionError,
                   WindowOracle, language_enc, show)

NOT_BAR = ""


class ShortWindow(SubstitutionError):
    """The word is too short to certify the requested information."""


@dataclass
class MarkTable:
    """Window of radius L -> preimage letter code at a bar, or '' for no bar."""

    sub: Substitution
    L: int
    marks: dict
    conflicts: list = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return not self.conflicts

    def mark(self, window_enc: str) -> str:
        try:
            return self.marks[window_enc]
        except KeyError:
            raise SubstitutionError(
                f"window {show(self.sub.alphabet.decode(window_enc))} not in the language") from None


def mark_table(s: Substitution, L: int) -> MarkTable:
    """Exhaustive table of bar marks for windows of radius L."""
    cache = s.__dict__.setdefault("_mark_cache", {})
    if L in cache:
        return cache[L]
    marks, bad = {}, {}
    for w in language_enc(s, 2 * L + 1):
        left = len(s.apply_enc(w[:L]))
        img = s.apply_enc(w)
        c0 = w[L]
        for q in range(len(s.image_enc(c0))):
            c = left + q
            win = img[c - L:c + L + 1]
            lab = c0 if q == 0 else NOT_BAR
            old = marks.get(win)
            if old is None:
                marks[win] = lab
            elif old != lab:
                bad.setdefault(win, {old}).add(lab)
    conflicts = [(win, sorted(labs)) for win, labs in bad.items()]
    t = MarkTable(s, L, marks, conflicts)
    cache[L] = t
    return t


@dataclass
class Recognizability:
    L: int | None
    verified_on: int            # number of language words examined for L
    refuted: list               # (L', witness window, labels) for smaller L'
    cap: int

    @property
    def conclusive(self) -> bool:
        return self.L is not None

    def to_dict(self, s: Substitution | None = None) -> dict:
        dec = s.alphabet.decode if s else (lambda w: w)
        return {"L": self.L, "verified_on_words": self.verified_on, "cap": self.cap,
                "method": "exhaustive over the language",
                "refuted": [{"L": l, "window": show(dec(w)),
                             "labels": ["no-bar" if x == NOT_BAR else f"bar:{show(dec(x))}"
                                        for x in labs]}
                            for l, w, labs in self.refuted]}


def default_cap(s: Substitution) -> int:
    """64, or four times the longest image for substitutions with long images."""
    return max(64, 4 * s.max_length)


def recognizability_constant(s: Substitution, cap: int | None = None) -> Recognizability:
    """Smallest L <= cap for which bar marks are determined by radius-L windows."""
    if cap is None:
        cap = default_cap(s)
    if not s.flags.primitive:
        raise SubstitutionError("recognizability needs a primitive substitution")
    cache = s.__dict__.setdefault("_recog_cache", {})
    if cap not in cache:
        cache[cap] = _search_constant(s, cap)
    return cache[cap]


def _search_constant(s: Substitution, cap: int) -> Recognizability:
    # validity is monotone in L (a radius-L window sits inside every larger one),
    # so double until valid, then bisect; L-1 always ends up refuted
    refuted = {}

    def valid(L):
        t = mark_table(s, L)
        if not t.valid:
            win, labs = t.conflicts[0]
            refuted[L] = (L, win, labs)
        return t.valid

    lo, hi = -1, None               # lo refuted (or -1), hi valid
    L = 0
    while L <= cap:
        if valid(L):
            hi = L
            break
        lo = L
        L = 2 * L + 1 if L else 1
    if hi is None:
        if lo < cap and valid(cap):
            hi = cap
        else:
            return Recognizability(None, 0, sorted(refuted.values()), cap)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if valid(mid):
            hi = mid
        else:
            lo = mid
    return Recognizability(hi, len(language_enc(s, 2 * hi + 1)), sorted(refuted.values()), cap)


def recognizability_L(s: Substitution, cap: int | None = None) -> int:
    r = recognizability_constant(s, cap)
    if r.L is None:
        raise CapExceeded(f"no recognizability constant up to {r.cap}", cap=r.cap)
    return r.L


# ------------------------------------------------------------ cutting bars

@dataclass
class CuttingBars:
    positions: list             # relative to the origin of the point
    letters: list               # preimage letter of each bar
    radius: int

    def to_dict(self):
        return {"positions": self.positions, "letters": self.letters}


def preimage_oracle(s: Substitution, orc: WindowOracle) -> WindowOracle:
    """Oracle for y with x = s(y), x the point of ``orc`` (fixed by s^p)."""
    if not orc.two_sided:
        raise SubstitutionError("cutting bars need a two-sided point")
    if orc.sub is not s:
        raise SubstitutionError("oracle must belong to the same substitution")
    p = orc.power
    if p == 1:
        return orc
    b, a = orc.seed
    sp = s.power(p - 1)
    return WindowOracle(s, (sp.images[b][-1], sp.images[a][0]))


def cutting_bars(s: Substitution, orc: WindowOracle, n: int) -> CuttingBars:
    """Cutting bars of the point x = s(y) inside [-n, n]."""
    y = preimage_oracle(s, orc)
    alph = s.alphabet
    pos, let = [], []
    i, acc = 0, 0
    while acc <= n:
        c = y.prefix_enc(i + 1)[i]
        pos.append(acc)
        let.append(alph.letter(c))
        acc += len(s.image_enc(c))
        i += 1
    i, acc = 1, 0
    lpos, llet = [], []
    while True:
        c = y.left_enc(i)[0]
        acc -= len(s.image_enc(c))
        if acc < -n:
            break
        lpos.append(acc)
        llet.append(alph.letter(c))
        i += 1
    keep = [k for k, p in enumerate(pos) if p <= n]
    return CuttingBars(lpos[::-1] + [pos[k] for k in keep], llet[::-1] + [let[k] for k in keep], n)


# ------------------------------------------------------------ desubstitution

@dataclass
class Desubstitution:
    """Preimage letters between the first and last certified bars of a word."""

    bars: list                  # positions in the input word
    letters_enc: str            # preimage letter codes, one per bar
    region: tuple               # certified region [lo, hi)

    def preimage(self, s: Substitution) -> tuple:
        return s.alphabet.decode(self.letters_enc)

    def atom(self, c: int) -> tuple:
        """(index of letter, shift) of position c inside the preimage."""
        import bisect
        k = bisect.bisect_right(self.bars, c) - 1
        if k < 0 or k >= len(self.letters_enc):
            raise SubstitutionError("position outside the certified region")
        return k, c - self.bars[k]


def _bars(s: Substitution, z: str, L: int):
    t = mark_table(s, L)
    if not t.valid:
        raise AmbiguityError(f"radius {L} is not a recognizability constant")
    bars, lets = [], []
    for j in range(L, len(z) - L):
        m = t.mark(z[j - L:j + L + 1])
        if m != NOT_BAR:
            bars.append(j)
            lets.append(m)
    return bars, lets


def desubstitute_enc(s: Substitution, z: str, L: int) -> Desubstitution:
    """Locate bars of an encoded word and read the preimage letters."""
    bars, lets = _bars(s, z, L)
    for k in range(len(bars) - 1):
        if bars[k + 1] - bars[k] != len(s.image_enc(lets[k])):
            raise AmbiguityError("bar gaps disagree with image lengths")
        if z[bars[k]:bars[k + 1]] != s.image_enc(lets[k]):
            raise AmbiguityError("image mismatch between consecutive bars")
    return Desubstitution(bars, "".join(lets), (L, len(z) - L))


def desubstitute(s: Substitution, window, L: int | None = None, power: int = 1,
                 origin: int | None = None) -> dict:
    """Preimage window and offset of ``origin`` (default: centre) under s^power.

    Returns a dict with ``preimage`` (tuple of letters), ``index`` (position
    of the letter whose image covers the origin) and ``offset``
    (0 <= offset < |s^power(letter)|).
    """
    alph = s.alphabet
    z = alph.encode(window)
    if origin is None:
        origin = len(z) // 2
    if L is None:
        L = recognizability_L(s)
    cur, c, offset = z, origin, 0
    for j in range(power):
        if len(cur) < 2 * L + 1:
            raise SubstitutionError("window too short for desubstitution")
        d = desubstitute_enc(s, cur, L)
        k, i = d.atom(c)
        if i >= len(s.image_enc(d.letters_enc[k])):
            raise SubstitutionError("position outside the certified region")
        if j == 0:
            offset = i
        else:
            offset += len(s.power(j).apply_enc(cur[c - i:c]))
        cur, c = d.letters_enc, k
    letter = cur[c]
    if not 0 <= offset < len(s.power(power).image_enc(letter)):
        raise AmbiguityError("inconsistent offset")
    return {"preimage": alph.decode(cur), "index": c, "offset": offset, "letter": alph.letter(letter)}


def partition_atom(s: Substitution, window, L: int | None = None) -> tuple:
    """(letter a, shift i) of the atom S^i s([a]) containing the centred point."""
    r = desubstitute(s, window, L, 1)
    return r["letter"], r["offset"]


@dataclass
class PowerBars:
    """Bars of s^n found in a word by n rounds of desubstitution."""

    positions: list             # positions in the word
    letters_enc: str            # s^n-preimage letters
    certified: tuple            # [lo, hi): every s^n bar in this range is listed


def power_bars(s: Substitution, z: str, n: int, L: int) -> PowerBars:
    """Iterated desubstitution; raises SubstitutionError when z is too short."""
    t = mark_table(s, L)
    if not t.valid:
        raise AmbiguityError(f"radius {L} is not a recognizability constant")
    if n == 0:
        return PowerBars(list(range(len(z))), z, (0, len(z)))
    cur = z
    zpos = list(range(len(z)))
    lo, hi = 0, len(z)
    for _level in range(n):
        if len(cur) < 2 * L + 1:
            raise ShortWindow("word too short for iterated desubstitution")
        bars, lets = [], []
        for j in range(L, len(cur) - L):
            m = t.mark(cur[j - L:j + L + 1])
            if m != NOT_BAR:
                bars.append(j)
                lets.append(m)
        for k in range(len(bars) - 1):
            if bars[k + 1] - bars[k] != len(s.image_enc(lets[k])) \
                    or cur[bars[k]:bars[k + 1]] != s.image_enc(lets[k]):
                raise AmbiguityError("desubstitution is inconsistent")
        new_lo = zpos[L] if L < len(zpos) else hi
        new_hi = zpos[len(cur) - L] if len(cur) - L < len(zpos) else hi
        lo, hi = max(lo, new_lo), min(hi, new_hi)
        zpos = [zpos[j] for j in bars]
        cur = "".join(lets)
        if not bars:
            raise ShortWindow("no bar found: word too short")
    return PowerBars(zpos, cur, (lo, hi))
