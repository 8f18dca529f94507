"""Alphabets, morphisms, substitutions, fixed points, languages and bounds.

Letters are opaque string tokens and public words are tuples of tokens.
Internally every alphabet encodes its letters as single characters so that
images, occurrences and factor sets can be handled with plain ``str``
operations (``str.translate``, ``str.find``, slicing).
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

Word = tuple


class SubstitutionError(ValueError):
    """Invalid input: bad alphabet, wrong preconditions, unparsable file."""


class CapExceeded(RuntimeError):
    """A pragmatic search cap was reached before a definite answer."""

    def __init__(self, message, cap=None):
        super().__init__(message)
        self.cap = cap


class AmbiguityError(RuntimeError):
    """Raised when a supposedly unique decoding turns out ambiguous."""


# ---------------------------------------------------------------- alphabets

class Alphabet:
    """Ordered finite set of letter tokens.

    The order is significant: it fixes every canonical enumeration
    downstream (languages, rule tables, block alphabets).
    """

    __slots__ = ("letters", "_index", "_enc", "_dec", "plain")

    def __init__(self, letters: Iterable[str]):
        letters = tuple(str(a) for a in letters)
        if not letters:
            raise SubstitutionError("alphabet must be non-empty")
        if len(set(letters)) != len(letters):
            raise SubstitutionError(f"duplicate letters in alphabet {letters}")
        self.letters = letters
        self._index = {a: i for i, a in enumerate(letters)}
        # single-character tokens encode as themselves (readable internals)
        self.plain = all(len(a) == 1 for a in letters)
        if self.plain:
            self._enc = {a: a for a in letters}
        else:
            self._enc = {a: chr(0x100 + i) for i, a in enumerate(letters)}
        self._dec = {c: a for a, c in self._enc.items()}

    @property
    def size(self) -> int:
        return len(self.letters)

    def __len__(self):
        return len(self.letters)

    def __iter__(self):
        return iter(self.letters)

    def __contains__(self, a):
        return a in self._index

    def __eq__(self, other):
        return isinstance(other, Alphabet) and self.letters == other.letters

    def __hash__(self):
        return hash(self.letters)

    def __repr__(self):
        return f"Alphabet({list(self.letters)})"

    def index(self, a: str) -> int:
        try:
            return self._index[a]
        except KeyError:
            raise SubstitutionError(f"letter {a!r} not in {self!r}") from None

    def code(self, a: str) -> str:
        try:
            return self._enc[a]
        except KeyError:
            raise SubstitutionError(f"letter {a!r} not in {self!r}") from None

    def encode(self, word) -> str:
        word = as_word(word, self)
        return "".join(self.code(a) for a in word)

    def decode(self, s: str) -> Word:
        dec = self._dec
        return tuple(dec[c] for c in s)

    def letter(self, c: str) -> str:
        return self._dec[c]


def as_word(word, alphabet: Alphabet | None = None) -> Word:
    """Normalise user input into a tuple of tokens.

    A plain string is split into characters unless it is a single token of
    a multi-character alphabet, or unless it contains whitespace.
    """
    if isinstance(word, tuple):
        return word
    if isinstance(word, list):
        return tuple(word)
    if isinstance(word, str):
        if alphabet is not None and not alphabet.plain:
            if word in alphabet:
                return (word,)
            parts = word.split()
            if all(p in alphabet for p in parts):
                return tuple(parts)
        if any(ch.isspace() for ch in word):
            return tuple(word.split())
        return tuple(word)
    return tuple(word)


def show(word) -> str:
    """Human readable rendering of a word: concatenated if tokens are chars."""
    word = tuple(word)
    if all(len(a) == 1 for a in word):
        return "".join(word)
    return " ".join(word)


# ---------------------------------------------------------------- matrices

@dataclass(frozen=True)
class IntMatrix:
    """Exact integer matrix stored as a tuple of rows."""

    rows: tuple

    @classmethod
    def identity(cls, n):
        return cls(tuple(tuple(int(i == j) for j in range(n)) for i in range(n)))

    @property
    def shape(self):
        return (len(self.rows), len(self.rows[0]) if self.rows else 0)

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def __matmul__(self, other: "IntMatrix") -> "IntMatrix":
        cols = list(zip(*other.rows))
        return IntMatrix(tuple(tuple(sum(x * y for x, y in zip(r, c)) for c in cols)
                               for r in self.rows))

    def __pow__(self, k: int) -> "IntMatrix":
        result = IntMatrix.identity(self.shape[0])
        base = self
        while k:
            if k & 1:
                result = result @ base
            base = base @ base
            k >>= 1
        return result

    def transpose(self) -> "IntMatrix":
        return IntMatrix(tuple(zip(*self.rows)))

    def vecmul(self, v: Sequence[int]) -> tuple:
        """Row vector times matrix."""
        return tuple(sum(v[i] * self.rows[i][j] for i in range(len(v)))
                     for j in range(self.shape[1]))

    def is_positive(self) -> bool:
        return all(x > 0 for r in self.rows for x in r)

    def tolist(self):
        return [list(r) for r in self.rows]


# ---------------------------------------------------------------- morphisms

class Morphism:
    """Non-erasing or erasing morphism between free monoids."""

    def __init__(self, source: Alphabet, target: Alphabet, images):
        if not isinstance(source, Alphabet):
            source = Alphabet(source)
        if not isinstance(target, Alphabet):
            target = Alphabet(target)
        self.source = source
        self.target = target
        imgs = {}
        for a in source:
            if a not in images:
                raise SubstitutionError(f"no image given for letter {a!r}")
            w = as_word(images[a], target)
            for b in w:
                if b not in target:
                    raise SubstitutionError(
                        f"image of {a!r} uses {b!r} which is not in the target alphabet")
            imgs[a] = w
        extra = set(images) - set(source.letters)
        if extra:
            raise SubstitutionError(f"images given for unknown letters {sorted(extra)}")
        self.images = imgs
        self._table = {ord(source.code(a)): target.encode(w) for a, w in imgs.items()}

    # -- basic quantities
    def __call__(self, word) -> Word:
        word = as_word(word, self.source)
        out = []
        for a in word:
            try:
                out.extend(self.images[a])
            except KeyError:
                raise SubstitutionError(f"letter {a!r} not in source alphabet") from None
        return tuple(out)

    def apply_enc(self, s: str) -> str:
        return s.translate(self._table)

    def image_enc(self, c: str) -> str:
        return self._table[ord(c)]

    @cached_property
    def max_length(self) -> int:
        """|m|: the longest image length."""
        return max(len(w) for w in self.images.values())

    @cached_property
    def min_length(self) -> int:
        """<m>: the shortest image length."""
        return min(len(w) for w in self.images.values())

    @cached_property
    def matrix(self) -> IntMatrix:
        """Incidence matrix: entry (i, j) counts target letter i in the image of j."""
        t, s = self.target, self.source
        rows = [[0] * s.size for _ in range(t.size)]
        for j, a in enumerate(s):
            for b in self.images[a]:
                rows[t.index(b)][j] += 1
        return IntMatrix(tuple(tuple(r) for r in rows))

    def is_erasing(self) -> bool:
        return self.min_length == 0

    def is_coding(self) -> bool:
        return all(len(w) == 1 for w in self.images.values())

    def rules(self) -> dict:
        return {a: show(w) for a, w in self.images.items()}

    def to_dict(self) -> dict:
        return {"source": list(self.source.letters), "target": list(self.target.letters),
                "images": {a: list(w) for a, w in self.images.items()}}

    def __eq__(self, other):
        return (isinstance(other, Morphism) and self.source == other.source
                and self.target == other.target and self.images == other.images)

    def __hash__(self):
        return hash((self.source, self.target, tuple(self.images.items())))

    def __repr__(self):
        body = ", ".join(f"{a}->{show(w)}" for a, w in self.images.items())
        return f"{type(self).__name__}({body})"

    def rename(self, source_map=None, target_map=None) -> "Morphism":
        """Rename letters of source and/or target (maps old token -> new)."""
        sm = source_map or {}
        tm = target_map or {}
        src = Alphabet(sm.get(a, a) for a in self.source)
        tgt = Alphabet(tm.get(b, b) for b in self.target)
        imgs = {sm.get(a, a): tuple(tm.get(b, b) for b in w) for a, w in self.images.items()}
        return Morphism(src, tgt, imgs)


def identity_morphism(alphabet: Alphabet) -> Morphism:
    return Morphism(alphabet, alphabet, {a: (a,) for a in alphabet})


def compose(outer: Morphism, inner: Morphism) -> Morphism:
    """Return the morphism a -> outer(inner(a))."""
    if inner.target != outer.source:
        raise SubstitutionError(
            f"cannot compose: inner target {inner.target!r} != outer source {outer.source!r}")
    imgs = {a: outer(inner.images[a]) for a in inner.source}
    if outer.source == outer.target and inner.source == inner.target:
        return Substitution(inner.source, imgs)
    return Morphism(inner.source, outer.target, imgs)


# ---------------------------------------------------------------- substitutions

@dataclass(frozen=True)
class Flags:
    primitive: bool
    growing: bool
    constant_length: bool
    left_proper: bool
    right_proper: bool
    injective_on_letters: bool
    prolongable: tuple = ()

    @property
    def proper(self) -> bool:
        return self.left_proper and self.right_proper

    def to_dict(self):
        d = {k: getattr(self, k) for k in ("primitive", "growing", "constant_length",
                                           "left_proper", "right_proper",
                                           "injective_on_letters")}
        d["prolongable"] = [list(p) for p in self.prolongable]
        return d


class Substitution(Morphism):
    """Endomorphism of a free monoid (source alphabet = target alphabet)."""

    def __init__(self, alphabet, images):
        if not isinstance(alphabet, Alphabet):
            alphabet = Alphabet(alphabet)
        super().__init__(alphabet, alphabet, images)
        if self.is_erasing():
            raise SubstitutionError("substitutions must be non-erasing")
        self._lang_cache = {}
        self._power_cache = {1: self}

    @classmethod
    def from_rules(cls, rules: dict, alphabet=None) -> "Substitution":
        """Build from ``{"a": "ab", "b": "a"}`` style rules.

        Images may be strings (split into characters, or on whitespace when
        the alphabet has multi-character tokens) or sequences of tokens.
        """
        letters = list(alphabet) if alphabet is not None else list(rules)
        alph = Alphabet(letters)
        return cls(alph, {a: as_word(w, alph) for a, w in rules.items()})

    @property
    def alphabet(self) -> Alphabet:
        return self.source

    def power(self, k: int) -> "Substitution":
        if k < 1:
            raise SubstitutionError("power must be >= 1")
        if k not in self._power_cache:
            half = self.power(k // 2)
            p = compose(half, half)
            if k % 2:
                p = compose(self, p)
            self._power_cache[k] = p
        return self._power_cache[k]

    def iterate_enc(self, s: str, k: int) -> str:
        for _ in range(k):
            s = s.translate(self._table)
        return s

    # -- classification
    @cached_property
    def flags(self) -> Flags:
        return classify(self)

    def _reach(self):
        reach = {}
        for a in self.alphabet:
            seen, stack = set(), [a]
            while stack:
                c = stack.pop()
                for b in set(self.images[c]):
                    if b not in seen:
                        seen.add(b)
                        stack.append(b)
            reach[a] = seen
        return reach

    @cached_property
    def unbounded_letters(self) -> frozenset:
        """Letters a with |s^k(a)| -> infinity."""
        reach = self._reach()
        expanding = set()
        for c in self.alphabet:
            if c in reach[c]:
                scc = {e for e in reach[c] if c in reach[e]}
                if any(len(self.images[e]) >= 2 for e in scc):
                    expanding.add(c)
        return frozenset(a for a in self.alphabet
                         if a in expanding or reach[a] & expanding)

    def length_of_power(self, k: int, letter=None) -> int:
        """|s^k(letter)| (or |s^k| when letter is None) via matrix powers."""
        lengths = self.lengths_of_power(k)
        if letter is None:
            return max(lengths)
        return lengths[self.alphabet.index(letter)]

    def lengths_of_power(self, k: int) -> list:
        col = self.matrix ** k
        n = self.alphabet.size
        return [sum(col.rows[i][j] for i in range(n)) for j in range(n)]

    def min_power_with_min_length(self, n: int) -> int:
        """Smallest k >= 1 with <s^k> >= n (requires growing)."""
        if not self.flags.growing:
            raise SubstitutionError("substitution is not growing")
        mins = self.__dict__.setdefault("_min_len_cache", [])
        # mins[k-1] = <s^k>, extended on demand
        acc = self.matrix
        while not mins or mins[-1] < n:
            if mins:
                acc = self.matrix ** (len(mins) + 1)
            d = len(acc.rows)
            mins.append(min(sum(acc.rows[i][j] for i in range(d)) for j in range(d)))
        return next(k for k, v in enumerate(mins, 1) if v >= n)


def classify(s: Substitution) -> Flags:
    """Recompute all structural flags of a substitution."""
    d = s.alphabet.size
    m = s.matrix
    boolm = IntMatrix(tuple(tuple(int(x > 0) for x in r) for r in m.rows))
    primitive = False
    acc = boolm
    for _ in range(d * d - 2 * d + 2):
        if acc.is_positive():
            primitive = True
            break
        acc = IntMatrix(tuple(tuple(int(x > 0) for x in r) for r in (acc @ boolm).rows))
    unb = s.unbounded_letters
    growing = len(unb) == d
    imgs = list(s.images.values())
    constant = s.max_length == s.min_length
    left = len({w[0] for w in imgs}) == 1
    right = len({w[-1] for w in imgs}) == 1
    injective = len(set(imgs)) == len(imgs)
    prol = []
    for a in s.alphabet:
        w = s.images[a]
        if a in unb:
            if w[0] == a:
                prol.append((a, "right"))
            if w[-1] == a:
                prol.append((a, "left"))
    return Flags(primitive, growing, constant, left, right, injective, tuple(prol))


# ---------------------------------------------------------------- parsing

_RULE = re.compile(r"^\s*(\S+)\s*->\s*(.*?)\s*$")


def parse_sub(text: str, name: str = "<input>") -> Substitution:
    """Parse the ``.sub`` format.

    Optional ``alphabet: a b c`` line, then rules ``a -> a b`` one per line,
    ``#`` starts a comment.  When the alphabet is made of single characters an
    image may also be written without spaces (``a -> ab``).
    """
    alphabet = None
    rules = {}
    order = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        if line.strip().lower().startswith("alphabet:"):
            if alphabet is not None:
                raise SubstitutionError(f"{name}:{lineno}:1: duplicate alphabet line")
            alphabet = line.split(":", 1)[1].split()
            continue
        m = _RULE.match(line)
        if not m:
            col = len(raw) - len(raw.lstrip()) + 1
            raise SubstitutionError(f"{name}:{lineno}:{col}: expected 'letter -> image'")
        lhs, rhs = m.group(1), m.group(2).split()
        if lhs in rules:
            raise SubstitutionError(f"{name}:{lineno}:1: duplicate rule for {lhs!r}")
        if not rhs:
            col = raw.index("->") + 3
            raise SubstitutionError(f"{name}:{lineno}:{col}: empty image (erasing rule)")
        rules[lhs] = (rhs, lineno, raw)
        order.append(lhs)
    if not rules:
        raise SubstitutionError(f"{name}: no rules found")
    letters = alphabet if alphabet is not None else order
    known = set(letters)
    single = all(len(a) == 1 for a in letters)
    images = {}
    for lhs, (rhs, lineno, raw) in rules.items():
        if lhs not in known:
            raise SubstitutionError(f"{name}:{lineno}:1: letter {lhs!r} not in alphabet")
        word = []
        for tok in rhs:
            if tok in known:
                word.append(tok)
            elif single and all(ch in known for ch in tok):
                word.extend(tok)
            else:
                col = raw.find(tok, raw.index("->")) + 1
                raise SubstitutionError(f"{name}:{lineno}:{col}: unknown letter {tok!r}")
        images[lhs] = tuple(word)
    missing = [a for a in letters if a not in images]
    if missing:
        raise SubstitutionError(f"{name}: no rule for letters {missing}")
    return Substitution(Alphabet(letters), images)


def format_sub(s: Substitution) -> str:
    lines = ["alphabet: " + " ".join(s.alphabet.letters)]
    for a, w in s.images.items():
        lines.append(f"{a} -> {' '.join(w)}")
    return "\n".join(lines) + "\n"


def load_sub(path: str) -> Substitution:
    """Load a ``.sub`` file, or one of the built-in names prefixed with '@'."""
    if path.startswith("@"):
        key = path[1:].lower()
        if key not in BUILTINS:
            raise SubstitutionError(f"unknown built-in {path!r}; known: {sorted(BUILTINS)}")
        return BUILTINS[key]()
    with open(path, encoding="utf-8") as fh:
        return parse_sub(fh.read(), name=path)


def fibonacci() -> Substitution:
    return Substitution.from_rules({"a": "ab", "b": "a"})


def thue_morse() -> Substitution:
    return Substitution.from_rules({"a": "ab", "b": "ba"})


def chacon() -> Substitution:
    return Substitution.from_rules({"a": "aaba", "b": "b"})


BUILTINS = {"fibonacci": fibonacci, "fib": fibonacci, "thue-morse": thue_morse,
            "tm": thue_morse, "chacon": chacon}


# ---------------------------------------------------------------- fixed points

def _first_letter_period(s: Substitution, a: str, side: str) -> int | None:
    pick = (lambda w: w[0]) if side == "right" else (lambda w: w[-1])
    c = a
    for p in range(1, s.alphabet.size + 1):
        c = pick(s.images[c])
        if c == a:
            return p
    return None


class WindowOracle:
    """Lazy access to windows of a fixed point of some power of ``sub``.

    ``seed`` is a letter ``a`` (one-sided point s^w(a)) or a pair ``(b, a)``
    (two-sided point s^w(b).s^w(a) with the origin on ``a``).  The smallest
    power ``p`` such that the seed is prolongable for ``s^p`` is used.
    """

    def __init__(self, sub: Substitution, seed):
        self.sub = sub
        alph = sub.alphabet
        if isinstance(seed, (tuple, list)) and len(seed) == 2:
            b, a = seed
            self.two_sided = True
        else:
            b, a = None, seed
            self.two_sided = False
        if a not in alph or (b is not None and b not in alph):
            raise SubstitutionError(f"seed {seed!r} not in alphabet")
        pa = _first_letter_period(sub, a, "right")
        if pa is None:
            raise SubstitutionError(f"{a!r} is not right-prolongable for any power")
        if a not in sub.unbounded_letters:
            raise SubstitutionError(f"{a!r} is not a growing letter")
        p = pa
        if b is not None:
            pb = _first_letter_period(sub, b, "left")
            if pb is None:
                raise SubstitutionError(f"{b!r} is not left-prolongable for any power")
            if b not in sub.unbounded_letters:
                raise SubstitutionError(f"{b!r} is not a growing letter")
            p = pa * pb // math.gcd(pa, pb)
            if alph.encode((b, a)) not in language_enc(sub, 2):
                raise SubstitutionError(f"{b}{a} is not in the language: seed not admissible")
        self.power = p
        self.seed = (b, a) if b is not None else a
        self._sp = sub.power(p)
        self._right = alph.code(a)
        self._left = alph.code(b) if b is not None else ""

    def _grow(self, side, n):
        tbl = self._sp._table
        if side == "right":
            while len(self._right) < n:
                self._right = self._right.translate(tbl)
            return self._right
        while len(self._left) < n:
            self._left = self._left.translate(tbl)
        return self._left

    def prefix_enc(self, n: int) -> str:
        """x_[0, n) as an encoded string."""
        return self._grow("right", n)[:n]

    def left_enc(self, n: int) -> str:
        """x_[-n, 0) as an encoded string (two-sided only)."""
        if not self.two_sided:
            raise SubstitutionError("one-sided oracle has no left part")
        s = self._grow("left", n)
        return s[len(s) - n:] if n else ""

    def window_enc(self, n: int) -> str:
        """x_[-n, n] as an encoded string, origin at index n."""
        return self.left_enc(n) + self.prefix_enc(n + 1)

    def prefix(self, n: int) -> Word:
        return self.sub.alphabet.decode(self.prefix_enc(n))

    def window(self, n: int) -> Word:
        return self.sub.alphabet.decode(self.window_enc(n))


def default_seed(s: Substitution) -> str:
    """Letter used for 'the' one-sided fixed point: smallest power, then order."""
    best = None
    for a in s.alphabet:
        if a not in s.unbounded_letters:
            continue
        p = _first_letter_period(s, a, "right")
        if p is not None and (best is None or p < best[0]):
            best = (p, a)
    if best is None:
        raise SubstitutionError("no letter is right-prolongable for a power of the substitution")
    return best[1]


def admissible_pairs(s: Substitution) -> list:
    """Two-sided seeds (b, a) with ba in L_2 fixed by a common power."""
    out = []
    for w in sorted(language_enc(s, 2), key=lambda w: [s.alphabet.index(s.alphabet.letter(c)) for c in w]):
        b, a = s.alphabet.decode(w)
        if a not in s.unbounded_letters or b not in s.unbounded_letters:
            continue
        if _first_letter_period(s, a, "right") and _first_letter_period(s, b, "left"):
            out.append((b, a))
    return out


def default_two_sided_seed(s: Substitution):
    pairs = admissible_pairs(s)
    if not pairs:
        raise SubstitutionError("no admissible two-sided fixed point")
    pw = []
    for b, a in pairs:
        pa = _first_letter_period(s, a, "right")
        pb = _first_letter_period(s, b, "left")
        pw.append((pa * pb // math.gcd(pa, pb), pairs.index((b, a)), (b, a)))
    return min(pw)[2]


def oracle(s: Substitution, seed=None) -> WindowOracle:
    return WindowOracle(s, default_seed(s) if seed is None else seed)


def fixed_point_window(s: Substitution, seed, n: int) -> Word:
    """Prefix of length n of s^w(seed), or the window x_[-n, n] for a pair seed."""
    if isinstance(seed, str) and len(seed) == 2 and seed not in s.alphabet and s.alphabet.plain:
        seed = (seed[0], seed[1])
    o = WindowOracle(s, seed)
    return o.window(n) if o.two_sided else o.prefix(n)


# ---------------------------------------------------------------- languages

def _factors(s: str, n: int) -> set:
    return {s[i:i + n] for i in range(len(s) - n + 1)}


def _closure_language(s: Substitution, n: int) -> frozenset:
    """All words of length <= n occurring in some s^k(a), by fixpoint."""
    alph = s.alphabet
    found = {alph.code(a) for a in alph}
    todo = list(found)
    while todo:
        w = todo.pop()
        img = s.apply_enc(w)
        for m in range(1, n + 1):
            for i in range(len(img) - m + 1):
                f = img[i:i + m]
                if f not in found:
                    found.add(f)
                    todo.append(f)
    return frozenset(found)


def language_enc(s: Substitution, n: int) -> frozenset:
    """L_n(s) as a set of encoded strings."""
    if n in s._lang_cache:
        return s._lang_cache[n]
    if n == 0:
        res = frozenset({""})
    elif n <= 2 or not (s.flags.primitive and s.flags.growing):
        allw = _closure_language(s, max(n, 2))
        for m in range(0, max(n, 2) + 1):
            s._lang_cache.setdefault(m, frozenset(w for w in allw if len(w) == m)
                                     if m else frozenset({""}))
        res = s._lang_cache[n]
    else:
        k = s.min_power_with_min_length(n - 1)
        alph = s.alphabet
        imgs = {c: s.iterate_enc(c, k) for c in (alph.code(a) for a in alph)}
        res = set()
        for ab in language_enc(s, 2):
            res |= _factors(imgs[ab[0]] + imgs[ab[1]], n)
        res = frozenset(res)
    s._lang_cache[n] = res
    return res


def language(s: Substitution, n: int) -> set:
    """L_n(s) as a set of tuples of tokens."""
    return {s.alphabet.decode(w) for w in language_enc(s, n)}


def sorted_language(s: Substitution, n: int) -> list:
    """L_n(s) in canonical (alphabet-lexicographic) order, encoded."""
    idx = {s.alphabet.code(a): i for i, a in enumerate(s.alphabet)}
    return sorted(language_enc(s, n), key=lambda w: [idx[c] for c in w])


def complexity(s: Substitution, n: int) -> int:
    return len(language_enc(s, n))


def _ancestor_images(s: Substitution, n: int) -> tuple:
    """The words s^k(ab), ab in L_2, whose factors of length n are exactly L_n."""
    k = s.min_power_with_min_length(n - 1)
    cache = s.__dict__.setdefault("_ancestor_cache", {})
    if k not in cache:
        alph = s.alphabet
        imgs = {c: s.iterate_enc(c, k) for c in (alph.code(a) for a in alph)}
        cache[k] = tuple(imgs[ab[0]] + imgs[ab[1]] for ab in sorted(language_enc(s, 2)))
    return cache[k]


def in_language_enc(s: Substitution, w: str) -> bool:
    """Exact membership without materialising L_n (for long words)."""
    n = len(w)
    if n <= 64 or not (s.flags.primitive and s.flags.growing):
        return w in language_enc(s, n)
    return any(w in big for big in _ancestor_images(s, n))


def in_language(s: Substitution, word) -> bool:
    return in_language_enc(s, s.alphabet.encode(word))


# ---------------------------------------------------------------- spectral data

@dataclass
class SpectralData:
    char_poly: object        # sympy Poly over ZZ
    min_poly: object         # irreducible factor of char_poly vanishing at rho
    rho: object              # sympy CRootOf (or Integer)
    frequencies: tuple       # mpmath floats summing to 1

    def rho_interval(self, eps=Fraction(1, 10 ** 6)) -> tuple:
        """Rational isolating interval of rho of width <= eps."""
        ivs = self.min_poly.intervals(eps=eps)
        lo, hi = max(ivs, key=lambda t: t[0][1])[0]
        return Fraction(int(lo.p), int(lo.q)), Fraction(int(hi.p), int(hi.q))

    @property
    def degree(self) -> int:
        return self.min_poly.degree()

    def to_dict(self):
        lo, hi = self.rho_interval()
        return {"char_poly": str(self.char_poly.as_expr()),
                "min_poly": str(self.min_poly.as_expr()),
                "rho_interval": [str(lo), str(hi)], "rho": float(self.rho.evalf(20)),
                "frequencies": [float(f) for f in self.frequencies]}


_T = None


def _sym_t():
    global _T
    if _T is None:
        import sympy
        _T = sympy.Symbol("t")
    return _T


def dominant_root(poly):
    """Largest real root of an integer polynomial as (min_poly, root)."""
    import sympy
    t = _sym_t()
    best = None
    for fac, _mult in sympy.factor_list(poly.as_expr(), t)[1]:
        fp = sympy.Poly(fac, t)
        nreal = fp.count_roots()
        if nreal == 0:
            continue
        # real roots come first in CRootOf indexing, in increasing order
        r = sympy.CRootOf(fp.as_expr(), nreal - 1)
        if best is None or (r - best[1]).evalf(50) > 0:
            best = (fp, r)
    return best


def spectral_data(s: Substitution, dps: int = 30) -> SpectralData:
    """Exact characteristic polynomial, dominant root and Perron frequencies."""
    if not s.flags.primitive:
        raise SubstitutionError("spectral data requires a primitive substitution")
    cache = s.__dict__.setdefault("_misc_cache", {})
    if ("spectral", dps) in cache:
        return cache[("spectral", dps)]
    import mpmath
    import sympy
    t = _sym_t()
    cp = sympy.Poly(sympy.Matrix(s.matrix.tolist()).charpoly(t).as_expr(), t)
    minp, rho = dominant_root(cp)
    with mpmath.workdps(dps):
        vals, vecs = mpmath.eig(mpmath.matrix(s.matrix.tolist()))
        i = max(range(len(vals)), key=lambda j: mpmath.re(vals[j]))
        v = [mpmath.re(vecs[k, i]) for k in range(s.alphabet.size)]
        tot = sum(v)
        freqs = tuple(+(x / tot) for x in v)
    out = SpectralData(cp, minp, rho, freqs)
    cache[("spectral", dps)] = out
    return out


# ---------------------------------------------------------------- bounds

@dataclass(frozen=True, order=False)
class Bound:
    """A possibly astronomically large non-negative quantity.

    ``exact`` is filled whenever the value is small enough to materialise;
    comparisons fall back to ``log2`` otherwise.
    """

    log2: float
    exact: int | None = None

    @classmethod
    def of(cls, n: int) -> "Bound":
        n = int(n)
        return cls(math.log2(n) if n > 0 else float("-inf"), n)

    def __ge__(self, other):
        if isinstance(other, Bound):
            if self.exact is not None and other.exact is not None:
                return self.exact >= other.exact
            return self.log2 >= other.log2
        other = Fraction(other)
        if self.exact is not None:
            return self.exact >= other
        if other <= 0:
            return True
        return self.log2 >= math.log2(other)

    def __le__(self, other):
        if isinstance(other, Bound):
            return other >= self
        other = Fraction(other)
        if self.exact is not None:
            return self.exact <= other
        if other <= 0:
            return False
        return self.log2 <= math.log2(other)

    def __str__(self):
        if self.exact is not None and self.exact < 10 ** 30:
            return str(self.exact)
        return f"2^{self.log2:.6g}"

    def to_json(self):
        if self.exact is not None and self.exact < 10 ** 30:
            return self.exact
        return {"log2": self.log2}


def k_formula(s: Substitution) -> Bound:
    """Crude linear-recurrence constant |s|^(4 d^2)."""
    d = s.alphabet.size
    return Bound.of(s.max_length ** (4 * d * d))


def l_formula(s: Substitution) -> Bound:
    """Recognizability constant upper bound (general and one-to-one cases)."""
    d = s.alphabet.size
    sz = s.max_length
    lg = math.log2(sz) if sz > 1 else 0.0
    inner = 28 * d * d * lg                  # log2 of |s|^(28 d^2)
    if s.flags.injective_on_letters:
        expo_log = inner + math.log2(6)      # 6 |s|^(28d^2) dominates 6 d^2
        tail = sz
    else:
        expo_log = inner + math.log2(6 * d)
        tail = sz ** d
    expo = 2.0 ** expo_log if expo_log < 1000 else float("inf")
    main = 1 + (6 * d * d + expo) * lg
    if main < 60:
        if s.flags.injective_on_letters:
            e = 6 * d * d + 6 * sz ** (28 * d * d)
        else:
            e = 6 * d * d + 6 * d * sz ** (28 * d * d)
        return Bound.of(2 * sz ** e + tail)
    return Bound(main, None)


def q_formula(s: Substitution) -> Bound:
    """Upper bound on the number of distinct return substitutions to prefixes."""
    k = k_formula(s)
    base_log = math.log2(1 + (k.exact + 1) ** 3) if k.exact is not None else 3 * k.log2
    if k.exact is not None:
        expo_log = (math.log2(s.max_length) + 2 * math.log2(k.exact)
                    + math.log2(1 + (k.exact + 1) ** 3))
    else:
        expo_log = math.log2(s.max_length) + 5 * k.log2
    lg = base_log * 2.0 ** expo_log if expo_log < 1000 else float("inf")
    return Bound(lg, None)


def growth_sandwich(s: Substitution, n: int, K) -> bool:
    """Check rho^n / K^2 <= <s^n> <= |s^n| <= K^2 rho^n and |s^n| <= K^4 <s^n>."""
    lens = s.lengths_of_power(n)
    lo_len, hi_len = min(lens), max(lens)
    K = Fraction(K)
    if hi_len > K ** 4 * lo_len:
        return False
    lo, hi = spectral_data(s).rho_interval(Fraction(1, 10 ** 12))
    return (lo ** n / K ** 2 <= lo_len + Fraction(1, 10 ** 6)
            and hi_len <= K ** 2 * hi ** n + Fraction(1, 10 ** 6))


def empirical_lr_constant(s: Substitution, n_cap: int = 8, seed=None,
                          start: int = 4096, max_len: int = 1 << 20) -> Fraction:
    """Largest (return-word length)/|u| over u in L_m, m <= n_cap.

    The scanned prefix is doubled until the estimate is stable; the value is
    a lower bound for the true linear-recurrence constant.
    """
    key = ("lr", n_cap, seed)
    cache = s.__dict__.setdefault("_misc_cache", {})
    if key in cache:
        return cache[key]
    o = oracle(s, seed)
    prev = None
    length = start
    while True:
        x = o.prefix_enc(length)
        best = Fraction(0)
        for m in range(1, n_cap + 1):
            last = {}
            gap = {}
            for i in range(len(x) - m + 1):
                w = x[i:i + m]
                j = last.get(w)
                if j is not None:
                    g = i - j
                    if g > gap.get(w, 0):
                        gap[w] = g
                last[w] = i
            words = language_enc(s, m)
            if set(gap) != set(words):
                best = None
                break
            best = max(best, Fraction(max(gap.values()), m))
        if best is not None and best == prev:
            cache[key] = best
            return best
        prev = best
        if length >= max_len:
            raise CapExceeded("linear-recurrence estimate did not stabilise", cap=max_len)
        length *= 2


def lr_constant_int(s: Substitution, n_cap: int = 8) -> int:
    return math.ceil(empirical_lr_constant(s, n_cap))


def bound_calculators(s: Substitution) -> dict:
    """Formula bounds (exact integers where feasible, log2 otherwise)."""
    if not s.flags.primitive:
        raise SubstitutionError("bounds require a primitive substitution")
    return {"K_formula": k_formula(s), "L_formula": l_formula(s), "Q_formula": q_formula(s)}


def describe(s: Substitution) -> dict:
    """Summary report used by the command line ``analyze`` verb."""
    fl = s.flags
    out = {"alphabet": list(s.alphabet.letters), "rules": s.rules(),
           "flags": fl.to_dict(), "max_length": s.max_length, "min_length": s.min_length,
           "matrix": s.matrix.tolist()}
    if fl.primitive:
        out["spectral"] = spectral_data(s).to_dict()
        b = bound_calculators(s)
        out["bounds"] = {k: v.to_json() for k, v in b.items()}
        k = empirical_lr_constant(s)
        out["empirical_lr_constant"] = {"value": str(k), "ceil": math.ceil(k)}
    return out
