"""Return words, return pairs, derived sequences and return substitutions.

Return letters are numbered ``"1", "2", ...`` in order of first occurrence of
``wu`` in the one-sided point, for words and for pairs alike.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .core import (Alphabet, CapExceeded, Morphism, Substitution, SubstitutionError,
                   WindowOracle, as_word, empirical_lr_constant, language_enc, oracle, show)

MAX_SCAN = 1 << 22


def numbered_alphabet(n: int) -> Alphabet:
    return Alphabet(str(i) for i in range(1, n + 1))


@dataclass
class ReturnStructure:
    """Ordered return words (word marker) or return pairs (set marker)."""

    base: Alphabet
    marker: tuple               # a word, or a tuple of words for the set case
    is_set: bool
    pairs_enc: list             # [(w_enc, u_enc)] in first-occurrence order
    first: int                  # first occurrence of the marker in x
    scanned: int                # length of the scanned prefix
    alphabet: Alphabet = field(init=False)
    _index: dict = field(init=False, repr=False)

    def __post_init__(self):
        self.alphabet = numbered_alphabet(len(self.pairs_enc))
        self._index = {p: str(i + 1) for i, p in enumerate(self.pairs_enc)}

    # -- views
    @property
    def size(self) -> int:
        return len(self.pairs_enc)

    @property
    def pairs(self) -> list:
        dec = self.base.decode
        return [(dec(w), dec(u)) for w, u in self.pairs_enc]

    @property
    def words(self) -> list:
        """Distinct return words in order of first occurrence."""
        seen, out = set(), []
        for w, _u in self.pairs_enc:
            if w not in seen:
                seen.add(w)
                out.append(self.base.decode(w))
        return out

    @property
    def theta(self) -> Morphism:
        """Coding morphism: return letter -> its return word (d_1 in the set case)."""
        return Morphism(self.alphabet, self.base,
                        {str(i + 1): self.base.decode(w) for i, (w, _u) in enumerate(self.pairs_enc)})

    @property
    def theta_tilde(self) -> dict:
        return {str(i + 1): p for i, p in enumerate(self.pairs)}

    def letter_of(self, w_enc: str, u_enc: str) -> str:
        try:
            return self._index[(w_enc, u_enc)]
        except KeyError:
            raise CapExceeded(
                f"return pair ({self.base.decode(w_enc)}, {self.base.decode(u_enc)}) missing "
                "from the scanned structure", cap=self.scanned) from None

    @property
    def marker_enc(self) -> tuple:
        if self.is_set:
            return tuple(self.base.encode(u) for u in self.marker)
        return (self.base.encode(self.marker),)

    @property
    def marker_length(self) -> int:
        return len(self.marker_enc[0])

    # -- decoding
    def decode_enc(self, s: str, strict_end: bool = True) -> list:
        """Decode a word that starts with a marker occurrence and ends with one.

        Returns the list of return letters (w_1,u_1)...(w_n,u_n) with
        ``w_1...w_n u_n == s``.  Raises when a pair is unknown.
        """
        pos = occurrences(s, self.marker_enc)
        if not pos or pos[0] != 0:
            raise SubstitutionError("word does not start with a marker occurrence")
        ell = self.marker_length
        if strict_end and pos[-1] != len(s) - ell:
            raise SubstitutionError("word does not end with a marker occurrence")
        out = []
        for p, q in zip(pos, pos[1:]):
            out.append(self.letter_of(s[p:q], s[q:q + ell]))
        return out

    def is_admissible(self, word) -> bool:
        """Admissibility of a word over the return alphabet (set case notion)."""
        letters = as_word(word, self.alphabet)
        if not letters:
            return True
        enc = [self.pairs_enc[self.alphabet.index(a)] for a in letters]
        flat = "".join(w for w, _ in enc) + enc[-1][1]
        rest = flat
        for i in range(len(enc) - 1):
            rest = rest[len(enc[i][0]):]
            if not rest.startswith(enc[i][1]):
                return False
        orc = self.__dict__.get("_oracle")
        if orc is None:
            return flat in self.__dict__.get("_window", "")
        return flat in language_enc(orc.sub, len(flat))

    def to_dict(self) -> dict:
        d = {"marker": [show(u) for u in self.marker] if self.is_set else show(self.marker),
             "first_occurrence": self.first, "scanned_prefix": self.scanned}
        if self.is_set:
            d["pairs"] = {str(i + 1): [show(w), show(u)] for i, (w, u) in enumerate(self.pairs)}
            d["return_words"] = [show(w) for w in self.words]
        else:
            d["return_words"] = {str(i + 1): show(w) for i, (w, _u) in enumerate(self.pairs)}
        return d


def occurrences(s: str, markers) -> list:
    """Sorted start positions of occurrences of any of ``markers`` (same length)."""
    out = []
    for u in set(markers):
        i = s.find(u)
        while i >= 0:
            out.append(i)
            i = s.find(u, i + 1)
    out.sort()
    return out


def _scan_pairs(x: str, markers, upto: int) -> tuple:
    """Return pairs whose wu lies inside x[:upto], in first-occurrence order."""
    pos = occurrences(x[:upto], markers)
    ell = len(markers[0])
    seen = {}
    for p, q in zip(pos, pos[1:]):
        key = (x[p:q], x[q:q + ell])
        if key not in seen:
            seen[key] = p
    return pos, list(seen)


def _lr_const(sub: Substitution) -> int:
    try:
        return math.ceil(empirical_lr_constant(sub))
    except CapExceeded:
        return 8


def _structure(orc: WindowOracle, markers_enc: tuple, marker, is_set: bool,
               max_scan: int = MAX_SCAN) -> ReturnStructure:
    ell = len(markers_enc[0])
    if any(len(m) != ell for m in markers_enc) or ell == 0:
        raise SubstitutionError("markers must be non-empty words of the same length")
    k = _lr_const(orc.sub)
    n = max(64 * ell, (k + 1) ** 2 * ell * 4, 256)
    while True:
        x = orc.prefix_enc(n)
        pos, full = _scan_pairs(x, markers_enc, n)
        if len(pos) >= 2:
            _pos, early = _scan_pairs(x, markers_enc, (3 * n) // 4)
            if early == full:
                st = ReturnStructure(orc.sub.alphabet, marker, is_set, full, pos[0], n)
                st.__dict__["_window"] = x
                st.__dict__["_oracle"] = orc
                return st
        if n >= max_scan:
            raise CapExceeded("return structure did not stabilise within the scan cap", cap=max_scan)
        n *= 2


def return_words(orc: WindowOracle, u) -> ReturnStructure:
    """Return words to ``u`` in the one-sided point of ``orc``."""
    if isinstance(orc, Substitution):
        orc = oracle(orc)
    u = as_word(u, orc.sub.alphabet)
    enc = orc.sub.alphabet.encode(u)
    if enc not in orc.prefix_enc(max(4096, 64 * len(enc))):
        from .core import in_language
        if not in_language(orc.sub, u):
            raise SubstitutionError(f"{show(u)} is not in the language")
    return _structure(orc, (enc,), u, False)


def return_pairs(orc: WindowOracle, U) -> ReturnStructure:
    """Return pairs to a set ``U`` of words of equal length."""
    if isinstance(orc, Substitution):
        orc = oracle(orc)
    alph = orc.sub.alphabet
    words = []
    for u in U:
        w = as_word(u, alph)
        if w not in words:
            words.append(w)
    if not words:
        raise SubstitutionError("empty marker set")
    encs = tuple(alph.encode(w) for w in words)
    return _structure(orc, encs, tuple(words), True)


def derived_window_enc(st: ReturnStructure, n: int) -> list:
    """First n letters of the derived sequence as a list of return letters."""
    orc = st.__dict__["_oracle"]
    ell = st.marker_length
    length = max(st.scanned, 64)
    while True:
        x = orc.prefix_enc(length)
        pos = occurrences(x, st.marker_enc)
        if len(pos) > n:
            return [st.letter_of(x[p:q], x[q:q + ell]) for p, q in zip(pos[:n], pos[1:n + 1])]
        if length >= MAX_SCAN:
            raise CapExceeded("derived window too long", cap=MAX_SCAN)
        length *= 2


def derived_window(orc: WindowOracle, marker, n: int) -> tuple:
    """Prefix of length n of the derived sequence (a ``set`` marker means pairs)."""
    if isinstance(marker, (set, frozenset)):
        st = return_pairs(orc, marker)
    else:
        st = return_words(orc, marker)
    return tuple(derived_window_enc(st, n))


def lambda_word(orc: WindowOracle, u, u_prime) -> Morphism:
    """The morphism with Theta_u o lambda = Theta_u' for u a prefix of u'."""
    alph = orc.sub.alphabet
    u = as_word(u, alph)
    u_prime = as_word(u_prime, alph)
    if u_prime[:len(u)] != u:
        raise SubstitutionError(f"{show(u)} is not a prefix of {show(u_prime)}")
    small = return_words(orc, u)
    big = return_words(orc, u_prime)
    return _lambda(small, big)


def _lambda(small: ReturnStructure, big: ReturnStructure) -> Morphism:
    ell = small.marker_length
    imgs = {}
    for i, (w, v) in enumerate(big.pairs_enc):
        imgs[str(i + 1)] = tuple(small.decode_enc(w + v[:ell]))
    if big.alphabet == small.alphabet:
        return Substitution(big.alphabet, imgs)
    return Morphism(big.alphabet, small.alphabet, imgs)


def lambda_set(orc: WindowOracle, U, V) -> Morphism:
    """Morphism between pair alphabets with d_U1 o lambda = d_V1."""
    small = return_pairs(orc, U)
    big = return_pairs(orc, V)
    if big.marker_length <= small.marker_length:
        raise SubstitutionError("words of V must be longer than words of U")
    ue = set(small.marker_enc)
    for v in big.marker_enc:
        if v[:small.marker_length] not in ue:
            raise SubstitutionError(f"{show(big.base.decode(v))} has no prefix in U")
    return _lambda(small, big)


# ------------------------------------------------------------ return substitutions

@dataclass
class ReturnSubstitution:
    structure: ReturnStructure
    sub: Substitution
    power: int = 1              # exponent k used in the set construction
    base_power: int = 1         # the point is fixed by sub**base_power

    @property
    def theta(self) -> Morphism:
        return self.structure.theta

    def key(self) -> tuple:
        """Canonical identity used to compare return substitutions."""
        return tuple(self.sub.images[a] for a in self.sub.alphabet)

    def to_dict(self) -> dict:
        d = self.structure.to_dict()
        d["substitution"] = self.sub.rules()
        d["power"] = self.power
        return d


def _fixed_oracle(s: Substitution, u) -> WindowOracle:
    alph = s.alphabet
    u = as_word(u, alph)
    return WindowOracle(s, u[0])


def return_substitution_word(s: Substitution, u, orc: WindowOracle | None = None,
                             cap: int = 10000) -> ReturnSubstitution:
    """Return substitution to a non-empty prefix ``u`` of a fixed point.

    Closure algorithm: start from the first return word, decode the image of
    every known return word, number new ones as they appear.
    """
    alph = s.alphabet
    u = as_word(u, alph)
    if not u:
        raise SubstitutionError("marker must be non-empty")
    if orc is None:
        orc = _fixed_oracle(s, u)
    p = orc.power
    sp = s.power(p)
    ue = alph.encode(u)
    x = orc.prefix_enc(max(4 * len(ue), 64))
    if not x.startswith(ue):
        raise SubstitutionError(f"{show(u)} is not a prefix of the fixed point")
    # first return word: shortest w with wu a prefix of the point
    n = 2 * len(ue) + 64
    while True:
        x = orc.prefix_enc(n)
        j = x.find(ue, 1)
        if j > 0:
            break
        if n > MAX_SCAN:
            raise CapExceeded("no second occurrence of the prefix", cap=MAX_SCAN)
        n *= 2
    words = [x[:j]]
    index = {x[:j]: "1"}
    images = []
    i = 0
    while i < len(words):
        img = sp.apply_enc(words[i]) + ue
        pos = occurrences(img, (ue,))
        seq = []
        for a, b in zip(pos, pos[1:]):
            w = img[a:b]
            if w not in index:
                words.append(w)
                index[w] = str(len(words))
                if len(words) > cap:
                    raise CapExceeded("return-word closure exceeded cap", cap=cap)
            seq.append(index[w])
        images.append(tuple(seq))
        i += 1
    st = ReturnStructure(alph, u, False, [(w, ue) for w in words], 0, len(x))
    st.__dict__["_window"] = orc.prefix_enc(max(len(x), 4096))
    st.__dict__["_oracle"] = orc
    rs = Substitution(st.alphabet, {str(k + 1): img for k, img in enumerate(images)})
    out = ReturnSubstitution(st, rs, 1, p)
    theta = st.theta
    for a in rs.alphabet:
        if theta(rs.images[a]) != sp(theta.images[a]):
            raise AssertionError("return substitution fails the conjugation identity")
    return out


def _cut(s: str, markers: tuple, ell: int):
    """Split s = p m t with m the first marker occurrence (m fully inside s)."""
    pos = occurrences(s, markers)
    if not pos:
        return None
    i = pos[0]
    return s[:i], s[i:i + ell], s[i + ell:]


def set_power(s: Substitution, st: ReturnStructure, k_max: int = 64) -> int:
    """Smallest k satisfying the two occurrence conditions of the set construction."""
    markers = st.marker_enc
    retw = list(dict.fromkeys(w for w, _ in st.pairs_enc))
    wus = [w + u for w, u in st.pairs_enc]
    for k in range(1, k_max + 1):
        sk = s.power(k)
        if not all(occurrences(sk.apply_enc(u), markers) for u in markers):
            continue
        if all(all(wu in sk.apply_enc(w2) for wu in wus) for w2 in retw):
            return k
    raise CapExceeded("no power satisfies the occurrence conditions", cap=k_max)


def return_substitution_set(s: Substitution, U, orc: WindowOracle | None = None,
                            k: int | None = None) -> ReturnSubstitution:
    """Primitive substitution on return pairs generating the derived subshift."""
    if orc is None:
        orc = oracle(s)
    if orc.power != 1:
        s = s.power(orc.power)
    st = return_pairs(orc, U)
    if k is None:
        k = set_power(s, st)
    sk = s.power(k)
    markers = st.marker_enc
    ell = st.marker_length
    cuts = {}
    for w in {w for w, _ in st.pairs_enc} | set(markers):
        c = _cut(sk.apply_enc(w), markers, ell)
        if c is None:
            raise SubstitutionError("power too small: an image contains no marker")
        cuts[w] = c
    imgs = {}
    for i, (w, u) in enumerate(st.pairs_enc):
        _pw, mw, sw = cuts[w]
        pu, mu, _su = cuts[u]
        imgs[str(i + 1)] = tuple(st.decode_enc(mw + sw + pu + mu))
    sub = Substitution(st.alphabet, imgs)
    return ReturnSubstitution(st, sub, k, orc.power)


def return_substitution(s: Substitution, marker, orc=None) -> ReturnSubstitution:
    """Dispatch on a prefix word or a ``set`` of words."""
    if isinstance(marker, (set, frozenset)):
        return return_substitution_set(s, marker, orc)
    return return_substitution_word(s, marker, orc)
