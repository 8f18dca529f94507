"""Block representations and substitutions on blocks of radius n.

A block letter ``(uv)`` has ``u`` of length n on the left and ``v`` of
length n + 1 on the right; it projects to ``v[0]``.
"""
from __future__ import annotations

from dataclasses import dataclass

from .core import (Alphabet, Morphism, Substitution, SubstitutionError, as_word,
                   sorted_language)


def block_token(window) -> str:
    window = tuple(window)
    if all(len(a) == 1 for a in window):
        return "(" + "".join(window) + ")"
    return "(" + ",".join(window) + ")"


def parse_block_token(token: str) -> tuple:
    body = token[1:-1] if token.startswith("(") and token.endswith(")") else token
    return tuple(body.split(",")) if "," in body else tuple(body)


@dataclass
class BlockAlphabet:
    """Blocks of length 2n+1 of a language, with the projection to centres."""

    base: Alphabet
    radius: int
    blocks_enc: list
    alphabet: Alphabet = None

    def __post_init__(self):
        self.alphabet = Alphabet(block_token(self.base.decode(b)) for b in self.blocks_enc)
        self._by_block = {b: tok for b, tok in zip(self.blocks_enc, self.alphabet.letters)}
        self._by_token = {tok: b for b, tok in zip(self.blocks_enc, self.alphabet.letters)}

    def token(self, block_enc: str) -> str:
        try:
            return self._by_block[block_enc]
        except KeyError:
            raise SubstitutionError(
                f"block {self.base.decode(block_enc)} is not in the language") from None

    def block(self, token: str) -> str:
        return self._by_token[token]

    @property
    def projection(self) -> Morphism:
        """Coding sending a block to its centre letter."""
        n = self.radius
        return Morphism(self.alphabet, self.base,
                        {tok: (self.base.letter(b[n]),) for b, tok in self._by_block.items()})

    def encode_enc(self, s: str) -> str:
        """Sliding-window encoding of an encoded base word into encoded blocks."""
        n = self.radius
        if len(s) < 2 * n + 1:
            raise SubstitutionError("word too short for the block radius")
        code = self.alphabet.code
        return "".join(code(self.token(s[i:i + 2 * n + 1])) for i in range(len(s) - 2 * n))


def block_alphabet(s: Substitution, n: int) -> BlockAlphabet:
    return BlockAlphabet(s.alphabet, n, sorted_language(s, 2 * n + 1))


def block_substitution(s: Substitution, n: int) -> Substitution:
    """Substitution on blocks of radius n; the result carries ``block_alphabet``."""
    if n < 0:
        raise SubstitutionError("radius must be non-negative")
    ba = block_alphabet(s, n)
    images = {}
    for b, tok in zip(ba.blocks_enc, ba.alphabet.letters):
        u, v = b[:n], b[n:]
        su = s.apply_enc(u)
        img = su + s.apply_enc(v)
        start = len(su)
        p = len(s.image_enc(v[0]))
        images[tok] = tuple(ba.token(img[start - n + j:start + n + 1 + j]) for j in range(p))
    out = Substitution(ba.alphabet, images)
    out.block_alphabet = ba
    out.block_base = s
    return out


def block_encode(word, n: int, alphabet: BlockAlphabet | None = None) -> tuple:
    """Sliding window of length 2n+1 over ``word``; tokens name the windows."""
    word = as_word(word, alphabet.base if alphabet else None)
    if len(word) < 2 * n + 1:
        raise SubstitutionError("word too short for the block radius")
    out = []
    for i in range(len(word) - 2 * n):
        w = word[i:i + 2 * n + 1]
        if alphabet is not None:
            out.append(alphabet.token(alphabet.base.encode(w)))
        else:
            out.append(block_token(w))
    return tuple(out)


def block_decode(word, alphabet: BlockAlphabet | None = None) -> tuple:
    """Project each block letter to its centre."""
    out = []
    for tok in word:
        blk = alphabet.base.decode(alphabet.block(tok)) if alphabet else parse_block_token(tok)
        out.append(blk[len(blk) // 2])
    return tuple(out)
