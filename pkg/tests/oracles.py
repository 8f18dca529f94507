"""Brute-force reference computations on plain strings.

Nothing here imports the package: these are the independent oracles the
tests compare against.  Letters are single characters.
"""
from fractions import Fraction
from itertools import product


def apply(rules, w):
    return "".join(rules[c] for c in w)


def fixed_prefix(rules, seed, n):
    w = seed
    while len(w) < n:
        nxt = apply(rules, w)
        if not nxt.startswith(w) or nxt == w:
            # seed is only fixed by a power; iterate the power instead
            nxt = apply(rules, nxt)
        w = nxt
    return w[:n]


def factors(word, n):
    return {word[i:i + n] for i in range(len(word) - n + 1)}


def brute_language(rules, n, length=20000):
    """Length-n factors of the iterated images of every letter."""
    out = set()
    for a in rules:
        w = a
        for _ in range(64):
            if len(w) >= length:
                break
            w = apply(rules, w)
        out |= factors(w, n)
    return out


def return_words(x, u):
    """Return words to u in order of first occurrence of wu in x."""
    occ = [i for i in range(len(x) - len(u) + 1) if x.startswith(u, i)]
    seen = []
    for i, j in zip(occ, occ[1:]):
        w = x[i:j]
        if w not in seen:
            seen.append(w)
    return seen


def count_factorizations(x, words):
    """Number of ways to write x as a concatenation of the given words."""
    ways = [1] + [0] * len(x)
    for i in range(len(x)):
        if ways[i]:
            for w in words:
                if x.startswith(w, i):
                    ways[i + len(w)] += ways[i]
    return ways[len(x)]


def golden_power_is_integer(k):
    """g^k = F_k g + F_{k-1}; it is an integer iff F_k = 0."""
    a, b = 0, 1          # F_0, F_1
    for _ in range(k):
        a, b = b, a + b
    return a == 0


def prime_exponents(n):
    out, p = {}, 2
    while p * p <= n:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def common_power(p, q, cap=64):
    for k, l in product(range(1, cap + 1), repeat=2):
        if p ** k == q ** l:
            return k, l
    return None


def lr_ratio(x, n_cap):
    """max over factors u of length <= n_cap of (largest return gap) / |u|."""
    best = Fraction(0)
    for m in range(1, n_cap + 1):
        last, gap = {}, {}
        for i in range(len(x) - m + 1):
            w = x[i:i + m]
            if w in last:
                gap[w] = max(gap.get(w, 0), i - last[w])
            last[w] = i
        best = max(best, Fraction(max(gap.values()), m))
    return best


def brute_alignments(rules, window, n_pre):
    """All (preimage word, offset) whose image covers the window from offset."""
    out = []
    for y in brute_language(rules, n_pre):
        img = apply(rules, y)
        for off in range(len(rules[y[0]])):
            if img[off:off + len(window)] == window:
                out.append((y, off))
    return out


def bars_of(rules, y, off, length):
    """Cutting bars of an alignment in window coordinates, with preimage letters."""
    pos, acc = [], -off
    for c in y:
        if 0 <= acc < length:
            pos.append((acc, c))
        acc += len(rules[c])
    return pos
