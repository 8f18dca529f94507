"""Decision procedures: eigenvalue gate, periodicity, factor maps, isomorphism,
properization.

Every procedure answers yes, no or inconclusive.  A yes or a no always
carries evidence that can be checked again; an inconclusive answer names
the cap that was reached.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import sympy

from .blocks import block_substitution
from .core import (Alphabet, CapExceeded, Morphism, Substitution, SubstitutionError,
                   WindowOracle, as_word, classify, complexity,
                   in_language_enc, language_enc, lr_constant_int, oracle, show, spectral_data)
from .recognition import mark_table
from .renormalize import SlidingBlockCode
from .returns import (lambda_word, return_substitution_set, return_substitution_word,
                      return_pairs, return_words, set_power)

EXIT = {"yes": 0, "no": 1, "inconclusive": 2}


@dataclass
class Decision:
    verdict: str                # "yes", "no" or "inconclusive"
    reason: str
    witness: dict = field(default_factory=dict)
    caps_used: dict = field(default_factory=dict)

    @property
    def exit_code(self) -> int:
        return EXIT[self.verdict]

    def __bool__(self):
        return self.verdict == "yes"

    def to_dict(self) -> dict:
        return {"verdict": self.verdict, "reason": self.reason,
                "witness": self.witness, "caps_used": self.caps_used}


def yes(reason, caps=None, **wit):
    return Decision("yes", reason, wit, caps or {})


def no(reason, caps=None, **wit):
    return Decision("no", reason, wit, caps or {})


def inconclusive(reason, caps=None, **wit):
    return Decision("inconclusive", reason, wit, caps or {})


# ---------------------------------------------------------------- eigenvalue gate

def _prime_exponents(n: int) -> dict:
    return dict(sympy.factorint(n))


def common_integer_power(p: int, q: int):
    """Smallest (k, l) with p**k == q**l, or None (p, q >= 2)."""
    ep, eq = _prime_exponents(p), _prime_exponents(q)
    if set(ep) != set(eq):
        return None
    ratios = {Fraction(eq[r], ep[r]) for r in ep}
    if len(ratios) != 1:
        return None
    r = ratios.pop()
    return r.numerator, r.denominator


def _rho_value(sd, dps=80):
    return mpmath.mpf(str(sympy.N(sd.rho, dps)))


def eigenvalue_gate(sigma: Substitution, tau: Substitution, cap_kl: int = 12) -> Decision:
    """Do the dominant eigenvalues share a common power rho_s^k = rho_t^l?"""
    caps = {"cap_kl": cap_kl}
    a, b = spectral_data(sigma), spectral_data(tau)
    da, db = a.degree, b.degree
    if da == 1 and db == 1:
        p, q = int(a.rho), int(b.rho)
        if p < 2 or q < 2:
            return inconclusive("non-growing dominant eigenvalue", caps)
        kl = common_integer_power(p, q)
        if kl is None:
            return no("eigenvalue-gate", caps, rho=[p, q],
                      note="prime exponent vectors are not proportional")
        return yes("eigenvalue-gate", caps, k=kl[0], l=kl[1], rho=[p, q])
    if (da == 1) != (db == 1):
        return no("eigenvalue-gate", caps, degrees=[da, db],
                  note="a Perron number of degree at least 2 has no rational power")
    with mpmath.workdps(80):
        la, lb = mpmath.log(_rho_value(a)), mpmath.log(_rho_value(b))
        cands = []
        for k in range(1, cap_kl + 1):
            for l in range(1, cap_kl + 1):
                if abs(k * la - l * lb) < mpmath.mpf(10) ** -50:
                    cands.append((k, l))
    x = sympy.Symbol("x")
    for k, l in sorted(cands, key=lambda t: (t[0] + t[1], t)):
        ma = sympy.minimal_polynomial(a.rho ** k, x)
        mb = sympy.minimal_polynomial(b.rho ** l, x)
        if sympy.expand(ma - mb) == 0:
            # both powers are Perron numbers, hence the largest real root of the
            # same irreducible polynomial
            return yes("eigenvalue-gate", caps, k=k, l=l, min_poly=str(ma.as_expr()))
    return inconclusive("eigenvalue-gate", caps, degrees=[da, db],
                        note=f"no common power with exponents up to {cap_kl}")


# ---------------------------------------------------------------- periodicity

def _period_of(x: str) -> int:
    for q in range(1, len(x)):
        if all(x[i] == x[i + q] for i in range(len(x) - q)):
            return q
    return len(x)


def is_periodic(sigma: Substitution, cap: int = 64) -> Decision:
    """Periodic(u), Aperiodic, or Inconclusive for a primitive substitution.

    Periodic is certified by p(n) <= n and a periodic window; aperiodic by a
    dominant eigenvalue of degree >= 2 or by a valid recognizability table
    (a periodic subshift admits none: its points would have more
    desubstitutions than there are points in the orbit).
    """
    caps = {"cap": cap}
    if not sigma.flags.primitive:
        raise SubstitutionError("is_periodic needs a primitive substitution")
    alph = sigma.alphabet
    for n in range(1, cap + 1):
        pn = complexity(sigma, n)
        if pn <= n:
            x = oracle(sigma).prefix_enc(max(4096, 8 * pn))
            q = _period_of(x[:4 * pn + 8])
            if q > pn or _period_of(x) != q:
                raise AssertionError("periodic complexity without a periodic window")
            return Decision("yes", "periodic", {"period": show(alph.decode(x[:q])), "n": n,
                                                "complexity": pn}, caps)
        if n == 1 and spectral_data(sigma).degree >= 2:
            return Decision("no", "aperiodic", {"certificate": "irrational dominant eigenvalue"},
                            caps)
        if mark_table(sigma, n - 1).valid:
            return Decision("no", "aperiodic", {"certificate": "recognizability",
                                                "L": n - 1}, caps)
    return inconclusive("periodicity", caps)


def period_word(sigma: Substitution):
    d = is_periodic(sigma)
    return d.witness["period"] if d.verdict == "yes" else None


# ---------------------------------------------------------------- coding check

def _coding_table(f: dict, sigma: Substitution, tau: Substitution) -> dict:
    src, tgt = sigma.alphabet, tau.alphabet
    if set(f) != set(src.letters):
        raise SubstitutionError(f"coding must be defined exactly on {list(src.letters)}")
    bad = [b for b in f.values() if b not in tgt]
    if bad:
        raise SubstitutionError(f"coding values {bad} are not letters of the target")
    return str.maketrans({src.code(a): tgt.code(b) for a, b in f.items()})


def _check_lengths(n_max: int, dense: int = 12) -> list:
    """Lengths at which image languages are compared.

    Every factor of length n < N extends to a word of L_N on both sides, and
    letter maps and block codes commute with taking factors, so equality at N
    implies it below N.  The short lengths are still swept so that a No
    carries the shortest counterexample.
    """
    out = list(range(1, min(n_max, dense) + 1))
    if n_max > dense:
        out.append(n_max)
    return out


def language_image_check(table, sigma: Substitution, tau: Substitution, n_max: int):
    """None when f(L_n(sigma)) = L_n(tau) for all n <= n_max, else a No decision."""
    dec = tau.alphabet.decode
    imgs = {n: {w.translate(table) for w in language_enc(sigma, n)} for n in _check_lengths(n_max)}
    for n, img in imgs.items():
        extra = sorted(img - language_enc(tau, n))
        if extra:
            return no("image-not-in-language", {"n_lang": n_max}, n=n, word=show(dec(extra[0])))
    for n, img in imgs.items():
        missing = sorted(language_enc(tau, n) - img)
        if missing:
            return no("not-surjective", {"n_lang": n_max}, n=n, word=show(dec(missing[0])))
    return None


def code_image_check(code: SlidingBlockCode, sigma: Substitution, tau: Substitution, n_max: int):
    """None when code(L(sigma)) = L_n(tau) for all n <= n_max, else a No decision."""
    dec = tau.alphabet.decode
    extra_w = code.width - 1
    imgs = {n: {code.apply_enc(w) for w in language_enc(sigma, n + extra_w)}
            for n in _check_lengths(n_max)}
    for n, img in imgs.items():
        extra = sorted(img - language_enc(tau, n))
        if extra:
            return no("image-not-in-language", {"n_lang": n_max}, n=n, word=show(dec(extra[0])))
    for n, img in imgs.items():
        missing = sorted(language_enc(tau, n) - img)
        if missing:
            return no("not-surjective", {"n_lang": n_max}, n=n, word=show(dec(missing[0])))
    return None


def coding_factor_check(f: dict, sigma: Substitution, tau: Substitution, u_cap: int = 6,
                        v_span: int = 16, prefix_cap: int = 4096, n_lang: int = 12) -> Decision:
    """Is the letter map f a factor map from X_sigma onto X_tau?"""
    table = _coding_table(f, sigma, tau)
    caps = {"u_cap": u_cap, "v_span": v_span, "prefix_cap": prefix_cap, "n_lang": n_lang}
    bad = language_image_check(table, sigma, tau, n_lang)
    if bad is not None:
        bad.caps_used = caps
        return bad
    K = max(lr_constant_int(sigma), lr_constant_int(tau))
    oy, ox = oracle(tau), oracle(sigma)
    y = oy.prefix_enc(prefix_cap)
    talph, salph = tau.alphabet, sigma.alphabet
    tau_cache, sig_cache = {}, {}

    def tau_ret(m):
        if m not in tau_cache:
            tau_cache[m] = return_substitution_word(tau, talph.decode(y[:m]), oy)
        return tau_cache[m]

    pre_cache = {0: [""]}
    letters = [salph.code(a) for a in salph]

    def preimage(m):
        # extend the preimages of y[:m-1] by one letter and keep those in L_m(sigma)
        j = max(i for i in pre_cache if i <= m)
        while j < m:
            j += 1
            ok = [c for c in letters if c.translate(table) == y[j - 1]]
            pre_cache[j] = sorted(w + c for w in pre_cache[j - 1] for c in ok
                                  if in_language_enc(sigma, w + c))
        return pre_cache[m]

    def sig_ret(m, k):
        key = (m, k)
        if key not in sig_cache:
            U = {salph.decode(w) for w in preimage(m)}
            sig_cache[key] = return_substitution_set(sigma, U, ox, k)
        return sig_cache[key]

    def sig_power(m):
        U = {salph.decode(w) for w in preimage(m)}
        st = return_pairs(ox, U)
        s = sigma.power(ox.power) if ox.power != 1 else sigma
        return set_power(s, st)

    for m in range(1, u_cap + 1):
        lo = K * (K + 1) * m
        if lo + v_span > prefix_cap:
            break
        tu = tau_ret(m)
        for M in range(lo, lo + v_span + 1):
            if not preimage(M):
                return no("prefix-not-in-image", caps, prefix=show(talph.decode(y[:M])))
            tv = tau_ret(M)
            if tv.key() != tu.key():
                continue
            k = max(sig_power(m), sig_power(M))
            su, sv = sig_ret(m, k), sig_ret(M, k)
            if su.key() != sv.key():
                continue
            recheck = language_image_check(table, sigma, tau, 2 * M)
            if recheck is not None:
                raise AssertionError("witness found but the language re-verification failed")
            return yes("return-substitutions", caps, u=show(talph.decode(y[:m])),
                       v=show(talph.decode(y[:M])), K=K,
                       tau_return=tu.sub.rules(), sigma_return=su.sub.rules(),
                       set_power=k, language_verified_to=2 * M)
    return inconclusive("search-cap", caps, K=K)


# ---------------------------------------------------------------- sliding block codes

def _periodic_target_check(code: SlidingBlockCode, sigma: Substitution, period: str) -> Decision:
    """f(X_sigma) equals the orbit of period^infinity (exact language test)."""
    tgt = code.target
    v = tgt.encode(as_word(period, tgt))
    q = len(v)
    allowed = {(v * 3)[i:i + q + 1] for i in range(q)}
    for w in language_enc(sigma, q + code.width):
        img = code.apply_enc(w)
        if img not in allowed:
            return no("periodic-target", {}, word=show(tgt.decode(img)), period=period)
    return yes("periodic-target", {}, period=period)


def lift_to_coding(code: SlidingBlockCode, sigma: Substitution):
    """(block substitution of radius r, coding on blocks) for a code of radius r."""
    r = code.radius
    blk = block_substitution(sigma, r)
    ba = blk.block_alphabet
    lf = code.centred(sigma)
    mapping = {tok: code.target.letter(lf.table[b]) for b, tok in zip(ba.blocks_enc, ba.alphabet.letters)}
    return blk, mapping


def sbc_factor_check(code: SlidingBlockCode, sigma: Substitution, tau: Substitution,
                     **caps) -> Decision:
    """Factor check for a sliding block code: lift to blocks, then check the coding."""
    if code.source != sigma.alphabet or code.target != tau.alphabet:
        raise SubstitutionError("code alphabets do not match the substitutions")
    per = is_periodic(tau)
    if per.verdict == "yes":
        return _periodic_target_check(code, sigma, per.witness["period"])
    blk, mapping = lift_to_coding(code, sigma)
    d = coding_factor_check(mapping, blk, tau, **caps)
    d.witness["radius"] = code.radius
    d.witness["block_radius"] = code.radius
    return d


# ---------------------------------------------------------------- factor search

def _candidate_codes(sigma: Substitution, tau: Substitution, r: int, check_len: int = 6):
    """Radius-r codes whose images of L_{2r+1+m} lie in L_{m+1}(tau) for m < check_len.

    Backtracking over the windows of L_{2r+1}(sigma) in sorted order.
    """
    w = 2 * r + 1
    wins = sorted(language_enc(sigma, w))
    idx = {x: i for i, x in enumerate(wins)}
    letters = [tau.alphabet.code(b) for b in tau.alphabet]
    # constraints: a longer word is checkable once all its windows are assigned
    cons = {}
    for m in range(1, check_len):
        for word in language_enc(sigma, w + m):
            ids = [idx[word[i:i + w]] for i in range(m + 1)]
            cons.setdefault(max(ids), []).append((ids, m + 1))
    tlang = {m: language_enc(tau, m) for m in range(1, check_len + 1)}
    assign = [None] * len(wins)

    def ok(i):
        if assign[i] not in tlang[1]:
            return False
        for ids, m in cons.get(i, ()):
            if "".join(assign[j] for j in ids) not in tlang[m]:
                return False
        return True

    def rec(i):
        if i == len(wins):
            yield dict(zip(wins, assign))
            return
        for c in letters:
            assign[i] = c
            if ok(i):
                yield from rec(i + 1)
        assign[i] = None

    for rule in rec(0):
        yield SlidingBlockCode(sigma.alphabet, tau.alphabet, r, r, rule)


def _check_one(args):
    code, sigma, tau, caps = args
    return sbc_factor_check(code, sigma, tau, **caps)


def _first_factor(codes, sigma, tau, jobs, caps):
    """First (code, decision) in order whose check says yes."""
    if jobs > 1 and len(codes) > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(_check_one, [(c, sigma, tau, caps) for c in codes]))
    else:
        results = (sbc_factor_check(c, sigma, tau, **caps) for c in codes)
    for code, d in zip(codes, results):
        if d.verdict == "yes":
            return code, d
    return None


def _with_code(hit, gate, used):
    code, d = hit
    d.witness["code"] = code.to_dict()
    if gate is not None:
        d.witness["gate"] = gate.to_dict()
    d.caps_used.update(used)
    return d


def exists_factor(sigma: Substitution, tau: Substitution, radius_cap: int = 3,
                  candidate_cap: int = 2000, jobs: int = 1, **caps) -> Decision:
    """Search for a factor map X_sigma -> X_tau among codes of radius <= radius_cap."""
    used = {"radius_cap": radius_cap, "candidate_cap": candidate_cap}
    ps, pt = is_periodic(sigma), is_periodic(tau)
    if ps.verdict == "yes" and pt.verdict == "yes":
        p, q = len(as_word(ps.witness["period"], sigma.alphabet)), len(as_word(pt.witness["period"], tau.alphabet))
        if p % q == 0:
            return yes("period-divisibility", used, periods=[p, q])
        return no("period-divisibility", used, periods=[p, q])
    if ps.verdict == "yes" and pt.verdict == "no":
        return no("periodic-onto-aperiodic", used)
    gate = None
    if ps.verdict == "no" and pt.verdict == "no":
        gate = eigenvalue_gate(sigma, tau)
        if gate.verdict == "no":
            return no("eigenvalue-gate", used, **gate.witness)
    tried = 0
    for r in range(radius_cap + 1):
        batch, capped = [], False
        for code in _candidate_codes(sigma, tau, r):
            tried += 1
            if tried > candidate_cap:
                capped = True
                break
            batch.append(code)
            if len(batch) >= max(1, jobs) * 4:
                hit = _first_factor(batch, sigma, tau, jobs, caps)
                if hit:
                    return _with_code(hit, gate, used)
                batch = []
        hit = _first_factor(batch, sigma, tau, jobs, caps) if batch else None
        if hit:
            return _with_code(hit, gate, used)
        if capped:
            return inconclusive("candidate-cap", used, tried=tried - 1)
    return inconclusive("radius-cap", used, tried=tried,
                        gate=gate.to_dict() if gate is not None else None)


def are_isomorphic(sigma: Substitution, tau: Substitution, **caps) -> Decision:
    """Factor maps both ways imply isomorphism (coalescence)."""
    fwd = exists_factor(sigma, tau, **caps)
    if fwd.verdict == "no":
        return no(fwd.reason, fwd.caps_used, forward=fwd.to_dict())
    bwd = exists_factor(tau, sigma, **caps)
    if bwd.verdict == "no":
        return no(bwd.reason, bwd.caps_used, backward=bwd.to_dict())
    if fwd.verdict == "yes" and bwd.verdict == "yes":
        return yes("factor-both-ways", fwd.caps_used, forward=fwd.to_dict(), backward=bwd.to_dict())
    return inconclusive("factor-search", fwd.caps_used, forward=fwd.to_dict(), backward=bwd.to_dict())


# ---------------------------------------------------------------- properization

@dataclass
class Properization:
    u: tuple
    u_prime: tuple
    tau: Substitution           # derived substitution on return letters
    n: int
    theta: Morphism
    letters: list               # D as (r, k) pairs
    psi: Morphism
    sigma: Substitution         # substitution on D
    phi: Morphism               # radius-0 coding D -> original alphabet
    xi: Substitution            # proper primitive
    inverse_radius_bound: int

    def to_dict(self) -> dict:
        return {"u": show(self.u), "u_prime": show(self.u_prime), "tau": self.tau.rules(),
                "n": self.n, "D": [show(t) for t in self.sigma.alphabet.letters],
                "psi": self.psi.rules(), "sigma": self.sigma.rules(), "phi": self.phi.rules(),
                "xi": self.xi.rules(), "xi_flags": self.xi.flags.to_dict(),
                "inverse_radius_bound": self.inverse_radius_bound}


def _dtoken(r: str, k: int) -> str:
    return f"({r},{k})"


def find_equal_derived(s: Substitution, orc: WindowOracle, cap: int = 64) -> tuple:
    """Prefixes u, u' of the point with equal derived sequences and the three
    conditions of the properization construction."""
    alph = s.alphabet
    x = orc.prefix_enc(max(4 * cap, 4096))
    subs = {}

    def ret(m):
        if m not in subs:
            subs[m] = return_substitution_word(s, alph.decode(x[:m]), orc)
        return subs[m]

    for m2 in range(2, cap + 1):
        for m in range(1, m2):
            a, b = ret(m), ret(m2)
            if a.key() != b.key():
                continue
            th = a.structure.theta
            first = alph.encode(th.images["1"]) + x[:m]
            if not x[:m2].startswith(first):
                continue
            ws = [w + uu for w, uu in a.structure.pairs_enc]
            wps = [w + uu for w, uu in b.structure.pairs_enc]
            if all(wu in wp for wu in ws for wp in wps):
                return alph.decode(x[:m]), alph.decode(x[:m2])
    raise CapExceeded("no pair of prefixes with equal derived sequences", cap=cap)


def properize(s: Substitution, seed=None, cap: int = 64) -> Properization:
    """Proper primitive substitution xi and a radius-0 isomorphism phi onto X_s."""
    orc = oracle(s, seed)
    u, u2 = find_equal_derived(s, orc, cap)
    lam = lambda_word(orc, u, u2)
    if not isinstance(lam, Substitution):
        raise AssertionError("derived alphabets differ")
    tau = lam
    st = return_words(orc, u)
    theta = st.theta
    R = list(tau.alphabet.letters)
    big = theta.max_length
    n = next(n for n in range(1, big + 2) if tau.power(n).min_length >= big)
    pairs = [(r, k) for r in R for k in range(len(theta.images[r]))]
    D = Alphabet(_dtoken(r, k) for r, k in pairs)
    psi = Morphism(tau.alphabet, D, {r: tuple(_dtoken(r, k) for k in range(len(theta.images[r])))
                                     for r in R})
    tn = tau.power(n)
    imgs = {}
    for r, k in pairs:
        img = tn.images[r]
        last = len(theta.images[r]) - 1
        part = img[k:k + 1] if k < last else img[last:]
        imgs[_dtoken(r, k)] = psi(part)
    sig = Substitution(D, imgs)
    phi = Morphism(D, s.alphabet, {_dtoken(r, k): (theta.images[r][k],) for r, k in pairs})
    for r in R:
        if phi(psi.images[r]) != theta.images[r]:
            raise AssertionError("phi o psi differs from the return-word coding")
        if sig(psi.images[r]) != psi(tn.images[r]):
            raise AssertionError("sigma o psi differs from psi o tau^n")
    s2 = sig.power(2)
    firsts = {img[0] for img in s2.images.values()}
    if len(firsts) != 1:
        raise AssertionError("the square is not left proper")
    a = firsts.pop()
    sprime = Substitution(D, {d: s2.images[d][1:] + (a,) for d in D})
    xi = Substitution(D, {d: sprime(s2.images[d]) for d in D})
    fl = classify(xi)
    if not (fl.primitive and fl.proper):
        raise AssertionError("properized substitution is not proper and primitive")
    Lc = lr_constant_int(tau)
    return Properization(u, u2, tau, n, theta, pairs, psi, sig, phi, xi, (Lc + 1) * len(u) + 1)


def properization_language_check(p: Properization, s: Substitution, n_max: int = 10,
                                 seed=None) -> bool:
    """Factors of phi(fixed point of xi) equal factors of the input point, n <= n_max."""
    length = 1 << 14
    z = oracle(p.xi).prefix(length)
    img = p.phi(z)
    x = oracle(s, seed).prefix(len(img))
    for n in range(1, n_max + 1):
        fa = {img[i:i + n] for i in range(len(img) // 2)}
        fb = {x[i:i + n] for i in range(len(x) // 2)}
        if fa != fb:
            return False
    return True
