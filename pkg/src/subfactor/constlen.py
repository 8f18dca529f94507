"""Constant-length substitutions: length alignment, the Phi renormalization of
factor maps, letter merging, and the search for all factor maps of small radius.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .core import AmbiguityError, Alphabet, CapExceeded, Morphism, Substitution, SubstitutionError, as_word
from .decide import (_candidate_codes, code_image_check, common_integer_power, exists_factor,
                     inconclusive, is_periodic, no, sbc_factor_check, yes)
from .recognition import ShortWindow, power_bars, recognizability_L
from .renormalize import (LocalFunction, NeedMore, SlidingBlockCode, _dependency_interval,
                          code_from_dict,
                          find_shift, minimize, normalize_code, tabulate)


def _require_constant(*subs):
    for s in subs:
        if not s.flags.constant_length:
            raise SubstitutionError("substitution is not of constant length")


def align_lengths(sigma: Substitution, tau: Substitution, cap: int = 64):
    """Smallest (k, l) with |sigma|^k = |tau|^l, or None."""
    _require_constant(sigma, tau)
    p, q = sigma.max_length, tau.max_length
    kl = common_integer_power(p, q)
    if kl is None or max(kl) > cap:
        return None
    return kl


def tight_code(lf: LocalFunction, target: Alphabet) -> SlidingBlockCode:
    """Code on the shortest window that contains position 0 and the dependency interval."""
    lo, hi = _dependency_interval(lf)
    lo, hi = min(lo, 0), max(hi, 0)
    R = lf.radius
    rule = {w[R + lo:R + hi + 1]: v for w, v in lf.table.items()}
    return SlidingBlockCode(lf.alphabet, target, -lo, hi, rule)


def phi_step(f: SlidingBlockCode, sigma: Substitution, tau: Substitution,
             L: int | None = None) -> tuple:
    """(N, Phi(f)) with tau o Phi(f) = S^N o f o sigma and 0 <= N < |tau|."""
    _require_constant(sigma, tau)
    q = tau.max_length
    if sigma.max_length != q:
        raise SubstitutionError("lengths differ; align them first")
    if L is None:
        L = recognizability_L(tau)

    def fn(w, R):
        left = sigma.apply_enc(w[:R])
        img = left + sigma.apply_enc(w[R:])
        if len(img) < f.width:
            raise NeedMore
        z = f.apply_enc(img)
        zo = len(left) - f.memory
        try:
            pb = power_bars(tau, z, 1, L)
        except ShortWindow:
            raise NeedMore from None
        lo, hi = pb.certified
        if not (lo <= zo and zo + q <= hi):
            raise NeedMore
        for p, c in zip(pb.positions, pb.letters_enc):
            if p >= zo:
                return p - zo, c
        raise NeedMore

    both = tabulate(sigma, fn, r_start=1)
    offsets = {n for n, _c in both.values()}
    if len(offsets) != 1:
        raise SubstitutionError(f"not a factor map: return offset takes values {sorted(offsets)}")
    N = offsets.pop()
    F = minimize(both.map(lambda v: v[1]))
    return N, tight_code(F, tau.alphabet)


def code_key(code: SlidingBlockCode, sub: Substitution) -> str:
    """Fingerprint of the map itself (independent of the presentation)."""
    return minimize(code.centred(sub)).fingerprint()


@dataclass
class PhiTrace:
    steps: list                 # [(N_i, fingerprint of Phi^i(f))]
    cycle: tuple | None         # (p, q) with Phi^p(f) = Phi^q(f)
    shift: int | None           # m with Phi^(q-p)(f) = S^m o f
    final: SlidingBlockCode | None
    maps: list = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        return {"steps": [{"N": n, "fingerprint": fp} for n, fp in self.steps],
                "cycle": list(self.cycle) if self.cycle else None, "shift": self.shift,
                "final": self.final.to_dict() if self.final else None}


def iterate_phi(f: SlidingBlockCode, sigma: Substitution, tau: Substitution, cap: int = 16,
                L: int | None = None) -> PhiTrace:
    """Iterate Phi until a repetition; return the cycle member of smallest radius."""
    if L is None:
        L = recognizability_L(tau)
    maps = [f]
    keys = [code_key(f, sigma)]
    steps = []
    cycle = None
    g = f
    for i in range(cap):
        N, g = phi_step(g, sigma, tau, L)
        steps.append((N, keys[-1]))
        k = code_key(g, sigma)
        maps.append(g)
        if k in keys:
            cycle = (keys.index(k), i + 1)
            keys.append(k)
            break
        keys.append(k)
    if cycle is None:
        return PhiTrace(steps, None, None, None, maps)
    p, q = cycle
    per = q - p
    m = None
    if per < len(maps):
        target = maps[per]
        m = find_shift(target, minimize(f.centred(sigma)), sigma, span=f.radius + target.radius + 8)
    members = maps[p:q]
    final = min(members, key=lambda c: (c.radius, c.memory + c.anticipation))
    return PhiTrace(steps, cycle, m, final, maps)


# ---------------------------------------------------------------- injectivation

@dataclass
class Injectivation:
    tau: Substitution
    merges: list                # [(kept, removed)] in order
    phi: Morphism               # letter map from the input alphabet

    def to_dict(self) -> dict:
        return {"tau": self.tau.rules(), "merges": [list(m) for m in self.merges],
                "phi": self.phi.rules()}


def injectivation(sigma: Substitution) -> Injectivation:
    """Merge letters with equal images until the substitution is injective on letters."""
    cur = sigma
    total = {a: a for a in sigma.alphabet}
    merges = []
    while True:
        seen, pair = {}, None
        for a in cur.alphabet:
            img = cur.images[a]
            if img in seen:
                pair = (seen[img], a)
                break
            seen[img] = a
        if pair is None:
            break
        keep, drop = pair
        letters = [a for a in cur.alphabet if a != drop]
        step = {a: (keep if a == drop else a) for a in cur.alphabet}
        new = Substitution(Alphabet(letters),
                           {a: tuple(step[c] for c in cur.images[a]) for a in letters})
        for a in cur.alphabet:
            if tuple(step[c] for c in cur.images[a]) != new.images[step[a]]:
                raise AssertionError("merge does not commute with the substitution")
        total = {a: step[b] for a, b in total.items()}
        merges.append(pair)
        cur = new
    phi = Morphism(sigma.alphabet, cur.alphabet, {a: (b,) for a, b in total.items()})
    return Injectivation(cur, merges, phi)


# ---------------------------------------------------------------- factor search

def constant_length_factor_search(sigma: Substitution, tau: Substitution,
                                  candidate_cap: int = 5000, verify_n: int = 12):
    """All factor maps of radius L+1 found, up to composition with shifts.

    Returns (Decision, list of SlidingBlockCode).
    """
    _require_constant(sigma, tau)
    ps, pt = is_periodic(sigma), is_periodic(tau)
    if pt.verdict == "yes":
        q = len(as_word(pt.witness["period"], tau.alphabet))
        if ps.verdict == "yes":
            d = exists_factor(sigma, tau)
            return d, []
        p = sigma.max_length
        rad_q = set(_radicals(q))
        if rad_q <= set(_radicals(p)):
            d = exists_factor(sigma, tau)
            d.reason = "period-divisibility" if d.verdict == "yes" else d.reason
            d.witness["divides_power_of_length"] = [q, p]
            codes = [code_from_dict(d.witness["code"], sigma.alphabet, tau.alphabet)] \
                if "code" in d.witness else []
            return d, codes
        d = exists_factor(sigma, tau)
        return d, []
    if ps.verdict == "yes":
        return no("periodic-onto-aperiodic"), []
    kl = align_lengths(sigma, tau)
    if kl is None:
        return no("length-alignment", {}, lengths=[sigma.max_length, tau.max_length]), []
    taul = tau.power(kl[1])
    L = 0 if taul.flags.injective_on_letters else recognizability_L(taul)
    r = L + 1
    sk, tl = sigma.power(kl[0]), taul
    L_phi = recognizability_L(tl)
    found, seen, tried, open_, rejected = [], set(), 0, 0, 0
    for code in _candidate_codes(sigma, tau, r):
        tried += 1
        if tried > candidate_cap:
            return inconclusive("candidate-cap", {"candidate_cap": candidate_cap},
                                found=len(found)), found
        # A factor map stays one under Phi and under shifts, so the canonical
        # representative decides the whole class.  Phi failing proves the candidate
        # is not a factor map (the return offset of a factor map is constant).
        try:
            tr = iterate_phi(code, sk, tl, L=L_phi)
        except CapExceeded:
            open_ += 1
            continue
        except (SubstitutionError, AmbiguityError):
            rejected += 1
            continue
        g = tr.final or code
        _e, h = normalize_code(minimize(g.centred(sigma)), tau.alphabet, sigma)
        key = code_key(h, sigma)
        if key in seen:
            continue
        seen.add(key)
        d = sbc_factor_check(h, sigma, tau)
        if d.verdict == "inconclusive":
            open_ += 1
        if d.verdict != "yes":
            continue
        if code_image_check(h, sigma, tau, verify_n) is not None:
            raise AssertionError("factor map failed the language re-verification")
        found.append(h)
    caps = {"radius": r, "candidate_cap": candidate_cap}
    if found:
        return yes("enumeration", caps, classes=len(found), tried=tried, open=open_,
                   rejected=rejected,
                   codes=[c.to_dict() for c in found]), found
    if open_:
        return inconclusive("candidate-checks-open", caps, tried=tried, open=open_), found
    return no("enumeration-exhausted", caps, tried=tried,
              note="no code of radius L+1 is a factor map"), found


def _radicals(n: int) -> list:
    from sympy import factorint
    return list(factorint(n))
