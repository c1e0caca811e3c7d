"""Truncated arithmetic in completed group algebras of compact p-adic groups.

A ring context fixes a prime p, a rank r, and a multiplication mode. In
abelian mode the algebra is the power series ring Z_p[[b_1,..,b_r]] where
b_i = x_i - 1 for topological generators x_i. In rules mode the generators
need not commute and the context carries commutation corrections

    b_j * b_i = b_i * b_j + h_ji   (j > i)

with each correction of filtration valuation at least 3. All computation is
done modulo p^a and modulo words in the b_i of length N, for a working
precision (a, N). Truncation is by the two-sided ideal generated by p^a and
degree-N words, so dropping deep terms during rewriting is exact.

The base field variant (base "fp") works over F_p[[b_1,..,b_r]]; it backs
change-of-rings arguments for modules killed by p.
"""

import itertools
import math
import random
from typing import NamedTuple

from .graded import GradedPoly


class Precision(NamedTuple):
    a: int
    N: int

    def escalate(self, k=1):
        # one escalation step sharpens both the coefficient modulus and the
        # word-length window
        return Precision(self.a + k, self.N + 2 * k)


class Val(NamedTuple):
    """Filtration valuation; value None encodes +infinity at this precision."""

    value: object
    certain: bool

    def at_least(self, bound):
        return self.value is None or self.value >= bound


def _binom(n, k):
    # binomial with arbitrary integer top; exact
    if k < 0:
        return 0
    num = 1
    for t in range(k):
        num *= n - t
    return num // math.factorial(k)


class RingContext:
    """Ambient algebra: prime, rank, multiplication mode, correction table."""

    def __init__(self, p, r, mode="abelian", rules=None, base="zp", label=None):
        if mode not in ("abelian", "rules"):
            raise ValueError("mode must be 'abelian' or 'rules'")
        if base not in ("zp", "fp"):
            raise ValueError("base must be 'zp' or 'fp'")
        if base == "fp" and mode != "abelian":
            raise ValueError("base 'fp' is only supported in abelian mode")
        self.p = p
        self.r = r
        self.mode = mode
        self.base = base
        self.label = label or mode
        table = {}
        for (j, i), poly in (rules or {}).items():
            if not (1 <= i < j <= r):
                raise ValueError("rule index pair out of range: %r" % ((j, i),))
            clean = {}
            for mono, c in poly.items():
                mono = tuple(mono)
                if len(mono) != r or any(e < 0 for e in mono):
                    raise ValueError("bad rule monomial %r" % (mono,))
                if c:
                    clean[mono] = int(c)
            if clean:
                table[(j, i)] = clean
        if mode == "abelian" and table:
            raise ValueError("abelian mode takes no commutation rules")
        self.rules = table
        # normalized-word cache, keyed by working precision
        self._word_cache = {}
        self._inv_gen_cache = {}
        self._opposite = None

    # d = cd_p(G) + 1 is the bound for homological lengths; over F_p the
    # extra p-direction is gone
    @property
    def d(self):
        return self.r + (1 if self.base == "zp" else 0)

    @property
    def gr_nvars(self):
        return self.d

    def key(self):
        rules_key = tuple(
            (ji, tuple(sorted(poly.items()))) for ji, poly in sorted(self.rules.items())
        )
        return (self.p, self.r, self.mode, self.base, rules_key)

    def __eq__(self, other):
        return isinstance(other, RingContext) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def describe(self):
        out = {"p": self.p, "r": self.r, "mode": self.mode, "label": self.label}
        if self.base != "zp":
            out["base"] = self.base
        return out

    # element constructors

    def _amod(self, prec):
        return self.p if self.base == "fp" else self.p ** prec.a

    def elem(self, terms, prec):
        return Element(self, prec, terms)

    def zero(self, prec):
        return Element(self, prec, {})

    def one(self, prec):
        return Element(self, prec, {(0,) * self.r: 1})

    def const(self, c, prec):
        return Element(self, prec, {(0,) * self.r: c})

    def variable(self, i, prec, power=1, coeff=1):
        """coeff * b_i^power; generators are 1-indexed."""
        if not 1 <= i <= self.r:
            raise ValueError("generator index out of range")
        mono = [0] * self.r
        mono[i - 1] = power
        return Element(self, prec, {tuple(mono): coeff})

    def rule_element(self, j, i, prec):
        return Element(self, prec, self.rules.get((j, i), {}))

    def opposite(self):
        """Context with reversed multiplication, on the same generators.

        Abelian contexts are their own opposite. In rules mode the
        correction table negates; that presents the opposite ring verbatim
        when the corrections are written in words whose reading order does
        not matter (central corrections in particular), and construction
        validates associativity to reject tables where it is unsound.
        """
        if self.mode == "abelian":
            return self
        if self._opposite is None:
            neg = {
                ji: {m: -c for m, c in poly.items()} for ji, poly in self.rules.items()
            }
            op = RingContext(
                self.p, self.r, mode="rules", rules=neg, base=self.base,
                label=self.label + "-op",
            )
            op._opposite = self
            report = validate_ring(op)
            if not report.ok:
                raise ValueError(
                    "correction table cannot be transported to the opposite ring"
                )
            self._opposite = op
        return self._opposite

    # word rewriting (rules mode)

    def _normalize_word(self, word, prec):
        """Canonical form of a generator word as {exponent: coefficient}.

        Rewrites the leftmost descent; correction branches consume fuel. A
        branch that has used a+N corrections carries extra valuation at least
        a+N and is exactly zero modulo the truncation ideal, so fuel-out
        branches are dropped with no loss.
        """
        amod = self._amod(prec)
        N = prec.N
        fuel0 = prec.a + N
        cache = self._word_cache.setdefault((prec.a, N), {})
        root = (word, fuel0)
        stack = [root]
        while stack:
            key = stack[-1]
            w, fuel = key
            if key in cache or len(w) >= N or fuel <= 0:
                stack.pop()
                continue
            k = None
            for t in range(len(w) - 1):
                if w[t] > w[t + 1]:
                    k = t
                    break
            if k is None:
                exp = [0] * self.r
                for letter in w:
                    exp[letter - 1] += 1
                cache[key] = {tuple(exp): 1}
                stack.pop()
                continue
            j, i = w[k], w[k + 1]
            swapped = ((w[:k] + (i, j) + w[k + 2 :]), fuel)
            branches = [(swapped, 1)]
            for gamma in sorted(self.rules.get((j, i), {})):
                c = self.rules[(j, i)][gamma] % amod
                if not c:
                    continue
                mid = tuple(
                    itertools.chain.from_iterable(
                        (t + 1,) * e for t, e in enumerate(gamma)
                    )
                )
                branches.append((((w[:k] + mid + w[k + 2 :]), fuel - 1), c))
            missing = [
                b
                for b, _ in branches
                if b not in cache and len(b[0]) < N and b[1] > 0
            ]
            if missing:
                stack.extend(missing)
                continue
            out = {}
            for b, mult in branches:
                sub = cache.get(b, {})
                for exp, sc in sub.items():
                    v = (out.get(exp, 0) + mult * sc) % amod
                    if v:
                        out[exp] = v
                    else:
                        out.pop(exp, None)
            cache[key] = out
            stack.pop()
        return cache.get(root, {})

    def _mono_mul(self, alpha, beta, prec):
        """Product b^alpha * b^beta as {exponent: coefficient}."""
        if self.mode == "abelian":
            gamma = tuple(x + y for x, y in zip(alpha, beta))
            if sum(gamma) >= prec.N:
                return {}
            return {gamma: 1}
        word = tuple(
            itertools.chain.from_iterable(
                (t + 1,) * e for t, e in enumerate(alpha)
            )
        ) + tuple(
            itertools.chain.from_iterable((t + 1,) * e for t, e in enumerate(beta))
        )
        return self._normalize_word(word, prec)

    # series for the coordinate flip b_i -> (1 + b_i)^(-1) - 1

    def _involution_gen_power(self, i, power, prec):
        key = (i, power, prec.a, prec.N)
        hit = self._inv_gen_cache.get(key)
        if hit is not None:
            return hit
        if power == 0:
            out = self.one(prec)
        elif power == 1:
            terms = {}
            for k in range(1, prec.N):
                mono = [0] * self.r
                mono[i - 1] = k
                terms[tuple(mono)] = -1 if k % 2 else 1
            out = Element(self, prec, terms)
        else:
            half = self._involution_gen_power(i, power - 1, prec)
            out = half.mul(self._involution_gen_power(i, 1, prec))
        self._inv_gen_cache[key] = out
        return out


class Element:
    """Ring element at a fixed working precision, canonical sparse form.

    Terms map exponent tuples (length r, total degree below N) to integer
    coefficients in [1, p^a). The p-power content of a coefficient is part of
    the integer; there is no separate p slot.
    """

    __slots__ = ("ring", "prec", "terms")

    def __init__(self, ring, prec, terms):
        self.ring = ring
        self.prec = Precision(*prec)
        a, N = self.prec
        p = ring.p
        amod = ring._amod(self.prec)
        graded = ring.mode == "rules"
        clean = {}
        for mono, c in terms.items():
            mono = tuple(mono)
            if len(mono) != ring.r:
                raise ValueError("exponent length mismatch")
            deg = sum(mono)
            if deg >= N:
                continue
            if graded:
                # noncommuting generators: the flat span of low-degree
                # monomials is not stable under rewriting, so coefficients
                # are graded: precision p^(N - deg) caps p^a at high degree.
                # With this reduction representatives are canonical because
                # the associated graded ring is a free polynomial ring.
                c = int(c) % (p ** min(a, N - deg))
            else:
                c = int(c) % amod
            if c:
                clean[mono] = c
        self.terms = clean

    def _chk(self, other):
        if self.ring.key() != other.ring.key() or self.prec != other.prec:
            raise ValueError("mixed rings or precisions")

    def is_zero(self):
        return not self.terms

    def add(self, other):
        self._chk(other)
        amod = self.ring._amod(self.prec)
        terms = dict(self.terms)
        for m, c in other.terms.items():
            v = (terms.get(m, 0) + c) % amod
            if v:
                terms[m] = v
            else:
                terms.pop(m, None)
        return Element(self.ring, self.prec, terms)

    def neg(self):
        return self.scale(-1)

    def sub(self, other):
        return self.add(other.neg())

    def scale(self, c):
        return Element(self.ring, self.prec, {m: v * c for m, v in self.terms.items()})

    def mul(self, other):
        """Product self * other; order matters in rules mode."""
        self._chk(other)
        ring = self.ring
        amod = ring._amod(self.prec)
        acc = {}
        for a_mono, ac in self.terms.items():
            for b_mono, bc in other.terms.items():
                coeff = ac * bc % amod
                if not coeff:
                    continue
                for mono, unit in ring._mono_mul(a_mono, b_mono, self.prec).items():
                    v = (acc.get(mono, 0) + coeff * unit) % amod
                    if v:
                        acc[mono] = v
                    else:
                        acc.pop(mono, None)
        return Element(ring, self.prec, acc)

    def v_M(self):
        """Valuation for the filtration by powers of the maximal ideal.

        Returns Val(value, certain). Terms hidden by truncation all sit at
        valuation min(a, N) or deeper, so any candidate below that bound is
        exact and anything at or past it is only a lower bound.
        """
        p = self.ring.p
        if self.ring.base == "fp":
            bound = self.prec.N
            cand = min((sum(m) for m in self.terms), default=None)
        else:
            bound = min(self.prec.a, self.prec.N)
            cand = None
            for m, c in self.terms.items():
                v = sum(m)
                while c % p == 0:
                    c //= p
                    v += 1
                if cand is None or v < cand:
                    cand = v
        if cand is None:
            return Val(None, False)
        return Val(cand, cand < bound)

    def symbol(self):
        """Leading form in the associated graded ring F_p[X_0..X_r].

        X_0 is the image of p; X_i the image of b_i. Over the base field the
        X_0 slot is absent. Returns (GradedPoly, certain).
        """
        ring = self.ring
        p = ring.p
        nv = ring.gr_nvars
        val = self.v_M()
        if val.value is None:
            return GradedPoly.zero(p, nv), val.certain
        terms = {}
        for m, c in self.terms.items():
            e = 0
            while c % p == 0:
                c //= p
                e += 1
            if e + sum(m) != val.value:
                continue
            mono = (e,) + m if ring.base == "zp" else m
            terms[mono] = c % p
        return GradedPoly(p, nv, terms), val.certain

    def is_unit(self):
        c = self.terms.get((0,) * self.ring.r, 0)
        return c % self.ring.p != 0

    def inverse(self):
        """Two-sided inverse of a unit, by the geometric series.

        The constant coefficient is a central scalar, so factoring it out is
        legitimate even in rules mode.
        """
        ring = self.ring
        prec = self.prec
        amod = ring._amod(prec)
        c0 = self.terms.get((0,) * ring.r, 0)
        if c0 % ring.p == 0:
            raise ZeroDivisionError("not a unit at this precision")
        c0_inv = pow(c0, -1, amod)
        w = self.scale(c0_inv).sub(ring.one(prec))
        total = ring.one(prec)
        power = ring.one(prec)
        for _ in range(prec.a + prec.N):
            power = power.mul(w).neg()
            if power.is_zero():
                break
            total = total.add(power)
        return total.scale(c0_inv)

    def involution(self):
        """Image under the standard anti-automorphism x -> x^(-1) on group
        elements, i.e. b_i -> (1+b_i)^(-1) - 1 with products reversed."""
        ring = self.ring
        prec = self.prec
        out = ring.zero(prec)
        for mono, c in self.terms.items():
            part = ring.const(c, prec)
            # group inversion reverses words, so build from the last
            # generator down
            for i in range(ring.r, 0, -1):
                if mono[i - 1]:
                    part = part.mul(ring._involution_gen_power(i, mono[i - 1], prec))
            out = out.add(part)
        return out

    def lift(self, prec):
        """Reinterpret at a coarser or finer precision via canonical integer
        representatives."""
        return Element(self.ring, prec, dict(self.terms))

    def to_opposite(self):
        """The same underlying element written in the opposite context's
        canonical form: an ascending product reads there as the reversed
        word."""
        op = self.ring.opposite()
        if op is self.ring:
            return self
        prec = self.prec
        terms = {}
        for mono, c in self.terms.items():
            word = []
            for t in range(self.ring.r - 1, -1, -1):
                word.extend([t + 1] * mono[t])
            for exp, sc in op._normalize_word(tuple(word), prec).items():
                v = terms.get(exp, 0) + c * sc
                if v:
                    terms[exp] = v
                else:
                    terms.pop(exp, None)
        return Element(op, prec, terms)

    def key(self):
        return (self.prec, tuple(sorted(self.terms.items())))

    def __eq__(self, other):
        return (
            isinstance(other, Element)
            and self.ring.key() == other.ring.key()
            and self.key() == other.key()
        )

    def __hash__(self):
        return hash((self.ring.key(), self.key()))

    def render(self):
        if not self.terms:
            return "0"
        parts = []
        for mono in sorted(self.terms, key=lambda m: (sum(m), m)):
            c = self.terms[mono]
            factors = []
            for i, e in enumerate(mono):
                if e == 1:
                    factors.append("b%d" % (i + 1))
                elif e > 1:
                    factors.append("b%d^%d" % (i + 1, e))
            if not factors:
                parts.append(str(c))
            elif c == 1:
                parts.append("*".join(factors))
            else:
                parts.append("*".join([str(c)] + factors))
        return " + ".join(parts)

    def __repr__(self):
        return "Element(%s)" % self.render()


# spec-level operation names

def elem_add(x, y):
    return x.add(y)


def elem_mul(x, y):
    return x.mul(y)


def v_M(x):
    return x.v_M()


def symbol(x):
    return x.symbol()


def involution(x):
    return x.involution()


# ring constructors

def abelian(p, r, label=None):
    return RingContext(p, r, mode="abelian", label=label or "abelian")


def abelian_mod_p(p, r, label=None):
    return RingContext(p, r, mode="abelian", base="fp", label=label or "abelian mod p")


# upper unitriangular coordinates for the congruence Heisenberg group:
# a matrix I + p^2*(u E12 + v E23 + w E13) is stored as (u, v, w)

def heis_mul(p, c1, c2):
    u, v, w = c1
    u2, v2, w2 = c2
    return (u + u2, v + v2, w + w2 + p * p * u * v2)


def heis_word_to_coords(p, word):
    """Coordinates of x_1^e1 * ... applied left to right; word is a sequence
    of (generator index, exponent) pairs with indices in {1,2,3}."""
    gens = {1: (1, 0, 0), 2: (0, 1, 0), 3: (0, 0, 1)}
    coords = (0, 0, 0)
    for idx, e in word:
        u, v, w = gens[idx]
        # powers of a single unitriangular generator scale linearly
        coords = heis_mul(p, coords, (u * e, v * e, w * e))
    return coords


def heis_coords_to_exponents(p, coords):
    """Exponents (al, be, ga) with x_1^al x_2^be x_3^ga matching coords."""
    u, v, w = coords
    return (u, v, w - p * p * u * v)


def heis_expand(p, exponents, max_deg, amod=None):
    """Expansion of x_1^al x_2^be x_3^ga in the coordinates b_i = x_i - 1.

    Exact integer binomials; terms of total degree >= max_deg are cut.
    Returns {(i, j, k): coefficient}.
    """
    al, be, ga = exponents
    out = {}
    for i in range(max_deg):
        ci = _binom(al, i)
        if amod is not None:
            ci %= amod
        if not ci and al >= 0 and i > al:
            break
        for j in range(max_deg - i):
            cj = ci * _binom(be, j)
            if amod is not None:
                cj %= amod
            for k in range(max_deg - i - j):
                c = cj * _binom(ga, k)
                if amod is not None:
                    c %= amod
                if c:
                    out[(i, j, k)] = c
    return out


def congruence_heisenberg(p, max_word_deg=40, label=None):
    """Rules context for the level-p^2 congruence subgroup of the 3x3
    unitriangular group over Z_p.

    The only correction is h_21, derived here from exact matrix coordinates:
    commuting x_2 past x_1 costs a central factor supported on b_3.
    """
    x1 = heis_word_to_coords(p, [(1, 1)])
    x2 = heis_word_to_coords(p, [(2, 1)])
    left = heis_mul(p, x2, x1)
    right = heis_mul(p, x1, x2)
    lhs = heis_expand(p, heis_coords_to_exponents(p, left), max_word_deg)
    rhs = heis_expand(p, heis_coords_to_exponents(p, right), max_word_deg)
    h = dict(lhs)
    for mono, c in rhs.items():
        v = h.get(mono, 0) - c
        if v:
            h[mono] = v
        else:
            h.pop(mono, None)
    # b_2*b_1 - b_1*b_2 cancels the degree-2 part; what is left is the
    # correction polynomial
    return RingContext(
        p,
        3,
        mode="rules",
        rules={(2, 1): h},
        label=label or "heisenberg",
    )


class ValidationReport(NamedTuple):
    ok: bool
    checks: int
    failures: list

    def describe(self):
        return {"ok": self.ok, "checks": self.checks, "failures": self.failures}


def _random_element(ring, prec, rng, max_terms=3):
    amod = ring._amod(prec)
    terms = {}
    for _ in range(rng.randrange(1, max_terms + 1)):
        mono = tuple(rng.randrange(0, max(1, prec.N // 2)) for _ in range(ring.r))
        if sum(mono) >= prec.N:
            continue
        terms[mono] = rng.randrange(1, amod)
    return Element(ring, prec, terms)


def validate_ring(ring, prec=Precision(4, 8), samples=12, seed=0):
    """Check the ring data: corrections sit in filtration degree >= 3, and
    multiplication is associative and distributive on generators and random
    samples. Returns a report with witnesses for any failure."""
    failures = []
    checks = 0
    for (j, i), _poly in sorted(ring.rules.items()):
        h = ring.rule_element(j, i, prec)
        val = h.v_M()
        checks += 1
        if not val.at_least(3):
            failures.append(
                {
                    "check": "rule_valuation",
                    "pair": [j, i],
                    "valuation": val.value,
                    "witness": h.render(),
                }
            )
    gens = [ring.variable(i, prec) for i in range(1, ring.r + 1)]
    for x, y, z in itertools.product(gens, repeat=3):
        checks += 1
        if x.mul(y).mul(z) != x.mul(y.mul(z)):
            failures.append(
                {
                    "check": "associativity",
                    "witness": [x.render(), y.render(), z.render()],
                }
            )
    rng = random.Random(seed)
    for _ in range(samples):
        x = _random_element(ring, prec, rng)
        y = _random_element(ring, prec, rng)
        z = _random_element(ring, prec, rng)
        checks += 2
        if x.mul(y).mul(z) != x.mul(y.mul(z)):
            failures.append(
                {
                    "check": "associativity",
                    "witness": [x.render(), y.render(), z.render()],
                }
            )
        lhs = x.mul(y.add(z))
        rhs = x.mul(y).add(x.mul(z))
        if lhs != rhs:
            failures.append(
                {
                    "check": "distributivity",
                    "witness": [x.render(), y.render(), z.render()],
                }
            )
    return ValidationReport(not failures, checks, failures)
