"""Groebner engine over F_p[X_0,...,X_r] for ideals and submodules of free modules.

Monomials are exponent tuples, polynomials are sparse dicts mapping monomial to
a nonzero residue mod p, vectors are sparse dicts mapping (component, monomial)
to a residue. The monomial order is degrevlex; the module extension is
position-over-term with components prioritized by index. Krull dimension of a
quotient by a monomial module is found by the independent-variable-set search,
which is exact for leading term data.
"""

from functools import lru_cache
from itertools import combinations


def mono_mul(a, b):
    return tuple(x + y for x, y in zip(a, b))


def mono_lcm(a, b):
    return tuple(max(x, y) for x, y in zip(a, b))


def mono_divides(a, b):
    """True when a divides b."""
    return all(x <= y for x, y in zip(a, b))


def mono_div(b, a):
    return tuple(y - x for x, y in zip(a, b))


def mono_deg(a):
    return sum(a)


def drl_key(mono):
    # degrevlex: degree first, ties broken so the monomial with the smaller
    # exponent on the last differing variable is larger
    return (sum(mono), tuple(-e for e in reversed(mono)))


def term_key(comp, mono):
    # position over term: lower component index has priority
    return (-comp, drl_key(mono))


class GradedPoly:
    """Element of F_p[X_0..X_{nvars-1}], sparse and canonical."""

    __slots__ = ("p", "nvars", "terms")

    def __init__(self, p, nvars, terms=None):
        self.p = p
        self.nvars = nvars
        clean = {}
        for m, c in (terms or {}).items():
            c %= p
            if c:
                clean[tuple(m)] = c
        self.terms = clean

    @classmethod
    def zero(cls, p, nvars):
        return cls(p, nvars)

    @classmethod
    def variable(cls, p, nvars, i, power=1, coeff=1):
        m = [0] * nvars
        m[i] = power
        return cls(p, nvars, {tuple(m): coeff})

    @classmethod
    def const(cls, p, nvars, c):
        return cls(p, nvars, {(0,) * nvars: c})

    def is_zero(self):
        return not self.terms

    def degree(self):
        return max((mono_deg(m) for m in self.terms), default=None)

    def is_homogeneous(self):
        degs = {mono_deg(m) for m in self.terms}
        return len(degs) <= 1

    def lt(self):
        """Leading (monomial, coefficient) under degrevlex, or None."""
        if not self.terms:
            return None
        m = max(self.terms, key=drl_key)
        return m, self.terms[m]

    def add(self, other):
        terms = dict(self.terms)
        for m, c in other.terms.items():
            terms[m] = (terms.get(m, 0) + c) % self.p
        return GradedPoly(self.p, self.nvars, terms)

    def sub(self, other):
        terms = dict(self.terms)
        for m, c in other.terms.items():
            terms[m] = (terms.get(m, 0) - c) % self.p
        return GradedPoly(self.p, self.nvars, terms)

    def scale(self, c):
        return GradedPoly(self.p, self.nvars, {m: v * c for m, v in self.terms.items()})

    def mul(self, other):
        terms = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = mono_mul(m1, m2)
                terms[m] = (terms.get(m, 0) + c1 * c2) % self.p
        return GradedPoly(self.p, self.nvars, terms)

    def mul_term(self, mono, coeff):
        return GradedPoly(
            self.p, self.nvars, {mono_mul(m, mono): c * coeff for m, c in self.terms.items()}
        )

    def key(self):
        return tuple(sorted(self.terms.items()))

    def __eq__(self, other):
        return (
            isinstance(other, GradedPoly)
            and self.p == other.p
            and self.nvars == other.nvars
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.p, self.nvars, self.key()))

    def render(self, names=None):
        if not self.terms:
            return "0"
        if names is None:
            names = ["X%d" % i for i in range(self.nvars)]
        parts = []
        for m in sorted(self.terms, key=drl_key, reverse=True):
            c = self.terms[m]
            factors = []
            for i, e in enumerate(m):
                if e == 1:
                    factors.append(names[i])
                elif e > 1:
                    factors.append("%s^%d" % (names[i], e))
            if not factors:
                parts.append(str(c))
            elif c == 1:
                parts.append("*".join(factors))
            else:
                parts.append("*".join([str(c)] + factors))
        return " + ".join(parts)

    def __repr__(self):
        return "GradedPoly(%s)" % self.render()


# vectors: sparse dicts {(comp, mono): coeff}, always canonical (no zeros)


def vec_from_polys(polys):
    v = {}
    for comp, poly in enumerate(polys):
        for m, c in poly.terms.items():
            v[(comp, m)] = c
    return v


def vec_to_polys(v, p, nvars, rank):
    out = [dict() for _ in range(rank)]
    for (comp, m), c in v.items():
        out[comp][m] = c
    return [GradedPoly(p, nvars, t) for t in out]


def vec_lt(v):
    if not v:
        return None
    comp, mono = max(v, key=lambda cm: term_key(*cm))
    return comp, mono, v[comp, mono]


def vec_sub_scaled(v, w, mono, coeff, p):
    """v - coeff * X^mono * w, in place on a copy."""
    out = dict(v)
    for (comp, m), c in w.items():
        key = (comp, mono_mul(m, mono))
        nc = (out.get(key, 0) - coeff * c) % p
        if nc:
            out[key] = nc
        else:
            out.pop(key, None)
    return out


def vec_key(v):
    return tuple(sorted(v.items()))


class GradedSubmodule:
    """Submodule of F_p[X]^rank given by generators; Groebner data on demand."""

    __slots__ = ("p", "nvars", "rank", "gens", "_gb", "_lt")

    def __init__(self, p, nvars, rank, gens):
        self.p = p
        self.nvars = nvars
        self.rank = rank
        self.gens = [dict(g) for g in gens if g]
        self._gb = None
        self._lt = None

    @classmethod
    def from_polys(cls, p, nvars, gens):
        """Ideal in the rank-1 free module from a list of GradedPoly."""
        return cls(p, nvars, 1, [vec_from_polys([g]) for g in gens])

    def groebner_basis(self):
        if self._gb is None:
            self._gb = groebner(self)
        return self._gb

    def leading_module(self):
        """Leading terms of the reduced basis, as a list of (comp, mono)."""
        if self._lt is None:
            self._lt = sorted(
                ((c, m) for c, m, _ in (vec_lt(g) for g in self.groebner_basis()))
            )
        return self._lt


def _reduce_vec(v, basis, p):
    """Full normal form of v against basis vectors; deterministic."""
    work = dict(v)
    rem = {}
    while work:
        comp, mono, coeff = vec_lt(work)
        hit = None
        for g in basis:
            gl = vec_lt(g)
            if gl is None:
                continue
            gc, gm, gcoeff = gl
            if gc == comp and mono_divides(gm, mono):
                hit = (g, gm, gcoeff)
                break
        if hit is None:
            rem[(comp, mono)] = coeff
            del work[(comp, mono)]
            continue
        g, gm, gcoeff = hit
        factor = (coeff * pow(gcoeff, p - 2, p)) % p
        work = vec_sub_scaled(work, g, mono_div(mono, gm), factor, p)
    return rem


def groebner(S, order=None):
    """Reduced Groebner basis of S, deterministic.

    Normal strategy: pending pairs sorted by lcm degree then insertion indexes.
    Returns the auto-reduced monic basis sorted by leading term.
    """
    p = S.p
    basis = []
    for g in S.gens:
        r = _reduce_vec(g, basis, p)
        if r:
            basis.append(_monic(r, p))
    pairs = [(i, j) for i in range(len(basis)) for j in range(i + 1, len(basis))]

    def pair_order(ij):
        i, j = ij
        li = vec_lt(basis[i])
        lj = vec_lt(basis[j])
        if li[0] != lj[0]:
            return (1, 0, i, j)
        deg = mono_deg(mono_lcm(li[1], lj[1]))
        return (0, deg, i, j)

    while pairs:
        pairs.sort(key=pair_order)
        i, j = pairs.pop(0)
        ci, mi, _ = vec_lt(basis[i])
        cj, mj, _ = vec_lt(basis[j])
        if ci != cj:
            continue
        lcm = mono_lcm(mi, mj)
        s = vec_sub_scaled(
            {
                (c, mono_mul(m, mono_div(lcm, mi))): v
                for (c, m), v in basis[i].items()
            },
            basis[j],
            mono_div(lcm, mj),
            1,
            p,
        )
        r = _reduce_vec(s, basis, p)
        if r:
            basis.append(_monic(r, p))
            k = len(basis) - 1
            pairs.extend((t, k) for t in range(k))
    return _autoreduce(basis, p)


def _monic(v, p):
    _, _, c = vec_lt(v)
    inv = pow(c, p - 2, p)
    return {k: (val * inv) % p for k, val in v.items()}


def _autoreduce(basis, p):
    changed = True
    basis = [dict(b) for b in basis]
    while changed:
        changed = False
        out = []
        for i, g in enumerate(basis):
            others = [b for t, b in enumerate(basis) if t != i and b]
            r = _reduce_vec(g, others, p)
            if vec_key(r) != vec_key(g):
                changed = True
            if r:
                out.append(_monic(r, p))
        basis = out
    basis.sort(key=lambda g: term_key(*vec_lt(g)[:2]), reverse=True)
    return basis


def normal_form(v, S):
    """Fully reduced remainder of the vector v against S; zero iff v lies in S."""
    return _reduce_vec(v, S.groebner_basis(), S.p)


def member(v, S):
    return not normal_form(v, S)


@lru_cache(maxsize=None)
def _mono_ideal_dim(nvars, gens):
    """Krull dimension of F_p[X_0..X_{nvars-1}] / (monomial ideal gens).

    None encodes the zero ring. The dimension equals the largest size of a
    variable subset meeting the support of no generator.
    """
    if any(mono_deg(m) == 0 for m in gens):
        return None
    supports = [frozenset(i for i, e in enumerate(m) if e) for m in gens]
    for size in range(nvars, -1, -1):
        for subset in combinations(range(nvars), size):
            sub = frozenset(subset)
            if all(not s <= sub for s in supports):
                return size
    return None


def krull_dim(S):
    """Dimension of F_p[X]^rank / S; None encodes the zero quotient.

    The per-component leading term ideals of a reduced basis decompose the
    leading module, so the support dimension is the max over components.
    """
    if S.rank == 0:
        return None
    lt = S.leading_module()
    best = None
    for comp in range(S.rank):
        gens = tuple(sorted(m for c, m in lt if c == comp))
        dim = _mono_ideal_dim(S.nvars, gens)
        if dim is not None and (best is None or dim > best):
            best = dim
    return best


def quotient_staircase_size(S):
    """Number of standard monomials of F_p[X]^rank / S; None when infinite."""
    lt = S.leading_module()
    if S.rank == 0:
        return 0
    total = 0
    for comp in range(S.rank):
        gens = [m for c, m in lt if c == comp]
        dim = _mono_ideal_dim(S.nvars, tuple(sorted(gens)))
        if dim is None:
            continue
        if dim > 0:
            return None
        total += _staircase_count(S.nvars, gens)
    return total


def _staircase_count(nvars, gens):
    # finite by assumption: every variable appears as a pure power among gens
    bounds = []
    for i in range(nvars):
        pure = [m[i] for m in gens if all(e == 0 for j, e in enumerate(m) if j != i)]
        bounds.append(min(pure))
    count = 0
    from itertools import product

    for mono in product(*(range(b) for b in bounds)):
        if not any(mono_divides(g, mono) for g in gens):
            count += 1
    return count


def _det(rows, p, nvars):
    n = len(rows)
    if n == 0:
        return GradedPoly.const(p, nvars, 1)
    if n == 1:
        return rows[0][0]
    total = GradedPoly.zero(p, nvars)
    for j in range(n):
        entry = rows[0][j]
        if entry.is_zero():
            continue
        minor = [[r[t] for t in range(n) if t != j] for r in rows[1:]]
        sub = _det(minor, p, nvars)
        if sub.is_zero():
            continue
        term = entry.mul(sub)
        total = total.add(term) if j % 2 == 0 else total.sub(term)
    return total


def graded_rank(matrix, p=None, nvars=None):
    """Rank over the fraction field, via the largest non-vanishing minor."""
    rows = [list(r) for r in matrix]
    if not rows or not rows[0]:
        return 0
    if p is None:
        p = rows[0][0].p
    if nvars is None:
        nvars = rows[0][0].nvars
    m, n = len(rows), len(rows[0])
    for size in range(min(m, n), 0, -1):
        for ri in combinations(range(m), size):
            for ci in combinations(range(n), size):
                sub = [[rows[i][j] for j in ci] for i in ri]
                if not _det(sub, p, nvars).is_zero():
                    return size
    return 0
