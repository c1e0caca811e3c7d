"""Standard bases and finite presentations over truncated group algebras.

Modules are left modules presented as row spans: a presentation with n
generators and rows R describes Lambda^n / (left span of R), and a map of
presentations sends generator i of the source to row i of its matrix, so
elements are row vectors and maps act by right multiplication.

The term order is local: smaller filtration valuation leads, then smaller
component index, then a reverse lexicographic tie break on (p-exponent,
exponent tuple). Leading coefficients over Z/p^a are p^s times a unit, and
completion uses S-pairs matched at p^max plus annihilator multiples
p^(a-s) * g. Zero reductions of annihilator multiples are truncation
artifacts (the untruncated algebra has no zero divisors) and are counted but
never emitted as syzygies.

Dividing by a leading coefficient p^s * u with s >= 1 determines the
quotient only modulo p^(a-s), so reductions that pass through such an entry
with off-lead terms carry a residue ambiguity supported at or past the
reliable valuation zone. A reduction of that kind whose remainder has no
certain content is classified as a zero reduction: inserting the residue
would manufacture a basis entry out of unknowable digits and silently drop
the genuine syzygy, at every precision.
"""

from .graded import GradedSubmodule
from .ring import Precision

_CACHE = {}


def _vp(c, p):
    e = 0
    while c % p == 0:
        c //= p
        e += 1
    return e


def term_order_key(comp, e, mono):
    # local order: shallow filtration first, then component, then revlex;
    # max() picks the leading term
    return (
        -(e + sum(mono)),
        -comp,
        tuple(-v for v in reversed((e,) + tuple(mono))),
    )


def vec_lead(vec, p):
    """Leading (comp, mono, e, unit, key) of a vector of Elements, or None."""
    best = None
    for comp, el in enumerate(vec):
        for mono, c in el.terms.items():
            e = _vp(c, p)
            key = term_order_key(comp, e, mono)
            if best is None or key > best[4]:
                best = (comp, mono, e, c // (p ** e), key)
    return best


def vec_is_zero(vec):
    return all(el.is_zero() for el in vec)


def vec_add(u, v):
    return [x.add(y) for x, y in zip(u, v)]


def vec_sub(u, v):
    return [x.sub(y) for x, y in zip(u, v)]


def vec_scale(u, c):
    return [x.scale(c) for x in u]


def vec_left_mul(m, u):
    """m * u for a ring element m, multiplying every coordinate on the left."""
    return [m.mul(x) for x in u]


def zero_vec(ring, prec, n):
    return [ring.zero(prec) for _ in range(n)]


def unit_vec(ring, prec, n, i):
    v = zero_vec(ring, prec, n)
    v[i] = ring.one(prec)
    return v


def _certainly_nonzero(vec):
    for el in vec:
        if not el.is_zero() and el.v_M().certain:
            return True
    return False


class BasisEntry:
    __slots__ = ("vec", "tail", "lead", "origin", "taint", "spread")

    def __init__(self, vec, tail, lead, origin, taint):
        self.vec = vec
        self.tail = tail
        self.lead = lead
        self.origin = origin
        self.taint = taint
        # dividing by a p-valued lead fixes the quotient only modulo
        # p^(a - s); off-lead terms then smear that ambiguity into the
        # remainder, so reductions through such an entry are fuzzy
        self.spread = lead is not None and lead[2] >= 1 and any(
            (comp, mono) != (lead[0], lead[1])
            for comp, el in enumerate(vec)
            for mono in el.terms
        )


class StandardBasis:
    """Completed basis for the left row span of the input rows.

    Attributes: entries (BasisEntry list), syzygies (vectors over the input
    rows whose combination vanishes at precision, artifact-free sources
    only), artifact_syzygies (count of discarded annihilator reductions),
    uncertain_leads (untainted leading terms at or past the reliable zone).
    """

    def __init__(self, ring, prec, n, rows):
        self.ring = ring
        self.prec = Precision(*prec)
        self.n = n
        self.rows = [list(r) for r in rows]
        self.entries = []
        self.syzygies = []
        self.artifact_syzygies = 0
        self.fuzzy_zero_reductions = 0
        self._complete()
        bound = self._certainty_bound()
        self.uncertain_leads = [
            g.lead
            for g in self.entries
            if not g.taint and g.lead[2] + sum(g.lead[1]) >= bound
        ]

    def _certainty_bound(self):
        """Valuation floor of the truncation kernel: leading terms below it
        cannot be created or destroyed by finer truncation. Over the residue
        base there is no hidden coefficient direction, so only the degree
        window matters."""
        if self.ring.base == "fp":
            return self.prec.N
        return min(self.prec.a, self.prec.N)

    # full normal form with row-combination tracking

    def _reduce(self, vec, tail):
        ring = self.ring
        prec = self.prec
        p = ring.p
        amod = ring._amod(prec)
        work = list(vec)
        rem = zero_vec(ring, prec, self.n)
        tainted = False
        fuzzy = False
        while True:
            t = vec_lead(work, p)
            if t is None:
                break
            comp, mono, e, unit, _ = t
            hit = None
            for g in self.entries:
                gc, gm, ge, gu, _ = g.lead
                if gc == comp and ge <= e and all(x <= y for x, y in zip(gm, mono)):
                    hit = g
                    break
            if hit is None:
                c = work[comp].terms[mono]
                piece = ring.elem({mono: c}, prec)
                rem[comp] = rem[comp].add(piece)
                work[comp] = work[comp].sub(piece)
                continue
            gc, gm, ge, gu, _ = hit.lead
            c = work[comp].terms[mono]
            q = (c // (p ** ge)) * pow(gu, -1, amod) % amod
            nu = tuple(x - y for x, y in zip(mono, gm))
            mult = ring.elem({nu: q}, prec)
            work = vec_sub(work, vec_left_mul(mult, hit.vec))
            if tail is not None:
                tail = vec_sub(tail, vec_left_mul(mult, hit.tail))
            if hit.taint:
                tainted = True
            if hit.spread:
                fuzzy = True
        return rem, tail, tainted, fuzzy

    def _add_task_pairs(self, k, queue):
        for t in range(len(self.entries)):
            if t != k and self.entries[t].lead[0] == self.entries[k].lead[0]:
                queue.append(("sp", min(t, k), max(t, k)))
        if self.ring.base == "zp" and self.entries[k].lead[2] >= 1:
            queue.append(("ann", k, k))

    def _insert(self, rem, tail, origin, taint):
        lead = vec_lead(rem, self.ring.p)
        entry = BasisEntry(rem, tail, lead, origin, taint)
        self.entries.append(entry)
        return len(self.entries) - 1

    def _complete(self):
        ring = self.ring
        prec = self.prec
        p = ring.p
        a, N = prec
        amod = ring._amod(prec)
        m = len(self.rows)
        queue = []
        for i, row in enumerate(self.rows):
            tail = unit_vec(ring, prec, m, i)
            rem, tail, tainted, fuzzy = self._reduce(row, tail)
            if vec_is_zero(rem) or (fuzzy and not _certainly_nonzero(rem)):
                if not vec_is_zero(rem):
                    self.fuzzy_zero_reductions += 1
                if tainted:
                    self.artifact_syzygies += 1
                elif not vec_is_zero(tail):
                    self.syzygies.append(tail)
                continue
            k = self._insert(rem, tail, ("row", i), False)
            self._add_task_pairs(k, queue)
        done = set()

        def task_key(task):
            kind, i, j = task
            gi = self.entries[i].lead
            if kind == "ann":
                return (a + sum(gi[1]), 1, i, j)
            gj = self.entries[j].lead
            lcm = tuple(max(x, y) for x, y in zip(gi[1], gj[1]))
            return (max(gi[2], gj[2]) + sum(lcm), 0, i, j)

        while queue:
            queue.sort(key=task_key)
            task = queue.pop(0)
            if task in done:
                continue
            done.add(task)
            kind, i, j = task
            if kind == "ann":
                g = self.entries[i]
                s = g.lead[2]
                factor = p ** (a - s)
                vec = vec_scale(g.vec, factor)
                tail = vec_scale(g.tail, factor)
                rem, tail, _tainted, fuzzy = self._reduce(vec, tail)
                if vec_is_zero(rem) or (fuzzy and not _certainly_nonzero(rem)):
                    if not vec_is_zero(rem):
                        self.fuzzy_zero_reductions += 1
                    self.artifact_syzygies += 1
                    continue
                k = self._insert(rem, tail, ("ann", i), True)
                self._add_task_pairs(k, queue)
                continue
            g1, g2 = self.entries[i], self.entries[j]
            c1, m1, e1, u1, _ = g1.lead
            c2, m2, e2, u2, _ = g2.lead
            if c1 != c2:
                continue
            lcm = tuple(max(x, y) for x, y in zip(m1, m2))
            ee = max(e1, e2)
            q1 = ring.elem(
                {tuple(x - y for x, y in zip(lcm, m1)): p ** (ee - e1) * pow(u1, -1, amod)},
                prec,
            )
            q2 = ring.elem(
                {tuple(x - y for x, y in zip(lcm, m2)): p ** (ee - e2) * pow(u2, -1, amod)},
                prec,
            )
            vec = vec_sub(vec_left_mul(q1, g1.vec), vec_left_mul(q2, g2.vec))
            tail = vec_sub(vec_left_mul(q1, g1.tail), vec_left_mul(q2, g2.tail))
            taint = g1.taint or g2.taint
            rem, tail, tainted, fuzzy = self._reduce(vec, tail)
            taint = taint or tainted
            if vec_is_zero(rem) or (fuzzy and not _certainly_nonzero(rem)):
                if not vec_is_zero(rem):
                    self.fuzzy_zero_reductions += 1
                if taint:
                    self.artifact_syzygies += 1
                elif not vec_is_zero(tail):
                    self.syzygies.append(tail)
                continue
            k = self._insert(rem, tail, ("sp", i, j), taint)
            self._add_task_pairs(k, queue)

    def normal_form(self, vec):
        rem, _, _, _ = self._reduce(list(vec), None)
        return rem

    def member(self, vec):
        return vec_is_zero(self.normal_form(vec))

    def member_at_precision(self, vec):
        """Membership up to content past the reliable zone: the normal form
        may keep terms the truncation cannot tell apart from zero."""
        return not _certainly_nonzero(self.normal_form(vec))

    def lift(self, vec):
        """Write vec as combination of the input rows plus a remainder.

        Returns (combo, rem) with vec = combo * rows + rem at precision.
        """
        m = len(self.rows)
        tail = zero_vec(self.ring, self.prec, m)
        rem, tail, _, _ = self._reduce(list(vec), tail)
        return vec_scale(tail, -1), rem

    def leading_data(self, certified_only=True):
        """Untainted leading terms; with certified_only, restricted to the
        zone where truncation cannot hide anything."""
        bound = self._certainty_bound()
        out = []
        for g in self.entries:
            if g.taint:
                continue
            comp, mono, e, _, _ = g.lead
            if certified_only and e + sum(mono) >= bound:
                continue
            out.append((comp, mono, e))
        return out


def standard_basis(ring, prec, n, rows):
    key = None
    try:
        key = (
            ring.key(),
            Precision(*prec),
            n,
            tuple(tuple(el.key() for el in row) for row in rows),
        )
    except Exception:
        key = None
    if key is not None and key in _CACHE:
        return _CACHE[key]
    sb = StandardBasis(ring, prec, n, rows)
    if key is not None:
        _CACHE[key] = sb
    return sb


class Presentation:
    """Finitely presented left module Lambda^n / (row span of rows)."""

    __slots__ = ("ring", "prec", "n", "rows", "label", "_key")

    def __init__(self, ring, prec, n, rows, label=None):
        self.ring = ring
        self.prec = Precision(*prec)
        self.n = n
        clean = []
        for row in rows:
            row = list(row)
            if len(row) != n:
                raise ValueError("row length does not match generator count")
            if not vec_is_zero(row):
                clean.append(row)
        self.rows = clean
        self.label = label
        self._key = None

    @classmethod
    def free(cls, ring, prec, n, label=None):
        return cls(ring, prec, n, [], label=label)

    @classmethod
    def zero(cls, ring, prec, label=None):
        return cls(ring, prec, 0, [], label=label)

    @classmethod
    def from_polys(cls, ring, prec, n, poly_rows, label=None):
        rows = [
            [ring.elem(entry, prec) for entry in row]
            for row in poly_rows
        ]
        return cls(ring, prec, n, rows, label=label)

    @classmethod
    def cyclic(cls, ring, prec, annihilators, label=None):
        rows = [[el] for el in annihilators]
        return cls(ring, prec, 1, rows, label=label)

    def key(self):
        if self._key is None:
            self._key = (
                self.ring.key(),
                self.prec,
                self.n,
                tuple(tuple(el.key() for el in row) for row in self.rows),
            )
        return self._key

    def __eq__(self, other):
        return isinstance(other, Presentation) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def sb(self):
        return standard_basis(self.ring, self.prec, self.n, self.rows)

    def at_precision(self, prec):
        rows = [[el.lift(prec) for el in row] for row in self.rows]
        return Presentation(self.ring, prec, self.n, rows, label=self.label)

    def contains(self, vec):
        return self.sb().member(vec)

    def describe(self):
        return {
            "generators": self.n,
            "relations": len(self.rows),
            "label": self.label,
        }


class ModuleMap:
    """Map between presented modules: source generator i goes to matrix row i,
    read as an element of the target's generator coordinates."""

    __slots__ = ("source", "target", "matrix")

    def __init__(self, source, target, matrix):
        self.source = source
        self.target = target
        self.matrix = [list(r) for r in matrix]
        if len(self.matrix) != source.n:
            raise ValueError("matrix must have one row per source generator")
        for row in self.matrix:
            if len(row) != target.n:
                raise ValueError("matrix row length must match target rank")

    def apply(self, vec):
        """Image of a source coordinate vector, as target coordinates."""
        ring = self.source.ring
        prec = self.source.prec
        out = zero_vec(ring, prec, self.target.n)
        for i, c in enumerate(vec):
            if c.is_zero():
                continue
            out = vec_add(out, vec_left_mul(c, self.matrix[i]))
        return out

    def is_well_defined(self):
        """Every source relation must land in the target's row span, up to
        content the truncation cannot resolve."""
        tsb = self.target.sb()
        return all(tsb.member_at_precision(self.apply(row)) for row in self.source.rows)

    def is_zero_map(self):
        tsb = self.target.sb()
        return all(tsb.member_at_precision(row) for row in self.matrix)

    def compose(self, other):
        """self then other."""
        if other.source.n != self.target.n:
            raise ValueError("composition shape mismatch")
        rows = [other.apply(row) for row in self.matrix]
        return ModuleMap(self.source, other.target, rows)


def stacked_syzygies(ring, prec, n, blocks):
    """Syzygies of stacked row blocks, split back into per-block slices.

    blocks is a list of row lists; the result is a list of tuples of slices,
    one slice per block, one tuple per genuine syzygy.
    """
    rows = [row for block in blocks for row in block]
    sizes = [len(b) for b in blocks]
    sb = standard_basis(ring, prec, n, rows)
    out = []
    for syz in sb.syzygies:
        parts = []
        at = 0
        for s in sizes:
            parts.append(syz[at : at + s])
            at += s
        out.append(tuple(parts))
    return out, sb


def minimalize_rows(ring, prec, n, rows, modulo=()):
    """Drop rows contained in the span of the others plus the fixed block.

    Scans from the last row, which keeps the earliest presentation of each
    redundant direction. Over a local ring, an irredundant generating set is
    minimal, so this is an honest minimalization.
    """
    keep = list(rows)
    changed = True
    while changed:
        changed = False
        for idx in range(len(keep) - 1, -1, -1):
            others = keep[:idx] + keep[idx + 1 :] + list(modulo)
            sb = standard_basis(ring, prec, n, others)
            if sb.member(keep[idx]):
                keep.pop(idx)
                changed = True
                break
    return keep


def kernel(mapping):
    """Kernel of a module map, as a presentation plus its inclusion.

    Generators: syzygies of (matrix rows stacked on target relations),
    restricted to the matrix slice; anything in the source's relation span is
    discarded. Relations: one further syzygy step against the source
    relations.
    """
    src, tgt = mapping.source, mapping.target
    ring, prec = src.ring, src.prec
    split, _sb = stacked_syzygies(
        ring, prec, tgt.n, [mapping.matrix, tgt.rows]
    )
    gens = [parts[0] for parts in split]
    gens = [g for g in gens if not vec_is_zero(g)]
    gens = minimalize_rows(ring, prec, src.n, gens, modulo=src.rows)
    if not gens:
        ker = Presentation.zero(ring, prec)
        return ker, ModuleMap(ker, src, [])
    split2, _ = stacked_syzygies(ring, prec, src.n, [gens, src.rows])
    rels = [parts[0] for parts in split2]
    rels = [r for r in rels if not vec_is_zero(r)]
    ker = Presentation(ring, prec, len(gens), rels)
    incl = ModuleMap(ker, src, gens)
    return ker, incl


def image(mapping):
    """Image of a map as an abstract presentation: one generator per source
    generator, with every relation its rows satisfy inside the target."""
    src, tgt = mapping.source, mapping.target
    ring, prec = src.ring, src.prec
    split, _ = stacked_syzygies(ring, prec, tgt.n, [mapping.matrix, tgt.rows])
    rels = [parts[0] for parts in split]
    rels = [r for r in rels if not vec_is_zero(r)]
    return Presentation(ring, prec, src.n, rels)


def cokernel(mapping):
    tgt = mapping.target
    rows = tgt.rows + mapping.matrix
    return Presentation(tgt.ring, tgt.prec, tgt.n, rows)


def quotient(pres, extra_rows):
    return Presentation(pres.ring, pres.prec, pres.n, pres.rows + list(extra_rows))


def direct_sum(a, b):
    ring, prec = a.ring, a.prec
    n = a.n + b.n
    rows = []
    for row in a.rows:
        rows.append(list(row) + zero_vec(ring, prec, b.n))
    for row in b.rows:
        rows.append(zero_vec(ring, prec, a.n) + list(row))
    return Presentation(ring, prec, n, rows)


class SimplifyResult:
    """Presentation with unit-pivot generators eliminated, plus the two
    change-of-coordinates maps (old gens in new coordinates and back)."""

    __slots__ = ("pres", "fwd", "bwd")

    def __init__(self, pres, fwd, bwd):
        self.pres = pres
        self.fwd = fwd
        self.bwd = bwd


def simplify(pres):
    ring, prec, n = pres.ring, pres.prec, pres.n
    rows = [list(r) for r in pres.rows]
    alive = list(range(n))
    fwd = [unit_vec(ring, prec, n, i) for i in range(n)]

    def current_col(gen):
        return alive.index(gen)

    while True:
        pivot = None
        for ri, row in enumerate(rows):
            for ci, el in enumerate(row):
                if el.is_unit():
                    pivot = (ri, ci)
                    break
            if pivot:
                break
        if pivot is None:
            break
        ri, ci = pivot
        prow = rows[ri]
        u_inv = prow[ci].inverse()
        # substitution for the eliminated generator, in surviving columns
        subst = [u_inv.mul(prow[t]).neg() for t in range(len(alive))]
        new_rows = []
        for rj, row in enumerate(rows):
            if rj == ri:
                continue
            c = row[ci]
            nrow = [
                row[t].add(c.mul(subst[t])) if t != ci else ring.zero(prec)
                for t in range(len(alive))
            ]
            nrow.pop(ci)
            if not vec_is_zero(nrow):
                new_rows.append(nrow)
        # fold the eliminated coordinate through every old generator image
        nfwd = []
        for img in fwd:
            c = img[ci]
            nimg = [
                img[t].add(c.mul(subst[t])) if t != ci else ring.zero(prec)
                for t in range(len(alive))
            ]
            nimg.pop(ci)
            nfwd.append(nimg)
        fwd = nfwd
        rows = new_rows
        alive.pop(ci)

    out = Presentation(ring, prec, len(alive), rows, label=pres.label)
    bwd = [unit_vec(ring, prec, n, g) for g in alive]
    return SimplifyResult(out, fwd, bwd)


def minimal_generator_count(pres):
    """Rank of M / (maximal ideal) M over the residue field."""
    return simplify(pres).pres.n


def is_zero_module(pres):
    # after unit elimination all relation entries sit in the maximal ideal,
    # so the module vanishes exactly when no generator survives
    return simplify(pres).pres.n == 0


class GrModule:
    """Leading-term data of a presented module, over the graded polynomial
    ring. Monomial generators per component; uncertain marks leading terms
    whose existence could still change under escalation."""

    __slots__ = ("submodule", "uncertain", "rank")

    def __init__(self, submodule, uncertain, rank):
        self.submodule = submodule
        self.uncertain = uncertain
        self.rank = rank


def gr_module(pres):
    ring = pres.ring
    sb = pres.sb()
    nv = ring.gr_nvars
    gens = []
    for comp, mono, e in sb.leading_data(certified_only=True):
        gmono = (e,) + tuple(mono) if ring.base == "zp" else tuple(mono)
        gens.append({(comp, gmono): 1})
    sub = GradedSubmodule(ring.p, nv, pres.n, gens)
    return GrModule(sub, bool(sb.uncertain_leads), pres.n)


class CertResult:
    """Outcome of the stabilization loop: value plus how hard it was to pin
    down. Heuristic results carry both disagreeing values."""

    __slots__ = ("value", "certified", "escalations", "history", "flags")

    def __init__(self, value, certified, escalations, history, flags):
        self.value = value
        self.certified = certified
        self.escalations = escalations
        self.history = history
        self.flags = flags

    def describe(self):
        out = {
            "certification": "certified" if self.certified else "heuristic",
            "escalations": self.escalations,
        }
        if self.flags:
            out["flags"] = sorted(set(self.flags))
        if not self.certified:
            out["history"] = self.history
        return out


def unresolved_marker(value, prec):
    """Stand-in for a value read off a staircase while some leading term sits
    at or past the certainty zone. Such a value can be stably wrong: the
    suspect lead keeps its total degree while the zone only grows by one per
    escalation, so two consecutive levels can agree before the zone reaches
    it. Embedding the zone makes consecutive levels compare unequal and keeps
    the stabilization loop running until every lead is certain."""
    return {"unresolved": value, "zone": [prec.a, prec.N]}


def resolved(value):
    """False for an unresolved staircase marker, True for a settled value."""
    return not (isinstance(value, dict) and "unresolved" in value)


def certify(compute, base_prec, max_escalations=3):
    """Run compute at increasing precision until two consecutive results
    agree. compute takes a Precision and returns a JSON-comparable value, or
    a (value, flags) pair."""
    history = []
    flags = []
    unset = object()
    prev = unset
    for k in range(max_escalations + 2):
        prec = Precision(*base_prec).escalate(k)
        got = compute(prec)
        if isinstance(got, tuple):
            value, extra = got
            flags.extend(extra)
        else:
            value = got
        history.append(value)
        if prev is not unset and value == prev:
            return CertResult(value, True, k - 1, history, flags)
        prev = value
        if k == max_escalations + 1:
            break
    return CertResult(prev, False, max_escalations, history, flags)
