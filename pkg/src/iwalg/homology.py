"""Resolutions and derived functor data for presented modules.

Free modules carry row conventions throughout: a matrix A with m rows and n
columns is the map Lambda^m -> Lambda^n, x -> x * A. Applying Hom(-, Lambda)
to that map gives a map of right modules, and right modules are handled as
left modules over the opposite context: the dual of A is its transpose with
every entry rewritten in the opposite ring. This keeps all kernel and
quotient computations on exact low-degree data; series expansions of the
group-inversion involution never enter, which matters because their
truncation tails would otherwise contaminate cohomology near the precision
boundary.
"""

from .sbasis import (
    ModuleMap,
    Presentation,
    _certainly_nonzero,
    direct_sum,
    minimalize_rows,
    quotient,
    simplify,
    stacked_syzygies,
    standard_basis,
    vec_is_zero,
    vec_left_mul,
    vec_add,
    zero_vec,
)

_RES_CACHE = {}


def op_dual(rows, ncols):
    """Transpose with entries transported to the opposite context; ncols is
    the column count of the input (needed when it has no rows). Applying it
    to an opposite-side matrix transports back."""
    out = []
    for t in range(ncols):
        out.append([rows[s][t].to_opposite() for s in range(len(rows))])
    return out


def mat_mul(A, B, ring, prec, ncols_b):
    out = []
    for arow in A:
        row = zero_vec(ring, prec, ncols_b)
        for j, c in enumerate(arow):
            if c.is_zero():
                continue
            row = vec_add(row, vec_left_mul(c, B[j]))
        out.append(row)
    return out


class Resolution:
    """Minimal free resolution, extendable on demand.

    matrices[k] is the map F_{k+1} -> F_k; betti lists the ranks starting
    with F_0. gen_fwd / gen_bwd translate between the presentation's own
    generators and the minimized F_0 coordinates.
    """

    def __init__(self, pres):
        self.pres = pres
        self.ring = pres.ring
        self.prec = pres.prec
        s = simplify(pres)
        self.gen_fwd = s.fwd
        self.gen_bwd = s.bwd
        self.d0 = s.pres.n
        self.matrices = []
        self.flags = []
        self.terminated = False
        rows = minimalize_rows(self.ring, self.prec, s.pres.n, s.pres.rows)
        self._frontier = rows
        if not rows:
            self.terminated = True

    def ensure(self, length):
        while not self.terminated and len(self.matrices) < length:
            A = self._frontier
            self.matrices.append(A)
            sb = standard_basis(self.ring, self.prec, self._rank(len(self.matrices) - 1), A)
            syz = [s for s in sb.syzygies if not vec_is_zero(s)]
            syz = minimalize_rows(self.ring, self.prec, len(A), syz)
            for row in syz:
                if any(el.is_unit() for el in row):
                    self.flags.append("nonminimal_syzygy")
            self._frontier = syz
            if not syz:
                self.terminated = True
        return self

    def _rank(self, k):
        return self.d0 if k == 0 else len(self.matrices[k - 1])

    @property
    def betti(self):
        return [self.d0] + [len(A) for A in self.matrices]

    def rank_at(self, i):
        b = self.betti
        if i < len(b):
            return b[i]
        return 0 if self.terminated else None

    def matrix_at(self, i):
        """Map F_i -> F_{i-1}, or None past the end."""
        if 1 <= i <= len(self.matrices):
            return self.matrices[i - 1]
        return None

    def pd(self):
        """Length of the resolution; None for the zero module, or when the
        resolution did not terminate within the allowed window."""
        if self.d0 == 0:
            return None
        if not self.terminated:
            return None
        return len(self.matrices)


def resolution(pres, length):
    key = pres.key()
    res = _RES_CACHE.get(key)
    if res is None:
        res = Resolution(pres)
        _RES_CACHE[key] = res
    return res.ensure(length)


class ExtResult:
    """E^i of a presentation: ker/im of the dualized resolution, presented
    on its kernel generators over the opposite context.

    cocycles holds those generators as rows of the dual free module;
    boundary_rows spans the image block they are taken modulo.
    """

    __slots__ = ("i", "pres", "cocycles", "boundary_rows", "resolution", "flags")

    def __init__(self, i, pres, cocycles, boundary_rows, res, flags=()):
        self.i = i
        self.pres = pres
        self.cocycles = cocycles
        self.boundary_rows = boundary_rows
        self.resolution = res
        self.flags = list(flags)

    def is_zero(self):
        from .sbasis import is_zero_module

        return self.pres.n == 0 or is_zero_module(self.pres)


def _drop_margin_cocycles(op, prec, ncols, gens, boundary, flags):
    """Keep only kernel generators whose residue modulo the boundary has a
    component with certain valuation.

    A generator reduced entirely past the certainty floor cannot be told
    apart from a boundary at this precision; the completion can and does
    manufacture such vectors by absorbing terms into the truncation ideal
    (corrected products regenerate high-degree tails, so in rules mode
    reduction chains reach absorption depth). Genuine classes carry data at
    a fixed valuation and so cross the floor after finitely many
    escalations, whereas the artifacts scale with the degree window and
    never do; stabilization therefore separates the two."""
    if not gens:
        return gens
    sbb = standard_basis(op, prec, ncols, boundary) if boundary else None
    kept = []
    for g in gens:
        residue = sbb.normal_form(g) if sbb is not None else g
        if _certainly_nonzero(residue):
            kept.append(g)
        elif not vec_is_zero(residue):
            flags.append("cocycle_margin_discard")
    return kept


def ext(pres, i, res=None):
    """Derived dual E^i(M) = Ext^i(M, Lambda), as a presentation over the
    opposite context of M's ring."""
    if i < 0:
        raise ValueError("negative cohomological degree")
    ring, prec = pres.ring, pres.prec
    op = ring.opposite()
    if res is None:
        res = resolution(pres, i + 1)
    else:
        res.ensure(i + 1)
    d_i = res.rank_at(i)
    if d_i is None:
        raise RuntimeError("resolution did not reach the requested degree")
    if d_i == 0:
        return ExtResult(i, Presentation.zero(op, prec), [], [], res)
    if i == 0:
        boundary = []
    else:
        boundary = op_dual(res.matrix_at(i), res.rank_at(i - 1))
    nxt = res.matrix_at(i + 1)
    if nxt is None:
        s_rows = [[] for _ in range(d_i)]
        s_cols = 0
    else:
        s_cols = len(nxt)
        s_rows = op_dual(nxt, d_i)
    sb = standard_basis(op, prec, s_cols, s_rows)
    gens = [s for s in sb.syzygies if not vec_is_zero(s)]
    gens = minimalize_rows(op, prec, d_i, gens, modulo=boundary)
    flags = []
    gens = _drop_margin_cocycles(op, prec, d_i, gens, boundary, flags)
    if not gens:
        return ExtResult(i, Presentation.zero(op, prec), [], boundary, res, flags)
    split, _ = stacked_syzygies(op, prec, d_i, [gens, boundary])
    rels = [parts[0] for parts in split]
    rels = [r for r in rels if not vec_is_zero(r)]
    out = Presentation(op, prec, len(gens), rels)
    return ExtResult(i, out, gens, boundary, res, flags)


def transpose(pres):
    """Cokernel of the dualized first resolution map, over the opposite
    context."""
    ring, prec = pres.ring, pres.prec
    op = ring.opposite()
    res = resolution(pres, 1)
    A1 = res.matrix_at(1)
    if A1 is None:
        return Presentation.zero(op, prec)
    rows = op_dual(A1, res.d0)
    # rows has d0 entries, each a vector of length d1
    return Presentation(op, prec, len(A1), rows)


def loop_module(pres):
    """First syzygy module of a minimal presentation."""
    ring, prec = pres.ring, pres.prec
    res = resolution(pres, 2)
    A1 = res.matrix_at(1)
    if A1 is None:
        return Presentation.zero(ring, prec)
    A2 = res.matrix_at(2)
    return Presentation(ring, prec, len(A1), A2 or [])


def dual_module(pres):
    return ext(pres, 0).pres


class EvResult:
    """Natural evaluation of a module against its i-th derived dual: the map
    M -> E^i(E^i(M)) built by lifting the identity through both resolutions."""

    __slots__ = ("i", "map", "ext_pres", "double_pres", "flags")

    def __init__(self, i, mapping, ext_pres, double_pres, flags):
        self.i = i
        self.map = mapping
        self.ext_pres = ext_pres
        self.double_pres = double_pres
        self.flags = flags


def ev_level(pres, i):
    """Evaluation map M -> E^i E^i M.

    Constructs a chain map from the resolution of E^i(M) to the dualized
    resolution of M, degree by degree. Each lifting step divides by the row
    span of the next dual matrix; a nonzero remainder is a genuine
    obstruction (the lower derived duals do not vanish) and is flagged.
    """
    ring, prec = pres.ring, pres.prec
    op = ring.opposite()
    e = ext(pres, i)
    flags = list(e.flags)
    res = e.resolution
    res.ensure(i + 1)
    if e.pres.n == 0:
        target = Presentation.zero(ring, prec)
        zero_map = ModuleMap(pres, target, [zero_vec(ring, prec, 0) for _ in range(pres.n)])
        return EvResult(i, zero_map, e.pres, target, flags)
    gres = resolution(e.pres, i + 1)
    # chain map in degree 0: G_0 covers the kernel generators
    chi = mat_mul(gres.gen_bwd, e.cocycles, op, prec, res.rank_at(i))
    for q in range(1, i + 1):
        Aq = res.matrix_at(i - q + 1)
        d_from = res.rank_at(i - q)
        d_to = res.rank_at(i - q + 1)
        delta = op_dual(Aq, d_from) if Aq is not None else []
        Bq = gres.matrix_at(q)
        if Bq is None:
            chi = []
            break
        rhs = mat_mul(Bq, chi, op, prec, d_to)
        sb = standard_basis(op, prec, d_to, delta)
        new_chi = []
        for z in rhs:
            combo, rem = sb.lift(z)
            if _certainly_nonzero(rem):
                flags.append("ev_lift_obstruction")
            new_chi.append(combo)
        chi = new_chi
    # dualize the top chain map back to a map out of F_0
    dd = ext(e.pres, i, res=gres)
    flags.extend(dd.flags)
    if dd.pres.n == 0:
        zero_map = ModuleMap(pres, dd.pres, [zero_vec(ring, prec, 0) for _ in range(pres.n)])
        return EvResult(i, zero_map, e.pres, dd.pres, flags)
    k_i = gres.rank_at(i)
    V = op_dual(chi, res.d0) if chi else [zero_vec(ring, prec, k_i) for _ in range(res.d0)]
    # express each row of V in the kernel generators of the double dual
    sb2 = standard_basis(ring, prec, k_i, dd.cocycles + dd.boundary_rows)
    rows = []
    for v in V:
        combo, rem = sb2.lift(v)
        if _certainly_nonzero(rem):
            flags.append("ev_class_obstruction")
        rows.append(combo[: len(dd.cocycles)])
    # back to the original generators of M
    full = mat_mul(res.gen_fwd, rows, ring, prec, len(dd.cocycles))
    mapping = ModuleMap(pres, dd.pres, full)
    if not mapping.is_well_defined():
        flags.append("ev_not_well_defined")
    return EvResult(i, mapping, e.pres, dd.pres, flags)


def bidual_map(pres):
    """Evaluation into the double dual E^0 E^0."""
    return ev_level(pres, 0)


class CanonicalSequence:
    """Torsion part, evaluation map, and the two comparison modules from the
    transpose: E^1 of the transpose matches the torsion submodule and E^2
    the cokernel of evaluation."""

    __slots__ = ("phi", "torsion", "torsion_incl", "coker", "e1_transpose", "e2_transpose", "flags")

    def __init__(self, phi, torsion, torsion_incl, coker, e1, e2, flags):
        self.phi = phi
        self.torsion = torsion
        self.torsion_incl = torsion_incl
        self.coker = coker
        self.e1_transpose = e1
        self.e2_transpose = e2
        self.flags = flags


def canonical_sequence(pres):
    from .sbasis import cokernel, kernel

    ev = bidual_map(pres)
    tors, incl = kernel(ev.map)
    cok = cokernel(ev.map)
    D = transpose(pres)
    e1 = ext(D, 1)
    e2 = ext(D, 2)
    return CanonicalSequence(ev.map, tors, incl, cok, e1.pres, e2.pres, list(ev.flags))


# Hom complexes against the residue field resolution


def residue_field(ring, prec):
    gens = []
    if ring.base == "zp":
        gens.append(ring.const(ring.p, prec))
    for t in range(1, ring.r + 1):
        gens.append(ring.variable(t, prec))
    return Presentation.cyclic(ring, prec, gens, label="k")


def power_module(pres, copies):
    if copies == 0:
        return Presentation.zero(pres.ring, pres.prec)
    out = pres
    for _ in range(copies - 1):
        out = direct_sum(out, pres)
    return out


def _hom_into(pres, A, rank_from, rank_to):
    """Map Hom(F_{q-1}, M) -> Hom(F_q, M) induced by A: F_q -> F_{q-1},
    with Hom(F_k, M) realized as M^(rank of F_k)."""
    ring, prec = pres.ring, pres.prec
    src = power_module(pres, rank_from)
    tgt = power_module(pres, rank_to)
    n = pres.n
    mat = []
    for s in range(rank_from):
        for g in range(n):
            row = zero_vec(ring, prec, rank_to * n)
            for t in range(rank_to):
                c = A[t][s]
                if not c.is_zero():
                    row[t * n + g] = row[t * n + g].add(c)
            mat.append(row)
    return ModuleMap(src, tgt, mat)


def hom_complex_homology(pres, against, q):
    """H^q of Hom(F_., M) for F_. the minimal resolution of `against`.

    Only valid over abelian contexts: the differentials multiply values on
    the left by matrix entries, which is module-linear exactly when the
    ring is commutative.
    """
    from .sbasis import kernel, unit_vec

    ring, prec = pres.ring, pres.prec
    if ring.mode != "abelian":
        raise ValueError("Hom complexes need a commutative context")
    res = resolution(against, q + 1)
    rank_q = res.rank_at(q) or 0
    if rank_q == 0 or pres.n == 0:
        return Presentation.zero(ring, prec)
    A_next = res.matrix_at(q + 1)
    rank_next = 0 if A_next is None else len(A_next)
    mod_q = power_module(pres, rank_q)
    if rank_next == 0:
        ker_pres = mod_q
        incl = ModuleMap(mod_q, mod_q, [unit_vec(ring, prec, mod_q.n, g) for g in range(mod_q.n)])
    else:
        out_map = _hom_into(pres, A_next, rank_q, rank_next)
        ker_pres, incl = kernel(out_map)
    if q == 0:
        return ker_pres
    A_q = res.matrix_at(q)
    in_map = _hom_into(pres, A_q, res.rank_at(q - 1), rank_q)
    # push each image generator into kernel coordinates
    sb = standard_basis(ring, prec, mod_q.n, incl.matrix + mod_q.rows)
    extra = []
    for w in in_map.matrix:
        combo, rem = sb.lift(w)
        if _certainly_nonzero(rem):
            # image must land in the kernel; failure means precision trouble
            continue
        extra.append(combo[: len(incl.matrix)])
    return quotient(ker_pres, extra)


def depth(pres):
    """Depth of M, as d minus the top nonvanishing derived dual.

    The ambient algebra is Auslander-Gorenstein of injective dimension d,
    where depth(M) + max{i : E^i(M) != 0} = d for finitely generated
    nonzero M. Scanning the derived duals avoids Hom complexes entirely, so
    the same path serves commutative and noncommutative contexts. Returns
    None for the zero module (depth is +infinity by convention), or when
    every E^i vanishes, which signals a precision failure.
    """
    from .sbasis import is_zero_module

    ring = pres.ring
    if is_zero_module(pres):
        return None
    for i in range(ring.d, -1, -1):
        if not ext(pres, i).is_zero():
            return ring.d - i
    return None


def depth_via_hom(pres):
    """Smallest q with Ext^q(k, M) nonzero, from the literal Hom complex.
    Abelian contexts only; serves as an independent cross-check of depth."""
    from .sbasis import is_zero_module

    ring, prec = pres.ring, pres.prec
    if is_zero_module(pres):
        return None
    k_pres = residue_field(ring, prec)
    for q in range(ring.d + 1):
        h = hom_complex_homology(pres, k_pres, q)
        if h.n and not is_zero_module(h):
            return q
    return None


def tor_betti(pres, i):
    """dim_k Tor_i(k, M), read from the minimal resolution with the mod-M
    rank cross-check on the adjacent matrices."""
    res = resolution(pres, i + 1)
    d_i = res.rank_at(i)
    if d_i is None or d_i == 0:
        return 0
    p = pres.ring.p
    zero_mono = (0,) * pres.ring.r
    for A in (res.matrix_at(i), res.matrix_at(i + 1)):
        if A is None:
            continue
        for row in A:
            for el in row:
                if el.terms.get(zero_mono, 0) % p:
                    raise RuntimeError("resolution is not minimal")
    return d_i


def ext_betti(pres, i):
    """dim_k Ext^i(M, k); equals the i-th Betti number for a minimal
    resolution."""
    return tor_betti(pres, i)
