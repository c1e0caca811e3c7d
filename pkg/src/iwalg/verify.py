"""Audit laboratory: randomized and fixed-corpus checks of the homological
identities the rest of the package relies on.

Every audit is reproducible from its (seed, config) pair and returns an
AuditReport: instance counts, the first counterexample witness if any, the
union of precision flags seen, and how many instances settled only
heuristically. Checks never pass silently on a heuristic value; the flag is
recorded on the report.
"""

import random

from .graded import krull_dim, quotient_staircase_size
from .ring import (
    Precision,
    _random_element,
    abelian,
    congruence_heisenberg,
    heis_coords_to_exponents,
    heis_expand,
    heis_word_to_coords,
    validate_ring,
)
from .sbasis import (
    ModuleMap,
    Presentation,
    certify,
    direct_sum,
    gr_module,
    is_zero_module,
    kernel,
    cokernel,
    minimal_generator_count,
    resolved,
    standard_basis,
    unit_vec,
    unresolved_marker,
    vec_add,
    vec_is_zero,
    vec_left_mul,
    zero_vec,
)
from .homology import depth_via_hom, ev_level, ext, resolution
from .homology import depth as depth_at_precision
from .invariants import (
    _p_layer_ranks,
    canonical_dimension,
    derived_dual_profile,
    dimension_filtration,
    grade,
    is_pseudo_null,
    mod_p_presentation,
    module_rank,
    mu_invariant,
    p_torsion_exponents,
    projective_dimension,
    torsion_submodule,
)

DEFAULT_PREC = Precision(4, 8)


class AuditReport:
    """Aggregated outcome of one audit family."""

    __slots__ = ("check", "instances", "passes", "failures", "witness", "flags", "heuristic_instances")

    def __init__(self, check):
        self.check = check
        self.instances = 0
        self.passes = 0
        self.failures = 0
        self.witness = None
        self.flags = set()
        self.heuristic_instances = 0

    def record(self, ok, witness=None, flags=(), certified=True):
        self.instances += 1
        self.flags.update(flags)
        if not certified:
            self.heuristic_instances += 1
        if ok:
            self.passes += 1
        else:
            self.failures += 1
            if self.witness is None:
                self.witness = witness

    @property
    def ok(self):
        return self.failures == 0

    def describe(self):
        out = {
            "check": self.check,
            "instances": self.instances,
            "passes": self.passes,
            "failures": self.failures,
            "flags": sorted(self.flags),
            "heuristic_instances": self.heuristic_instances,
        }
        if self.witness is not None:
            out["witness"] = self.witness
        return out


def _witness(pres, seed=None, trace=None):
    w = {
        "ring": pres.ring.describe(),
        "precision": [pres.prec.a, pres.prec.N],
        "generators": pres.n,
        "rows": [[e.render() for e in row] for row in pres.rows],
    }
    if seed is not None:
        w["seed"] = seed
    if trace:
        w["trace"] = trace
    return w


# random corpus


def random_presentation(rng, p=3, prec=DEFAULT_PREC, max_gens=3, max_rels=4, max_deg=2):
    """Small random presentation over one or two abelian variables; entry
    coefficients stay in {0..p^2} and degrees at most max_deg."""
    r = rng.choice((1, 2))
    ring = abelian(p, r)
    n = rng.randrange(1, max_gens + 1)
    rows = []
    for _ in range(rng.randrange(0, max_rels + 1)):
        row = []
        for _g in range(n):
            terms = {}
            for _t in range(rng.randrange(0, 3)):
                mono = [0] * r
                for _d in range(rng.randrange(0, max_deg + 1)):
                    mono[rng.randrange(r)] += 1
                c = rng.randrange(0, p * p + 1)
                if c:
                    key = tuple(mono)
                    terms[key] = terms.get(key, 0) + c
            row.append(ring.elem(terms, prec))
        if not vec_is_zero(row):
            rows.append(row)
    return Presentation(ring, prec, n, rows)


def corpus(count, seed, p=3, prec=DEFAULT_PREC):
    rng = random.Random(seed)
    return [random_presentation(rng, p, prec) for _ in range(count)]


def _small_element(ring, prec, rng, allow_const=True):
    terms = {}
    if allow_const:
        c = rng.randrange(0, ring.p ** 2)
        if c:
            terms[(0,) * ring.r] = c
    for i in range(ring.r):
        c = rng.randrange(0, ring.p)
        if c:
            mono = tuple(1 if j == i else 0 for j in range(ring.r))
            terms[mono] = c
    return ring.elem(terms, prec)


def _grade_at_least(pres, m, max_escalations=2):
    """Certified check that the first m derived duals vanish."""

    def compute(prc):
        P = pres.at_precision(prc)
        if is_zero_module(P):
            return (True, [])
        flags = []
        for i in range(m):
            e = ext(P, i)
            flags.extend(e.flags)
            if not e.is_zero():
                return (False, flags)
        return (True, flags)

    return certify(compute, pres.prec, max_escalations)


def auslander_spotcheck(pres, trials=8, seed=0, report=None):
    """Every submodule of the m-th derived dual must have grade at least m;
    sampled on cyclic submodules spanned by random generator combinations
    with coefficients of degree at most one."""
    rep = report if report is not None else AuditReport("auslander_condition")
    rng = random.Random(seed)
    pd = projective_dimension(pres)
    if pd.value is None:
        rep.record(True, certified=pd.certified, flags=pd.flags)
        return rep
    for m in range(1, pd.value + 1):
        e = ext(pres, m)
        if e.is_zero():
            continue
        E = e.pres
        ring, prec = E.ring, E.prec
        for t in range(trials):
            v = [_small_element(ring, prec, rng) for _ in range(E.n)]
            if vec_is_zero(v):
                continue
            _, incl = kernel(ModuleMap(Presentation.free(ring, prec, 1), E, [v]))
            N = Presentation(ring, prec, 1, [list(row) for row in incl.matrix])
            got = _grade_at_least(N, m)
            rep.record(
                got.value,
                witness=_witness(
                    pres,
                    seed=seed,
                    trace={"m": m, "trial": t, "combo": [x.render() for x in v]},
                ),
                flags=list(e.flags) + list(got.flags),
                certified=got.certified and pd.certified,
            )
    return rep


def _staircase_dimension(pres):
    """Residue-field dimension of a finite-length module by counting the
    standard monomials under its leading module; an unresolved marker while
    any lead is suspect."""
    if is_zero_module(pres):
        return 0, []
    g = gr_module(pres)
    size = quotient_staircase_size(g.submodule)
    if g.uncertain:
        return unresolved_marker(size, pres.prec), ["uncertain_leading_terms"]
    return size, []


def local_duality_finite(pres, report=None):
    """Finite-length modules: lower derived duals vanish, the top one has the
    same residue-field dimension, and evaluation into the top double dual is
    an isomorphism."""
    rep = report if report is not None else AuditReport("local_duality_finite")
    d = pres.ring.d
    dim = canonical_dimension(pres)
    if not resolved(dim.value):
        rep.record(False, witness=_witness(pres, trace={"dim": dim.value}), flags=dim.flags, certified=False)
        return rep
    if not (dim.value is None or dim.value == 0):
        raise ValueError("finite-length check needs a dimension-zero module")

    def compute(prc):
        P = pres.at_precision(prc)
        flags = []
        if is_zero_module(P):
            return ([0, 0, True, True], flags)
        size, fl = _staircase_dimension(P)
        flags.extend(fl)
        e = ext(P, d)
        flags.extend(e.flags)
        if e.is_zero():
            esize = 0
        else:
            esize, fl = _staircase_dimension(e.pres)
            flags.extend(fl)
        lower = True
        for i in range(d):
            ei = ext(P, i)
            flags.extend(ei.flags)
            if not ei.is_zero():
                lower = False
                break
        ev = ev_level(P, d)
        flags.extend(ev.flags)
        tors, _ = kernel(ev.map)
        cok = cokernel(ev.map)
        iso = is_zero_module(tors) and is_zero_module(cok)
        return ([size, esize, lower, iso], flags)

    cert = certify(compute, pres.prec)
    size, esize, lower, iso = cert.value
    ok = (
        resolved(size)
        and resolved(esize)
        and size is not None
        and esize == size
        and lower
        and iso
    )
    rep.record(
        ok,
        witness=_witness(
            pres,
            trace={
                "module_size": size,
                "dual_size": esize,
                "lower_vanish": lower,
                "evaluation_iso": iso,
            },
        ),
        flags=cert.flags,
        certified=cert.certified and dim.certified,
    )
    return rep


def induction_check(pres, r_target, report=None):
    """Reinterpret the relation matrix over a larger abelian ring: grade and
    projective dimension must be preserved, dimension must grow by the
    number of added variables."""
    rep = report if report is not None else AuditReport("induction")
    ring = pres.ring
    if ring.mode != "abelian" or ring.base != "zp":
        raise ValueError("induction check is an abelian-mode instrument")
    s = ring.r
    if r_target < s:
        raise ValueError("target rank must not shrink")
    big = abelian(ring.p, r_target)
    prec = pres.prec
    pad = (0,) * (r_target - s)
    rows = [
        [big.elem({m + pad: c for m, c in e.terms.items()}, prec) for e in row]
        for row in pres.rows
    ]
    ind = Presentation(big, prec, pres.n, rows)
    certs = {
        "dim_small": canonical_dimension(pres),
        "dim_big": canonical_dimension(ind),
        "grade_small": grade(pres),
        "grade_big": grade(ind),
        "pd_small": projective_dimension(pres),
        "pd_big": projective_dimension(ind),
    }
    if not all(resolved(c.value) for c in certs.values()):
        ok = False
    elif certs["dim_small"].value is None:
        ok = certs["dim_big"].value is None
    else:
        ok = (
            certs["dim_big"].value == certs["dim_small"].value + (r_target - s)
            and certs["grade_big"].value == certs["grade_small"].value
            and certs["pd_big"].value == certs["pd_small"].value
        )
    rep.record(
        ok,
        witness=_witness(pres, trace={k: c.value for k, c in certs.items()}),
        flags=[f for c in certs.values() for f in c.flags],
        certified=all(c.certified for c in certs.values()),
    )
    return rep


def torsion_pseudonull_check(f, report=None):
    """A torsion quotient over a subring of fewer variables becomes
    pseudo-null once an added variable is quotiented out alongside it:
    checks the cyclic module on (f, last variable) over one more variable."""
    rep = report if report is not None else AuditReport("torsion_pseudonull")
    small = f.ring
    if small.mode != "abelian" or small.base != "zp":
        raise ValueError("pseudo-null promotion check is an abelian-mode instrument")
    s, prec = small.r, f.prec
    big = abelian(small.p, s + 1)
    fbig = big.elem({m + (0,): c for m, c in f.terms.items()}, prec)
    M = Presentation.cyclic(big, prec, [fbig, big.variable(s + 1, prec)])
    pn = is_pseudo_null(M)
    rep.record(
        pn.value is True,
        witness=_witness(M, trace={"f": f.render()}),
        flags=pn.flags,
        certified=pn.certified,
    )
    return rep


def matrix_oracle_check(prec=Precision(4, 6), trials=32, seed=0, ring=None, word_len=4, report=None):
    """Multiplies random generator words two ways: by the ring's rewriting
    rules, and by exact unitriangular matrix arithmetic whose result is
    re-expanded in the b coordinates with integer binomials."""
    rep = report if report is not None else AuditReport("matrix_oracle")
    H = ring if ring is not None else congruence_heisenberg(3)
    if H.mode != "rules":
        raise ValueError("the matrix oracle covers rules mode")
    p = H.p
    rng = random.Random(seed)
    amod = p ** (prec.a + 4)
    for t in range(trials):
        word = [(rng.randrange(1, H.r + 1), 1) for _ in range(word_len)]
        prod = H.one(prec)
        for idx, _e in word:
            prod = prod.mul(H.one(prec).add(H.variable(idx, prec)))
        coords = heis_word_to_coords(p, word)
        expansion = heis_expand(p, heis_coords_to_exponents(p, coords), prec.N, amod)
        oracle = H.elem(expansion, prec)
        rep.record(
            oracle == prod,
            witness={
                "ring": H.describe(),
                "precision": [prec.a, prec.N],
                "seed": seed,
                "trace": {
                    "word": [idx for idx, _ in word],
                    "rewritten": prod.render(),
                    "matrix_expansion": oracle.render(),
                },
            },
        )
    return rep


def symbol_multiplicativity_check(ring, prec=DEFAULT_PREC, trials=50, seed=0, report=None):
    """The leading form of a product equals the product of leading forms
    whenever all three are exact at precision."""
    rep = report if report is not None else AuditReport("symbol_multiplicativity")
    rng = random.Random(seed)
    done = 0
    guard = 0
    while done < trials and guard < trials * 40:
        guard += 1
        x = _random_element(ring, prec, rng)
        y = _random_element(ring, prec, rng)
        sx, cx = x.symbol()
        sy, cy = y.symbol()
        if not (cx and cy):
            continue
        z = x.mul(y)
        sz, cz = z.symbol()
        if not cz:
            continue
        done += 1
        expected = sx.mul(sy)
        rep.record(
            sz.terms == expected.terms,
            witness={
                "ring": ring.describe(),
                "precision": [prec.a, prec.N],
                "seed": seed,
                "trace": {"x": x.render(), "y": y.render()},
            },
        )
    return rep


def ring_validation_report(ring=None, prec=Precision(4, 6), report=None):
    """Wraps the ring table validator (rule valuations, associativity and
    distributivity sampling) as an audit instance."""
    rep = report if report is not None else AuditReport("ring_validation")
    H = ring if ring is not None else congruence_heisenberg(3)
    got = validate_ring(H, prec=prec)
    rep.record(got.ok, witness={"ring": H.describe(), "failures": got.failures})
    return rep


def _dim_at(P):
    """Single-precision dimension with its uncertainty flag; certification
    is left to the caller's stabilization loop, and a staircase with suspect
    leads hands that loop an unresolved marker instead of a settled number."""
    if is_zero_module(P):
        return None, []
    g = gr_module(P)
    dim = krull_dim(g.submodule)
    if g.uncertain:
        return unresolved_marker(dim, P.prec), ["uncertain_leading_terms"]
    return dim, []


def _mu_at(P):
    if is_zero_module(P):
        return 0, []
    layers, rho, flags = _p_layer_ranks(P, P.prec)
    mu = sum(x - rho for x in layers)
    if "uncertain_leading_terms" in flags:
        return unresolved_marker(mu, P.prec), flags
    return mu, flags


# residue-field Betti numbers by honest linear algebra


def _fp_rank(mat, p):
    rows = [list(r) for r in mat]
    if not rows or not rows[0]:
        return 0
    ncols = len(rows[0])
    rank = 0
    col = 0
    for col in range(ncols):
        piv = None
        for i in range(rank, len(rows)):
            if rows[i][col] % p:
                piv = i
                break
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        inv = pow(rows[rank][col], -1, p)
        for i in range(len(rows)):
            if i != rank and rows[i][col] % p:
                f = (rows[i][col] * inv) % p
                rows[i] = [(a - f * b) % p for a, b in zip(rows[i], rows[rank])]
        rank += 1
        if rank == len(rows):
            break
    return rank


def _fp_matrix(rows, ring):
    zero_mono = (0,) * ring.r
    return [[e.terms.get(zero_mono, 0) % ring.p for e in row] for row in rows]


def residue_betti_support(pres):
    """Top nonvanishing residue-field cohomology of the minimal resolution,
    recomputed by rank arithmetic over F_p instead of reading stored ranks.
    Returns (top index or None, list of cohomology dimensions)."""
    if is_zero_module(pres):
        return None, []
    ring = pres.ring
    res = resolution(pres, ring.d + 1)
    mats = []
    i = 1
    while True:
        A = res.matrix_at(i)
        if A is None:
            break
        mats.append(_fp_matrix(A, ring))
        i += 1
    dims = res.betti
    out = []
    top = None
    for q in range(len(dims)):
        rank_out = _fp_rank(mats[q - 1], ring.p) if q >= 1 and q - 1 < len(mats) else 0
        rank_in = _fp_rank(mats[q], ring.p) if q < len(mats) else 0
        h = dims[q] - rank_out - rank_in
        out.append(h)
        if h > 0:
            top = q
    return top, out


def torsion_defect_check(pres, report=None):
    """For a torsion module the comparison with the double of its first
    derived dual has pseudo-null kernel and cokernel."""
    rep = report if report is not None else AuditReport("torsion_defects")
    d = pres.ring.d

    def compute(prc):
        P = pres.at_precision(prc)
        ev = ev_level(P, 1)
        tors, _ = kernel(ev.map)
        cok = cokernel(ev.map)
        dk, f1 = _dim_at(tors)
        dc, f2 = _dim_at(cok)
        flags = list(ev.flags) + f1 + f2
        if not (resolved(dk) and resolved(dc)):
            return (unresolved_marker([dk, dc], prc), flags)
        ok = (dk is None or dk <= d - 2) and (dc is None or dc <= d - 2)
        return (ok, flags)

    cert = certify(compute, pres.prec, 2)
    rep.record(cert.value is True, witness=_witness(pres), flags=cert.flags, certified=cert.certified)
    return rep


def e1_torsion_agreement_check(pres, report=None):
    """The first derived dual only sees the torsion part: the two duals are
    pseudo-isomorphic, so they must agree in mu and, whenever either side
    rises above the pseudo-null range, in dimension as well. Grade agreement
    follows from the dimension. A pseudo-null dual compares equal to a zero
    one: the relation permits exactly that much slack."""
    rep = report if report is not None else AuditReport("e1_torsion_agreement")
    cutoff = pres.ring.d - 2

    def profile(P):
        e = ext(P, 1)
        if e.is_zero():
            return ["pseudo_null", 0], list(e.flags)
        dim, f1 = _dim_at(e.pres)
        mu, f2 = _mu_at(e.pres)
        flags = list(e.flags) + f1 + f2
        if not (resolved(dim) and resolved(mu)):
            return None, flags
        cls = "pseudo_null" if dim is None or dim <= cutoff else dim
        return [cls, mu], flags

    def compute(prc):
        P = pres.at_precision(prc)
        T, _, fl = torsion_submodule(P)
        left, f1 = profile(P)
        right, f2 = profile(T)
        flags = fl + f1 + f2
        if left is None or right is None:
            return (unresolved_marker(None, prc), flags)
        return (left == right, flags)

    cert = certify(compute, pres.prec, 2)
    rep.record(cert.value is True, witness=_witness(pres), flags=cert.flags, certified=cert.certified)
    return rep


def depth_agreement_check(pres, expected=None, report=None):
    """Depth from the vanishing range of the derived duals against depth
    from the residue-field injective window, abelian mode only.

    The literal Hom complex computes over the coefficient truncation, and
    the truncated socle genuinely exceeds the untruncated one whenever a
    relation mixes p-content with a non-monomial polynomial factor: the
    wrap p * p^(a-1) = 0 is an exact truncation identity at every
    precision, and unit tails let it enter through S-pair chains that the
    annihilator taint cannot see. Measured on cyclic modules over two
    variables at p = 3: relations p^s * b1 agree with the dual route for
    s = 0..3 at every precision, while p^s * b1 * (1 + b1) disagrees
    stably for every s >= 1. The cross-check therefore only runs on
    monomial-annihilator fixtures, where both routes must also match the
    known depth."""
    rep = report if report is not None else AuditReport("depth_agreement")
    a = depth_at_precision(pres)
    b = depth_via_hom(pres)
    ok = a == b and (expected is None or a == expected)
    rep.record(
        ok,
        witness=_witness(
            pres,
            trace={"dual_route": a, "hom_route": b, "expected": expected},
        ),
    )
    return rep


def depth_fixture_check(count=10, seed=0, report=None):
    """Both depth routes against the known answer on direct sums of
    monomial-annihilator cyclic modules, the regime where the literal Hom
    complex is reliable."""
    rep = report if report is not None else AuditReport("depth_agreement")
    rng = random.Random(seed)
    ring = abelian(3, 2)
    prec = Precision(4, 8)
    known = {"free": 3, "p": 2, "p2": 2, "b": 2, "k": 0, "pb": 1}
    for _ in range(count):
        kinds = [rng.choice(_KIND_CHOICES[2]) for _ in range(rng.randrange(1, 4))]
        parts = []
        for kind in kinds:
            ann, _dim = _component(ring, prec, kind, rng)
            parts.append(
                Presentation.free(ring, prec, 1)
                if not ann
                else Presentation.cyclic(ring, prec, ann)
            )
        M = parts[0]
        for part in parts[1:]:
            M = direct_sum(M, part)
        depth_agreement_check(M, expected=min(known[k] for k in kinds), report=rep)
    return rep


# fixture families


_KIND_CHOICES = {1: ("free", "p", "p2", "b", "k"), 2: ("free", "p", "p2", "b", "k", "pb")}


def _component(ring, prec, kind, rng):
    """Annihilator list and known dimension for one cyclic test component."""
    p, d = ring.p, ring.d
    if kind == "free":
        return [], d
    if kind == "p":
        return [ring.const(p, prec)], d - 1
    if kind == "p2":
        return [ring.const(p * p, prec)], d - 1
    if kind == "b":
        i = rng.randrange(1, ring.r + 1)
        return [ring.variable(i, prec)], d - 1
    if kind == "k":
        return [ring.const(p, prec)] + [
            ring.variable(i, prec) for i in range(1, ring.r + 1)
        ], 0
    if kind == "pb":
        return [ring.const(p, prec), ring.variable(1, prec)], d - 2
    raise ValueError(kind)


def _same_submodule(pres, rows_a, rows_b):
    ring, prec, n = pres.ring, pres.prec, pres.n
    base = [list(r) for r in pres.rows]
    sa = standard_basis(ring, prec, n, [list(r) for r in rows_a] + base)
    if not all(sa.member(list(b)) for b in rows_b):
        return False
    sb = standard_basis(ring, prec, n, [list(r) for r in rows_b] + base)
    return all(sb.member(list(a)) for a in rows_a)


def filtration_fixture_check(count=20, seed=0, p=3, prec=DEFAULT_PREC, report=None):
    """Direct sums of cyclic test modules whose filtration is known per
    component: each stage must equal the expected coordinate span, the
    bottom stage must match the top double dual at the invariant level, and
    stage formation must commute with passing to the first summand."""
    rep = report if report is not None else AuditReport("dimension_filtration")
    rng = random.Random(seed)
    for t in range(count):
        r = rng.choice((1, 2))
        ring = abelian(p, r)
        d = ring.d
        kinds = [rng.choice(_KIND_CHOICES[r]) for _ in range(rng.randrange(1, 4))]
        n = len(kinds)
        rows = []
        dims = []
        for g, kind in enumerate(kinds):
            anns, dg = _component(ring, prec, kind, rng)
            dims.append(dg)
            for a_el in anns:
                row = zero_vec(ring, prec, n)
                row[g] = a_el
                rows.append(row)
        M = Presentation(ring, prec, n, rows)
        filt = dimension_filtration(M)
        ok = True
        trace = {"kinds": kinds, "instance": t}
        for i in range(d + 1):
            _, incl_rows = filt.steps[i]
            expected = [unit_vec(ring, prec, n, g) for g, dg in enumerate(dims) if dg <= i]
            if not _same_submodule(M, incl_rows, expected):
                ok = False
                trace["stage"] = i
                break
        if ok:
            # bottom stage against the top double dual, at the invariant level
            t0 = filt.steps[0][0]
            dd = ext(ext(M, d).pres, d).pres
            size0, fl0 = _staircase_dimension(t0)
            size1, fl1 = _staircase_dimension(dd)
            pair = (
                is_zero_module(t0),
                size0,
                minimal_generator_count(t0) if not is_zero_module(t0) else 0,
            )
            pair_dd = (
                is_zero_module(dd),
                size1,
                minimal_generator_count(dd) if not is_zero_module(dd) else 0,
            )
            if not (resolved(size0) and resolved(size1)) or pair != pair_dd:
                ok = False
                trace["stage"] = "bottom_vs_double_dual"
                trace["got"] = [list(pair), list(pair_dd)]
        if ok and n >= 2:
            # left exactness along the first-summand inclusion; the summand's
            # relations are the rows supported on coordinate 0
            sub_rows = [[row[0]] for row in rows if not row[0].is_zero()]
            MA = Presentation(ring, prec, 1, sub_rows)
            filtA = dimension_filtration(MA)
            for i in range(d + 1):
                _, inclA = filtA.steps[i]
                embedded = []
                for rowa in inclA:
                    row = zero_vec(ring, prec, n)
                    row[0] = rowa[0]
                    embedded.append(row)
                _, incl_rows = filt.steps[i]
                sb_big = standard_basis(
                    ring, prec, n, [list(x) for x in incl_rows] + [list(x) for x in rows]
                )
                if not all(sb_big.member(row) for row in embedded):
                    ok = False
                    trace["stage"] = ("summand_forward", i)
                    break
                restricted = [
                    [row[0]]
                    for row in incl_rows
                    if all(e.is_zero() for e in row[1:]) and not row[0].is_zero()
                ]
                sb_small = standard_basis(
                    ring, prec, 1, [list(x) for x in inclA] + [list(x) for x in sub_rows]
                )
                if not all(sb_small.member(row) for row in restricted):
                    ok = False
                    trace["stage"] = ("summand_backward", i)
                    break
        rep.record(
            ok,
            witness=_witness(M, seed=seed, trace=trace),
            flags=filt.flags,
            certified=True,
        )
    return rep


def _scramble(pres, rng, ops=6):
    """Mix a presentation by unimodular row and column operations."""
    ring, prec, n = pres.ring, pres.prec, pres.n
    p = ring.p
    rows = [list(r) for r in pres.rows]
    units = [c for c in range(1, p * p) if c % p]
    for _ in range(ops):
        kind = rng.randrange(4)
        if kind == 0 and len(rows) >= 2:
            i, j = rng.sample(range(len(rows)), 2)
            lam = _small_element(ring, prec, rng)
            rows[i] = vec_add(rows[i], vec_left_mul(lam, rows[j]))
        elif kind == 1 and len(rows) >= 2:
            i, j = rng.sample(range(len(rows)), 2)
            rows[i], rows[j] = rows[j], rows[i]
        elif kind == 2 and n >= 2:
            i, j = rng.sample(range(n), 2)
            lam = _small_element(ring, prec, rng)
            for row in rows:
                row[j] = row[j].add(row[i].mul(lam))
        elif rows:
            i = rng.randrange(len(rows))
            u = ring.const(rng.choice(units), prec)
            rows[i] = vec_left_mul(u, rows[i])
    return Presentation(ring, prec, n, rows)


def mu_structure_check(count=20, seed=0, p=3, prec=DEFAULT_PREC, report=None):
    """Sums of cyclic p-power pieces plus pseudo-null p-torsion noise: mu
    adds up, the exponent multiset is recovered, and unimodular scrambling
    of the presentation does not change either."""
    rep = report if report is not None else AuditReport("mu_structure")
    rng = random.Random(seed)
    for t in range(count):
        ring = abelian(p, 2)
        ns = sorted((rng.randrange(1, 4) for _ in range(rng.randrange(1, 4))), reverse=True)
        noise = rng.choice((None, "k", "pb"))
        n = len(ns) + (1 if noise else 0)
        rows = []
        for g, m in enumerate(ns):
            row = zero_vec(ring, prec, n)
            row[g] = ring.const(p ** m, prec)
            rows.append(row)
        if noise:
            anns, _ = _component(ring, prec, noise, rng)
            for a_el in anns:
                row = zero_vec(ring, prec, n)
                row[n - 1] = a_el
                rows.append(row)
        M = Presentation(ring, prec, n, rows)
        S = _scramble(M, rng)
        certs = [
            mu_invariant(M),
            p_torsion_exponents(M),
            mu_invariant(S),
            p_torsion_exponents(S),
        ]
        ok = (
            certs[0].value == sum(ns)
            and certs[1].value == ns
            and certs[2].value == sum(ns)
            and certs[3].value == ns
        )
        rep.record(
            ok,
            witness=_witness(
                S, seed=seed, trace={"expected": ns, "got": [c.value for c in certs]}
            ),
            flags=[f for c in certs for f in c.flags],
            certified=all(c.certified for c in certs),
        )
    return rep


def mu_additivity_check(count=20, seed=0, p=3, prec=DEFAULT_PREC, report=None):
    """mu is additive on split short exact sequences."""
    rep = report if report is not None else AuditReport("mu_additivity")
    rng = random.Random(seed)
    made = 0
    while made < count:
        A = random_presentation(rng, p, prec)
        B = random_presentation(rng, p, prec)
        if A.ring.r != B.ring.r:
            continue
        made += 1
        certs = [mu_invariant(A), mu_invariant(B), mu_invariant(direct_sum(A, B))]
        vals = [c.value for c in certs]
        ok = all(resolved(v) for v in vals) and vals[2] == vals[0] + vals[1]
        rep.record(
            ok,
            witness=_witness(A, seed=seed, trace={"mu": [c.value for c in certs]}),
            flags=[f for c in certs for f in c.flags],
            certified=all(c.certified for c in certs),
        )
    return rep


def finite_length_suite(count=10, seed=0, p=3, prec=DEFAULT_PREC, report=None):
    """Constructed finite-length modules run through the duality check."""
    rep = report if report is not None else AuditReport("local_duality_finite")
    rng = random.Random(seed)
    for _ in range(count):
        r = rng.choice((1, 2))
        ring = abelian(p, r)
        anns = [ring.const(p ** rng.randrange(1, 3), prec)]
        for i in range(1, r + 1):
            anns.append(ring.variable(i, prec, power=rng.randrange(1, 3)))
        if rng.randrange(2):
            anns.append(_small_element(ring, prec, rng))
        M = Presentation.cyclic(ring, prec, anns)
        if rng.randrange(2):
            extra = Presentation.cyclic(
                ring,
                prec,
                [ring.const(p, prec)] + [ring.variable(i, prec) for i in range(1, r + 1)],
            )
            M = direct_sum(M, extra)
        local_duality_finite(M, report=rep)
    return rep


def induction_suite(count=10, seed=0, p=3, prec=DEFAULT_PREC, report=None):
    """Random one-variable modules reinterpreted over two variables."""
    rep = report if report is not None else AuditReport("induction")
    rng = random.Random(seed)
    made = 0
    while made < count:
        M = random_presentation(rng, p, prec)
        if M.ring.r != 1:
            continue
        made += 1
        induction_check(M, 2, report=rep)
    return rep


def change_of_rings_check(count=10, seed=0, p=3, prec=DEFAULT_PREC, report=None):
    """For p-killed modules the derived duals over the mod-p algebra match
    the next derived dual over the full algebra. Compared through invariants
    that do not depend on which ring presents the module: vanishing,
    dimension, minimal generator count, and mod-p rank against mu."""
    rep = report if report is not None else AuditReport("change_of_rings")
    rng = random.Random(seed)
    made = 0
    guard = 0
    while made < count and guard < count * 10:
        guard += 1
        base = random_presentation(rng, p=p, prec=prec)
        ring = base.ring
        rows = [list(r) for r in base.rows]
        for g in range(base.n):
            row = zero_vec(ring, prec, base.n)
            row[g] = ring.const(p, prec)
            rows.append(row)
        X = Presentation(ring, prec, base.n, rows)
        if is_zero_module(X):
            continue
        made += 1

        def compute(prc, X=X, ring=ring):
            P = X.at_precision(prc)
            Pp = mod_p_presentation(P)
            flags = []
            agree = True
            settled = True
            pairs = []
            for i in range(ring.r + 1):
                left_e = ext(Pp, i)
                right_e = ext(P, i + 1)
                flags.extend(left_e.flags)
                flags.extend(right_e.flags)
                if left_e.is_zero():
                    left = [True, None, 0, 0]
                else:
                    dl, f1 = _dim_at(left_e.pres)
                    rk = module_rank(left_e.pres, max_escalations=0)
                    left = [False, dl, minimal_generator_count(left_e.pres), rk.value]
                    flags.extend(f1)
                    flags.extend(rk.flags)
                if right_e.is_zero():
                    right = [True, None, 0, 0]
                else:
                    dr, f2 = _dim_at(right_e.pres)
                    mu, f3 = _mu_at(right_e.pres)
                    right = [False, dr, minimal_generator_count(right_e.pres), mu]
                    flags.extend(f2)
                    flags.extend(f3)
                settled = settled and all(resolved(x) for x in left + right)
                pairs.append([left, right])
                if left != right:
                    agree = False
            if not settled:
                return (unresolved_marker(pairs, prc), flags)
            return ([agree, pairs], flags)

        cert = certify(compute, prec, 2)
        if resolved(cert.value):
            agree, pairs = cert.value
        else:
            agree, pairs = False, cert.value
        rep.record(
            agree,
            witness=_witness(X, seed=seed, trace={"profiles": pairs}),
            flags=cert.flags,
            certified=cert.certified,
        )
    return rep


def torsion_pseudonull_suite(p=3, prec=DEFAULT_PREC, report=None):
    """The fixed promotion instances: f = p, f = b1, f = p*b1, f a unit."""
    rep = report if report is not None else AuditReport("torsion_pseudonull")
    ring = abelian(p, 1)
    b1 = ring.variable(1, prec)
    cases = [
        ring.const(p, prec),
        b1,
        ring.const(p, prec).mul(b1),
        ring.one(prec).add(b1),
    ]
    for f in cases:
        torsion_pseudonull_check(f, report=rep)
    return rep


def corpus_run(seed=0, size=50, p=3, prec=DEFAULT_PREC):
    """Random-presentation audit bundle: the dimension identity with both
    grade routes, agreement of the three projective-dimension routes, depth
    complementarity, the grade condition on derived duals, torsion defects,
    and torsion-part agreement of the first derived dual. Returns a dict of
    AuditReports keyed by check name."""
    mods = corpus(size, seed, p, prec)
    names = (
        "dimension_identity",
        "pd_routes",
        "pd_depth_complement",
        "auslander_condition",
        "torsion_defects",
        "e1_torsion_agreement",
    )
    reports = {name: AuditReport(name) for name in names}
    torsion_seen = 0
    agreement_seen = 0
    for idx, M in enumerate(mods):
        d = M.ring.d
        dim = canonical_dimension(M)
        profile = derived_dual_profile(M)
        pdc = projective_dimension(M)
        zero = dim.value is None
        hits = [i for i, h in enumerate(profile.value) if h]
        grade_ext = hits[0] if hits else None
        pd_ext = hits[-1] if hits else None
        depth_dual = None if not hits else d - hits[-1]
        certified = dim.certified and profile.certified and pdc.certified
        flags = dim.flags + profile.flags + pdc.flags
        # dimension identity, grade computed through both routes
        ok_dim = (grade_ext is None) if zero else (
            grade_ext is not None and resolved(dim.value) and dim.value + grade_ext == d
        )
        reports["dimension_identity"].record(
            ok_dim,
            witness=_witness(M, seed=seed, trace={"index": idx, "dim": dim.value, "grade": grade_ext}),
            flags=flags,
            certified=certified,
        )
        # three projective dimension routes
        pd_fp, hdims = residue_betti_support(M)
        ok_pd = pdc.value == pd_ext == pd_fp
        reports["pd_routes"].record(
            ok_pd,
            witness=_witness(
                M,
                seed=seed,
                trace={"index": idx, "betti": pdc.value, "dual_support": pd_ext, "residue_support": pd_fp, "residue_dims": hdims},
            ),
            flags=flags,
            certified=certified,
        )
        # projective dimension and depth are complementary
        ok_ab = True if zero else (
            pdc.value is not None and depth_dual is not None and pdc.value + depth_dual == d
        )
        reports["pd_depth_complement"].record(
            ok_ab,
            witness=_witness(M, seed=seed, trace={"index": idx, "pd": pdc.value, "depth": depth_dual}),
            flags=flags,
            certified=certified,
        )
        auslander_spotcheck(M, trials=8, seed=seed + idx, report=reports["auslander_condition"])
        if not zero and torsion_seen < 20:
            rank = module_rank(M)
            if rank.value == 0:
                torsion_seen += 1
                torsion_defect_check(M, report=reports["torsion_defects"])
        if not zero and agreement_seen < 20:
            agreement_seen += 1
            e1_torsion_agreement_check(M, report=reports["e1_torsion_agreement"])
    return reports


def run_all(seed=0, p=3, prec=DEFAULT_PREC, corpus_size=50):
    """Every audit family; returns a dict of AuditReports."""
    out = corpus_run(seed=seed, size=corpus_size, p=p, prec=prec)
    out["dimension_filtration"] = filtration_fixture_check(seed=seed, p=p, prec=prec)
    out["depth_agreement"] = depth_fixture_check(seed=seed)
    out["mu_structure"] = mu_structure_check(seed=seed, p=p, prec=prec)
    out["mu_additivity"] = mu_additivity_check(seed=seed, p=p, prec=prec)
    out["local_duality_finite"] = finite_length_suite(seed=seed, p=p, prec=prec)
    out["induction"] = induction_suite(seed=seed, p=p, prec=prec)
    out["torsion_pseudonull"] = torsion_pseudonull_suite(p=p, prec=prec)
    out["change_of_rings"] = change_of_rings_check(seed=seed, p=p, prec=prec)
    out["ring_validation"] = ring_validation_report()
    out["matrix_oracle"] = matrix_oracle_check(seed=seed)
    out["symbol_multiplicativity"] = symbol_multiplicativity_check(
        congruence_heisenberg(3), seed=seed
    )
    return out


SUITES = {
    "corpus": lambda seed, trials: corpus_run(seed=seed, size=trials or 50),
    "auslander": lambda seed, trials: {
        "auslander_condition": _corpus_auslander(seed, trials or 12)
    },
    "filtration": lambda seed, trials: {
        "dimension_filtration": filtration_fixture_check(count=trials or 20, seed=seed),
        "depth_agreement": depth_fixture_check(count=trials or 10, seed=seed),
    },
    "mu": lambda seed, trials: {
        "mu_structure": mu_structure_check(count=trials or 20, seed=seed),
        "mu_additivity": mu_additivity_check(count=trials or 20, seed=seed),
    },
    "local-duality": lambda seed, trials: {
        "local_duality_finite": finite_length_suite(count=trials or 10, seed=seed)
    },
    "induction": lambda seed, trials: {
        "induction": induction_suite(count=trials or 10, seed=seed),
        "torsion_pseudonull": torsion_pseudonull_suite(),
        "change_of_rings": change_of_rings_check(count=trials or 10, seed=seed),
    },
    "oracle": lambda seed, trials: {
        "ring_validation": ring_validation_report(),
        "matrix_oracle": matrix_oracle_check(trials=trials or 32, seed=seed),
        "symbol_multiplicativity": symbol_multiplicativity_check(
            congruence_heisenberg(3), trials=trials or 50, seed=seed
        ),
    },
    "all": lambda seed, trials: run_all(seed=seed),
}


def _corpus_auslander(seed, size):
    rep = AuditReport("auslander_condition")
    for idx, M in enumerate(corpus(size, seed)):
        auslander_spotcheck(M, trials=8, seed=seed + idx, report=rep)
    return rep
