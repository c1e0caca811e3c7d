"""Structure invariants of presented modules.

Every numeric invariant is wrapped in the stabilization loop: the value is
recomputed at escalated precision until two consecutive runs agree, and the
result records whether that happened. Presentations are re-read at each
precision from their canonical integer entries, which are exact data.
"""

from .graded import krull_dim
from .homology import bidual_map, ev_level, ext, mat_mul, resolution
from .ring import Precision, abelian_mod_p
from .sbasis import (
    ModuleMap,
    Presentation,
    CertResult,
    certify,
    cokernel,
    gr_module,
    is_zero_module,
    kernel,
    minimal_generator_count,
    resolved,
    standard_basis,
    unit_vec,
    unresolved_marker,
    vec_is_zero,
    zero_vec,
)


def _derive(cert, f):
    """New certificate for a value computed from an already-certified one."""
    return CertResult(f(cert.value), cert.certified, cert.escalations, cert.history, cert.flags)


def canonical_dimension(pres, max_escalations=3):
    """Dimension of the module: Krull dimension of its associated graded
    module over the symbol polynomial ring. None for the zero module."""

    def compute(prc):
        P = pres.at_precision(prc)
        if is_zero_module(P):
            return (None, [])
        g = gr_module(P)
        dim = krull_dim(g.submodule)
        if g.uncertain:
            return (unresolved_marker(dim, prc), ["uncertain_leading_terms"])
        return (dim, [])

    return certify(compute, pres.prec, max_escalations)


def derived_dual_profile(pres, max_escalations=3):
    """Certified list over i = 0..d of whether E^i(M) is nonzero."""
    d = pres.ring.d

    def compute(prc):
        P = pres.at_precision(prc)
        profile = []
        flags = []
        for i in range(d + 1):
            e = ext(P, i)
            profile.append(not e.is_zero())
            flags.extend(e.flags)
        return (profile, flags)

    return certify(compute, pres.prec, max_escalations)


def grade(pres, max_escalations=3):
    """Least i with E^i(M) nonzero; None for the zero module."""

    def first_true(profile):
        for i, hit in enumerate(profile):
            if hit:
                return i
        return None

    return _derive(derived_dual_profile(pres, max_escalations), first_true)


def depth(pres, max_escalations=3):
    """Certified depth, as d minus the top nonvanishing derived dual."""
    d = pres.ring.d

    def from_profile(profile):
        top = None
        for i, hit in enumerate(profile):
            if hit:
                top = i
        return None if top is None else d - top

    return _derive(derived_dual_profile(pres, max_escalations), from_profile)


def is_cohen_macaulay(pres, max_escalations=3):
    """True when exactly one derived dual survives (depth equals dimension);
    vacuously true for the zero module."""

    def single(profile):
        return sum(1 for hit in profile if hit) <= 1

    return _derive(derived_dual_profile(pres, max_escalations), single)


def projective_dimension(pres, max_escalations=3):
    """Length of the minimal free resolution; None for the zero module."""

    def compute(prc):
        P = pres.at_precision(prc)
        if is_zero_module(P):
            return (None, [])
        res = resolution(P, P.ring.d + 1)
        pd = res.pd()
        flags = [] if pd is not None else ["resolution_overflow"]
        return (pd, flags)

    return certify(compute, pres.prec, max_escalations)


def module_rank(pres, max_escalations=3):
    """Generic rank: generator count minus the number of coordinates hit by
    certified leading terms of the relation span. The leading module of a
    submodule has the same rank, and a monomial module's rank counts its
    occupied components."""

    def compute(prc):
        P = pres.at_precision(prc)
        sb = P.sb()
        flags = []
        if P.ring.mode != "abelian":
            # no fraction skew field is constructed; the symbol-level count
            # is the only rank available here
            flags.append("rank_via_symbols")
        occupied = {c for (c, _, _) in sb.leading_data()}
        rank = P.n - len(occupied)
        if sb.uncertain_leads:
            flags.append("uncertain_leading_terms")
            return (unresolved_marker(rank, prc), flags)
        return (rank, flags)

    return certify(compute, pres.prec, max_escalations)


def is_torsion(pres, max_escalations=3):
    return _derive(
        module_rank(pres, max_escalations),
        lambda r: r == 0 if resolved(r) else r,
    )


def is_pseudo_null(pres, max_escalations=3):
    """Dimension at most d - 2 (zero module included)."""
    d = pres.ring.d
    return _derive(
        canonical_dimension(pres, max_escalations),
        lambda dim: (dim is None or dim <= d - 2) if resolved(dim) else dim,
    )


def torsion_submodule(pres):
    """Kernel of the evaluation map into the double dual, with its inclusion
    back into the module. Computed at the presentation's own precision."""
    ev = bidual_map(pres)
    tors, incl = kernel(ev.map)
    return tors, incl, list(ev.flags)


def is_torsion_free(pres, max_escalations=3):
    def compute(prc):
        P = pres.at_precision(prc)
        ev = bidual_map(P)
        tors, _ = kernel(ev.map)
        return (is_zero_module(tors), list(ev.flags))

    return certify(compute, pres.prec, max_escalations)


def is_reflexive(pres, max_escalations=3):
    def compute(prc):
        P = pres.at_precision(prc)
        ev = bidual_map(P)
        tors, _ = kernel(ev.map)
        cok = cokernel(ev.map)
        return (is_zero_module(tors) and is_zero_module(cok), list(ev.flags))

    return certify(compute, pres.prec, max_escalations)


# p-power layers


def _occupied(leads, unit_coefficient_only=False):
    if unit_coefficient_only:
        return {c for (c, _, e) in leads if e == 0}
    return {c for (c, _, _) in leads}


def _p_layer_ranks(P, prc):
    """Ranks over the mod-p quotient of the layers p^i M / p^(i+1) M,
    together with the generic rank they must settle to. The layer is
    presented by the transport ideal {x : p^i x lands in the relation span
    plus p^(i+1)}, whose unit-coefficient leading terms cut the layer's
    leading module."""
    ring, n = P.ring, P.n
    p = ring.p
    flags = []
    sbP = P.sb()
    if sbP.uncertain_leads:
        flags.append("uncertain_leading_terms")
    rho = n - len(_occupied(sbP.leading_data()))
    layers = []
    stabilized = False
    free_rows = Presentation.free(ring, prc, n)
    for i in range(prc.a):
        target_rows = [list(r) for r in P.rows]
        for g in range(n):
            row = zero_vec(ring, prc, n)
            row[g] = ring.const(p ** (i + 1), prc)
            target_rows.append(row)
        S = Presentation(ring, prc, n, target_rows)
        scale = [
            [ring.const(p**i, prc) if h == g else ring.zero(prc) for h in range(n)]
            for g in range(n)
        ]
        K, incl = kernel(ModuleMap(free_rows, S, scale))
        ksb = standard_basis(ring, prc, n, incl.matrix)
        if ksb.uncertain_leads:
            flags.append("uncertain_leading_terms")
        d_i = n - len(_occupied(ksb.leading_data(), unit_coefficient_only=True))
        if d_i < rho:
            flags.append("layer_rank_below_generic_rank")
            d_i = rho
        if d_i == rho:
            stabilized = True
            break
        layers.append(d_i)
    if not stabilized:
        flags.append("p_exponent_at_precision_limit")
    return layers, rho, flags


def mu_invariant(pres, max_escalations=3):
    """Total p-power multiplicity: the sum over i of the excess of the
    mod-p rank of p^i M / p^(i+1) M over the generic rank."""

    def compute(prc):
        P = pres.at_precision(prc)
        if is_zero_module(P):
            return (0, [])
        layers, rho, flags = _p_layer_ranks(P, prc)
        mu = sum(d - rho for d in layers)
        if "uncertain_leading_terms" in flags:
            return (unresolved_marker(mu, prc), flags)
        return (mu, flags)

    return certify(compute, pres.prec, max_escalations)


def mu_report(pres, max_escalations=3):
    """Certified [mu, chain ranks]: the mod-p ranks of the successive
    p-power layers of the torsion part (free rank subtracted), which are
    non-increasing and sum to mu."""

    def compute(prc):
        P = pres.at_precision(prc)
        if is_zero_module(P):
            return ([0, []], [])
        layers, rho, flags = _p_layer_ranks(P, prc)
        chain = [d - rho for d in layers]
        if "uncertain_leading_terms" in flags:
            return (unresolved_marker([sum(chain), chain], prc), flags)
        return ([sum(chain), chain], flags)

    return certify(compute, pres.prec, max_escalations)


def p_torsion_exponents(pres, max_escalations=3):
    """Multiset of exponents m with the module pseudo-isomorphic to the sum
    of cyclic pieces Lambda/p^m, for p-power-torsion input. The exponent
    multiset is the conjugate partition of the layer rank sequence, which
    pseudo-null errors cannot shift. Raises if the module is not killed by
    a p power visible at the working precision."""
    base = pres.at_precision(Precision(*pres.prec))
    if not is_zero_module(base):
        sb = base.sb()
        p = base.ring.p
        killed = False
        for k in range(1, base.prec.a):
            if all(
                sb.member(
                    [
                        base.ring.const(p**k, base.prec) if h == g else base.ring.zero(base.prec)
                        for h in range(base.n)
                    ]
                )
                for g in range(base.n)
            ):
                killed = True
                break
        if not killed:
            raise ValueError(
                "module is not annihilated by a p power below the working precision"
            )

    def compute(prc):
        P = pres.at_precision(prc)
        if is_zero_module(P):
            return ([], [])
        layers, rho, flags = _p_layer_ranks(P, prc)
        counts = [d - rho for d in layers]
        exps = []
        if counts:
            for t in range(1, counts[0] + 1):
                exps.append(sum(1 for c in counts if c >= t))
        exps.sort(reverse=True)
        if "uncertain_leading_terms" in flags:
            return (unresolved_marker(exps, prc), flags)
        return (exps, flags)

    return certify(compute, pres.prec, max_escalations)


def decomposition_report(pres, max_escalations=3):
    """Exponent multiset together with the mu bookkeeping that pins it:
    exponents, mu, chain ranks, and whether the conjugate-partition identity
    between them holds."""
    exps = p_torsion_exponents(pres, max_escalations)
    chain = mu_report(pres, max_escalations)
    settled = resolved(exps.value) and resolved(chain.value)
    if settled:
        mu, ranks = chain.value
        consistent = sum(exps.value) == mu and all(
            sum(1 for n in exps.value if n >= j + 1) == d for j, d in enumerate(ranks)
        )
    else:
        mu, ranks, consistent = chain.value, None, False
    return {
        "exponents": exps.value,
        "mu": mu,
        "chain_ranks": ranks,
        "consistent": consistent,
        "certification": "certified" if exps.certified and chain.certified else "heuristic",
        "escalations": max(exps.escalations, chain.escalations),
        "flags": sorted(set(exps.flags) | set(chain.flags)),
    }


# canonical dimension filtration


class DimensionFiltration:
    """Chain of submodules T_0 <= T_1 <= ... <= T_d = M, where T_i is the
    largest submodule of dimension at most i. steps[i] = (presentation,
    inclusion rows into M)."""

    __slots__ = ("pres", "steps", "flags")

    def __init__(self, pres, steps, flags):
        self.pres = pres
        self.steps = steps
        self.flags = flags


def dimension_filtration(pres):
    """Build the dimension filtration by repeated evaluation kernels: the
    kernel of T -> E^c E^c T cuts the next stage once the grade of T has
    reached c."""
    ring, prec = pres.ring, pres.prec
    d = ring.d
    flags = []
    cur = pres
    cur_incl = [unit_vec(ring, prec, pres.n, g) for g in range(pres.n)]
    steps = {d: (pres, cur_incl)}
    for c in range(0, d):
        i = d - 1 - c
        if cur.n == 0 or is_zero_module(cur):
            zero = Presentation.zero(ring, prec)
            steps[i] = (zero, [])
            cur = zero
            cur_incl = []
            continue
        ev = ev_level(cur, c)
        flags.extend(ev.flags)
        ker_pres, kin = kernel(ev.map)
        incl_rows = mat_mul(kin.matrix, cur_incl, ring, prec, pres.n)
        steps[i] = (ker_pres, incl_rows)
        cur = ker_pres
        cur_incl = incl_rows
    ordered = [steps[i] for i in range(d + 1)]
    return DimensionFiltration(pres, ordered, flags)


def filtration_summary(pres, max_escalations=3):
    """Certified per-stage data [i, is zero, dimension] for the dimension
    filtration."""

    def compute(prc):
        P = pres.at_precision(prc)
        filt = dimension_filtration(P)
        out = []
        uncertain = False
        for i, (stage, _) in enumerate(filt.steps):
            if stage.n == 0 or is_zero_module(stage):
                out.append([i, True, None])
            else:
                g = gr_module(stage)
                uncertain = uncertain or g.uncertain
                out.append([i, False, krull_dim(g.submodule)])
        if uncertain:
            return (unresolved_marker(out, prc), list(filt.flags) + ["uncertain_leading_terms"])
        return (out, list(filt.flags))

    return certify(compute, pres.prec, max_escalations)


def mod_p_presentation(pres):
    """Change of rings to the mod-p coefficient algebra, for modules killed
    by p over an abelian context."""
    ring, prec = pres.ring, pres.prec
    if ring.mode != "abelian" or ring.base != "zp":
        raise ValueError("change of rings needs an abelian integral context")
    sb = pres.sb()
    p = ring.p
    for g in range(pres.n):
        probe = [
            ring.const(p, prec) if h == g else ring.zero(prec) for h in range(pres.n)
        ]
        if not sb.member(probe):
            raise ValueError("module is not killed by p")
    fp = abelian_mod_p(p, ring.r)
    rows = []
    for row in pres.rows:
        rows.append([fp.elem(dict(el.terms), prec) for el in row])
    return Presentation(fp, prec, pres.n, rows, label=pres.label)


def adjoint_presentation(pres, i):
    """E^i(M) as a presentation (over the opposite context in rules mode),
    at the input's own precision."""
    return ext(pres, i).pres


def adjoint_summary(pres, i, max_escalations=3):
    """Certified [is zero, minimal generators, dimension] for E^i(M)."""

    def compute(prc):
        P = pres.at_precision(prc)
        e = ext(P, i)
        if e.pres.n == 0 or is_zero_module(e.pres):
            return ([True, 0, None], e.flags)
        g = gr_module(e.pres)
        out = [False, minimal_generator_count(e.pres), krull_dim(g.submodule)]
        if g.uncertain:
            return (unresolved_marker(out, prc), list(e.flags) + ["uncertain_leading_terms"])
        return (out, e.flags)

    return certify(compute, pres.prec, max_escalations)


def betti_numbers(pres, max_escalations=3):
    """Certified Betti sequence of the minimal free resolution."""

    def compute(prc):
        P = pres.at_precision(prc)
        if is_zero_module(P):
            return ([0], [])
        res = resolution(P, P.ring.d + 1)
        flags = [] if res.terminated else ["resolution_overflow"]
        return (res.betti, flags)

    return certify(compute, pres.prec, max_escalations)


def _cert_entry(cert):
    out = {"value": cert.value}
    out.update(cert.describe())
    return out


def invariant_report(pres, max_escalations=3):
    """One dictionary with every certified invariant of the module."""
    ring = pres.ring
    profile = derived_dual_profile(pres, max_escalations)
    report = {
        "ring": ring.describe(),
        "module": pres.label,
        "generators": pres.n,
        "relations": len(pres.rows),
        "minimal_generators": minimal_generator_count(pres),
        "is_zero": is_zero_module(pres),
        "dimension": _cert_entry(canonical_dimension(pres, max_escalations)),
        "grade": _cert_entry(_derive(profile, lambda pr: next((i for i, h in enumerate(pr) if h), None))),
        "derived_dual_nonzero": _cert_entry(profile),
        "projective_dimension": _cert_entry(projective_dimension(pres, max_escalations)),
        "depth": _cert_entry(depth(pres, max_escalations)),
        "rank": _cert_entry(module_rank(pres, max_escalations)),
        "is_torsion": _cert_entry(is_torsion(pres, max_escalations)),
        "is_pseudo_null": _cert_entry(is_pseudo_null(pres, max_escalations)),
        "is_torsion_free": _cert_entry(is_torsion_free(pres, max_escalations)),
        "is_reflexive": _cert_entry(is_reflexive(pres, max_escalations)),
        "is_cohen_macaulay": _cert_entry(is_cohen_macaulay(pres, max_escalations)),
        "mu": _cert_entry(mu_invariant(pres, max_escalations)),
        "betti": _cert_entry(betti_numbers(pres, max_escalations)),
    }
    return report
