"""
The Koszul bimodule K and the functor kappa from perfect DG-modules to matrix
factorizations of h = sum_k rho_sharp(xi_k) * t_k.

kappa(M) has (-1)-term M^odd (x) Sym(V) and 0-term M^even (x) Sym(V); Sym(V) is the
polynomial ring in the t-variables, so the result has finite rank over the extended ring.
"""
import logging
from collections import deque
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from dgmod import DGModule, DGMorphism, ExteriorData, dg_base_change, dg_box, dg_checked, dg_extend_exterior, \
    exterior_module
from freemod import PolyMatrix
from mf import (
    EVEN,
    ODD,
    EquivalenceCertificate,
    MatrixFactorization,
    MFMorphism,
    OK,
    ValidationReport,
    checked,
    from_total,
    mf_external_tensor,
    mf_pullback,
    permutation_certificate,
    permutation_signs,
    tensor_layout,
)
from polyring import INHOMOGENEOUS, CertificateError, MFError, Poly, Ring, RingMap, format_poly, is_homogeneous, \
    weight_degree

LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True)
class KoszulComplex:
    ext: ExteriorData
    ring: Ring
    potential: Poly
    mf: MatrixFactorization


def kappa_order(m: DGModule) -> List[int]:
    """Module basis indices in kappa's total order: odd degrees first, each part in module order."""
    odd = [i for i, k in enumerate(m.degrees) if k % 2]
    even = [i for i, k in enumerate(m.degrees) if not k % 2]
    return odd + even


def _fold(mat: PolyMatrix, order: Sequence[int], ring: Ring, lift: RingMap) -> PolyMatrix:
    pos = {i: k for k, i in enumerate(order)}
    entries = {(pos[r], pos[c]): lift(p) for (r, c), p in mat.entries.items()}
    return PolyMatrix(ring, len(order), len(order), entries)


def basis_weights(D: PolyMatrix, ring: Ring, potential: Poly,
                  anchors: Optional[Sequence[int]] = None) -> Optional[List[int]]:
    """Weights making each entry of D homogeneous of weight row - col + 1.

    Every connected block of D gets weight 0 on the first of its indices listed in `anchors`
    (default: index order). None when the ring is ungraded, the potential is not of
    weight 2 or the entries disagree.
    """
    if not ring.graded or not is_homogeneous(potential, 2):
        return None
    links: Dict[int, List[Tuple[int, int]]] = {}
    for (r, c), p in sorted(D.entries.items()):
        w = weight_degree(p)
        if w == INHOMOGENEOUS:
            return None
        links.setdefault(c, []).append((r, w - 1))
        links.setdefault(r, []).append((c, 1 - w))
    weights: List[Optional[int]] = [None] * D.rows
    for start in (anchors if anchors is not None else range(D.rows)):
        if weights[start] is not None:
            continue
        weights[start] = 0
        queue = deque([start])
        while queue:
            i = queue.popleft()
            for j, step in links.get(i, ()):
                want = weights[i] + step
                if weights[j] is None:
                    weights[j] = want
                    queue.append(j)
                elif weights[j] != want:
                    return None
    return weights


def kappa(m: DGModule) -> MatrixFactorization:
    """Fold d_M + sum_k xi_k * t_k into a factorization of h over the extended ring."""
    dg_checked(m, "kappa input")
    ext = m.ext
    ring = ext.extended_ring()
    lift = RingMap.from_assignments(ext.base, ring)
    order = kappa_order(m)
    D = _fold(m.d, order, ring, lift)
    for x, t in zip(m.xi, ext.t_names):
        D = D + _fold(x, order, ring, lift).scale(ring.var(t))
    n_odd = sum(1 for k in m.degrees if k % 2)
    h = ext.potential()
    weights = basis_weights(D, ring, h, [order.index(i) for i in range(m.rank)])
    return checked(from_total(ring, h, n_odd, D, weights), "kappa")


def build_K(ext: ExteriorData) -> KoszulComplex:
    """O_Z (x) Lambda(V*) (x) Sym(V) with d = d_Lambda + sum_i (xi_i wedge) t_i, folded mod 2."""
    factorization = kappa(exterior_module(ext))
    h = ext.potential()
    ring = ext.extended_ring()
    lift = RingMap.from_assignments(ext.base, ring)
    expected = ring.zero()
    for p, t in zip(ext.rho_sharp, ext.t_names):
        expected = expected + lift(p) * ring.var(t)
    if factorization.potential != expected:
        raise MFError(f"Koszul potential {format_poly(factorization.potential)} differs from sum rho*t")
    LOGGER.debug("Koszul complex of rank %d for n=%d", factorization.total_rank, ext.n)
    return KoszulComplex(ext, ring, h, factorization)


def kappa_morphism(f: DGMorphism) -> MFMorphism:
    """kappa on maps: degree 0 maps become even, degree -1 homotopies odd (xi-anticommuting)."""
    source, target = kappa(f.source), kappa(f.target)
    ring = source.ring
    lift = RingMap.from_assignments(f.source.ext.base, ring)
    s_pos = {i: k for k, i in enumerate(kappa_order(f.source))}
    t_pos = {i: k for k, i in enumerate(kappa_order(f.target))}
    entries = {(t_pos[r], s_pos[c]): lift(p) for (r, c), p in f.matrix.entries.items()}
    block = PolyMatrix(ring, target.total_rank, source.total_rank, entries)
    return MFMorphism.from_block(source, target, block, ODD if f.degree % 2 else EVEN)


def kappa_certificate(forward: DGMorphism, backward: DGMorphism, h_source: DGMorphism,
                      h_target: DGMorphism) -> EquivalenceCertificate:
    """Transport a DG homotopy equivalence (maps closed, homotopies anticommuting with xi)."""
    cert = EquivalenceCertificate(kappa_morphism(forward), kappa_morphism(backward), kappa_morphism(h_source),
                                  kappa_morphism(h_target))
    report = cert.verify()
    if not report.ok:
        raise CertificateError(f"transported homotopy equivalence fails: {report.message}")
    return cert


def kappa_box_compat(m: DGModule, n: DGModule) -> EquivalenceCertificate:
    """Identify kappa(M box N) with kappa(M) box kappa(N) by a signed basis permutation."""
    boxed = dg_box(m, n)
    left = kappa(boxed)
    km, kn = kappa(m), kappa(n)
    right = mf_external_tensor(km, kn, left.ring)
    m_pos = {i: k for k, i in enumerate(kappa_order(m))}
    n_pos = {i: k for k, i in enumerate(kappa_order(n))}
    layout, _ = tensor_layout(km, kn)
    r_pos = {pair: k for k, pair in enumerate(layout)}
    perm = []
    for idx in kappa_order(boxed):
        a, b = divmod(idx, n.rank)
        perm.append(r_pos[(m_pos[a], n_pos[b])])
    signs = permutation_signs(left, right, perm)
    if signs is None:
        raise CertificateError("no signed permutation identifies kappa(M box N) with kappa(M) box kappa(N)")
    return permutation_certificate(left, right, perm, signs)


def extend_map(phi: RingMap, source_ext: ExteriorData, target_ext: ExteriorData) -> RingMap:
    """phi on the O-part, identity on the t-variables."""
    source, target = source_ext.extended_ring(), target_ext.extended_ring()
    images = {}
    lift = RingMap.from_assignments(phi.target, target)
    for v in phi.source.variables:
        images[v] = lift(phi(phi.source.var(v)))
    for t in source_ext.t_names:
        images[t] = target.var(t)
    return RingMap.from_assignments(source, target, images)


def kappa_base_change_check(m: DGModule, phi: RingMap) -> ValidationReport:
    """kappa(base-changed M) equals the pullback of kappa(M), matrix for matrix."""
    changed = dg_base_change(m, phi)
    direct = kappa(changed)
    pulled = mf_pullback(kappa(m), extend_map(phi, m.ext, changed.ext))
    if direct.ring != pulled.ring:
        return ValidationReport(False, "rings differ after base change")
    if direct.potential != pulled.potential:
        return ValidationReport(False, "potentials differ after base change")
    if direct.d_minus1 != pulled.d_minus1 or direct.d_zero != pulled.d_zero:
        return ValidationReport(False, "differentials differ after base change")
    return OK


def kappa_inclusion_check(m: DGModule, extra_t: Sequence[str]) -> ValidationReport:
    """Along V -> V + W with W acting by zero: kappa over V + W with t_W -> 0 equals kappa over V."""
    extended = dg_extend_exterior(m, extra_t, [2] * len(extra_t) if m.ext.t_weights is not None else None)
    big = kappa(extended)
    small = kappa(m)
    restrict = RingMap.from_assignments(big.ring, small.ring, {t: small.ring.zero() for t in extra_t})
    squeezed = mf_pullback(big, restrict)
    if squeezed.potential != small.potential:
        return ValidationReport(False, "potentials differ after setting the W-variables to zero")
    if squeezed.d_minus1 != small.d_minus1 or squeezed.d_zero != small.d_zero:
        return ValidationReport(False, "differentials differ after setting the W-variables to zero")
    return OK
