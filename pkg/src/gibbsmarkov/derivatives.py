"""Multilinear cluster derivatives of logarithms of reduced Gibbs weights.

Attach an independent strength parameter a_j to every element of a cluster w
(repeated term indices get separate parameters) and consider

    G(a) = log tr_out( exp(-beta * sum_j a_j h_j) )

where the trace is over the cluster sites outside the kept region and the
logarithm is the matrix logarithm on the kept sites (a plain scalar log when
nothing is kept).  The quantity computed here is the mixed first derivative

    D_w G = d^m G / (da_1 ... da_m) evaluated at a = 0.

Everything is restricted to the union of the supports: sites outside V_w
contribute additive constants to G that vanish under any first derivative.

Three methods are provided and cross-check each other:

* ``beta-taylor`` (default): exact multilinear coefficient extraction from the
  Taylor series of log tr exp, organized over ordered set partitions.
* ``extended``: exact trace formula on a product of copies of the traced-out
  space, one copy per cluster element plus one reference copy.
* ``fd``: central finite differences on the 2^m sign stencil, optionally
  Richardson-extrapolated.
"""

from __future__ import annotations

import math
import warnings
from itertools import permutations

import numpy as np

from .operators import (
    SupportedOperator,
    embed,
    expm_hermitian,
    logm_posdef,
    partial_trace,
    scalar_operator,
)
from .spin_model import Hamiltonian
from .clusters import Cluster, overlap_counts

METHODS = ("beta-taylor", "extended", "fd")

DEFAULT_FD_STEP = 1e-3

# Extended-space evaluation materializes matrices of linear dimension
# d^(kept + copies * traced); refuse beyond this by default.
DEFAULT_DIM_CEILING = 2048


class CostCeilingError(RuntimeError):
    """Raised when an evaluation would exceed the configured dimension cap."""


def _cluster_pieces(ham: Hamiltonian, cluster: Cluster, kept_region):
    """Split V_w into kept and traced sites and embed each element's term."""
    kept_set = set(kept_region)
    support = cluster.support
    kept = tuple(v for v in support if v in kept_set)
    traced = tuple(v for v in support if v not in kept_set)
    ops = [
        embed(ham.terms[i].as_operator(ham.local_dim), support)
        for i in cluster.term_indices
    ]
    return kept, traced, ops


def _kept_axes(support, kept):
    kset = set(kept)
    return tuple(i for i, v in enumerate(support) if v in kset)


# ---------------------------------------------------------------------------
# beta-Taylor method


def _ordered_set_partitions(items):
    """Yield ordered partitions (tuples of disjoint nonempty blocks) of items."""
    items = tuple(items)
    if not items:
        yield ()
        return
    n = len(items)
    first = items[0]
    rest = items[1:]
    # Choose the block containing the first item, then recurse and interleave.
    for mask in range(1 << (n - 1)):
        block = [first] + [rest[i] for i in range(n - 1) if mask >> i & 1]
        remaining = [rest[i] for i in range(n - 1) if not mask >> i & 1]
        for tail in _ordered_set_partitions(remaining):
            for pos in range(len(tail) + 1):
                yield tail[:pos] + (tuple(block),) + tail[pos:]


def _moment(ops, subset, traced_axes, d, cache):
    """Average over orderings of the partial trace of the operator product.

    W_S = (1/|S|!) * sum over orderings sigma of S of
          tr_traced( h_{sigma_1} ... h_{sigma_|S|} ) / d_traced
    as a matrix on the kept sites.
    """
    key = subset
    hit = cache.get(key)
    if hit is not None:
        return hit
    n_sites = ops[0].matrix.shape[0]
    acc = None
    for order in permutations(subset):
        prod = ops[order[0]].matrix
        for j in order[1:]:
            prod = prod @ ops[j].matrix
        acc = prod if acc is None else acc + prod
    acc /= math.factorial(len(subset))
    traced_dim = d ** len(traced_axes)
    full = SupportedOperator(ops[0].support, acc, local_dim=d)
    keep = tuple(v for i, v in enumerate(full.support) if i not in traced_axes)
    if keep:
        reduced = partial_trace(full, keep).matrix / traced_dim
    else:
        reduced = np.array([[np.trace(acc) / traced_dim]])
    cache[key] = reduced
    return reduced


def dw_beta_taylor(ham: Hamiltonian, cluster: Cluster, kept_region) -> np.ndarray:
    """Exact mixed derivative via the Taylor series of log tr exp.

    Expanding exp(-beta sum a_j h_j) and composing with log(1 + x), the
    multilinear coefficient in a_1..a_m collects over ordered set partitions
    (S_1, ..., S_q) of {1..m}:

        D_w G = sum_partitions  ((-1)^(q-1) / q) *
                product_i [ (-beta)^{|S_i|} * W_{S_i} ]

    where W_S averages the partial trace of the operator product over the
    orderings of S (the 1/|S|! is folded into W_S).
    """
    beta = ham.beta
    d = ham.local_dim
    kept, traced, ops = _cluster_pieces(ham, cluster, kept_region)
    traced_axes = tuple(
        i for i, v in enumerate(cluster.support) if v not in set(kept)
    )
    m = cluster.size
    cache: dict = {}
    dim = d ** len(kept) if kept else 1
    total = np.zeros((dim, dim), dtype=complex)
    for part in _ordered_set_partitions(range(m)):
        q = len(part)
        piece = np.eye(dim, dtype=complex)
        for block in part:
            w = _moment(ops, tuple(sorted(block)), traced_axes, d, cache)
            piece = piece @ ((-beta) ** len(block) * w)
        total += ((-1.0) ** (q - 1) / q) * piece
    return total


# ---------------------------------------------------------------------------
# extended-space method


def _embed_on_copies(mat_full, support, kept, traced, copy_index, n_copies, d):
    """Embed a V_w operator onto kept (x) traced^(n_copies), acting on the
    given copy of the traced factor."""
    n_kept, n_tr = len(kept), len(traced)
    sites = n_kept + n_copies * n_tr
    # Build index maps from V_w positions to extended-space positions.
    pos = {}
    for i, v in enumerate(kept):
        pos[v] = i
    for i, v in enumerate(traced):
        pos[v] = n_kept + copy_index * n_tr + i
    # Reshape the V_w matrix into site axes, then place into the big space by
    # kron with identities and axis permutation.
    n_vw = len(support)
    big_dim = d ** sites
    a = mat_full.reshape((d,) * (2 * n_vw))
    ident = np.eye(d ** (sites - n_vw), dtype=complex).reshape(
        (d,) * (2 * (sites - n_vw))
    )
    full = np.tensordot(a, ident, axes=0)
    # Current axis order: vw rows, vw cols, id rows, id cols.  Re-interleave.
    vw_positions = [pos[v] for v in support]
    free = [p for p in range(sites) if p not in set(vw_positions)]
    row_axes = [0] * sites
    col_axes = [0] * sites
    for i, p in enumerate(vw_positions):
        row_axes[p] = i
        col_axes[p] = n_vw + i
    for i, p in enumerate(free):
        row_axes[p] = 2 * n_vw + i
        col_axes[p] = 2 * n_vw + len(free) + i
    full = full.transpose(row_axes + col_axes)
    return full.reshape(big_dim, big_dim)


def dw_extended_space(
    ham: Hamiltonian,
    cluster: Cluster,
    kept_region,
    dim_ceiling: int = DEFAULT_DIM_CEILING,
) -> np.ndarray:
    """Exact mixed derivative via a trace over copies of the traced space.

    With m cluster elements and traced dimension D, work on
    kept (x) traced^m and evaluate

        D_w G = ((-beta)^m / D^m) * (1/m!) * sum_sigma
                tr_copies( g^(0)_{sigma(1)} g^(1)_{sigma(2)} ... g^(m-1)_{sigma(m)} )

    where g_j = h_j - (tr_traced h_j / D) (x) 1_traced  (the traced-mean
    subtraction), each embedded on one of the m copies, and g^(s) is the
    symmetrized combination sum_{i<=s} g_{j,copy i} - s * g_{j,copy s+1},
    with g^(0) acting on the first copy.  The multiset multiplicity is not
    applied here; parameters are treated as independent.

    Exactness domain: the copy construction reproduces the true derivative
    whenever the result is a scalar (kept region empty) for any m, and for
    any kept region when m <= 2.  For m >= 3 with a nontrivial kept factor
    the partial-trace moments tr_traced(h^k) generally do not commute on
    the kept space, and the fixed interleaving of the copy product drops
    the required ordering symmetrization -- the value is then only
    approximate.  Use dw_beta_taylor (exact everywhere) in that regime.
    """
    beta = ham.beta
    d = ham.local_dim
    kept, traced, ops = _cluster_pieces(ham, cluster, kept_region)
    support = cluster.support
    m = cluster.size
    n_copies = m
    dim = d ** (len(kept) + n_copies * len(traced))
    if dim > dim_ceiling:
        raise CostCeilingError(
            f"extended-space dimension {dim} exceeds ceiling {dim_ceiling}"
        )
    traced_dim = d ** len(traced)
    kept_dim = d ** len(kept) if kept else 1

    # Traced-mean subtraction: g = h - (tr_traced h / D) embedded back.  The
    # subtraction changes the first factor's trace, which only cancels out of
    # the symmetrized product for m >= 2; at m = 1 the bare term is used.
    g_mats = []
    for op in ops:
        mat = op.matrix.copy()
        if traced and m >= 2:
            full = SupportedOperator(support, mat, local_dim=d)
            if kept:
                meanop = partial_trace(full, kept)
                mean_emb = embed(
                    SupportedOperator(
                        kept, meanop.matrix / traced_dim, local_dim=d
                    ),
                    support,
                ).matrix
            else:
                mean_emb = (np.trace(mat) / traced_dim) * np.eye(
                    mat.shape[0], dtype=complex
                )
            mat = mat - mean_emb
        g_mats.append(mat)

    # Per-operator, per-copy embeddings on the extended space.
    per_copy = [
        [
            _embed_on_copies(g, support, kept, traced, c, n_copies, d)
            for c in range(n_copies)
        ]
        for g in g_mats
    ]

    def level_op(j, s):
        if s == 0:
            return per_copy[j][0]
        acc = per_copy[j][0].copy()
        for i in range(1, s):
            acc += per_copy[j][i]
        acc -= s * per_copy[j][s]
        return acc

    total = np.zeros((dim, dim), dtype=complex)
    for sigma in permutations(range(m)):
        prod = level_op(sigma[0], 0)
        for s in range(1, m):
            prod = prod @ level_op(sigma[s], s)
        total += prod

    # Trace out every copy of the traced space, keep the kept sites.
    n_kept = len(kept)
    sites = n_kept + n_copies * len(traced)
    big = SupportedOperator(tuple(range(sites)), total, local_dim=d)
    if n_kept:
        reduced = partial_trace(big, tuple(range(n_kept))).matrix
    else:
        reduced = np.array([[np.trace(total)]])
    scale = (-beta) ** m / (traced_dim ** m * math.factorial(m))
    out = scale * reduced
    if not kept:
        return out.reshape(1, 1)
    return out


# ---------------------------------------------------------------------------
# finite-difference method


_SERIES_NORM_CUTOFF = 0.25
_SERIES_TERM_FLOOR = 1e-30


def _log_reduced_weight(ham, cluster, kept, traced, ops, coeffs, centered=False):
    """G(a) on the kept sites: log of the traced Gibbs weight of
    sum_j a_j h_j restricted to V_w.

    With ``centered`` the additive constant log(d^{traced sites}) at a = 0 is
    dropped.  The constant cancels from any difference stencil anyway, but
    carrying it destroys the low-order bits of the tiny remainder; the
    centered form keeps the full precision of the deviation from a = 0.

    Near a = 0 the weight is evaluated as identity-plus-series (exp minus
    one, then log near one), so the returned deviation is accurate relative
    to its own small magnitude rather than to the discarded constant.
    """
    d = ham.local_dim
    total = None
    for a_j, op in zip(coeffs, ops):
        piece = a_j * op.matrix
        total = piece if total is None else total + piece
    a_mat = -ham.beta * total
    dim = a_mat.shape[0]
    traced_dim = d ** len(traced)
    const = math.log(traced_dim) if kept else math.log(dim)

    if np.linalg.norm(a_mat, 2) <= _SERIES_NORM_CUTOFF:
        # E = exp(A) - I, summed until the terms fall below the noise floor
        term = a_mat.copy()
        e_mat = a_mat.copy()
        k = 1
        while np.max(np.abs(term)) > _SERIES_TERM_FLOOR:
            k += 1
            term = term @ a_mat / k
            e_mat += term
        if kept:
            full = SupportedOperator(cluster.support, e_mat, local_dim=d)
            f_mat = partial_trace(full, kept).matrix / traced_dim
            # log(I + F) by the alternating series
            out = f_mat.copy()
            power = f_mat.copy()
            k = 1
            while np.max(np.abs(power)) > _SERIES_TERM_FLOOR:
                k += 1
                power = power @ f_mat
                out += ((-1.0) ** (k + 1) / k) * power
        else:
            out = np.array([[math.log1p(np.trace(e_mat).real / dim)]])
        return out if centered else out + const * np.eye(out.shape[0])

    weight = expm_hermitian(
        SupportedOperator(cluster.support, total, local_dim=d), scale=-ham.beta
    )
    if kept:
        reduced = partial_trace(weight, kept)
        out = logm_posdef(reduced).matrix
    else:
        out = np.array([[math.log(np.trace(weight.matrix).real)]])
    return out - const * np.eye(out.shape[0]) if centered else out


def dw_finite_difference(
    ham: Hamiltonian,
    cluster: Cluster,
    kept_region,
    step: float = DEFAULT_FD_STEP,
    richardson: bool = True,
) -> np.ndarray:
    """Central-difference mixed derivative on the 2^m sign stencil.

    D(h) = (2h)^-m * sum_{s in {-1,+1}^m} (prod s_j) G(s * h); the default
    Richardson pass returns (4 D(h/2) - D(h)) / 3.  A warning is issued when
    the result sits near the cancellation floor of the stencil.
    """
    kept, traced, ops = _cluster_pieces(ham, cluster, kept_region)
    m = cluster.size

    max_abs = 0.0

    def stencil(h):
        nonlocal max_abs
        acc = None
        for bits in range(1 << m):
            signs = [1.0 if bits >> j & 1 else -1.0 for j in range(m)]
            val = _log_reduced_weight(
                ham, cluster, kept, traced, ops, [s * h for s in signs],
                centered=True,
            )
            max_abs = max(max_abs, float(np.max(np.abs(val))))
            signed = math.prod(signs) * val
            acc = signed if acc is None else acc + signed
        return acc / (2.0 * h) ** m

    coarse = stencil(step)
    if richardson:
        fine = stencil(step / 2.0)
        result = (4.0 * fine - coarse) / 3.0
    else:
        result = coarse
    floor = 1e3 * np.finfo(float).eps * max_abs / step ** m
    if float(np.max(np.abs(result))) < floor:
        warnings.warn(
            "finite-difference result is below the cancellation floor "
            f"({floor:.2e}); treat it as numerically zero",
            RuntimeWarning,
        )
    return result


# ---------------------------------------------------------------------------
# dispatch and norm bounds


def cluster_derivative(
    ham: Hamiltonian,
    cluster: Cluster,
    kept_region,
    method: str = "beta-taylor",
    fd_step: float = DEFAULT_FD_STEP,
    richardson: bool = True,
    dim_ceiling: int = DEFAULT_DIM_CEILING,
) -> np.ndarray:
    """Mixed first derivative D_w G restricted to the kept sites in V_w.

    Returns a matrix on kept_region intersect V_w (1x1 when that is empty).
    """
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; choose from {METHODS}")
    if method == "beta-taylor":
        return dw_beta_taylor(ham, cluster, kept_region)
    if method == "extended":
        return dw_extended_space(ham, cluster, kept_region, dim_ceiling=dim_ceiling)
    return dw_finite_difference(
        ham, cluster, kept_region, step=fd_step, richardson=richardson
    )


def derivative_operator(
    ham: Hamiltonian, cluster: Cluster, kept_region, **kw
) -> SupportedOperator:
    """Same as :func:`cluster_derivative` but wrapped with its support."""
    kept = tuple(v for v in cluster.support if v in set(kept_region))
    mat = cluster_derivative(ham, cluster, kept_region, **kw)
    if not kept:
        return scalar_operator(complex(mat[0, 0]), (), local_dim=ham.local_dim)
    return SupportedOperator(kept, mat, local_dim=ham.local_dim)


def derivative_norm_bound(ham: Hamiltonian, cluster: Cluster) -> float:
    """Certified ceiling on ||D_w G||: half the product over elements of
    4 * beta * N_s * ||h_s||, with N_s the number of other elements whose
    support overlaps element s."""
    counts = overlap_counts(ham, cluster)
    prod = 1.0
    for idx, n_s in zip(cluster.term_indices, counts):
        prod *= 4.0 * ham.beta * max(n_s, 1) * ham.terms[idx].norm
    return 0.5 * prod


def cmi_derivative_norm_bound(ham: Hamiltonian, cluster: Cluster) -> float:
    """Ceiling on the four-region log combination: 2 * (4 beta)^m * prod N_s ||h_s||."""
    counts = overlap_counts(ham, cluster)
    prod = 1.0
    for idx, n_s in zip(cluster.term_indices, counts):
        prod *= max(n_s, 1) * ham.terms[idx].norm
    return 2.0 * (4.0 * ham.beta) ** cluster.size * prod


def cmi_cluster_term(
    ham: Hamiltonian,
    cluster: Cluster,
    a_region,
    b_region,
    c_region,
    method: str = "beta-taylor",
    **kw,
) -> SupportedOperator:
    """Four-region combination of cluster derivatives,

        D_w[ G_AB + G_BC - G_ABC - G_B ],

    each piece kept on the respective region, embedded on
    (A u B u C) intersect V_w and summed with signs."""
    regions = {
        "ab": tuple(a_region) + tuple(b_region),
        "bc": tuple(b_region) + tuple(c_region),
        "abc": tuple(a_region) + tuple(b_region) + tuple(c_region),
        "b": tuple(b_region),
    }
    signs = {"ab": 1.0, "bc": 1.0, "abc": -1.0, "b": -1.0}
    target = tuple(
        v for v in cluster.support if v in set(regions["abc"])
    )
    if not target:
        raise ValueError("cluster does not intersect A u B u C")
    dim = ham.local_dim ** len(target)
    acc = np.zeros((dim, dim), dtype=complex)
    for key, region in regions.items():
        op = derivative_operator(ham, cluster, region, method=method, **kw)
        if op.support:
            acc += signs[key] * embed(op, target).matrix
        else:
            acc += signs[key] * complex(op.matrix[0, 0]) * np.eye(dim)
    return SupportedOperator(target, acc, local_dim=ham.local_dim)
