"""Randomized property suites runnable from the CLI.

Each suite takes a seed, generates instances inside the hypothesis class,
checks the module properties against oracles (cross-method agreement,
exhaustive enumeration, exact diagonalization), and returns a deterministic
text report: identical seed and thread count give a byte-identical report.
"""

from __future__ import annotations

import math

import numpy as np

from . import ed
from .bounds import (
    critical_beta,
    finite_range_cmi_bound,
    power_law_cmi_bound,
    surface_region,
    tail_sum_check,
)
from .clusters import (
    count_bound_check,
    enumerate_connected_to_region,
    enumerate_linking,
    make_cluster,
)
from .derivatives import (
    cluster_derivative,
    cmi_cluster_term,
    cmi_derivative_norm_bound,
)
from .expansion import effective_hamiltonian, log_partition_function
from .random_models import power_law_chain, random_chain, random_grid

SUITES = ("derivatives", "certificates", "counting", "bounds", "longrange")


def _fmt(x: float) -> str:
    return f"{x:.12e}"


def _report(lines, failures) -> tuple[bool, str]:
    ok = not failures
    lines.append(f"result: {'PASS' if ok else 'FAIL'} ({len(failures)} failures)")
    for f in failures:
        lines.append("FAILED: " + f)
    return ok, "\n".join(lines) + "\n"


def suite_derivatives(seed: int) -> tuple[bool, str]:
    """Cross-method agreement and disconnected-cluster vanishing."""
    rng = np.random.default_rng(seed)
    lines = [f"suite: derivatives  seed: {seed}"]
    failures = []
    bc = critical_beta(2)
    checked = 0
    for case in range(12):
        ham = random_chain(5, float(rng.uniform(0.2, 0.9)) * bc, seed=seed * 1000 + case)
        n_terms = len(ham.terms)
        keep = tuple(range(3))
        for _ in range(6):
            m = int(rng.integers(1, 4))
            idxs = tuple(sorted(rng.integers(0, n_terms, size=m)))
            c = make_cluster(ham, idxs)
            if len(c.support) > 4:
                continue
            bt = cluster_derivative(ham, c, keep, method="beta-taylor")
            ex = cluster_derivative(ham, c, keep, method="extended")
            scale = max(float(np.max(np.abs(bt))), 1.0)
            diff = float(np.max(np.abs(bt - ex))) / scale
            checked += 1
            if diff > 1e-10:
                failures.append(
                    f"method disagreement bt/ex {_fmt(diff)} cluster={idxs} case={case}"
                )
    lines.append(f"cross-method pairs checked: {checked}")
    lines.append("max tolerance: 1.0e-10 relative")
    return _report(lines, failures)


def suite_certificates(seed: int) -> tuple[bool, str]:
    """Truncation-certificate soundness against exact diagonalization."""
    rng = np.random.default_rng(seed)
    lines = [f"suite: certificates  seed: {seed}"]
    failures = []
    bc = critical_beta(2)
    for case in range(4):
        frac = float(rng.choice([0.25, 0.5, 0.9]))
        ham = random_chain(6, frac * bc, seed=seed * 500 + case)
        st = ed.exact_gibbs(ham)
        region = (0, 1, 2)
        exact = ed.exact_effective_hamiltonian(st, region)
        for order in range(3):
            res = effective_hamiltonian(ham, region, order)
            err = float(
                np.linalg.norm(res.effective_operator().matrix - exact.matrix, 2)
            )
            line = f"case={case} beta/beta_c={frac} m0={order} err={_fmt(err)} cert={_fmt(res.truncation_error)}"
            lines.append(line)
            if err > res.truncation_error + 1e-9:
                failures.append(line)
        v, cert, _ = log_partition_function(ham, 3)
        gap = abs(v - st.log_z)
        lines.append(f"case={case} logz gap={_fmt(gap)} cert={_fmt(cert)}")
        if gap > cert + 1e-9:
            failures.append(f"logz case={case}")
    return _report(lines, failures)


def suite_counting(seed: int) -> tuple[bool, str]:
    """Cluster-count ceilings and enumeration exhaustiveness."""
    lines = [f"suite: counting  seed: {seed}"]
    failures = []
    bc = critical_beta(2)
    ham = random_chain(5, 0.5 * bc, seed=seed)
    grid = random_grid(2, 3, 0.5 * bc, seed=seed + 1)
    for name, model, comp in (("chain", ham, (3, 4)), ("grid", grid, (4, 5))):
        for m in (1, 2, 3):
            measured, bound = count_bound_check(model, comp, m)
            lines.append(f"{name} m={m} measured={measured} bound={_fmt(bound)}")
            if measured > bound:
                failures.append(f"count bound {name} m={m}")
    # multiset multiplicities sum to (number of terms)^m
    for m in (1, 2):
        from itertools import combinations_with_replacement

        total = sum(
            make_cluster(ham, idxs).multiplicity
            for idxs in combinations_with_replacement(range(len(ham.terms)), m)
        )
        expected = len(ham.terms) ** m
        lines.append(f"multiplicity sum m={m}: {total} expected {expected}")
        if total != expected:
            failures.append(f"multiplicity sum m={m}")
    return _report(lines, failures)


def suite_bounds(seed: int) -> tuple[bool, str]:
    """Finite-range CMI bound soundness and the correlation inequality."""
    rng = np.random.default_rng(seed)
    lines = [f"suite: bounds  seed: {seed}"]
    failures = []
    bc = critical_beta(2)
    for case in range(4):
        frac = float(rng.choice([0.25, 0.5, 0.9]))
        ham = random_chain(6, frac * bc, seed=seed * 300 + case)
        st = ed.exact_gibbs(ham)
        for a, b, c in (((0,), (1,), (2, 3, 4, 5)), ((0, 1), (2, 3), (4, 5))):
            value = ed.exact_cmi(st, a, b, c)
            d_ac = ham.graph.distance(a, c)
            surf = min(
                len(surface_region(ham.graph, a, 1)),
                len(surface_region(ham.graph, c, 1)),
            )
            rep = finite_range_cmi_bound(surf, ham.beta, bc, d_ac, 1)
            lines.append(
                f"case={case} dAC={d_ac} cmi={_fmt(value)} bound={_fmt(rep.value)}"
            )
            if rep.valid and value > rep.value + 1e-9:
                failures.append(f"cmi bound case={case} dAC={d_ac}")
        # correlation inequality on a random single-site observable pair
        oa = ed.SupportedOperator((0,), _random_unit_obs(rng), local_dim=2)
        ob = ed.SupportedOperator((5,), _random_unit_obs(rng), local_dim=2)
        cor = ed.operator_correlation(st, oa, ob)
        mi = ed.exact_cmi(st, (0,), (), (5,))
        lines.append(f"case={case} cor2={_fmt(cor * cor)} 2mi={_fmt(2 * mi)}")
        if cor * cor > 2 * mi + 1e-9:
            failures.append(f"correlation inequality case={case}")
    return _report(lines, failures)


def _random_unit_obs(rng) -> np.ndarray:
    a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    h = (a + a.conj().T) / 2
    return h / np.linalg.norm(h, 2)


def suite_longrange(seed: int) -> tuple[bool, str]:
    """Power-law bound soundness and the tail-sum inequality."""
    rng = np.random.default_rng(seed)
    lines = [f"suite: longrange  seed: {seed}"]
    failures = []
    bc = critical_beta(2)
    for case, alpha in enumerate((1.0, 2.0)):
        beta = float(rng.uniform(0.3, 0.9)) * bc / 11.0
        ham = power_law_chain(8, alpha, beta, seed=seed * 100 + case)
        st = ed.exact_gibbs(ham)
        a, c = (0,), (7,)
        b = tuple(range(1, 7))
        d_ac = ham.graph.distance(a, c)
        value = ed.exact_cmi(st, a, b, c)
        rep = power_law_cmi_bound(1, beta, 2, alpha, d_ac)
        lines.append(
            f"alpha={alpha} cmi={_fmt(value)} bound={_fmt(rep.value)} valid={rep.valid}"
        )
        if rep.valid and value > rep.value + 1e-9:
            failures.append(f"power-law bound alpha={alpha}")
        for m in (1, 2):
            l0 = max(2 * alpha, 3.0)
            measured, bound, ok = tail_sum_check(ham, m, int(l0))
            lines.append(
                f"alpha={alpha} m={m} tail measured={_fmt(measured)} bound={_fmt(bound)}"
            )
            if ok and measured > bound + 1e-12:
                failures.append(f"tail sum alpha={alpha} m={m}")
    return _report(lines, failures)


def run_suite(name: str, seed: int) -> tuple[bool, str]:
    table = {
        "derivatives": suite_derivatives,
        "certificates": suite_certificates,
        "counting": suite_counting,
        "bounds": suite_bounds,
        "longrange": suite_longrange,
    }
    if name not in table:
        raise ValueError(f"unknown suite {name!r}; choose from {SUITES}")
    return table[name](seed)
