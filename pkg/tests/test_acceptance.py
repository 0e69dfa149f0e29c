"""The ten acceptance criteria, each at its stated tolerance and runtime limit.

Caches are cleared before every timed block so the limits measure cold runs.
A PASS/FAIL line per criterion is printed in the terminal summary.
"""

import math
import time
from fractions import Fraction

import numpy as np
import pytest

from oracles import catalan_recurrence, random_density
from renyidesign.ensembles import (
    frame_potential,
    gap2_design_state,
    gap_purity_exact,
    pauli_group,
    single_qubit_clifford,
)
from renyidesign.moments import (
    ChoiPartitionSpec,
    StatePartition,
    choi_cycle_table,
    design_renyi_lower_bound,
    haar_choi_moment,
    haar_state_moment,
    theorem_bound,
)
from renyidesign.permgroup import _mn, state_cycle_polynomial, verify_cycle_lemma
from renyidesign.quantum import (
    DensityMatrix,
    eigvalsh,
    min_entropies,
    reduced_density,
    renyi_entropy,
    trace_power,
    von_neumann_entropies,
)
from renyidesign.sampling import RandomStream, mc_choi_moment, mc_state_moment
from renyidesign.weingarten import verify_wg_inverse, weingarten_table

pytestmark = pytest.mark.acceptance

SEED = 20240601
TOL = 1e-9


def cold():
    for f in (choi_cycle_table, _mn, state_cycle_polynomial, weingarten_table):
        f.cache_clear()
    return time.perf_counter()


def within(start, limit):
    elapsed = time.perf_counter() - start
    assert elapsed < limit, f"runtime {elapsed:.2f} s exceeds {limit} s"


def test_criterion_01_alpha2_identity():
    start = cold()
    for d_A in range(2, 17):
        for d_B in range(d_A, 17):
            value = haar_state_moment(StatePartition(d_A, d_B), 2).value
            assert value == Fraction(d_A + d_B, d_A * d_B + 1), (d_A, d_B)
    within(start, 1)


def test_criterion_02_alpha3_qubits():
    start = cold()
    p = StatePartition(2, 2)
    exact = haar_state_moment(p, 3).value
    assert exact == Fraction(84, 120) == Fraction(7, 10)
    est = mc_state_moment(p, 3, 100_000, RandomStream(SEED))
    assert abs(est.z_score(float(exact))) <= 4, est
    within(start, 30)


def test_criterion_03_choi_alpha2():
    start = cold()
    p = ChoiPartitionSpec(2, 2, 2, 2)
    exact = haar_choi_moment(p, 2).value
    assert exact == Fraction(2, 5)
    est = mc_choi_moment(p, 2, 100_000, RandomStream(SEED))
    assert abs(est.z_score(float(exact))) <= 4, est
    within(start, 60)


def test_criterion_04_cycle_lemma():
    start = cold()
    for alpha in range(1, 9):
        report = verify_cycle_lemma(alpha)
        assert report.holds, (alpha, report)
        assert report.saturating_count == catalan_recurrence(alpha), (alpha, report)
    within(start, 60)


def test_criterion_05_weingarten_inverse():
    start = cold()
    for d in range(1, 7):
        for alpha in range(1, min(d, 5) + 1):
            assert verify_wg_inverse(d, alpha), (d, alpha)
    within(start, 120)


def test_criterion_06_bound_dominance():
    start = cold()
    for d in (2, 4, 8, 16):
        for alpha in (2, 3, 4):
            jensen = design_renyi_lower_bound(haar_state_moment(StatePartition(d, d), alpha))
            params = {"d_A": d, "d_B": d, "alpha": alpha, "c": 2}
            for theorem in ("T2a", "T2b"):
                r = theorem_bound(theorem, params)
                if r.valid:
                    assert jensen >= r.bound_bits, (d, alpha, theorem, jensen, r.bound_bits)
            assert jensen >= math.log2(d) - 2, (d, alpha, jensen)
    within(start, 5)


def test_criterion_07_catalan_convergence():
    start = cold()
    d = 64
    for alpha in (2, 3, 4):
        scaled = haar_state_moment(StatePartition(d, d), alpha).value * d ** (alpha - 1)
        ratio = scaled / catalan_recurrence(alpha)
        assert abs(float(ratio) - 1) <= 0.01, (alpha, float(ratio))
    within(start, 10)


def test_criterion_08_gap_design():
    start = cold()
    gaps = []
    for d in range(2, 33):
        assert gap_purity_exact(d, d) == Fraction(2 * d, d * d + 1), d
        rho = reduced_density(gap2_design_state(d, d), [0])
        assert trace_power(rho, 2) == pytest.approx(2 * d / (d * d + 1), abs=1e-12)
        gaps.append(math.log2(d) - renyi_entropy(rho, 3))
    assert gaps[0] > 0
    assert all(b > a for a, b in zip(gaps, gaps[1:])), gaps
    within(start, 5)


def _property_corpus(gen):
    """1000 density matrices of dims 2..16: products (for additivity), bipartite and plain."""
    items = []
    for k in range(1000):
        kind = k % 4
        if kind == 0:
            d1 = int(gen.integers(2, 9))
            d2 = int(gen.integers(2, 16 // d1 + 1))
            a = random_density(d1, gen, int(gen.integers(1, d1 + 1)))
            b = random_density(d2, gen, int(gen.integers(1, d2 + 1)))
            items.append({"rho": np.kron(a, b), "factors": (a, b), "dims": (d1, d2)})
        else:
            d = int(gen.integers(2, 17))
            rho = random_density(d, gen, int(gen.integers(1, d + 1)))
            splits = [(x, d // x) for x in range(2, d) if d % x == 0]
            dims = splits[int(gen.integers(len(splits)))] if splits and kind == 1 else None
            items.append({"rho": rho, "factors": None, "dims": dims})
    return items


def _spectral_entropies(rhos):
    """Renyi 2..6 from trace powers, Renyi from the Jacobi spectrum, min and vN, batched by dimension."""
    out = [None] * len(rhos)
    by_dim = {}
    for i, r in enumerate(rhos):
        by_dim.setdefault(r.shape[0], []).append(i)
    for idx in by_dim.values():
        stack = np.stack([rhos[i] for i in idx])
        lam = eigvalsh(stack)
        mins = min_entropies(stack)
        vns = von_neumann_entropies(stack)
        for j, i in enumerate(idx):
            powers = {a: trace_power(rhos[i], a) for a in range(2, 7)}
            out[i] = {
                "powers": powers,
                "spectrum": np.clip(lam[j], 0, None),
                "renyi": {a: math.log2(v) / (1 - a) for a, v in powers.items()},
                "min": float(mins[j]),
                "vn": float(vns[j]),
            }
    return out


def test_criterion_09_entropy_properties():
    start = cold()
    gen = np.random.default_rng(SEED)
    items = _property_corpus(gen)
    rhos = [it["rho"] for it in items]
    factors = [f for it in items if it["factors"] for f in it["factors"]]
    marginals = []
    for it in items:
        if it["dims"] and not it["factors"]:
            marginals.append(reduced_density(DensityMatrix(it["rho"], it["dims"]), [0]).matrix)
    stats = _spectral_entropies(rhos + factors + marginals)
    main, fac, marg = stats[: len(rhos)], stats[len(rhos) : len(rhos) + len(factors)], stats[len(rhos) + len(factors) :]

    for s in main:
        r = s["renyi"]
        # monotone non-increasing in alpha, vN on top and min at the bottom
        assert s["vn"] >= r[2] - TOL
        for a in range(2, 6):
            assert r[a] >= r[a + 1] - TOL
        for a in range(2, 7):
            assert s["min"] <= r[a] + TOL
        # trace power against the eigenvalue sum
        for a, v in s["powers"].items():
            assert abs(v - float((s["spectrum"] ** a).sum())) <= TOL

    k = 0
    for it, s in zip(items, main):
        if not it["factors"]:
            continue
        fa, fb = fac[k], fac[k + 1]
        k += 2
        for a in range(2, 7):
            assert abs(s["renyi"][a] - fa["renyi"][a] - fb["renyi"][a]) <= TOL
        assert abs(s["min"] - fa["min"] - fb["min"]) <= TOL
        assert abs(s["vn"] - fa["vn"] - fb["vn"]) <= TOL

    # distance from maximal entropy can only shrink under partial trace
    m = 0
    for it, s in zip(items, main):
        if not it["dims"] or it["factors"]:
            continue
        d_A, d_B = it["dims"]
        sm = marg[m]
        m += 1
        for key in ("vn", "min"):
            assert math.log2(d_A) - sm[key] <= math.log2(d_A * d_B) - s[key] + TOL
        for a in range(2, 7):
            assert math.log2(d_A) - sm["renyi"][a] <= math.log2(d_A * d_B) - s["renyi"][a] + TOL
    assert m > 100
    within(start, 60)


def test_criterion_10_design_fixtures():
    start = cold()
    clifford = single_qubit_clifford()
    observed = {
        "F1(pauli)": frame_potential(pauli_group(1), 1, exact=True),
        "F2(clifford)": frame_potential(clifford, 2, exact=True),
        "F3(clifford)": frame_potential(clifford, 3, exact=True),
        "F4(clifford)": frame_potential(clifford, 4, exact=True),
    }
    checks = {
        "F1(pauli) == 1": observed["F1(pauli)"] == 1,
        "F2(clifford) == 2": observed["F2(clifford)"] == 2,
        "F3(clifford) == 6": observed["F3(clifford)"] == 6,
        "F4(clifford) > 24": observed["F4(clifford)"] > 24,
    }
    within(start, 5)
    failed = [name for name, ok in checks.items() if not ok]
    assert not failed, f"failed {failed}; observed {({k: str(v) for k, v in observed.items()})}"
