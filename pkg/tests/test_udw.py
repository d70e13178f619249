import itertools

import numpy as np
import pytest

from harvest_lab import qmat, udw
from harvest_lab.udw import DeltaEvent, DeltaSchedule

PI = np.pi


def baa(ta2=1.0, lam=0.1, gap_a=3.0, gap_b=0.0, ta1=0.5, tb1=0.0):
    return DeltaSchedule.from_times([ta1, ta2], [tb1], lam, gap_a, gap_b)


def labels(s):
    return tuple(1 if c == "+" else -1 for c in s)


# --- special functions -------------------------------------------------------

def test_i_s_values():
    assert udw.i_s(0.0) == 0.0
    assert udw.i_s(3.0) == 0.0
    assert udw.i_s(2.0) == 0.0
    assert udw.i_s(1.0) == pytest.approx(PI / 96 * 5, rel=1e-15)
    x = np.linspace(-3, 3, 13)
    assert np.abs(udw.i_s(x) + udw.i_s(-x)).max() == 0


def test_i_c_values():
    assert udw.i_c(0.0) == 0.25
    assert udw.i_c(2.0) == (5 - 8 * np.log(2)) / 12
    assert udw.i_c(-2.0) == udw.i_c(2.0)
    x = np.linspace(0.01, 3, 17)
    assert np.abs(udw.i_c(x) - udw.i_c(-x)).max() == 0
    # continuous through the special points
    assert abs(udw.i_c(1e-7) - 0.25) < 1e-10
    assert abs(udw.i_c(2 + 1e-9) - udw.i_c(2.0)) < 1e-7


def test_theta():
    assert udw.theta(0.0, 0.7) == 0.0
    assert udw.theta(2.5, 0.1) == 0.0
    assert udw.theta(1.0, 0.1) == pytest.approx(9 * 0.01 / (4 * PI**2) * udw.i_s(1.0), rel=1e-15)
    assert udw.theta(-0.6, 0.3) == -udw.theta(0.6, 0.3)


def test_vacuum_overlap():
    t = [0.0, 0.3, 0.9, 1.4]
    assert udw.vacuum_overlap([0, 0, 0, 0], t, 0.8) == 1.0
    assert udw.vacuum_overlap([2, -2, 0, 2], t, 0.0) == 1.0
    lam = 0.4
    assert udw.vacuum_overlap([2, 0, 0, 0], t, lam) == pytest.approx(np.exp(-9 * lam**2 / (16 * PI**2)), rel=1e-14)
    with pytest.raises(ValueError):
        udw.vacuum_overlap([1, 0, 0, 0], t, lam)


def test_vacuum_overlap_matches_printed_terms():
    # the quadratic form written out pair by pair
    rng = np.random.default_rng(0)
    t = rng.uniform(0, 2.5, 4)
    s = np.array([2, -2, 0, 2])
    lam = 0.9
    q = 0.25 * np.sum(s**2)
    for i, j in itertools.combinations(range(4), 2):
        q += 2 * s[i] * s[j] * udw.i_c(t[j] - t[i])
    assert udw.vacuum_overlap(s, t, lam) == pytest.approx(np.exp(-9 * lam**2 / (16 * PI**2) * q), rel=1e-14)


# --- schedules ---------------------------------------------------------------

def test_schedule_patterns():
    assert baa().pattern == "BAA"
    assert DeltaSchedule.from_times([0.0, 0.5], [1.0], 0.1).pattern == "AAB"
    assert DeltaSchedule.from_times([0.0, 1.0], [0.5], 0.1).pattern == "ABA"
    assert DeltaSchedule.from_times([0.0, 1.0], [0.5, 2.0], 0.1).pattern == "ABAB"
    assert DeltaSchedule.from_times([1.0], [0.5], 0.1).pattern == "BA"


def test_schedule_rejections():
    with pytest.raises(ValueError):
        DeltaSchedule.from_times([0.0], [0.5, 1.0], 0.1)  # B twice, A once
    with pytest.raises(ValueError):
        DeltaSchedule.from_times([0.0, 0.5], [0.5], 0.1)  # cross-detector tie
    with pytest.raises(ValueError):
        DeltaSchedule.from_times([0.0, 0.5, 0.7], [1.0], 0.1)
    with pytest.raises(ValueError):
        DeltaSchedule.from_times([0.0, 0.5], [], 0.1)
    with pytest.raises(ValueError):
        DeltaSchedule.from_times([0.0, 0.5], [1.0], -0.1)
    with pytest.raises(ValueError):
        DeltaSchedule((DeltaEvent("A", 1.0, 1), DeltaEvent("A", 0.0, 2), DeltaEvent("B", 2.0)), 0.1)
    with pytest.raises(ValueError):
        DeltaEvent("C", 0.0)
    with pytest.raises(ValueError):
        DeltaEvent("A", float("nan"))


def test_same_detector_tie_allowed():
    s = DeltaSchedule.from_times([0.5, 0.5], [0.0], 0.1)
    assert s.pattern == "BAA"


def test_slots_duplicate_single_kicks():
    assert baa().slots() == (("B", 0.0), ("B", 0.0), ("A", 0.5), ("A", 1.0))
    s = DeltaSchedule.from_times([1.0], [0.5], 0.1)
    assert s.slots() == (("B", 0.5), ("B", 0.5), ("A", 1.0), ("A", 1.0))


# --- K and h -----------------------------------------------------------------

def test_k_all_plus_is_overlap():
    s = baa(lam=0.7)
    t = [x for _, x in s.slots()]
    assert udw.k_function((1,) * 8, s) == pytest.approx(udw.vacuum_overlap([2, 2, 2, 2], t, 0.7), rel=1e-14)


def test_k_lambda_zero():
    s = baa(lam=0.0)
    assert np.abs(udw.k_table(s) - 1).max() == 0


def test_k_matches_printed_form_for_aabb():
    # operator order A1 A2 B1 B2 coincides with time order here
    ta1, ta2, tb1, tb2, lam = 0.1, 0.6, 0.9, 1.7, 0.8
    s = DeltaSchedule.from_times([ta1, ta2], [tb1, tb2], lam)
    th = lambda dt: udw.theta(dt, lam)  # noqa: E731
    rng = np.random.default_rng(1)
    for _ in range(20):
        p = rng.choice([1, -1], 8)
        sgn = [p[0] + p[7], p[1] + p[6], p[2] + p[5], p[3] + p[4]]
        ov = udw.vacuum_overlap(sgn, [ta1, ta2, tb1, tb2], lam)
        ph = (
            (p[0] - p[7]) * (p[2] + p[5]) * th(tb1 - ta1)
            + (p[1] - p[6]) * (p[2] + p[5]) * th(tb1 - ta2)
            + (p[0] - p[7]) * (p[3] + p[4]) * th(tb2 - ta1)
            + (p[1] - p[6]) * (p[3] + p[4]) * th(tb2 - ta2)
            + (p[0] - p[7]) * (p[1] + p[6]) * th(ta2 - ta1)
            + (p[2] - p[5]) * (p[3] + p[4]) * th(tb2 - tb1)
        )
        assert abs(udw.k_function(p, s) - ov * np.exp(-0.5j * ph)) < 1e-14


def test_h_basic():
    s = baa(lam=0.0)
    assert udw.h_function((1,) * 8, s) == 1
    s = baa(lam=0.6)
    for l in itertools.product([1, -1], repeat=8):
        if l.count(-1) % 2:
            assert udw.h_function(l, s) == 0


def test_h_table_matches_h_function():
    s = DeltaSchedule.from_times([0.2, 1.1], [0.7, 1.9], 0.9)
    table = udw.h_table(s)
    rng = np.random.default_rng(2)
    for _ in range(30):
        l = tuple(int(x) for x in rng.choice([1, -1], 8))
        idx = int("".join("1" if x == -1 else "0" for x in l), 2)
        assert abs(table[idx] - udw.h_function(l, s)) < 1e-15


def test_h_rejects_bad_pattern():
    with pytest.raises(ValueError):
        udw.h_function((1,) * 7, baa())
    with pytest.raises(ValueError):
        udw.k_function((1, 0, 1, 1, 1, 1, 1, 1), baa())


# --- evolved state -----------------------------------------------------------

def test_evolved_lambda_zero():
    comps = udw.evolved_coefficients(baa(lam=0.0))
    assert len(comps[0]) == 4 and all(len(c) == 4 for c in comps)
    # only the all-cosh term survives when every sinh vanishes
    h = udw.h_table(baa(lam=0.0))
    assert h[0] == 1
    assert np.abs(h[1:]).max() == 0


def test_evolved_aabb_phases():
    ta1, ta2, tb1, tb2 = 0.1, 0.6, 0.9, 1.7
    ga, gb = 2.3, -1.1
    s = DeltaSchedule.from_times([ta1, ta2], [tb1, tb2], 0.5, ga, gb)
    comps = udw.evolved_coefficients(s)
    e = lambda x: np.exp(1j * x)  # noqa: E731
    # labels in operator order B2 B1 A2 A1; c = +1, s = -1
    expected = [
        {"++++": 1, "++--": e(-ga * (ta2 - ta1)), "--++": e(-gb * (tb2 - tb1)), "----": e(-ga * (ta2 - ta1) - gb * (tb2 - tb1))},
        {"+-++": e(gb * tb1), "+---": e(-ga * (ta2 - ta1) + gb * tb1), "-+++": e(gb * tb2), "-+--": e(-ga * (ta2 - ta1) + gb * tb2)},
        {"+++-": e(ga * ta1), "++-+": e(ga * ta2), "--+-": e(ga * ta1 - gb * (tb2 - tb1)), "---+": e(ga * ta2 - gb * (tb2 - tb1))},
        {"+-+-": e(ga * ta1 + gb * tb1), "+--+": e(ga * ta2 + gb * tb1), "-++-": e(ga * ta1 + gb * tb2), "-+-+": e(ga * ta2 + gb * tb2)},
    ]
    for comp, exp in zip(comps, expected):
        got = {"".join("+" if x == 1 else "-" for x in t.labels): t.phase for t in comp}
        assert set(got) == set(exp)
        for k in exp:
            assert abs(got[k] - exp[k]) < 1e-14


def test_rho11_sixteen_terms():
    ta1, ta2, tb1, tb2 = 0.1, 0.6, 0.9, 1.7
    ga, gb = 2.3, -1.1
    s = DeltaSchedule.from_times([ta1, ta2], [tb1, tb2], 0.8, ga, gb)
    h = lambda st: udw.h_function(labels(st), s)  # noqa: E731
    a = np.exp(-1j * ga * (ta2 - ta1))
    b = np.exp(-1j * gb * (tb2 - tb1))
    ac, bc = np.conj(a), np.conj(b)
    rho11 = (
        h("++++++++") + h("++++++--") * a + h("++++--++") * b + h("++++----") * a * b
        + h("--++++++") * ac + h("--++++--") + h("--++--++") * ac * b + h("--++----") * b
        + h("++--++++") * bc + h("++--++--") * a * bc + h("++----++") + h("++------") * a
        + h("----++++") * ac * bc + h("----++--") * bc + h("------++") * ac + h("--------")
    )
    assert abs(udw.rho_ab(s).r11 - rho11) < 1e-14


def test_rho_lambda_zero():
    x = udw.rho_ab(baa(lam=0.0))
    assert x.r11 == pytest.approx(1, abs=1e-15)
    assert max(abs(x.r22), abs(x.r33), abs(x.r44), abs(x.r14), abs(x.r23)) < 1e-15


def test_rho_is_x_state_and_psd():
    rng = np.random.default_rng(3)
    for _ in range(20):
        s = DeltaSchedule.from_times(rng.uniform(0, 2.5, 2), rng.uniform(0, 2.5, 2), rng.uniform(0, 2), *rng.uniform(-5, 5, 2))
        m = udw.RhoKernel(s).matrices(s.gap_a, s.gap_b)
        mask = np.array([[0, 1, 1, 0], [1, 0, 0, 1], [1, 0, 0, 1], [0, 1, 1, 0]], bool)
        assert np.abs(m[mask]).max() < 1e-15
        assert np.abs(m - m.conj().T).max() < 1e-14
        assert abs(np.trace(m) - 1) < 1e-10
        assert np.linalg.eigvalsh(m)[0] > -1e-12


def test_aab_has_no_negativity():
    for ta1, ta2, lam, g in [(-1.0, -0.5, 0.5, 3.0), (-0.3, -0.1, 2.0, 7.0), (-1.9, -0.2, 1.0, 1.3)]:
        s = DeltaSchedule.from_times([ta1, ta2], [0.0], lam, g)
        assert udw.negativity_of(s) <= 1e-12


def test_baa_reference_point_is_entangled():
    assert udw.negativity_of(baa()) > 0


def test_resonance_zeros():
    for k in range(5):
        s = baa(gap_a=2 * PI * k / 0.5)
        assert udw.negativity_of(s) <= 1e-12


def test_gap_b_independence():
    s = baa(gap_a=2 * PI / 0.5 * 0.25)
    base = udw.negativity_of(s)
    assert base > 0
    for gb in (0.0, 1.0, 5.0, 20.0):
        assert abs(udw.negativity_of(s.with_gaps(gap_b=gb)) - base) <= 1e-12


def test_periodicity():
    gaps = np.linspace(0, 4 * PI, 37)
    n1, _ = udw.negativity_over_gaps(baa(), gaps)
    n2, _ = udw.negativity_over_gaps(baa(), gaps + 2 * PI / 0.5)
    assert np.abs(n1 - n2).max() < 1e-10


def test_single_kick_detectors_are_separable():
    # one kick per detector
    s = DeltaSchedule.from_times([0.7], [0.0], 0.8, 2.0)
    assert udw.negativity_of(s) <= 1e-12
    # degenerate A detector
    assert np.max(udw.negativity_over_gaps(baa(), [0.0])[0]) <= 1e-12


def test_xstate_validation():
    with pytest.raises(ValueError):
        udw.XState(0.5, 0.2, 0.2, 0.2, 0, 0)
    with pytest.raises(ValueError):
        udw.XState(0.25, 0.25, 0.25, 0.25, 0.5, 0)


def test_pt_eigenvalues_examples():
    assert udw.pt_eigenvalues(udw.XState(0.25, 0.25, 0.25, 0.25, 0, 0)) == pytest.approx((0.25,) * 4)
    e = udw.pt_eigenvalues(udw.XState(0.5, 0, 0, 0.5, 0.5, 0))
    assert min(e) == pytest.approx(-0.5, abs=1e-15)


def test_pt_eigenvalues_match_dense_route():
    rng = np.random.default_rng(4)
    for _ in range(50):
        s = DeltaSchedule.from_times(rng.uniform(0, 2.5, 2), rng.uniform(0, 2.5, 1), rng.uniform(0, 2), rng.uniform(-5, 5))
        x = udw.rho_ab(s)
        dense, _ = qmat.herm_eig(qmat.partial_transpose(x.density_matrix(), 1))
        assert np.abs(np.sort(udw.pt_eigenvalues(x)) - dense).max() < 1e-10


def test_commutator_flags():
    assert udw.nonvanishing_commutators(0.0, 0.5, 1.0) == (True, True, True)
    assert udw.nonvanishing_commutators(0.0, 0.5, 2.5) == (True, False, False)
    assert udw.nonvanishing_commutators(0.0, 0.5, 0.5) == (True, True, False)
