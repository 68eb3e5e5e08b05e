import numpy as np
import pytest

from transduce_lab.linalg import haar_unitary, random_state
from transduce_lab.oracles import OracleSpec, general_reflecting_oracle, simple_oracle
from transduce_lab.purifier import (
    PurifierError,
    analytic_catalyst,
    build_general,
    build_simple,
    exact_query_complexity,
    general_catalyst,
    general_complexities,
    general_gate_audit,
    prop_trunc1_check,
    ray_basis,
    simple_complexities,
    simple_gate_audit,
    state_generating_accounting,
    verify_transduction,
    walk_reflections,
)
from transduce_lab.query import trace
from transduce_lab.transducer import transduce


def _u_pair(p, j, D):
    g = np.sqrt(p / (1 - p))
    u = np.zeros(D)
    u[j - 1], u[j] = 1.0, g
    perp = np.zeros(D)
    perp[j - 1], perp[j] = 1.0, -1.0 / g
    return u / np.linalg.norm(u), perp / np.linalg.norm(perp)


def test_pairwise_reflection_actions():
    # Odd pairs belong to the first reflection, even pairs to the second.
    D, p = 16, 0.3
    r1, r2 = walk_reflections(p, D)
    for j in range(1, D, 2):
        u, perp = _u_pair(p, j, D)
        assert np.allclose(r1 @ u, u, atol=1e-12)
        assert np.allclose(r1 @ perp, -perp, atol=1e-12)
    for j in range(2, D - 1, 2):
        u, perp = _u_pair(p, j, D)
        assert np.allclose(r2 @ u, u, atol=1e-12)
        assert np.allclose(r2 @ perp, -perp, atol=1e-12)
    e0 = np.eye(D)[0]
    assert np.allclose(r2 @ e0, e0)


def test_second_reflection_fixes_top_vertex():
    for D in (4, 8, 64):
        _, r2 = walk_reflections(0.3, D)
        top = np.eye(D)[D - 1]
        assert np.allclose(r2 @ top, top)


def test_degenerate_p_zero_reflections():
    # p = 0 pins each pair to its lower vertex: both reflections diagonal.
    r1, r2 = walk_reflections(0.0, 4)
    assert np.allclose(r1, np.diag([1, -1, 1, -1]))
    assert np.allclose(r2, np.diag([1, 1, -1, 1]))


def test_compiled_walk_matches_reflections():
    for D in (4, 8, 5, 7, 16):
        for p in (0.0, 0.25, 0.75, 1.0):
            T = build_simple(D)
            S = T.operator(simple_oracle(p)).matrix
            r1, r2 = walk_reflections(p, D)
            want = r2 @ r1
            assert np.max(np.abs(S[:D, :D] - want)) < 1e-13, (D, p)
            if T.dim > D:  # parking must stay decoupled
                assert np.max(np.abs(S[:D, D:])) < 1e-13
                assert np.max(np.abs(S[D:, :D])) < 1e-13


def test_build_simple_rejects_tiny_depth():
    with pytest.raises(PurifierError):
        build_simple(2)


def test_analytic_catalyst_examples():
    v = analytic_catalyst(0.25, 4)
    assert np.allclose(v, [3 ** -0.5, 1 / 3, 3 ** -1.5], atol=1e-15)
    v = analytic_catalyst(0.75, 4)
    assert np.allclose(v, [-(3 ** -0.5), 1 / 3, -(3 ** -1.5)], atol=1e-15)
    assert np.allclose(analytic_catalyst(0.0, 8), 0.0)
    with pytest.raises(PurifierError):
        analytic_catalyst(0.5, 8)


def test_exact_query_complexity_limits():
    assert exact_query_complexity(0.25, 64) == pytest.approx(2.0, abs=1e-9)
    assert exact_query_complexity(0.75, 64) == pytest.approx(2.0, abs=1e-9)
    # Truncated value stays below the depth limit (up to summation roundoff;
    # strictness is only resolvable where the tail clears machine epsilon).
    for p in (0.05, 0.3, 0.45, 0.55, 0.9):
        delta = abs(0.5 - p)
        assert exact_query_complexity(p, 64) <= 1.0 / (2 * delta) + 1e-12
    assert exact_query_complexity(0.45, 64) < 1.0 / (2 * 0.05)
    assert exact_query_complexity(0.55, 64) < 1.0 / (2 * 0.05)


def test_measured_cost_equals_series_oracle():
    for p in np.concatenate([np.arange(0.05, 0.46, 0.05), np.arange(0.55, 0.96, 0.05)]):
        p = float(p)
        rep = simple_complexities(p, 64)
        assert rep.L == pytest.approx(exact_query_complexity(p, 64), abs=1e-9), p
        # Residual-exact transduction onto the signed public vertex.
        g = np.sqrt(p / (1 - p))
        slack = max(1e-9, 2.0 * g ** -(63) if p > 0.5 else 0.0)
        r = 0 if p < 0.5 else 1
        assert np.linalg.norm(rep.tau - (-1.0) ** r * np.array([1.0])) <= slack
        assert rep.residual <= slack * (1 + 1e-9)


def test_verify_transduction_branches():
    rep = verify_transduction(0.25, 64)
    assert rep["tau_error"] <= 1e-10
    rep = verify_transduction(0.75, 5)
    assert rep["derived_bound"] == pytest.approx(2.0 / 9.0)
    assert rep["paper_bound"] == pytest.approx(0.6328125)
    assert rep["tau_error"] <= rep["derived_bound"] * (1 + 1e-9)
    rep = verify_transduction(0.9, 64)
    assert rep["L"] == pytest.approx(1.25, abs=1e-9)  # 1/(2*0.4) truncated
    with pytest.raises(PurifierError):
        verify_transduction(0.5, 64)


def test_walk_cost_is_one_at_infinite_gap():
    assert simple_complexities(0.0, 16).L == pytest.approx(1.0, abs=1e-12)


def test_prop_trunc1_examples():
    assert prop_trunc1_check(0.3, 4, 16, 32)
    assert prop_trunc1_check(0.3, 1, 4, 8)
    with pytest.raises(PurifierError):
        prop_trunc1_check(0.3, 8, 16, 32)  # premise D_small > 2K violated


def test_gate_audits():
    s = simple_gate_audit()
    assert (s.increments, s.decrements, s.oracle_calls) == (1, 1, 2)
    g = general_gate_audit()
    assert (g.increments, g.decrements, g.oracle_calls) == (2, 2, 2)


# ---------------------------------------------------------------------------
# General walk
# ---------------------------------------------------------------------------

def _span_state(spec, coeffs):
    m = 2 * spec.d_w
    e0 = np.zeros(m, complex)
    e0[: spec.d_w] = spec.phi0
    e1 = np.zeros(m, complex)
    e1[spec.d_w:] = spec.phi1
    out = coeffs[0] * e0 + coeffs[1] * e1
    return out / np.linalg.norm(out)


def test_reflection_action_on_threaded_states(rng):
    # The first reflection fixes the flag-up thread seed and the gamma-weighted
    # ladder states, and flips their orthogonal partners, at every depth.
    D, d_w, p = 8, 2, 0.3
    spec = OracleSpec(p, random_state(d_w, rng), random_state(d_w, rng))
    o_ref = general_reflecting_oracle(spec)
    T = build_general(D, d_w)
    alg = T.algorithm
    r1 = alg.unitaries[1].matrix @ alg.query_operator(o_ref) @ alg.unitaries[0].matrix
    # Compose only the first reflection: undo the second's pre-rotation.
    # U1 = inc1 dec0, so R1 = dec0 (query) inc0; rebuild it directly instead.
    from transduce_lab.linalg import controlled, decrement_mod, increment_mod
    from transduce_lab.purifier import general_space
    sp = general_space(D, d_w)
    inc0 = controlled(sp, ["j"], increment_mod(D), lambda a, w: a == 0).matrix
    dec0 = controlled(sp, ["j"], decrement_mod(D), lambda a, w: a == 0).matrix
    r1 = dec0 @ alg.query_operator(o_ref) @ inc0
    m = 2 * d_w
    g = spec.gamma

    def basis_state(j, a, branch):
        out = np.zeros(D * m, complex)
        out[j * m + a * d_w:(j * m + a * d_w) + d_w] = branch
        return out

    fixed0 = basis_state(0, 1, spec.phi1)
    assert np.allclose(r1 @ fixed0, fixed0, atol=1e-12)
    for j in range(1, D):
        ladder = basis_state(j - 1, 0, spec.phi0) + g * basis_state(j, 1, spec.phi1)
        flip = basis_state(j - 1, 0, spec.phi0) - basis_state(j, 1, spec.phi1) / g
        assert np.allclose(r1 @ ladder, ladder, atol=1e-12), j
        assert np.allclose(r1 @ flip, -flip, atol=1e-12), j


def test_two_ray_invariance(rng):
    D, d_w = 16, 2
    spec = OracleSpec(0.3, random_state(d_w, rng), random_state(d_w, rng))
    S = build_general(D, d_w).operator(general_reflecting_oracle(spec)).matrix
    for sector in (0, 1):
        B = ray_basis(sector, D, spec.phi0, spec.phi1)
        proj = B @ B.conj().T
        assert np.linalg.norm(S @ B - proj @ (S @ B)) < 1e-10


def test_general_walk_phase_and_cost(rng):
    D, d_w = 64, 2
    for p in (0.05, 0.25, 0.3, 0.7, 0.95):
        spec = OracleSpec(p, random_state(d_w, rng), random_state(d_w, rng))
        o_ref = general_reflecting_oracle(spec, haar_unitary(2 * d_w - 2, rng))
        phi = _span_state(spec, rng.normal(size=2) + 1j * rng.normal(size=2))
        rep = general_complexities(spec, o_ref, phi, D)
        assert np.linalg.norm(rep.tau - (-1.0) ** spec.r * phi) < 1e-10
        assert rep.L == pytest.approx(exact_query_complexity(p, D), abs=1e-9)


def test_sector_costs_mix_by_weight(rng):
    D, d_w, p = 32, 2, 0.3
    spec = OracleSpec(p, random_state(d_w, rng), random_state(d_w, rng))
    o_ref = general_reflecting_oracle(spec)
    T = build_general(D, d_w)
    alpha, beta = 0.6, 0.8
    reports = []
    for coeffs in ((1.0, 0.0), (0.0, 1.0), (alpha, beta)):
        phi = _span_state(spec, np.array(coeffs, dtype=complex))
        xi, v = general_catalyst(spec, phi, D)
        tr = trace(T.algorithm, o_ref, T.couple(xi, v))
        reports.append(tr)
    q0, q1, qmix = (t.total_query_state for t in reports)
    assert abs(np.vdot(q0, q1)) < 1e-12  # sector query states are orthogonal
    assert reports[2].las_vegas == pytest.approx(
        alpha ** 2 * reports[0].las_vegas + beta ** 2 * reports[1].las_vegas, abs=1e-10)


def test_general_walk_generic_solver_agrees(rng):
    D, d_w, p = 64, 2, 0.75
    spec = OracleSpec(p, random_state(d_w, rng), random_state(d_w, rng))
    o_ref = general_reflecting_oracle(spec)
    phi = _span_state(spec, np.array([1.0, 1.0j]))
    res = transduce(build_general(D, d_w), o_ref, phi)
    assert np.linalg.norm(res.tau + phi) < 1e-8


def test_build_general_validates():
    with pytest.raises(PurifierError):
        build_general(7, 1)
    with pytest.raises(PurifierError):
        build_general(8, 0)


def test_general_catalyst_rejects_out_of_span(rng):
    spec = OracleSpec(0.3, random_state(2, rng), random_state(2, rng))
    stray = np.zeros(4, complex)
    stray[: 2] = np.array([spec.phi0[1].conjugate(), -spec.phi0[0].conjugate()])
    with pytest.raises(PurifierError):
        general_catalyst(spec, stray, 16)


def test_state_generating_accounting_values():
    for p, want in ((0.25, 3.0), (0.0, 2.0)):
        acc = state_generating_accounting(p, D=64, K=2000)
        assert acc["L_total"] == pytest.approx(want, abs=1e-6)
        assert acc["L_formula"] == pytest.approx(want)
        assert acc["sim_error"] <= acc["sim_bound"] + 1e-8


def test_purifier_config_dispatch_and_invariants():
    from transduce_lab.purifier import PurifierConfig
    T = PurifierConfig(8).build()
    assert T.dim_public == 1 and T.dim == 10
    Tg = PurifierConfig(8, flavor="general", d_w=2).build()
    assert Tg.dim_public == 4 and Tg.dim == 32
    for bad in (dict(D=6), dict(D=2), dict(D=8, flavor="odd"), dict(D=8, d_w=0)):
        with pytest.raises(PurifierError):
            PurifierConfig(**bad)
