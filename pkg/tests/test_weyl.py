from fractions import Fraction as Fr

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qcutstack.config import shipped_program
from qcutstack.cutstack import IETSpec, IntervalQ, build_iet, rotation_iet, singularity_points
from qcutstack.discretize import DiscreteMap, SingleOrbitConcat, discretize, schedule_n_of_N
from qcutstack.hilbert import inner_product, quadratic_phases
from qcutstack.qmap import UnitaryMap, apply_U, apply_U_adjoint, dense_matrix, full_spectrum
from qcutstack.skew import FourierObservable, bump_observable, constant, cos_p, cos_q, pullback_F1, sin_q
from qcutstack.weyl import (
    AliasingError,
    apply_op,
    apply_translation,
    defect_on_state,
    dense_trace,
    egorov_defect,
    expectation,
    op_matrix,
    op_trace,
    orbit_expectations,
    qe_variance,
    spectrum_expectations,
)

from conftest import random_state


def test_translation_zero_is_identity(rng):
    psi = random_state(rng, 9)
    assert np.allclose(apply_translation((0, 0), psi).amps, psi)


def test_translation_shift(rng):
    psi = random_state(rng, 9)
    assert np.allclose(apply_translation((1, 0), psi).amps, np.roll(psi, 1))
    q = np.arange(9)
    assert np.allclose(apply_translation((0, 1), psi).amps, np.exp(-2j * np.pi * q / 9) * psi)


@settings(max_examples=40, deadline=None)
@given(st.tuples(st.integers(-5, 5), st.integers(-5, 5)), st.tuples(st.integers(-5, 5), st.integers(-5, 5)),
       st.integers(11, 40))
def test_composition_law(n, m, N):
    rng = np.random.default_rng(N)
    psi = random_state(rng, N)
    lhs = apply_translation(n, apply_translation(m, psi)).amps
    ph = np.exp(-2j * np.pi * (n[1] * m[0] - n[0] * m[1]) / (2 * N))
    rhs = ph * apply_translation((n[0] + m[0], n[1] + m[1]), psi).amps
    assert np.allclose(lhs, rhs, atol=1e-12)


def test_aliasing_guard():
    with pytest.raises(AliasingError):
        apply_translation((8, 0), np.ones(8))
    with pytest.raises(AliasingError):
        apply_op(cos_q(8), np.ones(8))


def test_multiplication_operator(rng):
    N = 32
    psi = random_state(rng, N)
    assert np.allclose(apply_op(constant(1.0), psi).amps, psi)
    assert np.allclose(apply_op(cos_q(1), psi).amps, np.cos(2 * np.pi * np.arange(N) / N) * psi, atol=1e-13)


def test_hermiticity(rng):
    N = 40
    a = cos_q(2) + cos_p(1, 0.4) + FourierObservable({(2, 3): 0.3 + 0.1j, (-2, -3): 0.3 - 0.1j})
    for _ in range(10):
        psi, phi = random_state(rng, N), random_state(rng, N)
        lhs = inner_product(phi, apply_op(a, psi))
        rhs = np.conj(inner_product(psi, apply_op(a, phi)))
        assert abs(lhs - rhs) < 1e-12


def test_shear_pullback_identity(rng):
    N = 48
    U1 = np.diag(quadratic_phases(N))
    a = cos_p(1) + FourierObservable({(2, 1): 0.5j, (-2, -1): -0.5j}) + cos_q(3)
    lhs = U1.conj().T @ op_matrix(a, N) @ U1
    assert np.allclose(lhs, op_matrix(pullback_F1(a), N), atol=1e-13)


def test_trace_examples():
    assert op_trace(constant(1.0), 16) == pytest.approx(1)
    assert abs(op_trace(FourierObservable({(0, 1): 1.0}), 16)) == 0
    a = FourierObservable({(0, 0): 0.3, (3, -2): 1j, (1, 5): 2.0})
    assert abs(dense_trace(a, 32) - a.mean) < 1e-12
    assert op_trace(a, 32) == a.mean


def test_expectation_on_orbit_eigenfunction():
    N = 30
    perm = (np.arange(N) * 7 + 3) % N
    spec = full_spectrum(UnitaryMap.from_perm(perm))
    a = cos_q(2) + sin_q(1, 0.3)
    for pair in list(spec)[:10]:
        pts = pair.basis.points
        oracle = a.eval_q(pts / N).mean()
        assert abs(expectation(a, pair.vector) - oracle) < 1e-12


def test_orbit_expectations_match_dense(rng):
    N = 36
    spec = full_spectrum(UnitaryMap.from_perm(rng.permutation(N)))
    a = cos_p(1) + FourierObservable({(2, 1): 0.2, (-2, -1): 0.2}) + cos_q(1)
    M = op_matrix(a, N)
    V = spec.dense_vectors()
    dense = np.einsum("qi,qp,pi->i", V.conj(), M, V) / N
    assert np.allclose(spectrum_expectations(a, spec), dense, atol=1e-12)


def test_invariance_along_dynamics(rng):
    N = 64
    perm = rng.permutation(N)
    U = UnitaryMap.from_perm(perm)
    a = cos_q(3) + sin_q(2, 0.5)
    for _ in range(10):
        psi = random_state(rng, N)
        lhs = expectation(a, apply_U(U, psi))
        w = np.abs(psi) ** 2
        rhs = np.sum(w * a.eval_q(perm / N)) / N
        assert abs(lhs - rhs) < 1e-12


def test_defect_zero_for_lattice_rotation():
    N = 64
    f, _ = build_iet(rotation_iet(Fr(5, 64)))
    U = UnitaryMap.from_perm((np.arange(N) + 5) % N)
    assert egorov_defect(cos_q(3), f, U).defect < 1e-12


def test_dense_and_power_paths_agree():
    prog = shipped_program("golden_rotation")
    f, _ = build_iet(IETSpec((2, 1), (1 - Fr(610, 987), Fr(610, 987))))
    N = 128
    m = discretize(prog.family(schedule_n_of_N(prog, N, 8)), N, SingleOrbitConcat(), f)
    U = UnitaryMap(N, m)
    a = cos_p(1) + cos_q(1)
    d = egorov_defect(a, f, U, path="general").defect
    p = egorov_defect(a, f, U, path="general", oracle_limit=64, matrix_free=True).defect
    assert p == pytest.approx(d, rel=1e-5)


def test_lipschitz_defect_bound():
    # away from the glue points the q-only defect is at most L * |f_N - f|
    prog = shipped_program("golden_rotation")
    f, _ = build_iet(IETSpec((2, 1), (1 - Fr(610, 987), Fr(610, 987))))
    a = cos_q(1)
    for N in [256, 1024]:
        m = discretize(prog.family(schedule_n_of_N(prog, N, 8)), N, SingleOrbitConcat(), f)
        internal = m.provenance == 0
        fx = np.array([float(f(Fr(q, N))) for q in range(N)])
        diff = np.abs(a.eval_q(m.perm / N) - a.eval_q(fx))[internal]
        assert diff.max() <= 2 * np.pi * 2 / N + 1e-12


def test_qe_variance_examples():
    N = 16
    spec = full_spectrum(UnitaryMap.from_perm(np.arange(N)))
    assert qe_variance(constant(1.0), spec) == 0
    oracle = np.mean(np.abs(np.cos(2 * np.pi * np.arange(N) / N)))
    assert qe_variance(cos_q(1), spec) == pytest.approx(oracle, abs=1e-13)
    assert qe_variance(cos_q(1), spec.pairs) == pytest.approx(oracle, abs=1e-13)
    with pytest.raises(ValueError):
        qe_variance(cos_q(1), spec.pairs[:5])


def test_qe_variance_full_cycle_is_lattice_mean():
    N = 101
    spec = full_spectrum(UnitaryMap.from_perm((np.arange(N) + 1) % N))
    a = cos_q(1) + constant(0.2)
    lattice_mean = a.eval_q(np.arange(N) / N).mean()
    assert qe_variance(a, spec) == pytest.approx(abs(lattice_mean - a.mean), abs=1e-13)


def test_gaussian_defect_functional_is_finite():
    f, _ = build_iet(rotation_iet(Fr(610, 987)))
    N = 256
    U = UnitaryMap.from_perm(np.arange(N))
    from qcutstack.hilbert import gaussian_state
    v = defect_on_state(cos_q(1), f, U, gaussian_state(Fr(377, 987), N))
    assert np.isfinite(v) and v >= 0
