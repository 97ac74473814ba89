import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cyclogaudin.lie_core import element_F
from cyclogaudin.takiff import (
    INF,
    ORIGIN,
    POINT,
    ConfigurationError,
    CurrentAlgebra,
    DegreeError,
    RationalFunction,
    S_of_u,
    binom,
    check_orbits,
    current_A_of_u,
    hamiltonian_family,
    hamiltonian_pf_sum,
    residue_identity_check,
    sample_points,
    surat_residual,
)

from conftest import algebra_and_aut


def small(kind, z, n_inf=2, n_sites=None, n0=1):
    L, aut = algebra_and_aut(kind)
    return CurrentAlgebra(L, aut, z, n_inf, n_sites or (1,) * len(z), n0)


def test_binom_is_zero_outside_range():
    assert binom(5, 2) == 10
    assert binom(2, 5) == 0
    assert binom(3, -1) == 0
    assert binom(-1, 0) == 0


def test_orbit_collisions_rejected():
    _, aut = algebra_and_aut("sl2_inner")
    with pytest.raises(ConfigurationError):
        check_orbits([1.0, -1.0], aut.omega, aut.T)
    with pytest.raises(ConfigurationError):
        check_orbits([0.0], aut.omega, aut.T)
    check_orbits([1.0, 2.0], aut.omega, aut.T)


@pytest.mark.parametrize(
    "kind,n_inf,n_sites,n0",
    [("sl2", 3, (2, 1), 2), ("sl2_i", 4, (1,), 3), ("sl3_flip", 3, (2,), 2)],
)
def test_mode_count_and_lie_axioms(kind, n_inf, n_sites, n0):
    z = [1.3 + 0.2j, 2.1 - 0.5j][: len(n_sites)]
    alg = small(kind, z, n_inf, n_sites, n0)
    assert alg.dim == alg.expected_dim()
    anti, jac = alg.bracket_residuals()
    assert anti <= 1e-12 and jac <= 1e-10


def test_truncated_mode_is_zero():
    alg = small("sl2", [1.0], n_inf=2, n_sites=(1,), n0=1)
    X = alg.lie.basis_vector(0)
    assert alg.mode(POINT, 0, 1, X).max_abs() == 0
    assert alg.mode(POINT, 0, 0, X).max_abs() == 1


def test_origin_mode_must_lie_in_eigenspace():
    alg = small("sl3_flip", [1.0], n0=2)
    X = alg.lie.basis_vector(0)  # H_1 is not flip-invariant
    with pytest.raises(AssertionError):
        alg.mode(ORIGIN, 0, 0, X)


def test_commutator_of_linear_elements_is_the_bracket():
    alg = small("sl3", [1.0, 2.0], n_sites=(2, 2))
    L = alg.lie
    x = alg.mode(POINT, 0, 0, L.basis_vector(L.e_index(0)))
    y = alg.mode(POINT, 0, 1, L.basis_vector(L.f_index(0)))
    comm = x * y - y * x
    expect = alg.mode(POINT, 0, 1, L.bracket(L.basis_vector(L.e_index(0)), L.basis_vector(L.f_index(0))))
    assert (comm - expect).max_abs() <= 1e-13
    other = alg.mode(POINT, 1, 0, L.basis_vector(L.e_index(0)))
    assert (x * other - other * x).max_abs() == 0


def test_infinity_modes_use_opposite_bracket():
    alg = small("sl2", [1.0], n_inf=3)
    L = alg.lie
    e, f = L.basis_vector(L.e_index(0)), L.basis_vector(L.f_index(0))
    x, y = alg.mode(INF, 0, -1, e), alg.mode(INF, 0, -1, f)
    comm = x * y - y * x
    assert (comm + alg.mode(INF, 0, -2, L.bracket(e, f))).max_abs() <= 1e-13


def test_degree_cap():
    alg = small("sl2", [1.0])
    x = alg.mode(POINT, 0, 0, alg.lie.basis_vector(0))
    with pytest.raises(DegreeError):
        (x * x) * x


def test_current_is_equivariant():
    # A(omega u) relates to A(u) through sigma
    alg = small("sl3_flip", [1.3 + 0.2j], n_inf=3, n_sites=(2,), n0=2)
    aut = alg.aut
    u = 0.7 + 0.4j
    X = np.arange(1, 9, dtype=complex)
    lhs = current_A_of_u(aut.matrix @ X, aut.omega * u, alg)
    rhs = current_A_of_u(X, u, alg) * aut.omega
    assert (lhs - rhs).max_abs() <= 1e-12


@pytest.mark.parametrize(
    "kind,z,n_inf,n_sites,n0",
    [
        ("sl2", [1.0, 2.5 + 0.3j], 2, (1, 1), 1),
        ("sl2", [1.0], 3, (3,), 2),
        ("sl2_inner", [1.2 + 0.1j], 3, (2,), 3),
        ("sl2_i", [1.1 + 0.3j], 4, (2,), 3),
        ("sl3_flip", [1.3 + 0.2j], 2, (2,), 2),
    ],
)
def test_surat_identity(kind, z, n_inf, n_sites, n0):
    alg = small(kind, z, n_inf, n_sites, n0)
    for u in sample_points(alg, 4, seed=0):
        assert surat_residual(alg, u) <= 1e-8


def test_off_class_coefficients_vanish():
    alg = small("sl2_i", [1.1 + 0.3j], 4, (2,), 3)
    fam = hamiltonian_family(alg)
    for p in range(6):
        if (p - 1) % 4:
            assert fam._origin(p).max_abs() <= 1e-12
        if (p + 2) % 4:
            assert fam._inf(p).max_abs() <= 1e-12


def test_F_term_present_in_S():
    # involutions give F = 0; the order-four twist does not
    assert np.max(np.abs(element_F(*algebra_and_aut("sl2_inner")))) == 0
    alg = small("sl2_i", [1.0], 2, (1,), 2)
    assert np.max(np.abs(element_F(alg.lie, alg.aut))) > 0
    u = 0.6 + 0.8j
    assert (S_of_u(u, alg) - hamiltonian_pf_sum(u, alg)).max_abs() <= 1e-10


def test_u_on_pole_rejected():
    alg = small("sl2_inner", [1.0])
    with pytest.raises(ValueError):
        S_of_u(-1.0, alg)


def test_sample_points_are_seeded():
    alg = small("sl2", [1.0, 2.0])
    assert sample_points(alg, 5, 3) == sample_points(alg, 5, 3)
    assert sample_points(alg, 5, 3) != sample_points(alg, 5, 4)


def test_laurent_expansion_at_infinity():
    f = RationalFunction([2.0], [[1.0]], [])
    c = f.laurent_at_infinity(order=4)
    assert np.allclose([c[-1], c[-2], c[-3]], [1, 2, 4])


def test_residue_of_simple_pole():
    f = RationalFunction([0.5, 1j], [[3.0], [-3.0]], [])
    assert residue_identity_check(f) <= 1e-14


complex_st = st.complex_numbers(min_magnitude=0.2, max_magnitude=3.0, allow_nan=False, allow_infinity=False)


@settings(max_examples=60, deadline=None)
@given(
    poles=st.lists(complex_st, min_size=1, max_size=5, unique=True),
    data=st.data(),
)
def test_residue_identity_random(poles, data):
    gaps = [abs(a - b) for i, a in enumerate(poles) for b in poles[i + 1 :]]
    if gaps and min(gaps) < 0.05:
        return
    coeffs = [data.draw(st.lists(complex_st, min_size=1, max_size=3)) for _ in poles]
    poly = data.draw(st.lists(complex_st, max_size=3))
    f = RationalFunction(poles, coeffs, poly)
    scale = 1 + sum(abs(c) for cs in coeffs for c in cs)
    assert residue_identity_check(f) <= 1e-12 * scale
