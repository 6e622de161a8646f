from __future__ import annotations

import cmath
import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from sectorwave import closedform, solver, spectral
from sectorwave.errors import (
    Diverged,
    InvalidSpeed,
    NearCriticalAngle,
    NotHomogeneous,
    SolveFailure,
    SymbolConfigError,
    ZeroCollapse,
)
from sectorwave.spectral import SpectralField


def _profile_ode(l: int, V: float):
    """Once-integrated travelling-wave ODE, checked by differentiation.

    For v = U(x - Vt), v_t + v_x + v^l v_x + v_xxx = 0 becomes E = 0; the
    candidate G satisfies G' = E, so G = 0 is the profile equation
    -U'' + a U = b U^{l+1}.  Returns (a, b).
    """
    z = sp.Symbol("z")
    U = sp.Function("U")(z)
    Vr = sp.nsimplify(V)
    E = -Vr * U.diff(z) + U.diff(z) + U**l * U.diff(z) + U.diff(z, 3)
    G = (1 - Vr) * U + U ** (l + 1) / (l + 1) + U.diff(z, 2)
    assert sp.simplify(G.diff(z) - E) == 0
    u, upp = sp.symbols("u upp")
    H = sp.expand(-G.subs(U.diff(z, 2), upp).subs(U, u))  # = -upp + (V-1) u - u^{l+1}/(l+1)
    poly = sp.Poly(H, u, upp)
    assert poly.coeff_monomial(upp) == -1
    return float(poly.coeff_monomial(u)), float(-poly.coeff_monomial(u ** (l + 1)))


@pytest.mark.parametrize("l,V", [(1, 2.0), (2, 2.0), (3, 1.5)])
def test_gkdv_problem_matches_integrated_ode(ref_grid, l, V):
    lin, nonlin = _profile_ode(l, V)
    prob = solver.make_gkdv_problem(l, V, ref_grid)
    assert prob.equation_family == "kdv_type"
    k = np.array([0.0, 1.0, 2.5])
    # -u'' + a u  <->  k^2 + a
    assert np.allclose(prob.linear_symbol(k), k**2 + lin)
    (term,) = prob.nonlinearity.terms
    assert term.l == l + 1 and term.coefficient == pytest.approx(nonlin)


def test_gkdv_invalid_speed(ref_grid):
    with pytest.raises(InvalidSpeed):
        solver.make_gkdv_problem(1, 1.0, ref_grid)


def test_long_wave_family(ref_grid):
    prob = solver.SolitaryWaveProblem(
        solver.xi_squared(), 2.0, solver.Nonlinearity.monomial(2, 0.5), "long_wave_type", ref_grid
    )
    assert prob.linear_symbol(np.array([1.0]))[0] == pytest.approx(2 * 1 + 1)
    rep = solver.petviashvili_solve(prob)
    assert rep.converged
    # V u'' scaling: the profile is 3 sech^2(x / (2 sqrt(2)))
    exact = 3 / np.cosh(ref_grid.x / (2 * math.sqrt(2))) ** 2
    assert np.abs(rep.solution.values - exact).max() <= 1e-8


@pytest.mark.parametrize(
    "kwargs",
    [dict(l=1), dict(l=2, coefficient=1.0, modulus_form=True)],
)
def test_term_validation(kwargs):
    with pytest.raises(SymbolConfigError):
        solver.Term(**kwargs)


def test_problem_config_round_trip(ref_grid):
    prob = solver.make_sharpness_problem(math.pi / 6, ref_grid)
    again = solver.problem_from_config(prob.to_config())
    assert again.to_config() == prob.to_config()
    assert complex(again.V) == pytest.approx(cmath.exp(-1j * math.pi / 3))


# --- Petviashvili -----------------------------------------------------------------


def test_petviashvili_gkdv_reference(ref_grid):
    prob = solver.make_gkdv_problem(1, 2.0, ref_grid)
    x = ref_grid.x
    guess = SpectralField(ref_grid, values=2.0 * np.exp(-((x / 2) ** 2)))
    rep = solver.petviashvili_solve(prob, guess, tol=1e-10, max_iter=500)
    assert rep.converged
    assert np.abs(rep.solution.values - 3 / np.cosh(x / 2) ** 2).max() <= 1e-8


def test_petviashvili_amplitude_l2(solved_gkdv):
    rep = solved_gkdv[(2, 2.0)]
    mid = rep.solution.grid.n // 2
    assert rep.solution.values[mid] == pytest.approx(math.sqrt(6), rel=1e-9)


def test_zero_guess_collapses(ref_grid):
    prob = solver.make_gkdv_problem(1, 2.0, ref_grid)
    with pytest.raises(ZeroCollapse) as exc:
        solver.petviashvili_solve(prob, SpectralField(ref_grid, values=np.zeros(ref_grid.n)))
    assert exc.value.report is not None


def test_multi_term_requires_picard(ref_grid):
    nl = solver.Nonlinearity((solver.Term(2, 0.5), solver.Term(3, 0.1)))
    prob = solver.SolitaryWaveProblem(solver.xi_squared(), 2.0, nl, "kdv_type", ref_grid)
    with pytest.raises(NotHomogeneous):
        solver.petviashvili_solve(prob)
    rep = solver.solve(prob)
    assert rep.method == "picard" and rep.converged
    assert solver.residual(prob, rep.solution) <= 1e-10


def test_stabilizer_tends_to_one(solved_gkdv):
    for rep in solved_gkdv.values():
        tail = np.abs(np.asarray(rep.stabilizer_history[-5:]) - 1.0)
        assert tail[-1] <= 1e-8
        # monotone up to roundoff
        assert np.all(np.diff(tail) <= 1e-14)


def test_stopping_tie_reports_converged(ref_grid):
    prob = solver.make_gkdv_problem(1, 2.0, ref_grid)
    n = solver.petviashvili_solve(prob).iterations
    rep = solver.petviashvili_solve(prob, max_iter=n)
    assert rep.converged and rep.iterations == n


def test_unreachable_tolerance_reports_best(ref_grid):
    prob = solver.make_gkdv_problem(1, 2.0, ref_grid)
    rep = solver.petviashvili_solve(prob, tol=1e-30, max_iter=80)
    assert not rep.converged
    assert rep.best_residual < 1e-12
    assert rep.final_residual == rep.best_residual


# --- damped Picard ------------------------------------------------------------------


def test_picard_nls_ground_state(ref_grid):
    prob = solver.make_ground_state_problem(3, ref_grid)
    guess = SpectralField(ref_grid, values=1.3 / np.cosh(0.8 * ref_grid.x))
    rep = solver.damped_picard_solve(prob, guess, damping=0.5, tol=1e-10, max_iter=2000)
    assert rep.converged
    assert np.abs(rep.solution.values - math.sqrt(2) / np.cosh(ref_grid.x)).max() <= 1e-7


def test_plain_picard_never_claims_trivial_convergence(ref_grid):
    prob = solver.make_ground_state_problem(3, ref_grid)
    guess = SpectralField(ref_grid, values=1.3 / np.cosh(0.8 * ref_grid.x))
    with pytest.raises(SolveFailure):
        solver.damped_picard_solve(prob, guess, renormalize=False, max_iter=2000)


@pytest.mark.parametrize("renormalize", [True, False])
def test_undamped_picard_contract(ref_grid, renormalize):
    prob = solver.make_gkdv_problem(1, 2.0, ref_grid)
    try:
        rep = solver.damped_picard_solve(prob, damping=1.0, tol=1e-10, max_iter=300, renormalize=renormalize)
    except (Diverged, ZeroCollapse):
        return
    assert not rep.converged or rep.final_residual <= 1e-10


def test_phase_rotated_ground_state(ref_grid):
    prob = solver.make_ground_state_problem(3, ref_grid)
    phi = 0.7
    guess = SpectralField(ref_grid, values=np.exp(1j * phi) * math.sqrt(2) / np.cosh(ref_grid.x) * 0.9)
    rep = solver.damped_picard_solve(prob, guess, damping=0.5, tol=1e-10, max_iter=2000)
    assert rep.converged
    u0 = rep.solution.values[ref_grid.n // 2]
    assert abs(u0) == pytest.approx(math.sqrt(2), abs=1e-6)
    assert cmath.phase(u0) == pytest.approx(phi, abs=1e-6)


def test_invalid_damping(ref_grid):
    with pytest.raises(ValueError):
        solver.damped_picard_solve(solver.make_gkdv_problem(1, 2.0, ref_grid), damping=0.0)


# --- residual -------------------------------------------------------------------------


def test_residual_of_closed_form(ref_grid, sech2):
    prob = solver.make_gkdv_problem(1, 2.0, ref_grid)
    assert solver.residual(prob, sech2) <= 1e-10
    assert solver.residual(prob, SpectralField(ref_grid, values=np.zeros(ref_grid.n))) == 0.0
    bumped = sech2.with_values(sech2.values + 0.1 / np.cosh(ref_grid.x))
    assert solver.residual(prob, bumped) > 1e-3


def test_converged_reports_recheck(solved_gkdv):
    for (l, V), rep in solved_gkdv.items():
        prob = solver.make_gkdv_problem(l, V, rep.solution.grid)
        assert rep.converged
        assert solver.residual(prob, rep.solution) <= 1e-10


@given(st.integers(-400, 400))
def test_translation_keeps_residual(solved_gkdv, shift):
    rep = solved_gkdv[(1, 2.0)]
    prob = solver.make_gkdv_problem(1, 2.0, rep.solution.grid)
    moved = spectral.translate(rep.solution, shift * rep.solution.grid.dx)
    assert abs(solver.residual(prob, moved) - solver.residual(prob, rep.solution)) <= 1e-11


def test_even_guess_gives_even_solution(solved_gkdv):
    for rep in solved_gkdv.values():
        u = rep.solution
        asym = spectral.l2_norm(u.with_values(u.values - spectral.reflect(u).values)) / spectral.l2_norm(u)
        assert asym <= 1e-9


@given(st.sampled_from([1.5, 2.0, 3.0]), st.sampled_from([1.5, 2.0, 3.0]))
def test_gkdv_l1_amplitude_scaling(solved_gkdv, V, W):
    mid = solved_gkdv[(1, V)].solution.grid.n // 2
    a = solved_gkdv[(1, V)].solution.values[mid]
    b = solved_gkdv[(1, W)].solution.values[mid]
    assert a / b == pytest.approx((V - 1) / (W - 1), rel=1e-6)


# --- sharpness example ---------------------------------------------------------------


def test_sharpness_residuals(ref_grid):
    assert solver.verify_sharpness_example(0.0, ref_grid) <= 1e-10
    assert solver.verify_sharpness_example(math.pi / 6, ref_grid) <= 1e-8
    with pytest.raises(NearCriticalAngle):
        solver.verify_sharpness_example(math.pi / 2, ref_grid)
    with pytest.raises(ValueError):
        solver.verify_sharpness_example(4.0, ref_grid)


def test_sharpness_solved_from_real_guess(ref_grid):
    case = closedform.sharpness_solution(math.pi / 6)
    rep = solver.solve(case.problem(ref_grid))
    assert rep.converged
    assert np.abs(rep.solution.values - case.evaluate(ref_grid.x)).max() <= 1e-8
