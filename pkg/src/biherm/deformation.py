"""Hamiltonian deformation of the standard holomorphic 2-form.

The construction: let f be the radial potential of a contraction flow and X
the Hamiltonian vector field of f with respect to the constant 2-form
Phi = Re(dz1 ^ dz2), i.e. i_X Phi = df.  Writing phi_t for the flow of X and
D = Dphi_t for its differential (the variational solution), the deformed
form is the pullback

    psi_minus(t, x) = D(x)^T  Im(dz1 ^ dz2)  D(x),

and dividing the triple (Phi, Im Omega, psi_minus) by f produces deck-group
invariant forms whose invariant part becomes positive for small t > 0.

Since i_X Phi is exact, the flow preserves Phi, preserves f, and has
det D > 0; the integrator only monitors these facts, it never enforces them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotPositive, StepSizeUnderflow
from .exterior import (
    HOLO_IM,
    HOLO_RE,
    J_STD,
    invariant_part,
    metric_from_form,
    min_metric_eigenvalue,
    wedge_to_volume,
)
from .potentials import FlowSpec, PotentialField

DEFAULT_ODE_TOL = 1e-10
DEFAULT_T_GRID = (0.02, 0.05, 0.1, 0.15, 0.2, 0.3, 0.4, 0.5)

# Dormand-Prince 5(4) pair; row 7 equals the 5th-order weights (FSAL).
_DP_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_DP_ERR = (
    71 / 57600,
    0.0,
    -71 / 16695,
    71 / 1920,
    -17253 / 339200,
    22 / 525,
    -1 / 40,
)


@dataclass(frozen=True)
class DeformationState:
    """Flow data at deformation time t: base points, images, and the
    variational Jacobian D = Dphi_t (D(0) = Id, det D > 0)."""

    t: float
    x: np.ndarray  # (..., 4)
    x_t: np.ndarray  # (..., 4)
    jac: np.ndarray  # (..., 4, 4)


@dataclass(frozen=True)
class QuotientTriple:
    """Deck-invariant forms at the base points: phi = Phi/f,
    psi_plus = Im(Omega)/f, psi_minus = (pullback)/f, tau = -d log f."""

    phi: np.ndarray
    psi_plus: np.ndarray
    psi_minus: np.ndarray
    tau: np.ndarray
    f: np.ndarray


def hamiltonian_field(spec: FlowSpec, z: np.ndarray):
    """Hamiltonian vector field X with i_X Phi = df, and its derivative.

    Phi has constant coefficients with Phi^2 = -Id as a matrix, so
    X = Phi grad(f) and dX/dz = Phi Hess(f); the defining relation is then
    reproduced exactly (to solver precision in f).
    """
    pf = PotentialField(spec)
    _, grad, hess, _ = pf.value_grad_hess(np.asarray(z, dtype=float))
    x_vec = np.einsum("ij,...j->...i", HOLO_RE, grad)
    deriv = np.einsum("ij,...jk->...ik", HOLO_RE, hess)
    return x_vec, deriv


class _FlowRHS:
    """Right-hand side of the coupled trajectory/variational system with a
    warm-started radial root between calls."""

    def __init__(self, pf: PotentialField):
        self.pf = pf
        self.warm: np.ndarray | None = None

    def __call__(self, y: np.ndarray) -> np.ndarray:
        x = y[..., :4]
        d = y[..., 4:].reshape(y.shape[:-1] + (4, 4))
        _, grad, hess, r = self.pf.value_grad_hess(x, warm=self.warm)
        self.warm = r
        dx = np.einsum("ij,...j->...i", HOLO_RE, grad)
        a = np.einsum("ij,...jk->...ik", HOLO_RE, hess)
        dd = np.einsum("...ij,...jk->...ik", a, d)
        return np.concatenate([dx, dd.reshape(y.shape[:-1] + (16,))], axis=-1)


def _pack(x: np.ndarray) -> np.ndarray:
    x = np.atleast_2d(np.asarray(x, dtype=float))
    eye = np.broadcast_to(np.eye(4).reshape(16), x.shape[:-1] + (16,))
    return np.concatenate([x, eye], axis=-1)


def _integrate(pf: PotentialField, y0: np.ndarray, t0: float, t1: float,
               ode_tol: float, max_steps: int = 100_000) -> np.ndarray:
    """Adaptive Dormand-Prince 5(4) over the whole batch; the step is
    controlled by the worst scaled local error across all components."""
    if t1 == t0:
        return y0
    rhs = _FlowRHS(pf)
    direction = 1.0 if t1 > t0 else -1.0
    t = t0
    y = y0
    k1 = rhs(y)
    h = direction * min(0.05, abs(t1 - t0))
    h_floor = 1e-14 * max(1.0, abs(t1 - t0))
    for _ in range(max_steps):
        if (t1 - t) * direction <= 0.0:
            return y
        h = direction * min(abs(h), abs(t1 - t))
        ks = [k1]
        for stage in range(1, 7):
            incr = sum(a * k for a, k in zip(_DP_A[stage], ks))
            ks.append(rhs(y + h * incr))
        y_new = y + h * sum(a * k for a, k in zip(_DP_A[6], ks))
        err_vec = h * sum(e * k for e, k in zip(_DP_ERR, ks))
        scale = ode_tol + ode_tol * np.maximum(np.abs(y), np.abs(y_new))
        err = float(np.max(np.abs(err_vec) / scale))
        if err <= 1.0:
            t = t1 if abs(t1 - (t + h)) < h_floor else t + h
            y = y_new
            k1 = ks[6]  # first-same-as-last
        factor = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
        h *= factor
        if abs(h) < h_floor:
            raise StepSizeUnderflow(
                f"step size underflow at t = {t:.6g} (tol {ode_tol:g})"
            )
    raise StepSizeUnderflow(f"exceeded {max_steps} steps integrating to t = {t1}")


def integrate_flow(spec: FlowSpec, t: float, x: np.ndarray,
                   ode_tol: float = DEFAULT_ODE_TOL) -> DeformationState:
    """Flow points x to time t, carrying the variational Jacobian along.

    Local error per step is kept at or below ode_tol (absolute and relative);
    t = 0 returns the identity state.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y = _integrate(PotentialField(spec), _pack(x), 0.0, float(t), ode_tol)
    return DeformationState(
        t=float(t),
        x=x,
        x_t=y[..., :4],
        jac=y[..., 4:].reshape(x.shape[:-1] + (4, 4)),
    )


def integrate_flow_chain(spec: FlowSpec, t_values, x: np.ndarray,
                         ode_tol: float = DEFAULT_ODE_TOL) -> list[DeformationState]:
    """States at an increasing sequence of times, continuing one trajectory."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    pf = PotentialField(spec)
    ts = [float(t) for t in t_values]
    if any(a > b for a, b in zip(ts, ts[1:])):
        raise ValueError("t_values must be nondecreasing")
    states = []
    y = _pack(x)
    prev = 0.0
    for t in ts:
        y = _integrate(pf, y, prev, t, ode_tol)
        prev = t
        states.append(
            DeformationState(t, x, y[..., :4].copy(),
                             y[..., 4:].reshape(x.shape[:-1] + (4, 4)).copy())
        )
    return states


def pullback_psi(state: DeformationState) -> np.ndarray:
    """Pullback of the constant form Im(dz1^dz2) by phi_t: D^T Psi D."""
    return np.einsum("...ji,jk,...kl->...il", state.jac, HOLO_IM, state.jac)


def quotient_triple(spec: FlowSpec, state: DeformationState) -> QuotientTriple:
    """Deck-invariant quotient forms at the base points of the state."""
    pot = PotentialField(spec).potential(state.x, check_positive=False)
    f = pot.f.value
    inv_f = 1.0 / f[..., None, None]
    return QuotientTriple(
        phi=HOLO_RE * inv_f,
        psi_plus=HOLO_IM * inv_f,
        psi_minus=pullback_psi(state) * inv_f,
        tau=-pot.f.grad / f[..., None],
        f=f,
    )


def t_zero_derivative_check(spec: FlowSpec, x: np.ndarray, h_t: float = 1e-4,
                            ode_tol: float = DEFAULT_ODE_TOL) -> np.ndarray:
    """Relative residual of the t = 0 slope of psi_minus/f against dd^c f / f.

    The central difference in t of the quotient pullback must reproduce the
    conformally normalised Kaehler form of the potential.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    pf = PotentialField(spec)
    pot = pf.potential(x, check_positive=False)
    plus = pullback_psi(integrate_flow(spec, h_t, x, ode_tol))
    minus = pullback_psi(integrate_flow(spec, -h_t, x, ode_tol))
    slope = (plus - minus) / (2.0 * h_t * pot.f.value[..., None, None])
    target = pot.lck_form
    num = np.max(np.abs(slope - target), axis=(-2, -1))
    den = np.max(np.abs(target), axis=(-2, -1))
    return num / den


@dataclass(frozen=True)
class SweepRow:
    t: float
    min_margin: float
    argmin_sample_index: int
    p_min: float
    p_max: float


def positivity_sweep(spec: FlowSpec, t_grid, samples: np.ndarray,
                     ode_tol: float = DEFAULT_ODE_TOL) -> list[SweepRow]:
    """Minimum eigenvalue of the metric of the invariant part of the deformed
    form, per deformation time over the sample set.

    Near t = 0 the margin is linear with slope given by the potential form;
    the table reports, it does not assert.
    """
    from .exterior import acs_from_form_pair

    ts = sorted({float(t) for t in t_grid})
    x = np.atleast_2d(np.asarray(samples, dtype=float))
    f = PotentialField(spec).potential(x).f.value
    rows = []
    for state in integrate_flow_chain(spec, ts, x, ode_tol):
        pulled = pullback_psi(state)
        psi_minus = pulled / f[..., None, None]
        margin = min_metric_eigenvalue(
            metric_from_form(invariant_part(psi_minus, J_STD), J_STD)
        )
        j_minus = acs_from_form_pair(np.broadcast_to(HOLO_RE, pulled.shape),
                                     pulled)
        p = -0.25 * np.einsum("ik,...ki->...", J_STD, j_minus)
        rows.append(
            SweepRow(
                t=state.t,
                min_margin=float(np.min(margin)),
                argmin_sample_index=int(np.argmin(margin)),
                p_min=float(np.min(p)),
                p_max=float(np.max(p)),
            )
        )
    return rows


def select_deformation_time(spec: FlowSpec, samples: np.ndarray,
                            t_grid=DEFAULT_T_GRID,
                            ode_tol: float = DEFAULT_ODE_TOL):
    """Largest grid time whose margin exceeds 10% of the t-linear prediction.

    Returns (t_star, rows, slope_floor); raises NotPositive when no grid time
    is certified.
    """
    x = np.atleast_2d(np.asarray(samples, dtype=float))
    pot = PotentialField(spec).potential(x)
    slope_floor = float(np.min(min_metric_eigenvalue(
        metric_from_form(pot.lck_form, J_STD))))
    rows = positivity_sweep(spec, t_grid, x, ode_tol)
    chosen = None
    for row in rows:
        if row.t > 0.0 and row.min_margin >= 0.1 * row.t * slope_floor:
            chosen = row.t
    if chosen is None:
        raise NotPositive(
            "no deformation time on the grid has a certified positive margin"
        )
    return chosen, rows, slope_floor


def deformation_wedge_residuals(triple: QuotientTriple) -> dict[str, np.ndarray]:
    """Residuals of the wedge hypotheses the deformed triple must satisfy:
    psi_minus^2 = phi^2 and phi ^ psi_minus = 0."""
    phi2 = wedge_to_volume(triple.phi, triple.phi)
    psi2 = wedge_to_volume(triple.psi_minus, triple.psi_minus)
    mixed = wedge_to_volume(triple.phi, triple.psi_minus)
    return {
        "deformed_psi_volume": np.abs(psi2 - phi2) / (1.0 + np.abs(phi2)),
        "deformed_phi_orthogonality": np.abs(mixed) / (1.0 + np.abs(phi2)),
    }
