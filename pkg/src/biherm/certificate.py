"""Assembly of the bihermitian structure and verification of its identities.

From the quotient triple (phi, psi_plus, psi_minus) at a point the structure
is assembled as:

* j_plus is the standard complex structure; j_minus solves
  psi_minus(u, v) = -phi(j_minus u, v) (a linear solve, so the defining
  relation is exact and compatibility with the metric is a *checked*
  property, maximising cross-validation);
* F = (psi_minus)^{1,1} must define a positive metric g = F(., j_plus .);
* p = -trace(j_plus j_minus)/4, and the canonical forms of the pair
  (g, j_plus, j_minus) follow from their defining formulas.

Pointwise identities are then algebraic consequences and must hold at the
linear-solve tier (1e-9); identities involving derivatives are checked by
Richardson finite differences of the whole pipeline with tiers matching the
number of derivative layers (1e-6 / 1e-4..1e-5 / 1e-3).  Lee forms use
theta = J(delta F) with delta = -*d* throughout.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace

import numpy as np

from .deformation import (
    DEFAULT_ODE_TOL,
    DEFAULT_T_GRID,
    DeformationState,
    QuotientTriple,
    deformation_wedge_residuals,
    integrate_flow,
    quotient_triple,
    select_deformation_time,
)
from .errors import NotPositive
from .exterior import (
    HOLO_RE,
    J_STD,
    TRIPLES,
    acs_from_form_pair,
    dense_from_three,
    hodge_star,
    hodge_star_one,
    hodge_star_three,
    invariant_part,
    j_act_oneform,
    metric_from_form,
    min_metric_eigenvalue,
    nijenhuis_from_partials,
    norm_sq_oneform,
    wedge_one_two,
    wedge_to_volume,
)
from .hopf_groups import (
    ContractionPower,
    HopfGroupData,
    UnitaryElement,
    apply_group_element,
    classify,
    group_closure,
    jacobian,
)
from .potentials import (
    FlowSpec,
    PotentialField,
    flow_spec_for,
    fundamental_annulus_sample,
    verify_h_invariance,
    verify_rescaling,
)
from .reporting import (
    ResidualStats,
    canonical_json,
    chunked_map,
    config_hash,
    env_threads,
    residual_stats,
)

CONVENTIONS = {
    "frame": "(x1, y1, x2, y2) with z_k = x_k + i*y_k",
    "orientation": "dx1^dy1^dx2^dy2 (complex orientation)",
    "ddc": "d^c = i(dbar - d), so dd^c f = 2i ddbar f",
    "codifferential": "delta = -(star d star) in every degree (n = 4)",
    "residuals": "max-norm of (lhs - rhs) over form components, divided by "
                 "(1 + max magnitude of the compared sides)",
}

DEFAULT_TOLERANCES: dict[str, float] = {
    "potential_rescaling": 1e-10,
    "potential_h_invariance": 1e-10,
    "flow_preserves_f": 1e-8,
    "flow_preserves_phi": 1e-7,
    "deformed_psi_volume": 1e-7,
    "deformed_phi_orthogonality": 1e-7,
    "anticommutator": 1e-9,
    "exchange_f_plus": 1e-9,
    "exchange_f_minus": 1e-9,
    "volume_phi": 1e-9,
    "volume_psi_plus": 1e-9,
    "volume_psi_minus": 1e-9,
    "wedge_orthogonality_plus": 1e-9,
    "wedge_orthogonality_minus": 1e-9,
    "wedge_angle": 1e-9,
    "invariant_part_psi_minus": 1e-9,
    "selfdual_phi": 1e-9,
    "selfdual_psi_plus": 1e-9,
    "selfdual_psi_minus": 1e-9,
    "selfdual_f_plus": 1e-9,
    "selfdual_f_minus": 1e-9,
    "j_minus_square": 1e-9,
    "j_minus_orthogonality": 1e-9,
    "angle_bound": 1.0,
    "quotient_leibniz_phi": 1e-6,
    "quotient_leibniz_psi_plus": 1e-6,
    "quotient_leibniz_psi_minus": 1e-6,
    "canonical_factor": 1e-4,
    "type_one_two_part": 1e-5,
    "nijenhuis_j_minus": 1e-5,
    "lee_scalar": 1e-3,
    "lee_sum_selfdual": 1e-4,
    "lee_sum_closed": 1e-4,
    "equivariance_metric": 1e-7,
    "equivariance_j_minus": 1e-7,
}


def _rel(lhs: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Max-norm residual over trailing form axes, scale-normalised."""
    lhs = np.asarray(lhs)
    rhs = np.asarray(rhs)
    axes = tuple(range(1, lhs.ndim))
    num = np.max(np.abs(lhs - rhs), axis=axes) if axes else np.abs(lhs - rhs)
    mags = np.maximum(np.max(np.abs(lhs), axis=axes) if axes else np.abs(lhs),
                      np.max(np.abs(rhs), axis=axes) if axes else np.abs(rhs))
    return num / (1.0 + mags)


@dataclass(frozen=True)
class BihermitianSample:
    """Assembled structure at a batch of points, with per-point residual
    inputs: metric, both complex structures, angle function, canonical and
    quotient forms, and the positivity margin of the invariant part."""

    x: np.ndarray
    t: float
    f: np.ndarray
    g: np.ndarray
    j_plus: np.ndarray
    j_minus: np.ndarray
    p: np.ndarray
    f_plus: np.ndarray
    f_minus: np.ndarray
    phi_g: np.ndarray
    psi_plus_g: np.ndarray
    psi_minus_g: np.ndarray
    phi_check: np.ndarray
    psi_plus_check: np.ndarray
    psi_minus_check: np.ndarray
    tau: np.ndarray
    margin: np.ndarray
    theta_plus: np.ndarray | None = None
    theta_minus: np.ndarray | None = None

    def subset(self, idx) -> "BihermitianSample":
        kwargs = {}
        for fld in fields(self):
            value = getattr(self, fld.name)
            kwargs[fld.name] = value[idx] if isinstance(value, np.ndarray) and value.ndim > 0 and fld.name != "t" else value
        return BihermitianSample(**kwargs)


def assemble_from_triple(triple: QuotientTriple, state: DeformationState,
                         check_positivity: bool = True) -> BihermitianSample:
    """Pointwise assembly (no Lee forms; those need a field, see
    ``StructureField.lee_forms`` / ``assemble_structure``)."""
    phi = triple.phi
    psi_minus = triple.psi_minus
    j_minus = acs_from_form_pair(phi, psi_minus)
    f_inv_part = invariant_part(psi_minus, J_STD)
    g = metric_from_form(f_inv_part, J_STD)
    margin = min_metric_eigenvalue(g)
    if check_positivity and np.any(margin <= 0.0):
        raise NotPositive(
            "invariant part of the deformed form is not positive at "
            f"{int(np.sum(margin <= 0.0))} point(s); reduce t"
        )
    p = -0.25 * np.einsum("ik,...ki->...", J_STD, j_minus)
    comm = (np.einsum("ij,...jk->...ik", J_STD, j_minus)
            - np.einsum("...ij,jk->...ik", j_minus, J_STD))
    phi_g = 0.5 * np.einsum("...ji,...jk->...ik", comm, g)
    psi_plus_g = -np.einsum("ji,...jl->...il", J_STD, phi_g)
    psi_minus_g = -np.einsum("...ji,...jl->...il", j_minus, phi_g)
    f_plus = np.einsum("ji,...jl->...il", J_STD, g)
    f_minus = np.einsum("...ji,...jl->...il", j_minus, g)
    batch = psi_minus.shape[:-2]
    return BihermitianSample(
        x=state.x, t=state.t, f=triple.f, g=g,
        j_plus=np.broadcast_to(J_STD, batch + (4, 4)),
        j_minus=j_minus, p=p,
        f_plus=f_plus, f_minus=f_minus,
        phi_g=phi_g, psi_plus_g=psi_plus_g, psi_minus_g=psi_minus_g,
        phi_check=phi, psi_plus_check=triple.psi_plus,
        psi_minus_check=psi_minus, tau=triple.tau, margin=margin,
    )


class StencilCloud:
    """Richardson stencil (+-h, +-h/2 in each direction) around base points."""

    _OFFSETS = (1.0, -1.0, 0.5, -0.5)

    def __init__(self, x: np.ndarray, h: np.ndarray):
        x = np.asarray(x, dtype=float)
        h = np.asarray(h, dtype=float)
        disp = np.zeros((4, 4, 4))
        for d in range(4):
            for o, s in enumerate(self._OFFSETS):
                disp[d, o, d] = s
        self.base_shape = x.shape[:-1]
        self.h = h
        pts = x[..., None, None, :] + h[..., None, None, None] * disp
        self.points = pts.reshape(-1, 4)

    def partials(self, values: np.ndarray) -> np.ndarray:
        """values evaluated at self.points -> derivative array with the
        direction axis inserted after the batch axes (O(h^4))."""
        rest = values.shape[1:]
        v = values.reshape(self.base_shape + (4, 4) + rest)
        axis = len(self.base_shape) + 1  # the offsets axis
        v0, v1, v2, v3 = (np.take(v, o, axis=axis) for o in range(4))
        h = self.h.reshape(self.base_shape + (1,) * (1 + len(rest)))
        d1 = (v0 - v1) / (2.0 * h)
        d2 = (v2 - v3) / h
        return (4.0 * d2 - d1) / 3.0

    def d_two_form(self, values: np.ndarray) -> np.ndarray:
        """Exterior derivative of a 2-form field as sorted-triple comps."""
        p = self.partials(values)  # (..., d, i, j)
        comps = [p[..., i, j, k] - p[..., j, i, k] + p[..., k, i, j]
                 for (i, j, k) in TRIPLES]
        return np.stack(comps, axis=-1)

    def d_one_form(self, values: np.ndarray) -> np.ndarray:
        """Exterior derivative of a 1-form field as a 2-form."""
        p = self.partials(values)  # (..., d, j)
        return p - np.swapaxes(p, -1, -2)

    def d_three_form(self, comps: np.ndarray) -> np.ndarray:
        """Exterior derivative of a triple-component 3-form field (a scalar
        coefficient on the volume form)."""
        p = self.partials(comps)  # (..., d, triple)
        return p[..., 0, 3] - p[..., 1, 2] + p[..., 2, 1] - p[..., 3, 0]


def lee_theta_from_cloud(center, cloud: StencilCloud, sc):
    """(theta_plus, theta_minus) = J_pm(delta^g F_pm) with delta = -*d*.

    ``center`` needs attributes g and j_minus at the base points; ``sc``
    needs g, f_plus, f_minus at the cloud points.  Synthetic fields in the
    tests drive this directly.
    """
    out = []
    for which in ("f_plus", "f_minus"):
        star_f = hodge_star(sc.g, getattr(sc, which))
        comps = cloud.d_two_form(star_f)
        delta = -hodge_star_three(center.g, dense_from_three(comps))
        j = J_STD if which == "f_plus" else center.j_minus
        out.append(j_act_oneform(j, delta))
    return tuple(out)


class StructureField:
    """The full pipeline as a field: sample points -> assembled structure.

    Every evaluation integrates the deformation flow from scratch at the
    requested points, so finite differences across this field see the whole
    construction (root solve, jets, flow, pullback, linear algebra).
    """

    def __init__(self, spec: FlowSpec, t: float, ode_tol: float = DEFAULT_ODE_TOL,
                 fd_step: float = 1e-3, threads: int | None = None):
        self.spec = spec
        self.t = float(t)
        self.ode_tol = float(ode_tol)
        self.fd_step = float(fd_step)
        self.threads = env_threads(threads)
        self.pf = PotentialField(spec)

    # -- evaluation ----------------------------------------------------------

    def _assemble_chunk(self, x: np.ndarray) -> BihermitianSample:
        state = integrate_flow(self.spec, self.t, x, self.ode_tol)
        triple = quotient_triple(self.spec, state)
        return assemble_from_triple(triple, state, check_positivity=False)

    def assemble(self, x: np.ndarray) -> BihermitianSample:
        """Assembled structure at x (batched, chunked, thread-mapped)."""
        x = np.atleast_2d(np.asarray(x, dtype=float))

        def run(chunk):
            s = self._assemble_chunk(chunk)
            return {f.name: getattr(s, f.name) for f in fields(s)
                    if isinstance(getattr(s, f.name), np.ndarray)
                    and f.name not in ("theta_plus", "theta_minus")}

        parts = chunked_map(run, x, threads=self.threads)
        return BihermitianSample(t=self.t, theta_plus=None, theta_minus=None,
                                 **parts)

    def step_for(self, x: np.ndarray, scale: float = 1.0) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return scale * self.fd_step * np.maximum(1.0, np.linalg.norm(x, axis=-1))

    # -- Lee forms -------------------------------------------------------------

    def lee_forms(self, x: np.ndarray, h: np.ndarray | None = None):
        """(theta_plus, theta_minus) at x via one finite-difference layer."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        center = self.assemble(x)
        cloud = StencilCloud(x, self.step_for(x) if h is None else np.asarray(h))
        sc = self.assemble(cloud.points)
        return lee_theta_from_cloud(center, cloud, sc), center, cloud, sc


def assemble_structure(spec: FlowSpec, triple: QuotientTriple,
                       state: DeformationState, with_lee: bool = True,
                       ode_tol: float = DEFAULT_ODE_TOL,
                       fd_step: float = 1e-3) -> BihermitianSample:
    """Full assembly at the state's base points, including Lee forms.

    Raises NotPositive when the invariant part fails positivity at any point.
    """
    sample = assemble_from_triple(triple, state, check_positivity=True)
    if not with_lee:
        return sample
    fld = StructureField(spec, state.t, ode_tol, fd_step)
    (theta_plus, theta_minus), _, _, _ = fld.lee_forms(state.x)
    return replace(sample, theta_plus=theta_plus, theta_minus=theta_minus)


# ---------------------------------------------------------------------------
# identity batteries
# ---------------------------------------------------------------------------

def check_pointwise_algebra(s: BihermitianSample) -> dict[str, np.ndarray]:
    """Residuals of every pointwise identity of the bihermitian package.

    All are algebraic consequences of the assembly, so failures at the
    1e-9 tier indicate implementation (or input) defects -- which is what
    the injected-error tests rely on.
    """
    out: dict[str, np.ndarray] = {}
    eye = np.broadcast_to(np.eye(4), s.j_minus.shape)
    p2 = s.p[..., None, None]

    anti = (np.einsum("ij,...jk->...ik", J_STD, s.j_minus)
            + np.einsum("...ij,jk->...ik", s.j_minus, J_STD))
    out["anticommutator"] = _rel(anti, -2.0 * p2 * eye)

    out["exchange_f_plus"] = _rel(s.f_plus, p2 * s.f_minus + s.psi_minus_g)
    out["exchange_f_minus"] = _rel(s.f_minus, p2 * s.f_plus - s.psi_plus_g)

    det_g = np.linalg.det(s.g)
    nondegenerate = det_g > 1e-300
    dv = np.sqrt(np.where(nondegenerate, det_g, 1.0))
    vol_target = 2.0 * (1.0 - s.p**2) * dv
    out["volume_phi"] = _rel(wedge_to_volume(s.phi_g, s.phi_g), vol_target)
    out["volume_psi_plus"] = _rel(wedge_to_volume(s.psi_plus_g, s.psi_plus_g),
                                  vol_target)
    out["volume_psi_minus"] = _rel(wedge_to_volume(s.psi_minus_g, s.psi_minus_g),
                                   vol_target)
    out["wedge_orthogonality_plus"] = _rel(
        wedge_to_volume(s.phi_g, s.psi_plus_g), np.zeros_like(s.p))
    out["wedge_orthogonality_minus"] = _rel(
        wedge_to_volume(s.phi_g, s.psi_minus_g), np.zeros_like(s.p))
    out["wedge_angle"] = _rel(wedge_to_volume(s.psi_plus_g, s.psi_minus_g),
                              s.p * wedge_to_volume(s.phi_g, s.phi_g))
    out["invariant_part_psi_minus"] = _rel(
        invariant_part(s.psi_minus_g, J_STD),
        (1.0 - s.p**2)[..., None, None] * s.f_plus)

    # selfduality needs an invertible metric; degenerate points (possible
    # only for synthetic boundary input, never for accepted samples) report
    # an infinite residual rather than aborting the battery
    for name, form in (("selfdual_phi", s.phi_g),
                       ("selfdual_psi_plus", s.psi_plus_g),
                       ("selfdual_psi_minus", s.psi_minus_g),
                       ("selfdual_f_plus", s.f_plus),
                       ("selfdual_f_minus", s.f_minus)):
        residual = np.full(s.p.shape, np.inf)
        if np.any(nondegenerate):
            star = hodge_star(s.g[nondegenerate], form[nondegenerate])
            residual[nondegenerate] = _rel(star, form[nondegenerate])
        out[name] = residual

    out["j_minus_square"] = _rel(
        np.einsum("...ij,...jk->...ik", s.j_minus, s.j_minus), -eye)
    out["j_minus_orthogonality"] = _rel(
        np.einsum("...ji,...jk,...kl->...il", s.j_minus, s.g, s.j_minus), s.g)
    out["angle_bound"] = np.abs(s.p)
    return out


def check_differential_identities(field: StructureField, x: np.ndarray,
                                  h: np.ndarray | None = None,
                                  outer_scale: float = 10.0) -> dict[str, np.ndarray]:
    """Residuals of every identity that involves derivatives of the fields.

    One shared Richardson cloud feeds the single-layer families (Leibniz
    rules of the quotient forms, the canonical-factor equation, the (1,2)
    component, the Nijenhuis tensor); the Lee-form scalar identity and the
    selfdual part of d(theta_+ + theta_-) nest a second cloud around the
    first.  The outer layer uses a wider step (outer_scale * fd_step) to keep
    roundoff amplification below its tier.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    (theta_plus, theta_minus), center, cloud, sc = field.lee_forms(x, h)
    out: dict[str, np.ndarray] = {}

    # quotient Leibniz rules d(form) = tau ^ form
    for name, attr in (("quotient_leibniz_phi", "phi_check"),
                       ("quotient_leibniz_psi_plus", "psi_plus_check"),
                       ("quotient_leibniz_psi_minus", "psi_minus_check")):
        d_form = cloud.d_two_form(getattr(sc, attr))
        target = wedge_one_two(center.tau, getattr(center, attr))
        out[name] = _rel(d_form, target)

    # canonical-factor equation for Omega^g = phi_g + i psi_plus_g
    d_omega = (cloud.d_two_form(sc.phi_g)
               + 1j * cloud.d_two_form(sc.psi_plus_g))
    dp = cloud.partials(sc.p)
    dlog = -2.0 * center.p[..., None] * dp / (1.0 - center.p**2)[..., None]
    factor = 0.5 * (theta_plus + theta_minus) + dlog
    omega = center.phi_g + 1j * center.psi_plus_g
    out["canonical_factor"] = _rel(d_omega, wedge_one_two(factor.astype(complex),
                                                          omega))

    # (1,2)-part of d(phi_check + i psi_minus_check) with respect to j_minus
    d_om = dense_from_three(cloud.d_two_form(sc.phi_check)
                            + 1j * cloud.d_two_form(sc.psi_minus_check))
    pi_10 = 0.5 * (np.broadcast_to(np.eye(4), center.j_minus.shape)
                   - 1j * center.j_minus)
    pi_01 = np.conj(pi_10)
    c12 = (np.einsum("...abc,...ai,...bj,...ck->...ijk", d_om, pi_10, pi_01, pi_01)
           + np.einsum("...abc,...ai,...bj,...ck->...ijk", d_om, pi_01, pi_10, pi_01)
           + np.einsum("...abc,...ai,...bj,...ck->...ijk", d_om, pi_01, pi_01, pi_10))
    num = np.max(np.abs(c12), axis=(-3, -2, -1))
    den = np.max(np.abs(d_om), axis=(-3, -2, -1))
    out["type_one_two_part"] = num / (1.0 + den)

    # integrability of j_minus
    dj = cloud.partials(sc.j_minus)
    n_tensor = nijenhuis_from_partials(center.j_minus, dj)
    out["nijenhuis_j_minus"] = np.max(np.abs(n_tensor), axis=(-3, -2, -1))

    # nested layer: delta theta_pm and d(theta_+ + theta_-)
    h_outer = field.step_for(x, scale=outer_scale)
    outer = StencilCloud(x, h_outer)
    so = field.assemble(outer.points)
    inner = StencilCloud(outer.points, field.step_for(outer.points))
    si = field.assemble(inner.points)
    theta_p_y, theta_m_y = lee_theta_from_cloud(so, inner, si)

    ginv_norm_p = norm_sq_oneform(center.g, theta_plus)
    ginv_norm_m = norm_sq_oneform(center.g, theta_minus)
    deltas = {}
    for name, theta_y in (("plus", theta_p_y), ("minus", theta_m_y)):
        star_theta = hodge_star_one(so.g, theta_y)
        comps = np.stack([star_theta[..., a, b, c] for (a, b, c) in TRIPLES],
                         axis=-1)
        d_vol = outer.d_three_form(comps)
        deltas[name] = -d_vol / np.sqrt(np.linalg.det(center.g))
    lhs = 2.0 * deltas["plus"] + ginv_norm_p
    rhs = 2.0 * deltas["minus"] + ginv_norm_m
    out["lee_scalar"] = np.abs(lhs - rhs) / (1.0 + np.maximum(np.abs(lhs),
                                                              np.abs(rhs)))

    d_theta_sum = outer.d_one_form(theta_p_y + theta_m_y)
    sd = 0.5 * (d_theta_sum + hodge_star(center.g, d_theta_sum))
    den = np.max(np.abs(theta_plus) + np.abs(theta_minus), axis=-1)
    out["lee_sum_selfdual"] = np.max(np.abs(sd), axis=(-2, -1)) / (1.0 + den)
    # theta_+ + theta_- is moreover closed outright (it equals -2 d log f
    # for this construction's normalisation)
    out["lee_sum_closed"] = np.max(np.abs(d_theta_sum), axis=(-2, -1)) / (1.0 + den)
    return out


def check_integrability(jfield, x: np.ndarray, h: float | None = None) -> np.ndarray:
    """Max Nijenhuis component of an arbitrary sampled J-field at x.

    ``jfield`` maps (k, 4) points to (k, 4, 4) endomorphisms; the detector is
    exercised against non-integrable synthetic fields in the tests.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    step = (1e-3 if h is None else h) * np.maximum(1.0, np.linalg.norm(x, axis=-1))
    cloud = StencilCloud(x, step)
    values = np.asarray(jfield(cloud.points))
    dj = cloud.partials(values)
    n_tensor = nijenhuis_from_partials(np.asarray(jfield(x)), dj)
    return np.max(np.abs(n_tensor), axis=(-3, -2, -1))


def check_gamma_equivariance(field: StructureField, x: np.ndarray,
                             elements) -> dict[str, np.ndarray]:
    """Residuals of g and j_minus equivariance under deck transformations.

    For each element the structure computed at gamma(x) must agree with the
    pushforward of the structure at x.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    s0 = field.assemble(x)
    res_g = np.zeros(x.shape[0])
    res_j = np.zeros(x.shape[0])
    for elem in elements:
        y = apply_group_element(elem, x)
        dg = jacobian(elem, x)
        sy = field.assemble(y)
        pulled_g = np.einsum("...ji,...jk,...kl->...il", dg, sy.g, dg)
        res_g = np.maximum(res_g, _rel(pulled_g, s0.g))
        pulled_j = np.einsum("...ij,...jk,...kl->...il",
                             np.linalg.inv(dg), sy.j_minus, dg)
        res_j = np.maximum(res_j, _rel(pulled_j, s0.j_minus))
    return {"equivariance_metric": res_g, "equivariance_j_minus": res_j}


# ---------------------------------------------------------------------------
# full certificate
# ---------------------------------------------------------------------------

@dataclass
class CertificateConfig:
    data: HopfGroupData
    t: float | None = None
    n: int = 200
    seed: int = 7
    ode_tol: float = DEFAULT_ODE_TOL
    fd_step: float = 1e-3
    t_grid: tuple = DEFAULT_T_GRID
    tolerances: dict = field(default_factory=dict)
    threads: int | None = None
    with_differential: bool = True

    def tolerance_table(self) -> dict[str, float]:
        table = dict(DEFAULT_TOLERANCES)
        table.update(self.tolerances)
        return table

    def echo(self) -> dict:
        p = self.data.contraction
        return {
            "alpha": [p.alpha.real, p.alpha.imag],
            "beta": [p.beta.real, p.beta.imag],
            "lambda": [p.lam.real, p.lam.imag],
            "m": p.m,
            "arg_alpha": p.arg_alpha,
            "arg_beta": p.arg_beta,
            "h_generators": [
                [[v.real, v.imag] for v in g.ravel()] for g in self.data.h_generators
            ],
            "t": self.t,
            "n": self.n,
            "seed": self.seed,
            "ode_tol": self.ode_tol,
            "fd_step": self.fd_step,
            "t_grid": list(self.t_grid),
            "with_differential": self.with_differential,
        }


@dataclass
class CertificateReport:
    params: dict
    case: dict
    t: float | None
    n: int
    seed: int
    tolerances: dict
    identities: dict[str, ResidualStats]
    excluded_samples: int
    passed: bool
    refusal: str | None = None
    sweep: list | None = None
    potential_margin: float | None = None

    def to_json_dict(self) -> dict:
        identities = {
            name: {**stats.to_json(),
                   "pass": bool(stats.max < self.tolerances[name])}
            for name, stats in sorted(self.identities.items())
        }
        out = {
            "schema_version": "1",
            "conventions": CONVENTIONS,
            "params": self.params,
            "config_hash": config_hash(self.params),
            "case": self.case,
            "t": self.t,
            "n": self.n,
            "seed": self.seed,
            "tolerances": dict(sorted(self.tolerances.items())),
            "identities": identities,
            "excluded_samples": self.excluded_samples,
            "pass": self.passed,
        }
        if self.refusal is not None:
            out["refusal"] = self.refusal
        if self.sweep is not None:
            out["sweep"] = self.sweep
        if self.potential_margin is not None:
            out["potential_margin"] = self.potential_margin
        return out

    def to_json(self) -> str:
        return canonical_json(self.to_json_dict())


def run_certificate(cfg: CertificateConfig) -> CertificateReport:
    """End-to-end certificate over seeded fundamental-annulus samples.

    Classification refusals produce a refusal report; potential or positivity
    failures raise (the CLI maps them to exit codes).  Sample-level identity
    failures never abort the batch -- they only appear as failing families.
    """
    label = classify(cfg.data)
    tolerances = cfg.tolerance_table()
    if not label.accepted:
        reason = label.reason or label.kind
        if label.kind == "not_real_type":
            reason = (
                "canonical bundle is not of real type (requires alpha*beta "
                f"in R+* and H in SU(2)): {reason}"
            )
        return CertificateReport(
            params=cfg.echo(), case=label.to_json(), t=None, n=cfg.n,
            seed=cfg.seed, tolerances=tolerances, identities={},
            excluded_samples=0, passed=False, refusal=reason,
        )

    spec = flow_spec_for(cfg.data.contraction)
    samples = fundamental_annulus_sample(cfg.seed, spec, cfg.n)
    closure = group_closure(cfg.data.h_generators)
    pf = PotentialField(spec)
    # raises NotPlurisubharmonic for inadmissible shears; the empirical
    # margin quantifies how far |lambda| is from the admissible boundary
    pot = pf.potential(samples)
    potential_margin = float(np.min(min_metric_eigenvalue(
        metric_from_form(pot.ddc_f, J_STD))))

    results: dict[str, np.ndarray] = {}
    results["potential_rescaling"] = verify_rescaling(
        spec, ContractionPower(cfg.data.contraction, 1), samples)
    results["potential_h_invariance"] = verify_h_invariance(
        spec, closure, samples)

    sweep_rows = None
    if cfg.t is None:
        t_star, rows, _ = select_deformation_time(spec, samples, cfg.t_grid,
                                                  cfg.ode_tol)
        sweep_rows = [
            {"t": r.t, "min_margin": r.min_margin,
             "argmin_sample_index": r.argmin_sample_index,
             "p_min": r.p_min, "p_max": r.p_max} for r in rows
        ]
    else:
        t_star = float(cfg.t)

    field_ = StructureField(spec, t_star, cfg.ode_tol, cfg.fd_step, cfg.threads)
    state = integrate_flow(spec, t_star, samples, cfg.ode_tol)
    triple = quotient_triple(spec, state)
    sample = assemble_from_triple(triple, state, check_positivity=False)

    included = sample.margin > 0.0
    excluded = int(np.sum(~included))
    idx = np.nonzero(included)[0]
    kept = sample.subset(idx)
    kept_x = samples[idx]

    f_end = pf.potential(state.x_t, check_positive=False).f.value
    results["flow_preserves_f"] = (np.abs(f_end - triple.f) / triple.f)[idx]
    pulled_phi = np.einsum("...ji,jk,...kl->...il", state.jac, HOLO_RE, state.jac)
    results["flow_preserves_phi"] = _rel(pulled_phi, np.broadcast_to(
        HOLO_RE, pulled_phi.shape))[idx]
    for name, value in deformation_wedge_residuals(triple).items():
        results[name] = value[idx]

    for name, value in check_pointwise_algebra(kept).items():
        results[name] = value

    if cfg.with_differential:
        for name, value in check_differential_identities(field_, kept_x).items():
            results[name] = value

    elements = [ContractionPower(cfg.data.contraction, 1)]
    elements += [UnitaryElement(g) for g in cfg.data.h_generators]
    for name, value in check_gamma_equivariance(field_, kept_x, elements).items():
        results[name] = value

    identities = {name: residual_stats(value) for name, value in results.items()}
    passed = all(stats.max < tolerances[name]
                 for name, stats in identities.items())
    return CertificateReport(
        params=cfg.echo(), case=label.to_json(), t=t_star, n=cfg.n,
        seed=cfg.seed, tolerances=tolerances, identities=identities,
        excluded_samples=excluded, passed=passed, sweep=sweep_rows,
        potential_margin=potential_margin,
    )
