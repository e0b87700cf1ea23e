"""Radial potentials for contraction flows on C^2 minus the origin.

Every admissible contraction gamma0 embeds into an explicit one-parameter
group phi_t:

* diagonal flow  phi_t(z) = (alpha^t z1, beta^t z2)        (lambda = 0),
* shear flow     phi_t(z) = (beta^{mt}(z1 + t*lhat*z2^m), beta^t z2)
  with lhat = lambda * beta^{-m}                           (lambda != 0),

both satisfying phi_s o phi_t = phi_{s+t} exactly and phi_1 = gamma0.  The
radial time r(z) is the unique root of

    G(r, z) = |phi_{-r}(z)|^2 - 1 = 0,

found by bracketing/bisection plus Newton polish; its first and second
derivatives follow from the implicit function theorem applied to the 2-jet
of G in the five variables (r, x).  G depends on the flow only through
moduli, so r is independent of the chosen arguments of alpha^t, beta^t.

The potential f = a^r (a = |alpha||beta| for diagonal flows, |beta|^{m+1}
for shears) satisfies f(gamma0 z) = a f(z) and is a Kaehler potential; the
positivity of dd^c f is a theorem for diagonal flows but only a runtime
check for shears, where it fails once |lambda| grows too large.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AmbiguousRadialTime, GroupDataError, NotPlurisubharmonic
from .exterior import (
    J_STD,
    ddc_from_hessian,
    from_complex,
    metric_from_form,
    min_metric_eigenvalue,
    to_complex,
)
from .hopf_groups import ContractionParams
from .jets import ComplexJet, JetScalar, jet_variables

ROOT_TOL = 1e-13
_BISECT_ITERS = 60
_NEWTON_ITERS = 8
_SCAN_POINTS = 64


@dataclass(frozen=True)
class FlowSpec:
    """One-parameter group containing the contraction.

    ``log_alpha``/``log_beta`` fix the branch used by ``flow_apply``; the
    radial time and the potential only see their real parts.
    """

    kind: str  # "diagonal" | "shear"
    log_alpha: complex
    log_beta: complex
    m: int = 1
    lam_hat: complex = 0j

    @property
    def multiplier(self) -> float:
        """Rescaling factor a with f(gamma0 z) = a f(z)."""
        if self.kind == "diagonal":
            return float(np.exp(self.log_alpha.real + self.log_beta.real))
        return float(np.exp((self.m + 1) * self.log_beta.real))

    @property
    def log_multiplier(self) -> float:
        return float(np.log(self.multiplier))


def flow_spec_for(params: ContractionParams) -> FlowSpec:
    """Build the flow containing gamma0 from validated contraction data."""
    reason = params.validate()
    if reason is not None:
        raise GroupDataError(reason)
    arg_a = params.arg_alpha if params.arg_alpha is not None else float(np.angle(params.alpha))
    arg_b = params.arg_beta if params.arg_beta is not None else float(np.angle(params.beta))
    log_alpha = complex(np.log(abs(params.alpha)), arg_a)
    log_beta = complex(np.log(abs(params.beta)), arg_b)
    if params.lam == 0:
        return FlowSpec("diagonal", log_alpha, log_beta, params.m)
    lam_hat = params.lam / params.beta**params.m
    return FlowSpec("shear", log_alpha, log_beta, params.m, lam_hat)


def flow_apply(spec: FlowSpec, t, x: np.ndarray) -> np.ndarray:
    """Point(s) phi_t(x); exact group law, phi_0 = Id, phi_1 = gamma0."""
    z = to_complex(x)
    t = np.asarray(t, dtype=float)
    if spec.kind == "diagonal":
        w1 = np.exp(t * spec.log_alpha) * z[..., 0]
        w2 = np.exp(t * spec.log_beta) * z[..., 1]
    else:
        w1 = np.exp(spec.m * t * spec.log_beta) * (
            z[..., 0] + t * spec.lam_hat * z[..., 1] ** spec.m
        )
        w2 = np.exp(t * spec.log_beta) * z[..., 1]
    return from_complex(np.stack([w1, w2], axis=-1))


# ---------------------------------------------------------------------------
# the radial-time equation G(r, z) = |phi_{-r}(z)|^2 - 1
# ---------------------------------------------------------------------------

def _shear_polynomials(spec: FlowSpec, z: np.ndarray):
    """Coefficients of |z1 - r lhat z2^m|^2 = P0 - 2 r P1 + r^2 P2."""
    s = spec.lam_hat * z[..., 1] ** spec.m
    p0 = np.abs(z[..., 0]) ** 2
    p1 = (np.conj(z[..., 0]) * s).real
    p2 = np.abs(s) ** 2
    return p0, p1, p2


def _g_value_slope(spec: FlowSpec, r: np.ndarray, x: np.ndarray):
    """G and dG/dr, vectorised; uses only moduli (branch independent)."""
    z = to_complex(x)
    with np.errstate(over="ignore"):
        if spec.kind == "diagonal":
            la, lb = spec.log_alpha.real, spec.log_beta.real
            a2 = np.abs(z[..., 0]) ** 2
            b2 = np.abs(z[..., 1]) ** 2
            ea = np.exp(-2.0 * r * la)
            eb = np.exp(-2.0 * r * lb)
            value = a2 * ea + b2 * eb - 1.0
            slope = -2.0 * la * a2 * ea - 2.0 * lb * b2 * eb
            return value, slope
        lb = spec.log_beta.real
        m = spec.m
        p0, p1, p2 = _shear_polynomials(spec, z)
        q = np.abs(z[..., 1]) ** 2
        em = np.exp(-2.0 * m * r * lb)
        e1 = np.exp(-2.0 * r * lb)
        poly = p0 - 2.0 * r * p1 + r**2 * p2
        value = poly * em + q * e1 - 1.0
        slope = (-2.0 * p1 + 2.0 * r * p2) * em - 2.0 * m * lb * poly * em - 2.0 * lb * q * e1
        return value, slope


def _g_jet5(spec: FlowSpec, r: np.ndarray, x: np.ndarray) -> JetScalar:
    """2-jet of G in the five variables (r, x1, y1, x2, y2)."""
    jr = jet_variables(np.asarray(r, dtype=float)[..., None], nvars=5, offset=0)[0]
    jx = jet_variables(np.asarray(x, dtype=float), nvars=5, offset=1)
    z1 = ComplexJet(jx[0], jx[1])
    z2 = ComplexJet(jx[2], jx[3])
    if spec.kind == "diagonal":
        la, lb = spec.log_alpha.real, spec.log_beta.real
        return (
            z1.abs2() * (jr * (-2.0 * la)).exp()
            + z2.abs2() * (jr * (-2.0 * lb)).exp()
            - 1.0
        )
    lb = spec.log_beta.real
    w = z1 - (z2**spec.m * spec.lam_hat) * jr
    return (
        w.abs2() * (jr * (-2.0 * spec.m * lb)).exp()
        + z2.abs2() * (jr * (-2.0 * lb)).exp()
        - 1.0
    )


def _g_derivatives(spec: FlowSpec, r: np.ndarray, x: np.ndarray):
    """Gradient and Hessian of G in (r, x1, y1, x2, y2), in closed form.

    Same quantities as the jet route ``_g_jet5`` (the tests pin the two
    against each other); this avoids per-call jet temporaries on the flow
    integrator's hot path.
    """
    r = np.asarray(r, dtype=float)
    x = np.asarray(x, dtype=float)
    batch = r.shape
    grad = np.zeros(batch + (5,))
    hess = np.zeros(batch + (5, 5))
    z = to_complex(x)
    if spec.kind == "diagonal":
        la, lb = spec.log_alpha.real, spec.log_beta.real
        a2 = np.abs(z[..., 0]) ** 2
        b2 = np.abs(z[..., 1]) ** 2
        ea = np.exp(-2.0 * r * la)
        eb = np.exp(-2.0 * r * lb)
        grad[..., 0] = -2.0 * la * a2 * ea - 2.0 * lb * b2 * eb
        grad[..., 1] = 2.0 * x[..., 0] * ea
        grad[..., 2] = 2.0 * x[..., 1] * ea
        grad[..., 3] = 2.0 * x[..., 2] * eb
        grad[..., 4] = 2.0 * x[..., 3] * eb
        hess[..., 0, 0] = 4.0 * la**2 * a2 * ea + 4.0 * lb**2 * b2 * eb
        for i, (coef, ex) in enumerate(((la, ea), (la, ea), (lb, eb), (lb, eb))):
            cross = -4.0 * coef * x[..., i] * ex
            hess[..., 0, i + 1] = cross
            hess[..., i + 1, 0] = cross
            hess[..., i + 1, i + 1] = 2.0 * ex
        return grad, hess

    lb = spec.log_beta.real
    m = spec.m
    # w = z1 - r*s with s = lhat*z2^m; P = |w|^2, Q = |z2|^2
    z2_pow = z[..., 1] ** (m - 1)
    s = spec.lam_hat * z2_pow * z[..., 1]
    s_x = m * spec.lam_hat * z2_pow
    s_xx = (m * (m - 1) * spec.lam_hat * z[..., 1] ** (m - 2)) if m >= 2 else 0.0
    w = z[..., 0] - r * s
    p_val = np.abs(w) ** 2
    q_val = np.abs(z[..., 1]) ** 2
    em = np.exp(-2.0 * m * r * lb)
    e1 = np.exp(-2.0 * r * lb)

    # first derivatives of w in (r, x1, y1, x2, y2): (-s, 1, i, -r s_x, -i r s_x)
    dw = np.stack([-s, np.ones_like(s), 1j * np.ones_like(s),
                   -r * s_x, -1j * r * s_x], axis=-1)
    wbar = np.conj(w)[..., None]
    p_grad = 2.0 * (wbar * dw).real
    # second derivatives: 2 Re(conj(dw_a) dw_b) + 2 Re(wbar * ddw_ab)
    p_hess = 2.0 * np.einsum("...a,...b->...ab", np.conj(dw), dw).real
    ddw = np.zeros(batch + (5, 5), dtype=complex)
    ddw[..., 0, 3] = ddw[..., 3, 0] = -s_x
    ddw[..., 0, 4] = ddw[..., 4, 0] = -1j * s_x
    ddw[..., 3, 3] = -r * s_xx
    ddw[..., 3, 4] = ddw[..., 4, 3] = -1j * r * s_xx
    ddw[..., 4, 4] = r * s_xx
    p_hess += 2.0 * (np.conj(w)[..., None, None] * ddw).real

    cm, c1 = -2.0 * m * lb, -2.0 * lb
    grad[...] = p_grad * em[..., None]
    grad[..., 0] += cm * p_val * em + c1 * q_val * e1
    grad[..., 3] += 2.0 * x[..., 2] * e1
    grad[..., 4] += 2.0 * x[..., 3] * e1

    hess[...] = p_hess * em[..., None, None]
    hess[..., 0, :] += cm * p_grad * em[..., None]
    hess[..., :, 0] += cm * p_grad * em[..., None]
    hess[..., 0, 0] += cm**2 * p_val * em + c1**2 * q_val * e1
    hess[..., 0, 3] += c1 * 2.0 * x[..., 2] * e1
    hess[..., 3, 0] += c1 * 2.0 * x[..., 2] * e1
    hess[..., 0, 4] += c1 * 2.0 * x[..., 3] * e1
    hess[..., 4, 0] += c1 * 2.0 * x[..., 3] * e1
    hess[..., 3, 3] += 2.0 * e1
    hess[..., 4, 4] += 2.0 * e1
    return grad, hess


def _bracket(spec: FlowSpec, x: np.ndarray):
    """Expand [-1, 1] by doubling until G changes sign across the bracket."""
    batch = np.asarray(x, dtype=float).shape[:-1]
    lo = -np.ones(batch)
    hi = np.ones(batch)
    for _ in range(200):
        glo, _ = _g_value_slope(spec, lo, x)
        need = glo >= 0.0
        if not np.any(need):
            break
        lo = np.where(need, 2.0 * lo, lo)
    else:
        raise AmbiguousRadialTime("failed to bracket the radial time from below")
    for _ in range(200):
        ghi, _ = _g_value_slope(spec, hi, x)
        need = ghi <= 0.0
        if not np.any(need):
            break
        hi = np.where(need, 2.0 * hi, hi)
    else:
        raise AmbiguousRadialTime("failed to bracket the radial time from above")
    return lo, hi


def _scan_for_multiple_roots(spec: FlowSpec, lo, hi, x) -> None:
    """Reject brackets in which G changes sign more than once (possible only
    for shear flows with large |lambda|)."""
    grid = np.linspace(0.0, 1.0, _SCAN_POINTS)
    values = np.stack(
        [_g_value_slope(spec, lo + s * (hi - lo), x)[0] for s in grid], axis=0
    )
    signs = np.sign(values)
    signs[signs == 0.0] = 1.0
    changes = np.sum(signs[1:] != signs[:-1], axis=0)
    if np.any(changes > 1):
        idx = np.argwhere(changes > 1).ravel().tolist()
        raise AmbiguousRadialTime(
            f"radial-time equation has multiple roots at sample indices {idx}; "
            "the shear coefficient |lambda| is too large"
        )


class RadialSolver:
    """Root finder for the radial time with jet-grade derivatives.

    ``solve`` performs the guarded cold start; ``polish`` runs warm Newton
    iterations from a previous value (used inside flow integration, where
    query points move continuously).
    """

    def __init__(self, spec: FlowSpec):
        self.spec = spec

    def solve(self, x: np.ndarray, scan: bool = True) -> np.ndarray:
        lo, hi = _bracket(self.spec, x)
        if scan:
            _scan_for_multiple_roots(self.spec, lo, hi, x)
        for _ in range(_BISECT_ITERS):
            mid = 0.5 * (lo + hi)
            gmid, _ = _g_value_slope(self.spec, mid, x)
            lo = np.where(gmid < 0.0, mid, lo)
            hi = np.where(gmid < 0.0, hi, mid)
        r = self._newton(0.5 * (lo + hi), x)
        value, slope = _g_value_slope(self.spec, r, x)
        if np.any(np.abs(value) > ROOT_TOL):
            raise AmbiguousRadialTime(
                f"Newton polish failed, max |G| = {np.max(np.abs(value)):.3e}"
            )
        if np.any(slope <= 0.0):
            raise AmbiguousRadialTime(
                "dG/dr <= 0 at the root; monotonicity certificate failed"
            )
        return r

    def polish(self, x: np.ndarray, r0: np.ndarray) -> np.ndarray:
        r = self._newton(np.asarray(r0, dtype=float), x)
        value, slope = _g_value_slope(self.spec, r, x)
        bad = (np.abs(value) > ROOT_TOL) | (slope <= 0.0)
        if np.any(bad):
            # warm start failed for some elements; redo those from scratch
            r = np.array(r, copy=True)
            idx = np.argwhere(bad)
            subset = np.asarray(x)[bad]
            r[bad] = self.solve(subset, scan=False)
            del idx
        return r

    def _newton(self, r: np.ndarray, x: np.ndarray) -> np.ndarray:
        for _ in range(_NEWTON_ITERS):
            value, slope = _g_value_slope(self.spec, r, x)
            safe = np.where(slope > 0.0, slope, 1.0)
            r = np.where(slope > 0.0, r - value / safe, r)
        return r

    def jet(self, x: np.ndarray, r: np.ndarray, via_jets: bool = False) -> JetScalar:
        """2-jet of r(z) via the implicit function theorem on G(r(z), z) = 0.

        ``via_jets`` switches from the closed-form derivatives of G to the
        JetScalar evaluation of the same expression; the two routes agree to
        machine precision and the tests keep them pinned together.
        """
        if via_jets:
            g = _g_jet5(self.spec, r, x)
            grad, hess = g.grad, g.hess
        else:
            grad, hess = _g_derivatives(self.spec, r, x)
        gr = grad[..., 0]
        gi = grad[..., 1:]
        grr = hess[..., 0, 0]
        gri = hess[..., 0, 1:]
        gij = hess[..., 1:, 1:]
        ri = -gi / gr[..., None]
        cross = np.einsum("...i,...j->...ij", gri, ri)
        rij = -(
            gij
            + cross
            + np.swapaxes(cross, -1, -2)
            + grr[..., None, None] * np.einsum("...i,...j->...ij", ri, ri)
        ) / gr[..., None, None]
        return JetScalar(np.asarray(r, dtype=float), ri, rij)


# ---------------------------------------------------------------------------
# the potential f = a^r and its derived forms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PotentialEval:
    """Potential data at one point (or a batch): radial time and potential as
    2-jets, dd^c f, and the conformally normalised form dd^c f / f."""

    r: JetScalar
    f: JetScalar
    ddc_f: np.ndarray
    lck_form: np.ndarray


class PotentialField:
    """Cached evaluator for r, f and dd^c f over one flow."""

    def __init__(self, spec: FlowSpec):
        self.spec = spec
        self.solver = RadialSolver(spec)

    def radial_time(self, x: np.ndarray, warm: np.ndarray | None = None) -> JetScalar:
        x = np.asarray(x, dtype=float)
        r = self.solver.solve(x) if warm is None else self.solver.polish(x, warm)
        return self.solver.jet(x, r)

    def value_grad_hess(self, x: np.ndarray, warm: np.ndarray | None = None):
        """(f, grad f, hess f, r) without positivity checks; flow-RHS fast path."""
        rj = self.radial_time(x, warm)
        ln_a = self.spec.log_multiplier
        f = np.exp(ln_a * rj.value)
        grad = ln_a * f[..., None] * rj.grad
        hess = ln_a * f[..., None, None] * (
            rj.hess + ln_a * np.einsum("...i,...j->...ij", rj.grad, rj.grad)
        )
        return f, grad, hess, rj.value

    def potential(self, x: np.ndarray, check_positive: bool = True) -> PotentialEval:
        rj = self.radial_time(x)
        fj = (rj * self.spec.log_multiplier).exp()
        ddc = ddc_from_hessian(fj.hess)
        lck = ddc / fj.value[..., None, None]
        if check_positive:
            margin = min_metric_eigenvalue(metric_from_form(ddc, J_STD))
            if np.any(margin <= 0.0):
                raise NotPlurisubharmonic(
                    "dd^c f is not positive definite at a sample point "
                    f"(min eigenvalue {float(np.min(margin)):.3e}); "
                    "reduce |lambda| and rerun"
                )
        return PotentialEval(rj, fj, ddc, lck)


def radial_time(spec: FlowSpec, z: np.ndarray) -> JetScalar:
    """Radial time r(z) with gradient and Hessian; |phi_{-r}(z)| = 1."""
    return PotentialField(spec).radial_time(z)


def potential(spec: FlowSpec, z: np.ndarray, check_positive: bool = True) -> PotentialEval:
    """Potential f = a^r at z together with dd^c f and dd^c f / f."""
    return PotentialField(spec).potential(z, check_positive)


# ---------------------------------------------------------------------------
# invariance diagnostics and sampling
# ---------------------------------------------------------------------------

def _relative_residuals(spec: FlowSpec, images: np.ndarray, x: np.ndarray,
                        factor: float) -> np.ndarray:
    pf = PotentialField(spec)
    f_x = pf.potential(x, check_positive=False).f.value
    f_img = pf.potential(images, check_positive=False).f.value
    return np.abs(f_img - factor * f_x) / f_x


def verify_rescaling(spec: FlowSpec, element, samples: np.ndarray) -> np.ndarray:
    """Per-sample relative residual of f(gamma z) = a^n f(z)."""
    from .hopf_groups import ContractionPower, apply_group_element

    images = apply_group_element(element, samples)
    n = element.n if isinstance(element, ContractionPower) else 0
    return _relative_residuals(spec, images, samples, spec.multiplier**n)


def verify_h_invariance(spec: FlowSpec, elements, samples: np.ndarray) -> np.ndarray:
    """Per-sample worst relative residual of f(h z) = f(z) over the closure.

    For shear flows this passes exactly when eps^{m+1} = 1, i.e. under the
    m = k*ell - 1 constraint; the residual is order one otherwise.
    """
    from .hopf_groups import UnitaryElement, apply_group_element

    worst = np.zeros(np.asarray(samples).shape[:-1])
    for h in elements:
        elem = h if isinstance(h, UnitaryElement) else UnitaryElement(h)
        images = apply_group_element(elem, samples)
        worst = np.maximum(worst, _relative_residuals(spec, images, samples, 1.0))
    return worst


def fundamental_annulus_sample(rng_seed: int, contraction: ContractionParams | FlowSpec,
                               n: int) -> np.ndarray:
    """Deterministic sample of n points with radial time in [0, 1).

    Draws directions uniformly on the unit sphere and flows them forward by a
    uniform time u in [0, 1); since the sphere has r = 0 and the flow shifts
    r by its time, the samples land exactly at r = u.
    """
    spec = contraction if isinstance(contraction, FlowSpec) else flow_spec_for(contraction)
    rng = np.random.default_rng(rng_seed)
    raw = rng.standard_normal((n, 4))
    sphere = raw / np.linalg.norm(raw, axis=-1, keepdims=True)
    u = rng.uniform(0.0, 1.0, size=n)
    return flow_apply(spec, u, sphere)
