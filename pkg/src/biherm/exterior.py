"""Pointwise exterior algebra on R^4 identified with C^2.

Conventions, fixed once and echoed into every report:

* coordinate frame ordered (x1, y1, x2, y2) with z_k = x_k + i*y_k;
* orientation given by the volume form dx1^dy1^dx2^dy2 (complex orientation);
* a 1-form is a length-4 coefficient array;
* a 2-form B is an antisymmetric 4x4 array with B[i, j] = B(e_i, e_j);
* a 3-form is stored by its 4 components on the sorted triples ``TRIPLES``;
* a 4-form is a single coefficient relative to the volume form;
* an endomorphism J acts on tangent vectors, (J v)_k = J[k, l] v_l, and on
  1-forms by (J a)(v) = -a(J v).

Every function broadcasts over arbitrary leading batch axes.
"""

from __future__ import annotations

import itertools

import numpy as np

from .errors import DegenerateForm, SingularMetric

# Sorted index triples used to store 3-forms; TRIPLES[i] omits index 3 - i.
TRIPLES = ((0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3))


def _levi_civita4() -> np.ndarray:
    eps = np.zeros((4, 4, 4, 4))
    for perm in itertools.permutations(range(4)):
        inversions = sum(
            1 for a in range(4) for b in range(a + 1, 4) if perm[a] > perm[b]
        )
        eps[perm] = -1.0 if inversions % 2 else 1.0
    return eps


#: Levi-Civita symbol with EPS4[0,1,2,3] = +1 relative to the fixed frame.
EPS4 = _levi_civita4()
EPS4.setflags(write=False)


def _two_form(*entries: tuple[int, int, float]) -> np.ndarray:
    out = np.zeros((4, 4))
    for i, j, value in entries:
        out[i, j] = value
        out[j, i] = -value
    return out


#: Standard complex structure (multiplication by i): dx_k -> dy_k.
J_STD = np.array(
    [
        [0.0, -1.0, 0.0, 0.0],
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, -1.0],
        [0.0, 0.0, 1.0, 0.0],
    ]
)
#: Euclidean Kaehler form dx1^dy1 + dx2^dy2.
KAHLER_STD = _two_form((0, 1, 1.0), (2, 3, 1.0))
#: Real part of dz1^dz2: dx1^dx2 - dy1^dy2.
HOLO_RE = _two_form((0, 2, 1.0), (1, 3, -1.0))
#: Imaginary part of dz1^dz2: dx1^dy2 + dy1^dx2.
HOLO_IM = _two_form((0, 3, 1.0), (1, 2, 1.0))
#: Inverse of HOLO_RE as a matrix (HOLO_RE squares to -Id).
HOLO_RE_INV = -HOLO_RE

for _m in (J_STD, KAHLER_STD, HOLO_RE, HOLO_IM, HOLO_RE_INV):
    _m.setflags(write=False)


# ---------------------------------------------------------------------------
# coordinate helpers
# ---------------------------------------------------------------------------

def to_complex(x: np.ndarray) -> np.ndarray:
    """Real point(s) (..., 4) -> complex (..., 2) with z_k = x_k + i*y_k."""
    x = np.asarray(x, dtype=float)
    return np.stack([x[..., 0] + 1j * x[..., 1], x[..., 2] + 1j * x[..., 3]], axis=-1)


def from_complex(z: np.ndarray) -> np.ndarray:
    """Complex point(s) (..., 2) -> real (..., 4)."""
    z = np.asarray(z, dtype=complex)
    return np.stack(
        [z[..., 0].real, z[..., 0].imag, z[..., 1].real, z[..., 1].imag], axis=-1
    )


def realify(m: np.ndarray) -> np.ndarray:
    """Real 4x4 form of a complex-linear map given by a 2x2 complex matrix."""
    m = np.asarray(m, dtype=complex)
    out = np.zeros(m.shape[:-2] + (4, 4))
    for i in range(2):
        for j in range(2):
            a = m[..., i, j]
            out[..., 2 * i, 2 * j] = a.real
            out[..., 2 * i, 2 * j + 1] = -a.imag
            out[..., 2 * i + 1, 2 * j] = a.imag
            out[..., 2 * i + 1, 2 * j + 1] = a.real
    return out


def default_step(x: np.ndarray, h: float | None = None) -> np.ndarray:
    """Finite-difference step 1e-3 * max(1, |x|), broadcast over batch."""
    x = np.asarray(x, dtype=float)
    base = 1e-3 if h is None else float(h)
    return base * np.maximum(1.0, np.linalg.norm(x, axis=-1))


# ---------------------------------------------------------------------------
# pointwise algebra
# ---------------------------------------------------------------------------

def wedge_to_volume(b: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Coefficient s with B ^ C = s * dx1^dy1^dx2^dy2.

    Bilinear and symmetric in (B, C); works for real or complex coefficients.
    """
    return 0.25 * np.einsum("ijkl,...ij,...kl->...", EPS4, b, c)


def acs_from_form_pair(phi: np.ndarray, psi: np.ndarray) -> np.ndarray:
    """Endomorphism J with Psi(u, v) = -Phi(J u, v), i.e. J = -Phi^{-1} Psi.

    Raises DegenerateForm when Phi is not invertible.  The returned J solves
    the defining relation exactly (linear solve); J^2 = -Id only holds when
    the input pair satisfies Phi^2 = Psi^2 and Phi ^ Psi = 0, which the
    caller asserts.
    """
    phi = np.asarray(phi, dtype=float)
    scale = np.max(np.abs(phi), axis=(-2, -1))
    det = np.linalg.det(phi)
    if np.any(np.abs(det) <= 1e-48 * np.maximum(scale, 1e-300) ** 4):
        raise DegenerateForm("form is numerically singular, cannot invert")
    return -np.linalg.solve(phi, np.asarray(psi, dtype=float))


def invariant_part(b: np.ndarray, j: np.ndarray) -> np.ndarray:
    """J-invariant part B^{1,1}(u, v) = (B(u, v) + B(Ju, Jv)) / 2."""
    return 0.5 * (b + np.einsum("...ji,...jk,...kl->...il", j, b, j))


def anti_invariant_part(b: np.ndarray, j: np.ndarray) -> np.ndarray:
    """J-anti-invariant part (B(u, v) - B(Ju, Jv)) / 2."""
    return 0.5 * (b - np.einsum("...ji,...jk,...kl->...il", j, b, j))


def metric_from_form(f: np.ndarray, j: np.ndarray) -> np.ndarray:
    """Symmetric bilinear form g(u, v) = F(u, J v).

    Symmetry holds exactly when F is exactly J-invariant and J^2 = -Id;
    positive definiteness is *not* asserted here -- callers inspect the
    minimum eigenvalue.
    """
    return np.einsum("...ij,...jk->...ik", f, j)


def min_metric_eigenvalue(g: np.ndarray) -> np.ndarray:
    """Smallest eigenvalue of the symmetrised metric, per batch element."""
    sym = 0.5 * (g + np.swapaxes(g, -1, -2))
    return np.linalg.eigvalsh(sym)[..., 0]


def j_act_oneform(j: np.ndarray, a: np.ndarray) -> np.ndarray:
    """Action of an almost complex structure on 1-forms, (Ja)(v) = -a(Jv)."""
    return -np.einsum("...ki,...k->...i", j, a)


# ---------------------------------------------------------------------------
# Hodge star (Riemannian, middle-degree conventions for n = 4)
# ---------------------------------------------------------------------------

def _metric_inverse_and_volume(g: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    g = np.asarray(g, dtype=float)
    det = np.linalg.det(g)
    if np.any(det <= 1e-300):
        raise SingularMetric("metric determinant is not positive")
    return np.linalg.inv(g), np.sqrt(det)


def hodge_star(g: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Hodge star of a 2-form: (*B)_kl = (1/2) sqrt(det g) B^{ij} eps_{ijkl}.

    Conformally invariant on 2-forms; star of star is the identity.
    """
    ginv, vol = _metric_inverse_and_volume(g)
    raised = np.einsum("...ia,...jb,...ab->...ij", ginv, ginv, b)
    return 0.5 * vol[..., None, None] * np.einsum("ijkl,...ij->...kl", EPS4, raised)


def hodge_star_one(g: np.ndarray, a: np.ndarray) -> np.ndarray:
    """Hodge star of a 1-form, returned as a dense antisymmetric (4,4,4)."""
    ginv, vol = _metric_inverse_and_volume(g)
    raised = np.einsum("...im,...m->...i", ginv, a)
    return vol[..., None, None, None] * np.einsum("...i,ijkl->...jkl", raised, EPS4)


def hodge_star_three(g: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Hodge star of a dense 3-form, returned as a 1-form."""
    ginv, vol = _metric_inverse_and_volume(g)
    raised = np.einsum("...ia,...jb,...kc,...abc->...ijk", ginv, ginv, ginv, c)
    return (vol[..., None] / 6.0) * np.einsum("...ijk,ijkl->...l", raised, EPS4)


def hodge_star_four(g: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Hodge star of v * (coordinate volume form), a scalar."""
    _, vol = _metric_inverse_and_volume(g)
    return np.asarray(v) / vol


def selfdual_part(g: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Projection (B + *B) / 2 onto selfdual 2-forms."""
    return 0.5 * (b + hodge_star(g, b))


def norm_sq_oneform(g: np.ndarray, a: np.ndarray) -> np.ndarray:
    """Pointwise squared norm g^{ij} a_i a_j."""
    ginv, _ = _metric_inverse_and_volume(g)
    return np.einsum("...ij,...i,...j->...", ginv, a, a)


# ---------------------------------------------------------------------------
# 3-form storage and wedge helpers
# ---------------------------------------------------------------------------

def dense_from_three(comps: np.ndarray) -> np.ndarray:
    """Sorted-triple components (..., 4) -> dense antisymmetric (..., 4, 4, 4)."""
    comps = np.asarray(comps)
    out = np.zeros(comps.shape[:-1] + (4, 4, 4), dtype=comps.dtype)
    for t, (a, b, c) in enumerate(TRIPLES):
        for perm in itertools.permutations((a, b, c)):
            sign = 1.0
            p = list(perm)
            # parity of the permutation taking (a, b, c) to perm
            if p[0] != a:
                k = p.index(a)
                p[0], p[k] = p[k], p[0]
                sign = -sign
            if p[1] != b:
                p[1], p[2] = p[2], p[1]
                sign = -sign
            out[(...,) + perm] = sign * comps[..., t]
    return out


def three_from_dense(c: np.ndarray) -> np.ndarray:
    """Dense antisymmetric (..., 4, 4, 4) -> sorted-triple components (..., 4)."""
    c = np.asarray(c)
    return np.stack([c[..., a, b, d] for (a, b, d) in TRIPLES], axis=-1)


def wedge_one_two(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """(a ^ B) as sorted-triple components for a 1-form a and 2-form B."""
    a = np.asarray(a)
    b = np.asarray(b)
    comps = [
        a[..., i] * b[..., j, k] - a[..., j] * b[..., i, k] + a[..., k] * b[..., i, j]
        for (i, j, k) in TRIPLES
    ]
    return np.stack(comps, axis=-1)


def solve_lee_form(f: np.ndarray, d_comps: np.ndarray) -> np.ndarray:
    """The unique 1-form tau with tau ^ F = dF, for nondegenerate F.

    Independent route to the Lee form (the pipeline computes it as
    J(delta F)); wedging with F is an isomorphism from 1-forms onto 3-forms
    exactly when F ^ F != 0.
    """
    f = np.asarray(f, dtype=float)
    mat = np.zeros(f.shape[:-2] + (4, 4))
    for t, (a, b, c) in enumerate(TRIPLES):
        mat[..., t, a] += f[..., b, c]
        mat[..., t, b] -= f[..., a, c]
        mat[..., t, c] += f[..., a, b]
    return np.linalg.solve(mat, np.asarray(d_comps, dtype=float))


def wedge_one_three(a: np.ndarray, comps: np.ndarray) -> np.ndarray:
    """(a ^ C) coefficient on the volume form, C given by triple components."""
    a = np.asarray(a)
    comps = np.asarray(comps)
    # complement triples: dir 0 <-> (1,2,3) = TRIPLES[3], etc.
    return (
        a[..., 0] * comps[..., 3]
        - a[..., 1] * comps[..., 2]
        + a[..., 2] * comps[..., 1]
        - a[..., 3] * comps[..., 0]
    )


# ---------------------------------------------------------------------------
# finite-difference exterior calculus on sampled fields
# ---------------------------------------------------------------------------

def field_partials(
    field, x: np.ndarray, h: float | None = None, richardson: bool = True
) -> np.ndarray:
    """Central-difference partial derivatives of a sampled field at one point.

    ``field`` maps a point (4,) to an array; the result has the derivative
    direction as its first axis.  Richardson extrapolation combines steps h
    and h/2 for O(h^4) accuracy.
    """
    x = np.asarray(x, dtype=float)
    step = float(default_step(x, h))
    out = []
    for d in range(4):
        e = np.zeros(4)
        e[d] = step
        d1 = (np.asarray(field(x + e)) - np.asarray(field(x - e))) / (2.0 * step)
        if richardson:
            d2 = (np.asarray(field(x + e / 2)) - np.asarray(field(x - e / 2))) / step
            out.append((4.0 * d2 - d1) / 3.0)
        else:
            out.append(d1)
    return np.stack(out, axis=0)


def exterior_derivative_one(field, x, h=None, richardson=True) -> np.ndarray:
    """d of a 1-form field, returned as a 2-form: (da)_ij = d_i a_j - d_j a_i."""
    p = field_partials(field, x, h, richardson)  # p[d, j] = d_d a_j
    return p - p.T


def exterior_derivative_two(field, x, h=None, richardson=True) -> np.ndarray:
    """d of a 2-form field, returned as sorted-triple components."""
    p = field_partials(field, x, h, richardson)  # p[d, i, j] = d_d B_ij
    comps = [
        p[i, j, k] - p[j, i, k] + p[k, i, j] for (i, j, k) in TRIPLES
    ]
    return np.stack(comps, axis=-1)


def exterior_derivative(field, x, h=None, richardson=True) -> np.ndarray:
    """d of a sampled 1- or 2-form field (dispatch on the probe's shape).

    1-form fields yield a 2-form; 2-form fields yield the 4 components of a
    3-form on the sorted triples.  Accuracy is O(h^2), or O(h^4) with the
    default Richardson extrapolation.
    """
    probe = np.asarray(field(np.asarray(x, dtype=float)))
    if probe.ndim == 1:
        p = field_partials(field, x, h, richardson)
        return p - p.T
    if probe.ndim == 2:
        return exterior_derivative_two(field, x, h, richardson)
    raise ValueError(f"expected a 1- or 2-form field, got shape {probe.shape}")


def nijenhuis_from_partials(j: np.ndarray, dj: np.ndarray) -> np.ndarray:
    """Nijenhuis tensor from J and its partials dj[..., l, k, i] = d_l J^k_i.

    N(e_i, e_j)^k = J^l_i d_l J^k_j - J^l_j d_l J^k_i
                    + J^k_l (d_j J^l_i - d_i J^l_j),
    returned with axes (..., i, j, k).
    """
    t1 = np.einsum("...li,...lkj->...ijk", j, dj)
    t2 = np.einsum("...lj,...lki->...ijk", j, dj)
    t3 = np.einsum("...kl,...jli->...ijk", j, dj)
    t4 = np.einsum("...kl,...ilj->...ijk", j, dj)
    return t1 - t2 + t3 - t4


def nijenhuis(jfield, x, h=None, richardson=True) -> np.ndarray:
    """Nijenhuis tensor of a sampled almost-complex-structure field at x.

    Vanishing of all components certifies integrability; the finite
    differences make this accurate to roughly the square root of the
    field's own noise floor divided by h.
    """
    dj = field_partials(jfield, x, h, richardson)
    return nijenhuis_from_partials(np.asarray(jfield(np.asarray(x, float))), dj)


def ddc_from_hessian(hess: np.ndarray) -> np.ndarray:
    """dd^c f from the real Hessian of f, with d^c = i(dbar - d).

    In the fixed frame dd^c f = J^T H - H J; the result is exactly
    J-invariant (a (1,1)-form) for any symmetric H, and for f = |z|^2 it
    equals 4 * (dx1^dy1 + dx2^dy2).
    """
    return np.einsum("ij,...jk->...ik", J_STD.T.copy(), hess) - np.einsum(
        "...ij,jk->...ik", hess, J_STD
    )
