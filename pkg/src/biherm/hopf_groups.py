"""Fundamental-group data of Hopf surfaces: validation and classification.

The deck group is generated by a polynomial contraction of C^2,

    gamma0(z1, z2) = (alpha z1 + lambda z2^m, beta z2),
    0 < |alpha| <= |beta| < 1,   lambda (alpha - beta^m) = 0,

together with a finite subgroup H of U(2).  A surface carries the structures
this package builds exactly when alpha*beta is a positive real and H lies in
SU(2); the admissible groups then split into three families:

* case (a): |alpha| = |beta| (so beta = conj(alpha)), H any finite subgroup
  of SU(2) acting freely on the unit sphere;
* case (b): lambda = 0, |alpha| < |beta|, H cyclic generated by
  diag(eps, 1/eps) with eps a primitive ell-th root of unity;
* case (c): lambda != 0 (so alpha = beta^m), H cyclic as in (b) but with
  m = k*ell - 1 so that H commutes with the contraction.

Everything here is plain parameter validation and small linear algebra;
tolerances are absolute (inputs are exact-ish user parameters, not data):
1e-10 for unitarity and reality checks, Frobenius distance 1e-8 for matching
group elements.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import GroupDataError, NotFinite
from .exterior import from_complex, realify, to_complex

REALITY_TOL = 1e-10
MATCH_TOL = 1e-8
DEFAULT_CLOSURE_CAP = 1000


# ---------------------------------------------------------------------------
# parameter containers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ContractionParams:
    """Normal-form contraction data (alpha, beta, lambda, m) plus the chosen
    arguments for the fractional powers alpha^t, beta^t."""

    alpha: complex
    beta: complex
    lam: complex = 0j
    m: int = 1
    arg_alpha: float | None = None  # default: principal argument
    arg_beta: float | None = None

    def validate(self) -> str | None:
        """Return a reason string when the normal form is violated, else None."""
        a, b = abs(self.alpha), abs(self.beta)
        if not (0.0 < a <= b + 1e-12):
            return f"normal form requires 0 < |alpha| <= |beta|, got {a}, {b}"
        if not (b < 1.0):
            return f"normal form requires |beta| < 1, got {b}"
        if self.m < 1:
            return f"m must be a positive integer, got {self.m}"
        gap = abs(self.lam) * abs(self.alpha - self.beta**self.m)
        if gap > REALITY_TOL:
            return (
                "resonance constraint lambda*(alpha - beta^m) = 0 violated "
                f"(residual {gap:.3e})"
            )
        return None


@dataclass(frozen=True)
class HopfGroupData:
    """Contraction parameters together with generators of the finite part H."""

    contraction: ContractionParams
    h_generators: tuple[np.ndarray, ...] = ()

    def __post_init__(self):
        gens = tuple(np.asarray(g, dtype=complex).reshape(2, 2) for g in self.h_generators)
        object.__setattr__(self, "h_generators", gens)


@dataclass(frozen=True)
class CaseLabel:
    """Classification outcome; ``kind`` is one of 'a', 'b', 'c',
    'not_real_type', 'invalid'."""

    kind: str
    a: float | None = None
    ell: int | None = None
    k: int | None = None
    reason: str | None = None
    diagnostics: dict = field(default_factory=dict)

    @property
    def accepted(self) -> bool:
        return self.kind in ("a", "b", "c")

    def to_json(self) -> dict:
        out: dict = {"case": self.kind}
        for key in ("a", "ell", "k", "reason"):
            value = getattr(self, key)
            if value is not None:
                out[key] = value
        return out


# ---------------------------------------------------------------------------
# JSON parsing (the one external wire format of this module)
# ---------------------------------------------------------------------------

def _complex_from(obj, path: str) -> complex:
    if isinstance(obj, (int, float)):
        return complex(obj)
    if isinstance(obj, dict):
        extra = set(obj) - {"re", "im"}
        if extra:
            raise GroupDataError(f"{path}: unexpected keys {sorted(extra)}")
        try:
            return complex(float(obj.get("re", 0.0)), float(obj.get("im", 0.0)))
        except (TypeError, ValueError) as exc:
            raise GroupDataError(f"{path}: {exc}") from exc
    if isinstance(obj, (list, tuple)) and len(obj) == 2:
        return complex(float(obj[0]), float(obj[1]))
    raise GroupDataError(f"{path}: expected a number, [re, im] or {{re, im}}")


def group_data_from_json(doc: dict) -> HopfGroupData:
    """Parse {"alpha": .., "beta": .., "lambda": .., "m": .., "H": [...],
    "arg_alpha": .., "arg_beta": ..} into HopfGroupData.

    Raises GroupDataError with a field pointer on any malformed entry.
    """
    if not isinstance(doc, dict):
        raise GroupDataError("top level: expected a JSON object")
    if "alpha" not in doc or "beta" not in doc:
        raise GroupDataError("top level: 'alpha' and 'beta' are required")
    alpha = _complex_from(doc["alpha"], "alpha")
    beta = _complex_from(doc["beta"], "beta")
    lam = _complex_from(doc.get("lambda", 0.0), "lambda")
    m = doc.get("m", 1)
    if not isinstance(m, int) or m < 1:
        raise GroupDataError(f"m: expected a positive integer, got {m!r}")
    args = {}
    for key in ("arg_alpha", "arg_beta"):
        if key in doc:
            try:
                args[key] = float(doc[key])
            except (TypeError, ValueError) as exc:
                raise GroupDataError(f"{key}: {exc}") from exc
    gens = []
    for i, row in enumerate(doc.get("H", [])):
        if not isinstance(row, (list, tuple)) or len(row) != 4:
            raise GroupDataError(f"H[{i}]: expected 4 complex entries (row-major)")
        entries = [_complex_from(v, f"H[{i}][{j}]") for j, v in enumerate(row)]
        gens.append(np.array(entries, dtype=complex).reshape(2, 2))
    params = ContractionParams(alpha, beta, lam, m, **args)
    return HopfGroupData(params, tuple(gens))


# ---------------------------------------------------------------------------
# finite group machinery
# ---------------------------------------------------------------------------

def _is_unitary(g: np.ndarray) -> bool:
    return np.max(np.abs(g @ g.conj().T - np.eye(2))) < REALITY_TOL


def group_closure(gens, cap: int = DEFAULT_CLOSURE_CAP) -> list[np.ndarray]:
    """Close a list of unitary 2x2 matrices under multiplication.

    Elements are matched by Frobenius distance < 1e-8; the identity is always
    element 0 of the result.  Raises NotFinite when the closure exceeds
    ``cap`` (an irrational rotation, for instance, never closes).
    """
    gens = [np.asarray(g, dtype=complex).reshape(2, 2) for g in gens]
    for i, g in enumerate(gens):
        if not _is_unitary(g):
            raise GroupDataError(f"generator {i} is not unitary within {REALITY_TOL}")

    elems: list[np.ndarray] = [np.eye(2, dtype=complex)]

    def _find(h) -> bool:
        return any(np.max(np.abs(h - e)) < MATCH_TOL for e in elems)

    frontier = list(range(0, 1))
    while frontier:
        new_frontier = []
        for idx in frontier:
            for g in gens:
                h = elems[idx] @ g
                if not _find(h):
                    elems.append(h)
                    new_frontier.append(len(elems) - 1)
                    if len(elems) > cap:
                        raise NotFinite(
                            f"closure exceeded cap of {cap} elements; "
                            "generators do not span a finite group"
                        )
        frontier = new_frontier
    return elems


def free_sphere_action_defect(closure) -> float:
    """How close a nonidentity closure element comes to having eigenvalue 1.

    Finite subgroups of SU(2) act freely on S^3, so for valid input this is
    bounded away from zero; returns the minimum |eigenvalue - 1| over the
    nonidentity elements (inf for the trivial group).
    """
    worst = np.inf
    for h in closure[1:]:
        eig = np.linalg.eigvals(h)
        worst = min(worst, float(np.min(np.abs(eig - 1.0))))
    return worst


def real_type_check(data: HopfGroupData, cap: int = DEFAULT_CLOSURE_CAP):
    """Whether the canonical representation gamma0 -> alpha*beta,
    h -> det(h) lands in the positive reals.

    True iff alpha*beta is real positive and every closure element of H has
    unit determinant.  Returns (ok, diagnostics).
    """
    p = data.contraction
    ab = p.alpha * p.beta
    diagnostics: dict = {
        "alpha_beta": [ab.real, ab.imag],
        "alpha_beta_real_positive": bool(abs(ab.imag) < REALITY_TOL and ab.real > 0),
    }
    ok = diagnostics["alpha_beta_real_positive"]
    if not ok:
        diagnostics["reason"] = "alpha*beta is not a positive real"
    closure = group_closure(data.h_generators, cap)
    diagnostics["h_order"] = len(closure)
    det_defect = max((abs(np.linalg.det(h) - 1.0) for h in closure), default=0.0)
    diagnostics["max_det_defect"] = float(det_defect)
    if det_defect >= REALITY_TOL:
        ok = False
        diagnostics.setdefault("reason", "H is not contained in SU(2) (det(h) != 1)")
    return ok, diagnostics


def _diagonal_eps(closure) -> tuple[int, complex] | None:
    """If the closure is the standard cyclic group {diag(eps^j, eps^-j)},
    return (order, primitive generator eps); otherwise None."""
    for h in closure:
        if abs(h[0, 1]) > MATCH_TOL or abs(h[1, 0]) > MATCH_TOL:
            return None
        if abs(h[0, 0] * h[1, 1] - 1.0) > MATCH_TOL:
            return None
    ell = len(closure)
    firsts = sorted((np.angle(h[0, 0]) % (2 * np.pi) for h in closure))
    expected = sorted((2 * np.pi * j / ell) % (2 * np.pi) for j in range(ell))
    if any(
        min(abs(a - b), 2 * np.pi - abs(a - b)) > 1e-8
        for a, b in zip(firsts, expected)
    ):
        return None
    eps = complex(np.exp(2j * np.pi / ell))
    return ell, eps


def _commutes_with_contraction(params: ContractionParams, eps: complex, rng=None) -> bool:
    """Numerical commutation test gamma0(h z) = h(gamma0 z) at random points."""
    rng = rng or np.random.default_rng(20240601)
    gamma = ContractionPower(params, 1)
    h = UnitaryElement(np.diag([eps, 1.0 / eps]))
    pts = rng.standard_normal((5, 4))
    lhs = apply_group_element(gamma, apply_group_element(h, pts))
    rhs = apply_group_element(h, apply_group_element(gamma, pts))
    return bool(np.max(np.abs(lhs - rhs)) < 1e-9)


def classify(data: HopfGroupData, cap: int = DEFAULT_CLOSURE_CAP) -> CaseLabel:
    """Total classification of group data into the admissible families.

    Every syntactically valid input receives exactly one label carrying a
    machine-readable reason on rejection.
    """
    p = data.contraction
    reason = p.validate()
    if reason is not None:
        return CaseLabel("invalid", reason=reason)

    try:
        ok, diagnostics = real_type_check(data, cap)
    except NotFinite as exc:
        return CaseLabel("invalid", reason=str(exc))
    except GroupDataError as exc:
        return CaseLabel("invalid", reason=str(exc))
    if not ok:
        return CaseLabel("not_real_type", reason=diagnostics.get("reason"),
                         diagnostics=diagnostics)

    closure = group_closure(data.h_generators, cap)
    a = abs(p.alpha) * abs(p.beta)

    if abs(p.lam) > 0.0:
        # case (c): alpha = beta^m is forced by the resonance constraint
        diag = _diagonal_eps(closure)
        if diag is None:
            return CaseLabel(
                "invalid",
                reason="lambda != 0 requires H to be the standard cyclic "
                "subgroup of S(U(1)xU(1))",
                diagnostics=diagnostics,
            )
        ell, eps = diag
        if (p.m + 1) % ell != 0 or not _commutes_with_contraction(p, eps):
            return CaseLabel(
                "invalid",
                reason=f"H does not commute with the contraction: m = {p.m} "
                f"is not of the form k*ell - 1 for ell = {ell}",
                diagnostics=diagnostics,
            )
        return CaseLabel("c", a=float(abs(p.beta) ** (p.m + 1)), ell=ell,
                         k=(p.m + 1) // ell, diagnostics=diagnostics)

    if abs(abs(p.alpha) - abs(p.beta)) < REALITY_TOL:
        # case (a): real type forces beta = conj(alpha); H may be any finite
        # subgroup of SU(2), which then acts freely on the unit sphere.
        diagnostics["free_action_margin"] = free_sphere_action_defect(closure)
        return CaseLabel("a", a=float(a), ell=len(closure), diagnostics=diagnostics)

    # case (b): |alpha| < |beta| forces H inside U(1)xU(1) for the group to
    # act properly on the cover, so every element must be diagonal
    diag = _diagonal_eps(closure)
    if diag is None:
        return CaseLabel(
            "invalid",
            reason="|alpha| != |beta| requires H inside U(1)xU(1) "
            "(all elements diagonal)",
            diagnostics=diagnostics,
        )
    ell, _ = diag
    chain = (abs(p.alpha) ** 2, a, abs(p.alpha))
    if not (0.0 < chain[0] < chain[1] < chain[2] < 1.0):
        return CaseLabel(
            "invalid",
            reason="parameter chain 0 < |alpha|^2 < a < |alpha| < 1 fails: "
            f"{chain}",
            diagnostics=diagnostics,
        )
    return CaseLabel("b", a=float(a), ell=ell, diagnostics=diagnostics)


# ---------------------------------------------------------------------------
# group elements as maps of C^2 minus the origin
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ContractionPower:
    """Integer power gamma0^n of the contraction."""

    params: ContractionParams
    n: int = 1


@dataclass(frozen=True)
class UnitaryElement:
    """Element of the finite part H, acting linearly."""

    mat: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "mat",
                           np.asarray(self.mat, dtype=complex).reshape(2, 2))


GroupElement = ContractionPower | UnitaryElement


def _contraction_coeffs(elem: ContractionPower) -> tuple[complex, complex, complex]:
    """(alpha^n, beta^n, c_n) with gamma0^n(z) = (alpha^n z1 + c_n z2^m, beta^n z2).

    The closed form c_n = n alpha^{n-1} lambda uses alpha = beta^m, which the
    normal form forces whenever lambda != 0.
    """
    p = elem.params
    n = elem.n
    return p.alpha**n, p.beta**n, n * p.alpha ** (n - 1) * p.lam if p.lam else 0j


def apply_group_element(elem: GroupElement, x: np.ndarray) -> np.ndarray:
    """Image of real point(s) x under the group element."""
    z = to_complex(x)
    if isinstance(elem, UnitaryElement):
        w = np.einsum("ij,...j->...i", elem.mat, z)
        return from_complex(w)
    an, bn, cn = _contraction_coeffs(elem)
    w1 = an * z[..., 0] + cn * z[..., 1] ** elem.params.m
    w2 = bn * z[..., 1]
    return from_complex(np.stack([w1, w2], axis=-1))


def jacobian(elem: GroupElement, x: np.ndarray) -> np.ndarray:
    """Real 4x4 Jacobian of the element at x (the realified holomorphic
    differential, so det = |holomorphic Jacobian determinant|^2)."""
    x = np.asarray(x, dtype=float)
    if isinstance(elem, UnitaryElement):
        real = realify(elem.mat)
        return np.broadcast_to(real, x.shape[:-1] + (4, 4)).copy()
    an, bn, cn = _contraction_coeffs(elem)
    z = to_complex(x)
    m = elem.params.m
    hol = np.zeros(x.shape[:-1] + (2, 2), dtype=complex)
    hol[..., 0, 0] = an
    hol[..., 0, 1] = cn * m * z[..., 1] ** (m - 1)
    hol[..., 1, 1] = bn
    return realify(hol)


def canonical_multiplier(elem: GroupElement) -> complex:
    """Multiplier of the standard holomorphic 2-form dz1^dz2 under pullback:
    (alpha*beta)^n for contraction powers, det(h) for unitary elements."""
    if isinstance(elem, UnitaryElement):
        return complex(np.linalg.det(elem.mat))
    p = elem.params
    return (p.alpha * p.beta) ** elem.n
