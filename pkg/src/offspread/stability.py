"""Equilibria, Jacobians, eigenvalues and next-generation matrices.

Numeric eigenvalues come from the roots of the characteristic polynomial
(Faddeev-LeVerrier coefficients, companion-matrix roots, Newton polish),
never from a general eigensolver applied to the Jacobian itself, so they give
an independent check on the closed forms.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .dynamics import ModelParams, StateVector, DEFAULT_S0_FRAC, step
from .thresholds import z_basic, z_quarantine

STATE_ORDER = ("U", "O", "Q", "S")
UNIT_TOL = 1e-9
NGM_RTOL = 1e-12


class IllConditionedError(ArithmeticError):
    """Polynomial roots failed the residual check."""


def as_square(m) -> np.ndarray:
    arr = np.asarray(m, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] not in (1, 2, 3, 4):
        raise ValueError(f"expected a square matrix of order 1..4, got shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise ValueError("matrix entries must be finite")
    return arr


def char_poly(m) -> np.ndarray:
    """Monic coefficients of ``det(x I - m)``, highest degree first (Faddeev-LeVerrier)."""
    a = as_square(m)
    n = a.shape[0]
    coeffs = [1.0]
    mk = np.zeros_like(a)
    eye = np.eye(n)
    for k in range(1, n + 1):
        mk = a @ (mk + coeffs[-1] * eye)
        coeffs.append(-np.trace(mk) / k)
    return np.array(coeffs)


def _polish(coeffs: np.ndarray, root: complex, iters: int = 3) -> complex:
    dcoeffs = np.polyder(coeffs)
    best, best_res = root, abs(np.polyval(coeffs, root))
    r = root
    for _ in range(iters):
        d = np.polyval(dcoeffs, r)
        if d == 0:
            break
        r = r - np.polyval(coeffs, r) / d
        res = abs(np.polyval(coeffs, r))
        if res < best_res:
            best, best_res = r, res
    return complex(best)


_EPS = float(np.finfo(float).eps)


def _eval_bound(coeffs: np.ndarray, z: complex) -> float:
    """Scale of the rounding error when evaluating the polynomial at ``z``."""
    return float(np.polyval(np.abs(coeffs), abs(z)))


def _multiple_root(coeffs: np.ndarray, pts: list[complex], tol: float) -> Optional[complex]:
    """Centre of ``pts`` if they are numerically one ``len(pts)``-fold root, else None.

    An m-fold root of p is a simple root of p^(m-1), so Newton on that
    derivative, started from the cluster mean, recovers it accurately.
    """
    m = len(pts)
    c = sum(pts) / m
    deriv = np.polyder(coeffs, m - 1)
    d1 = np.polyder(deriv)
    spread = max(abs(a - b) for a, b in itertools.combinations(pts, 2))
    for _ in range(3):
        slope = np.polyval(d1, c)
        if slope == 0:
            break
        nxt = c - np.polyval(deriv, c) / slope
        if abs(nxt - sum(pts) / m) > spread:
            break
        c = nxt
    if abs(np.polyval(coeffs, c)) <= tol * _EPS * max(_eval_bound(coeffs, c), _EPS):
        return complex(c)
    return None


def _clusters(roots: list[complex], coeffs: np.ndarray, scale: float, tol: float) -> list[list[complex]]:
    """Replace groups that form one multiple root by copies of its centre.

    An m-fold root perturbed at the rounding level splits into a ring of
    radius ~ eps**(1/m); groups within a loose multiple of that radius are
    candidates, and a candidate is merged only if its centre is a root to
    rounding accuracy. Larger groups are tried first.
    """
    remaining = list(range(len(roots)))
    groups = []
    for m in range(len(roots), 1, -1):
        found = True
        while found and len(remaining) >= m:
            found = False
            for combo in itertools.combinations(remaining, m):
                pts = [roots[i] for i in combo]
                diameter = max(abs(a - b) for a, b in itertools.combinations(pts, 2))
                if diameter > 1e3 * _EPS ** (1.0 / m) * scale:
                    continue
                centre = _multiple_root(coeffs, pts, tol)
                if centre is not None:
                    groups.append([centre] * m)
                    remaining = [i for i in remaining if i not in combo]
                    found = True
                    break
    groups.extend([roots[i]] for i in remaining)
    return groups


def _sort_key(z: complex):
    return (round(z.real, 12), round(z.imag, 12))


def eigenvalues_numeric(m, cluster_tol: float = 1e3) -> list[complex]:
    """Eigenvalues of a matrix of order <= 4 as characteristic-polynomial roots.

    Every returned root ``r`` satisfies ``|det(m - r I)| <= 1e-6 (1 + ||m||)``;
    :class:`IllConditionedError` is raised otherwise.
    """
    a = as_square(m)
    coeffs = char_poly(a)
    # Trailing zero coefficients are exact zero roots; they take no part in clustering.
    nz = int(np.flatnonzero(coeffs)[-1])
    roots = [0j] * (len(coeffs) - 1 - nz)
    coeffs = coeffs[: nz + 1]
    raw = [complex(r) for r in np.roots(coeffs)] if nz else []
    scale = 1.0 + np.linalg.norm(a, 2)
    for group in _clusters(raw, coeffs, scale, cluster_tol):
        if len(group) == 1:
            roots.append(_polish(coeffs, group[0]))
        else:
            roots.extend(group)
    roots = [complex(r.real, 0.0) if abs(r.imag) <= 1e-14 * scale else r for r in roots]
    eye = np.eye(a.shape[0])
    for r in roots:
        resid = abs(np.linalg.det(a - r * eye))
        if resid > 1e-6 * scale:
            raise IllConditionedError(f"root {r} has residual {resid:.3e}")
    return sorted(roots, key=_sort_key)


def multiset_distance(a: Sequence[complex], b: Sequence[complex]) -> float:
    """Smallest over pairings of the largest pairwise ``|a_i - b_j|``."""
    if len(a) != len(b):
        return math.inf
    best = math.inf
    for perm in itertools.permutations(range(len(b))):
        d = max((abs(complex(a[i]) - complex(b[j])) for i, j in enumerate(perm)), default=0.0)
        best = min(best, d)
    return best


def spectral_radius(m) -> float:
    return max(abs(r) for r in eigenvalues_numeric(m))


# --- Jacobians -------------------------------------------------------------

def jacobian_basic(state: StateVector, params: ModelParams) -> np.ndarray:
    """3x3 Jacobian of the basic map in ``(U, O, S)`` order."""
    n, k, a = params.N, params.k, params.alpha
    u, o, s = state.U, state.O, state.S
    ga = math.exp(-k * o / n)
    gb = math.exp(-k * s / n)
    return np.array([
        [ga, -k / n * ga * u, 0.0],
        [(1 - a) * (1 - ga), k / n * (1 - a) * ga * u + gb, -k / n * gb * o],
        [a * (1 - ga), k / n * a * ga * u + (1 - gb), k / n * gb * o + 1],
    ])


def jacobian_quarantine(state: StateVector, params: ModelParams) -> np.ndarray:
    """4x4 Jacobian of the quarantine map in ``(U, O, Q, S)`` order.

    Entries (Q, S) and (S, U) are the exact partial derivatives; both vanish
    wherever ``O = 0``.
    """
    n, k, a, lam, mu = params.N, params.k, params.alpha, params.lam, params.mu
    u, o, s = state.U, state.O, state.S
    ga = math.exp(-k * o / n)
    gb = math.exp(-k * s / n)
    return np.array([
        [ga, -k / n * ga * u, 0.0, 0.0],
        [(1 - a) * (1 - ga), k / n * (1 - a) * ga * u + lam * gb, 0.0, -k / n * lam * o * gb],
        [0.0, (1 - lam) * gb, mu, -k / n * o * (1 - lam) * gb],
        [a * (1 - ga), k / n * a * ga * u + (1 - gb), 1 - mu, 1 + k / n * gb * o],
    ])


def jacobian(state: StateVector, params: ModelParams) -> np.ndarray:
    if params.is_quarantine:
        return jacobian_quarantine(state, params)
    return jacobian_basic(state, params)


def reduced_jacobian(m) -> np.ndarray:
    """Eliminate the last (stifler) coordinate using ``sum = N``.

    With ``S = N - sum(others)`` the chain rule gives ``J_r[i, j] = J[i, j] - J[i, S]``.
    """
    a = as_square(m)
    last = a.shape[0] - 1
    return a[:last, :last] - a[:last, last:last + 1]


def jacobian_ofe_printed_basic(state: StateVector, params: ModelParams) -> np.ndarray:
    """Offender-free Jacobian in ``(O, U, S)`` order, entries as commonly printed.

    Kept for comparison only: rows U and S differ from the true derivative
    (``+kU/N`` instead of ``-kU/N``, and a missing ``alpha`` factor). The
    eigenvalues are unaffected because both versions are lower triangular.
    """
    n, k, a = params.N, params.k, params.alpha
    gb = math.exp(-k * state.S / n)
    u = state.U
    return np.array([
        [k / n * (1 - a) * u + gb, 0.0, 0.0],
        [k / n * u, 1.0, 0.0],
        [k / n * u + (1 - gb), 0.0, 1.0],
    ])


# --- closed-form eigenvalues ------------------------------------------------

def eigenvalues_ooe_analytic(params: ModelParams) -> tuple[float, float, float]:
    """Eigenvalues at the offender-only point ``(0, N, 0)``: ``(1, e^-k, k + 1)``."""
    return (1.0, math.exp(-params.k), params.k + 1.0)


def ooe_unstable(params: ModelParams) -> bool:
    return eigenvalues_ooe_analytic(params)[2] > 1.0


def _ofe_growth(state: StateVector, params: ModelParams) -> float:
    return params.k / params.N * (1 - params.alpha) * state.U


def eigenvalues_ofe_analytic(
    state: StateVector,
    params: ModelParams,
    reduced: bool = False,
    as_printed: bool = True,
) -> list[float]:
    """Closed-form eigenvalues at an offender-free point ``(U, 0, 0, S)``.

    For the quarantine model the published dominant eigenvalue carries an
    extra additive ``mu``; ``as_printed=False`` drops it, which is what the
    Jacobian actually has.
    """
    gb = math.exp(-params.k * state.S / params.N)
    growth = _ofe_growth(state, params)
    if not params.is_quarantine:
        first = growth + gb
        return [first, 1.0] if reduced else [first, 1.0, 1.0]
    mu, lam = params.mu, params.lam
    last = (mu + lam * gb) + growth if as_printed else lam * gb + growth
    if reduced:
        return [1.0, mu, last]
    return [1.0, 1.0, mu, last]


# --- Jury precondition --------------------------------------------------------

def char_poly_at_one(m) -> float:
    """``D(1) = det(I - m)`` for the monic characteristic polynomial ``det(x I - m)``."""
    a = as_square(m)
    return float(np.linalg.det(np.eye(a.shape[0]) - a))


def jury_precondition(m, tol: float = 1e-12) -> bool:
    """True when ``D(1) > 0``; values within ``tol`` of zero count as zero."""
    a = as_square(m)
    scale = (1.0 + np.abs(a).max()) ** a.shape[0]
    return char_poly_at_one(a) > tol * scale


# --- equilibria ---------------------------------------------------------------

@dataclass(frozen=True)
class Equilibrium:
    label: str
    values: Optional[tuple[float, float, float, float]]
    relevant: bool = True
    note: str = ""

    @property
    def state(self) -> StateVector:
        if not self.relevant or self.values is None:
            raise ValueError(f"equilibrium {self.label!r} is not a valid state")
        return StateVector(*self.values)


def offender_free(params: ModelParams, u: float) -> StateVector:
    if not 0.0 <= u <= params.N:
        raise ValueError("U must lie in [0, N]")
    return StateVector(u, 0.0, 0.0, params.N - u)


def equilibria(params: ModelParams, u: Optional[float] = None) -> list[Equilibrium]:
    """Fixed points of the selected model.

    The offender-free points form a one-parameter family; ``u`` picks the
    member reported (default ``(1 - 0.07) N``).
    """
    n = params.N
    if u is None:
        u = n * (1.0 - DEFAULT_S0_FRAC)
    ofe = Equilibrium("offender-free", offender_free(params, u).as_tuple())
    if not params.is_quarantine:
        return [Equilibrium("offender-only", (0.0, n, 0.0, 0.0)), ofe]

    lam, mu, k = params.lam, params.mu, params.k
    if 0.0 < lam < 1.0:
        s = math.log(lam) * n / k
        ratio = lam * (1.0 - mu) / (1.0 - lam)
        q = (n - s) / (1.0 + ratio)
        values = (0.0, ratio * q, q, s)
        note = "stifler class negative"
    else:
        values = None
        note = "undefined for lam in {0, 1}"
    return [Equilibrium("biologically-irrelevant", values, relevant=False, note=note), ofe]


def is_fixed_point(state: StateVector, params: ModelParams, rtol: float = 1e-12) -> bool:
    nxt = step(state, params)
    return all(
        abs(a - b) <= rtol * params.N for a, b in zip(nxt.as_tuple(), state.as_tuple())
    )


# --- next-generation matrix ---------------------------------------------------

@dataclass(frozen=True)
class NgmBlocks:
    """Blocks of the offender-free Jacobian with infected classes first.

    ``J = [[F + T, 0], [A, C]]``; ``infected`` and ``uninfected`` name the
    coordinates in the reordered matrix.
    """

    F: np.ndarray
    T: np.ndarray
    A: np.ndarray
    C: np.ndarray
    infected: tuple[str, ...]
    uninfected: tuple[str, ...]
    reordered: np.ndarray
    # Diagonal of I - T, computed without cancellation when T_jj is near 1.
    complement: Optional[np.ndarray] = None


def _require_offender_free(state: StateVector):
    if state.O != 0 or state.Q != 0:
        raise ValueError("next-generation matrix is defined at offender-free states only")


def ngm_blocks(state: StateVector, params: ModelParams) -> NgmBlocks:
    _require_offender_free(state)
    gb = math.exp(-params.k * state.S / params.N)
    one_minus_gb = -math.expm1(-params.k * state.S / params.N)
    growth = _ofe_growth(state, params)
    j = jacobian(state, params)
    if params.is_quarantine:
        infected, uninfected = ("O", "Q"), ("U", "S")
        F = np.array([[growth, 0.0], [(1 - params.lam) * gb, 0.0]])
        T = np.array([[params.lam * gb, 0.0], [0.0, params.mu]])
        comp = np.array([(1 - params.lam) + params.lam * one_minus_gb, 1 - params.mu])
        idx = [1, 2, 0, 3]
    else:
        infected, uninfected = ("O",), ("U", "S")
        F = np.array([[growth]])
        T = np.array([[gb]])
        comp = np.array([one_minus_gb])
        idx = [1, 0, 2]
    reordered = j[np.ix_(idx, idx)]
    m = len(infected)
    if not np.allclose(F + T, reordered[:m, :m], rtol=1e-12, atol=0.0):
        raise RuntimeError("F + T does not match the infected block of the Jacobian")
    if np.any(reordered[:m, m:] != 0.0):
        raise RuntimeError("offender-free Jacobian is not block lower triangular")
    return NgmBlocks(F, T, reordered[m:, :m], reordered[m:, m:], infected, uninfected, reordered, comp)


def next_generation_matrix(blocks: NgmBlocks) -> Optional[np.ndarray]:
    """``F (I - T)^-1`` for diagonal ``T``; ``None`` if a needed column is singular.

    A column of ``F`` that is identically zero contributes nothing, so its
    ``1 - T_jj`` may vanish (e.g. ``mu = 1``) without making the product undefined.
    """
    F, T = blocks.F, blocks.T
    if np.any(T != np.diag(np.diag(T))):
        raise ValueError("T must be diagonal")
    out = np.zeros_like(F)
    for j in range(F.shape[1]):
        col = F[:, j]
        d = blocks.complement[j] if blocks.complement is not None else 1.0 - T[j, j]
        if not np.any(col):
            continue
        if d == 0.0:
            return None
        out[:, j] = col / d
    return out


def ngm_spectral_radius(state: StateVector, params: ModelParams) -> Optional[float]:
    """Spectral radius of the next-generation matrix at an offender-free state.

    Cross-checked against the threshold ``Z`` of the same model; a relative
    mismatch above 1e-12 raises ``RuntimeError``.
    """
    blocks = ngm_blocks(state, params)
    K = next_generation_matrix(blocks)
    if K is None:
        return None
    rho = spectral_radius(K)
    z = z_quarantine(state, params) if params.is_quarantine else z_basic(state, params)
    if z is None:
        return None
    if abs(rho - z) > NGM_RTOL * max(abs(z), np.finfo(float).tiny):
        raise RuntimeError(f"NGM spectral radius {rho!r} disagrees with threshold {z!r}")
    return rho


# --- report -------------------------------------------------------------------

def classify(eigs: Sequence[complex], tol: float = UNIT_TOL) -> str:
    """``unstable`` if some modulus exceeds 1, ``indeterminate`` if one sits on
    the unit circle, else ``stable``."""
    mods = [abs(z) for z in eigs]
    if any(m > 1.0 + tol for m in mods):
        return "unstable"
    if any(abs(m - 1.0) <= tol for m in mods):
        return "indeterminate"
    return "stable"


@dataclass(frozen=True)
class PointStability:
    equilibrium: Equilibrium
    jacobian: np.ndarray
    analytic_eigenvalues: Optional[list[float]]
    numeric_eigenvalues: list[complex]
    reduced_numeric_eigenvalues: list[complex]
    jury_applicable: bool
    ngm_spectral_radius: Optional[float]
    verdict: str
    discrepancy: Optional[float] = None


@dataclass(frozen=True)
class StabilityReport:
    params: ModelParams
    equilibria: list[Equilibrium]
    points: list[PointStability] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)


def analyze_point(eq: Equilibrium, params: ModelParams) -> PointStability:
    state = eq.state
    j = jacobian(state, params)
    jr = reduced_jacobian(j)
    numeric = eigenvalues_numeric(j)
    reduced = eigenvalues_numeric(jr)
    ngm = None
    if eq.label == "offender-only":
        analytic = list(eigenvalues_ooe_analytic(params))
    else:
        analytic = eigenvalues_ofe_analytic(state, params)
        ngm = ngm_spectral_radius(state, params)
    return PointStability(
        equilibrium=eq,
        jacobian=j,
        analytic_eigenvalues=analytic,
        numeric_eigenvalues=numeric,
        reduced_numeric_eigenvalues=reduced,
        jury_applicable=jury_precondition(jr),
        ngm_spectral_radius=ngm,
        verdict=classify(reduced),
        discrepancy=multiset_distance(analytic, numeric),
    )


def analyze_stability(params: ModelParams, u: Optional[float] = None) -> StabilityReport:
    eqs = equilibria(params, u)
    points, notes = [], []
    for eq in eqs:
        if not eq.relevant:
            notes.append(f"{eq.label}: excluded ({eq.note})")
            continue
        pt = analyze_point(eq, params)
        if pt.discrepancy is not None and pt.discrepancy > 1e-8:
            notes.append(
                f"{eq.label}: closed-form eigenvalues differ from the Jacobian by {pt.discrepancy:.6g}"
            )
        points.append(pt)
    return StabilityReport(params, eqs, points, notes)
