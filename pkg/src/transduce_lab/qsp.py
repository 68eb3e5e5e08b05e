"""Signal-processing error reduction: sign polynomial, completion, phases.

Pipeline: an odd polynomial approximating sign(x) on [-1,-d'] u [d',1] is
built from a truncated Chebyshev expansion of erf(kappa x); it is completed
to a polynomial pair (P, Q) with P P* + (1-x^2) Q Q* = 1 via root pairing of
1 - R^2 on the unit circle; layer stripping turns the pair into unimodular
phase factors; alternating phases with a reflecting oracle then flips the
sign of the answer span exactly when the oracle's bias crosses 1/2.

All polynomial arithmetic is in the Chebyshev basis for stability; degrees
are capped at 60 in double precision and failures are loud.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import chebyshev as C
from scipy.special import erf, erfinv

from .linalg import LinalgError, Operator
from .oracles import OracleSpec

DEGREE_CAP = 60
CONDITION_GRID = 201
SIGN_GRID = 2001
ASSEMBLY_GRID = 101


class QspError(LinalgError):
    pass


class DegreeCapError(QspError):
    """The construction would need a degree beyond numeric stability."""


class CompletionError(QspError):
    def __init__(self, msg: str, residual: float):
        super().__init__(msg)
        self.residual = residual


class PhaseFactorError(QspError):
    def __init__(self, msg: str, degree_reached: int):
        super().__init__(msg)
        self.degree_reached = degree_reached


def _trim(coeffs: np.ndarray, tol: float = 0.0) -> np.ndarray:
    c = np.asarray(coeffs)
    n = c.size
    while n > 1 and abs(c[n - 1]) <= tol:
        n -= 1
    return c[:n]


@dataclass(frozen=True)
class RealPolynomial:
    """Real polynomial in the Chebyshev basis with a declared parity."""

    cheb: np.ndarray
    parity: int  # 0 even, 1 odd

    def __post_init__(self):
        c = np.asarray(self.cheb, dtype=float)
        object.__setattr__(self, "cheb", c)
        if self.parity not in (0, 1):
            raise QspError("parity is 0 or 1")
        bad = np.max(np.abs(c[1 - self.parity::2])) if c[1 - self.parity::2].size else 0.0
        if bad > 1e-12:
            raise QspError(f"coefficients of the wrong parity reach {bad:.2e}")

    @property
    def degree(self) -> int:
        nz = np.nonzero(np.abs(self.cheb) > 0)[0]
        return int(nz[-1]) if nz.size else self.parity

    def __call__(self, x):
        return C.chebval(x, self.cheb)


@dataclass(frozen=True)
class PolynomialPair:
    """Complex (P, Q) with matched parity and unit completion on [-1, 1]."""

    p_cheb: np.ndarray
    q_cheb: np.ndarray
    degree: int

    def __post_init__(self):
        object.__setattr__(self, "p_cheb", np.asarray(self.p_cheb, dtype=complex))
        object.__setattr__(self, "q_cheb", np.asarray(self.q_cheb, dtype=complex))
        if self.p_cheb.size > self.degree + 1 or self.q_cheb.size > max(self.degree, 1):
            raise QspError("degree bounds violated")

    def p(self, x):
        return C.chebval(x, self.p_cheb)

    def q(self, x):
        return C.chebval(x, self.q_cheb) if self.q_cheb.size else np.zeros_like(np.asarray(x, dtype=float))

    def condition_residual(self, points: int = CONDITION_GRID) -> float:
        """max over a grid of |P P* + (1 - x^2) Q Q* - 1|."""
        x = np.linspace(-1.0, 1.0, points)
        val = np.abs(self.p(x)) ** 2 + (1.0 - x * x) * np.abs(self.q(x)) ** 2
        return float(np.max(np.abs(val - 1.0)))


@dataclass(frozen=True)
class PhaseSequence:
    alphas: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.alphas, dtype=complex)
        object.__setattr__(self, "alphas", a)
        if np.max(np.abs(np.abs(a) - 1.0)) > 1e-10:
            raise QspError("phase factors must be unimodular")

    @property
    def degree(self) -> int:
        return self.alphas.size - 1


def signal_unitary(x: float, y: float, tol: float = 1e-10) -> Operator:
    """[[x, y], [y, -x]] for a point on the unit circle."""
    if abs(x * x + y * y - 1.0) > tol:
        raise QspError(f"(x, y) off the unit circle by {abs(x * x + y * y - 1.0):.2e}")
    return Operator(np.array([[x, y], [y, -x]], dtype=complex))


def _phase_matrix(alpha: complex) -> np.ndarray:
    return np.array([[alpha, 0.0], [0.0, -np.conj(alpha)]], dtype=complex)


def qsp_assemble(alpha: PhaseSequence, W: Operator) -> Operator:
    """Alternating product: phases outermost-last, k applications of W."""
    mat = _phase_matrix(alpha.alphas[0])
    for a in alpha.alphas[1:]:
        mat = _phase_matrix(a) @ W.matrix @ mat
    return Operator(mat)


def qsp_polynomials(alpha: PhaseSequence) -> PolynomialPair:
    """Forward recursion for the (P, Q) realized by a phase sequence."""
    p = np.array([alpha.alphas[0]], dtype=complex)
    q = np.zeros(0, dtype=complex)
    one_minus_x2 = np.array([0.5, 0.0, -0.5])  # 1 - x^2 in the Chebyshev basis
    for a in alpha.alphas[1:]:
        xp = C.chebmulx(p) if p.size else p
        xq = C.chebmulx(q) if q.size else q
        new_p = a * _chebadd(xp, C.chebmul(one_minus_x2, q) if q.size else np.zeros(1))
        new_q = np.conj(a) * _chebadd(xq, -p)
        p, q = _trim(new_p, 0.0), _trim(new_q, 0.0)
    k = alpha.degree
    return PolynomialPair(_pad(p, k + 1), _pad(q, max(k, 1)), k)


def _chebadd(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    n = max(a.size, b.size)
    out = np.zeros(n, dtype=complex)
    out[: a.size] += a
    out[: b.size] += b
    return out


def _pad(c: np.ndarray, n: int) -> np.ndarray:
    out = np.zeros(n, dtype=complex)
    out[: c.size] = c[:n] if c.size > n else c
    return out


# ---------------------------------------------------------------------------
# Sign polynomial
# ---------------------------------------------------------------------------

def _sign_conditions_hold(R: RealPolynomial, delta_p: float, eps_p: float,
                          points: int = SIGN_GRID) -> bool:
    x = np.linspace(-1.0, 1.0, points)
    vals = R(x)
    if np.max(np.abs(vals)) > 1.0:
        return False
    hi = x >= delta_p
    lo = x <= -delta_p
    return bool(np.all(vals[hi] >= 1.0 - eps_p) and np.all(vals[lo] <= -1.0 + eps_p))


def sign_polynomial(delta_prime: float, eps_prime: float,
                    degree_cap: int = DEGREE_CAP) -> RealPolynomial:
    """Odd R with |R| <= 1, R >= 1-eps' on [delta', 1], R <= -1+eps' below.

    Builds truncated Chebyshev expansions of erf(kappa x) of increasing odd
    degree, rescaled to keep |R| strictly below 1, and returns the first one
    whose three conditions verify on a dense grid.
    """
    if not (0.0 < delta_prime < 1.0 and 0.0 < eps_prime < 1.0):
        raise QspError("need 0 < delta', eps' < 1")
    kappa = float(erfinv(1.0 - eps_prime / 4.0)) / delta_prime
    scale = 1.0 - eps_prime / 4.0
    for k in range(1, degree_cap + 1, 2):
        interp = C.Chebyshev.interpolate(lambda x: erf(kappa * x), k + 8)
        coeffs = np.zeros(k + 1)
        take = interp.coef[: k + 1]
        coeffs[: take.size] = take
        coeffs[0::2] = 0.0  # erf is odd; strip numerical even dust
        sup = float(np.max(np.abs(C.chebval(np.linspace(-1, 1, SIGN_GRID), coeffs))))
        if sup == 0.0:
            continue
        cand = RealPolynomial(coeffs * (scale / max(sup, 1.0)), parity=1)
        if _sign_conditions_hold(cand, delta_prime, eps_prime):
            return cand
    raise DegreeCapError(
        f"no degree <= {degree_cap} meets (delta'={delta_prime}, eps'={eps_prime}); "
        "relax eps'")


# ---------------------------------------------------------------------------
# Completion via root pairing
# ---------------------------------------------------------------------------

def _u_in_cheb(n: int) -> np.ndarray:
    """Second-kind basis polynomial U_n written in first-kind coefficients."""
    c = np.zeros(n + 1)
    for j in range(n, -1, -2):
        c[j] = 2.0
    if n % 2 == 0:
        c[0] = 1.0
    return c


def _pair_circle_roots(circle: list[complex], tol: float) -> list[complex]:
    """Even-multiplicity roots on the unit circle: keep one of each pair."""
    chosen = []
    remaining = sorted(circle, key=lambda z: (np.angle(z), abs(z)))
    while remaining:
        z = remaining.pop(0)
        best, dist = None, np.inf
        for i, w in enumerate(remaining):
            d = abs(w - z)
            if d < dist:
                best, dist = i, d
        if best is None or dist > max(tol * 100, 1e-4):
            raise CompletionError("unpaired root on the unit circle", float(dist if np.isfinite(dist) else 1.0))
        remaining.pop(best)
        chosen.append(z)
    return chosen


def complete(R: RealPolynomial, tol: float = 1e-8) -> PolynomialPair:
    """Complete R to (P, Q) with Re P = R and unit norm condition.

    Writes 1 - R(cos t)^2 as |f(e^{it})|^2 by pairing the conjugate/reciprocal
    root quadruples of the associated palindromic polynomial, then splits
    e^{-ikt} f into its cosine part (the imaginary part of P) and its sine
    part (Q).  Acceptance is the grid residual, not the route.
    """
    k = R.degree
    if k < 1:
        raise QspError("completion needs degree >= 1")
    x_grid = np.linspace(-1.0, 1.0, SIGN_GRID)
    if float(np.max(np.abs(R(x_grid)))) > 1.0 + 1e-12:
        raise QspError("|R| must not exceed 1 on [-1, 1]")
    w_cheb = _chebadd(np.array([1.0 + 0j]), -C.chebmul(R.cheb, R.cheb)).real
    a = np.zeros(2 * k + 1)
    a[: w_cheb.size] = w_cheb[: 2 * k + 1]
    # Palindromic coefficient array over u = w^2: T~_i pairs with frequency 2i - 2k.
    tpoly = np.empty(2 * k + 1)
    for i in range(2 * k + 1):
        m = abs(2 * i - 2 * k)
        tpoly[i] = a[m] if m == 0 else a[m] / 2.0
    tpoly = _trim(tpoly, max(np.max(np.abs(tpoly)) * 1e-14, 1e-300))
    deg_u = tpoly.size - 1
    roots = np.polynomial.polynomial.polyroots(tpoly) if deg_u >= 1 else np.zeros(0)
    inside = [z for z in roots if abs(z) < 1.0 - 1e-7]
    circle = [z for z in roots if abs(abs(z) - 1.0) <= 1e-7]
    picked = inside + _pair_circle_roots(circle, tol)
    # Degenerate degrees (R of lower true degree) shrink the root count; pad
    # with zeros so f keeps k quadratic factors.
    while len(picked) < k:
        picked.append(0.0)
    if len(picked) != k:
        raise CompletionError(f"root pairing selected {len(picked)} of {k} factors", np.inf)
    f_u = np.polynomial.polynomial.polyfromroots(picked)  # degree k in u = w^2
    d = np.zeros(2 * k + 1, dtype=complex)  # frequency m = -k .. k, only m = k mod 2
    for t, coef in enumerate(f_u):
        d[(2 * t - k) + k] = coef
    a_cheb = np.zeros(k + 1, dtype=complex)
    b_cheb = np.zeros(max(k, 1), dtype=complex)
    for m in range(1, k + 1):
        dm, dmm = d[m + k], d[-m + k]
        if dm == 0 and dmm == 0:
            continue
        a_cheb[m] += dm + dmm
        u = _u_in_cheb(m - 1)
        b_cheb[: u.size] += (dm - dmm) * u
    a_cheb[0] += d[k]  # m = 0 term exists only for even k
    A = a_cheb.real.copy()
    B = b_cheb.real.copy()
    # Normalize so A^2 + (1 - x^2) B^2 matches W; the factorization fixes the
    # shape, the overall constant comes from sample points.
    xs = np.array([0.1, 0.37, 0.61, 0.83])
    num = 1.0 - R(xs) ** 2
    den = C.chebval(xs, A) ** 2 + (1.0 - xs ** 2) * C.chebval(xs, B) ** 2
    good = den > 1e-20
    if not np.any(good):
        raise CompletionError("degenerate completion shape", np.inf)
    ratios = num[good] / den[good]
    s = float(np.sqrt(np.median(ratios)))
    A *= s
    B *= s
    pair = PolynomialPair(_pad(R.cheb.astype(complex), k + 1) + 1j * _pad(A, k + 1),
                          _pad(B.astype(complex), max(k, 1)), k)
    resid = pair.condition_residual()
    if resid > tol:
        raise CompletionError(f"completion residual {resid:.2e} > {tol:.0e}", resid)
    return pair


# ---------------------------------------------------------------------------
# Phase factors via layer stripping
# ---------------------------------------------------------------------------

def phase_factors(pair: PolynomialPair, tol: float = 1e-8) -> PhaseSequence:
    """Peel one signal layer at a time from the leading coefficients.

    At degree d the top Chebyshev coefficients of P and Q fix alpha_d^2; the
    reduced pair has degree d-1.  The reassembled product is verified against
    the pair on a grid before returning.
    """
    p = pair.p_cheb.astype(complex).copy()
    q = pair.q_cheb.astype(complex).copy()
    k = pair.degree
    alphas = np.zeros(k + 1, dtype=complex)
    one_minus_x2 = np.array([0.5, 0.0, -0.5])
    scale = max(float(np.max(np.abs(p))), 1e-30)
    for d in range(k, 0, -1):
        cp = p[d] if p.size > d else 0.0
        cq = q[d - 1] if q.size > d - 1 else 0.0
        if abs(cq) < 1e-13 * scale or abs(cp) < 1e-13 * scale:
            raise PhaseFactorError(f"leading-coefficient cancellation at degree {d}", d)
        ratio = (2.0 * cp / cq) if d >= 2 else (cp / cq)
        alpha_sq = -ratio
        if abs(abs(alpha_sq) - 1.0) > 1e-6:
            raise PhaseFactorError(
                f"stripping instability at degree {d}: |alpha|^2 = {abs(alpha_sq):.6f}", d)
        alpha = np.exp(0.5j * np.angle(alpha_sq))
        alphas[d] = alpha
        ac = np.conj(alpha)
        new_p = _chebadd(ac * C.chebmulx(p), -alpha * C.chebmul(one_minus_x2, q))
        new_q = _chebadd(ac * p, alpha * C.chebmulx(q))
        p = _pad(new_p, d)      # degree d-1
        q = _pad(new_q, max(d - 1, 1))
    a0 = p[0]
    if abs(abs(a0) - 1.0) > 1e-6:
        raise PhaseFactorError(f"terminal coefficient not unimodular: {abs(a0):.6f}", 0)
    alphas[0] = a0 / abs(a0)
    seq = PhaseSequence(alphas)
    resid = reassembly_residual(seq, pair)
    if resid > tol:
        raise PhaseFactorError(f"reassembly residual {resid:.2e} > {tol:.0e}", k)
    return seq


def reassembly_residual(alpha: PhaseSequence, pair: PolynomialPair,
                        points: int = ASSEMBLY_GRID) -> float:
    """Grid check of the assembled product against [[P, yQ*], [yQ, -P*]]."""
    worst = 0.0
    for x in np.linspace(-1.0, 1.0, points):
        y = float(np.sqrt(max(0.0, 1.0 - x * x)))
        u = qsp_assemble(alpha, signal_unitary(x, y)).matrix
        px = complex(pair.p(x))
        qx = complex(pair.q(x))
        want = np.array([[px, y * np.conj(qx)], [y * qx, -np.conj(px)]])
        worst = max(worst, float(np.max(np.abs(u - want))))
    return worst


# ---------------------------------------------------------------------------
# End-to-end error reduction over a reflecting oracle
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ErrorReducer:
    operator: Operator
    alphas: PhaseSequence
    pair: PolynomialPair
    eps: float

    @property
    def degree(self) -> int:
        return self.alphas.degree


def assemble_on_answer(alpha: PhaseSequence, oracle: Operator, d_w: int) -> Operator:
    """Alternate answer-qubit phases with the oracle, then flip the answer sign.

    The oracle's space is answer (x) workspace with the answer qubit most
    significant; phases act on the answer qubit alone, so no ancilla is added.
    """
    dim = oracle.dim
    if dim != 2 * d_w:
        raise QspError(f"oracle dim {dim} != 2 * workspace {d_w}")
    half = np.arange(dim) < d_w
    def phase_full(a: complex) -> np.ndarray:
        return np.where(half, a, -np.conj(a))
    mat = np.diag(phase_full(alpha.alphas[0]))
    for a in alpha.alphas[1:]:
        mat = np.diag(phase_full(a)) @ (oracle.matrix @ mat)
    z = np.where(half, 1.0, -1.0)
    return Operator(z[:, None] * mat)


def qsp_error_reduction(o_ref: Operator, spec: OracleSpec, delta: float, eps: float,
                        degree_cap: int = DEGREE_CAP) -> ErrorReducer:
    """Phase-flip the answer span to eps accuracy using only oracle queries.

    Uses the identification x = 1 - 2p: the reflecting oracle restricted to
    the answer span is the signal unitary, so a sign polynomial at
    delta' = 2 delta and eps' = eps^2 / 6 drives the whole span to (+-) itself.
    """
    if spec.delta < delta - 1e-12:
        raise QspError(f"spec gap {spec.delta} below requested delta {delta}")
    sign = sign_polynomial(2.0 * delta, eps * eps / 6.0, degree_cap)
    pair = complete(sign)
    alphas = phase_factors(pair)
    op = assemble_on_answer(alphas, o_ref, spec.d_w)
    return ErrorReducer(op, alphas, pair, eps)
