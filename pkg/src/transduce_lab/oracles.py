"""Constructors for the input-oracle families.

Four flavors are supported:

* ``simple_oracle(p)`` -- the 2x2 reflection about sqrt(1-p)|0> + sqrt(p)|1>;
* ``state_generating_oracle`` -- a unitary preparing the two-branch answer
  state sqrt(1-p)|0>|phi0> + sqrt(p)|1>|phi1> from |0>|0>;
* ``reflecting_from_generator`` -- the induced reflection O Ref_{00} O*;
* ``general_reflecting_oracle`` -- any unitary that fixes the answer state and
  negates its sibling inside the two-branch span, with a caller-chosen action
  on the orthogonal complement.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import (
    DEFAULT_TOL,
    LinalgError,
    Operator,
    Register,
    Space,
    direct_sum,
    orthonormal_complement,
    reflection_about,
)


def answer_space(d_w: int) -> Space:
    return Space(Register("a", 2), Register("w", d_w))


@dataclass(frozen=True)
class OracleSpec:
    """Success probability plus the two normalized workspace branches."""

    p: float
    phi0: np.ndarray
    phi1: np.ndarray

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise LinalgError(f"p={self.p} outside [0, 1]")
        for name in ("phi0", "phi1"):
            v = np.asarray(getattr(self, name), dtype=complex).reshape(-1)
            if abs(np.linalg.norm(v) - 1.0) > 1e-10:
                raise LinalgError(f"{name} must be normalized")
            object.__setattr__(self, name, v)
        if self.phi0.size != self.phi1.size:
            raise LinalgError("phi0 and phi1 must share a workspace dimension")

    @property
    def d_w(self) -> int:
        return self.phi0.size

    @property
    def delta(self) -> float:
        """Gap |1/2 - p| between acceptance and rejection."""
        return abs(0.5 - self.p)

    @property
    def r(self) -> int:
        """Majority answer: 0 below 1/2, 1 above. Undefined at p = 1/2."""
        if self.p == 0.5:
            raise LinalgError("r undefined at p = 1/2")
        return 0 if self.p < 0.5 else 1

    @property
    def gamma(self) -> float:
        """Walk weight parameter sqrt(p/(1-p)); infinite at p = 1."""
        if self.p == 1.0:
            return np.inf
        return float(np.sqrt(self.p / (1.0 - self.p)))

    def answer_state(self) -> np.ndarray:
        """sqrt(1-p)|0>|phi0> + sqrt(p)|1>|phi1> over the answer x workspace basis."""
        out = np.zeros(2 * self.d_w, dtype=complex)
        out[: self.d_w] = np.sqrt(1.0 - self.p) * self.phi0
        out[self.d_w:] = np.sqrt(self.p) * self.phi1
        return out

    def sibling_state(self) -> np.ndarray:
        """sqrt(p)|0>|phi0> - sqrt(1-p)|1>|phi1>, the reflected partner."""
        out = np.zeros(2 * self.d_w, dtype=complex)
        out[: self.d_w] = np.sqrt(self.p) * self.phi0
        out[self.d_w:] = -np.sqrt(1.0 - self.p) * self.phi1
        return out


def boolean_spec(p: float) -> OracleSpec:
    """Trivial-workspace spec: the two branches are scalars."""
    return OracleSpec(p, np.ones(1), np.ones(1))


def simple_oracle(p: float) -> Operator:
    """2x2 reflection about sqrt(1-p)|0> + sqrt(p)|1>."""
    if not 0.0 <= p <= 1.0:
        raise LinalgError(f"p={p} outside [0, 1]")
    axis = np.array([np.sqrt(1.0 - p), np.sqrt(p)], dtype=complex)
    return reflection_about(axis).with_space(Space(Register("a", 2)))


def state_generating_oracle(spec: OracleSpec) -> Operator:
    """Unitary with |0>|0> -> answer state; completion is a Householder map.

    The remaining columns are fixed deterministically: reflect about
    w = |0>|0> - phi (after rotating phi so its |0>|0> amplitude is real) and
    restore the phase globally, which pins column zero exactly.
    """
    d = 2 * spec.d_w
    phi = spec.answer_state()
    c = phi[0]
    theta = np.angle(c) if abs(c) > 0 else 0.0
    phi_aligned = np.exp(-1j * theta) * phi
    w = -phi_aligned.copy()
    w[0] += 1.0
    nw2 = float(np.vdot(w, w).real)
    if nw2 < 1e-28:
        mat = np.exp(1j * theta) * np.eye(d, dtype=complex)
    else:
        house = np.eye(d, dtype=complex) - 2.0 * np.outer(w, w.conj()) / nw2
        mat = np.exp(1j * theta) * house
    op = Operator(mat, answer_space(spec.d_w), certify_unitary=True)
    if float(np.max(np.abs(op.matrix[:, 0] - phi))) > 1e-12:
        raise LinalgError("state-generating completion failed to pin column 0")
    return op


def reflecting_from_generator(O: Operator) -> Operator:
    """O Ref_{|0>|0>} O*: the reflection about the generated answer state."""
    d = O.dim
    ref0 = -np.eye(d, dtype=complex)
    ref0[0, 0] = 1.0
    return Operator(O.matrix @ ref0 @ O.matrix.conj().T, O.space, certify_unitary=True)


def general_reflecting_oracle(spec: OracleSpec, complement_action=None,
                              tol: float = DEFAULT_TOL) -> Operator:
    """Unitary fixing the answer state and negating its sibling.

    ``complement_action`` controls the block on the orthogonal complement of
    the two-branch span: None (default) inherits the reflection induced by the
    state-generating completion; a (d-2)x(d-2) unitary is interpreted in the
    deterministic complement basis; a full-size Operator must preserve the
    complement.
    """
    d = 2 * spec.d_w
    plus = spec.answer_state()
    minus = spec.sibling_state()
    comp = orthonormal_complement([plus, minus], d)
    if complement_action is None:
        base = reflecting_from_generator(state_generating_oracle(spec)).matrix
        block = comp.conj().T @ base @ comp
    else:
        mat = complement_action.matrix if isinstance(complement_action, Operator) else np.asarray(complement_action, dtype=complex)
        if mat.shape == (d, d):
            leak = np.linalg.norm(mat @ comp - comp @ (comp.conj().T @ mat @ comp))
            if leak > 1e-8:
                raise LinalgError("complement_action does not preserve the complement")
            block = comp.conj().T @ mat @ comp
        elif mat.shape == (d - 2, d - 2):
            block = mat
        else:
            raise LinalgError(f"complement_action has shape {mat.shape}; expected {(d, d)} or {(d - 2, d - 2)}")
    out = np.outer(plus, plus.conj()) - np.outer(minus, minus.conj()) + comp @ block @ comp.conj().T
    op = Operator(out, answer_space(spec.d_w), certify_unitary=True)
    # Both defining constraints, checked before returning.
    if np.linalg.norm(op.matrix @ plus - plus) > 1e-12 or np.linalg.norm(op.matrix @ minus + minus) > 1e-12:
        raise LinalgError("reflecting-oracle contract violated")
    return op


def bidirectional(O: Operator) -> Operator:
    """O (+) O*: block oracle giving an algorithm forward and inverse access."""
    return direct_sum([O, O.dag()])
