"""Execution of quantum query algorithms with Las Vegas instrumentation.

An algorithm is the alternating product U_Q O~ U_{Q-1} ... O~ U_0 where the
query operator O~ applies the input oracle on a fixed "bullet" part of the
space and acts as identity on the "passive" part.  The bullet part factors as
an index register times the oracle slot; both parts are described by explicit
flat-index arrays so that layouts with interleaved registers compile cleanly.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import LinalgError, Operator, as_array, apply_unitary


class QueryError(LinalgError):
    pass


@dataclass(frozen=True)
class QueryAlgorithm:
    """Fixed unitaries around Q identical queries, over a declared bullet split.

    ``bullet`` lists the flat indices forming the queried part, ordered as the
    row-major flattening of (index register) x (oracle slot); every other
    index is passive.  ``unitaries`` holds Q+1 entries, outermost last.
    """

    unitaries: tuple
    dim: int
    up_dim: int
    oracle_dim: int
    bullet: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "bullet", np.asarray(self.bullet, dtype=int))
        if self.bullet.size != self.up_dim * self.oracle_dim:
            raise QueryError("bullet index count must equal up_dim * oracle_dim")
        if self.bullet.size and (self.bullet.min() < 0 or self.bullet.max() >= self.dim):
            raise QueryError("bullet indices out of range")
        if len(set(self.bullet.tolist())) != self.bullet.size:
            raise QueryError("bullet indices must be distinct")
        for u in self.unitaries:
            if u.dim != self.dim:
                raise QueryError(f"section dim {u.dim} != algorithm dim {self.dim}")

    @property
    def queries(self) -> int:
        return len(self.unitaries) - 1

    @property
    def passive_dim(self) -> int:
        return self.dim - self.bullet.size

    def query_operator(self, oracle: Operator) -> np.ndarray:
        """Dense O~ = I_passive (+) (I x O).  Mostly for inspection and tests."""
        out = np.eye(self.dim, dtype=complex)
        for row in range(self.up_dim):
            idx = self.bullet[row * self.oracle_dim:(row + 1) * self.oracle_dim]
            out[np.ix_(idx, idx)] = oracle.matrix
        return out

    def apply_query(self, oracle: Operator, psi: np.ndarray) -> np.ndarray:
        out = psi.copy()
        block = psi[self.bullet].reshape(self.up_dim, self.oracle_dim)
        out[self.bullet] = (block @ oracle.matrix.T).reshape(-1)
        return out

    def bullet_part(self, psi: np.ndarray) -> np.ndarray:
        return psi[self.bullet]

    def action(self, oracle: Operator) -> Operator:
        """The full unitary the algorithm implements for this oracle."""
        mat = _as_matrix(self.unitaries[0], self.dim)
        q = self.query_operator(oracle)
        for u in self.unitaries[1:]:
            mat = _as_matrix(u, self.dim) @ (q @ mat)
        return Operator(mat)


def _as_matrix(u, dim: int) -> np.ndarray:
    if isinstance(u, Operator):
        return u.matrix
    if hasattr(u, "dense"):
        return u.dense().matrix
    raise QueryError(f"cannot densify section of type {type(u)!r}")


def _check_oracle(alg: QueryAlgorithm, oracle: Operator):
    if oracle.dim != alg.oracle_dim:
        raise QueryError(f"oracle dim {oracle.dim} != declared slot dim {alg.oracle_dim}")


@dataclass(frozen=True)
class QueryTrace:
    """Per-query bullet components, their direct sum, and the Las Vegas total."""

    bullet_states: tuple
    final_state: np.ndarray

    @property
    def total_query_state(self) -> np.ndarray:
        """q = (+)_t psi_t_bullet, flattened query-index first."""
        if not self.bullet_states:
            return np.zeros(0, dtype=complex)
        return np.concatenate(self.bullet_states)

    @property
    def las_vegas(self) -> float:
        return float(np.linalg.norm(self.total_query_state) ** 2)


@dataclass(frozen=True)
class PerturbationLog:
    magnitudes: tuple

    @property
    def total_bound(self) -> float:
        return float(sum(self.magnitudes))


def run(alg: QueryAlgorithm, oracle: Operator, xi) -> np.ndarray:
    """Final state U_Q O~ ... O~ U_0 xi."""
    _check_oracle(alg, oracle)
    psi = apply_unitary(alg.unitaries[0], as_array(xi))
    for u in alg.unitaries[1:]:
        psi = alg.apply_query(oracle, psi)
        psi = apply_unitary(u, psi)
    return psi


def trace(alg: QueryAlgorithm, oracle: Operator, xi) -> QueryTrace:
    """Run while recording the queried component before each query."""
    _check_oracle(alg, oracle)
    psi = apply_unitary(alg.unitaries[0], as_array(xi))
    bullets = []
    for u in alg.unitaries[1:]:
        bullets.append(alg.bullet_part(psi).copy())
        psi = alg.apply_query(oracle, psi)
        psi = apply_unitary(u, psi)
    return QueryTrace(tuple(bullets), psi)


def run_perturbed(alg: QueryAlgorithm, oracle: Operator, xi,
                  injected) -> tuple[np.ndarray, PerturbationLog]:
    """Run with state displacements injected after chosen sections.

    ``injected`` is a list of (step, delta) with step in 0..Q meaning "after
    the step-th section"; the final state is guaranteed to sit within
    sum(|delta|) of the unperturbed run.
    """
    _check_oracle(alg, oracle)
    by_step: dict[int, list[np.ndarray]] = {}
    mags = []
    for step, delta in injected:
        if not 0 <= step <= alg.queries:
            raise QueryError(f"step {step} outside 0..{alg.queries}")
        d = as_array(delta)
        if d.size != alg.dim:
            raise QueryError("delta dimension mismatch")
        by_step.setdefault(int(step), []).append(d)
        mags.append(float(np.linalg.norm(d)))
    psi = apply_unitary(alg.unitaries[0], as_array(xi))
    for d in by_step.get(0, []):
        psi = psi + d
    for t, u in enumerate(alg.unitaries[1:], start=1):
        psi = alg.apply_query(oracle, psi)
        psi = apply_unitary(u, psi)
        for d in by_step.get(t, []):
            psi = psi + d
    return psi, PerturbationLog(tuple(mags))


def linearity_check(alg: QueryAlgorithm, oracle: Operator, xi1, xi2,
                    a: complex, b: complex, tol: float = 1e-10) -> bool:
    """Total query states are linear in the initial state."""
    q1 = trace(alg, oracle, xi1).total_query_state
    q2 = trace(alg, oracle, xi2).total_query_state
    combo = a * as_array(xi1) + b * as_array(xi2)
    qc = trace(alg, oracle, combo).total_query_state
    return float(np.linalg.norm(qc - (a * q1 + b * q2))) <= tol
