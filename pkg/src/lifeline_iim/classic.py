"""Classic input-output inoperability math.

The interdependency matrix A is the transpose of the adjacency matrix:
a_ij is the influence of node j on node i, in [0, 1].  A disturbance
vector c maps to a damage (inoperability) vector q through the
Leontief-style inverse q = (I - A)^-1 c, which exists iff the spectral
radius of A is below one.

The series-parallel correction splits the influence received by a node
with n-fold redundancy across its parallels: row i of A is scaled by
sp_i = 1/n_i (1 for ungrouped nodes and targets), i.e. A is replaced by
A * (sp 1^T) elementwise.  Redundant members' inoperabilities aggregate
into a group inoperability by the product rule.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import SolvabilityError

_RHO_TOL = 1e-12


@dataclass
class DamageResult:
    """raw: unclamped solution; clamped: min(max(raw, 0), 1) reported as
    inoperability; groups: joint inoperability per redundancy group."""

    raw: np.ndarray
    clamped: np.ndarray
    groups: dict[str, float] = field(default_factory=dict)


def _check_matrix(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("interdependency matrix must be square")
    if np.any(a < 0.0) or np.any(a > 1.0):
        raise ValueError("interdependency matrix entries must lie in [0, 1]")
    return a


def spectral_radius(a: np.ndarray) -> float:
    return float(np.max(np.abs(np.linalg.eigvals(np.asarray(a, dtype=float)))))


def damage_vector(a: np.ndarray, c: np.ndarray) -> DamageResult:
    """Solve q = (I - A)^-1 c.

    Raises SolvabilityError when rho(A) >= 1 (no finite equilibrium).
    """
    a = _check_matrix(a)
    c = np.asarray(c, dtype=float)
    if c.shape[0] != a.shape[0]:
        raise ValueError("disturbance vector length does not match matrix")
    rho = spectral_radius(a)
    if rho >= 1.0 - _RHO_TOL:
        raise SolvabilityError(
            f"spectral radius {rho:.6f} >= 1; inoperability diverges"
        )
    q = np.linalg.solve(np.eye(a.shape[0]) - a, c)
    return DamageResult(raw=q, clamped=np.clip(q, 0.0, 1.0))


def sp_vector(n: int, groups: dict[str, list[int]]) -> np.ndarray:
    """Series-parallel vector: 1/len(group) on member rows, 1 elsewhere."""
    sp = np.ones(n)
    for members in groups.values():
        if len(members) < 1:
            raise ValueError("empty redundancy group")
        for i in members:
            sp[i] = 1.0 / len(members)
    return sp


def damage_vector_sp(
    a: np.ndarray,
    sp: np.ndarray,
    c: np.ndarray,
    groups: dict[str, list[int]] | None = None,
) -> DamageResult:
    """Series-parallel corrected solve q = (I - A*(sp 1^T))^-1 c.

    groups maps group name -> member row indices; each group's joint
    inoperability is the product of its members' clamped values.
    """
    a = _check_matrix(a)
    sp = np.asarray(sp, dtype=float)
    if sp.shape[0] != a.shape[0]:
        raise ValueError("series-parallel vector length does not match matrix")
    if np.any(sp <= 0.0) or np.any(sp > 1.0):
        raise ValueError("series-parallel entries must lie in (0, 1]")
    a_sp = a * sp[:, None]
    rho = spectral_radius(a_sp)
    if rho >= 1.0 - _RHO_TOL:
        raise SolvabilityError(
            f"spectral radius {rho:.6f} >= 1 after series-parallel scaling"
        )
    q = np.linalg.solve(np.eye(a.shape[0]) - a_sp, np.asarray(c, dtype=float))
    clamped = np.clip(q, 0.0, 1.0)
    group_q: dict[str, float] = {}
    for name, members in (groups or {}).items():
        group_q[name] = float(np.prod([clamped[i] for i in members]))
    return DamageResult(raw=q, clamped=clamped, groups=group_q)


def decay_score(q_series: np.ndarray) -> np.ndarray:
    """Column summation of a damage-vector series.

    Accepts one vector (returns a scalar array) or a (T, n) series
    (returns length-T sums). The caller supplies the q computed for one
    perturbed node's scenario.
    """
    q = np.asarray(q_series, dtype=float)
    if q.ndim == 1:
        return np.asarray(q.sum())
    return q.sum(axis=1)


def system_score(decay_by_kind: dict[str, list[float]]) -> float:
    """Sum over kinds of (sum of member decay scores / member count).

    Target nodes must be excluded by the caller; an empty kind bucket
    raises ValueError.
    """
    total = 0.0
    for kind, scores in decay_by_kind.items():
        if len(scores) == 0:
            raise ValueError(f"kind {kind!r} has zero nodes")
        total += sum(scores) / len(scores)
    return total


def couple_layers_classic(
    i_matrix: np.ndarray, q_upstream: np.ndarray, c_local: np.ndarray
) -> np.ndarray:
    """Disturbance handed to a downstream network: I^T q + c, clamped to
    [0, 1] so it stays a valid disturbance vector."""
    i_matrix = np.asarray(i_matrix, dtype=float)
    q_upstream = np.asarray(q_upstream, dtype=float)
    c_local = np.asarray(c_local, dtype=float)
    coupled = i_matrix.T @ q_upstream + c_local
    return np.clip(coupled, 0.0, 1.0)
