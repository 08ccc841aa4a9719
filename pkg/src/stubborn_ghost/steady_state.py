"""Rate generator assembly and stationary distribution solvers."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .state_space import StateSpace


class SolverError(RuntimeError):
    def __init__(self, message, residual=float("nan")):
        super().__init__(f"{message} (residual={residual:.3e})")
        self.residual = residual


class DisconnectedSpaceError(ValueError):
    """The transition graph is not strongly connected."""


@dataclass(frozen=True)
class Generator:
    Q: np.ndarray
    space: StateSpace | None = None


@dataclass(frozen=True)
class StationaryDist:
    pi: np.ndarray
    residual: float
    delta_max: int | None
    space: StateSpace | None = None

    def __getitem__(self, state):
        return float(self.pi[self.space.index[state]])

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["state", "probability"])
            for s, p in zip(self.space.states, self.pi):
                w.writerow([s.label(), repr(float(p))])


def generator_from_rates(rates: np.ndarray) -> Generator:
    """Build a generator from a matrix of off-diagonal rates."""
    Q = np.array(rates, dtype=float)
    np.fill_diagonal(Q, 0.0)
    if (Q < 0).any():
        raise ValueError("negative transition rate")
    np.fill_diagonal(Q, -Q.sum(axis=1))
    return Generator(Q)


def build_generator(space: StateSpace) -> Generator:
    if space.rates is None:
        raise ValueError("state space was enumerated without rates")
    idx = space.index
    n = len(space)
    R = np.zeros((n, n))
    for i, trs in enumerate(space.transitions):
        for tr in trs:
            if tr.truncated:
                continue
            j = idx[tr.next]
            if j != i:
                R[i, j] += tr.rate
    ncomp, _ = connected_components(csr_matrix(R), directed=True, connection="strong")
    if ncomp != 1:
        raise DisconnectedSpaceError(f"transition graph has {ncomp} strong components")
    gen = generator_from_rates(R)
    return Generator(gen.Q, space)


def solve_stationary(gen: Generator, tol: float = 1e-12, dense_limit: int = 4000,
                     max_iter: int = 1_000_000) -> StationaryDist:
    """Solve ``pi Q = 0``, ``sum(pi) = 1``.

    Direct solve with the normalization row replacing one balance equation;
    above ``dense_limit`` states, power iteration on the uniformized chain.
    """
    Q = gen.Q
    n = Q.shape[0]
    if n <= dense_limit:
        A = Q.T.copy()
        A[-1, :] = 1.0
        b = np.zeros(n)
        b[-1] = 1.0
        pi = np.linalg.solve(A, b)
        pi = np.clip(pi, 0.0, None)
        pi /= pi.sum()
    else:
        lam = 1.05 * np.max(-np.diag(Q))
        P = np.eye(n) + Q / lam
        pi = np.full(n, 1.0 / n)
        for _ in range(max_iter):
            new = pi @ P
            if np.abs(new - pi).max() < tol * 1e-2:
                pi = new
                break
            pi = new
        else:
            raise SolverError("power iteration did not converge", float(np.abs(pi @ Q).max()))
        pi /= pi.sum()
    residual = float(np.abs(pi @ Q).max())
    if residual > max(tol, 1e-9):
        raise SolverError("stationary solve inaccurate", residual)
    space = gen.space
    return StationaryDist(pi, residual, space.delta_max if space else None, space)
