"""Cost design for a pure target equilibrium: minimum-norm feasibility.

Making a pure joint strategy the (unique) equilibrium amounts to linear
margin constraints on C -- at the target profile, each player's chosen
action must undercut every alternative by at least epsilon -- plus the
uniqueness cone.  Minimizing ||C||_F over that intersection is exactly the
projection of the zero matrix onto it, which Dykstra's alternating
projections compute without an external conic solver.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleDetected
from .game import Game, PlayerDims, PureTarget, pure_to_strategy, validate_game
from .objectives import kl_objective
from .projections import project_cone_sum
from .results import DesignResult
from .solver import SolverConfig, solve_equilibrium

# Infeasibility heuristic: the iterate has stopped moving for this many
# sweeps while some margin stays violated by more than the floor.
STALL_SWEEPS = 500
STALL_VIOLATION = 1e-4


@dataclass(frozen=True)
class MarginConstraint:
    """One linear constraint <normal, C> <= beta (Frobenius inner product).

    Encodes: at the target profile, `player`'s chosen action costs at least
    epsilon less than alternative `action` (1-based).
    """

    normal: np.ndarray
    beta: float
    player: int
    action: int

    def violation(self, C: np.ndarray) -> float:
        return float(np.sum(self.normal * C) - self.beta)


@dataclass(frozen=True)
class MinNormConfig:
    epsilon: float = 3.0  # cost separation margin at the target profile
    dykstra_tol: float = 1e-8  # sweep-to-sweep Frobenius change at termination
    max_sweeps: int = 50_000

    def __post_init__(self):
        if self.epsilon < 0:
            raise ValueError("epsilon must be >= 0")
        if not self.dykstra_tol > 0 or self.max_sweeps < 1:
            raise ValueError("dykstra_tol must be > 0 and max_sweeps >= 1")


def build_margin_constraints(
    g: Game, t: PureTarget, epsilon: float
) -> list[MarginConstraint]:
    """One constraint per (player, non-chosen action).

    With x* the pure target profile, the cost of action k for player i is
    [b + C x*] at row (i, k), and C x* picks one column of C per player (the
    chosen one).  The constraint "chosen + epsilon <= alternative" therefore
    has normal +1 on (chosen row, chosen columns) and -1 on (alternative
    row, chosen columns), with beta = b[alt] - b[chosen] - epsilon.
    """
    dims = g.dims
    m = dims.total
    cols = [dims.flat_index(j, t.chosen[j]) for j in range(dims.n)]
    constraints = []
    for i in range(dims.n):
        row_star = dims.flat_index(i, t.chosen[i])
        for k in range(1, dims.sizes[i] + 1):
            row_k = dims.flat_index(i, k)
            if row_k == row_star:
                continue
            normal = np.zeros((m, m))
            normal[row_star, cols] += 1.0
            normal[row_k, cols] -= 1.0
            beta = float(g.b[row_k] - g.b[row_star] - epsilon)
            constraints.append(
                MarginConstraint(normal=normal, beta=beta, player=i, action=k)
            )
    return constraints


def max_margin_violation(C: np.ndarray, constraints: list[MarginConstraint]) -> float:
    if not constraints:
        return 0.0
    return max(max(c.violation(C) for c in constraints), 0.0)


def _dykstra_min_norm(
    dims: PlayerDims,
    constraints: list[MarginConstraint],
    tol: float,
    max_sweeps: int,
    start: np.ndarray | None = None,
) -> tuple[np.ndarray, int, bool]:
    """Project `start` (default: zero) onto (cone) intersect (half-spaces).

    Classic Dykstra: one correction term per set, half-spaces first and the
    cone last within each sweep so the returned iterate is cone-feasible up
    to round-off.  Converged iterates are the exact projection of the start
    point, hence the minimum-norm feasible matrix when starting from zero.
    """
    m = dims.total
    X = np.zeros((m, m)) if start is None else np.array(start, dtype=float)
    corrections = [np.zeros((m, m)) for _ in range(len(constraints) + 1)]
    normals_sq = [float(np.sum(c.normal * c.normal)) for c in constraints]
    stall = 0
    for sweep in range(1, max_sweeps + 1):
        X_prev = X
        for l, con in enumerate(constraints):
            Y = X + corrections[l]
            overshoot = max(float(np.sum(con.normal * Y)) - con.beta, 0.0)
            X = Y - (overshoot / normals_sq[l]) * con.normal
            corrections[l] = Y - X
        Y = X + corrections[-1]
        X = project_cone_sum(Y, dims)
        corrections[-1] = Y - X

        delta = float(np.linalg.norm(X - X_prev))
        if delta <= tol:
            violation = max_margin_violation(X, constraints)
            if violation < STALL_VIOLATION:
                return X, sweep, True
            stall += 1
            if stall >= STALL_SWEEPS:
                raise InfeasibleDetected(
                    f"alternating projections stalled for {stall} sweeps with "
                    f"margin violation {violation:.3e}",
                    max_violation=violation,
                )
        else:
            stall = 0
    return X, max_sweeps, False


def solve_min_norm_design(
    g: Game,
    t: PureTarget,
    cfg: MinNormConfig | None = None,
    solver: SolverConfig | None = None,
) -> DesignResult:
    """Smallest-Frobenius-norm C that makes the target the unique equilibrium.

    Runs Dykstra over the margin half-spaces and the uniqueness cone, then
    solves the forward problem for the induced equilibrium.  The reported
    objective value is the divergence of the induced equilibrium from the
    (smoothed) target.  A result with `converged=False` means the sweep
    budget ran out; a clearly infeasible target raises InfeasibleDetected.
    """
    validate_game(g)
    cfg = cfg or MinNormConfig()
    constraints = build_margin_constraints(g, t, cfg.epsilon)
    C, sweeps, converged = _dykstra_min_norm(
        g.dims, constraints, cfg.dykstra_tol, cfg.max_sweeps
    )
    designed = g.with_matrix(C)
    outcome = solve_equilibrium(designed, solver)
    target_x = pure_to_strategy(t, g.dims)
    divergence = kl_objective(target_x, g.dims).value(outcome.x)
    return DesignResult(
        C=C,
        x=outcome.x,
        objective_value=divergence,
        c_norm=float(np.linalg.norm(C)),
        outer_iterations=sweeps,
        converged=converged and outcome.converged,
        max_violation=max_margin_violation(C, constraints),
    )
