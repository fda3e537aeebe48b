"""
Calculus of the two stage game, derived symbolically once per contract.

The manufacturer (follower) objective is quadratic in (p, h) : its first order conditions form a
linear system A.[p, h] = b, where b is affine in the platform decisions. The platform (leader)
objective is quadratic as well, so the Hessian of its reduced objective is constant.
"""
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, List, Tuple

import numpy as np
from sympy import diff, expand, hessian, linear_eq_to_matrix

from .base_utils import DegenerateFollowerException, _sign
from .core_model import *

# Absolute determinant under which the follower system is considered singular
DEGENERACY_TOL = 1e-12

FOLLOWER_VARS = (p, h)


def _eval_matrix(entries, values) :
    """Evaluate a nested list of CompiledExpr. Array values give a stack of matrices of shape (..., rows, cols) """
    raw = [[np.asarray(expr.compute(values), dtype=float) for expr in row] for row in entries]
    shape = np.broadcast_shapes(*[a.shape for row in raw for a in row])
    return np.stack([
        np.stack([np.broadcast_to(a, shape) for a in row], axis=-1)
        for row in raw], axis=-2)


def _eval_vector(entries, values) :
    raw = [np.asarray(expr.compute(values), dtype=float) for expr in entries]
    shape = np.broadcast_shapes(*[a.shape for a in raw])
    return np.stack([np.broadcast_to(a, shape) for a in raw], axis=-1)


def _det2(A) :
    return A[..., 0, 0] * A[..., 1, 1] - A[..., 0, 1] * A[..., 1, 0]


@dataclass
class FollowerDiagnostics :
    """Second order conditions of the manufacturer stage """
    diagonal: Tuple[int, int]
    determinant: float

    @property
    def concave(self) :
        return all(sign < 0 for sign in self.diagonal) and self.determinant > 0


@dataclass
class SecondOrderDiagnostics :
    """Second order conditions at a candidate equilibrium.
    Leader values are NaN when the follower stage is degenerate."""
    follower: FollowerDiagnostics
    leader_diagonal: Tuple[int, ...]
    leader_determinant: float

    @property
    def degenerate(self) :
        return abs(self.follower.determinant) <= DEGENERACY_TOL

    @property
    def leader_concave(self) :
        if self.degenerate :
            return False
        if len(self.leader_diagonal) == 1 :
            return self.leader_diagonal[0] < 0
        return all(sign < 0 for sign in self.leader_diagonal) and self.leader_determinant > 0

    @property
    def concave(self) :
        return self.follower.concave and self.leader_concave


class StageSystem :
    """First and second order structure of one contract, compiled from the profit expressions.

    Values passed to the methods are dicts of symbol name -> value, including 'm' : the mean
    sensitivity perceived by the manufacturer. Leader variables may be arrays, for vectorized grids.
    """

    def __init__(self, contract):
        self.contract = contract
        self.leader_vars = (w, s) if contract == Contract.USAGE_BASED else (s,)
        self.leader_names = [str(var) for var in self.leader_vars]
        all_vars = self.leader_vars + FOLLOWER_VARS

        follower = manufacturer_profit_expr(contract, m)
        leader = platform_profit_expr(contract)

        gradient = [expand(diff(follower, var)) for var in FOLLOWER_VARS]
        A, b = linear_eq_to_matrix(gradient, list(FOLLOWER_VARS))

        self._follower = CompiledExpr(follower)
        self._follower_gradient = [CompiledExpr(expr) for expr in gradient]
        self._A = [[CompiledExpr(A[i, j]) for j in range(2)] for i in range(2)]
        self._b = [CompiledExpr(b[i]) for i in range(2)]
        self._db = [[CompiledExpr(diff(b[i], var)) for var in self.leader_vars] for i in range(2)]

        self._leader = CompiledExpr(leader)
        self._leader_partials = [CompiledExpr(diff(leader, var)) for var in all_vars]
        H = hessian(leader, all_vars)
        n = len(all_vars)
        self._leader_hessian = [[CompiledExpr(H[i, j]) for j in range(n)] for i in range(n)]

        # Innovation subgame : manufacturer FOCs and the platform software FOC, (p, h) and s chosen simultaneously
        nash = gradient + [expand(diff(leader, s))]
        nash_vars = [p, h, s]
        self._nash = [CompiledExpr(expr) for expr in nash]
        self._nash_jacobian = [[CompiledExpr(diff(expr, var)) for var in nash_vars] for expr in nash]
        self._nash_dw = [CompiledExpr(diff(expr, w)) for expr in nash] if contract == Contract.USAGE_BASED else None

    # -- Follower stage

    def follower_matrix(self, values) :
        return _eval_matrix(self._A, values)

    def follower_determinant(self, values) :
        """Determinant of the Hessian of the manufacturer objective in (p, h) """
        return _det2(self.follower_matrix(values))

    def follower_diagnostics(self, values) -> FollowerDiagnostics :
        A = self.follower_matrix(values)
        return FollowerDiagnostics(
            diagonal=(_sign(A[0, 0]), _sign(A[1, 1])),
            determinant=float(_det2(A)))

    def check_follower(self, values) :
        det = self.follower_determinant(values)
        if np.any(np.abs(det) <= DEGENERACY_TOL) :
            raise DegenerateFollowerException(float(np.min(np.abs(det))))

    def follower_response(self, values) :
        """Stationary point (p, h) of the manufacturer for given platform decisions """
        self.check_follower(values)
        A = self.follower_matrix(values)
        b = _eval_vector(self._b, values)
        A = np.broadcast_to(A, b.shape[:-1] + A.shape[-2:])
        x = np.linalg.solve(A, b[..., None])[..., 0]
        return x[..., 0], x[..., 1]

    def follower_jacobian(self, values) :
        """Derivatives of the follower response with respect to the leader variables, shape (2, n_leader) """
        A = self.follower_matrix(values)
        db = _eval_matrix(self._db, values)
        return np.linalg.solve(A, db)

    def follower_objective(self, values) :
        return self._follower.compute(values)

    # -- Leader stage

    def _with_response(self, values) :
        p_, h_ = self.follower_response(values)
        return {**values, "p" : p_, "h" : h_}

    def leader_point(self, values, x) :
        return {**values, **dict(zip(self.leader_names, x))}

    def leader_objective(self, values) :
        """Platform profit once the manufacturer has responded """
        return self._leader.compute(self._with_response(values))

    def platform_objective(self, values) :
        """Platform profit at fixed (p, h) """
        return self._leader.compute(values)

    def leader_gradient(self, values) :
        """Total derivative of the reduced leader objective, through the follower response """
        full = self._with_response(values)
        partials = np.array([float(expr.compute(full)) for expr in self._leader_partials])
        n = len(self.leader_vars)
        J = self.follower_jacobian(values)
        return partials[:n] + partials[n:] @ J

    def leader_hessian(self, values) :
        """Hessian of the reduced leader objective : Z'.H.Z with Z = [I ; J] """
        H = _eval_matrix(self._leader_hessian, values)
        J = self.follower_jacobian(values)
        Z = np.vstack([np.eye(len(self.leader_vars)), J])
        return Z.T @ H @ Z

    # -- Simultaneous innovation subgame

    def software_slope(self, values) :
        """Partial derivative of the platform profit in s, at fixed (p, h) """
        return float(self._leader_partials[self.leader_names.index("s")].compute(values))

    def software_curvature(self, values) :
        i = self.leader_names.index("s")
        return float(self._leader_hessian[i][i].compute(values))

    def nash_conditions(self, values) :
        return np.array([float(expr.compute(values)) for expr in self._nash])

    def nash_jacobian(self, values) :
        return _eval_matrix(self._nash_jacobian, values)

    def nash_fee_gradient(self, values) :
        """Total derivative of the platform profit in w, the innovation subgame responding at Nash """
        dz = -np.linalg.solve(self.nash_jacobian(values), _eval_vector(self._nash_dw, values))
        partials = {name : float(expr.compute(values)) for name, expr in
                    zip(self.leader_names + ["p", "h"], self._leader_partials)}
        return partials["w"] + partials["p"] * dz[0] + partials["h"] * dz[1] + partials["s"] * dz[2]

    # -- Diagnostics

    def foc_residuals(self, values, mode=SolveMode.SEQUENTIAL) -> Dict[str, float]:
        """Analytic first order residuals at a full decision vector.
        Leader residuals are omitted when the follower stage is degenerate."""
        res = {"dpi_m/d" + str(var) : float(expr.compute(values))
               for var, expr in zip(FOLLOWER_VARS, self._follower_gradient)}

        if abs(self.follower_determinant(values)) <= DEGENERACY_TOL :
            return res

        if mode == SolveMode.SEQUENTIAL :
            for name, val in zip(self.leader_names, self.leader_gradient(values)) :
                res["dpi_p/d" + name] = float(val)
        else :
            res["dpi_p/ds"] = self.software_slope(values)
            if self.contract == Contract.USAGE_BASED :
                res["dpi_p/dw"] = self.nash_fee_gradient(values)
        return res

    def second_order(self, values) -> SecondOrderDiagnostics :
        follower = self.follower_diagnostics(values)
        n = len(self.leader_vars)
        if abs(follower.determinant) <= DEGENERACY_TOL :
            return SecondOrderDiagnostics(follower, tuple([0] * n), float("nan"))
        H = self.leader_hessian(values)
        return SecondOrderDiagnostics(
            follower,
            tuple(_sign(H[i, i]) for i in range(n)),
            float(np.linalg.det(H)))


@lru_cache()
def stage_system(contract) -> StageSystem :
    return StageSystem(contract)


def stage_values(sc: Scenario, params: ModelParams, d: Decisions=None) :
    """Values for the stage system : parameters, decisions if any, and the manufacturer's mean sensitivity """
    values = {**params.values(), m.name : params.sensitivity(Viewpoint.PERCEIVED, sc)}
    if d is not None :
        values.update(d.values())
    return values
