"""
Numerical backward induction, independent of the printed closed forms.

The manufacturer stage is solved exactly (linear first order conditions). The platform stage is solved by
Newton iterations on the reduced objective, started from the best points of a coarse grid.
"""
from dataclasses import dataclass, field
from functools import partial
from typing import Dict, List, Optional

import numpy as np

from .base_utils import NoStationaryPointException, ScenarioMismatchException, _parallel_map, debug, error
from .closed_form import EquilibriumOutcome, assemble_outcome, closed_form_equilibrium, discrepancy_note
from .params import Decisions, Method, ModelParams, Scenario, SolveMode
from .stages import DEGENERACY_TOL, StageSystem, stage_system, stage_values


@dataclass(frozen=True)
class SolveOptions :
    """Settings of the oracle """

    leader_grid_resolution: int = 64
    """ Points per leader axis of the starting grid : w in [0, q], s in [0, 2q] """

    newton_tol: float = 1e-10
    """ Maximum absolute first order residual of the leader """

    max_iterations: int = 100

    mode: str = SolveMode.SEQUENTIAL

    n_starts: int = 4
    """ Number of grid points Newton is started from """

    certify: bool = True
    """ Check by grid search that no deviation improves either player's profit """

    certification_resolution: int = 200
    certification_radius: float = 0.05
    """ Half width of the certification grid, relative to max(1, |decision|) """

    certification_tol: float = 1e-6

    damping: float = 0.5
    """ Damping of the best response iterations of the simultaneous mode """

    def __post_init__(self):
        if self.leader_grid_resolution < 8 or self.certification_resolution < 8 :
            raise Exception("Grid resolutions should be at least 8")
        if self.newton_tol <= 0 or self.certification_tol <= 0 :
            raise Exception("Tolerances should be positive")
        if self.n_starts < 1 or self.max_iterations < 1 :
            raise Exception("n_starts and max_iterations should be at least 1")
        if not 0 < self.damping <= 1 :
            raise Exception("Damping should be in (0, 1]")
        if not self.mode in (SolveMode.SEQUENTIAL, SolveMode.SIMULTANEOUS) :
            raise Exception("Unknown mode : %s" % self.mode)


@dataclass
class Certification :
    """Largest profit improvement found by grid search around the equilibrium """
    leader_improvement: float
    follower_improvement: float
    tolerance: float

    @property
    def passed(self) :
        return self.leader_improvement <= self.tolerance and self.follower_improvement <= self.tolerance


@dataclass
class _NewtonResult :
    x: np.ndarray
    residual: float
    iterations: int


def manufacturer_best_response(sc: Scenario, params: ModelParams, platform_decisions: Dict[str, float]) :
    """Profit maximizing (p, h) of the manufacturer, with its own (perceived) sensitivity.

    Parameters
    ----------
    platform_decisions : Dict with 's', and 'w' for the usage based contract

    Returns (p, h, FollowerDiagnostics). Raises DegenerateFollowerException if the stage system is singular
    """
    system = stage_system(sc.contract)
    values = {**stage_values(sc, params), **platform_decisions}
    p_, h_ = system.follower_response(values)
    return float(p_), float(h_), system.follower_diagnostics(values)


def is_well_posed(sc: Scenario, params: ModelParams, margin=0.0) :
    """True if both stages have a unique maximum : the manufacturer objective is strictly concave in (p, h)
    and the platform objective, once the manufacturer has responded, is strictly concave in its decisions.
    Both Hessians are constant. *margin* is a lower bound on the follower determinant and on the leader curvature.

    Elsewhere a stationary point may be a saddle, which certification then rejects """
    system = stage_system(sc.contract)
    values = stage_values(sc, params)
    follower = system.follower_diagnostics(values)
    if not follower.concave or follower.determinant <= max(margin, DEGENERACY_TOL) :
        return False
    hessian = system.leader_hessian(values)
    return bool(np.all(np.linalg.eigvalsh((hessian + hessian.T) / 2) < -margin))


def _central_gradient(f, x) :
    grad = np.empty_like(x)
    for i in range(len(x)) :
        step = 1e-6 * max(1.0, abs(x[i]))
        dx = np.zeros_like(x)
        dx[i] = step
        grad[i] = (f(x + dx) - f(x - dx)) / (2 * step)
    return grad


def _leader_grid(system: StageSystem, params: ModelParams, opts: SolveOptions) :
    bounds = dict(w=(0.0, params.q), s=(0.0, 2 * params.q))
    axes = [np.linspace(*bounds[name], opts.leader_grid_resolution) for name in system.leader_names]
    return [axis.ravel() for axis in np.meshgrid(*axes, indexing="ij")]


def _newton(system: StageSystem, values, opts: SolveOptions, x0) :
    """Newton iterations on the reduced leader objective. The Hessian is exact (constant),
    the gradient numeric until it stalls at its noise floor, then analytic """
    hessian = system.leader_hessian(values)
    if abs(np.linalg.det(hessian)) < 1e-14 :
        return _NewtonResult(x0, np.inf, 0)

    def objective(x) :
        return float(system.leader_objective(system.leader_point(values, x)))

    x = np.array(x0, dtype=float)
    analytic = False
    previous = np.inf
    residual = np.inf
    for iteration in range(1, opts.max_iterations + 1) :
        if analytic :
            grad = system.leader_gradient(system.leader_point(values, x))
        else :
            grad = _central_gradient(objective, x)
        x = x - np.linalg.solve(hessian, grad)

        residual = float(np.max(np.abs(system.leader_gradient(system.leader_point(values, x)))))
        if residual < opts.newton_tol :
            return _NewtonResult(x, residual, iteration)
        if residual > 0.5 * previous :
            analytic = True
        previous = residual

    return _NewtonResult(x, residual, opts.max_iterations)


def _solve_sequential(system: StageSystem, params: ModelParams, values, opts: SolveOptions) :
    grid = _leader_grid(system, params, opts)
    objective = system.leader_objective({**values, **dict(zip(system.leader_names, grid))})
    order = np.argsort(-objective, kind="stable")[:opts.n_starts]
    starts = [np.array([axis[i] for axis in grid]) for i in order]

    results = _parallel_map(partial(_newton, system, values, opts), starts)
    converged = [res for res in results if res.residual < opts.newton_tol]
    if not converged :
        best = min(res.residual for res in results)
        raise NoStationaryPointException(best)

    best = min(converged, key=lambda res : (res.residual, tuple(res.x)))
    leader = dict(zip(system.leader_names, best.x))
    p_, h_ = system.follower_response({**values, **leader})
    return Decisions(
        p=float(p_),
        w=float(leader["w"]) if "w" in leader else None,
        h=float(h_),
        s=float(leader["s"])), best.iterations


def _innovation_nash(system: StageSystem, values, opts: SolveOptions) :
    """Damped best response iterations between the platform software level and the manufacturer (p, h),
    polished by a Newton step on the joint first order conditions (linear) """
    s_ = 0.0
    for iteration in range(1, 10 * opts.max_iterations + 1) :
        p_, h_ = system.follower_response({**values, "s" : s_})
        point = {**values, "s" : s_, "p" : p_, "h" : h_}
        curvature = system.software_curvature(point)
        slope = system.software_slope(point)
        if curvature >= 0 :
            raise NoStationaryPointException(
                abs(slope), "Platform profit is not concave in s at fixed (p, h) : no best response")
        s_new = (1 - opts.damping) * s_ + opts.damping * (s_ - slope / curvature)
        done = abs(s_new - s_) <= opts.newton_tol * (1 + abs(s_))
        s_ = s_new
        if done :
            break
    else :
        raise NoStationaryPointException(abs(slope), "Best response iterations did not converge in %d steps" % iteration)

    p_, h_ = system.follower_response({**values, "s" : s_})
    z = np.array([p_, h_, s_], dtype=float)
    point = {**values, "p" : z[0], "h" : z[1], "s" : z[2]}
    z = z - np.linalg.solve(system.nash_jacobian(point), system.nash_conditions(point))
    return z, iteration


def _solve_simultaneous(system: StageSystem, params: ModelParams, values, opts: SolveOptions) :
    """The platform posts w first. Then s and (p, h) are set simultaneously """

    def nash_at(w_) :
        vals = dict(values) if w_ is None else {**values, "w" : w_}
        z, iterations = _innovation_nash(system, vals, opts)
        return {**vals, "p" : float(z[0]), "h" : float(z[1]), "s" : float(z[2])}, iterations

    if not "w" in system.leader_names :
        point, iterations = nash_at(None)
        return Decisions(p=point["p"], h=point["h"], s=point["s"]), iterations

    # Start from the best fee of a coarse grid
    fees = np.linspace(0, params.q, opts.leader_grid_resolution)
    profits = [system.platform_objective(nash_at(fee)[0]) for fee in fees]
    w_ = float(fees[int(np.argmax(profits))])

    # Newton on the fee : the Nash response is affine in w, the fee gradient is linear
    total = 0
    for iteration in range(1, opts.max_iterations + 1) :
        point, iterations = nash_at(w_)
        total += iterations
        grad = system.nash_fee_gradient(point)
        if abs(grad) < opts.newton_tol :
            return Decisions(p=point["p"], w=w_, h=point["h"], s=point["s"]), total

        step = 1e-6 * max(1.0, abs(w_))
        curvature = (system.nash_fee_gradient(nash_at(w_ + step)[0])
                     - system.nash_fee_gradient(nash_at(w_ - step)[0])) / (2 * step)
        if curvature == 0 :
            break
        w_ = w_ - grad / curvature

    raise NoStationaryPointException(abs(grad))


def _grid_around(center, resolution, radius) :
    half = radius * max(1.0, abs(center))
    return np.linspace(center - half, center + half, resolution)


def _certify(system: StageSystem, values, opts: SolveOptions) -> Certification :
    """Search a grid around the equilibrium for a profitable deviation of each player """
    n = opts.certification_resolution

    # Follower : deviations of (p, h) at fixed platform decisions
    P, H = np.meshgrid(
        _grid_around(values["p"], n, opts.certification_radius),
        _grid_around(values["h"], n, opts.certification_radius), indexing="ij")
    follower_best = np.max(system.follower_objective({**values, "p" : P, "h" : H}))
    follower_improvement = float(follower_best - system.follower_objective(values))

    # Leader : deviations of its decisions, the manufacturer responding (sequential),
    # or at fixed (p, h) for the software level (simultaneous)
    if opts.mode == SolveMode.SEQUENTIAL :
        axes = [_grid_around(values[name], n, opts.certification_radius) for name in system.leader_names]
        grid = [axis.ravel() for axis in np.meshgrid(*axes, indexing="ij")]
        leader_best = np.max(system.leader_objective({**values, **dict(zip(system.leader_names, grid))}))
        leader_improvement = float(leader_best - system.leader_objective(values))
    else :
        S = _grid_around(values["s"], n, opts.certification_radius)
        leader_best = np.max(system.platform_objective({**values, "s" : S}))
        leader_improvement = float(leader_best - system.platform_objective(values))

    return Certification(
        leader_improvement=max(0.0, leader_improvement),
        follower_improvement=max(0.0, follower_improvement),
        tolerance=opts.certification_tol)


def stackelberg_solve(sc: Scenario, params: ModelParams, opts: SolveOptions=None) -> EquilibriumOutcome :
    """Solve a scenario by backward induction.

    Raises DegenerateFollowerException when the manufacturer stage is singular, and NoStationaryPointException
    when no start converges. Domain violations of the printed forms are recorded on the outcome only.
    """
    opts = opts or SolveOptions()
    system = stage_system(sc.contract)
    values = stage_values(sc, params)
    system.check_follower(values)

    if opts.mode == SolveMode.SEQUENTIAL :
        decisions, iterations = _solve_sequential(system, params, values, opts)
    else :
        decisions, iterations = _solve_simultaneous(system, params, values, opts)

    outcome = assemble_outcome(sc, params, decisions, Method.ORACLE, mode=opts.mode)
    outcome.iterations = iterations

    if outcome.domain_violations :
        debug("Scenario '%s' solved outside of the printed domain : %s" % (sc, "; ".join(outcome.domain_violations)))

    if opts.certify :
        outcome.certification = _certify(system, stage_values(sc, params, decisions), opts)
        if not outcome.certification.passed :
            error("Warning : certification of '%s' failed, a deviation improves profit by %g (leader) / %g (follower)" % (
                sc, outcome.certification.leader_improvement, outcome.certification.follower_improvement))

    if not outcome.soc.concave :
        debug("Stationary point of '%s' is not a local maximum : %s" % (sc, outcome.soc))

    return outcome


def solve(sc: Scenario, params: ModelParams, method=Method.CLOSED, opts: SolveOptions=None) -> EquilibriumOutcome :
    """Equilibrium by closed form or by oracle. Use reconcile() to compare both """
    if method == Method.CLOSED :
        return closed_form_equilibrium(sc, params)
    if method == Method.ORACLE :
        return stackelberg_solve(sc, params, opts)
    raise Exception("Unknown method : %s. Expected '%s' or '%s'" % (method, Method.CLOSED, Method.ORACLE))


class Verdict :
    MATCH = "Match"
    MISMATCH = "Mismatch"


RECONCILED_VARIABLES = ("p", "w", "h", "s", "pi_m", "pi_p")


@dataclass
class ReconciliationEntry :
    scenario: str
    variable: str
    closed: float
    oracle: float
    abs_gap: float
    rel_gap: float
    verdict: str
    note: Optional[str] = None
    """ Known discrepancy of the printed value, if any """


@dataclass
class ReconciliationReport :
    scenario: Scenario
    params: ModelParams
    entries: List[ReconciliationEntry] = field(default_factory=list)

    @property
    def verdicts(self) -> Dict[str, str]:
        return {entry.variable : entry.verdict for entry in self.entries}

    @property
    def mismatches(self) :
        return [entry for entry in self.entries if entry.verdict == Verdict.MISMATCH]

    @property
    def all_match(self) :
        return not self.mismatches


def _reconciled_values(outcome: EquilibriumOutcome) :
    res = outcome.decisions.values()
    res["pi_m"] = outcome.printed.get("pi_m", outcome.pi_m_perceived)
    res["pi_p"] = outcome.printed.get("pi_p", outcome.pi_p)
    return res


def reconcile(closed: EquilibriumOutcome, oracle: EquilibriumOutcome, rel_tol=1e-6, abs_tol=1e-9) -> ReconciliationReport :
    """Compare two outcomes of the same scenario and parameters, variable by variable.
    Printed profits are compared when available. A gap is a Match within the relative OR the absolute tolerance """
    if closed.scenario != oracle.scenario or closed.params != oracle.params :
        raise ScenarioMismatchException(
            "Cannot reconcile '%s' with '%s' : scenarios or parameters differ" % (closed.scenario, oracle.scenario))

    report = ReconciliationReport(closed.scenario, closed.params)
    closed_values = _reconciled_values(closed)
    oracle_values = _reconciled_values(oracle)
    for var in RECONCILED_VARIABLES :
        if not var in closed_values :
            continue
        a, b = closed_values[var], oracle_values[var]
        abs_gap = abs(a - b)
        rel_gap = abs_gap / abs(b) if b != 0 else (0.0 if abs_gap == 0 else np.inf)
        match = rel_gap <= rel_tol or abs_gap <= abs_tol
        report.entries.append(ReconciliationEntry(
            scenario=closed.scenario.code,
            variable=var,
            closed=a,
            oracle=b,
            abs_gap=abs_gap,
            rel_gap=rel_gap,
            verdict=Verdict.MATCH if match else Verdict.MISMATCH,
            note=None if match else discrepancy_note(closed.scenario, var, closed.params)))
    return report


def compare_methods(sc: Scenario, params: ModelParams, opts: SolveOptions=None) :
    """Solve with both methods and reconcile. Returns (closed, oracle, report) """
    closed = closed_form_equilibrium(sc, params)
    oracle = stackelberg_solve(sc, params, opts)
    return closed, oracle, reconcile(closed, oracle)


def oracle_sweep(sc: Scenario, points: List[ModelParams], opts: SolveOptions=None) -> List[EquilibriumOutcome] :
    return _parallel_map(partial(stackelberg_solve, sc, opts=opts), points)
