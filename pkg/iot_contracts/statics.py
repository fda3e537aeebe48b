"""
Comparative statics : numeric derivatives, sign suites, crossing scans and region maps over the parameter space.
"""
from dataclasses import dataclass, field
from itertools import product
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.optimize import bisect

from .base_utils import ExceptionContext, _fmt_point, _parallel_map, _sign, debug
from .closed_form import EPS1, KNOWN_DISCREPANCIES, MU_BOUND_REVENUE, MU_BOUND_USAGE, domain_check, eps2_bound
from .oracle import SolveOptions, solve
from .params import *
from .roots import PolySpec, poly_root

# Oracle settings for derivative stencils and scans : the leader problem being quadratic, one start is enough
STATICS_OPTIONS = SolveOptions(leader_grid_resolution=16, n_starts=1, certify=False)

# Distance kept from open interval bounds when scanning
EDGE = 1e-3

# Polynomials whose roots are the crossing points, at the solved benchmark
FIG3_POLY = PolySpec((
    -791453125, 1266325000, -2159597500, 1882375000, 602171925,
    -945883300, 836904192, -251924024, 11038532), root_index=2)
""" λ at which the manufacturer prefers revenue sharing, for r=0.3 """

PROP4_POLY = PolySpec((24144000, 1424000, -18204600, 280800, 5700, 2385, 10152), root_index=1, bracket=(1.0, EPS1))
""" ε' at which ∂s^ro/∂ε' changes sign, for r=0.15 """

PROP6_POLY = PolySpec((-120928, 54144, 36349, 993), root_index=3)
""" ε' at which s^ro - s^rn changes sign, for r=0.125 """


class SuiteVerdict :
    CONFIRMED = "Confirmed"
    MIXED = "Mixed"
    VIOLATED = "Violated"


@dataclass
class PartialEstimate :
    """Central difference estimate, with its Richardson extrapolation for error control """
    value: float
    richardson: float
    step: float

    @property
    def unstable(self) :
        return abs(self.value - self.richardson) > 1e-4 * max(abs(self.richardson), 1e-10)

    @property
    def sign(self) :
        return _sign(self.richardson)


def central_difference(f : Callable[[float], float], x, step=None) -> PartialEstimate :
    """Derivative of f at x. Step defaults to 1e-4 of the scale of x """
    if step is None :
        step = 1e-4 * max(1.0, abs(x))
    d_h = (f(x + step) - f(x - step)) / (2 * step)
    d_h2 = (f(x + step / 2) - f(x - step / 2)) / step
    return PartialEstimate(value=d_h, richardson=(4 * d_h2 - d_h) / 3, step=step)


def _outcome_fn(sc, base: ModelParams, wrt, method, opts) :
    def outcome(x) :
        with ExceptionContext("%s, %s=%.12g" % (sc, wrt, x)) :
            return solve(sc, base.with_values(**{wrt : x}), method, opts)
    return outcome


def numeric_partials(
        quantities: Sequence[str],
        sc: Scenario,
        params: ModelParams,
        wrt,
        step=None,
        method=Method.CLOSED,
        opts: SolveOptions=STATICS_OPTIONS,
        profit_view=ProfitView.PERCEIVED) -> Dict[str, PartialEstimate]:
    """Derivatives of several quantities (p, w, h, s, pi_m, pi_p, pi_sc) in one parameter, sharing the stencil """
    outcome = _outcome_fn(sc, params, wrt, method, opts)
    cache = dict()

    def values(x) :
        if not x in cache :
            out = outcome(x)
            cache[x] = np.array([out.quantity(name, profit_view) for name in quantities])
        return cache[x]

    estimate = central_difference(values, params.get(wrt), step)
    return {name : PartialEstimate(estimate.value[i], estimate.richardson[i], estimate.step)
            for i, name in enumerate(quantities)}


def numeric_partial(quantity, sc: Scenario, params: ModelParams, wrt, step=None, method=Method.CLOSED,
                    opts: SolveOptions=STATICS_OPTIONS, profit_view=ProfitView.PERCEIVED) -> PartialEstimate :
    return numeric_partials([quantity], sc, params, wrt, step, method, opts, profit_view)[quantity]


def quantity_difference(
        quantity,
        first: Scenario,
        second: Scenario,
        method=Method.CLOSED,
        opts: SolveOptions=STATICS_OPTIONS,
        profit_view=ProfitView.PERCEIVED,
        second_values: Dict[str, float]=None) -> Callable[[ModelParams], float]:
    """Function of the parameters : quantity of the first scenario minus quantity of the second one.
    *second_values* overrides parameters of the second scenario only (for instance epsilon_prime=1 for a rational baseline) """
    def difference(params: ModelParams) :
        other = params.with_values(**second_values) if second_values else params
        return solve(first, params, method, opts).quantity(quantity, profit_view) \
            - solve(second, other, method, opts).quantity(quantity, profit_view)
    return difference


def along(f : Callable[[ModelParams], float], base: ModelParams, key) -> Callable[[float], float]:
    """Restrict a function of the parameters to one varying parameter """
    def restricted(x) :
        with ExceptionContext("%s=%.12g" % (key, x)) :
            return f(base.with_values(**{key : x}))
    return restricted


@dataclass
class Crossing :
    at: float
    left_sign: int
    right_sign: int


def threshold_scan(f : Callable[[float], float], bracket: Tuple[float, float], resolution=101, tol=1e-8) -> List[Crossing]:
    """Scan f over the bracket and refine every sign change by bisection """
    xs = np.linspace(bracket[0], bracket[1], resolution)
    values = [f(x) for x in xs]

    res = []
    for i in range(resolution - 1) :
        left, right = _sign(values[i]), _sign(values[i + 1])
        if left * right < 0 :
            at = bisect(f, xs[i], xs[i + 1], xtol=tol)
            res.append(Crossing(float(at), left, right))
        elif left == 0 and 0 < i and _sign(values[i - 1]) * right < 0 :
            res.append(Crossing(float(xs[i]), _sign(values[i - 1]), right))
    return res


def _single_downward(crossings: List[Crossing]) :
    """At most one crossing, from positive to negative """
    return len(crossings) == 0 or (len(crossings) == 1 and crossings[0].left_sign > 0)


@dataclass
class RegionMap :
    """Signs of a function over a (x, y) grid, and the boundary points found along y for each x """
    name: str
    x_name: str
    y_name: str
    xs: np.ndarray
    ys: np.ndarray
    signs: np.ndarray
    boundaries: List[Tuple[float, float]] = field(default_factory=list)

    def pattern(self, i) :
        """Sequence of distinct signs along y for the i-th x, like '+-' """
        res = ""
        for sign in self.signs[i] :
            char = {1 : "+", -1 : "-", 0 : "0"}[sign]
            if not res.endswith(char) :
                res += char
        return res

    @property
    def patterns(self) :
        return [self.pattern(i) for i in range(len(self.xs))]

    def boundary_at(self, x) :
        return [y for bx, y in self.boundaries if bx == x]


def region_map(f : Callable[[float, float], float], xs, ys, name="", x_name="x", y_name="y", tol=1e-8) -> RegionMap :
    """Evaluate the sign of f(x, y) on a grid, then refine the sign changes along y of each column by bisection """
    xs, ys = np.asarray(xs, dtype=float), np.asarray(ys, dtype=float)

    def column(x) :
        return [f(x, y) for y in ys]

    values = np.array(_parallel_map(column, xs))
    signs = np.vectorize(_sign)(values) if values.size else np.zeros(values.shape, dtype=int)

    boundaries = []
    for i, x in enumerate(xs) :
        for j in range(len(ys) - 1) :
            if signs[i, j] * signs[i, j + 1] < 0 :
                y = bisect(lambda y_ : f(x, y_), ys[j], ys[j + 1], xtol=tol)
                boundaries.append((float(x), float(y)))

    return RegionMap(name, x_name, y_name, xs, ys, signs, boundaries)


def _interior(lo, hi, n) :
    return np.linspace(lo, hi, n + 2)[1:-1]


def software_slope_fn(base: ModelParams) :
    """∂s^ro/∂ε' as a function of (r, ε'), from the specialized closed form """
    def slope(r, eps) :
        params = base.with_values(share_r=r, epsilon_prime=eps)
        return numeric_partial("s", RO, params, "epsilon_prime").richardson
    return slope


def software_region_map(base: ModelParams=SOLVED_BENCHMARK, r_values=None, eps_values=None, resolution=101) -> RegionMap :
    """Sign of ∂s^ro/∂ε' over (r, ε'). Default grid : r in (0, 1), ε' in (1, ε1) """
    r_values = _interior(0, 1, resolution) if r_values is None else r_values
    eps_values = _interior(1, EPS1, resolution) if eps_values is None else eps_values
    return region_map(software_slope_fn(base), r_values, eps_values, name="ds_ro/deps", x_name="r", y_name="epsilon_prime")


# -- Thresholds

@dataclass
class ThresholdSet :
    """Boundary constants of the propositions, and sampled boundary curves as (input, crossing) pairs """
    eps_1: float
    eps_2: float
    r_n1: Optional[float] = None
    r_n2: Optional[float] = None
    r_n3: Optional[float] = None
    r_n4: Optional[float] = None
    r_o1: Optional[float] = None
    r_o2: Optional[float] = None
    r_s1: Optional[float] = None
    r_s2: Optional[float] = None
    curves: Dict[str, List[Tuple[float, float]]] = field(default_factory=dict)

    def constants(self) -> Dict[str, float]:
        return {name : getattr(self, name) for name in (
            "eps_1", "eps_2", "r_n1", "r_n2", "r_n3", "r_n4", "r_o1", "r_o2", "r_s1", "r_s2")}


def _first_crossing(f, bracket, resolution, name) :
    crossings = threshold_scan(f, bracket, resolution)
    if not crossings :
        debug("No crossing found for %s in %s" % (name, bracket))
        return None
    return crossings[0].at


def _rational_gaps(base: ModelParams, method) :
    """Manufacturer and platform profit gaps (usage based minus revenue sharing), as functions of (λ, r) """
    un_cache = dict()

    def gap(quantity, lam, r) :
        if not lam in un_cache :
            un_cache[lam] = solve(UN, base.with_values(lambda_=lam), method, STATICS_OPTIONS)
        rn = solve(RN, base.with_values(lambda_=lam, share_r=r), method, STATICS_OPTIONS)
        return un_cache[lam].quantity(quantity) - rn.quantity(quantity)

    return (lambda lam, r : gap("pi_m", lam, r)), (lambda lam, r : gap("pi_p", lam, r))


def discover_thresholds(
        base: ModelParams=SOLVED_BENCHMARK,
        resolution=21,
        curve_points=5,
        families=("rn", "ro", "rs"),
        method=Method.ORACLE) -> ThresholdSet :
    """Locate the share thresholds by scanning r at the edges of the λ or ε' ranges, then sample the boundary curves
    inside each band.

    Parameters
    ----------
    resolution : Number of scan points in r, before bisection
    curve_points : Number of r values sampled per boundary curve
    families : 'rn' for the rational profit thresholds (computed with *method*), 'ro' for the software response
        thresholds, 'rs' for the software gap thresholds
    """
    res = ThresholdSet(eps_1=EPS1, eps_2=eps2_bound(base.theta, base.lambda_))
    r_bracket = (0.01, 0.99)
    eps_range = (1 + EDGE, EPS1 - EDGE)

    if "rn" in families :
        gap_m, gap_p = _rational_gaps(base, method)
        res.r_n1 = _first_crossing(lambda r : gap_m(1 - EDGE, r), r_bracket, resolution, "r_n1")
        res.r_n2 = _first_crossing(lambda r : gap_m(EDGE, r), r_bracket, resolution, "r_n2")
        res.r_n3 = _first_crossing(lambda r : gap_p(EDGE, r), r_bracket, resolution, "r_n3")
        res.r_n4 = _first_crossing(lambda r : gap_p(1 - EDGE, r), r_bracket, resolution, "r_n4")

        for name, gap, lo, hi in (("lambda_1_of_rn", gap_m, res.r_n1, res.r_n2), ("lambda_2_of_rn", gap_p, res.r_n3, res.r_n4)) :
            if lo is None or hi is None :
                continue
            res.curves[name] = [
                (float(r), crossing.at)
                for r in _interior(min(lo, hi), max(lo, hi), curve_points)
                for crossing in threshold_scan(lambda lam : gap(lam, r), (EDGE, 1 - EDGE), 101)]

    if "ro" in families :
        slope = software_slope_fn(base)
        res.r_o1 = _first_crossing(lambda r : slope(r, eps_range[0]), r_bracket, resolution, "r_o1")
        res.r_o2 = _first_crossing(lambda r : slope(r, eps_range[1]), r_bracket, resolution, "r_o2")
        if res.r_o1 is not None and res.r_o2 is not None :
            res.curves["eps_of_ro"] = [
                (float(r), crossing.at)
                for r in _interior(res.r_o1, res.r_o2, curve_points)
                for crossing in threshold_scan(lambda eps : slope(r, eps), eps_range, 101)]

    if "rs" in families :
        gap_s = quantity_difference("s", RO, RO, second_values=dict(epsilon_prime=1.0))
        res.r_s1 = _first_crossing(along(lambda params : gap_s(params.with_values(epsilon_prime=eps_range[0])), base, "share_r"),
                                   r_bracket, resolution, "r_s1")
        res.r_s2 = _first_crossing(along(lambda params : gap_s(params.with_values(epsilon_prime=eps_range[1])), base, "share_r"),
                                   r_bracket, resolution, "r_s2")
    return res


# -- Proposition suites

@dataclass
class ClaimResult :
    claim: str
    checked: int = 0
    violations: List[Dict[str, float]] = field(default_factory=list)
    unstable: List[Dict[str, float]] = field(default_factory=list)

    ledgered: bool = False
    """ The claim relies on a printed value listed as a known discrepancy """

    def record(self, point, ok) :
        self.checked += 1
        if not ok :
            self.violations.append(point)

    @property
    def passed(self) :
        return self.checked - len(self.violations)

    @property
    def inconclusive(self) :
        """Every point of the claim was too unstable to be checked """
        return self.checked == 0 and len(self.unstable) > 0


@dataclass
class PropositionGrid :
    """Grid of a proposition suite. Unset axes use the default range of each proposition """
    base: ModelParams = SOLVED_BENCHMARK
    resolution: int = 20
    """ Points per axis """
    scan_resolution: int = 101
    """ Points of crossing scans, before bisection """
    lambda_values: Optional[Sequence[float]] = None
    mu_values: Optional[Sequence[float]] = None
    eps_values: Optional[Sequence[float]] = None
    r_values: Optional[Sequence[float]] = None
    profit_view: str = ProfitView.PERCEIVED
    method: Optional[str] = None
    """ Evaluator of Propositions 1 and 2. Default : oracle """

    def describe(self) :
        res = "base=(%s), resolution=%d" % (_fmt_point(self.base.values()), self.resolution)
        for name in ("lambda_values", "mu_values", "eps_values", "r_values") :
            values = getattr(self, name)
            if values is not None :
                res += ", %s=[%s]" % (name, ", ".join("%g" % val for val in values))
        return res


@dataclass
class PropositionReport :
    proposition: int
    grid: str
    claims: List[ClaimResult]
    out_of_domain: List[Dict[str, float]] = field(default_factory=list)

    @property
    def verdict(self) :
        failing = [claim for claim in self.claims if claim.violations]
        if not failing :
            if any(claim.inconclusive for claim in self.claims) :
                return SuiteVerdict.MIXED
            return SuiteVerdict.CONFIRMED
        if len(failing) == len(self.claims) :
            return SuiteVerdict.VIOLATED
        return SuiteVerdict.MIXED

    @property
    def acceptable(self) :
        """Confirmed, or violated only by claims relying on known discrepancies """
        return all(claim.ledgered or not claim.violations for claim in self.claims)


class _Claims(dict) :
    """Claims by key, in insertion order """

    def add(self, key, text, ledgered=False) :
        self[key] = ClaimResult(text, ledgered=ledgered)

    def check(self, key, point, ok) :
        self[key].record(point, ok)

    def estimate(self, key, point, estimate: PartialEstimate, expected_sign) :
        if estimate.unstable :
            self[key].unstable.append(point)
        else :
            self[key].record(point, estimate.sign == expected_sign)


def _is_ledgered(method, sc: Scenario, quantity) :
    return method == Method.CLOSED and (sc.code, quantity) in KNOWN_DISCREPANCIES


def _proposition_1(grid: PropositionGrid) :
    """Rational equilibria increase with the share λ of privacy insensitive customers """
    method = grid.method or Method.ORACLE
    base = grid.base
    lambdas = _interior(0, 1, grid.resolution) if grid.lambda_values is None else grid.lambda_values
    mus = _interior(2 * base.theta, min(MU_BOUND_USAGE, MU_BOUND_REVENUE), grid.resolution) \
        if grid.mu_values is None else grid.mu_values

    quantities = dict(
        un=["p", "w", "h", "s", "pi_m", "pi_p"],
        rn=["p", "h", "s", "pi_m", "pi_p"])

    claims = _Claims()
    for sc in (UN, RN) :
        for qty in quantities[sc.code] :
            claims.add((sc.code, qty), "d%s/dlambda > 0 (%s)" % (qty, sc.code), _is_ledgered(method, sc, qty))

    def evaluate(point) :
        params = base.unchecked(**{**base.values(), **point})
        res = []
        for sc in (UN, RN) :
            if domain_check(params, sc) :
                res.append((sc, None))
                continue
            res.append((sc, numeric_partials(quantities[sc.code], sc, params, "lambda_", method=method)))
        return res

    points = [dict(lambda_=lam, mu=mu) for lam, mu in product(lambdas, mus)]
    out_of_domain = []
    for point, results in zip(points, _parallel_map(evaluate, points)) :
        for sc, partials in results :
            if partials is None :
                out_of_domain.append({**point, "scenario" : sc.code})
                continue
            for qty, estimate in partials.items() :
                claims.estimate((sc.code, qty), point, estimate, 1)

    return PropositionReport(1, grid.describe(), list(claims.values()), out_of_domain)


def _proposition_2(grid: PropositionGrid) :
    """Preferred contract of each party as the share r and λ vary """
    method = grid.method or Method.ORACLE
    base = grid.base
    r_values = np.linspace(0.05, 0.95, 19) if grid.r_values is None else grid.r_values
    bracket = (EDGE, 1 - EDGE)
    gap_m, gap_p = _rational_gaps(base, method)

    claims = _Claims()
    claims.add("pi_m", "pi_m^un - pi_m^rn changes sign at most once along lambda, from + to -")
    claims.add("pi_p", "pi_p^un - pi_p^rn changes sign at most once along lambda, from + to -")

    for r in r_values :
        point = dict(share_r=float(r))
        claims.check("pi_m", point, _single_downward(threshold_scan(lambda lam : gap_m(lam, r), bracket, grid.scan_resolution)))
        claims.check("pi_p", point, _single_downward(threshold_scan(lambda lam : gap_p(lam, r), bracket, grid.scan_resolution)))

    if base == SOLVED_BENCHMARK :
        claims.add("r=0.2", "pi_m^un > pi_m^rn for every lambda at r=0.2")
        crossings = threshold_scan(lambda lam : gap_m(lam, 0.2), bracket, grid.scan_resolution)
        claims.check("r=0.2", dict(share_r=0.2), not crossings and gap_m(0.5, 0.2) > 0)

        claims.add("r=0.3", "single crossing of pi_m^un - pi_m^rn at r=0.3 matches the degree 8 polynomial root")
        crossings = threshold_scan(lambda lam : gap_m(lam, 0.3), bracket, grid.scan_resolution)
        claims.check("r=0.3", dict(share_r=0.3), len(crossings) == 1 and abs(crossings[0].at - poly_root(FIG3_POLY)) < 1e-3)

    return PropositionReport(2, grid.describe(), list(claims.values()))


def _eps_axis(grid: PropositionGrid, upper) :
    return _interior(1, upper, grid.resolution) if grid.eps_values is None else grid.eps_values


def _proposition_3(grid: PropositionGrid) :
    """Usage based decisions react to overconfidence with the same signs, whatever λ """
    base = grid.base
    lambdas = np.round(np.arange(1, 10) / 10, 10) if grid.lambda_values is None else grid.lambda_values
    expected = dict(p=1, w=-1, h=1, s=-1)

    claims = _Claims()
    for qty, sign in expected.items() :
        claims.add(qty, "d%s^uo/deps %s 0" % (qty, ">" if sign > 0 else "<"))

    out_of_domain = []
    for lam in lambdas :
        upper = eps2_bound(base.theta, lam)
        for eps in _eps_axis(grid, upper) :
            point = dict(lambda_=float(lam), epsilon_prime=float(eps))
            if not 1 < eps < upper :
                out_of_domain.append(point)
                continue
            partials = numeric_partials(list(expected), UO, base.with_values(**point), "epsilon_prime")
            for qty, estimate in partials.items() :
                claims.estimate(qty, point, estimate, expected[qty])

    return PropositionReport(3, grid.describe(), list(claims.values()), out_of_domain)


def _proposition_4(grid: PropositionGrid) :
    """Revenue sharing decisions under overconfidence : price and hardware rise, software follows three cases in r """
    base = grid.base
    r_values = np.linspace(0.05, 0.95, 19) if grid.r_values is None else grid.r_values
    eps_values = _eps_axis(grid, EPS1)
    eps_range = (1 + EDGE, EPS1 - EDGE)
    slope = software_slope_fn(base)

    claims = _Claims()
    claims.add("p", "dp^ro/deps > 0")
    claims.add("h", "dh^ro/deps > 0")
    claims.add("s", "ds^ro/deps changes sign at most once along epsilon, from + to -")
    claims.add("cases", "sign patterns of ds^ro/deps follow '-', '+-', '+' as r increases")

    out_of_domain = []
    for r in r_values :
        for eps in eps_values :
            point = dict(share_r=float(r), epsilon_prime=float(eps))
            if not 1 < eps < EPS1 :
                out_of_domain.append(point)
                continue
            partials = numeric_partials(["p", "h"], RO, base.with_values(**point), "epsilon_prime")
            for qty, estimate in partials.items() :
                claims.estimate(qty, point, estimate, 1)

    regions = region_map(slope, r_values, np.linspace(*eps_range, grid.scan_resolution), "ds_ro/deps", "r", "epsilon_prime")
    order = ["-", "+-", "+"]
    ranks = []
    for r, pattern in zip(regions.xs, regions.patterns) :
        claims.check("s", dict(share_r=float(r)), pattern in order)
        ranks.append(order.index(pattern) if pattern in order else -1)
    claims.check("cases", dict(), all(rank >= 0 for rank in ranks) and ranks == sorted(ranks))

    if base == SOLVED_BENCHMARK :
        claims.add("r=0.15", "ds^ro/deps changes sign at r=0.15 at the degree 6 polynomial root")
        crossings = threshold_scan(lambda eps : slope(0.15, eps), eps_range, grid.scan_resolution)
        claims.check("r=0.15", dict(share_r=0.15), len(crossings) == 1 and abs(crossings[0].at - poly_root(PROP4_POLY)) < 1e-3)

    return PropositionReport(4, grid.describe(), list(claims.values()), out_of_domain)


def _ordering_claims(claims: _Claims, sc: Scenario, point, params: ModelParams, expected: Dict[str, int], profit_view) :
    """Compare the overconfident scenario against its rational baseline (same form, epsilon_prime=1) """
    biased = solve(sc, params, Method.CLOSED)
    rational = solve(sc, params.with_values(epsilon_prime=1.0), Method.CLOSED)
    for qty, sign in expected.items() :
        diff = biased.quantity(qty, profit_view) - rational.quantity(qty, profit_view)
        claims.check(qty, point, _sign(diff) == sign)


def _proposition_5(grid: PropositionGrid) :
    """Usage based contract : overconfidence raises hardware innovation and both profits, lowers software innovation """
    base = grid.base
    upper = eps2_bound(base.theta, base.lambda_)
    expected = dict(h=1, s=-1, pi_m=1, pi_p=1)

    claims = _Claims()
    for qty, sign in expected.items() :
        claims.add(qty, "%s^uo %s %s^un (%s)" % (qty, ">" if sign > 0 else "<", qty, grid.profit_view) if qty == "pi_m"
                   else "%s^uo %s %s^un" % (qty, ">" if sign > 0 else "<", qty))

    out_of_domain = []
    for eps in _eps_axis(grid, upper) :
        point = dict(epsilon_prime=float(eps))
        if not 1 < eps < upper :
            out_of_domain.append(point)
            continue
        _ordering_claims(claims, UO, point, base.with_values(**point), expected, grid.profit_view)

    return PropositionReport(5, grid.describe(), list(claims.values()), out_of_domain)


def _proposition_6(grid: PropositionGrid) :
    """Revenue sharing contract : overconfidence is a Pareto improvement, software innovation follows three cases """
    base = grid.base
    r_values = np.linspace(0.05, 0.95, 19) if grid.r_values is None else grid.r_values
    eps_range = (1 + EDGE, EPS1 - EDGE)
    expected = dict(h=1, pi_m=1, pi_p=1)

    claims = _Claims()
    for qty in expected :
        claims.add(qty, "%s^ro > %s^rn%s" % (qty, qty, " (%s)" % grid.profit_view if qty == "pi_m" else ""))
    claims.add("s", "s^ro - s^rn changes sign at most once along epsilon, from + to -")

    gap_s = quantity_difference("s", RO, RO, second_values=dict(epsilon_prime=1.0))

    out_of_domain = []
    for r in r_values :
        for eps in _eps_axis(grid, EPS1) :
            point = dict(share_r=float(r), epsilon_prime=float(eps))
            if not 1 < eps < EPS1 :
                out_of_domain.append(point)
                continue
            _ordering_claims(claims, RO, point, base.with_values(**point), expected, grid.profit_view)

        crossings = threshold_scan(along(gap_s, base.with_values(share_r=r), "epsilon_prime"), eps_range, grid.scan_resolution)
        claims.check("s", dict(share_r=float(r)), _single_downward(crossings))

    if base == SOLVED_BENCHMARK :
        claims.add("r=0.125", "s^ro - s^rn changes sign at r=0.125 at the cubic polynomial root")
        crossings = threshold_scan(along(gap_s, base.with_values(share_r=0.125), "epsilon_prime"), eps_range, grid.scan_resolution)
        claims.check("r=0.125", dict(share_r=0.125), len(crossings) == 1 and abs(crossings[0].at - poly_root(PROP6_POLY)) < 1e-3)

    return PropositionReport(6, grid.describe(), list(claims.values()), out_of_domain)


_SUITES = {1 : _proposition_1, 2 : _proposition_2, 3 : _proposition_3, 4 : _proposition_4, 5 : _proposition_5, 6 : _proposition_6}


def proposition_suite(id, grid: PropositionGrid=None) -> PropositionReport :
    """Check every claim of a proposition over a grid. Failures are report content, not errors """
    if not id in _SUITES :
        raise Exception("Unknown proposition : %s. Expected one of %s" % (id, ", ".join(map(str, _SUITES))))
    grid = grid or PropositionGrid()
    report = _SUITES[id](grid)
    debug("Proposition %d : %s" % (id, report.verdict))
    return report


# -- Figures

FIGURES = (3, 4, 5)


def figure_data(id, points=101) -> pd.DataFrame :
    """Data of the figure curves, at the solved benchmark.

    3 : manufacturer profits of both rational contracts against λ, r=0.3 (oracle)
    4 : software innovation of the revenue sharing contract against ε', r in (0.3, 0.5, 0.7)
    5 : software innovation with and without overconfidence against ε', r in (0.1, 0.2, 0.3)
    """
    base = SOLVED_BENCHMARK
    if id == 3 :
        lambdas = _interior(0, 1, points)
        rows = []
        for lam in lambdas :
            params = base.with_values(lambda_=lam, share_r=0.3)
            rows.append(dict(
                **{"lambda" : lam},
                pi_m_un=solve(UN, params, Method.ORACLE, STATICS_OPTIONS).pi_m_perceived,
                pi_m_rn=solve(RN, params, Method.ORACLE, STATICS_OPTIONS).pi_m_perceived))
        return pd.DataFrame(rows)

    if id in (4, 5) :
        eps_values = _interior(1, EPS1, points)
        shares = (0.3, 0.5, 0.7) if id == 4 else (0.1, 0.2, 0.3)
        df = pd.DataFrame(dict(epsilon_prime=eps_values))
        for r in shares :
            if id == 5 :
                rational = solve(RO, base.with_values(share_r=r, epsilon_prime=1.0), Method.CLOSED).decisions.s
                df["s_rn_r%g" % r] = rational
            df["s_ro_r%g" % r] = [
                solve(RO, base.with_values(share_r=r, epsilon_prime=eps), Method.CLOSED).decisions.s for eps in eps_values]
        return df

    raise Exception("Unknown figure : %s. Expected one of %s" % (id, ", ".join(map(str, FIGURES))))
