from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, Union

import numpy as np
from scipy.stats import qmc, uniform
from sympy import Symbol, lambdify, sympify

from .base_utils import MissingSoftwareFeeException
from .params import *

# Decision variables
p, w, h, s = [Symbol(name, real=True) for name in ("p", "w", "h", "s")]

# Mean sensitivity driving the demand : mu, or mu * epsilon_prime for an overconfident belief
m = Symbol("m", positive=True)

ValueOrArray = Union[float, np.ndarray]


class CompiledExpr :
    """
    Sympy expression compiled into a numpy function, together with the names of the symbols it requires.
    Extra values passed to compute() are ignored.
    """

    def __init__(self, expr):
        self.expr = sympify(expr)
        self.symbols = sorted(self.expr.free_symbols, key=str)
        self.params = [str(sym) for sym in self.symbols]
        self.lambd = lambdify(self.symbols, self.expr, 'numpy')

    def compute(self, values : Dict[str, ValueOrArray]) :
        """Compute result value based of input parameters """
        args = []
        for name in self.params :
            if not name in values :
                raise Exception("Parameter not found : %s. Required : %s" % (name, ", ".join(self.params)))
            args.append(values[name])
        return self.lambd(*args)

    def __repr__(self):
        return repr(self.expr)


def demand_exprs(sensitivity=m) :
    """Expected demands of the insensitive segment, the sensitive segment and in total,
    for a given mean sensitivity """
    e_d_i = lambda_ * (1 - (p - sensitivity * (h + alpha * s)) / q)
    e_d_s = (1 - lambda_) * (1 - (p - sensitivity * h) / q)
    e_d_t = (q - p + sensitivity * (h + alpha * lambda_ * s)) / q
    return e_d_i, e_d_s, e_d_t


def threshold_exprs(sensitivity=m) :
    """Valuation thresholds (as a share of q) above which each segment purchases """
    gamma_i = (p - sensitivity * (h + alpha * s)) / q
    gamma_s = (p - sensitivity * h) / q
    return gamma_i, gamma_s


def manufacturer_profit_expr(contract, sensitivity=m) :
    _, _, e_d_t = demand_exprs(sensitivity)
    if contract == Contract.USAGE_BASED :
        revenue = (p - w) * e_d_t
    else :
        revenue = share_r * p * e_d_t
    return revenue - k * h ** 2


def platform_profit_expr(contract, sensitivity=mu) :
    """The platform forms its expectations with the true mean sensitivity """
    e_d_i, _, e_d_t = demand_exprs(sensitivity)
    if contract == Contract.USAGE_BASED :
        revenue = w * e_d_t
    else :
        revenue = (1 - share_r) * p * e_d_t
    return revenue - k * s ** 2 + theta * s * e_d_i


@lru_cache()
def _compiled(name, contract=None) :
    if name == "demands" :
        return [CompiledExpr(expr) for expr in demand_exprs()]
    if name == "thresholds" :
        return [CompiledExpr(expr) for expr in threshold_exprs()]
    if name == "manufacturer" :
        return CompiledExpr(manufacturer_profit_expr(contract))
    if name == "platform" :
        return CompiledExpr(platform_profit_expr(contract))
    if name == "platform_sampled" :
        return CompiledExpr(platform_profit_expr(contract, m))
    raise Exception("Unknown expression : %s" % name)


def _values(params: ModelParams, d: Decisions, sensitivity, scenario: Scenario=None) :
    if scenario is not None and scenario.usage_based and d.w is None :
        raise MissingSoftwareFeeException("Scenario '%s' requires a software fee w" % scenario.code)
    return {**params.values(), **d.values(), m.name : sensitivity}


def _is_feasible(gamma_i, gamma_s) :
    res = np.logical_and.reduce([gamma_i > 0, gamma_i < 1, gamma_s > 0, gamma_s < 1])
    return bool(res) if np.ndim(res) == 0 else res


@dataclass
class DemandBundle :
    """Expected demands and purchase thresholds at a decision vector """
    e_d_i: float
    e_d_s: float
    e_d_t: float
    gamma_i: float
    gamma_s: float
    feasible: bool


def expected_demands(params: ModelParams, d: Decisions, viewpoint=Viewpoint.OBJECTIVE) -> DemandBundle:
    """Expected demands of both segments. The perceived viewpoint uses mu * epsilon_prime as mean sensitivity.
    A point with thresholds outside (0, 1) is returned with feasible=False """
    values = _values(params, d, params.sensitivity(viewpoint))
    e_d_i, e_d_s, e_d_t = [expr.compute(values) for expr in _compiled("demands")]
    gamma_i, gamma_s = [expr.compute(values) for expr in _compiled("thresholds")]
    return DemandBundle(
        e_d_i=e_d_i, e_d_s=e_d_s, e_d_t=e_d_t,
        gamma_i=gamma_i, gamma_s=gamma_s,
        feasible=_is_feasible(gamma_i, gamma_s))


def purchase_thresholds(params: ModelParams, d: Decisions, viewpoint=Viewpoint.OBJECTIVE) :
    """Returns (gamma_i, gamma_s, feasible) """
    bundle = expected_demands(params, d, viewpoint)
    return bundle.gamma_i, bundle.gamma_s, bundle.feasible


def manufacturer_profit(sc: Scenario, params: ModelParams, d: Decisions, viewpoint=None) :
    """Expected manufacturer profit. Default viewpoint is the manufacturer's own one :
    perceived for overconfident scenarios, objective otherwise (both are equal for rational ones)"""
    if viewpoint is None :
        viewpoint = Viewpoint.PERCEIVED
    values = _values(params, d, params.sensitivity(viewpoint, sc), sc)
    return _compiled("manufacturer", sc.contract).compute(values)


def platform_profit(sc: Scenario, params: ModelParams, d: Decisions) :
    """Expected platform profit, always with the true mean sensitivity """
    values = _values(params, d, params.mu, sc)
    return _compiled("platform", sc.contract).compute(values)


def supply_chain_profit(sc: Scenario, params: ModelParams, d: Decisions) :
    """Realized manufacturer profit plus platform profit """
    return manufacturer_profit(sc, params, d, Viewpoint.OBJECTIVE) + platform_profit(sc, params, d)


def monte_carlo_profit(
        sc: Scenario,
        params: ModelParams,
        d: Decisions,
        party="manufacturer",
        viewpoint=None,
        n=100000,
        seed=0) :
    """Estimate an expected profit by sampling β uniformly on (0, beta_hat), with latin hypercube sampling.
    Profits being affine in β, the estimate converges to the closed expectation.

    Returns (mean, standard error)
    """
    u = qmc.LatinHypercube(d=1, seed=seed).random(n)[:, 0]
    betas = uniform(loc=0, scale=params.support_upper).ppf(u)

    if party == "manufacturer" :
        if viewpoint is None :
            viewpoint = Viewpoint.PERCEIVED
        if viewpoint == Viewpoint.PERCEIVED and sc.overconfident :
            betas = betas * params.epsilon_prime
        expr = _compiled("manufacturer", sc.contract)
    elif party == "platform" :
        expr = _compiled("platform_sampled", sc.contract)
    else :
        raise Exception("Unknown party : %s. Expected 'manufacturer' or 'platform'" % party)

    samples = np.broadcast_to(expr.compute(_values(params, d, betas, sc)), betas.shape)
    return float(np.mean(samples)), float(np.std(samples, ddof=1) / np.sqrt(n))
