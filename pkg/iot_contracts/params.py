from dataclasses import dataclass, replace, InitVar
from typing import Dict, List, Optional, Callable, Tuple

import numpy as np
from SALib.sample import latin
from sympy import Symbol
from tabulate import tabulate

from .base_utils import ParamValidationException, debug


class Contract:
    """Contract offered by the platform to the manufacturer"""

    USAGE_BASED = "usage"
    """ The platform sells its software service at a per unit fee *w* """

    REVENUE_SHARE = "revenue"
    """ Sale revenue is split : share *r* for the manufacturer, *1-r* for the platform """


class Rationality:
    """Belief of the manufacturer about consumer innovation sensitivity"""

    RATIONAL = "rational"
    """ Unbiased : mean sensitivity *mu* """

    OVERCONFIDENT = "overconfident"
    """ Upward biased : mean sensitivity *mu * epsilon_prime* """


class Viewpoint:
    """Which mean sensitivity drives the demand"""

    OBJECTIVE = "objective"
    """ True mean *mu*, used for realized profits and by the platform """

    PERCEIVED = "perceived"
    """ Manufacturer belief *mu * epsilon_prime* """


class Method:
    """How an equilibrium is obtained"""

    CLOSED = "closed"
    """ Printed closed form expressions """

    ORACLE = "oracle"
    """ Numerical backward induction """

    BOTH = "both"
    """ Both of them, reconciled """


class SolveMode:
    """Stage structure used by the oracle"""

    SEQUENTIAL = "sequential"
    """ Platform leads with (w, s), manufacturer follows with (p, h) """

    SIMULTANEOUS = "simultaneous"
    """ Platform posts w, then s and (p, h) are chosen simultaneously (Nash) """


class ProfitView:
    """Which manufacturer profit is compared in overconfidence comparisons"""

    PERCEIVED = "perceived"
    REALIZED = "realized"


@dataclass(frozen=True)
class Scenario :
    """Contract x rationality combination. Its code is one of 'un', 'rn', 'uo', 'ro' """

    contract: str
    rationality: str

    @property
    def usage_based(self) :
        return self.contract == Contract.USAGE_BASED

    @property
    def overconfident(self) :
        return self.rationality == Rationality.OVERCONFIDENT

    @property
    def code(self) :
        return ("u" if self.usage_based else "r") + ("o" if self.overconfident else "n")

    @staticmethod
    def from_code(code) :
        if not code in SCENARIOS :
            raise Exception("Unknown scenario '%s'. Expected one of %s" % (code, ", ".join(SCENARIOS)))
        return SCENARIOS[code]

    def rational(self) :
        """Same contract, rational manufacturer """
        return Scenario(self.contract, Rationality.RATIONAL)

    def __str__(self):
        return self.code


UN = Scenario(Contract.USAGE_BASED, Rationality.RATIONAL)
RN = Scenario(Contract.REVENUE_SHARE, Rationality.RATIONAL)
UO = Scenario(Contract.USAGE_BASED, Rationality.OVERCONFIDENT)
RO = Scenario(Contract.REVENUE_SHARE, Rationality.OVERCONFIDENT)

SCENARIOS = dict(un=UN, rn=RN, uo=UO, ro=RO)


class ParamDef(Symbol):
    '''Definition of an exogenous parameter of the game : name, default value, sampling range and description.

    This class inherits sympy Symbol, so that parameters are used directly in the profit and closed form expressions.
    *min* / *max* define the sampling range used by **rand()**, not the validity bounds
    (those are checked by **ModelParams**).
    '''

    def __new__(cls, name, *args, **kwargs):
        return Symbol.__new__(cls, name, real=True)

    def __init__(self, name, default=None, min=None, max=None, label=None, description="", key=None):
        self.name = name
        self.default = default
        self.min = min
        self.max = max
        self.label = label or name
        self.description = description

        # Name used in CSV and on the command line
        self.key = key or name

    def rand(self, alpha, min=None, max=None):
        """Transforms a random number between 0 and 1 into a value of the sampling range, or of the given one"""
        min = self.min if min is None else min
        max = self.max if max is None else max
        if min is None or max is None :
            raise Exception("Missing min/max for : " + self.name)
        return min + alpha * (max - min)


alpha = ParamDef("alpha", 1.0, min=0.5, max=1.5, label="α",
                 description="Compatibility of hardware and software")
q = ParamDef("q", 0.5, min=0.5, max=2.0,
             description="Base product quality")
k = ParamDef("k", 0.5, min=0.5, max=1.5,
             description="Innovation cost coefficient (cost = k x level²)")
theta = ParamDef("theta", 0.4, min=0.0, max=0.6, label="θ",
                 description="Marginal data benefit of the platform per unit of software innovation and insensitive demand")
lambda_ = ParamDef("lambda_", 0.5, min=0.0, max=1.0, label="λ", key="lambda",
                   description="Proportion of non privacy sensitive customers")
mu = ParamDef("mu", 1.0, min=0.2, max=1.2, label="μ",
              description="Mean of the innovation sensitivity β")
epsilon_prime = ParamDef("epsilon_prime", 1.0, min=1.0, max=1.5, label="ε'",
                         description="Normalized overconfidence level (1 = rational)")
share_r = ParamDef("share_r", 0.3, min=0.05, max=0.95, label="r", key="r",
                   description="Manufacturer revenue share under the revenue sharing contract")

# Symbols of the exogenous parameters, in CSV order
PARAM_DEFS = [alpha, q, k, theta, lambda_, mu, epsilon_prime, share_r]

# Key (CSV / command line) -> field of ModelParams
PARAM_KEYS = {param.key : param.name for param in PARAM_DEFS}
PARAM_KEYS.update(
    sigma2="sigma2",
    beta_hat="beta_hat",
    epsilon="epsilon_prime",
    lam="lambda_")


def _field_name(key) :
    if key in PARAM_KEYS :
        return PARAM_KEYS[key]
    if key in PARAM_KEYS.values() :
        return key
    raise Exception("Parameter not found : '%s'. Expected one of %s" % (key, ", ".join(PARAM_KEYS)))


@dataclass(frozen=True)
class ModelParams :
    """All exogenous values of the game, validated at construction.

    *sigma2* and *beta_hat* describe the distribution of β. They are recorded only : closed forms
    depend on the mean *mu*. They default to the uniform distribution on (0, 2 mu).
    """

    alpha: float = 1.0
    q: float = 0.5
    k: float = 0.5
    theta: float = 0.4
    lambda_: float = 0.5
    mu: float = 1.0
    epsilon_prime: float = 1.0
    share_r: float = 0.3
    sigma2: Optional[float] = None
    beta_hat: Optional[float] = None
    check: InitVar[bool] = True

    def __post_init__(self, check):
        if check :
            violations = self.violations()
            if violations :
                raise ParamValidationException(violations)

    @classmethod
    def unchecked(cls, **values):
        """Build without validation, for domain checks and probes outside the bounds """
        return cls(**{_field_name(key) : val for key, val in values.items()}, check=False)

    def violations(self) -> List[str]:
        """List of all broken bounds. Empty if valid """
        res = []
        if not self.alpha > 0 :
            res.append("alpha=%g breaks alpha > 0" % self.alpha)
        if not self.q > 0 :
            res.append("q=%g breaks q > 0" % self.q)
        if not self.k > 0 :
            res.append("k=%g breaks k > 0" % self.k)
        if not self.mu > 0 :
            res.append("mu=%g breaks mu > 0" % self.mu)
        if not self.theta >= 0 :
            res.append("theta=%g breaks theta >= 0" % self.theta)
        if not self.theta <= self.mu / 2 :
            res.append("theta=%g breaks theta <= mu/2 (%g)" % (self.theta, self.mu / 2))
        if not 0 <= self.lambda_ <= 1 :
            res.append("lambda=%g breaks 0 <= lambda <= 1" % self.lambda_)
        if not 0 < self.share_r < 1 :
            res.append("r=%g breaks 0 < r < 1" % self.share_r)
        if not self.epsilon_prime >= 1 :
            res.append("epsilon_prime=%g breaks epsilon_prime >= 1" % self.epsilon_prime)
        if self.sigma2 is not None and not self.sigma2 >= 0 :
            res.append("sigma2=%g breaks sigma2 >= 0" % self.sigma2)
        if self.beta_hat is not None and not self.beta_hat > self.mu :
            res.append("beta_hat=%g breaks beta_hat > mu (%g)" % (self.beta_hat, self.mu))
        return res

    def with_values(self, **values) :
        """Copy with some values replaced. Accepts CSV keys ('lambda', 'r') as well as field names """
        return replace(self, check=True, **{_field_name(key) : val for key, val in values.items()})

    def values(self) -> Dict[str, float]:
        """Values of the parameter symbols, by symbol name """
        return {param.name : getattr(self, param.name) for param in PARAM_DEFS}

    def get(self, key) :
        return getattr(self, _field_name(key))

    @property
    def support_upper(self) :
        """Upper bound of the support of β """
        return self.beta_hat if self.beta_hat is not None else 2 * self.mu

    @property
    def variance(self) :
        return self.sigma2 if self.sigma2 is not None else self.support_upper ** 2 / 12

    def sensitivity(self, viewpoint, scenario: Scenario=None) :
        """Mean innovation sensitivity seen from a viewpoint.
        Rational scenarios ignore epsilon_prime."""
        if viewpoint == Viewpoint.OBJECTIVE :
            return self.mu
        if viewpoint != Viewpoint.PERCEIVED :
            raise Exception("Unknown viewpoint : %s" % viewpoint)
        if scenario is not None and not scenario.overconfident :
            return self.mu
        return self.mu * self.epsilon_prime


BENCHMARK = ModelParams()
""" Benchmark point : α=1, q=0.5, k=0.5, θ=0.4, λ=0.5, μ=1, ε'=1, r=0.3 """

SOLVED_BENCHMARK = ModelParams(q=2.0)
""" Same point with q=2 (kq=1) : the point at which the specialized closed forms solve the stage problems """


@dataclass(frozen=True)
class Decisions :
    """Choice vector of one scenario. *w* is None under revenue sharing """

    p: float = 0.0
    w: Optional[float] = None
    h: float = 0.0
    s: float = 0.0

    def values(self) -> Dict[str, float]:
        res = dict(p=self.p, h=self.h, s=self.s)
        if self.w is not None :
            res["w"] = self.w
        return res


def list_parameters():
    """ Table of the exogenous parameters, with their default values and sampling range """
    rows = [[param.key, param.label, param.default, param.min, param.max, param.description] for param in PARAM_DEFS]
    return tabulate(rows, headers=["key", "symbol", "default", "min", "max", "description"])


def random_params(
        n,
        seed=0,
        bounds: Dict[str, Tuple[float, float]]=None,
        base: ModelParams=BENCHMARK,
        accept: Callable[[ModelParams], bool]=None,
        max_rounds=50) -> List[ModelParams]:
    """ Draw N valid parameter points with latin hypercube sampling.

    Parameters
    ----------
    n : Number of points
    seed : Seed of the first sampling round. Each extra round uses seed + round
    bounds : Dict of key -> (min, max), or None for the sampling range of the parameter.
        Defaults to the sampling range of all parameter definitions
    base : Values of the parameters not sampled
    accept : Optional predicate. Points failing it are rejected, like invalid points
    """
    if bounds is None :
        bounds = {param.name : None for param in PARAM_DEFS}
    defs = {param.name : param for param in PARAM_DEFS}
    names = [_field_name(key) for key in bounds]
    for name in names :
        if not name in defs :
            raise Exception("Cannot sample '%s' : not a parameter definition" % name)
    ranges = [bound or (None, None) for bound in bounds.values()]

    problem = {
        'num_vars': len(names),
        'names': names,
        'bounds': [[0, 1]] * len(names)}

    res = []
    for round in range(max_rounds) :
        X = latin.sample(problem, n, seed=seed + round)
        for row in X :
            values = {name : defs[name].rand(alpha_, lo, hi) for name, (lo, hi), alpha_ in zip(names, ranges, row)}
            params = replace(base, **values, check=False)
            if params.violations() :
                continue
            if accept is not None and not accept(params) :
                continue
            res.append(params)
            if len(res) == n :
                debug("%d points drawn in %d rounds" % (n, round + 1))
                return res

    raise Exception("Only %d valid parameter points out of %d requested after %d rounds" % (len(res), n, max_rounds))
