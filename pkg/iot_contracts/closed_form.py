"""
Printed closed form equilibria of the four scenarios, transcribed as published, with their validity domains.

Lemma 1 and Lemma 2 give the rational equilibria for general parameters. The overconfident forms are
specialized at α=1, k=0.5, μ=1, and solve the stage problems exactly when kq=1 (q=2).
Known deviations from backward induction are listed in KNOWN_DISCREPANCIES and surface in reconciliation.
"""
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, List, Optional

import numpy as np

from .base_utils import DomainViolationException, SpecializationException, debug
from .roots import PolySpec, poly_root
from .stages import *

# Short names for the printed expressions
a, th, lam, eps, r = alpha, theta, lambda_, epsilon_prime, share_r


# -- Lemma 1 : usage based, rational

A_EXPR = a * th * (lam - 1) * lam * mu
B_EXPR = k * q * (8 * k * q - th ** 2 * lam ** 2 + 2 * a * th * (4 - 3 * lam) * lam * mu + (2 + a ** 2 * lam ** 2) * mu ** 2)
LEMMA1_DEN = -2 * mu ** 2 * A_EXPR + B_EXPR

_A, _den = A_EXPR, LEMMA1_DEN

LEMMA1 = dict(
    p=q * (6 * k ** 2 * q ** 2 - _A * mu ** 2 - k * q * (th ** 2 * lam ** 2 + mu ** 2 + a * th * lam * mu - 5 * _A)) / _den,
    w=q * (4 * k ** 2 * q ** 2 - _A * mu ** 2 - k * q * (th ** 2 * lam ** 2 + mu ** 2 + a * th * lam * mu - 3 * _A)) / _den,
    h=q * mu * (k * q + _A) / _den,
    s=k * q ** 2 * lam * (th + a * mu) / _den,
    pi_m=k * q ** 2 * (k * q + _A) ** 2 * (4 * k * q - mu ** 2) / _den ** 2,
    pi_p=q * mu * (k * q + _A) / _den)


# -- Lemma 2 : revenue sharing, rational

C_EXPR = 16 * k ** 3 * q ** 3 + r ** 2 * a * th * (1 - lam) * lam * mu ** 5 \
    + k * q * r * mu ** 3 * (2 * a * th * (4 - 3 * lam) * lam + r * mu) \
    - 4 * k ** 2 * q ** 2 * mu * (2 * r * mu + a * lam * (2 * th * (2 - lam) + (1 - r) * a * lam * mu))

D_EXPR = 4 * k ** 2 * q ** 2 + r * a * th * (1 - lam) * lam * mu ** 3 \
    - k * q * mu * (a * th * (4 - 3 * lam) * lam + r * mu)

_C, _D = C_EXPR, D_EXPR

LEMMA2 = dict(
    p=2 * k * q ** 2 * _D / _C,
    h=q * r * mu * _D / _C,
    s=k * q ** 2 * lam * (4 * k * q * (th + (1 - r) * a * mu) - r * th * mu ** 2) / _C,
    pi_m=k * q ** 2 * r * (r * mu ** 2 - 4 * k * q) * _D ** 2 / _C ** 2,
    pi_p=k ** 2 * q ** 3 * (4 * k * q * (1 - r) + th * lam * (th * lam + 4 * (1 - r) * a * (lam - 1) * mu)) / _C)


# -- Usage based, overconfident. Specialized at α=1, k=0.5, μ=1

USAGE_OVERCONFIDENT_DEN = -4 * (1 + eps) * (2 + eps) + 4 * (1 + eps) * (2 + eps) * th * lam \
    + (4 + (1 + eps) ** 2 * (-4 + th) * th) * lam ** 2

_du = USAGE_OVERCONFIDENT_DEN
_hu = 2 * (1 + eps) - 2 * (1 + eps) * th * lam + (-2 + th + eps * (2 + (2 + eps) * th)) * lam ** 2

USAGE_OVERCONFIDENT = dict(
    p=(-4 * (1 + eps) * (-6 + eps ** 2) + 4 * (1 + eps) * (-6 + eps ** 2) * th * lam
       + 2 * (4 * (-1 + eps) - 2 * (-3 + eps) * (1 + eps) ** 2 * th + (-2 + eps) * (1 + eps) ** 2 * th ** 2) * lam ** 2)
      / ((-2 + eps) * _du),
    w=2 * (1 + eps) * (-2 * (2 + eps) + 2 * (2 + eps) * th * lam + (1 + eps) * (-2 + th) * th * lam ** 2) / _du,
    h=2 * eps * _hu / ((-2 + eps) * _du),
    s=-2 * (1 + eps) * (2 + th + eps * th) * lam / _du,
    pi_m=-2 * (2 + eps) * _hu ** 2 / ((-2 + eps) * _du ** 2),
    pi_p=-2 * (1 + eps) ** 2 * (1 + th * (-1 + lam) * lam) / _du)


# -- Revenue sharing, overconfident. Specialized at α=1, k=0.5, μ=1

REVENUE_OVERCONFIDENT_DEN = (-4 + r * eps ** 2) ** 2 - (-4 + r * eps ** 2) ** 2 * th * lam \
    + eps * (-4 * (-1 + r) * (-2 + eps) + (-2 + r * eps) * (-4 + r * eps ** 2) * th) * lam ** 2

_dr = REVENUE_OVERCONFIDENT_DEN
_gr = 2 * (-1 + r) * (-1 + eps) + (-6 + r * eps * (1 + eps)) * th
_sr = -2 + r * (-1 + eps) * eps

REVENUE_OVERCONFIDENT = dict(
    p=(16 - 4 * r * eps ** 2 + 4 * (-4 + r * eps ** 2) * th * lam - 2 * eps * _gr * lam ** 2) / _dr,
    h=r * eps * (8 - 8 * th * lam + eps * (-2 * r * eps + 2 * r * eps * th * lam - _gr * lam ** 2)) / _dr,
    s=(2 * (-1 + r) * (-4 + r * (-1 + eps) * eps ** 2) + _sr * (-4 + r * eps ** 2) * th) * lam / _dr,
    pi_m=-r * (-4 + r * eps ** 2) * (-8 + 8 * th * lam + eps * (2 * r * eps - 2 * r * eps * th * lam + _gr * lam ** 2)) ** 2
         / (2 * _dr),
    pi_p=(8 * (-1 + r) * _sr - 8 * (-1 + r) * _sr * th * lam
          + (4 * (-1 + r) ** 2 * (-1 + eps) ** 2 + 4 * (-1 + r) * (1 + eps) * _sr * th + _sr ** 2 * th ** 2) * lam ** 2)
         / (2 * _dr))


# -- Specialized follower response (usage based), at α=1, k=0.5, q=2. 'm' is the manufacturer's mean sensitivity

SPECIALIZED_RESPONSE = dict(
    p=(-2 * (2 + s * lam * m) + w * (-2 + m ** 2)) / (-4 + m ** 2),
    h=m * (-2 + w - s * lam * m) / (-4 + m ** 2))


# -- Derivatives of the Lemma 1 equilibrium in λ, at α=1, k=0.5, q=2

_Q = -8 + th ** 2 * lam ** 2 + (2 + lam ** 2) * mu ** 2 + 2 * th * lam * mu * (4 - mu ** 2 + lam * (-3 + mu ** 2))

LAMBDA_PARTIALS = dict(
    p=2 * lam * (-2 + th * lam * mu) * (4 * th * mu - mu ** 2 * (-6 + mu ** 2) + th ** 2 * (-2 + mu ** 2)) / _Q ** 2,
    w=2 * lam * (-2 + th * lam * mu) * (th ** 2 - mu ** 2) * (-4 + mu ** 2) / _Q ** 2,
    h=-2 * lam * mu * (th + mu) ** 2 * (-2 + th * lam * mu) / _Q ** 2,
    s=2 * (th + mu) * (8 + th ** 2 * lam ** 2 + (-2 + lam ** 2) * mu ** 2 + 2 * th * lam ** 2 * mu * (-3 + mu ** 2)) / _Q ** 2,
    pi_m=-4 * lam * (th + mu) ** 2 * (-2 + th * lam * mu) * (1 + th * (-1 + lam) * lam * mu) * (-4 + mu ** 2) / _Q ** 3,
    pi_p=2 * lam * (th + mu) ** 2 * (-2 + th * lam * mu) / _Q ** 2)

del a, th, lam, eps, r

# Printed λ-partials whose sign is opposite to the derivative of the backward induction equilibrium
LAMBDA_PARTIAL_DISCREPANCIES = ("p", "w", "pi_p")


# -- Threshold polynomials, ascending coefficients

EPS1_POLY = PolySpec((64, 30, -38, -17, 1), root_index=3)
""" Upper overconfidence bound of the revenue sharing scenario, at θ=0.4, λ=0.5 """

MU_BOUND_POLY = PolySpec((-28, 0, 24, 0, 1), root_index=2)
""" Upper sensitivity bound of the revenue sharing scenario """

MU_BOUND_USAGE = 2 / np.sqrt(3)
MU_BOUND_REVENUE = poly_root(MU_BOUND_POLY)
EPS1 = poly_root(EPS1_POLY)

EPS_MAX = 2.0
""" The specialized forms have a pole at epsilon_prime=2 """


def eps2_poly(theta, lambda_) -> PolySpec :
    """Quartic whose third real root bounds the overconfidence of the usage based scenario """
    th, lam = theta, lambda_
    return PolySpec((
        -12 + 12 * th * lam + 4 * lam ** 2 - 6 * th * lam ** 2 + 2 * th ** 2 * lam ** 2,
        -12 + 4 * lam + 14 * th * lam - 4 * lam ** 2 - 10 * th * lam ** 2 + 3 * th ** 2 * lam ** 2,
        4 + 2 * lam - th * lam - 2 * lam ** 2 - th * lam ** 2,
        4 - 2 * lam - 4 * th * lam + 2 * lam ** 2 + 4 * th * lam ** 2 - th ** 2 * lam ** 2,
        -th * lam + th * lam ** 2), root_index=3)


def eps2_bound(theta, lambda_) :
    return poly_root(eps2_poly(theta, lambda_))


# Printed values known to deviate from backward induction, by (scenario, variable)
_LEMMA1_NOTE = "Lemma 1 : the mu terms of B carry flipped signs (backward induction gives " \
               "kq(8kq - θ²λ² - 2αθ(4-3λ)λμ - (2+α²λ²)μ²))"
_LEMMA2_NOTE = "Lemma 2 : expressions deviate from backward induction"

KNOWN_DISCREPANCIES = {
    **{("un", var) : _LEMMA1_NOTE for var in ("p", "h", "s", "pi_m")},
    ("un", "w") : _LEMMA1_NOTE + "; the printed fee is negative at q=0.5, mu=1",
    ("un", "pi_p") : _LEMMA1_NOTE + "; the printed platform profit repeats the expression of h",
    **{("rn", var) : _LEMMA2_NOTE for var in ("p", "h", "s", "pi_p")},
    ("rn", "pi_m") : _LEMMA2_NOTE + "; manufacturer profit has a flipped sign",
    ("ro", "pi_m") : "Manufacturer profit : the denominator misses a factor of the common denominator",
}

# The specialized overconfident forms solve the stage problems at this value of q
SPECIALIZED_Q = 2.0


def discrepancy_note(sc: Scenario, var, params: ModelParams) -> Optional[str] :
    """Why a printed value may differ from backward induction at *params*, or None if it should not """
    if sc.overconfident and abs(params.q - SPECIALIZED_Q) > 1e-12 :
        return "Specialized form : solves the stage problems at q=%g only, evaluated at q=%g" % (
            SPECIALIZED_Q, params.q)
    return KNOWN_DISCREPANCIES.get((sc.code, var))


@dataclass
class AuxiliaryValues :
    """Intermediate terms of the rational closed forms """
    a: Optional[float] = None
    b: Optional[float] = None
    den: Optional[float] = None
    c: Optional[float] = None
    d: Optional[float] = None


@dataclass
class EquilibriumOutcome :
    """Equilibrium of one scenario, with its demands, profits and diagnostics.
    Profits are evaluated from the model at the decisions. Printed profit values, if any, are kept in *printed*."""
    scenario: Scenario
    params: ModelParams
    decisions: Decisions
    demands: DemandBundle
    pi_m_perceived: float
    pi_m_realized: float
    pi_p: float
    pi_sc: float
    foc_residuals: Dict[str, float]
    foc_residual_max: float
    soc: SecondOrderDiagnostics
    method: str
    aux: Optional[AuxiliaryValues] = None
    printed: Dict[str, float] = field(default_factory=dict)
    domain_violations: List[str] = field(default_factory=list)
    certification: Optional["Certification"] = None
    iterations: int = 0

    @property
    def feasible(self) :
        return self.demands.feasible

    def quantity(self, name, profit_view=ProfitView.PERCEIVED) :
        """Decision or profit by name : p, w, h, s, pi_m, pi_p, pi_sc """
        if name in ("p", "w", "h", "s") :
            val = getattr(self.decisions, name)
            if val is None :
                raise Exception("No '%s' in scenario '%s'" % (name, self.scenario))
            return val
        if name == "pi_m" :
            return self.pi_m_perceived if profit_view == ProfitView.PERCEIVED else self.pi_m_realized
        if name in ("pi_p", "pi_sc") :
            return getattr(self, name)
        raise Exception("Unknown quantity : %s" % name)


def assemble_outcome(
        sc: Scenario,
        params: ModelParams,
        decisions: Decisions,
        method,
        aux: AuxiliaryValues=None,
        printed: Dict[str, float]=None,
        mode=SolveMode.SEQUENTIAL) -> EquilibriumOutcome :
    """Evaluate demands, profits and first / second order diagnostics at a decision vector """
    system = stage_system(sc.contract)
    values = stage_values(sc, params, decisions)
    residuals = system.foc_residuals(values, mode)

    pi_m_realized = float(manufacturer_profit(sc, params, decisions, Viewpoint.OBJECTIVE))
    pi_p = float(platform_profit(sc, params, decisions))

    return EquilibriumOutcome(
        scenario=sc,
        params=params,
        decisions=decisions,
        demands=expected_demands(params, decisions),
        pi_m_perceived=float(manufacturer_profit(sc, params, decisions, Viewpoint.PERCEIVED)),
        pi_m_realized=pi_m_realized,
        pi_p=pi_p,
        pi_sc=pi_m_realized + pi_p,
        foc_residuals=residuals,
        foc_residual_max=max(abs(val) for val in residuals.values()),
        soc=system.second_order(values),
        method=method,
        aux=aux,
        printed=printed or dict(),
        domain_violations=domain_check(params, sc))


def domain_check(params: ModelParams, sc: Scenario) -> List[str]:
    """All domain violations of a scenario : parameter bounds, sensitivity bound and overconfidence bound.
    Empty if inside the domain """
    res = params.violations()

    if sc.usage_based :
        if not params.mu < MU_BOUND_USAGE :
            res.append("mu=%g breaks mu < 2/sqrt(3) (%.6g)" % (params.mu, MU_BOUND_USAGE))
    elif not params.mu < MU_BOUND_REVENUE :
        res.append("mu=%g breaks mu < %.6g (revenue sharing bound)" % (params.mu, MU_BOUND_REVENUE))

    if sc.overconfident :
        upper, name = EPS_MAX, "2"
        if not sc.usage_based and abs(params.theta - 0.4) < 1e-12 and abs(params.lambda_ - 0.5) < 1e-12 :
            upper, name = EPS1, "eps_1"
        if not 1 <= params.epsilon_prime < upper :
            res.append("epsilon_prime=%g breaks 1 <= epsilon_prime < %s (%.6g)" % (params.epsilon_prime, name, upper))

    if sc.code == "un" :
        den = _evaluate("aux_un", params.values())["den"]
        if not den > 0 :
            res.append("-2mu²A + B = %.6g is not positive" % den)
    return res


def _check_specialization(params: ModelParams, what, mu_free=False, q_values=(0.5, 2.0)) :
    expected = dict(alpha=1.0, k=0.5)
    if not mu_free :
        expected["mu"] = 1.0
    wrong = ["%s=%g (expected %g)" % (key, params.get(key), val)
             for key, val in expected.items() if abs(params.get(key) - val) > 1e-12]
    if all(abs(params.q - val) > 1e-12 for val in q_values) :
        wrong.append("q=%g (expected one of %s)" % (params.q, ", ".join("%g" % val for val in q_values)))
    if wrong :
        raise SpecializationException(
            "%s holds at its substitution point only : %s. Use the oracle instead" % (what, "; ".join(wrong)))


@lru_cache()
def _compiled_forms(name) :
    forms = dict(
        un=LEMMA1, rn=LEMMA2, uo=USAGE_OVERCONFIDENT, ro=REVENUE_OVERCONFIDENT,
        response=SPECIALIZED_RESPONSE, dlambda=LAMBDA_PARTIALS,
        aux_un=dict(a=A_EXPR, b=B_EXPR, den=LEMMA1_DEN),
        aux_rn=dict(c=C_EXPR, d=D_EXPR))[name]
    return {key : CompiledExpr(expr) for key, expr in forms.items()}


def _evaluate(name, values) :
    return {key : float(expr.compute(values)) for key, expr in _compiled_forms(name).items()}


def _closed_outcome(sc: Scenario, params: ModelParams, aux: AuxiliaryValues=None) :
    violations = domain_check(params, sc)
    if violations :
        raise DomainViolationException(sc.code, violations)

    printed = _evaluate(sc.code, params.values())
    debug("Printed values of '%s' : %s" % (sc.code, printed))

    decisions = Decisions(p=printed["p"], w=printed.get("w"), h=printed["h"], s=printed["s"])
    return assemble_outcome(sc, params, decisions, Method.CLOSED, aux=aux, printed=printed)


def lemma1_equilibrium(params: ModelParams) -> EquilibriumOutcome :
    """Printed equilibrium of the usage based contract with a rational manufacturer """
    aux = AuxiliaryValues(**_evaluate("aux_un", params.values()))
    return _closed_outcome(UN, params, aux)


def lemma2_equilibrium(params: ModelParams) -> EquilibriumOutcome :
    """Printed equilibrium of the revenue sharing contract with a rational manufacturer """
    aux = AuxiliaryValues(**_evaluate("aux_rn", params.values()))
    return _closed_outcome(RN, params, aux)


def usage_overconfident_equilibrium(params: ModelParams) -> EquilibriumOutcome :
    """Specialized usage based equilibrium with an overconfident manufacturer, at α=1, k=0.5, μ=1.
    Accepted at q=0.5 and q=2, but it solves the stage problems at q=2 only : see discrepancy_note """
    _check_specialization(params, "Usage based overconfident form")
    return _closed_outcome(UO, params)


def revenue_overconfident_equilibrium(params: ModelParams) -> EquilibriumOutcome :
    """Specialized revenue sharing equilibrium with an overconfident manufacturer, at α=1, k=0.5, μ=1.
    Accepted at q=0.5 and q=2, but it solves the stage problems at q=2 only : see discrepancy_note """
    _check_specialization(params, "Revenue sharing overconfident form")
    return _closed_outcome(RO, params)


def closed_form_equilibrium(sc: Scenario, params: ModelParams) -> EquilibriumOutcome :
    evaluator = dict(
        un=lemma1_equilibrium,
        rn=lemma2_equilibrium,
        uo=usage_overconfident_equilibrium,
        ro=revenue_overconfident_equilibrium)[sc.code]
    return evaluator(params)


def specialized_follower_response(sc: Scenario, params: ModelParams, w_, s_) :
    """Printed manufacturer response (p, h) to the platform decisions (w, s) under the usage based contract,
    at α=1, k=0.5, q=2. Overconfident scenarios respond with the perceived sensitivity """
    if not sc.usage_based :
        raise Exception("The specialized follower response is printed for the usage based contract only")
    _check_specialization(params, "Specialized follower response", mu_free=True, q_values=(2.0,))
    values = {**params.values(), "w" : w_, "s" : s_, m.name : params.sensitivity(Viewpoint.PERCEIVED, sc)}
    res = _evaluate("response", values)
    return res["p"], res["h"]


def lemma1_lambda_partials(params: ModelParams) -> Dict[str, float]:
    """Printed derivatives of the usage based rational equilibrium in λ, at α=1, k=0.5, q=2.
    The signs of p, w and pi_p are opposite to those of backward induction (LAMBDA_PARTIAL_DISCREPANCIES) """
    _check_specialization(params, "Lemma 1 λ-derivatives", mu_free=True, q_values=(2.0,))
    return _evaluate("dlambda", params.values())
