"""
Flat file formats : equilibrium CSV rows, reconciliation ledger, proposition reports, thresholds and key=value config files.
All CSV go through pandas with a fixed float format, for byte identical reruns.
"""
import os
from typing import Dict, List

import pandas as pd

from .base_utils import ConfigException, _fmt_point
from .closed_form import EquilibriumOutcome
from .oracle import ReconciliationReport
from .statics import PropositionReport, ThresholdSet

FLOAT_FORMAT = "%.12g"

CSV_COLUMNS = [
    "scenario", "contract", "rationality",
    "alpha", "q", "k", "theta", "lambda", "mu", "epsilon_prime", "r",
    "method",
    "p", "w", "h", "s",
    "e_d_i", "e_d_s", "e_d_t", "gamma_i", "gamma_s", "feasible",
    "pi_m_perceived", "pi_m_realized", "pi_p", "pi_sc",
    "foc_residual_max"]

# "note" names the known discrepancy behind a documented mismatch
LEDGER_COLUMNS = ["scenario", "variable", "closed", "oracle", "abs_gap", "rel_gap", "verdict", "note"]


def outcome_record(outcome: EquilibriumOutcome) -> Dict :
    """One CSV row """
    params = outcome.params
    demands = outcome.demands
    return {
        "scenario" : outcome.scenario.code,
        "contract" : outcome.scenario.contract,
        "rationality" : outcome.scenario.rationality,
        "alpha" : params.alpha,
        "q" : params.q,
        "k" : params.k,
        "theta" : params.theta,
        "lambda" : params.lambda_,
        "mu" : params.mu,
        "epsilon_prime" : params.epsilon_prime,
        "r" : params.share_r,
        "method" : outcome.method,
        **{name : getattr(outcome.decisions, name) for name in ("p", "w", "h", "s")},
        "e_d_i" : demands.e_d_i,
        "e_d_s" : demands.e_d_s,
        "e_d_t" : demands.e_d_t,
        "gamma_i" : demands.gamma_i,
        "gamma_s" : demands.gamma_s,
        "feasible" : demands.feasible,
        "pi_m_perceived" : outcome.pi_m_perceived,
        "pi_m_realized" : outcome.pi_m_realized,
        "pi_p" : outcome.pi_p,
        "pi_sc" : outcome.pi_sc,
        "foc_residual_max" : outcome.foc_residual_max}


def outcomes_frame(outcomes: List[EquilibriumOutcome]) -> pd.DataFrame :
    return pd.DataFrame([outcome_record(outcome) for outcome in outcomes], columns=CSV_COLUMNS)


def ledger_frame(reports: List[ReconciliationReport]) -> pd.DataFrame :
    rows = [{col : getattr(entry, col) for col in LEDGER_COLUMNS} for report in reports for entry in report.entries]
    return pd.DataFrame(rows, columns=LEDGER_COLUMNS)


def reports_frame(reports: List[PropositionReport]) -> pd.DataFrame :
    """One row per claim, with the explicit list of violating points """
    rows = []
    for report in reports :
        for claim in report.claims :
            rows.append(dict(
                proposition=report.proposition,
                claim=claim.claim,
                checked=claim.checked,
                passed=claim.passed,
                violations=len(claim.violations),
                unstable=len(claim.unstable),
                ledgered=claim.ledgered,
                verdict=report.verdict,
                violating_points="; ".join(_fmt_point(point) for point in claim.violations)))
    return pd.DataFrame(rows, columns=[
        "proposition", "claim", "checked", "passed", "violations", "unstable", "ledgered", "verdict", "violating_points"])


def thresholds_frame(thresholds: ThresholdSet) -> pd.DataFrame :
    """Constants first, then the curve samples. Missing thresholds are left empty """
    rows = [dict(name=name, input=None, value=value) for name, value in thresholds.constants().items()]
    for name, curve in thresholds.curves.items() :
        rows.extend(dict(name=name, input=x, value=y) for x, y in curve)
    return pd.DataFrame(rows, columns=["name", "input", "value"])


def to_csv(df: pd.DataFrame, path=None) :
    """Write CSV to path, or return it as a string when path is None """
    return df.to_csv(path, index=False, float_format=FLOAT_FORMAT, na_rep="", lineterminator="\n")


def write_outputs(outputs: Dict[str, pd.DataFrame]) :
    """Write several frames by path. Files already written are removed if one of them fails """
    written = []
    try :
        for path, df in outputs.items() :
            to_csv(df, path)
            written.append(path)
    except Exception :
        for path in written :
            os.remove(path)
        raise


def read_config(path) -> Dict[str, str]:
    """Read a key=value file. Blank lines and '#' comments are ignored """
    res = dict()
    with open(path) as f :
        for lineno, line in enumerate(f, 1) :
            line = line.split("#", 1)[0].strip()
            if not line :
                continue
            if not "=" in line :
                raise ConfigException("%s:%d : expected key=value, got '%s'" % (path, lineno, line))
            key, value = line.split("=", 1)
            res[key.strip()] = value.strip()
    return res
