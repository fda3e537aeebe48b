from contextlib import AbstractContextManager
import sys

import concurrent.futures

DEBUG=False

# Run independent solves (sweeps, proposition grids, multi starts) in a thread pool
PARALLEL=False


def set_debug(value=True) :
    """ Activate debug logs """
    global DEBUG
    DEBUG=value

def debug(*args, **kwargs) :
    if DEBUG :
        print(*args, **kwargs)

def error(*args, **kwargs):
    """Print message on stderr """
    print(*args, **kwargs, file=sys.stderr)


class ParamValidationException(Exception) :
    """Raised when a set of exogenous parameters breaks one of its bounds"""
    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("Invalid parameters : " + "; ".join(self.violations))


class DomainViolationException(Exception) :
    """Raised when a closed form is evaluated outside of its validity domain"""
    def __init__(self, scenario, violations):
        self.scenario = scenario
        self.violations = list(violations)
        super().__init__("Outside of the domain of scenario '%s' : %s" % (scenario, "; ".join(self.violations)))


class MissingSoftwareFeeException(Exception) :
    """Usage based contract evaluated without a software fee 'w'"""
    pass


class DegenerateFollowerException(Exception) :
    """The manufacturer stationarity system is singular"""
    def __init__(self, determinant):
        self.determinant = determinant
        super().__init__("Degenerate follower stage : determinant of the manufacturer system is %g" % determinant)


class NoStationaryPointException(Exception) :
    def __init__(self, best_residual, message=None):
        self.best_residual = best_residual
        super().__init__(message or "No stationary point found. Best FOC residual : %g" % best_residual)


class ScenarioMismatchException(Exception) :
    pass


class InsufficientRootsException(Exception) :
    def __init__(self, found, required):
        self.found = found
        self.required = required
        super().__init__("Polynomial has %d real root(s) in the search interval, root #%d requested" % (found, required))


class SpecializationException(Exception) :
    """Printed specialized forms evaluated away from their substitution point"""
    pass


class ConfigException(Exception) :
    """Malformed command line option or config file entry"""
    pass


class EvaluationException(Exception) :
    """Evaluation failed at a given point of a scan or stencil"""
    def __init__(self, point, cause=None):
        self.point = point
        super().__init__("Evaluation failed at %s%s" % (point, (" : %s" % cause) if cause else ""))


class  ExceptionContext(AbstractContextManager) :
    """Attach a point description to any exception raised within the block """

    def __init__(self, context):
        self.context = context

    def __exit__(self, exc_type, exc_val, exc_tb):
        if exc_val is not None and not isinstance(exc_val, EvaluationException) :
            raise EvaluationException(self.context, exc_val) from exc_val
        return False


def _sign(value, tol=0.0) :
    """Sign as -1, 0, 1, with zero band of width tol """
    if value > tol :
        return 1
    if value < -tol :
        return -1
    return 0

def _fmt_point(point: dict) :
    return ", ".join("%s=%.6g" % (key, val) for key, val in point.items())


def _parallel_map(f, items) :
    if PARALLEL :
        with concurrent.futures.ThreadPoolExecutor() as exec:
            return list(exec.map(f, items))
    else :
        return list(map(f, items))
