from dataclasses import dataclass
from typing import List, Optional, Tuple

from numpy.polynomial import Polynomial
from scipy.optimize import bisect

from .base_utils import InsufficientRootsException, debug


@dataclass(frozen=True)
class PolySpec :
    """Polynomial with real coefficients (ascending powers), and the 1-based index of the real root of interest,
    in ascending order, optionally within a bracket """

    coefficients: Tuple[float, ...]
    root_index: int = 1
    bracket: Optional[Tuple[float, float]] = None

    def __post_init__(self):
        coefficients = tuple(float(c) for c in self.coefficients)
        if not coefficients :
            raise Exception("Polynomial without coefficients")
        if len(coefficients) > 1 and coefficients[-1] == 0 :
            raise Exception("Leading coefficient must be non zero : %s" % (coefficients,))
        if self.root_index < 1 :
            raise Exception("Root index is 1-based, got %d" % self.root_index)
        object.__setattr__(self, "coefficients", coefficients)

    @property
    def polynomial(self) :
        return Polynomial(self.coefficients)


def cauchy_bound(coefficients) :
    """All real roots lie within (-bound, bound) """
    lead = abs(coefficients[-1])
    return 1 + max(abs(c) / lead for c in coefficients[:-1])


def _refine(poly, lo, hi) :
    """Root within a sign changing bracket : bisection, then a few Newton steps kept inside the bracket """
    x = bisect(poly, lo, hi, xtol=1e-15, maxiter=200)
    deriv = poly.deriv()
    for _ in range(3) :
        slope = deriv(x)
        if slope == 0 :
            break
        x_new = x - poly(x) / slope
        if not lo <= x_new <= hi or abs(poly(x_new)) >= abs(poly(x)) :
            break
        x = x_new
    return float(x)


def _isolate(poly: Polynomial, lo, hi) -> List[float]:
    """Real roots of poly within [lo, hi], isolated between consecutive critical points """
    poly = poly.trim()
    degree = poly.degree()
    if degree == 0 :
        return []
    if degree == 1 :
        c0, c1 = poly.coef
        root = -c0 / c1
        return [float(root)] if lo <= root <= hi else []

    # Poly is monotonic between consecutive critical points
    edges = [lo] + _isolate(poly.deriv(), lo, hi) + [hi]

    roots = []
    for a, b in zip(edges[:-1], edges[1:]) :
        fa, fb = poly(a), poly(b)
        if fa == 0 :
            roots.append(float(a))
        elif fa * fb < 0 :
            roots.append(_refine(poly, a, b))
    if poly(hi) == 0 :
        roots.append(float(hi))

    # Multiple roots may show up twice, at a critical point
    res = []
    for root in sorted(roots) :
        if not res or root - res[-1] > 1e-12 * max(1.0, abs(root)) :
            res.append(root)
    return res


def real_roots(coefficients, bracket=None) -> List[float]:
    """All real roots in ascending order, optionally restricted to a bracket """
    coefficients = [float(c) for c in coefficients]
    bound = cauchy_bound(coefficients) if len(coefficients) > 1 else 1.0
    lo, hi = bracket if bracket is not None else (-bound, bound)
    return _isolate(Polynomial(coefficients), lo, hi)


def poly_root(spec: PolySpec) -> float :
    """Select the real root of interest of a polynomial.
    Raises InsufficientRootsException if fewer real roots than the requested index exist """
    roots = real_roots(spec.coefficients, spec.bracket)
    debug("Real roots of %s : %s" % (spec.coefficients, roots))
    if len(roots) < spec.root_index :
        raise InsufficientRootsException(len(roots), spec.root_index)
    return roots[spec.root_index - 1]
