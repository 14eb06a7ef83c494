"""Lambert-W, beta function and the trapezoid step-size rule for strip-analytic integrands."""

import math
from dataclasses import dataclass

_NEWTON_MAX_IT = 100


def lambert_w(x):
    """Principal (nonnegative) branch of W for x >= 0."""
    if x < 0 or math.isnan(x):
        raise ValueError(f"lambert_w needs x >= 0, got {x}")
    if x == 0:
        return 0.0
    if math.isinf(x):
        return math.inf
    l1 = math.log1p(x)
    w = l1 * (1.0 - math.log1p(l1) / (2.0 + l1))
    for _ in range(_NEWTON_MAX_IT):
        ew = math.exp(w)
        f = w * ew - x
        # Halley step; Newton alone stalls near w=0 for tiny x
        wp1 = w + 1.0
        step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1))
        w -= step
        if abs(step) <= 4e-16 * max(1.0, abs(w)):
            break
    return w


def beta_fn(a, b):
    if a <= 0 or b <= 0:
        raise ValueError(f"beta function needs positive arguments, got ({a}, {b})")
    return math.exp(math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b))


def quad_beta(delta, d):
    if delta <= 1 or d <= 0:
        raise ValueError(f"need delta > 1 and d > 0, got delta={delta}, d={d}")
    first = 2.0 * math.pi / delta / math.sin(math.pi / delta)
    log_second = (delta - 1.0) * math.log(2.0 / d) + math.lgamma(delta / 2 - 0.5) \
        + math.lgamma(delta / 2 + 0.5) - math.lgamma(delta)
    return min(first, math.exp(log_second))


def _check_rule_args(n, delta, d):
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n}")
    if delta <= 1:
        raise ValueError(f"delta must exceed 1, got {delta}")
    if not 0 < d <= math.pi / 6 + 1e-15:
        raise ValueError(f"strip half-width must lie in (0, pi/6], got {d}")


def lambert_argument(n, delta, d):
    scale = 2.0 * math.pi * d / (delta - 1.0)
    beta = quad_beta(delta, d)
    return scale * (beta * (delta - 1.0) / (math.pi * d)) ** (1.0 / (delta - 1.0)) * (n + 1)


def step_h(n, delta, d):
    """Trapezoid step balancing truncation and discretization errors on a strip of half-width d."""
    _check_rule_args(n, delta, d)
    return 2.0 * math.pi * d / (delta - 1.0) / lambert_w(lambert_argument(n, delta, d))


def error_shape(n, delta, d):
    """(n+1)^(1-delta)/(delta-1) * h^(1-delta); the n-independent constant is omitted."""
    h = step_h(n, delta, d)
    return (n + 1.0) ** (1.0 - delta) / (delta - 1.0) * h ** (1.0 - delta)


@dataclass(frozen=True)
class QuadratureParams:
    n: int
    h: float
    delta: float
    d: float
    beta: float

    @property
    def floor_delta(self):
        return int(math.floor(self.delta))

    @property
    def size(self):
        return 2 * self.n + 1


def quadrature_params(n, delta, d=math.pi / 6):
    _check_rule_args(n, delta, d)
    return QuadratureParams(int(n), step_h(n, delta, d), float(delta), float(d), quad_beta(delta, d))
