"""Hyperbolic integration contour around a half-strip spectrum.

The contour is z(xi) = c + a*sqrt(pi/2 + xi^2) - i*dI*tanh(xi) with
xi = sigma*nu + i*eta. With sigma=1, eta=0 it is the standard contour;
an affine change of nu is used to move it away from zeros of the
nonlocal characteristic function while keeping a symmetric strip of
analyticity |Im nu| < pi/6 for the trapezoid rule.
"""

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import RootFindError, SeparationError

PI6 = math.pi / 6
DS_FLOOR = 1e-2


@dataclass(frozen=True)
class SpectralEnvelope:
    b_s: float
    d_s: float = 0.0
    M: float = 1.0

    def __post_init__(self):
        if self.d_s < 0:
            raise ValueError(f"d_s must be nonnegative, got {self.d_s}")
        if self.M < 1:
            raise ValueError(f"M must be >= 1, got {self.M}")

    def scaled(self, factor):
        return SpectralEnvelope(self.b_s * factor, self.d_s * factor, self.M)

    def distance_outside(self, zeta):
        """Signed distance from zeta to the half-strip boundary (negative inside)."""
        x, y = zeta.real, abs(zeta.imag)
        dx = self.b_s - x
        dy = y - self.d_s
        if dx <= 0 and dy <= 0:
            return max(dx, dy)
        return math.hypot(max(dx, 0.0), max(dy, 0.0))


@dataclass(frozen=True)
class HyperbolicContour:
    c_I: float
    a_I: float
    d_I: float
    d: float
    b_s: float
    d_s: float
    sigma: float = 1.0
    eta: float = 0.0

    @property
    def is_identity(self):
        return self.sigma == 1.0 and self.eta == 0.0

    def xi(self, nu):
        return self.sigma * np.asarray(nu) + 1j * self.eta

    def z_of_xi(self, xi):
        xi = np.asarray(xi, dtype=complex)
        return self.c_I + self.a_I * np.sqrt(math.pi / 2 + xi * xi) - 1j * self.d_I * np.tanh(xi)

    def dz_of_xi(self, xi):
        xi = np.asarray(xi, dtype=complex)
        th = np.tanh(xi)
        return self.a_I * xi / np.sqrt(math.pi / 2 + xi * xi) - 1j * self.d_I * (1.0 - th * th)

    def z(self, nu):
        return self.z_of_xi(self.xi(nu))

    def dz(self, nu):
        return self.dz_of_xi(self.xi(nu)) * self.sigma

    @property
    def base(self):
        return replace(self, sigma=1.0, eta=0.0)


def build_contour(env, d=PI6, ds_floor=DS_FLOOR):
    if not 0 < d <= PI6 + 1e-15:
        raise ValueError(f"strip half-width d must lie in (0, pi/6], got {d}")
    d_s = max(env.d_s, ds_floor)
    a_I = d_s / (math.pi / 2 - d)
    d_I = d_s * math.pi / (math.pi - 2 * d)
    c_I = env.b_s - a_I * math.sqrt(math.pi / 2 - d * d) - d_I * math.tan(d)
    return HyperbolicContour(c_I, a_I, d_I, float(d), float(env.b_s), float(d_s))


def z(contour, nu):
    return contour.z(nu)


def dz(contour, nu):
    return contour.dz(nu)


def z0(env, contour):
    """Expansion centre for the resolvent correction, left of the contour."""
    return min(0.0, env.b_s - contour.a_I * math.sqrt(math.pi / 2 - contour.d ** 2) - 1.0)


def _require_gamma0(contour):
    if abs(contour.d - PI6) > 1e-12:
        raise ValueError(f"the safety curve is defined for d = pi/6 only, got d = {contour.d}")


def gamma0(contour, nu):
    """Inner safety curve z(nu + i*pi/6) of the unshifted contour."""
    _require_gamma0(contour)
    base = contour.base
    return base.z_of_xi(np.asarray(nu) + 1j * PI6)


def gamma0_trace(contour, reach=None, count=1024):
    """Sample the safety curve on sinh-spaced nu; ``reach`` is the largest Re to cover."""
    _require_gamma0(contour)
    V = 8.0
    if reach is not None and contour.a_I > 0:
        V = max(V, (reach - contour.c_I) / contour.a_I + 8.0)
    V = min(V, 1e8)
    u = np.linspace(-math.asinh(V), math.asinh(V), count)
    nu = np.sinh(u)
    return nu, gamma0(contour, nu)


def _segment_distance(p, a, b):
    ab = b - a
    denom = (ab.real ** 2 + ab.imag ** 2)
    t = np.where(denom > 0, ((p - a) * np.conj(ab)).real / np.where(denom > 0, denom, 1.0), 0.0)
    t = np.clip(t, 0.0, 1.0)
    return np.abs(p - (a + t * ab))


def inside_gamma0(contour, points):
    """Even-odd test against the safety curve closed at +infinity; boundary counts as inside."""
    pts = np.atleast_1d(np.asarray(points, dtype=complex))
    if pts.size == 0:
        return np.zeros(0, dtype=bool)
    nu_tr, trace = gamma0_trace(contour, reach=float(pts.real.max()) + 1.0)
    a, b = trace[:-1], trace[1:]
    out = np.empty(pts.size, dtype=bool)
    for i, p in enumerate(pts):
        ya, yb = a.imag, b.imag
        crosses = (ya > p.imag) != (yb > p.imag)
        with np.errstate(divide="ignore", invalid="ignore"):
            xc = a.real + (p.imag - ya) * (b.real - a.real) / (yb - ya)
        out[i] = bool(np.count_nonzero(crosses & (xc < p.real)) % 2)
        seg = _segment_distance(p, a, b)
        if seg.min() <= 1e-3 * max(1.0, abs(p)):
            # near the polyline the chord error matters; decide through the exact preimage
            k = int(np.argmin(seg))
            try:
                w = contour_preimage(contour, complex(p), seed=nu_tr[k] + 1j * PI6)
            except RootFindError:
                continue
            out[i] = w.imag >= PI6 - 1e-12
    return out


def distance_to_gamma0(contour, points):
    pts = np.atleast_1d(np.asarray(points, dtype=complex))
    if pts.size == 0:
        return np.zeros(0)
    _, trace = gamma0_trace(contour, reach=float(pts.real.max()) + 1.0)
    a, b = trace[:-1], trace[1:]
    return np.array([_segment_distance(p, a, b).min() for p in pts])


def contour_preimage(contour, target, seed=None, tol=1e-13, max_it=60):
    """Solve z(w) = target for complex w with |Im w| < 1.2 on the unshifted contour.

    Newton on the analytic map, seeded from ``seed`` or a coarse grid search.
    """
    base = contour.base
    limit = 1.2

    def newton(w):
        for _ in range(max_it):
            f = complex(base.z_of_xi(w)) - target
            dw = f / complex(base.dz_of_xi(w))
            w -= dw
            if abs(w.imag) >= limit or not np.isfinite(w):
                return None
            if abs(dw) <= tol * max(1.0, abs(w)):
                if abs(complex(base.z_of_xi(w)) - target) <= 1e-9 * max(1.0, abs(target)):
                    return w
                return None
        return None

    if seed is not None:
        w = newton(complex(seed))
        if w is not None:
            return w
    # coarse grid in (Re w, Im w), then polish
    span = 8.0
    if base.a_I > 0:
        span = max(span, abs(target.real - base.c_I) / base.a_I + 8.0)
    nu = np.sinh(np.linspace(-math.asinh(span), math.asinh(span), 801))
    ys = np.linspace(-limit + 0.01, limit - 0.01, 121)
    W = nu[None, :] + 1j * ys[:, None]
    err = np.abs(base.z_of_xi(W) - target)
    order = np.argsort(err, axis=None)[:8]
    for idx in order:
        w = newton(complex(W.flat[idx]))
        if w is not None:
            return w
    raise RootFindError(f"could not invert the contour map at {target!r}")


def adjust_for_zeros(contour, zeros):
    """Reparametrize the contour so every zero stays outside the analyticity band.

    Returns (new contour, d_c, z_c). With no binding zero, the contour is
    returned unchanged and d_c = pi/6. The shift is eta = pi/12 - d_c/2
    and scale sigma = 3*d_c/pi + 1/2, which maps |Im nu| < pi/6 onto
    -d_c < Im xi < pi/6.
    """
    _require_gamma0(contour)
    if not contour.is_identity:
        raise ValueError("adjustment expects an unshifted contour")
    zeros = [complex(zr) for zr in zeros]
    if not zeros:
        return contour, PI6, None
    inside = inside_gamma0(contour, zeros)
    if inside.any():
        bad = zeros[int(np.flatnonzero(inside)[0])]
        raise SeparationError(f"zero {bad:.10g} lies inside or on the safety curve", zero=bad)

    nu_tr, trace = gamma0_trace(contour, reach=max(zr.real for zr in zeros) + 1.0)
    best_dc, best_zero = PI6, None
    for zr in zeros:
        k = int(np.argmin(np.abs(trace - zr)))
        seed = nu_tr[k] + 1j * (PI6 - 0.05)
        try:
            w = contour_preimage(contour, zr, seed=seed)
        except RootFindError:
            # no preimage in the admissible band: this zero does not constrain the strip
            continue
        if w.imag >= PI6:
            raise SeparationError(f"zero {zr:.10g} lies inside the safety curve", zero=zr)
        dc = -w.imag
        if dc < best_dc:
            best_dc, best_zero = dc, zr
    if best_zero is None:
        return contour, PI6, None
    if best_dc <= -PI6 + 1e-9:
        raise SeparationError(f"zero {best_zero:.10g} touches the safety curve", zero=best_zero)
    sigma = 3.0 * best_dc / math.pi + 0.5
    eta = math.pi / 12 - best_dc / 2
    return replace(contour, sigma=sigma, eta=eta), best_dc, best_zero
