"""Probability densities on R^n and their Euclidean-regularity constants.

A :class:`Density` wraps a (possibly unnormalized) log-density together with
the normalization constant computed by the quadrature module, a truncation
radius beyond which mass is negligible, and construction metadata.  Densities
are immutable and safe to evaluate concurrently.

The regularity constant of exponential type p is

    C_p(a, s) = sup_x sup_{|y| <= s} |x|^p rho(a x + y) / rho(x),

estimated by grid search over the ball of radius ``truncation_radius`` (so
the estimate is a lower bound of the true sup by construction).  If the
log-ratio is still increasing at the grid boundary, or exceeds the overflow
guard, the sup is reported as divergent with a witness point.

Closure operations (bounded perturbation, mixture, product, convolution)
build new densities whose constants obey explicit combination bounds; those
bounds are exercised by the check suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import interpolate, signal, special

from .errors import EvaluationFailure, InvalidParameter, TypeConditionViolation
from .fields import _batch

Array = np.ndarray

LOG_FLOOR = -750.0
_EXP_OVERFLOW = 709.0
#: ratios above this guard are reported as type-condition violations
LOG_RATIO_GUARD = math.log(1e100)

#: default sup-search nodes per axis, by dimension
GRID_NODES = {1: 2001, 2: 201, 3: 61}
#: the near-one window (1, 1 + eps] used for the uniform C0 bound
NEAR_ONE_EPS = 0.25
NEAR_ONE_COUNT = 16

_CONV_CACHE_NODES = {1: 16385, 2: 513, 3: 129}
_CONV_EXTENT_FACTOR = 1.3
#: cached convolution values below peak * this factor are treated as unreliable
_CONV_RELIABLE = 1e-26


def _ball_volume(dim: int, radius: float) -> float:
    return math.pi ** (dim / 2.0) / math.gamma(dim / 2.0 + 1.0) * radius**dim


@dataclass(frozen=True)
class Density:
    """A probability density on R^n with log-density evaluation."""

    dim: int
    norm_const: float
    truncation_radius: float
    rotation_invariant: bool
    provenance: str
    strictly_positive: bool
    label: str
    family: Optional[str] = None
    params: tuple = ()
    eval_radius: float = math.inf
    _log_density: Callable[[Array], Array] = field(repr=False, default=None)
    _sampler: Optional[Callable] = field(repr=False, default=None)

    def log_pdf(self, x):
        """Normalized log-density; -inf outside the support."""
        pts, single = _batch(x, self.dim)
        lv = np.asarray(self._log_density(pts), dtype=float) - math.log(self.norm_const)
        return float(lv[0]) if single else lv

    def pdf(self, x):
        """Normalized density value; raises on exp overflow, never returns inf."""
        pts, single = _batch(x, self.dim)
        if not np.all(np.isfinite(pts)):
            raise InvalidParameter("evaluation point must be finite")
        lv = np.asarray(self._log_density(pts), dtype=float) - math.log(self.norm_const)
        bad = lv > _EXP_OVERFLOW
        if np.any(bad):
            raise EvaluationFailure(
                "density evaluation overflows exp", point=pts[np.argmax(lv)]
            )
        v = np.exp(np.maximum(lv, LOG_FLOOR))
        return float(v[0]) if single else v

    eval = pdf

    @property
    def has_sampler(self) -> bool:
        return self._sampler is not None

    def sample(self, rng: np.random.Generator, size: int) -> Array:
        if self._sampler is None:
            raise InvalidParameter(f"measure {self.label!r} has no direct sampler")
        return self._sampler(rng, size)


# ---------------------------------------------------------------------------
# built-in families
# ---------------------------------------------------------------------------

def gaussian(sigma: float = 1.0, dim: int = 1) -> Density:
    """Centered isotropic Gaussian with scale sigma."""
    sigma = float(sigma)
    if sigma <= 0:
        raise InvalidParameter("gaussian scale must be positive")
    _validate_dim(dim)
    from . import quadrature

    mass_1d, _ = quadrature.line_mass(lambda x: -x * x / (2.0 * sigma**2))
    norm = mass_1d**dim

    def logd(pts):
        return -np.sum(pts * pts, axis=1) / (2.0 * sigma**2)

    return Density(
        dim=dim,
        norm_const=norm,
        truncation_radius=8.0 * sigma * math.sqrt(dim),
        rotation_invariant=True,
        provenance="builtin",
        strictly_positive=True,
        label=f"gaussian(sigma={sigma:g}, dim={dim})",
        family="gaussian",
        params=(sigma,),
        _log_density=logd,
        _sampler=lambda rng, size: rng.normal(0.0, sigma, size=(size, dim)),
    )


def gen_exponential(c: float = 1.0, a: float = 1.0, dim: int = 1) -> Density:
    """Density proportional to exp(-c |x|^a) for a, c > 0."""
    c, a = float(c), float(a)
    if c <= 0 or a <= 0:
        raise InvalidParameter("gen_exponential requires c > 0 and a > 0")
    _validate_dim(dim)
    from . import quadrature

    norm = quadrature.radial_mass(lambda t: -c * t**a, dim)
    # radius with tail mass below 1e-12, from the incomplete-gamma inverse
    trunc = (special.gammainccinv(dim / a, 1e-12) / c) ** (1.0 / a)

    def logd(pts):
        return -c * np.linalg.norm(pts, axis=1) ** a

    def sampler(rng, size):
        u = rng.gamma(dim / a, 1.0, size=size)
        t = (u / c) ** (1.0 / a)
        if dim == 1:
            sign = rng.choice([-1.0, 1.0], size=size)
            return (t * sign).reshape(-1, 1)
        d = rng.standard_normal((size, dim))
        d /= np.linalg.norm(d, axis=1, keepdims=True)
        return d * t[:, None]

    return Density(
        dim=dim,
        norm_const=norm,
        truncation_radius=float(trunc),
        rotation_invariant=True,
        provenance="builtin",
        strictly_positive=True,
        label=f"gen_exponential(c={c:g}, a={a:g}, dim={dim})",
        family="gen_exponential",
        params=(c, a),
        _log_density=logd,
        _sampler=sampler,
    )


def poly_tail(alpha: float, dim: int = 1) -> Density:
    """Density proportional to (1 + x^2)^(-alpha) on R, alpha > 1/2."""
    alpha = float(alpha)
    if alpha <= 0.5:
        raise InvalidParameter("poly_tail requires alpha > 1/2 for integrability")
    if dim != 1:
        raise InvalidParameter("poly_tail is one-dimensional")
    from . import quadrature

    norm, _ = quadrature.line_mass(lambda x: -alpha * np.log1p(x * x))
    nu = 2.0 * alpha - 1.0

    def sampler(rng, size):
        return (rng.standard_t(nu, size=size) / math.sqrt(nu)).reshape(-1, 1)

    return Density(
        dim=1,
        norm_const=norm,
        # grid-search radius only; integrals use the full-line adaptive scheme
        truncation_radius=100.0,
        rotation_invariant=True,
        provenance="builtin",
        strictly_positive=True,
        label=f"poly_tail(alpha={alpha:g})",
        family="poly_tail",
        params=(alpha,),
        _log_density=lambda pts: -alpha * np.log1p(pts[:, 0] ** 2),
        _sampler=sampler,
    )


def uniform_ball(radius: float = 1.0, dim: int = 1) -> Density:
    """Uniform distribution on the centered ball of the given radius."""
    radius = float(radius)
    if radius <= 0:
        raise InvalidParameter("uniform_ball radius must be positive")
    _validate_dim(dim)
    norm = _ball_volume(dim, radius)

    def logd(pts):
        out = np.zeros(pts.shape[0])
        out[np.linalg.norm(pts, axis=1) > radius] = -math.inf
        return out

    def sampler(rng, size):
        d = rng.standard_normal((size, dim))
        d /= np.linalg.norm(d, axis=1, keepdims=True)
        t = radius * rng.random(size) ** (1.0 / dim)
        return d * t[:, None]

    return Density(
        dim=dim,
        norm_const=norm,
        truncation_radius=radius,
        rotation_invariant=True,
        provenance="builtin",
        strictly_positive=False,
        label=f"uniform_ball(R={radius:g}, dim={dim})",
        family="uniform_ball",
        params=(radius,),
        _log_density=logd,
        _sampler=sampler,
    )


_FAMILIES = {
    "gaussian": (gaussian, ("sigma",)),
    "gen_exponential": (gen_exponential, ("c", "a")),
    "poly_tail": (poly_tail, ("alpha",)),
    "uniform_ball": (uniform_ball, ("radius",)),
}


def make_builtin(kind: str, params: dict, dim: int) -> Density:
    """Construct a built-in density by family tag and parameter dict."""
    if kind not in _FAMILIES:
        raise InvalidParameter(
            f"unknown density family {kind!r}; choose from {sorted(_FAMILIES)}"
        )
    ctor, names = _FAMILIES[kind]
    unknown = set(params) - set(names)
    if unknown:
        raise InvalidParameter(f"unexpected parameters {sorted(unknown)} for {kind}")
    kwargs = {name: params[name] for name in names if name in params}
    return ctor(dim=dim, **kwargs)


def _validate_dim(dim: int):
    if not isinstance(dim, (int, np.integer)) or dim < 1:
        raise InvalidParameter("dim must be a positive integer")


# ---------------------------------------------------------------------------
# closure operations
# ---------------------------------------------------------------------------

def mix(mu1: Density, mu2: Density, t: float) -> Density:
    """Convex combination (1 - t) mu1 + t mu2 of equal-dimensional measures."""
    if mu1.dim != mu2.dim:
        raise InvalidParameter("mixture components must share a dimension")
    t = float(t)
    if not (0.0 <= t <= 1.0):
        raise InvalidParameter("mixture weight must lie in [0, 1]")

    def logd(pts):
        parts = []
        if t < 1.0:
            parts.append(math.log(1.0 - t) + mu1.log_pdf(pts))
        if t > 0.0:
            parts.append(math.log(t) + mu2.log_pdf(pts))
        if len(parts) == 1:
            return parts[0]
        return np.logaddexp(parts[0], parts[1])

    dim = mu1.dim
    trunc = max(mu1.truncation_radius, mu2.truncation_radius)
    mu = Density(
        dim=dim,
        norm_const=1.0,
        truncation_radius=trunc,
        rotation_invariant=mu1.rotation_invariant and mu2.rotation_invariant,
        provenance="mixture",
        strictly_positive=(t < 1.0 and mu1.strictly_positive)
        or (t > 0.0 and mu2.strictly_positive),
        label=f"mix({mu1.label}, {mu2.label}, t={t:g})",
        eval_radius=min(mu1.eval_radius, mu2.eval_radius),
        _log_density=logd,
        _sampler=_mixture_sampler(mu1, mu2, t),
    )
    return _renormalized(mu)


def _mixture_sampler(mu1, mu2, t):
    if not (mu1.has_sampler and mu2.has_sampler):
        return None

    def sampler(rng, size):
        pick = rng.random(size) < t
        out = mu1.sample(rng, size)
        n2 = int(np.count_nonzero(pick))
        if n2:
            out[pick] = mu2.sample(rng, n2)
        return out

    return sampler


def product(mu1: Density, mu2: Density) -> Density:
    """Product measure on R^(n1 + n2); log-density adds componentwise."""
    n1 = mu1.dim

    def logd(pts):
        return mu1.log_pdf(pts[:, :n1]) + mu2.log_pdf(pts[:, n1:])

    def sampler(rng, size):
        return np.concatenate([mu1.sample(rng, size), mu2.sample(rng, size)], axis=1)

    rot = (
        mu1.family == "gaussian"
        and mu2.family == "gaussian"
        and mu1.params == mu2.params
    )
    return Density(
        dim=mu1.dim + mu2.dim,
        norm_const=1.0,
        truncation_radius=math.hypot(mu1.truncation_radius, mu2.truncation_radius),
        rotation_invariant=rot,
        provenance="product",
        strictly_positive=mu1.strictly_positive and mu2.strictly_positive,
        label=f"product({mu1.label}, {mu2.label})",
        eval_radius=min(mu1.eval_radius, mu2.eval_radius),
        _log_density=logd,
        _sampler=sampler if mu1.has_sampler and mu2.has_sampler else None,
    )


def convolve_measures(
    mu1: Density, mu2: Density, nodes_per_axis: Optional[int] = None
) -> Density:
    """Convolution mu1 * mu2 via FFT on a cached grid with log-linear interpolation.

    Deterministic quadrature caps at dim 3; higher dimensions are rejected
    with advice to use Monte Carlo sampling of sums instead.
    """
    if mu1.dim != mu2.dim:
        raise InvalidParameter("convolution components must share a dimension")
    n = mu1.dim
    if n > 3:
        raise InvalidParameter(
            "deterministic convolution quadrature caps at dim 3; "
            "use monte_carlo sampling of component sums instead"
        )
    M = nodes_per_axis or _CONV_CACHE_NODES[n]
    if M % 2 == 0:
        M += 1
    L = _CONV_EXTENT_FACTOR * (mu1.truncation_radius + mu2.truncation_radius)
    axis = np.linspace(-L, L, M)
    h = axis[1] - axis[0]
    if n == 1:
        pts = axis.reshape(-1, 1)
    else:
        grids = np.meshgrid(*([axis] * n), indexing="ij")
        pts = np.stack([g.ravel() for g in grids], axis=1)
    a = np.exp(np.maximum(mu1.log_pdf(pts), LOG_FLOOR)).reshape([M] * n)
    b = np.exp(np.maximum(mu2.log_pdf(pts), LOG_FLOOR)).reshape([M] * n)
    conv = signal.fftconvolve(a, b, mode="same") * h**n
    conv = np.maximum(conv, 0.0)
    mass = float(conv.sum() * h**n)
    if not (mass > 0 and math.isfinite(mass)):
        raise EvaluationFailure("convolution cache has no mass")
    conv /= mass
    logc = np.log(np.maximum(conv, 1e-300))

    peak = conv.max()
    unreliable = conv < peak * _CONV_RELIABLE
    if np.any(unreliable):
        radii = np.linalg.norm(pts, axis=1).reshape([M] * n)
        reliable_radius = float(radii[unreliable].min())
    else:
        reliable_radius = float(L)

    if n == 1:
        def logd(qts):
            return np.interp(qts[:, 0], axis, logc, left=LOG_FLOOR, right=LOG_FLOOR)
    else:
        interp = interpolate.RegularGridInterpolator(
            (axis,) * n, logc, method="linear", bounds_error=False, fill_value=LOG_FLOOR
        )

        def logd(qts):
            return interp(qts)

    def sampler(rng, size):
        return mu1.sample(rng, size) + mu2.sample(rng, size)

    return Density(
        dim=n,
        norm_const=1.0,
        truncation_radius=mu1.truncation_radius + mu2.truncation_radius,
        rotation_invariant=mu1.rotation_invariant and mu2.rotation_invariant,
        provenance="convolution",
        strictly_positive=mu1.strictly_positive or mu2.strictly_positive,
        label=f"convolve({mu1.label}, {mu2.label})",
        eval_radius=reliable_radius,
        _log_density=logd,
        _sampler=sampler if mu1.has_sampler and mu2.has_sampler else None,
    )


def shift(mu: Density, offset) -> Density:
    """Translate a measure by a fixed offset vector."""
    offset = np.atleast_1d(np.asarray(offset, dtype=float))
    if offset.shape[0] != mu.dim:
        raise InvalidParameter("offset dimension mismatch")

    mu_s = Density(
        dim=mu.dim,
        norm_const=1.0,
        truncation_radius=mu.truncation_radius + float(np.linalg.norm(offset)),
        rotation_invariant=False,
        provenance="perturbation",
        strictly_positive=mu.strictly_positive,
        label=f"shift({mu.label}, {np.array2string(offset, separator=',')})",
        eval_radius=mu.eval_radius,
        _log_density=lambda pts: mu.log_pdf(pts - offset[None, :]),
        _sampler=(lambda rng, size: mu.sample(rng, size) + offset[None, :])
        if mu.has_sampler
        else None,
    )
    return _renormalized(mu_s)


def perturb(
    mu: Density,
    log_weight: Callable[[Array], Array],
    *,
    rotation_invariant: bool = False,
    weight_bound: Optional[float] = None,
    label: str = "w",
) -> Density:
    """Reweighted measure with density proportional to rho(x) * exp(log_weight(x)).

    When the weight is bounded (C <= w <= D), regularity constants of the
    result are controlled by (D/C) times those of the base measure.
    """
    if weight_bound is None and mu.dim <= 3:
        probe = _grid_points(mu.dim, mu.truncation_radius, {1: 4097, 2: 101, 3: 31}[mu.dim])
        weight_bound = float(np.exp(np.max(log_weight(probe)))) * 1.5

    sampler = None
    if mu.has_sampler and weight_bound is not None:
        def sampler(rng, size):
            out = np.empty((size, mu.dim))
            filled = 0
            while filled < size:
                m = max(2 * (size - filled), 256)
                xs = mu.sample(rng, m)
                accept = rng.random(m) < np.exp(log_weight(xs)) / weight_bound
                take = xs[accept][: size - filled]
                out[filled : filled + take.shape[0]] = take
                filled += take.shape[0]
            return out

    mu_p = Density(
        dim=mu.dim,
        norm_const=1.0,
        truncation_radius=mu.truncation_radius,
        rotation_invariant=rotation_invariant,
        provenance="perturbation",
        strictly_positive=mu.strictly_positive,
        label=f"perturb({mu.label}, {label})",
        eval_radius=mu.eval_radius,
        _log_density=lambda pts: mu.log_pdf(pts) + np.asarray(log_weight(pts), dtype=float),
        _sampler=sampler,
    )
    return _renormalized(mu_p)


def _renormalized(mu: Density) -> Density:
    """Recompute norm_const by quadrature so the total mass is 1."""
    from . import quadrature

    mass, _ = quadrature.raw_mass(mu._log_density, mu.dim, mu.truncation_radius)
    if not (mass > 0 and math.isfinite(mass)):
        raise EvaluationFailure(f"cannot normalize {mu.label!r}: mass {mass}")
    object.__setattr__(mu, "norm_const", mu.norm_const * mass)
    return mu


# ---------------------------------------------------------------------------
# regularity constants
# ---------------------------------------------------------------------------

def _grid_points(dim: int, radius: float, nodes_per_axis: int) -> Array:
    axis = np.linspace(-radius, radius, nodes_per_axis)
    if dim == 1:
        return axis.reshape(-1, 1)
    grids = np.meshgrid(*([axis] * dim), indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=1)
    return pts[np.linalg.norm(pts, axis=1) <= radius * (1.0 + 1e-12)]


def _y_grid(dim: int, s: float, h: float) -> Array:
    """Grid on the ball |y| <= s with spacing matching the x-grid."""
    if s == 0.0:
        return np.zeros((1, dim))
    steps = np.arange(-math.floor(s / h) * h, s + h / 2, h)
    vals = np.unique(np.concatenate([steps, [-s, 0.0, s]]))
    vals = vals[np.abs(vals) <= s * (1.0 + 1e-12)]
    if dim == 1:
        return vals.reshape(-1, 1)
    grids = np.meshgrid(*([vals] * dim), indexing="ij")
    ys = np.stack([g.ravel() for g in grids], axis=1)
    return ys[np.linalg.norm(ys, axis=1) <= s * (1.0 + 1e-12)]


def _best_log_ratio(mu: Density, p: float, a: float, xs: Array, ys: Array) -> Array:
    """max over y of p log|x| + log rho(a x + y) - log rho(x), per x row."""
    log_x = np.full(xs.shape[0], -math.inf)
    nrm = np.linalg.norm(xs, axis=1)
    if p == 0:
        log_x[:] = 0.0
    else:
        pos = nrm > 0
        log_x[pos] = p * np.log(nrm[pos])
    base = mu.log_pdf(xs)
    best = np.full(xs.shape[0], -math.inf)
    for y in ys:
        shifted = mu.log_pdf(a * xs + y[None, :])
        np.maximum(best, shifted, out=best)
    return log_x + best - base


def regularity_constant(
    mu: Density,
    p: float,
    a: float,
    s: float = 0.0,
    *,
    nodes_per_axis: Optional[int] = None,
    radius: Optional[float] = None,
) -> float:
    """Grid estimate of the type-p constant C_p(a, s).

    The estimate is the maximum of the ratio over the search grid, hence a
    lower bound of the true sup.  Raises :class:`TypeConditionViolation`
    (with the witness point) when the ratio exceeds the overflow guard or is
    still increasing at the grid boundary.
    """
    if a < 1.0:
        raise InvalidParameter("regularity constants are defined for a >= 1")
    if s < 0 or p < 0:
        raise InvalidParameter("require s >= 0 and p >= 0")
    if not mu.strictly_positive:
        raise InvalidParameter(
            f"{mu.label!r} vanishes on part of space; regularity estimation "
            "requires a strictly positive density"
        )
    if mu.dim > 3:
        raise InvalidParameter("regularity grid search is implemented for dim <= 3")

    R = mu.truncation_radius if radius is None else float(radius)
    if math.isfinite(mu.eval_radius):
        R = min(R, (mu.eval_radius - s) / a)
    if R <= 0:
        raise InvalidParameter("search radius collapsed; density cache too small")
    nax = nodes_per_axis or GRID_NODES[mu.dim]
    xs = _grid_points(mu.dim, R, nax)
    h = 2.0 * R / (nax - 1)
    ys = _y_grid(mu.dim, s, h)

    lr = _best_log_ratio(mu, p, a, xs, ys)
    top = float(np.max(lr))
    if top > LOG_RATIO_GUARD:
        raise TypeConditionViolation(
            f"type-{p:g} condition violated at x={xs[int(np.argmax(lr))]}: "
            "ratio exceeds the overflow guard",
            witness=xs[int(np.argmax(lr))],
            log_ratio=top,
        )

    nrm = np.linalg.norm(xs, axis=1)
    boundary = nrm >= 0.9 * R
    if np.any(boundary) and np.any(~boundary):
        b_top = float(np.max(lr[boundary]))
        if b_top >= float(np.max(lr[~boundary])):
            idx = np.flatnonzero(boundary)[int(np.argmax(lr[boundary]))]
            xb = xs[idx : idx + 1]
            inner = 0.97 * xb
            lr_b = float(_best_log_ratio(mu, p, a, xb, ys)[0])
            lr_in = float(_best_log_ratio(mu, p, a, inner, ys)[0])
            if lr_b > lr_in + 1e-9:
                raise TypeConditionViolation(
                    f"type-{p:g} condition violated at x={xb[0]}: "
                    "ratio increases toward the grid boundary",
                    witness=xb[0],
                    log_ratio=lr_b,
                )
    return float(np.exp(top))


@dataclass
class RegularityConstants:
    """Estimated C_p(a, s) table with the grid that produced it."""

    p: float
    entries: list  # (a, s, estimate) for finite estimates
    violations: list  # (a, s, witness point) where the sup diverges
    uniform_near_one: Optional[float]
    near_one_eps: float
    grid_spec: dict

    @property
    def numerically_type_p(self) -> bool:
        return not self.violations and self.uniform_near_one is not None

    def estimate(self, a: float, s: float) -> Optional[float]:
        for aa, ss, v in self.entries:
            if aa == a and ss == s:
                return v
        return None

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "entries": [
                {"a": a, "s": s, "estimate": v} for a, s, v in self.entries
            ],
            "violations": [
                {"a": a, "s": s, "witness": list(np.atleast_1d(w))}
                for a, s, w in self.violations
            ],
            "uniform_near_one": self.uniform_near_one,
            "near_one_eps": self.near_one_eps,
            "grid_spec": self.grid_spec,
            "numerically_type_p": self.numerically_type_p,
        }


def type_report(
    mu: Density,
    p: float,
    a_list: Sequence[float],
    s_list: Sequence[float] = (0.0,),
    eps: float = NEAR_ONE_EPS,
    nodes_per_axis: Optional[int] = None,
) -> RegularityConstants:
    """Tabulate regularity constants over an (a, s) grid.

    The measure is flagged numerically type p iff every requested estimate is
    finite; divergent entries are recorded with their witness points.  The
    uniform-near-one bound maximizes C_0(a, 0) over a in (1, 1 + eps].
    """
    if not a_list or not s_list:
        raise InvalidParameter("a_list and s_list must be non-empty")
    entries = []
    violations = []
    for a in a_list:
        for s in s_list:
            try:
                entries.append((a, s, regularity_constant(mu, p, a, s, nodes_per_axis=nodes_per_axis)))
            except TypeConditionViolation as exc:
                violations.append((a, s, exc.witness))

    uniform = None
    try:
        vals = [
            regularity_constant(mu, 0.0, 1.0 + eps * (i + 1) / NEAR_ONE_COUNT, 0.0,
                                nodes_per_axis=nodes_per_axis)
            for i in range(NEAR_ONE_COUNT)
        ]
        uniform = float(max(vals))
    except TypeConditionViolation as exc:
        violations.append((f"near-one sweep (eps={eps:g})", 0.0, exc.witness))

    nax = nodes_per_axis or GRID_NODES[mu.dim]
    return RegularityConstants(
        p=p,
        entries=entries,
        violations=violations,
        uniform_near_one=uniform,
        near_one_eps=eps,
        grid_spec={"dim": mu.dim, "nodes_per_axis": nax, "radius": mu.truncation_radius},
    )
