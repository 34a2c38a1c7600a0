"""Forward and backward shooting for profiles with interface.

Forward shots integrate the g-equation from the axis (g = a^m, dg = 0);
backward shots start at an interface point xi0, seeded by the local series

    f^((m-1)/2)(xi) ~ C * (xi0 - xi),     C = (m-1) h0 / (2 sqrt(m(m-1))),

i.e. g = (C eps)^p and dg = -p C (C eps)^(p-1) with p = 2m/(m-1) at
xi = xi0 - eps.  The same series is used on the way *in*: integrating down to
g = 0 across the degenerate contact is hopeless (the trajectory grazes zero
tangentially), so shots terminate on a small positive g-floor and the
interface location is recovered from a curvature-corrected projection built
on the ratio r = p*g/|dg| (see _project_interface).

Good profiles (f'(0) = 0) are located by bisection on xi0 against the slope
of the backward shot at the axis; for each fixed xi0 the profile with
interface there is unique, so the slope is a well-defined function of xi0.
"""

from __future__ import annotations

import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from .integrate import (Event, EventKind, EventRecord, IntegrationError,
                        IntegratorConfig, IntegrationResult, VanishKind,
                        classify_vanish, integrate)
from .model import (BackwardShot, ForwardShot, Params, Profile,
                    integral_identity_residual, rhs_g)

__all__ = [
    "Interface",
    "VerticalSlope",
    "ReachedOrigin",
    "Diverged",
    "Exhausted",
    "ShotOutcome",
    "GoodProfile",
    "SlopeUnreliable",
    "series_constant",
    "series_exponent",
    "interface_series_state",
    "shoot_forward",
    "shoot_backward",
    "slope_fn",
    "find_good_profiles",
    "count_maxima",
    "multiplicity_scan",
    "ScanRow",
    "nonexistence_gap",
    "GapBounds",
]

#: distance from the interface (in the series variable) at which shots hand
#: over from integration to the local series.  Deeper is worse twice over:
#: default absolute tolerances cannot track the interface branch much below
#: this level (trajectories bounce off a positive minimum ~1e-7), and the
#: escaping linear mode amplifies state errors as the layer is descended.
#: The curvature-corrected projection from this depth is accurate to ~1e-7.
HANDOFF_DELTA = 0.15
#: |dg| may exceed the series prediction by at most this factor at the
#: handoff point and still count as an interface-type vanishing
SERIES_RATIO_CUT = 10.0
#: default relative seeding distance for backward shots, eps = EPS_REL * xi0
EPS_REL = 1e-6
#: default spacing of dense profile samples (quadrature accuracy ~ dx^4)
PROFILE_DENSE_DX = 1e-3
#: forward shots stop when g exceeds this (escape toward infinite slope data)
G_CEILING = 1e9

DEFAULT_XI_MAX = 1e3
DEFAULT_SLOPE_TOL = 1e-6
#: |f'(0)| below this counts as a flat axis start when classifying extrema
ORIGIN_FLAT_TOL = 1e-5


@dataclass(frozen=True)
class Interface:
    xi0: float


@dataclass(frozen=True)
class VerticalSlope:
    xi0: float


@dataclass(frozen=True)
class ReachedOrigin:
    f0: float
    slope: float


@dataclass(frozen=True)
class Diverged:
    reason: str


@dataclass(frozen=True)
class Exhausted:
    xi_max: float


ShotOutcome = Union[Interface, VerticalSlope, ReachedOrigin, Diverged, Exhausted]


class SlopeUnreliable(RuntimeError):
    pass


# --------------------------------------------------------------------------
# series seeding and events
# --------------------------------------------------------------------------

def series_constant(params: Params) -> float:
    """C in f^((m-1)/2) ~ C (xi0 - xi) at an interface."""
    m = params.m
    return (m - 1.0) * params.h0 / (2.0 * np.sqrt(m * (m - 1.0)))


def series_exponent(params: Params) -> float:
    """p = 2m/(m-1): g vanishes like (xi0 - xi)^p at an interface."""
    return 2.0 * params.m / (params.m - 1.0)


def interface_series_state(params: Params, xi0: float, epsilon: float
                           ) -> Tuple[float, float]:
    """(g, dg) of the interface series at xi = xi0 - epsilon."""
    if xi0 <= 0.0 or not 0.0 < epsilon < xi0:
        raise ValueError("need xi0 > 0 and 0 < epsilon < xi0")
    C = series_constant(params)
    p = series_exponent(params)
    g = (C * epsilon) ** p
    dg = -p * C * (C * epsilon) ** (p - 1.0)
    return g, dg


def _series_dg(params: Params, g: float) -> float:
    # |dg| of an interface-type solution at level g
    C = series_constant(params)
    p = series_exponent(params)
    return p * C * g ** ((p - 1.0) / p)


def profile_rhs(params: Params):
    m, sigma = params.m, params.sigma

    def rhs(xi, y):
        g = y[0]
        gpos = np.where(np.asarray(g) > 0.0, g, 0.0)
        return np.array([y[1],
                         gpos ** (1.0 / m) / (m - 1.0)
                         - np.asarray(xi) ** sigma * np.asarray(g)])

    return rhs


def _g_floor_event(floor) -> Event:
    """Terminal handoff event at g = floor; floor may be a callable of xi.

    The floor must sit well below the oscillation minima of live profiles
    (which track the equilibrium hyperbola: g-scale ~ xi^(-m sigma/(m-1)))
    while staying above the integration-noise bounce near a true interface,
    hence the xi-dependent variant built in _g_floor_fn.
    """
    if callable(floor):
        return Event(EventKind.GZERO, lambda t, y: y[0] - floor(t),
                     direction=-1, terminal=True)
    return Event(EventKind.GZERO, lambda t, y: y[0] - floor,
                 direction=-1, terminal=True)


def _dgzero_event() -> Event:
    return Event(EventKind.DG_ZERO, lambda t, y: y[1], direction=0,
                 terminal=False)


def _hyp1_event(params: Params) -> Event:
    m, sigma = params.m, params.sigma

    def fn(t, y):
        gpos = np.where(np.asarray(y[0]) > 0.0, y[0], 0.0)
        tpos = np.asarray(t, dtype=float)
        weight = np.where(tpos > 0.0, tpos, 0.0) ** sigma if sigma > 0.0 \
            else np.ones_like(tpos)
        return (m - 1.0) * weight * gpos ** ((m - 1.0) / m) - 1.0 / m

    return Event(EventKind.HYP_PHI_MAX_CROSS, fn, direction=0, terminal=False)


def _g_ceiling_event(gmax: float) -> Event:
    return Event(EventKind.STATE_BOUND, lambda t, y: gmax - y[0],
                 direction=-1, terminal=True)


def _g_floor_fn(params: Params, g_start: float):
    """xi-dependent handoff floor: min of the series depth, a fraction of the
    launch amplitude, and a fraction of the local hyperbola g-scale."""
    m, sigma = params.m, params.sigma
    C = series_constant(params)
    p = series_exponent(params)
    cap = min((C * HANDOFF_DELTA) ** p, 1e-3 * g_start)
    if sigma == 0.0:
        scale0 = 1e-3 * (1.0 / (m - 1.0)) ** (m / (m - 1.0))
        const = min(cap, scale0)
        return lambda t: const
    k = 1e-3 * (1.0 / (m - 1.0)) ** (m / (m - 1.0))
    expo = -m * sigma / (m - 1.0)

    # below t_cut the hyperbola scale exceeds the cap anyway; clamping there
    # avoids overflow in the negative power
    t_cut = (cap / k) ** (1.0 / expo)

    def floor(t):
        t_arr = np.maximum(np.asarray(t, dtype=float), t_cut)
        return np.minimum(cap, k * t_arr ** expo)

    return floor


# --------------------------------------------------------------------------
# profile assembly
# --------------------------------------------------------------------------

def _extrema(params: Params, records: Sequence[EventRecord],
             origin_g: Optional[float], origin_slope: Optional[float]
             ) -> Tuple[tuple, tuple]:
    maxima: List[float] = []
    minima: List[float] = []
    for rec in records:
        if rec.kind is not EventKind.DG_ZERO:
            continue
        curv = rhs_g(params, max(rec.t, 0.0), max(float(rec.y[0]), 0.0))
        if curv < 0.0:
            maxima.append(float(rec.t))
        elif curv > 0.0:
            minima.append(float(rec.t))
    # flat axis start: a maximum of f at xi = 0 iff g is concave there
    # (sigma > 0 always gives g''(0) > 0, so this only fires at sigma = 0).
    # A residual slope of size slope_tol displaces that maximum to
    # xi ~ slope/|f''| ~ 1e-5, so interior extrema that close to the axis are
    # the same feature and get absorbed.
    if (origin_g is not None and origin_slope is not None
            and abs(origin_slope) < ORIGIN_FLAT_TOL):
        curv0 = rhs_g(params, 0.0, max(origin_g, 0.0))
        if curv0 != 0.0:
            maxima = [x for x in maxima if x > 1e-3]
            minima = [x for x in minima if x > 1e-3]
            (maxima if curv0 < 0.0 else minima).append(0.0)

    def dedup(points):
        out: List[float] = []
        for x in sorted(points):
            if not out or x - out[-1] > 1e-6:
                out.append(x)
        return tuple(out)

    return dedup(maxima), dedup(minima)


def _slope_from_state(params: Params, g: float, dg: float) -> float:
    m = params.m
    if g <= 0.0:
        raise ValueError("slope undefined at g <= 0")
    return dg / (m * g ** ((m - 1.0) / m))


def _merge(res1: IntegrationResult, res2: Optional[IntegrationResult]
           ) -> Tuple[np.ndarray, np.ndarray, List[EventRecord]]:
    if res2 is None:
        return res1.t, res1.y, list(res1.events)
    t = np.concatenate([res1.t, res2.t[1:]])
    y = np.concatenate([res1.y, res2.y[1:]], axis=0)
    return t, y, list(res1.events) + list(res2.events)


def _build_profile(params: Params, t: np.ndarray, y: np.ndarray,
                   provenance, maxima, minima, interface, slope_at_origin
                   ) -> Profile:
    order = np.argsort(t)
    xi = t[order]
    g = np.maximum(y[order, 0], 0.0)
    dg = y[order, 1]
    keep = np.concatenate([[True], np.diff(xi) > 0.0])
    return Profile(params=params, xi=xi[keep], g=g[keep], dg=dg[keep],
                   provenance=provenance, maxima=maxima, minima=minima,
                   interface=interface, slope_at_origin=slope_at_origin)


# --------------------------------------------------------------------------
# shooting
# --------------------------------------------------------------------------

def _project_interface(params: Params, xi: float, g: float, dg: float,
                       direction: float) -> float:
    """Interface location from the local series at (xi, g, dg).

    With delta the distance to the interface, the vanishing branch expands as
    g = A delta^p (1 + c2 delta^2 + c3 delta^3 + ...) where the corrections
    are forced by the weight: c2 = -xi0^sigma / D2 and
    c3 = sigma xi0^(sigma-1) / D3 with Dk = (p+k)(p+k-1) - p(p-1)/m.  The
    raw ratio r = p g / |dg| equals delta (1 - (2/p) c2 delta^2 - ...), so

        delta = r (1 + (2/p) c2 r^2 + (3/p) c3 r^3) + O(r^4-ish).

    Where dg has been flattened by a grazing minimum the series inversion
    through the known amplitude C is used instead.
    """
    m, sigma = params.m, params.sigma
    p = series_exponent(params)
    C = series_constant(params)
    delta_series = g ** (1.0 / p) / C
    if dg * direction < 0.0:
        r = min(p * g / abs(dg), 1.5 * delta_series)
        xi0_est = xi + direction * r
        if xi0_est > 0.0:
            d2 = (p + 2.0) * (p + 1.0) - p * (p - 1.0) / m
            d3 = (p + 3.0) * (p + 2.0) - p * (p - 1.0) / m
            c2 = -xi0_est ** sigma / d2
            c3 = sigma * xi0_est ** (sigma - 1.0) / d3 if sigma > 0.0 else 0.0
            r = r * (1.0 + (2.0 / p) * c2 * r * r
                     + (3.0 / p) * c3 * r ** 3)
        delta = r
    else:
        delta = delta_series
    return xi + direction * delta


def _resolve_vanish(params: Params, res: IntegrationResult, rhs, events,
                    cfg: IntegratorConfig, t_end: float
                    ) -> Tuple[ShotOutcome, Optional[IntegrationResult]]:
    """Terminal g-floor hit: decide interface vs vertical slope.

    At the handoff state the series predicts |dg| for an interface-type
    approach.  Within SERIES_RATIO_CUT of it the interface location is
    projected through the curvature-corrected series right here: integrating
    deeper only degrades the state, since the escaping linear mode amplifies
    its error like 1/delta^2.  Otherwise dg is genuinely nonzero at vanishing
    and the shot is continued across g = 0, where the standard classification
    applies.
    """
    term = res.terminal_event
    xi_h, g_h, dg_h = term.t, max(float(term.y[0]), 0.0), float(term.y[1])
    direction = 1.0 if t_end >= xi_h else -1.0
    ratio = abs(dg_h) / max(_series_dg(params, max(g_h, 1e-300)), 1e-300)

    if dg_h * direction < 0.0 and ratio < SERIES_RATIO_CUT:
        xi0 = _project_interface(params, xi_h, g_h, dg_h, direction)
        return Interface(xi0), None

    # transversal vanishing: cross g = 0 properly and classify there
    cont_events = [_g_floor_event(0.0)] + [ev for ev in events
                                           if not ev.terminal]
    try:
        res2 = integrate(rhs, [g_h, dg_h], (xi_h, t_end),
                         events=cont_events, config=cfg)
    except IntegrationError as err:
        return Diverged(str(err)), err.partial
    term2 = res2.terminal_event
    if term2 is None:
        return Exhausted(t_end), res2
    dg_scale = max(float(np.max(np.abs(res.y[:, 1]))),
                   float(np.max(np.abs(res2.y[:, 1]))))
    kind = classify_vanish(params, term2, dg_scale)
    if kind is VanishKind.INTERFACE:
        return Interface(term2.t), res2
    return VerticalSlope(term2.t), res2


def shoot_forward(params: Params, a: float, xi_max: float = DEFAULT_XI_MAX,
                  slope0: float = 0.0,
                  config: Optional[IntegratorConfig] = None,
                  dense_dx: Optional[float] = PROFILE_DENSE_DX,
                  track_events: bool = True
                  ) -> Tuple[Profile, ShotOutcome]:
    """Integrate from the axis with f(0) = a, f'(0) = slope0 (default 0).

    Records interior extrema and crossings of the phi-max hyperbola, stops on
    vanishing g (classified interface / vertical slope), on g blowing past
    G_CEILING (Diverged), or at xi_max (Exhausted).
    """
    if a <= 0.0 or xi_max <= 0.0:
        raise ValueError("need a > 0 and xi_max > 0")
    m, sigma = params.m, params.sigma
    g0 = a ** m
    dg0 = m * a ** (m - 1.0) * slope0
    cfg = config or IntegratorConfig()
    if 0.0 < sigma < 1.0 and cfg.first_step is None:
        # the weight xi^sigma is only Hoelder at 0; cap the first step
        cfg = replace(cfg, first_step=1e-6)
    if dense_dx is not None and cfg.dense_dx is None:
        cfg = replace(cfg, dense_dx=dense_dx)

    rhs = profile_rhs(params)
    events = [_g_floor_event(_g_floor_fn(params, g0)),
              _g_ceiling_event(G_CEILING)]
    if track_events:
        events += [_dgzero_event(), _hyp1_event(params)]

    try:
        res = integrate(rhs, [g0, dg0], (0.0, xi_max), events=events, config=cfg)
    except IntegrationError as err:
        if err.partial is None:
            raise
        outcome: ShotOutcome = Diverged(str(err))
        res = err.partial
        res2 = None
    else:
        term = res.terminal_event
        res2 = None
        if term is None:
            outcome = Exhausted(xi_max)
        elif term.kind is EventKind.STATE_BOUND:
            outcome = Diverged("g exceeded ceiling")
        else:
            outcome, res2 = _resolve_vanish(params, res, rhs, events, cfg, xi_max)

    t, y, records = _merge(res, res2)
    slope_origin = float(slope0)
    maxima, minima = _extrema(params, records, g0, slope_origin)
    interface = outcome.xi0 if isinstance(outcome, Interface) else None
    profile = _build_profile(params, t, y, ForwardShot(a, slope0),
                             maxima, minima, interface, slope_origin)
    return profile, outcome


def shoot_backward(params: Params, xi0: float, epsilon: Optional[float] = None,
                   config: Optional[IntegratorConfig] = None,
                   dense_dx: Optional[float] = PROFILE_DENSE_DX,
                   track_events: bool = True
                   ) -> Tuple[Profile, ShotOutcome]:
    """Integrate from the interface series seed at xi0 - epsilon down to 0.

    Returns ReachedOrigin(f0, slope) when g stays positive all the way to the
    axis; otherwise the vanishing is classified as for forward shots (a shot
    that vanishes again before the axis cannot carry a good profile).

    The absolute tolerances are rescaled to the series seed: errors committed
    while g ~ (C eps)^p are amplified like (delta/eps)^(p-1) on the way out of
    the interface layer, so a fixed abs_tol of 1e-12 would destroy the shot.
    """
    if xi0 <= 0.0:
        raise ValueError("xi0 must be > 0")
    eps = EPS_REL * xi0 if epsilon is None else float(epsilon)
    g0, dg0 = interface_series_state(params, xi0, eps)
    cfg = config or IntegratorConfig()
    abs_tol = np.array([max(1e-8 * g0, 1e-300), max(1e-8 * abs(dg0), 1e-300)])
    cfg = replace(cfg, abs_tol=abs_tol)
    if dense_dx is not None and cfg.dense_dx is None:
        cfg = replace(cfg, dense_dx=dense_dx)

    rhs = profile_rhs(params)
    events = [_g_floor_event(_g_floor_fn(params, np.inf)),
              _g_ceiling_event(G_CEILING)]
    if track_events:
        events += [_dgzero_event(), _hyp1_event(params)]

    try:
        res = integrate(rhs, [g0, dg0], (xi0 - eps, 0.0), events=events,
                        config=cfg)
    except IntegrationError as err:
        if err.partial is None:
            raise
        outcome: ShotOutcome = Diverged(str(err))
        res = err.partial
        res2 = None
    else:
        term = res.terminal_event
        res2 = None
        if term is None:
            g_end, dg_end = float(res.y[-1, 0]), float(res.y[-1, 1])
            if g_end <= 0.0:
                raise SlopeUnreliable(
                    f"backward shot from xi0={xi0} reached the axis with g <= 0")
            outcome = ReachedOrigin(g_end ** (1.0 / params.m),
                                    _slope_from_state(params, g_end, dg_end))
        elif term.kind is EventKind.STATE_BOUND:
            outcome = Diverged("g exceeded ceiling")
        else:
            outcome, res2 = _resolve_vanish(params, res, rhs, events, cfg, 0.0)

    t, y, records = _merge(res, res2)
    slope_origin = outcome.slope if isinstance(outcome, ReachedOrigin) else None
    origin_g = float(y[np.argmin(t), 0]) if isinstance(outcome, ReachedOrigin) \
        else None
    maxima, minima = _extrema(params, records, origin_g, slope_origin)
    profile = _build_profile(params, t, y, BackwardShot(xi0, eps),
                             maxima, minima, xi0, slope_origin)
    return profile, outcome


def slope_fn(params: Params, xi0: float, epsilon_rel: float = EPS_REL,
             agreement_tol: float = 1e-4,
             config: Optional[IntegratorConfig] = None) -> float:
    """f'(0) of the backward shot from xi0, with a seeding-robustness check.

    The shot is repeated with the seed distance halved; the two slopes must
    agree to agreement_tol * (1 + |slope|), else SlopeUnreliable is raised.
    """
    slopes = []
    for eps in (epsilon_rel * xi0, 0.5 * epsilon_rel * xi0):
        _, outcome = shoot_backward(params, xi0, epsilon=eps, config=config,
                                    dense_dx=None, track_events=False)
        if not isinstance(outcome, ReachedOrigin):
            raise SlopeUnreliable(
                f"backward shot from xi0={xi0} did not reach the axis: {outcome}")
        slopes.append(outcome.slope)
    if abs(slopes[0] - slopes[1]) > agreement_tol * (1.0 + abs(slopes[1])):
        raise SlopeUnreliable(
            f"slope at xi0={xi0} not converged in the seed distance: "
            f"{slopes[0]} vs {slopes[1]}")
    return slopes[1]


# --------------------------------------------------------------------------
# good-profile search
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class GoodProfile:
    """A validated profile with f(0) = a > 0, f'(0) ~ 0 and an interface."""

    params: Params
    a: float
    xi0: float
    n_max: int
    slope: float
    residual: float
    profile: Profile


def count_maxima(profile: Profile) -> int:
    """Number of local maxima of f (interior dg sign changes + -> -, plus a
    flat concave start at the axis)."""
    return len(profile.maxima)


def _validate_good(params: Params, xi0: float, slope_tol: float,
                   config: Optional[IntegratorConfig]) -> GoodProfile:
    profile, outcome = shoot_backward(params, xi0, config=config,
                                      dense_dx=PROFILE_DENSE_DX,
                                      track_events=True)
    if not isinstance(outcome, ReachedOrigin):
        raise SlopeUnreliable(f"no axis contact from xi0={xi0}: {outcome}")
    if abs(outcome.slope) >= slope_tol:
        raise SlopeUnreliable(
            f"slope {outcome.slope} at xi0={xi0} above tolerance {slope_tol}")
    n_max = count_maxima(profile)
    if n_max < 1:
        raise SlopeUnreliable(f"profile at xi0={xi0} has no maximum")
    m, sigma = params.m, params.sigma
    for xi_m in profile.maxima:
        if xi_m == 0.0:
            continue
        i = profile.nearest_index(xi_m)
        lvl = (m - 1.0) * xi_m ** sigma * float(profile.f[i]) ** (m - 1.0)
        if lvl < 1.0 - 1e-6:
            raise SlopeUnreliable(
                f"maximum at xi={xi_m} falls below the equilibrium hyperbola "
                f"(level {lvl})")
    residual = integral_identity_residual(profile, float(profile.xi[-1]))
    return GoodProfile(params=params, a=outcome.f0, xi0=xi0, n_max=n_max,
                       slope=outcome.slope, residual=residual, profile=profile)


def find_good_profiles(params: Params, xi0_lo: float, xi0_hi: float,
                       grid_n: int = 33, slope_tol: float = DEFAULT_SLOPE_TOL,
                       max_depth: int = 60,
                       config: Optional[IntegratorConfig] = None
                       ) -> List[GoodProfile]:
    """Bisect every sign change of slope_fn on a uniform xi0 grid.

    Unreliable slope evaluations are dropped with a warning; roots closer
    than 1e-6 are deduplicated keeping the lower xi0.
    """
    if not 0.0 < xi0_lo < xi0_hi:
        raise ValueError("need 0 < xi0_lo < xi0_hi")
    if grid_n < 2:
        raise ValueError("grid_n must be >= 2")

    grid = np.linspace(xi0_lo, xi0_hi, grid_n)
    n_workers = _num_threads()
    if n_workers > 1:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            raw = list(pool.map(lambda x: _try_slope(params, x, config), grid))
    else:
        raw = [_try_slope(params, x, config) for x in grid]
    slopes = list(raw)
    n_bad = sum(1 for s in slopes if s is None)
    if n_bad:
        warnings.warn(f"{n_bad} unreliable slope evaluation(s) on the grid")

    roots: List[float] = []
    for x_lo, x_hi, s_lo, s_hi in zip(grid[:-1], grid[1:], slopes[:-1],
                                      slopes[1:]):
        if s_lo is None or s_hi is None or s_lo * s_hi >= 0.0:
            continue
        root = _bisect_slope(params, x_lo, x_hi, s_lo, slope_tol, max_depth,
                             config)
        if root is not None:
            roots.append(root)

    roots.sort()
    deduped: List[float] = []
    for r in roots:
        if not deduped or r - deduped[-1] > 1e-6:
            deduped.append(r)

    out: List[GoodProfile] = []
    for r in deduped:
        try:
            out.append(_validate_good(params, r, slope_tol, config))
        except SlopeUnreliable as err:
            warnings.warn(f"discarding root at xi0={r}: {err}")
    return out


def _try_slope(params: Params, xi0: float,
               config: Optional[IntegratorConfig]) -> Optional[float]:
    try:
        return slope_fn(params, xi0, config=config)
    except (SlopeUnreliable, IntegrationError):
        return None


def _bisect_slope(params: Params, x_lo: float, x_hi: float, s_lo: float,
                  slope_tol: float, max_depth: int,
                  config: Optional[IntegratorConfig]) -> Optional[float]:
    for _ in range(max_depth):
        mid = 0.5 * (x_lo + x_hi)
        s_mid = _try_slope(params, mid, config)
        if s_mid is None:
            warnings.warn(f"bisection aborted near xi0={mid}")
            return None
        if abs(s_mid) < slope_tol:
            return mid
        if (s_lo < 0.0) == (s_mid < 0.0):
            x_lo, s_lo = mid, s_mid
        else:
            x_hi = mid
    warnings.warn(f"bisection did not reach |slope| < {slope_tol} "
                  f"in {max_depth} steps on [{x_lo}, {x_hi}]")
    return None


def _num_threads() -> int:
    try:
        return max(1, int(os.environ.get("BLOWUP_NUM_THREADS", "1")))
    except ValueError:
        return 1


# --------------------------------------------------------------------------
# scans and the non-existence gap
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ScanRow:
    sigma: float
    count: int
    xi0s: Tuple[float, ...]
    n_maxs: Tuple[int, ...]
    error: Optional[str] = None


def multiplicity_scan(m: float, sigmas: Sequence[float], xi0_hi: float,
                      xi0_lo: float = 0.05, grid_dx: float = 0.5,
                      slope_tol: float = DEFAULT_SLOPE_TOL,
                      config: Optional[IntegratorConfig] = None
                      ) -> List[ScanRow]:
    """Good-profile counts per sigma over (0, xi0_hi].

    The count is a lower bound (window- and grid-limited).  Rows are sorted
    by sigma; per-sigma failures are recorded and the scan continues.
    """
    rows: List[ScanRow] = []
    for sigma in sorted(sigmas):
        try:
            params = Params(m=m, sigma=float(sigma))
            grid_n = max(9, int(np.ceil((xi0_hi - xi0_lo) / grid_dx)) + 1)
            found = find_good_profiles(params, xi0_lo, xi0_hi, grid_n=grid_n,
                                       slope_tol=slope_tol, config=config)
            rows.append(ScanRow(sigma=float(sigma), count=len(found),
                                xi0s=tuple(gp.xi0 for gp in found),
                                n_maxs=tuple(gp.n_max for gp in found)))
        except Exception as err:  # keep scanning the remaining sigmas
            rows.append(ScanRow(sigma=float(sigma), count=0, xi0s=(),
                                n_maxs=(), error=str(err)))
    return rows


@dataclass(frozen=True)
class GapBounds:
    xi_plus: float
    xi_minus: float
    sigma_threshold: float
    gap: bool


def nonexistence_gap(params: Params) -> GapBounds:
    """Shooting bounds whose ordering rules out good profiles with interface.

    xi_plus bounds (from above) the first phi-max-hyperbola crossing of any
    profile shot from the axis with flat slope; xi_minus bounds (from below)
    the last crossing of any profile shot backward from an interface.
    gap = (xi_minus > xi_plus) is equivalent to sigma^2 > 8 m^3 / (2m + 1),
    i.e. sigma > 2m sqrt(2m/(2m+1)); both routes are compared.
    """
    m, sigma = params.m, params.sigma
    if sigma <= 0.0:
        raise ValueError("the gap bounds need sigma > 0")
    xi_plus = (4.0 * m * m * (m + 1.0)
               / ((2.0 * m + 1.0) * (m - 1.0) ** 3)) ** (1.0 / (sigma + 2.0))
    xi_minus = ((m + 1.0) * sigma * sigma
                / (2.0 * m * (m - 1.0) ** 3)) ** (1.0 / (sigma + 2.0))
    threshold = 2.0 * m * np.sqrt(2.0 * m / (2.0 * m + 1.0))
    gap = sigma * sigma * (2.0 * m + 1.0) > 8.0 * m ** 3
    if (xi_minus > xi_plus) != gap and abs(xi_minus - xi_plus) > 1e-12:
        raise AssertionError(
            f"gap criteria disagree: xi-=({xi_minus}) vs xi+=({xi_plus}), "
            f"threshold test {gap}")
    return GapBounds(xi_plus=float(xi_plus), xi_minus=float(xi_minus),
                     sigma_threshold=float(threshold), gap=bool(gap))
