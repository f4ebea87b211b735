"""Extremizer search and the contraction-iteration laboratory.

The search maximizes Phi on the unit L^2 sphere at fixed bandwidth.  The
gradient of Phi in conj(c_m) is proportional to Q(f,f,f,f~,f~)_m, so the
ascent is a damped nonlinear power iteration: blend toward the normalized
band-limited Q, keep the step only if Phi does not decrease.

The iteration lab rebuilds a near-extremizer tail as a fixed point.  With
f = phi + g normalized to lambda = 1, expanding Q(phi+h, ..) by
multilinearity splits into the h-independent-plus-known-linear part L and
the remaining nine classes N(phi, h); h = L + N(phi, h) has g as a fixed
point, and for small tails the map contracts.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field as dfield

import numpy as np

from .bessel import RadialGrid, default_grid
from .errors import ConfigError, DivergenceError, PreconditionError
from .quintic import el_quintic, quintic_convolve
from .spectral import (TAU, CircleFunction, conjugate_reflect, inner_product,
                       l2_norm, random_function, weighted_norm)


def _normalized(f: CircleFunction) -> CircleFunction:
    nrm = l2_norm(f)
    if nrm == 0:
        raise ConfigError("cannot normalize the zero function")
    return f * (1.0 / nrm)


@dataclass
class AscentConfig:
    n: int = 16
    max_iter: int = 500
    step: float = 1.0            # initial blend toward the power direction
    min_step: float = 1e-7
    tol: float = 1e-15           # relative Phi increment considered converged
    flat_iters: int = 8          # keep power-stepping this long on the plateau
    seed: int | None = 0
    start_decay: float = 1.0


@dataclass
class AscentResult:
    f: CircleFunction
    phi: float
    quotient: float
    lambda_fit: float
    iterations: int
    converged: bool
    trace: list = dfield(default_factory=list)

    def __repr__(self):
        return (f"AscentResult(quotient={self.quotient:.10g}, "
                f"iters={self.iterations}, converged={self.converged})")


def ascend(f0: CircleFunction | None = None,
           config: AscentConfig | None = None,
           grid: RadialGrid | None = None) -> AscentResult:
    """Monotone projected ascent of Phi on the unit sphere at bandwidth n."""
    cfg = config or AscentConfig()
    grid = grid or default_grid()
    if f0 is None:
        f0 = random_function(cfg.n, cfg.seed, decay=cfg.start_decay)
    f = _normalized(f0.padded(cfg.n) if f0.N < cfg.n else f0.truncated(cfg.n))

    Q = el_quintic(f, grid)
    phi = inner_product(Q, f).real
    step = cfg.step
    trace = []
    converged = False
    flat_count = 0
    it = 0
    for it in range(1, cfg.max_iter + 1):
        d = _normalized(Q.truncated(cfg.n))
        accepted = False
        while step >= cfg.min_step:
            trial = _normalized(f * (1.0 - step) + d * step)
            Qt = el_quintic(trial, grid)
            phit = inner_product(Qt, trial).real
            if phit >= phi:
                gain = (phit - phi) / (abs(phi) + 1e-300)
                f, phi, Q = trial, phit, Qt
                step = min(1.0, 2.0 * step)
                accepted = True
                break
            step *= 0.5
        trace.append({"iter": it, "phi": phi,
                      "quotient": (TAU ** 2 * phi) ** (1.0 / 6.0),
                      "step": step, "accepted": accepted})
        if not accepted:
            converged = True          # no uphill left along the power direction
            break
        if gain < cfg.tol:
            flat_count += 1
            # Phi flattens quadratically before the iterate settles linearly,
            # so ride the plateau a while: each extra power step still cuts
            # the distance to the critical point by the spectral-gap factor.
            if flat_count >= cfg.flat_iters:
                converged = True
                break
        else:
            flat_count = 0
    quot = (TAU ** 2 * phi) ** (1.0 / 6.0)        # ||f|| = 1 throughout
    return AscentResult(f=f, phi=float(phi), quotient=float(quot),
                        lambda_fit=float(phi), iterations=it,
                        converged=converged, trace=trace)


# ---------------------------------------------------------------------------
# sharp/tail decomposition and the fixed-point iteration
# ---------------------------------------------------------------------------

def decompose(f: CircleFunction, eps: float):
    """Split f = phi + g at the smallest K with ||f - f_{<=K}||_2 < eps.

    Returns (phi, g, K).  Warns when K = 0: the low part carries only the
    mean, which usually means eps was chosen larger than the whole tail.
    """
    if eps <= 0:
        raise ConfigError("eps must be positive")
    N = f.N
    p2 = TAU * np.abs(f.coeffs) ** 2
    tail = np.zeros(N + 1)
    for K in range(N):                      # tail mass strictly above K
        sel = np.arange(-N, N + 1)
        tail[K] = p2[np.abs(sel) > K].sum()
    K = int(np.searchsorted(-tail, -eps * eps, side="right"))
    K = min(K, N)
    while K < N and tail[K] >= eps * eps:   # guard against float ties
        K += 1
    if K == 0:
        warnings.warn("decompose: eps exceeds the whole tail; phi is the mean",
                      stacklevel=2)
    phi = f.truncated(K)
    g = f - phi.padded(N)
    return phi, g, K


def linear_part(phi: CircleFunction, g: CircleFunction,
                grid: RadialGrid | None = None) -> CircleFunction:
    """L(phi, g): the h-independent part of the expanded fixed-point map.

    Q(phi,phi,phi,phi~,phi~) - phi + 2 Q(phi,phi,phi,phi~,g~)
                             + 3 Q(phi,phi,g,phi~,phi~).
    """
    grid = grid or default_grid()
    tp = conjugate_reflect(phi)
    tg = conjugate_reflect(g)

    def q(a, b, c, d, e):
        return quintic_convolve([a, b, c, d, e], grid=grid, method="polar")

    return (q(phi, phi, phi, tp, tp) - phi
            + 2.0 * q(phi, phi, phi, tp, tg)
            + 3.0 * q(phi, phi, g, tp, tp))


def nonlinear_part(phi: CircleFunction, h: CircleFunction,
                   grid: RadialGrid | None = None) -> CircleFunction:
    """N(phi, h): the nine remaining classes of Q(phi+h, .., (phi+h)~, ..),
    at least quadratic in h (binomial weights 3-choose-a times 2-choose-b)."""
    grid = grid or default_grid()
    tp = conjugate_reflect(phi)
    th = conjugate_reflect(h)

    def q(a, b, c, d, e):
        return quintic_convolve([a, b, c, d, e], grid=grid, method="polar")

    return (q(phi, phi, phi, th, th)
            + 6.0 * q(phi, phi, h, tp, th)
            + 3.0 * q(phi, h, h, tp, tp)
            + 3.0 * q(phi, phi, h, th, th)
            + 6.0 * q(phi, h, h, tp, th)
            + q(h, h, h, tp, tp)
            + 3.0 * q(phi, h, h, th, th)
            + 2.0 * q(h, h, h, tp, th)
            + q(h, h, h, th, th))


def expansion_residual(phi: CircleFunction, g: CircleFunction,
                       grid: RadialGrid | None = None) -> float:
    """Relative error of L(phi,g) + N(phi,g) + phi against Q(f,..) at
    f = phi + g: a pure bookkeeping identity, so this measures arithmetic."""
    grid = grid or default_grid()
    f = phi + g
    lhs = linear_part(phi, g, grid) + nonlinear_part(phi, g, grid) + phi
    tf = conjugate_reflect(f)
    rhs = quintic_convolve([f, f, f, tf, tf], grid=grid, method="polar")
    num = l2_norm(lhs - rhs)
    den = l2_norm(rhs) + 1e-300
    return float(num / den)


@dataclass
class PicardReport:
    eps: float
    K: int
    s_norm: float
    lambda_used: float
    iterations: int
    converged: bool
    ratios_l2: list
    ratios_s: list
    h_minus_g_l2: float
    h_norm: float
    ball_radius: float
    inside_ball: bool
    step_sizes: list

    @property
    def max_ratio(self):
        return max(self.ratios_l2[1:], default=np.nan)


def picard_iterate(f: CircleFunction, eps: float,
                   grid: RadialGrid | None = None,
                   max_iter: int = 60, tol: float = 1e-11,
                   s_norm: float = 0.5) -> PicardReport:
    """Rebuild the tail of a near-extremizer as a fixed point.

    f is rescaled to lambda_fit = 1 (fifth-degree homogeneity: f * lam^{-1/4}),
    split by `decompose`, and iterated h <- L(phi,g) + N(phi,h) from
    h_0 = L(phi,g).  Per-step contraction ratios are recorded in L^2 and in
    the (1+n^2)^{s/2} weighted norm; the iterate diverging past 10x its
    starting size raises DivergenceError.
    """
    from .variational import el_residual          # deferred: avoid cycle
    grid = grid or default_grid()
    rep = el_residual(f, grid=grid)
    lam = rep.lambda_fit
    if lam <= 0:
        raise PreconditionError(f"lambda_fit = {lam:.3e} is not positive")
    fs = f * lam ** -0.25
    phi, g, K = decompose(fs, eps)
    if K == fs.N:
        warnings.warn("picard_iterate: split left no tail; iteration is trivial",
                      stacklevel=2)

    # The lab works in the band-limited space of f: every iterate is cut
    # back to bandwidth N, where g itself lives and where the fixed-point
    # identity holds up to the ascent residual.
    Nf = fs.N
    L = linear_part(phi, g, grid).truncated(Nf)
    h = L
    h0_norm = l2_norm(h)
    ball = eps ** 0.75
    limit = 10.0 * max(h0_norm, ball)
    steps = []
    ratios_l2 = []
    ratios_s = []
    prev_step = None
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        h_next = (L + nonlinear_part(phi, h, grid)).truncated(Nf)
        d = h_next - h
        step_l2 = l2_norm(d)
        step_s = weighted_norm(d, s_norm)
        steps.append(step_l2)
        if prev_step is not None:
            ratios_l2.append(step_l2 / (prev_step[0] + 1e-300))
            ratios_s.append(step_s / (prev_step[1] + 1e-300))
        prev_step = (step_l2, step_s)
        h = h_next
        if l2_norm(h) > limit:
            raise DivergenceError(
                f"iterate grew to {l2_norm(h):.3e} (> 10x initial scale)")
        if step_l2 < tol:
            converged = True
            break
    diff = l2_norm(h - g)
    return PicardReport(
        eps=eps, K=K, s_norm=s_norm, lambda_used=float(lam),
        iterations=it, converged=converged,
        ratios_l2=[float(r) for r in ratios_l2],
        ratios_s=[float(r) for r in ratios_s],
        h_minus_g_l2=float(diff), h_norm=float(l2_norm(h)),
        ball_radius=float(ball), inside_ball=bool(l2_norm(h) <= ball),
        step_sizes=[float(s) for s in steps])
