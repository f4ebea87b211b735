"""Extension operator: circle Fourier data to a field on the plane.

For f(theta) = sum c_n e^{i n theta}, the extended field in polar
coordinates is

    F(rho, phi) = 2 pi sum_n (-i)^n c_n J_n(rho) e^{i n phi},

sampled on a radial quadrature grid times a uniform angular grid.  The
angular grid is kept large enough that |F|^6 (degree 6N) and five-fold
products (degree 5N against one more factor) integrate exactly by the
trapezoid rule.

The L^6 mass beyond the radial cutoff is not negligible at the 1e-6 level
(|F|^6 rho ~ rho^-2), so l6_norm adds a closed-form tail: every mode is
replaced by its two-term large-rho form, organized as a polynomial in
e^{+-i rho} and 1/rho with angle-dependent coefficients, and the sixth
power is contracted against int_P^oo rho^-nu e^{i k rho} drho.
"""

from __future__ import annotations

import numpy as np

from .bessel import (RadialGrid, default_grid, exp_tail_integral,
                     first_order_coeff)
from .errors import GridSizeError, NumericalError, TailDataError
from .spectral import TAU, CircleFunction

_I_POW = np.array([1.0 + 0.0j, 0.0 + 1.0j, -1.0 + 0.0j, 0.0 - 1.0j])


def i_pow(n):
    """Exact i^n for integer arrays (table lookup, no complex power)."""
    return _I_POW[np.mod(n, 4)]


def minus_i_pow(n):
    return _I_POW[np.mod(-np.asarray(n), 4)]


def angle_count(N: int) -> int:
    """Default angular sample count for bandwidth N fields (>= 10N+2)."""
    return max(64, 10 * N + 8)


def angular_synthesize(modes: np.ndarray, J: int) -> np.ndarray:
    """Trig synthesis along the last axis; modes indexed n = -N..N."""
    modes = np.asarray(modes, dtype=np.complex128)
    N = (modes.shape[-1] - 1) // 2
    if J < 2 * N + 2:
        raise GridSizeError(f"J={J} too small for angular bandwidth {N}")
    spec = np.zeros(modes.shape[:-1] + (J,), dtype=np.complex128)
    spec[..., :N + 1] = modes[..., N:]
    spec[..., J - N:] = modes[..., :N]
    return np.fft.ifft(spec, axis=-1) * J


def angular_analyze(values: np.ndarray, M: int) -> np.ndarray:
    """Inverse of angular_synthesize: modes -M..M along the last axis."""
    values = np.asarray(values, dtype=np.complex128)
    J = values.shape[-1]
    if J < 2 * M + 2:
        raise GridSizeError(f"J={J} samples cannot resolve modes +-{M}")
    spec = np.fft.fft(values, axis=-1) / J
    out = np.empty(values.shape[:-1] + (2 * M + 1,), dtype=np.complex128)
    out[..., M:] = spec[..., :M + 1]
    out[..., :M] = spec[..., J - M:]
    return out


class ExtensionField:
    """F sampled on grid.nodes x uniform angles, with enough metadata to
    integrate its own tail.  `coeffs` may be stripped (see strip_tail), in
    which case only cutoff-limited quantities remain computable."""

    def __init__(self, grid: RadialGrid, n_angles: int, values: np.ndarray,
                 coeffs: CircleFunction | None):
        self.grid = grid
        self.n_angles = int(n_angles)
        self.angles = np.arange(self.n_angles) * (TAU / self.n_angles)
        self.values = values
        self.coeffs = coeffs
        self.N = coeffs.N if coeffs is not None else None
        self.origin_value = TAU * coeffs.coeff(0) if coeffs is not None else None

    def __repr__(self):
        return (f"ExtensionField(K={self.grid.nodes.size}, J={self.n_angles}, "
                f"N={self.N}, cutoff={self.grid.cutoff:g})")

    def tail_rep(self) -> np.ndarray:
        if self.coeffs is None:
            raise TailDataError("field was stripped of its coefficient data")
        return field_tail_rep(self.coeffs, self.n_angles, self.grid.cutoff)


def extend(f: CircleFunction, grid: RadialGrid | None = None,
           n_angles: int | None = None) -> ExtensionField:
    """Sample the extension of f on a polar grid."""
    grid = grid or default_grid()
    J = n_angles or angle_count(f.N)
    N = f.N
    n = np.arange(-N, N + 1)
    parity = np.where((n < 0) & (n % 2 != 0), -1.0, 1.0)
    factor = TAU * minus_i_pow(n) * parity * f.coeffs          # (2N+1,)
    jm = grid.j_matrix(N)                                      # (N+1, K)
    modes = factor[None, :] * jm[np.abs(n)].T                  # (K, 2N+1)
    values = angular_synthesize(modes, J)
    return ExtensionField(grid, J, values, f)


def strip_tail(field: ExtensionField) -> ExtensionField:
    """Copy of the field without coefficient metadata (samples only)."""
    return ExtensionField(field.grid, field.n_angles, field.values, None)


# ---------------------------------------------------------------------------
# tail representations: polynomials in (e^{+-i rho}, 1/rho) over angles
# ---------------------------------------------------------------------------

def field_tail_rep(f: CircleFunction, J: int, P: float) -> np.ndarray:
    """Large-rho form of the field as an array T[j, k, p], k in {-1,0,+1},
    p in {0,1}:

        F(rho,phi_j) ~ sqrt(2/pi) rho^{-1/2} sum_{k,p} T[j,k,p] e^{ik rho} rho^{-p}.

    Only k = +-1 occur.  The first-order slot of a mode is zeroed when its
    a_n exceeds P (factor-local validity rule shared with bessel tails).
    """
    N = f.N
    n = np.arange(-N, N + 1)
    an = np.abs(n)
    parity = np.where((n < 0) & (n % 2 != 0), -1.0, 1.0)
    base = np.pi * minus_i_pow(n) * parity * f.coeffs          # TAU/2 per cosine half
    phase = np.exp(-1j * (an * (np.pi / 2.0) + np.pi / 4.0))
    a_eff = first_order_coeff(an, 1.0, P)
    u = base * phase
    v = base * np.conj(phase)
    w = u * (1j * a_eff)
    y = v * (-1j * a_eff)
    T = np.zeros((J, 3, 2), dtype=np.complex128)
    T[:, 2, 0] = angular_synthesize(u, J)
    T[:, 0, 0] = angular_synthesize(v, J)
    T[:, 2, 1] = angular_synthesize(w, J)
    T[:, 0, 1] = angular_synthesize(y, J)
    return T


def hpoly_mul(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Multiply two (J, 2k+1, 2) harmonic polynomials, truncating rho^-2."""
    J, na, _ = A.shape
    nb = B.shape[1]
    C = np.zeros((J, na + nb - 1, 2), dtype=np.complex128)
    for i in range(na):
        for q in range(2):
            a = A[:, i, q]
            if not a.any():
                continue
            for j in range(nb):
                for r in range(2):
                    if q + r > 1:
                        continue
                    b = B[:, j, r]
                    if not b.any():
                        continue
                    C[:, i + j, q + r] += a * b
    return C


def hpoly_conj(A: np.ndarray) -> np.ndarray:
    """Complex conjugate of the represented function (k axis flips)."""
    return np.conj(A[:, ::-1, :])


def l6_norm(field: ExtensionField) -> float:
    """|| F ||_{L^6(R^2)} from the polar samples plus the closed-form tail."""
    if field.coeffs is None:
        raise TailDataError(
            "l6_norm needs the field's coefficient data for its radial tail")
    grid = field.grid
    J = field.n_angles
    a6 = np.abs(field.values) ** 6
    quad = float(np.dot(grid.weights * grid.nodes, a6.sum(axis=1)) * (TAU / J))

    T1 = field.tail_rep()
    F3 = hpoly_mul(hpoly_mul(T1, T1), T1)
    H = hpoly_mul(F3, hpoly_conj(F3))                  # (J, 13, 2), k = -6..6
    mean = H.sum(axis=0) * (TAU / J)                   # angular integral
    k = np.arange(-6, 7)
    i2 = exp_tail_integral(k, 2.0, grid.cutoff)
    i3 = exp_tail_integral(k, 3.0, grid.cutoff)
    tail = (2.0 / np.pi) ** 3 * float(
        np.sum(mean[:, 0] * i2).real + np.sum(mean[:, 1] * i3).real)
    total = quad + tail
    if total < 0:
        raise NumericalError(f"negative sixth-power mass {total:.3e}")
    return total ** (1.0 / 6.0)


class DecayReport:
    """sup_{rho >= rho_min} rho^{1/2} max_phi |F| and where it is attained."""

    def __init__(self, sup: float, at_rho: float, rho_min: float):
        self.sup = sup
        self.at_rho = at_rho
        self.rho_min = rho_min
        self.envelope = sup / TAU          # comparable to sqrt(2/pi) per unit c_0

    def __repr__(self):
        return (f"DecayReport(sup={self.sup:.6g} at rho={self.at_rho:.3f}, "
                f"envelope={self.envelope:.6g})")


def decay_check(field: ExtensionField, rho_min: float = 10.0) -> DecayReport:
    nodes = field.grid.nodes
    sel = nodes >= rho_min
    if not np.any(sel):
        raise GridSizeError(f"no grid nodes beyond rho_min={rho_min}")
    prof = np.sqrt(nodes[sel]) * np.abs(field.values[sel]).max(axis=1)
    i = int(np.argmax(prof))
    return DecayReport(float(prof[i]), float(nodes[sel][i]), rho_min)
