"""Numerical geodesic flows: Schrödinger evolution, coefficient flows, the
relativistic proper-time packet, and the hydrogen-like radial spectrum."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

ALPHA = 7.2973525693e-3


class FlowError(ValueError):
    pass


class DomainError(FlowError):
    """Parameters outside the region where the closed forms exist."""


class BracketError(FlowError):
    pass


class AccuracyWarning(UserWarning):
    pass


class CFLWarning(UserWarning):
    pass


class BoundaryWarning(UserWarning):
    pass


# ---------------------------------------------------------------- containers

@dataclass(frozen=True)
class Grid:
    L: float
    N: int

    def __post_init__(self):
        if self.N < 16 or self.N & (self.N - 1):
            raise FlowError(f"grid size must be a power of two >= 16, got {self.N}")
        if not self.L > 0:
            raise FlowError("grid half-width must be positive")

    @property
    def dx(self) -> float:
        return 2.0 * self.L / self.N

    @property
    def x(self) -> np.ndarray:
        return -self.L + self.dx * np.arange(self.N)

    def k(self, hbar: float = 1.0) -> np.ndarray:
        """Momentum values p = hbar*k in FFT order."""
        return hbar * 2.0 * np.pi * np.fft.fftfreq(self.N, self.dx)


@dataclass
class WaveFunction:
    grid: Grid
    psi: np.ndarray

    def __post_init__(self):
        self.psi = np.asarray(self.psi, dtype=complex)
        if self.psi.shape != (self.grid.N,):
            raise FlowError("wave function does not match grid")
        if not np.all(np.isfinite(self.psi)):
            raise FlowError("wave function has non-finite entries")

    def norm(self) -> float:
        return float(np.sum(np.abs(self.psi) ** 2) * self.grid.dx)

    def normalized(self) -> "WaveFunction":
        return WaveFunction(self.grid, self.psi / math.sqrt(self.norm()))


@dataclass
class TimeSeries:
    param: str
    values: np.ndarray
    channels: Dict[str, np.ndarray] = field(default_factory=dict)
    meta: Dict[str, object] = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.size > 1 and not np.all(np.diff(self.values) > 0):
            raise FlowError("parameter axis must be increasing")

    def __getitem__(self, name: str) -> np.ndarray:
        if name == self.param:
            return self.values
        return self.channels[name]

    def columns(self) -> List[str]:
        return [self.param] + list(self.channels)

    def rows(self):
        cols = [self.values] + [self.channels[c] for c in self.channels]
        return np.column_stack(cols)


def coherent_state(grid: Grid, x0: float = 0.0, p0: float = 0.0, m: float = 1.0, nu: float = 1.0,
                   hbar: float = 1.0) -> WaveFunction:
    """Displaced oscillator ground state."""
    x = grid.x
    s = hbar / (m * nu)
    psi = np.exp(-((x - x0) ** 2) / (2 * s) + 1j * p0 * x / hbar)
    return WaveFunction(grid, psi).normalized()


# ---------------------------------------------------------------- Schrödinger flow

def _moments(psi: np.ndarray, x: np.ndarray, p: np.ndarray, dx: float):
    rho = np.abs(psi) ** 2
    norm = rho.sum() * dx
    phi = np.fft.fft(psi)
    ppsi = np.fft.ifft(p * phi)
    ex = float((x * rho).sum() * dx)
    ep = float(np.real(np.vdot(psi, ppsi)) * dx)
    ep2 = float(np.real(np.vdot(ppsi, ppsi)) * dx)
    exp = float(2.0 * np.real(np.vdot(psi, x * ppsi)) * dx)
    return ex, ep, ep2, exp, float(norm)


def sho_evolve(nu: float, m: float, hbar: float, grid: Grid, dt: float, steps: int,
               psi0: WaveFunction, potential: Optional[Callable[[np.ndarray], np.ndarray]] = None,
               record_every: int = 1, order: str = "kvk") -> TimeSeries:
    """Strang split-step evolution of i hbar psi_t = h psi with h = p^2/2m + V.

    ``order`` picks the symmetric splitting: ``"kvk"`` takes half kinetic
    steps around a full potential step, ``"vkv"`` the reverse.
    """
    if order not in ("kvk", "vkv"):
        raise FlowError("order must be 'kvk' or 'vkv'")
    if not dt > 0:
        raise FlowError("dt must be positive")
    if abs(psi0.norm() - 1.0) > 1e-10:
        raise FlowError("initial state must be normalized")
    x, p = grid.x, grid.k(hbar)
    V = potential(x) if potential is not None else 0.5 * m * nu ** 2 * x ** 2
    kin = p ** 2 / (2 * m)
    if dt * float(kin.max()) / hbar > math.pi:
        warnings.warn("kinetic phase per step exceeds pi at the grid cutoff", CFLWarning, stacklevel=2)
    if order == "vkv":
        outer = np.exp(-0.5j * dt * V / hbar)
        inner = np.exp(-1j * dt * kin / hbar)

        def step(psi):
            return outer * np.fft.ifft(inner * np.fft.fft(outer * psi))
    else:
        outer = np.exp(-0.5j * dt * kin / hbar)
        inner = np.exp(-1j * dt * V / hbar)

        def step(psi):
            return np.fft.ifft(outer * np.fft.fft(inner * np.fft.ifft(outer * np.fft.fft(psi))))
    psi = psi0.psi.copy()
    rows = [_moments(psi, x, p, grid.dx)]
    ts = [0.0]
    for n in range(1, steps + 1):
        psi = step(psi)
        if n % record_every == 0 or n == steps:
            rows.append(_moments(psi, x, p, grid.dx))
            ts.append(n * dt)
    arr = np.array(rows)
    names = ("x", "p", "p2", "xp_px", "norm")
    series = TimeSeries("t", np.array(ts), {k: arr[:, i] for i, k in enumerate(names)},
                        {"nu": nu, "m": m, "hbar": hbar, "dt": dt * record_every,
                         "L": grid.L, "N": grid.N, "order": order})
    series.meta["final_state"] = WaveFunction(grid, psi)
    return series


@dataclass
class DexpdtResult:
    max_residual: float
    scale: float
    relative: bool
    lhs: np.ndarray
    rhs: np.ndarray


def check_dexpdt(series: TimeSeries, m: Optional[float] = None, nu: Optional[float] = None) -> DexpdtResult:
    """Compare a central difference of <p^2> with -m nu^2 <xp+px>.

    The residual is the max absolute mismatch over the interior samples divided
    by the max of |rhs|; it falls back to the absolute value when rhs vanishes.
    """
    m = series.meta["m"] if m is None else m
    nu = series.meta["nu"] if nu is None else nu
    t = series.values
    p2 = series["p2"]
    h = np.diff(t)
    if not np.allclose(h, h[0], rtol=1e-9, atol=0):
        raise FlowError("series must be uniformly sampled")
    lhs = (p2[2:] - p2[:-2]) / (2 * h[0])
    rhs = -m * nu ** 2 * series["xp_px"][1:-1]
    scale = float(np.max(np.abs(rhs)))
    err = float(np.max(np.abs(lhs - rhs)))
    if scale > 1e-12:
        return DexpdtResult(err / scale, scale, True, lhs, rhs)
    return DexpdtResult(err, scale, False, lhs, rhs)


def norm_drift(series: TimeSeries) -> float:
    n = series["norm"]
    return float(np.max(np.abs(n - n[0])))


def ehrenfest_reference(x0: float, p0: float, m: float, nu: float, t: np.ndarray, dt: float = 1e-3):
    """RK4 integration of d<x>/dt = <p>/m, d<p>/dt = -m nu^2 <x>, sampled at ``t``."""
    def f(y):
        return np.array([y[1] / m, -m * nu ** 2 * y[0]])
    y = np.array([x0, p0], dtype=float)
    out = np.empty((len(t), 2))
    cur = 0.0
    for i, target in enumerate(t):
        while cur < target - 1e-15:
            h = min(dt, target - cur)
            k1 = f(y)
            k2 = f(y + 0.5 * h * k1)
            k3 = f(y + 0.5 * h * k2)
            k4 = f(y + h * k3)
            y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            cur += h
        out[i] = y
    return out


# ---------------------------------------------------------------- coefficient flows

def _rk4_matrix(M: np.ndarray, dt: float) -> np.ndarray:
    A = dt * M
    P = np.eye(len(M), dtype=complex)
    term = np.eye(len(M), dtype=complex)
    for j in range(1, 5):
        term = term @ A / j
        P = P + term
    return P


def anti_heisenberg_evolve(chi0: complex, psi0: complex, nu: float, m: float, kappa: float,
                           dt: float, steps: int) -> TimeSeries:
    """RK4 for a_t = chi x + psi p under chi' = m nu^2 psi - kappa chi, psi' = -chi/m - kappa psi."""
    M = np.array([[-kappa, m * nu ** 2], [-1.0 / m, -kappa]], dtype=complex)
    P = _rk4_matrix(M, dt)
    state = np.empty((steps + 1, 2), dtype=complex)
    state[0] = (chi0, psi0)
    for i in range(steps):
        state[i + 1] = P @ state[i]
    t = dt * np.arange(steps + 1)
    chi, psi = state[:, 0], state[:, 1]
    dchi = m * nu ** 2 * psi - kappa * chi
    return TimeSeries("t", t, {
        "chi_re": chi.real, "chi_im": chi.imag,
        "psi_re": psi.real, "psi_im": psi.imag,
        "dchi_re": dchi.real, "dchi_im": dchi.imag,
    }, {"nu": nu, "m": m, "kappa": kappa, "dt": dt})


def _complex(series: TimeSeries, name: str) -> np.ndarray:
    return series[name + "_re"] + 1j * series[name + "_im"]


def anti_heisenberg_closed_form(chi0: complex, psi0: complex, nu: float, m: float, kappa: float,
                                t: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """The system matrix is -kappa I plus a rotation generator, so the flow is damped SHM."""
    damp = np.exp(-kappa * t)
    c, s = np.cos(nu * t), np.sin(nu * t)
    chi = damp * (chi0 * c + psi0 * m * nu * s)
    psi = damp * (psi0 * c - chi0 / (m * nu) * s) if nu != 0 else damp * (psi0 - chi0 * t / m)
    return chi, psi


def damped_identity_residual(series: TimeSeries) -> float:
    """Max of |chi'' + (kappa^2 + nu^2) chi + 2 kappa chi'| relative to the size of chi.

    chi'' is a central difference of the sampled chi', so the check does not
    reuse the second-order equation being tested.
    """
    nu, kappa = series.meta["nu"], series.meta["kappa"]
    dt = series.meta["dt"]
    chi = _complex(series, "chi")
    dchi = _complex(series, "dchi")
    ddchi = (dchi[2:] - dchi[:-2]) / (2 * dt)
    res = ddchi + (kappa ** 2 + nu ** 2) * chi[1:-1] + 2 * kappa * dchi[1:-1]
    scale = max(float(np.max(np.abs(chi))), 1e-300)
    if float(np.max(np.abs(chi))) == 0.0:
        return float(np.max(np.abs(res)))
    return float(np.max(np.abs(res)) / scale)


def anti_heisenberg_invariant(series: TimeSeries) -> np.ndarray:
    m, nu = series.meta["m"], series.meta["nu"]
    chi = _complex(series, "chi")
    psi = _complex(series, "psi")
    return np.abs(chi) ** 2 / (2 * m) + m * nu ** 2 * np.abs(psi) ** 2 / 2


def oscillator_hamiltonian(levels: int, nu: float = 1.0, m: float = 1.0, hbar: float = 1.0) -> np.ndarray:
    """h = p^2/2m + m nu^2 x^2/2 built from ladder operators in a padded basis, then truncated."""
    big = levels + 2
    a = np.diag(np.sqrt(np.arange(1, big)), 1).astype(complex)
    ad = a.conj().T
    x = math.sqrt(hbar / (2 * m * nu)) * (a + ad)
    p = 1j * math.sqrt(hbar * m * nu / 2) * (ad - a)
    h = p @ p / (2 * m) + 0.5 * m * nu ** 2 * (x @ x)
    return h[:levels, :levels]


@dataclass
class PhaseReport:
    times: np.ndarray
    diagonal: np.ndarray
    phase: np.ndarray
    expected: np.ndarray
    magnitude: np.ndarray
    max_rel_error: float
    boundary_flag: bool
    final: np.ndarray


def nonstandard_flow_evolve(a0: np.ndarray, nu: float = 1.0, steps: int = 2000, dt: float = 5e-3,
                            m: float = 1.0, hbar: float = 1.0) -> PhaseReport:
    """RK4 for a' = (h / i hbar) a in the truncated oscillator basis.

    ``phase[:, n]`` is the angle phi with <n|a_t|n> = exp(-i phi) <n|a_0|n>,
    i.e. the clockwise rotation accumulated by each diagonal entry.
    """
    a0 = np.asarray(a0, dtype=complex)
    N = a0.shape[0]
    if a0.shape != (N, N) or N < 8:
        raise FlowError("a0 must be a square matrix with at least 8 levels")
    total = float(np.sum(np.abs(a0) ** 2))
    edge = float(np.sum(np.abs(a0[-2:, :]) ** 2) + np.sum(np.abs(a0[:-2, -2:]) ** 2))
    flag = total > 0 and edge / total > 1e-6
    if flag:
        warnings.warn("a0 occupies the top two truncated levels", BoundaryWarning, stacklevel=2)
    gen = oscillator_hamiltonian(N, nu, m, hbar) / (1j * hbar)
    P = _rk4_matrix(gen, dt)
    a = a0.copy()
    diag = np.empty((steps + 1, N), dtype=complex)
    diag[0] = np.diag(a)
    for i in range(steps):
        a = P @ a
        diag[i + 1] = np.diag(a)
    t = dt * np.arange(steps + 1)
    d0 = diag[0]
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(np.abs(d0) > 0, diag / np.where(d0 == 0, 1, d0), np.nan)
    phase = -np.unwrap(np.angle(ratio), axis=0)
    expected = np.outer(t, (np.arange(N) + 0.5) * nu)
    mask = (np.abs(d0) > 0)[None, :] & (t[:, None] > 0)
    rel = np.abs(phase - expected) / np.where(expected == 0, 1, np.abs(expected))
    err = float(np.max(rel[mask])) if mask.any() else 0.0
    return PhaseReport(t, diag, phase, expected, np.abs(diag), err, flag, a)


# ---------------------------------------------------------------- relativistic packet

@dataclass(frozen=True)
class PacketConfig:
    u: float = 1.1
    beta: float = 0.5
    m: float = 1.0
    c: float = 1.0
    hbar: float = 1.0
    widths: float = 12.0
    nk: int = 1201
    s_max: float = 5.0
    ns: int = 51
    x_min: float = -15.0
    x_max: float = 20.0
    nx: int = 351

    def __post_init__(self):
        if not self.u > self.m * self.c ** 2:
            raise DomainError("a propagating packet needs u > m c^2")
        if not self.beta > 0:
            raise DomainError("beta must be positive")
        if self.nk < 3 or self.ns < 2 or self.nx < 2:
            raise FlowError("sample counts too small")

    @property
    def k0(self) -> float:
        return math.sqrt(self.u ** 2 - self.m ** 2 * self.c ** 4) / self.c

    @property
    def sigma_k(self) -> float:
        """Standard deviation of the Gaussian amplitude in k."""
        return math.sqrt(self.beta / 2.0) / self.c

    def k_grid(self) -> np.ndarray:
        half = 0.5 * self.widths * self.sigma_k
        return np.linspace(self.k0 - half, self.k0 + half, self.nk)

    def s_grid(self) -> np.ndarray:
        return np.linspace(0.0, self.s_max, self.ns)

    def x_grid(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.nx)


@dataclass
class PacketResult:
    config: PacketConfig
    s: np.ndarray
    x: np.ndarray
    psi: np.ndarray
    series: TimeSeries
    fits: Dict[str, Dict[str, float]]

    @property
    def momentum(self) -> float:
        return float(np.mean(self.series["p"]))

    @property
    def time_slope(self) -> float:
        return self.fits["t"]["slope"]

    @property
    def velocity(self) -> float:
        return self.fits["x"]["slope"] / self.fits["t"]["slope"]


def affine_fit(s: np.ndarray, y: np.ndarray) -> Dict[str, float]:
    A = np.column_stack([s, np.ones_like(s)])
    (slope, intercept), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - (slope * s + intercept)
    return {"slope": float(slope), "intercept": float(intercept), "max_residual": float(np.max(np.abs(resid)))}


def packet_amplitude(cfg: PacketConfig, k: np.ndarray, s: float) -> np.ndarray:
    """Momentum-space amplitude at proper time s (Gaussian envelope times the flow phase)."""
    env = np.exp(-((cfg.c * k - cfg.c * cfg.k0) ** 2) / cfg.beta)
    phase = s * (cfg.u ** 2 - k ** 2 * cfg.c ** 2) / (cfg.hbar * 2 * cfg.m * cfg.c ** 2)
    return env * np.exp(1j * phase)


def packet_evolve(cfg: PacketConfig = PacketConfig()) -> PacketResult:
    """Quadrature over k for Psi(s, x) and for the expectation values.

    x and t act on the integrand as -i hbar d/dk and -i hbar d/du; both
    derivatives are taken analytically from the Gaussian-times-phase form.
    """
    k = cfg.k_grid()
    dk = k[1] - k[0]
    if cfg.widths < 8:
        warnings.warn("k-grid spans fewer than 8 Gaussian widths", AccuracyWarning, stacklevel=2)
    x = cfg.x_grid()
    reach = max(abs(cfg.x_min), abs(cfg.x_max))
    if 2 * math.pi * cfg.hbar / dk < 2 * reach:
        warnings.warn("k spacing aliases the requested x range", AccuracyWarning, stacklevel=2)
    if cfg.sigma_k * dk ** -1 < 4:
        warnings.warn("k spacing under-resolves the Gaussian envelope", AccuracyWarning, stacklevel=2)

    s_vals = cfg.s_grid()
    K = cfg.c * cfg.k0
    env = np.exp(-((cfg.c * k - K) ** 2) / cfg.beta)
    w = env ** 2
    W = w.sum()
    kernel = np.exp(1j * np.outer(k, x) / cfg.hbar) * dk
    psi = np.empty((len(s_vals), len(x)), dtype=complex)
    ch = {n: np.empty(len(s_vals)) for n in ("p", "x", "t", "t_imag", "norm")}
    # d(log env)/du; K depends on u through sqrt(u^2 - m^2 c^4)
    dlog_env_du = 2 * (cfg.c * k - K) / cfg.beta * (cfg.u / K)
    for i, s in enumerate(s_vals):
        amp = packet_amplitude(cfg, k, s)
        psi[i] = amp @ kernel
        dtheta_dk = -s * k / (cfg.hbar * cfg.m)
        dtheta_du = s * cfg.u / (cfg.hbar * cfg.m * cfg.c ** 2)
        ch["p"][i] = float((w * k).sum() / W)
        # <x> = sum conj(a) (i hbar d/dk) a / sum |a|^2 ; the envelope part is odd and drops
        ch["x"][i] = float((w * (-cfg.hbar * dtheta_dk)).sum() / W)
        t_val = (w * (cfg.hbar * dtheta_du - 1j * cfg.hbar * dlog_env_du)).sum() / W
        ch["t"][i] = float(t_val.real)
        ch["t_imag"][i] = float(t_val.imag)
        ch["norm"][i] = float(W * dk)
    series = TimeSeries("s", s_vals, ch, {"u": cfg.u, "beta": cfg.beta})
    fits = {name: affine_fit(s_vals, ch[name]) for name in ("x", "t", "p")}
    return PacketResult(cfg, s_vals, x, psi, series, fits)


def position_space_mean(result: PacketResult) -> np.ndarray:
    """<x>(s) from |Psi(s, x)|^2 on the x grid, an independent route to the k-space value."""
    rho = np.abs(result.psi) ** 2
    return (rho * result.x).sum(axis=1) / rho.sum(axis=1)


def packet_width(result: PacketResult) -> np.ndarray:
    rho = np.abs(result.psi) ** 2
    mean = position_space_mean(result)
    var = (rho * (result.x[None, :] - mean[:, None]) ** 2).sum(axis=1) / rho.sum(axis=1)
    return np.sqrt(var)


# ---------------------------------------------------------------- hydrogen-like spectrum

@dataclass(frozen=True)
class HydrogenConfig:
    Z: float = 1.0
    n: int = 1
    l: int = 0
    u: Optional[float] = 1.0
    onshell: bool = False
    alpha: float = ALPHA
    m: float = 1.0
    c: float = 1.0
    hbar: float = 1.0

    def __post_init__(self):
        if not (0 <= self.l < self.n):
            raise DomainError(f"need 0 <= l < n, got n={self.n}, l={self.l}")
        if not self.Z >= 0:
            raise DomainError("Z must be non-negative")
        if self.Z * self.alpha * 2 >= 1:
            raise DomainError(f"Z={self.Z} is supercritical: need Z < 1/(2 alpha) = {0.5 / self.alpha:.6g}")
        if not self.onshell and (self.u is None or not self.u > 0):
            raise DomainError("u must be positive unless on-shell is requested")

    def energy_parameter(self) -> float:
        if self.onshell:
            return onshell_u(self.Z, self.n, self.l, self.alpha, self.m, self.c)
        return float(self.u)


def hydrogen_delta_l(Z: float, l: int, alpha: float = ALPHA) -> float:
    za2 = (Z * alpha) ** 2
    lh = l + 0.5
    disc = lh * lh - za2
    if disc <= 0:
        raise DomainError(f"no real l' for Z={Z}, l={l}: Z^2 alpha^2 >= (l+1/2)^2")
    # stable form of l + 1/2 - sqrt(...)
    return za2 / (lh + math.sqrt(disc))


def _effective_n(Z, n, l, alpha):
    if not 0 <= l < n:
        raise DomainError(f"need 0 <= l < n, got n={n}, l={l}")
    return n - hydrogen_delta_l(Z, l, alpha)


def hydrogen_energy(Z: float, n: int, l: int, u: float, alpha: float = ALPHA, m: float = 1.0,
                    c: float = 1.0) -> float:
    ne = _effective_n(Z, n, l, alpha)
    return u ** 2 / (2 * m * c ** 2) * (1 + (Z * alpha / ne) ** 2)


def onshell_u(Z: float, n: int, l: int, alpha: float = ALPHA, m: float = 1.0, c: float = 1.0) -> float:
    ne = _effective_n(Z, n, l, alpha)
    return m * c ** 2 / math.sqrt(1 + (Z * alpha / ne) ** 2)


def effective_potential(r, Z: float = 1.0, alpha: float = ALPHA, m: float = 1.0, c: float = 1.0,
                        hbar: float = 1.0):
    """u = mc^2 potential with the constant -mc^2/2 removed."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise DomainError("r must be positive")
    za = Z * alpha
    return -hbar * c * za / r - hbar ** 2 * za ** 2 / (2 * m * r ** 2)


def r_crit(alpha: float = ALPHA, Z: float = 1.0, bohr: bool = True, m: float = 1.0, c: float = 1.0,
           hbar: float = 1.0) -> float:
    """Radius where the 1/r and 1/r^2 terms of the effective potential are equal.

    In Bohr radii a0 = hbar/(m c alpha) this is Z alpha^2 / 2.
    """
    r = hbar * Z * alpha / (2 * m * c)
    if bohr:
        return r / (hbar / (m * c * alpha))
    return r


@dataclass
class RadialResult:
    config: HydrogenConfig
    u: float
    eigenvalue: float
    scaled: float
    l_eff: float
    rho: np.ndarray
    w: np.ndarray
    nodes: int
    bisections: int
    r: np.ndarray = field(repr=False, default=None)

    def closed_form(self) -> float:
        c = self.config
        return hydrogen_energy(c.Z, c.n, c.l, self.u, c.alpha, c.m, c.c)

    def relative_error(self) -> float:
        ref = self.closed_form()
        return abs(self.eigenvalue - ref) / abs(ref)

    def binding(self) -> float:
        c = self.config
        return self.eigenvalue - self.u ** 2 / (2 * c.m * c.c ** 2)


def _numerov(f: np.ndarray, y0: float, y1: float, h: float) -> np.ndarray:
    y = np.empty_like(f)
    y[0], y[1] = y0, y1
    g = 1.0 - h * h * f / 12.0
    for j in range(1, len(f) - 1):
        y[j + 1] = ((12.0 - 10.0 * g[j]) * y[j] - g[j - 1] * y[j - 1]) / g[j + 1]
        if abs(y[j + 1]) > 1e250:
            y[: j + 2] *= 1e-250
    return y


def _count_nodes(y: np.ndarray) -> int:
    s = np.sign(y)
    s = s[s != 0]
    return int(np.count_nonzero(s[1:] != s[:-1]))


def radial_shoot(cfg: HydrogenConfig, r_max: Optional[float] = None, step: float = 0.004,
                 x_min: float = -16.0, bracket: Optional[Tuple[float, float]] = None,
                 tol: float = 1e-15, max_iter: int = 200) -> RadialResult:
    """Numerov shooting for the radial problem with shifted angular momentum.

    Lengths are scaled by the Coulomb length so the equation reads
    -w''/2 + (l'(l'+1)/(2 rho^2) - 1/rho) w = eps w; on a log mesh rho = e^x with
    w = sqrt(rho) y this becomes y'' = ((l'+1/2)^2 - 2 rho - 2 eps rho^2) y.
    Bisection uses the node count of the outward solution.
    """
    if cfg.Z <= 0:
        raise DomainError("radial problem needs Z > 0 for bound states")
    u = cfg.energy_parameter()
    za2 = (cfg.Z * cfg.alpha) ** 2
    lh2 = (cfg.l + 0.5) ** 2 - za2
    if lh2 <= 0:
        raise DomainError("supercritical coupling")
    lam = math.sqrt(lh2)            # l' + 1/2
    l_eff = lam - 0.5
    d = cfg.n - cfg.l - 1
    rho_max = r_max if r_max is not None else max(60.0, 10.0 * cfg.n ** 2 + 40.0)
    x_max = math.log(rho_max)
    npts = int(math.ceil((x_max - x_min) / step)) + 1
    xs = np.linspace(x_min, x_max, npts)
    h = xs[1] - xs[0]
    rho = np.exp(xs)
    base = lam * lam - 2.0 * rho
    r2 = 2.0 * rho * rho
    y0 = math.exp(lam * xs[0]) * (1 - rho[0] / (l_eff + 1))
    y1 = math.exp(lam * xs[1]) * (1 - rho[1] / (l_eff + 1))

    def shoot(eps):
        # stop a few dozen decay lengths past the outer turning point so the
        # log mesh stays inside the Numerov stability region for deep trial values
        end = npts
        if eps < 0:
            reach = 2.0 / -eps + 40.0 / math.sqrt(-2.0 * eps)
            end = max(3, min(npts, int(np.searchsorted(rho, reach)) + 1))
        y = np.zeros(npts)
        y[:end] = _numerov(base[:end] - eps * r2[:end], y0, y1, h)
        return y

    lo, hi = bracket if bracket is not None else (-2.5, 0.0)
    n_lo, n_hi = _count_nodes(shoot(lo)), _count_nodes(shoot(hi))
    if not (n_lo <= d < n_hi):
        raise BracketError(f"no sign change for {d} nodes in [{lo}, {hi}] (node counts {n_lo}, {n_hi})")
    it = 0
    while hi - lo > tol * max(1.0, abs(lo)) and it < max_iter:
        mid = 0.5 * (lo + hi)
        if _count_nodes(shoot(mid)) <= d:
            lo = mid
        else:
            hi = mid
        it += 1
    eps = 0.5 * (lo + hi)
    y = shoot(eps)
    w = np.sqrt(rho) * y
    # past the outer turning point the bound solution decays; cut where |w|
    # stops decreasing, which is where the growing solution takes over
    turn = int(np.nonzero((base - eps * r2) < 0)[0].max()) if np.any(base - eps * r2 < 0) else 0
    a = np.abs(w)
    rising = np.nonzero(np.diff(a[turn:]) > 0)[0]
    cut = turn + int(rising[0]) if len(rising) else len(w) - 1
    w[cut + 1:] = 0.0
    norm = math.sqrt(float(np.sum(w[: cut + 1] ** 2 * rho[: cut + 1]) * h))
    w = w / norm
    E_unit = (u * cfg.Z * cfg.alpha) ** 2 / (cfg.m * cfg.c ** 2)
    length = cfg.hbar * cfg.c / (u * cfg.Z * cfg.alpha)
    energy = u ** 2 / (2 * cfg.m * cfg.c ** 2) - E_unit * eps
    return RadialResult(cfg, u, energy, eps, l_eff, rho, w, _count_nodes(np.where(np.abs(w) > 1e-6, w, 0.0)), it, rho * length)


def radial_closed_shape(res: RadialResult) -> np.ndarray:
    """Normalized rho^{l'+1} e^{-rho/n'} L_d^{(2l'+1)}(2 rho / n') on the same mesh."""
    from scipy.special import eval_genlaguerre

    c = res.config
    ne = c.n - hydrogen_delta_l(c.Z, c.l, c.alpha)
    d = c.n - c.l - 1
    rho = res.rho
    w = rho ** (res.l_eff + 1) * np.exp(-rho / ne) * eval_genlaguerre(d, 2 * res.l_eff + 1, 2 * rho / ne)
    h = math.log(rho[1] / rho[0])
    return w / math.sqrt(float(np.sum(w ** 2 * rho) * h))
