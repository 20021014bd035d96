"""Screen-plane probability pattern P(x) and derived observables."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .constants import AMU, G, H, HBAR, K_B, Material, builtin_material, radius_from_mass
from .csl import CslParams, csl_kernel_ln, csl_rate
from .environment import (
    EnvironmentParams,
    TrapParams,
    collision_rate,
    env_kernel_components,
    internal_temperature_trajectory,
    particle_c6,
)
from .errors import NumericIntegrityError
from .grating import (
    EikonalQuantities,
    GratingParams,
    classical_coefficient,
    eikonal_phase,
    eikonal_table,
    talbot_coefficient,
)
from .optics import SphereOptics

N_MAX = 200
STOP_RATIO = 1e-6
CHUNK = 20
INITIAL_STATES = ("ground", "thermal")
GRATING_MODELS = ("full", "pure-phase")
ENV_CHANNELS = ("collision", "absorption", "scattering", "emission")


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to compute one interference pattern (SI units)."""

    material: str = "Si"
    mass: float = 1e6 * AMU
    t1: float = 0.0395
    t2: float = 0.0395
    grating: GratingParams = GratingParams()
    trap: TrapParams = TrapParams()
    env: EnvironmentParams = EnvironmentParams()
    csl: CslParams | None = None
    optics_regime: str = "auto"
    grating_model: str = "full"
    channels: tuple[str, ...] = ENV_CHANNELS
    initial_state: str = "ground"
    sigma_x: float | None = None
    sigma_p: float | None = None
    initial_internal_temperature: float | None = None
    screen_window: float = 1e-7
    samples: int = 2001
    aleph_threshold: float = 0.05

    def __post_init__(self):
        if not (self.t1 > 0 and self.t2 > 0):
            raise ValueError("t1 and t2 must be positive")
        if not self.mass > 0:
            raise ValueError("mass must be positive")
        if not self.screen_window > 0:
            raise ValueError("screen window must be positive")
        if self.samples < 201 or self.samples % 2 == 0:
            raise ValueError("sample count must be odd and >= 201")
        if self.initial_state not in INITIAL_STATES:
            raise ValueError(f"initial_state must be one of {INITIAL_STATES}")
        if self.grating_model not in GRATING_MODELS:
            raise ValueError(f"grating_model must be one of {GRATING_MODELS}")
        unknown = set(self.channels) - set(ENV_CHANNELS)
        if unknown:
            raise ValueError(f"unknown decoherence channels {sorted(unknown)}")
        for name in ("sigma_x", "sigma_p", "initial_internal_temperature"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise ValueError(f"{name} must be positive")
        if not 0 < self.aleph_threshold < 1:
            raise ValueError("aleph threshold must be in (0, 1)")

    @property
    def particle(self) -> Material:
        return builtin_material(self.material)

    @property
    def radius(self) -> float:
        return radius_from_mass(self.mass, self.particle.density)

    @property
    def optics(self) -> SphereOptics:
        return SphereOptics(self.radius, self.particle.optical_table, self.optics_regime)

    def with_csl(self, csl: CslParams | None) -> "ExperimentConfig":
        return replace(self, csl=csl)


@dataclass(frozen=True)
class DerivedScales:
    sigma_x: float
    sigma_p: float
    talbot_time: float
    period: float
    delta: float


@dataclass(frozen=True)
class KernelTable:
    """Per-order pattern ingredients for n = 1..n_max."""

    n: np.ndarray
    xi: np.ndarray
    b_quantum: np.ndarray
    b_classical: np.ndarray
    r_env: np.ndarray
    r_csl: np.ndarray
    envelope: np.ndarray
    warnings: tuple[str, ...] = ()


@dataclass(frozen=True)
class PatternResult:
    x: np.ndarray
    P: np.ndarray
    n: np.ndarray
    coefficients: np.ndarray
    delta: float
    period: float
    components: KernelTable | None = None
    digest: str = ""
    warnings: tuple[str, ...] = ()

    def evaluate(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        phase = 2 * math.pi * np.multiply.outer(x, self.n) / self.period
        return self.delta * (1.0 + 2.0 * np.cos(phase) @ self.coefficients)


# ---------------------------------------------------------------------------
# scales and geometry


def thermal_widths(mass: float, mech_frequency: float, com_temperature: float) -> tuple[float, float]:
    """Thermal trap-state widths sigma_x = sqrt(hbar/(4 gamma) coth(beta0 nu)), sigma_p = sqrt(hbar gamma coth)."""
    gamma = math.pi * mass * mech_frequency
    beta_nu = H * mech_frequency / (2 * K_B * com_temperature)
    coth = 1.0 if beta_nu > 350 else 1.0 / math.tanh(beta_nu)
    return math.sqrt(HBAR / (4 * gamma) * coth), math.sqrt(HBAR * gamma * coth)


def derived_scales(config: ExperimentConfig) -> DerivedScales:
    if config.initial_state == "thermal":
        sx, sp = thermal_widths(config.mass, config.trap.mech_frequency, config.trap.com_temperature)
    else:
        sx, sp = thermal_widths(config.mass, config.trap.mech_frequency, 1e-12)
    if config.sigma_x is not None:
        sx = config.sigma_x
        if config.sigma_p is None:
            sp = HBAR / (2 * sx)
    if config.sigma_p is not None:
        sp = config.sigma_p
    if sx * sp < HBAR / 2 * (1 - 1e-12):
        raise ValueError("sigma_x sigma_p violates the uncertainty bound")
    d = config.grating.period
    t1, t2 = config.t1, config.t2
    return DerivedScales(
        sigma_x=sx,
        sigma_p=sp,
        talbot_time=config.mass * d * d / H,
        period=d * (t1 + t2) / t1,
        delta=config.mass / (math.sqrt(2 * math.pi) * sp * (t1 + t2)),
    )


def coherence_spread(sigma_x: float, mass: float, tau: float) -> float:
    """Free Gaussian packet width after time tau."""
    return math.sqrt(sigma_x**2 + (HBAR * tau / (2 * mass * sigma_x)) ** 2)


def t1_for_slits(n_slits: int, mass: float, sigma_x: float, period: float) -> float:
    """Smallest time after which the packet width reaches n_slits grating periods."""
    target = n_slits * period
    if sigma_x >= target:
        return 0.0
    # exact inverse of the spreading law; equals 2 n d m sigma_x / hbar when sigma_x << n d
    return 2 * mass * sigma_x * math.sqrt(target**2 - sigma_x**2) / HBAR


def drop_length(t1: float, t2: float) -> float:
    return G * (t1 + t2) ** 2 / 2


# ---------------------------------------------------------------------------
# kernels and patterns


def _grating_coefficients(config: ExperimentConfig, orders: np.ndarray, xi: np.ndarray):
    grating = config.grating
    optics = config.optics
    if grating.pulse_energy_per_area == 0:
        eiks = [EikonalQuantities(0, 0, 0, 0, 0, 0, float(v)) for v in xi]
    elif config.grating_model == "pure-phase":
        phi0 = eikonal_phase(optics, grating)
        eiks = [EikonalQuantities.pure_phase(phi0, float(v)) for v in xi]
    else:
        eiks = eikonal_table(optics, grating, xi * grating.period)
    bq = np.array([talbot_coefficient(e, int(n)) for e, n in zip(eiks, orders)])
    bc = np.array([classical_coefficient(e, int(n)) for e, n in zip(eiks, orders)])
    return bq, bc


def _env_context(config: ExperimentConfig):
    material, optics, env = config.particle, config.optics, config.env
    c6 = particle_c6(material, optics, env.gas)
    trajectory = None
    if "emission" in config.channels:
        trajectory = internal_temperature_trajectory(material, optics, config.trap, env, (config.t1, config.t2),
                                                     config.initial_internal_temperature)
    return c6, trajectory


def kernel_table(config: ExperimentConfig, n_max: int = N_MAX, stop_ratio: float = STOP_RATIO) -> KernelTable:
    """Per-order coefficients, extending n until three consecutive terms fall below ``stop_ratio``."""
    scales = derived_scales(config)
    t1, t2 = config.t1, config.t2
    d = config.grating.period
    c6, trajectory = _env_context(config)
    optics = config.optics
    cols = {k: [] for k in ("n", "xi", "bq", "bc", "renv", "rcsl", "env")}
    biggest = 0.0
    quiet = 0
    done = False
    start = 1
    while not done and start <= n_max:
        orders = np.arange(start, min(start + CHUNK, n_max + 1))
        xi = orders * t1 * t2 / (scales.talbot_time * (t1 + t2))
        bq, bc = _grating_coefficients(config, orders, xi)
        comps = env_kernel_components(orders, (t1, t2), config.mass, d, optics, config.env, c6, trajectory,
                                      channels=config.channels)
        ln_env = sum(comps[k] for k in config.channels) if config.channels else np.zeros(orders.shape)
        if config.csl is not None:
            ln_csl = csl_kernel_ln(orders, (t1, t2), (config.mass, d), config.csl,
                                   config.radius, config.particle.density)
        else:
            ln_csl = np.zeros(orders.shape)
        envelope = np.exp(-2 * (orders * math.pi * scales.sigma_x * t2 / (scales.period * t1)) ** 2)
        for i, n in enumerate(orders):
            term = max(abs(bq[i]), abs(bc[i])) * math.exp(ln_env[i]) * envelope[i]
            cols["n"].append(n)
            cols["xi"].append(xi[i])
            cols["bq"].append(bq[i])
            cols["bc"].append(bc[i])
            cols["renv"].append(math.exp(ln_env[i]))
            cols["rcsl"].append(math.exp(ln_csl[i]))
            cols["env"].append(envelope[i])
            biggest = max(biggest, term)
            quiet = quiet + 1 if term < stop_ratio * biggest or term == 0.0 else 0
            if quiet >= 3:
                done = True
                break
        start += CHUNK
    notes = () if done else (f"series cap n_max={n_max} reached before convergence",)
    arr = {k: np.array(v, dtype=float) for k, v in cols.items()}
    return KernelTable(arr["n"].astype(int), arr["xi"], arr["bq"], arr["bc"], arr["renv"], arr["rcsl"],
                       arr["env"], notes)


def screen_grid(config: ExperimentConfig) -> np.ndarray:
    half = config.screen_window / 2
    return np.linspace(-half, half, config.samples)


def assemble(table: KernelTable, scales: DerivedScales, x, classical: bool = False,
             csl_ln: np.ndarray | None = None, digest: str = "", check: bool = True) -> PatternResult:
    """Fourier assembly; ``csl_ln`` overrides the table's CSL kernel (used by scans)."""
    b = table.b_classical if classical else table.b_quantum
    r_csl = table.r_csl if csl_ln is None else np.exp(csl_ln)
    coeff = b * table.r_env * r_csl * table.envelope
    x = np.asarray(x, dtype=float)
    result = PatternResult(x, np.empty(0), table.n, coeff, scales.delta, scales.period, table, digest, table.warnings)
    p = result.evaluate(x)
    if check and not (np.all(np.isfinite(p)) and np.all(p > 0)):
        raise NumericIntegrityError("pattern is not strictly positive; kernels are inconsistent")
    return replace(result, P=p)


def _digest(config: ExperimentConfig) -> str:
    from .config import config_digest

    return config_digest(config)


def pattern_quantum(config: ExperimentConfig, table: KernelTable | None = None) -> PatternResult:
    table = kernel_table(config) if table is None else table
    return assemble(table, derived_scales(config), screen_grid(config), digest=_digest(config))


def pattern_classical(config: ExperimentConfig, table: KernelTable | None = None) -> PatternResult:
    table = kernel_table(config) if table is None else table
    return assemble(table, derived_scales(config), screen_grid(config), classical=True, digest=_digest(config))


def visibility(p: PatternResult, samples: int = 8001) -> float:
    """(max - min)/(max + min) over one period [-D/2, D/2]."""
    x = np.linspace(-p.period / 2, p.period / 2, samples)
    vals = p.evaluate(x)
    hi, lo = float(np.max(vals)), float(np.min(vals))
    return (hi - lo) / (hi + lo)


def summary_rates(config: ExperimentConfig) -> dict:
    """Scalar rates and scales reported alongside patterns."""
    scales = derived_scales(config)
    c6 = particle_c6(config.particle, config.optics, config.env.gas)
    out = {
        "talbot_time_s": scales.talbot_time,
        "period_D_m": scales.period,
        "sigma_x_m": scales.sigma_x,
        "sigma_p_kg_m_per_s": scales.sigma_p,
        "delta_per_m": scales.delta,
        "drop_length_m": drop_length(config.t1, config.t2),
        "gamma_coll_per_s": collision_rate(config.env, c6),
        "eikonal_phase_rad": eikonal_phase(config.optics, config.grating),
    }
    if config.csl is not None:
        out["gamma_csl_per_s"] = csl_rate(config.csl, config.radius, config.particle.density)
    return out
