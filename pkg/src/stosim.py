"""
Monte-Carlo simulation of the recognition layer and of the receiver output.

Every receptor is a continuous-time Markov chain over {free, bound to
species s}. The simulator advances the chain on a uniform grid with the
exact transition matrix expm(Q dt) for the current concentration level, so
the occupancy statistics carry no time-discretisation bias. Symbol
boundaries are queued as events on the System base, the same way a turn
drives the stepping of any other simulator built on it.
"""

import logging
import math
from dataclasses import dataclass, replace
from typing import Dict, List, Optional, Sequence, TextIO, Tuple

import numpy as np
import pandas as pd
from scipy import linalg, stats
from tqdm import tqdm

from errors import ConfigurationError, DomainError, InsufficientDataError
from kinetics import (
    LigandReceptorPair,
    MessageSchedule,
    RecognitionLayer,
    binding_timescale,
    check_symbol_rate,
    dissociation_constant,
)
from noise import Band, flicker_voltage_psd, thermal_floor
from physchem import (
    Environment,
    debye_length,
    effective_charge_per_electron,
    ligand_charge,
)
from spectral import exponential_timescale, sample_acf, shaped_noise, synthesis_band
from system import Event, EventCallback, System
from transducer import (
    TransducerConfig,
    capacitances,
    current_shift,
    response_polarity,
    transconductance,
)

logger = logging.getLogger(__name__)

SIMULATION_METHODS = ("binomial", "receptor", "gillespie")
LIGAND = "ligand"
FREE = -1

# dt may be at most this fraction of the fastest binding timescale
DT_FRACTION = 0.1
BURN_IN_TIMESCALES = 20
ACF_LENGTH_FACTOR = 10
MIN_SER_SYMBOLS = 100
NOISE_STREAM = 1
SEED_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class InterfererSpecies:
    """
    A background molecule competing with the ligand for the receptors.
    Its concentration stays constant during a simulation.
    """

    concentration: float  # molecules/m^3
    k_on: float  # m^3/s
    k_off: float  # 1/s
    electrons: float = 0.0
    receptor_length_equivalent: float = 4e-9  # m
    name: str = "interferer"

    def __post_init__(self) -> None:
        for rate in ("k_on", "k_off"):
            value = getattr(self, rate)
            if not (math.isfinite(value) and value > 0):
                raise DomainError(f"{self.name}: {rate} must be > 0, got {value}")
        if not (math.isfinite(self.concentration) and self.concentration >= 0):
            raise DomainError(
                f"{self.name}: concentration must be >= 0, got {self.concentration}"
            )
        if self.electrons < 0 or self.receptor_length_equivalent < 0:
            raise DomainError(
                f"{self.name}: electrons and receptor_length_equivalent must be >= 0"
            )

    def dissociation_constant(self) -> float:
        return self.k_off / self.k_on

    def timescale(self) -> float:
        """
        Binding timescale of this species on its own.
        """
        return 1.0 / (self.k_on * self.concentration + self.k_off)

    def selectivity(self, pair: LigandReceptorPair) -> float:
        """
        K_D of the interferer over K_D of the ligand. Values above 1 mean
        the receptors prefer the ligand.
        """
        return self.dissociation_constant() / dissociation_constant(pair)


@dataclass
class ReceptorState:
    """
    Explicit per-receptor occupancy.
    bound_species holds the index of the bound species, or FREE.
    """

    bound_species: np.ndarray

    @classmethod
    def empty(cls, receptor_count: int) -> "ReceptorState":
        return cls(np.full(receptor_count, FREE, dtype=np.int16))

    @property
    def bound(self) -> np.ndarray:
        return self.bound_species != FREE

    def counts(self, n_species: int) -> np.ndarray:
        """
        Number of receptors bound to each species.
        """
        return np.bincount(self.bound_species[self.bound], minlength=n_species)


@dataclass(frozen=True)
class NoiseFlags:
    """
    Transducing noise sources added on top of the intrinsic receptor noise.
    """

    thermal: bool = False
    flicker: bool = False

    @property
    def any(self) -> bool:
        return self.thermal or self.flicker


@dataclass(eq=False)
class Trace:
    """
    A simulated realisation on a uniform time grid.
    n_bound has one row per species; row 0 is the ligand. A symbol-sampled
    trace holds only the symbol boundaries.
    """

    time: np.ndarray  # s
    n_bound: np.ndarray
    dt: float  # s
    rng_seed: int
    receptor_count: int
    slowest_timescale: float  # s
    species: Tuple[str, ...] = (LIGAND,)
    symbol_sampled: bool = False
    delta_vth: Optional[np.ndarray] = None  # V
    delta_ids: Optional[np.ndarray] = None  # A

    def __post_init__(self) -> None:
        if not self.dt > 0:
            raise DomainError(f"dt must be > 0, got {self.dt}")
        if self.n_bound.shape != (len(self.species), self.time.size):
            raise DomainError(
                f"n_bound shape {self.n_bound.shape} does not match "
                f"{len(self.species)} species x {self.time.size} samples"
            )

    @property
    def total_bound(self) -> np.ndarray:
        return self.n_bound.sum(axis=0)

    @property
    def duration(self) -> float:
        return float(self.time[-1] - self.time[0])

    def to_frame(self) -> pd.DataFrame:
        """
        One row per time sample.
        """
        if len(self.species) == 1:
            bound_columns = ["n_bound"]
        else:
            bound_columns = [f"n_bound_{name}" for name in self.species]
        frame = pd.DataFrame({"time_s": self.time})
        for name, counts in zip(bound_columns, self.n_bound):
            frame[name] = counts
        if self.delta_vth is not None:
            frame["delta_vth_V"] = self.delta_vth
        if self.delta_ids is not None:
            frame["delta_ids_A"] = self.delta_ids
        return frame

    def write_csv(self, stream: TextIO) -> None:
        self.to_frame().to_csv(
            stream, index=False, float_format="%.10g", lineterminator="\n"
        )


@dataclass(frozen=True, eq=False)
class AcfEstimate:
    """
    Sample autocovariance of the occupancy fluctuations.
    """

    lags: np.ndarray  # s
    values: np.ndarray  # counts^2

    @property
    def variance(self) -> float:
        return float(self.values[0])

    def __call__(self, lag):
        return np.interp(lag, self.lags, self.values)

    def fit_timescale(self, max_lag: Optional[float] = None) -> float:
        """
        Correlation time from an exponential fit on lags <= max_lag.
        """
        mask = np.ones_like(self.lags, dtype=bool)
        if max_lag is not None:
            mask = self.lags <= max_lag
        return exponential_timescale(self.lags[mask], self.values[mask])


@dataclass(frozen=True)
class SerEstimate:
    """
    Monte-Carlo symbol error rate with a Wilson confidence interval.
    """

    errors: int
    n_symbols: int
    lower: float
    upper: float
    thresholds: Tuple[float, ...]

    @property
    def rate(self) -> float:
        return self.errors / self.n_symbols


def _species_rates(
    pair: LigandReceptorPair, interferers: Sequence[InterfererSpecies]
) -> Tuple[np.ndarray, np.ndarray]:
    k_on = np.array([pair.k_on] + [s.k_on for s in interferers])
    k_off = np.array([pair.k_off] + [s.k_off for s in interferers])
    return k_on, k_off


def _generator(concentrations: np.ndarray, k_on: np.ndarray, k_off: np.ndarray):
    """
    Rate matrix of one receptor; state 0 is free, state s + 1 is bound to
    species s.
    """
    size = concentrations.size + 1
    q = np.zeros((size, size))
    q[0, 1:] = k_on * concentrations
    q[1:, 0] = k_off
    q[np.diag_indices(size)] = -q.sum(axis=1)
    return q


def stationary_distribution(
    concentrations: np.ndarray, k_on: np.ndarray, k_off: np.ndarray
) -> np.ndarray:
    """
    Stationary state probabilities of one receptor under competition.
    """
    weights = np.concatenate(([1.0], k_on * concentrations / k_off))
    return weights / weights.sum()


def transition_matrix(
    concentrations: np.ndarray, k_on: np.ndarray, k_off: np.ndarray, dt: float
) -> np.ndarray:
    """
    Exact one-step transition probabilities expm(Q dt), rows renormalised.
    """
    p = linalg.expm(_generator(concentrations, k_on, k_off) * dt)
    p = np.clip(p, 0.0, None)
    return p / p.sum(axis=1, keepdims=True)


def slowest_timescale(
    levels: Sequence[float],
    pair: LigandReceptorPair,
    interferers: Sequence[InterfererSpecies] = (),
) -> float:
    timescales = [binding_timescale(c, pair) for c in levels]
    timescales += [s.timescale() for s in interferers]
    return max(timescales)


def default_time_step(
    schedule: MessageSchedule,
    pair: LigandReceptorPair,
    interferers: Sequence[InterfererSpecies] = (),
) -> float:
    """
    Largest admissible step: DT_FRACTION of the fastest binding timescale.
    """
    timescales = [binding_timescale(c, pair) for c in set(schedule.levels)]
    timescales += [s.timescale() for s in interferers]
    return DT_FRACTION * min(timescales)


def check_time_step(
    dt: float,
    schedule: MessageSchedule,
    pair: LigandReceptorPair,
    interferers: Sequence[InterfererSpecies] = (),
) -> None:
    """
    Raise ConfigurationError naming the first species whose binding
    timescale is shorter than dt / DT_FRACTION.
    """
    if not dt > 0:
        raise ConfigurationError(f"dt must be > 0, got {dt}")
    candidates = [
        (LIGAND, c, binding_timescale(c, pair)) for c in sorted(set(schedule.levels))
    ]
    candidates += [
        (f"{s.name}[{k}]", s.concentration, s.timescale())
        for k, s in enumerate(interferers)
    ]
    for name, concentration, tau in candidates:
        if dt > DT_FRACTION * tau * (1 + 1e-9):
            raise ConfigurationError(
                f"dt={dt:.4g} s is larger than {DT_FRACTION} tau_B={tau:.4g} s "
                f"of species {name} at c={concentration:.4g} molecules/m^3"
            )


def _steps_per_symbol(schedule: MessageSchedule, dt: float) -> Tuple[int, float]:
    """
    Number of grid steps per symbol and the step actually used, which is
    shrunk so that symbol boundaries fall on the grid.
    """
    steps = max(1, math.ceil(schedule.symbol_duration / dt - 1e-9))
    return steps, schedule.symbol_duration / steps


class ReceptorSimulator(System):
    """
    Steps the receptor population through a message schedule.

    Each symbol interval is bracketed by a "symbol_start" event, which
    switches the transition matrix to the new level, and a "symbol_end"
    event carrying the bound counts at the sampling instant.

    With symbol_sampled the chain jumps a whole symbol per step with
    expm(Q T_s). The counts at the symbol boundaries have the same law as
    on the fine grid, and dt is ignored.
    """

    def __init__(
        self,
        schedule: MessageSchedule,
        pair: LigandReceptorPair,
        layer: RecognitionLayer,
        interferers: Sequence[InterfererSpecies] = (),
        dt: Optional[float] = None,
        seed: Optional[int] = None,
        method: str = "binomial",
        start_at_steady_state: bool = False,
        event_callbacks: Optional[List[EventCallback]] = None,
        symbol_sampled: bool = False,
    ) -> None:
        super().__init__(event_callbacks)
        if method not in SIMULATION_METHODS:
            raise ConfigurationError(
                f"method must be one of {SIMULATION_METHODS}, got {method}"
            )
        if symbol_sampled:
            dt = schedule.symbol_duration
        else:
            if dt is None:
                dt = default_time_step(schedule, pair, interferers)
            check_time_step(dt, schedule, pair, interferers)
        if seed is None:
            seed = int(np.random.SeedSequence().entropy) & SEED_MASK

        self.schedule = schedule
        self.interferers = tuple(interferers)
        self.method = method
        self.start_at_steady_state = start_at_steady_state
        self.symbol_sampled = symbol_sampled
        self.seed = seed
        self.rng = np.random.default_rng(seed)
        self.k_on, self.k_off = _species_rates(pair, self.interferers)
        self.background = np.array([s.concentration for s in self.interferers])
        self.n_species = self.k_on.size
        self.receptor_count = layer.discrete_count()
        self.steps_per_symbol, self.dt = _steps_per_symbol(schedule, dt)
        if self.dt < dt:
            logger.debug("time step shrunk from %.4g s to %.4g s", dt, self.dt)
        self.slowest_timescale = slowest_timescale(
            schedule.levels, pair, self.interferers
        )

        self.step_index = 0
        self.level = schedule.levels[0]
        self._matrices: Dict[float, Tuple[np.ndarray, np.ndarray]] = {}
        self.counts = np.zeros(self.n_species + 1, dtype=np.int64)
        self.state = ReceptorState.empty(self.receptor_count)

    @property
    def time(self) -> float:
        return self.schedule.start_time + self.step_index * self.dt

    def concentrations(self, level: float) -> np.ndarray:
        return np.concatenate(([level], self.background))

    def bound_counts(self) -> np.ndarray:
        if self.method == "receptor":
            return self.state.counts(self.n_species)
        return self.counts[1:].copy()

    def run(self, progress: bool = False) -> "Trace":
        """
        Simulate the whole schedule and return the occupancy trace.
        """
        n_steps = self.steps_per_symbol * len(self.schedule)
        history = np.empty((self.n_species, n_steps + 1), dtype=np.int64)
        self._initialise()
        history[:, 0] = self.bound_counts()

        symbols = tqdm(
            enumerate(self.schedule.levels),
            total=len(self.schedule),
            desc="symbols",
            disable=not progress,
        )
        for index, level in symbols:
            self.send_and_execute_event(
                Event(type="symbol_start", time=self.time, index=index, level=level)
            )
            for _ in range(self.steps_per_symbol):
                self._step()
                self.step_index += 1
                history[:, self.step_index] = self.bound_counts()
            self.send_and_execute_event(
                Event(
                    type="symbol_end",
                    time=self.time,
                    index=index,
                    level=level,
                    n_bound=history[:, self.step_index].copy(),
                )
            )

        time = self.schedule.start_time + self.dt * np.arange(n_steps + 1)
        species = (LIGAND,) + tuple(s.name for s in self.interferers)
        return Trace(
            time=time,
            n_bound=history,
            dt=self.dt,
            rng_seed=self.seed,
            receptor_count=self.receptor_count,
            slowest_timescale=self.slowest_timescale,
            species=species,
            symbol_sampled=self.symbol_sampled,
        )

    def _process_queue_event(self, event: Event) -> None:
        match event.type:
            case "symbol_start":
                self.level = event.data["level"]
            case "symbol_end":
                logger.debug(
                    "symbol %d ends at t=%.4g s with %s bound",
                    event.data["index"],
                    event.time,
                    event.data["n_bound"],
                )
            case _:
                raise ValueError(f"Unknown event type: {event.type}")

    def _initialise(self) -> None:
        if self.start_at_steady_state:
            weights = stationary_distribution(
                self.concentrations(self.schedule.levels[0]), self.k_on, self.k_off
            )
        else:
            weights = np.zeros(self.n_species + 1)
            weights[0] = 1.0
        if self.method == "receptor":
            states = self.rng.choice(weights.size, size=self.receptor_count, p=weights)
            self.state = ReceptorState((states - 1).astype(np.int16))
        else:
            self.counts = self.rng.multinomial(self.receptor_count, weights)

    def _matrix(self) -> Tuple[np.ndarray, np.ndarray]:
        """
        Transition matrix of the current level and its row-wise cumsum.
        """
        if self.level not in self._matrices:
            p = transition_matrix(
                self.concentrations(self.level), self.k_on, self.k_off, self.dt
            )
            self._matrices[self.level] = (p, np.cumsum(p, axis=1))
        return self._matrices[self.level]

    def _step(self) -> None:
        match self.method:
            case "binomial":
                self._step_counts()
            case "receptor":
                self._step_receptors()
            case "gillespie":
                self._step_gillespie()

    def _step_counts(self) -> None:
        p, _ = self._matrix()
        moved = np.zeros_like(self.counts)
        for row, n in enumerate(self.counts):
            if n:
                moved += self.rng.multinomial(n, p[row])
        self.counts = moved

    def _step_receptors(self) -> None:
        _, cumulative = self._matrix()
        rows = cumulative[self.state.bound_species + 1, :-1]
        draws = self.rng.random(self.receptor_count)
        new_state = (draws[:, None] >= rows).sum(axis=1) - 1
        self.state.bound_species = new_state.astype(np.int16)

    def _step_gillespie(self) -> None:
        """
        Exact stochastic simulation over one grid step.
        """
        on_rates = self.k_on * self.concentrations(self.level)
        remaining = self.dt
        while True:
            propensities = np.concatenate(
                (self.counts[0] * on_rates, self.counts[1:] * self.k_off)
            )
            total = propensities.sum()
            if total <= 0:
                return
            wait = self.rng.exponential(1.0 / total)
            if wait > remaining:
                return
            remaining -= wait
            reaction = np.searchsorted(
                np.cumsum(propensities), self.rng.random() * total, side="right"
            )
            reaction = min(reaction, propensities.size - 1)
            if reaction < self.n_species:
                self.counts[0] -= 1
                self.counts[reaction + 1] += 1
            else:
                self.counts[reaction - self.n_species + 1] -= 1
                self.counts[0] += 1


def simulate_occupancy(
    schedule: MessageSchedule,
    pair: LigandReceptorPair,
    layer: RecognitionLayer,
    interferers: Sequence[InterfererSpecies] = (),
    dt: Optional[float] = None,
    seed: Optional[int] = None,
    method: str = "binomial",
    start_at_steady_state: bool = False,
    event_callbacks: Optional[List[EventCallback]] = None,
    progress: bool = False,
    symbol_sampled: bool = False,
) -> Trace:
    """
    Simulate the bound-receptor counts of every species along a schedule.
    The ligand follows the schedule; interferers stay at their own
    concentration. Identical arguments and seed give identical traces.
    symbol_sampled keeps only the symbol boundaries, which is all a
    noiseless detector needs.
    """
    check_symbol_rate(schedule, pair)
    simulator = ReceptorSimulator(
        schedule,
        pair,
        layer,
        interferers,
        dt,
        seed,
        method,
        start_at_steady_state,
        event_callbacks,
        symbol_sampled,
    )
    return simulator.run(progress)


def _equivalent_capacitance(
    totals: np.ndarray,
    cfg: TransducerConfig,
    pair: LigandReceptorPair,
    layer: RecognitionLayer,
) -> np.ndarray:
    unique, inverse = np.unique(totals, return_inverse=True)
    c_eq = np.array([capacitances(float(n), cfg, pair, layer).c_eq for n in unique])
    return c_eq[inverse]


def synthesize_output(
    trace: Trace,
    cfg: TransducerConfig,
    pair: LigandReceptorPair,
    layer: RecognitionLayer,
    env: Environment,
    include_noise: NoiseFlags = NoiseFlags(),
    interferers: Sequence[InterfererSpecies] = (),
    band: Optional[Band] = None,
) -> Trace:
    """
    Fill in the threshold-voltage and current traces.

    Receptor noise is already in the occupancy; thermal and flicker noise
    are synthesised by spectral shaping when requested. A band whose
    upper edge lies above the Nyquist frequency cannot be synthesised.
    """
    lambda_d = debye_length(env)
    charges = np.array(
        [ligand_charge(pair, lambda_d)]
        + [
            s.electrons
            * effective_charge_per_electron(s.receptor_length_equivalent, lambda_d)
            for s in interferers
        ]
    )
    if charges.size != trace.n_bound.shape[0]:
        raise ConfigurationError(
            f"trace has {trace.n_bound.shape[0]} species but "
            f"{charges.size} were described"
        )
    totals = trace.total_bound
    delta_vth = (charges @ trace.n_bound) / _equivalent_capacitance(
        totals, cfg, pair, layer
    )

    if include_noise.any:
        if trace.symbol_sampled:
            raise ConfigurationError(
                "transducing noise needs a fine-grid trace, not a symbol-sampled one"
            )
        n_samples = delta_vth.size
        _, nyquist = synthesis_band(n_samples, trace.dt)
        if include_noise.flicker and band is not None and band.f_max > nyquist:
            raise ConfigurationError(
                f"band upper edge {band.f_max:.4g} Hz exceeds the Nyquist "
                f"frequency {nyquist:.4g} Hz of dt={trace.dt:.4g} s"
            )
        c_eq_prime = capacitances(float(totals.mean()), cfg, pair, layer).c_eq_prime
        corner = 1 / (2 * math.pi * cfg.layer_resistance * c_eq_prime)
        floor = thermal_floor(cfg, env)

        def transducing_psd(f: np.ndarray) -> np.ndarray:
            psd = np.zeros_like(f)
            if include_noise.thermal:
                psd += floor / (1 + (f / corner) ** 2)
            if include_noise.flicker:
                psd += flicker_voltage_psd(f, cfg, env)
            return psd

        rng = np.random.default_rng([trace.rng_seed, NOISE_STREAM])
        delta_vth = delta_vth + shaped_noise(
            transducing_psd, n_samples, trace.dt, rng
        )

    polarity = response_polarity(cfg, pair.charge_sign)
    delta_ids = polarity * transconductance(cfg) * delta_vth
    return replace(trace, delta_vth=delta_vth, delta_ids=delta_ids)


def stationary_segment(trace: Trace, burn_in: Optional[float] = None) -> np.ndarray:
    """
    Total bound counts with the first burn_in seconds removed
    (default BURN_IN_TIMESCALES slowest timescales).
    """
    if burn_in is None:
        burn_in = BURN_IN_TIMESCALES * trace.slowest_timescale
    start = math.ceil(burn_in / trace.dt)
    if start >= trace.time.size:
        raise InsufficientDataError(
            f"trace of {trace.duration:.4g} s is shorter than burn-in {burn_in:.4g} s"
        )
    return trace.total_bound[start:]


def empirical_acf(
    trace: Trace, max_lag: float, burn_in: Optional[float] = None
) -> AcfEstimate:
    """
    Unbiased sample autocovariance of the total bound count after burn-in.
    """
    if burn_in is None:
        burn_in = BURN_IN_TIMESCALES * trace.slowest_timescale
    required = burn_in + ACF_LENGTH_FACTOR * max_lag
    if trace.duration < required:
        raise InsufficientDataError(
            f"trace of {trace.duration:.4g} s is shorter than burn-in plus "
            f"{ACF_LENGTH_FACTOR} x max_lag = {required:.4g} s"
        )
    samples = stationary_segment(trace, burn_in)
    lag_steps = int(round(max_lag / trace.dt))
    values = sample_acf(samples, lag_steps)
    return AcfEstimate(trace.dt * np.arange(lag_steps + 1), values)


def demodulate_csk(
    trace: Trace,
    schedule: MessageSchedule,
    thresholds: Sequence[float],
    n_levels: Optional[int] = None,
) -> np.ndarray:
    """
    Threshold detector on the output current.

    Samples the current at the end of each symbol interval and returns
    the number of thresholds at or below the sample, i.e. the rank of the
    decided level when levels are ordered by their mean current.
    """
    thresholds = np.asarray(thresholds, dtype=float)
    if n_levels is None:
        n_levels = len(set(schedule.levels))
    if thresholds.ndim != 1 or thresholds.size != n_levels - 1:
        raise DomainError(
            f"need {n_levels - 1} thresholds for {n_levels} levels, "
            f"got {thresholds.size}"
        )
    if np.any(np.diff(thresholds) <= 0):
        raise DomainError("thresholds must be strictly increasing")
    if trace.delta_ids is None:
        raise ConfigurationError("trace has no output current, synthesize it first")

    sample_times = schedule.start_times + schedule.symbol_duration
    indices = np.rint((sample_times - trace.time[0]) / trace.dt).astype(int)
    if indices.min() < 0 or indices.max() >= trace.time.size:
        raise ConfigurationError("schedule extends beyond the trace")
    if not np.allclose(trace.time[indices], sample_times, rtol=0, atol=1e-6 * trace.dt):
        raise ConfigurationError("schedule and trace sampling grid are misaligned")
    return np.searchsorted(thresholds, trace.delta_ids[indices], side="right")


def wilson_interval(
    errors: int, n: int, confidence: float = 0.95
) -> Tuple[float, float]:
    """
    Wilson score interval of a binomial proportion.
    """
    z = stats.norm.ppf(0.5 + confidence / 2)
    p = errors / n
    denominator = 1 + z**2 / n
    centre = (p + z**2 / (2 * n)) / denominator
    half = z * math.sqrt(p * (1 - p) / n + z**2 / (4 * n**2)) / denominator
    return max(0.0, centre - half), min(1.0, centre + half)


def expected_currents(
    levels: Sequence[float],
    cfg: TransducerConfig,
    pair: LigandReceptorPair,
    layer: RecognitionLayer,
    env: Environment,
) -> np.ndarray:
    """
    Analytical mean current change of each level, sign included.
    """
    polarity = response_polarity(cfg, pair.charge_sign)
    return np.array(
        [polarity * current_shift(c, cfg, pair, layer, env) for c in levels]
    )


def estimate_ser(
    alphabet: MessageSchedule,
    pair: LigandReceptorPair,
    layer: RecognitionLayer,
    cfg: TransducerConfig,
    env: Environment,
    n_symbols: int,
    seed: int,
    interferers: Sequence[InterfererSpecies] = (),
    dt: Optional[float] = None,
    include_noise: NoiseFlags = NoiseFlags(),
    thresholds: Optional[Sequence[float]] = None,
    method: str = "binomial",
    band: Optional[Band] = None,
    progress: bool = False,
) -> SerEstimate:
    """
    Send n_symbols equiprobable symbols drawn from alphabet.levels at
    alphabet.symbol_rate and count the detector's decision errors.
    Thresholds default to the midpoints between the sorted analytical
    currents of the distinct levels. A repeated level is always decided
    as its first occurrence in the alphabet.

    Without transducing noise only the symbol boundaries are simulated,
    so dt matters only when noise is requested.
    """
    if n_symbols < MIN_SER_SYMBOLS:
        raise DomainError(f"n_symbols must be >= {MIN_SER_SYMBOLS}, got {n_symbols}")
    levels = np.asarray(alphabet.levels)
    if levels.size < 2:
        raise DomainError("an alphabet needs at least two levels")

    distinct, first_index = np.unique(levels, return_index=True)
    currents = expected_currents(distinct, cfg, pair, layer, env)
    order = np.argsort(currents, kind="stable")
    if thresholds is None:
        ranked = currents[order]
        thresholds = (ranked[:-1] + ranked[1:]) / 2

    rng = np.random.default_rng(seed)
    symbols = rng.integers(levels.size, size=n_symbols)
    schedule = MessageSchedule(
        tuple(levels[symbols]), alphabet.symbol_rate, alphabet.start_time
    )
    trace = simulate_occupancy(
        schedule,
        pair,
        layer,
        interferers,
        dt,
        seed=seed + 1,
        method=method,
        start_at_steady_state=True,
        progress=progress,
        symbol_sampled=not include_noise.any,
    )
    trace = synthesize_output(
        trace, cfg, pair, layer, env, include_noise, interferers, band
    )
    ranks = demodulate_csk(trace, schedule, thresholds, n_levels=distinct.size)
    decisions = first_index[order[ranks]]
    errors = int(np.count_nonzero(decisions != symbols))
    lower, upper = wilson_interval(errors, n_symbols)
    logger.info(
        "SER %d/%d = %.4g (95%% CI %.4g..%.4g)",
        errors,
        n_symbols,
        errors / n_symbols,
        lower,
        upper,
    )
    return SerEstimate(
        errors, n_symbols, lower, upper, tuple(float(t) for t in thresholds)
    )


def ser_versus_separation(
    low: float,
    ratios: Sequence[float],
    pair: LigandReceptorPair,
    layer: RecognitionLayer,
    cfg: TransducerConfig,
    env: Environment,
    n_symbols: int,
    seed: int,
    symbol_timescales: float = 20.0,
) -> List[SerEstimate]:
    """
    Noiseless binary CSK error rate for each high/low level ratio, with
    the symbol period set to symbol_timescales binding timescales of the
    slower level.
    """
    estimates = []
    for k, ratio in enumerate(ratios):
        if not ratio > 1:
            raise DomainError(f"level ratio must be > 1, got {ratio}")
        levels = (low, ratio * low)
        slowest = max(binding_timescale(c, pair) for c in levels)
        alphabet = MessageSchedule(levels, 1 / (symbol_timescales * slowest))
        # estimate_ser draws from seed and seed + 1
        estimates.append(
            estimate_ser(alphabet, pair, layer, cfg, env, n_symbols, seed + 2 * k)
        )
    return estimates


def significant_rises(estimates: Sequence[SerEstimate]) -> List[int]:
    """
    Indices k whose error rate lies above the one at k - 1 with disjoint
    confidence intervals.
    """
    return [
        k
        for k in range(1, len(estimates))
        if estimates[k].lower > estimates[k - 1].upper
    ]
