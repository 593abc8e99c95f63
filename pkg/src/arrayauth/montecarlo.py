"""Monte Carlo rate curves: missed detection, noise-only false authentication,
and intruder penetration versus SNR.

Per-trial model: the enrolled identity (h~, pilot) is permanent; the channel,
receiver noise, and (for the intruder scenario) the intruder's identity and
pilot are redrawn every trial. Each trial owns a Generator derived from
(master_seed, point_index, trial_index), so curves are reproducible and
independent of worker count, and disjoint trial ranges merge exactly.

SNR axis: gamma = 10^(snr_db/20) and the per-sample noise variance is

    frame reference (default):  sigma_w^2 = E_ref / (2 gamma^2)
    element reference:          sigma_w^2 = (sigma_h / gamma)^2

where E_ref = N_s sigma_h^2 sum_m ||X_m||^2 |1 + h~_m|^2 / 2 is the
transmitting device's expected matched-frame energy E[||H X||_F^2] over the
path ensemble. The frame reference makes gamma^2 the expected matched-filter
output deflection (gamma^2 ~= E[psi_e] at sigma2_hat = sigma_w^2), which is
the scale on which the dual-threshold landmarks fall in the reproduced
figures; the element reference is the literal per-entry channel-to-noise
ratio, under which the same landmarks sit ~50 dB lower.
"""

from __future__ import annotations

import math
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.stats import norm
from threadpoolctl import threadpool_limits

from arrayauth.channel import (
    ChannelConfig,
    generate_scattering_channel,
    most_square_factors,
    noise_only_frame,
    perturbed_transmit_source,
    rebuild_with_source,
    snr_db_to_gamma,
    transmit,
)
from arrayauth.detector import DetectorConfig, authenticate
from arrayauth.geometry import ParameterError, PerturbationParams, generate_chaotic_geometry
from arrayauth.pilot import PilotConfig, PilotMatrix, generate_pilot_matrix
from arrayauth.registry import DeviceProfile, Registry, enroll
from arrayauth.seeding import (
    PURPOSE_GEOMETRY,
    PURPOSE_PILOT,
    PURPOSE_SIGNATURE,
    enrollment_seed,
    trial_rng,
)
from arrayauth.signature import ChaoticNoise, draw_chaotic_noise, standard_complex_normal

SCENARIO_MISS = "miss"
SCENARIO_FA_NOISE = "fa_noise"
SCENARIO_INTRUDER = "intruder"
SCENARIOS = (SCENARIO_MISS, SCENARIO_FA_NOISE, SCENARIO_INTRUDER)

SNR_REF_FRAME = "frame"
SNR_REF_ELEMENT = "element"

DEFAULT_GRID = tuple(float(s) for s in range(-10, 21))

CSV_COLUMNS = (
    "scenario",
    "snr_db",
    "m_active",
    "n_seraph",
    "pfa_target",
    "trials",
    "events",
    "rate",
    "ci_low",
    "ci_high",
    "master_seed",
)


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: str
    snr_grid_db: tuple = DEFAULT_GRID
    m_active: int = 16
    n_seraph: int = 512
    pfa_target: float = 0.01
    trials_per_point: int = 10_000
    master_seed: int = 0
    t_bauds: int = 64
    path_count: int = 32
    enrolled_count: int = 1
    activation_threshold: float = 0.0
    probe_count: int = 256
    sigma_h: float = 1.0
    snr_reference: str = SNR_REF_FRAME
    threads: int = 1
    # "random" draws a fresh identity per intruder trial; "clone" replays the
    # enrolled identity (test hook: a perfect clone is indistinguishable)
    intruder_mode: str = "random"

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ParameterError(f"unknown scenario {self.scenario!r}")
        if not self.snr_grid_db:
            raise ParameterError("snr grid must be nonempty")
        if self.trials_per_point < 100:
            raise ParameterError("trials_per_point must be >= 100")
        if self.enrolled_count < 1:
            raise ParameterError("enrolled_count must be >= 1")
        if self.snr_reference not in (SNR_REF_FRAME, SNR_REF_ELEMENT):
            raise ParameterError(f"unknown snr reference {self.snr_reference!r}")
        if self.threads < 1:
            raise ParameterError("threads must be >= 1")
        if self.intruder_mode not in ("random", "clone"):
            raise ParameterError(f"unknown intruder mode {self.intruder_mode!r}")
        object.__setattr__(self, "snr_grid_db", tuple(float(s) for s in self.snr_grid_db))


@dataclass(frozen=True)
class CurvePoint:
    snr_db: float
    rate: float
    ci_low: float
    ci_high: float
    trials: int
    events: int
    # fraction of trials where the midpoint threshold exceeded the FA one;
    # diagnostic for locating the dual-threshold crossover (not in the CSV)
    psi_e_bound_fraction: float = 0.0


@dataclass(frozen=True)
class RateCurve:
    points: list
    scenario: str
    config: ExperimentConfig


def wilson_interval(successes: int, trials: int, confidence: float = 0.95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials < 1:
        raise ParameterError("trials must be >= 1")
    if not (0 <= successes <= trials):
        raise ParameterError("successes outside [0, trials]")
    if not (0.0 < confidence < 1.0):
        raise ParameterError("confidence must lie in (0, 1)")
    z = float(norm.isf((1.0 - confidence) / 2.0))
    p_hat = successes / trials
    denom = 1.0 + z * z / trials
    center = (p_hat + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p_hat * (1 - p_hat) / trials + z * z / (4 * trials * trials)) / denom
    low = 0.0 if successes == 0 else max(0.0, center - half)
    high = 1.0 if successes == trials else min(1.0, center + half)
    return low, high


# ---------------------------------------------------------------------------
# enrollment


def build_device_profile(
    master_seed: int,
    device_index: int,
    m_active: int,
    t_bauds: int,
    activation_threshold: float,
) -> DeviceProfile:
    """Deterministic enrollment of one simulated device."""
    h_count, v_count = most_square_factors(m_active)
    geo_seed = enrollment_seed(master_seed, device_index, PURPOSE_GEOMETRY)
    sig_seed = enrollment_seed(master_seed, device_index, PURPOSE_SIGNATURE)
    pil_seed = enrollment_seed(master_seed, device_index, PURPOSE_PILOT)
    geometry = generate_chaotic_geometry(
        PerturbationParams(h_count=h_count, v_count=v_count, seed=geo_seed)
    )
    noise = draw_chaotic_noise(m_active, sig_seed)
    pilot_config = PilotConfig(
        m_antennas=m_active,
        t_bauds=t_bauds,
        activation_threshold=activation_threshold,
        seed=pil_seed,
    )
    pilot = generate_pilot_matrix(pilot_config)
    return DeviceProfile(
        device_id=f"dev-{device_index:03d}",
        geometry=geometry,
        chaotic_noise=noise,
        pilot=pilot,
        pilot_config=pilot_config,
        enrolled_at="1970-01-01T00:00:00Z",
    )


def frame_reference_energy(
    pilot: PilotMatrix, noise: ChaoticNoise, n_seraph: int, sigma_h: float
) -> float:
    """E[||H X||_F^2] over the path ensemble for a fixed device identity."""
    row_energy = np.sum(np.abs(pilot.values) ** 2, axis=1)
    gains = np.abs(1.0 + noise.values) ** 2 / 2.0
    return float(n_seraph * sigma_h**2 * np.dot(row_energy, gains))


def noise_variance_for(cfg: ExperimentConfig, snr_db: float, e_ref: float) -> float:
    gamma = snr_db_to_gamma(snr_db)
    if cfg.snr_reference == SNR_REF_FRAME:
        return e_ref / (2.0 * gamma * gamma)
    return (cfg.sigma_h / gamma) ** 2


@dataclass
class _Bench:
    """Everything derivable from the config alone; rebuilt inside workers."""

    registry: Registry
    neo: DeviceProfile
    sources: dict = field(default_factory=dict)  # device_id -> TransmitSignatureSource
    device_order: list = field(default_factory=list)
    channel_cfg: ChannelConfig = None
    detector_cfg: DetectorConfig = None
    neo_e_ref: float = 0.0


def _build_bench(cfg: ExperimentConfig) -> _Bench:
    registry = Registry()
    profiles = []
    for idx in range(cfg.enrolled_count):
        profile = build_device_profile(
            cfg.master_seed, idx, cfg.m_active, cfg.t_bauds, cfg.activation_threshold
        )
        registry = enroll(profile, registry)
        profiles.append(profile)
    neo = profiles[0]
    h_count, v_count = most_square_factors(cfg.m_active)
    sources = {
        p.device_id: perturbed_transmit_source(h_count, v_count, p.chaotic_noise)
        for p in profiles
    }
    bench = _Bench(registry=registry, neo=neo, sources=sources)
    bench.device_order = sorted(registry.devices)
    bench.channel_cfg = ChannelConfig(
        n_seraph=cfg.n_seraph, path_count=cfg.path_count, sigma_h=cfg.sigma_h
    )
    bench.detector_cfg = DetectorConfig(pfa_target=cfg.pfa_target, probe_count=cfg.probe_count)
    bench.neo_e_ref = frame_reference_energy(
        neo.pilot, neo.chaotic_noise, cfg.n_seraph, cfg.sigma_h
    )
    return bench


# ---------------------------------------------------------------------------
# trial kernels


def _one_trial(
    cfg: ExperimentConfig, bench: _Bench, point_index: int, snr_db: float, trial: int
) -> tuple[bool, bool]:
    """One authentication attempt: (scenario event?, midpoint threshold bound?).

    Per-trial draw order: channels (sorted device order), intruder identity
    and pilot (intruder scenario), frame noise, detector estimate.
    """
    rng = trial_rng(cfg.master_seed, point_index, trial)
    channels = {}
    for device_id in bench.device_order:
        channels[device_id] = generate_scattering_channel(
            bench.channel_cfg, bench.sources[device_id], cfg.m_active, rng
        )
    expected = [
        channels[did].matrix @ bench.registry.devices[did].pilot.values
        for did in bench.device_order
    ]
    h_neo = channels[bench.neo.device_id]

    if cfg.scenario == SCENARIO_MISS:
        neo_index = bench.device_order.index(bench.neo.device_id)
        var = noise_variance_for(cfg, snr_db, bench.neo_e_ref)
        y = transmit(
            h_neo,
            bench.neo.pilot,
            snr_db,
            noise_variance=var,
            rng=rng,
            expected_signal=expected[neo_index],
        )
    elif cfg.scenario == SCENARIO_FA_NOISE:
        var = noise_variance_for(cfg, snr_db, bench.neo_e_ref)
        y = noise_only_frame(cfg.n_seraph, cfg.t_bauds, var, rng, snr_db)
    else:  # intruder
        if cfg.intruder_mode == "clone":
            h_intr, intr_pilot = h_neo, bench.neo.pilot
            intr_e_ref = bench.neo_e_ref
        else:
            h_count, v_count = most_square_factors(cfg.m_active)
            intr_noise = ChaoticNoise(values=standard_complex_normal(rng, (cfg.m_active,)), seed=-1)
            intr_source = perturbed_transmit_source(h_count, v_count, intr_noise)
            h_intr = rebuild_with_source(h_neo, intr_source)
            intr_pilot = generate_pilot_matrix(
                PilotConfig(
                    m_antennas=cfg.m_active,
                    t_bauds=cfg.t_bauds,
                    activation_threshold=cfg.activation_threshold,
                ),
                rng=rng,
            )
            intr_e_ref = frame_reference_energy(intr_pilot, intr_noise, cfg.n_seraph, cfg.sigma_h)
        # the grid SNR is the intruder's own operating point
        var = noise_variance_for(cfg, snr_db, intr_e_ref)
        y = transmit(h_intr, intr_pilot, snr_db, noise_variance=var, rng=rng)

    result = authenticate(
        y, bench.neo, bench.registry, channels, bench.detector_cfg, rng, expected_signals=expected
    )
    psi_e_bound = result.psi_e >= result.psi_fa
    if cfg.scenario == SCENARIO_MISS:
        return not result.accepted, psi_e_bound
    return result.accepted, psi_e_bound


def run_point_events(
    cfg: ExperimentConfig, point_index: int, trial_lo: int, trial_hi: int
) -> tuple[int, int]:
    """(event count, midpoint-threshold-bound count) over a trial index range.

    Disjoint ranges merge exactly by componentwise summation.
    """
    snr_db = cfg.snr_grid_db[point_index]
    bench = _build_bench(cfg)
    events = 0
    bound = 0
    # single-threaded BLAS: the per-trial matrices are too small for
    # multithreaded kernels to win, and workers must not oversubscribe
    with threadpool_limits(limits=1):
        for trial in range(trial_lo, trial_hi):
            event, psi_e_bound = _one_trial(cfg, bench, point_index, snr_db, trial)
            events += int(event)
            bound += int(psi_e_bound)
    return events, bound


def _worker(args) -> tuple[int, int, int]:
    cfg, point_index, lo, hi = args
    events, bound = run_point_events(cfg, point_index, lo, hi)
    return point_index, events, bound


def run_curve(cfg: ExperimentConfig) -> RateCurve:
    """Run every grid point and wrap the rates with Wilson 95% intervals."""
    n = cfg.trials_per_point
    events_per_point = [0] * len(cfg.snr_grid_db)
    bound_per_point = [0] * len(cfg.snr_grid_db)
    if cfg.threads == 1:
        for idx in range(len(cfg.snr_grid_db)):
            events_per_point[idx], bound_per_point[idx] = run_point_events(cfg, idx, 0, n)
    else:
        chunk = max(1, math.ceil(n / (cfg.threads * 4)))
        jobs = []
        for idx in range(len(cfg.snr_grid_db)):
            for lo in range(0, n, chunk):
                jobs.append((cfg, idx, lo, min(lo + chunk, n)))
        with ProcessPoolExecutor(max_workers=cfg.threads) as pool:
            for idx, events, bound in pool.map(_worker, jobs):
                events_per_point[idx] += events
                bound_per_point[idx] += bound
    points = []
    for idx, snr_db in enumerate(cfg.snr_grid_db):
        events = events_per_point[idx]
        low, high = wilson_interval(events, n)
        points.append(
            CurvePoint(
                snr_db=snr_db,
                rate=events / n,
                ci_low=low,
                ci_high=high,
                trials=n,
                events=events,
                psi_e_bound_fraction=bound_per_point[idx] / n,
            )
        )
    return RateCurve(points=points, scenario=cfg.scenario, config=cfg)


def run_miss_curve(cfg: ExperimentConfig) -> RateCurve:
    """Rejection rate of the genuine enrolled device versus SNR."""
    if cfg.scenario != SCENARIO_MISS:
        raise ParameterError("config scenario must be 'miss'")
    return run_curve(cfg)


def run_fa_noise_curve(cfg: ExperimentConfig) -> RateCurve:
    """Acceptance rate when the receiver hears only noise."""
    if cfg.scenario != SCENARIO_FA_NOISE:
        raise ParameterError("config scenario must be 'fa_noise'")
    return run_curve(cfg)


def run_intruder_curve(cfg: ExperimentConfig) -> RateCurve:
    """Acceptance rate of a random-signature intruder with its own pilot."""
    if cfg.scenario != SCENARIO_INTRUDER:
        raise ParameterError("config scenario must be 'intruder'")
    return run_curve(cfg)


def run_scenario(cfg: ExperimentConfig) -> RateCurve:
    return {
        SCENARIO_MISS: run_miss_curve,
        SCENARIO_FA_NOISE: run_fa_noise_curve,
        SCENARIO_INTRUDER: run_intruder_curve,
    }[cfg.scenario](cfg)


# ---------------------------------------------------------------------------
# CSV export


def curve_to_csv_text(curve: RateCurve) -> str:
    cfg = curve.config
    lines = [",".join(CSV_COLUMNS)]
    for p in curve.points:
        lines.append(
            ",".join(
                [
                    curve.scenario,
                    repr(float(p.snr_db)),
                    str(int(cfg.m_active)),
                    str(int(cfg.n_seraph)),
                    repr(float(cfg.pfa_target)),
                    str(int(p.trials)),
                    str(int(p.events)),
                    repr(float(p.rate)),
                    repr(float(p.ci_low)),
                    repr(float(p.ci_high)),
                    str(int(cfg.master_seed)),
                ]
            )
        )
    return "\n".join(lines) + "\n"


def write_curve_csv(curve: RateCurve, path: str) -> None:
    """Atomic write: temp file then rename, so partial CSVs never appear."""
    text = curve_to_csv_text(curve)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp_path = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.unlink(tmp_path)
        raise


def config_with(cfg: ExperimentConfig, **overrides) -> ExperimentConfig:
    return replace(cfg, **overrides)
