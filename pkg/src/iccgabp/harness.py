"""Seeded Monte-Carlo BER / NMSE sweeps over SNR and loading scenarios."""

from __future__ import annotations

import csv
import io
import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .combiner import combine_sum
from .gabp import run_detector
from .metrics import TrialMetrics, ber, genie_compute_bound, genie_data_bound, wilson_interval
from .numerics import rng_stream
from .system_model import SystemConfig, generate_channel, generate_frame, target_function, transmit

VARIANTS = ("joint-adaptive", "joint-known-zero", "genie-data", "genie-compute")
CSV_COLUMNS = ("scenario", "variant", "N", "K", "snr_db", "trials", "bits", "bit_errors",
               "ber", "ber_ci95", "mse", "nmse", "seed")

# grid elements per detector call; keeps the working set cache-resident
_BLOCK_ELEMENTS = 16384
_MAX_BLOCK = 512


@dataclass(frozen=True)
class Scenario:
    name: str
    N: int
    K: int
    variant: str = "joint-adaptive"

    def __post_init__(self):
        if self.N < 2 or self.K < 1:
            raise ValueError(f"scenario needs N >= 2 and K >= 1, got {self.N}x{self.K}")
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}; choose from {VARIANTS}")

    def config(self, base: SystemConfig) -> SystemConfig:
        mode = "adaptive" if self.variant == "joint-adaptive" else "known-zero"
        return base.replace(N=self.N, K=self.K, mean_mode=mode)


@dataclass(frozen=True)
class StoppingRule:
    min_trials: int = 100
    min_bit_errors: int = 100
    max_trials: int = 10_000

    def __post_init__(self):
        if self.min_trials < 1 or self.max_trials < self.min_trials or self.min_bit_errors < 0:
            raise ValueError(f"invalid stopping rule {self}")


@dataclass
class SweepRow:
    scenario: str
    variant: str
    N: int
    K: int
    snr_db: float
    trials: int
    bits: int
    bit_errors: int
    ber: float
    ber_ci95: float
    mse: float
    nmse: float
    seed: int
    aux_nmse: float = float("nan")

    @property
    def ber_interval(self):
        return wilson_interval(self.bit_errors, self.bits)


@dataclass
class SweepReport:
    rows: list[SweepRow] = field(default_factory=list)
    master_seed: int = 0

    def select(self, scenario=None, variant=None, K=None) -> list[SweepRow]:
        return [r for r in self.rows
                if (scenario is None or r.scenario == scenario)
                and (variant is None or r.variant == variant)
                and (K is None or r.K == K)]

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in self.rows:
            values = asdict(row)
            writer.writerow([_fmt(values[c]) for c in CSV_COLUMNS])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        return text


def _fmt(value):
    if isinstance(value, float):
        return f"{value:.5e}"
    return str(value)


def trial_stream(master_seed: int, scenario: Scenario, index: int) -> np.random.Generator:
    # keyed by dimensions only: every variant and SNR point sees the same
    # channels, bits, computing signals and unit-power noise draws
    return rng_stream(master_seed, (scenario.N, scenario.K, index))


def draw_trials(cfg: SystemConfig, scenario: Scenario, master_seed: int, indices):
    """Stack the channel, frame and received signal of each trial index."""
    H, bits, d, s, y = [], [], [], [], []
    for t in indices:
        rng = trial_stream(master_seed, scenario, t)
        h = generate_channel(cfg, rng)
        frame = generate_frame(cfg, rng)
        H.append(h)
        bits.append(frame.bits)
        d.append(frame.d)
        s.append(frame.s)
        y.append(transmit(cfg, h, frame, rng))
    return np.array(H), np.array(bits), np.array(d), np.array(s), np.array(y)


def evaluate(cfg: SystemConfig, variant: str, H, bits, d, s, y) -> TrialMetrics:
    """Detect and combine one stacked block, returning summed metrics."""
    f_true = target_function(s)
    if variant == "genie-compute":
        f_hat = genie_compute_bound(cfg, y, H, d)
        errors = total = 0
        aux = f_hat
    else:
        if variant == "genie-data":
            result = genie_data_bound(cfg, y, H, s)
        else:
            result = run_detector(cfg, y, H)
        errors, total = ber(bits, result.d_hat_final)
        f_hat = combine_sum(cfg, y, H, result)
        aux = result.s_hat_final.sum(axis=-1)
    return TrialMetrics(
        trials=int(np.size(f_true)),
        bit_errors=errors,
        bits_total=total,
        sq_err_f=float(np.sum((f_true - f_hat) ** 2)),
        f_true_sq=float(np.sum(f_true ** 2)),
        aux_sq_err_consensus=float(np.sum((f_true - aux) ** 2)),
    )


def run_trials(cfg: SystemConfig, scenario: Scenario, master_seed: int, start: int, stop: int) -> TrialMetrics:
    cfg = scenario.config(cfg)
    return evaluate(cfg, scenario.variant, *draw_trials(cfg, scenario, master_seed, range(start, stop)))


def run_trial(cfg: SystemConfig, scenario: Scenario, trial_seed) -> TrialMetrics:
    """Metrics of a single trial.

    ``trial_seed`` is ``(master_seed, trial_index)``; a bare int means trial 0
    of that master seed. The same pair inside :func:`run_sweep` draws the
    same channel, frame and noise.
    """
    master, index = (trial_seed, 0) if np.isscalar(trial_seed) else trial_seed
    return run_trials(cfg, scenario, int(master), int(index), int(index) + 1)


def block_size(scenario: Scenario) -> int:
    return max(1, min(_MAX_BLOCK, _BLOCK_ELEMENTS // (scenario.N * scenario.K)))


def run_point(cfg: SystemConfig, scenario: Scenario, snr_db: float,
              stopping: StoppingRule, master_seed: int) -> SweepRow:
    """Run blocks of trials at one SNR until the stopping rule is met."""
    cfg = cfg.with_snr_db(snr_db)
    counts_bits = scenario.variant != "genie-compute"
    block = block_size(scenario)
    acc = TrialMetrics()
    while True:
        short = acc.trials < stopping.min_trials
        if not short and not (counts_bits and acc.bit_errors < stopping.min_bit_errors
                              and acc.trials < stopping.max_trials):
            break
        target = stopping.min_trials if short else stopping.max_trials
        n = min(block, target - acc.trials)
        acc = acc + run_trials(cfg, scenario, master_seed, acc.trials, acc.trials + n)
    return _row(cfg, scenario, snr_db, acc, master_seed)


def _row(cfg, scenario, snr_db, acc: TrialMetrics, master_seed) -> SweepRow:
    lo, hi = wilson_interval(acc.bit_errors, acc.bits_total)
    normalizer = scenario.K * cfg.sigma_s_sq
    mse = acc.mse
    return SweepRow(
        scenario=scenario.name, variant=scenario.variant, N=scenario.N, K=scenario.K,
        snr_db=float(snr_db), trials=acc.trials, bits=acc.bits_total, bit_errors=acc.bit_errors,
        ber=acc.ber, ber_ci95=(hi - lo) / 2,
        mse=mse, nmse=mse / normalizer if normalizer > 0 else float("nan"),
        seed=master_seed,
        aux_nmse=acc.aux_sq_err_consensus / acc.trials / normalizer if normalizer > 0 else float("nan"),
    )


def _run_point_args(args):
    return run_point(*args)


def run_sweep(scenarios, snr_grid_db, stopping: StoppingRule | None = None, master_seed: int = 0,
              workers: int = 1, base_cfg: SystemConfig | None = None) -> SweepReport:
    """Sweep every scenario over ``snr_grid_db``.

    Points are independent jobs whose trial streams depend only on
    ``master_seed``, so the report is identical for any ``workers`` count.
    """
    scenarios = list(scenarios)
    snr_grid_db = [float(v) for v in snr_grid_db]
    if not scenarios or not snr_grid_db:
        raise ValueError("need at least one scenario and one SNR point")
    stopping = stopping or StoppingRule()
    base_cfg = base_cfg or SystemConfig()
    jobs = [(base_cfg, sc, snr, stopping, master_seed)
            for sc, snr in itertools.product(scenarios, snr_grid_db)]
    if workers <= 1:
        rows = [_run_point_args(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_run_point_args, jobs))
    return SweepReport(rows=rows, master_seed=master_seed)


def snr_grid(snr_min: float = 0.0, snr_max: float = 32.0, step: float = 4.0) -> list[float]:
    if step <= 0 or snr_max < snr_min:
        raise ValueError("SNR grid needs step > 0 and snr_max >= snr_min")
    count = int(np.floor((snr_max - snr_min) / step + 1e-9)) + 1
    return [float(snr_min + i * step) for i in range(count)]
