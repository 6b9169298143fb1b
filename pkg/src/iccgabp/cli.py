"""Command-line entry point: ``iccgabp {simulate,reproduce,trace}``.

Config files are flat ``key = value`` text; ``#`` starts a comment. Values
are resolved as built-in defaults, then the file, then command-line flags.
"""

from __future__ import annotations

import argparse
import configparser
import sys
from dataclasses import dataclass, field, fields, replace

from .harness import VARIANTS, Scenario, StoppingRule, draw_trials, run_sweep, snr_grid
from .gabp import run_detector
from .system_model import ConfigError, SystemConfig

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3

PRESETS = {
    "fig2": ((10, 2), (10, 5), (10, 10)),
    "fig3": ((200, 50), (200, 100), (200, 200)),
}

# SystemConfig fields a config file may set; N, K and the noise level come
# from the scenarios and SNR grid, mean_mode from the variant
_MODEL_KEYS = ("e_d", "sigma_s_sq", "mu_s", "sigma_h_sq", "beta_d", "beta_s", "i_max", "beta_mu")


@dataclass
class RunConfig:
    """Everything a run needs; serialisable to and from the flat file format."""

    scenarios: list = field(default_factory=lambda: [(10, 2)])
    variants: list = field(default_factory=lambda: ["joint-adaptive"])
    snr_min: float = 0.0
    snr_max: float = 32.0
    snr_step: float = 4.0
    min_trials: int = 100
    min_errors: int = 100
    max_trials: int = 10_000
    seed: int = 0
    workers: int = 1
    out: str | None = None
    trial: int = 0
    e_d: float = 0.99
    sigma_s_sq: float = 0.01
    mu_s: float = 0.0
    sigma_h_sq: float = 1.0
    beta_d: float = 0.5
    beta_s: float = 0.8
    i_max: int = 30
    beta_mu: float | None = None

    def system_config(self) -> SystemConfig:
        N, K = self.scenarios[0]
        return SystemConfig(N=N, K=K, **{k: getattr(self, k) for k in _MODEL_KEYS})

    def scenario_list(self) -> list[Scenario]:
        return [Scenario(f"{N}x{K}", N, K, v) for N, K in self.scenarios for v in self.variants]

    def stopping(self) -> StoppingRule:
        return StoppingRule(self.min_trials, self.min_errors, self.max_trials)

    def grid(self) -> list[float]:
        return snr_grid(self.snr_min, self.snr_max, self.snr_step)

    def validate(self) -> "RunConfig":
        if not self.scenarios:
            raise ConfigError("at least one scenario is required")
        for N, K in self.scenarios:
            if N < 2 or K < 1:
                raise ConfigError(f"scenario {N}x{K} violates N >= 2, K >= 1")
        if not self.variants:
            raise ConfigError("at least one variant is required")
        for v in self.variants:
            if v not in VARIANTS:
                raise ConfigError(f"unknown variant {v!r}; choose from {', '.join(VARIANTS)}")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")
        if self.seed < 0:
            raise ConfigError(f"seed must be non-negative, got {self.seed}")
        if self.trial < 0:
            raise ConfigError(f"trial must be non-negative, got {self.trial}")
        try:
            self.stopping()
            self.grid()
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        self.system_config()  # raises ConfigError naming the invariant
        return self

    def to_text(self) -> str:
        """Effective config in the file format; parsing it back gives an equal RunConfig."""
        lines = []
        for f in fields(self):
            value = getattr(self, f.name)
            if value is None:
                continue
            if f.name == "scenarios":
                value = ", ".join(f"{N}x{K}" for N, K in value)
            elif f.name == "variants":
                value = ", ".join(value)
            elif isinstance(value, float):
                value = repr(value)
            lines.append(f"{f.name} = {value}")
        return "\n".join(lines) + "\n"


def parse_scenario(text: str) -> tuple[int, int]:
    try:
        n, k = text.lower().split("x")
        return int(n), int(k)
    except ValueError:
        raise ConfigError(f"scenario must look like NxK, got {text!r}") from None


def _split(text: str) -> list[str]:
    return [item.strip() for item in text.split(",") if item.strip()]


def _coerce(name: str, raw: str):
    if name == "scenarios":
        return [parse_scenario(s) for s in _split(raw)]
    if name == "variants":
        return _split(raw)
    if name == "out":
        return raw or None
    if name == "beta_mu" and raw.strip().lower() in ("", "none"):
        return None
    kind = int if name in ("min_trials", "min_errors", "max_trials", "seed", "workers", "trial", "i_max") else float
    try:
        return kind(raw)
    except ValueError:
        raise ConfigError(f"{name} expects {kind.__name__}, got {raw!r}") from None


def parse_config_text(text: str, base: RunConfig | None = None) -> RunConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",), interpolation=None)
    try:
        parser.read_string("[run]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    known = {f.name for f in fields(RunConfig)}
    updates = {}
    for key, raw in parser["run"].items():
        if key not in known:
            raise ConfigError(f"unknown config key {key!r}")
        updates[key] = _coerce(key, raw.strip())
    return replace(base or RunConfig(), **updates)


def load_config(path) -> RunConfig:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config_text(text)


def _apply_flags(cfg: RunConfig, args) -> RunConfig:
    updates = {}
    for name in ("seed", "snr_min", "snr_max", "snr_step", "workers", "out",
                 "min_trials", "min_errors", "max_trials", "trial"):
        value = getattr(args, name, None)
        if value is not None:
            updates[name] = value
    if getattr(args, "scenario", None):
        updates["scenarios"] = [parse_scenario(s) for arg in args.scenario for s in _split(arg)]
    if getattr(args, "variant", None):
        updates["variants"] = [v for arg in args.variant for v in _split(arg)]
    return replace(cfg, **updates)


def resolve_config(args) -> RunConfig:
    cfg = load_config(args.config) if getattr(args, "config", None) else RunConfig()
    if getattr(args, "figure", None):
        cfg = replace(cfg, scenarios=list(PRESETS[args.figure]), variants=list(VARIANTS))
    return _apply_flags(cfg, args).validate()


def _write(text: str, out):
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _summary(report, stream):
    print(f"{'scenario':>9} {'variant':>17} {'snr':>5} {'trials':>7} {'ber':>11} {'nmse':>11}", file=stream)
    for r in report.rows:
        print(f"{r.scenario:>9} {r.variant:>17} {r.snr_db:5.1f} {r.trials:7d} {r.ber:11.4e} {r.nmse:11.4e}",
              file=stream)


def cmd_simulate(cfg: RunConfig, stream=None) -> str:
    report = run_sweep(cfg.scenario_list(), cfg.grid(), cfg.stopping(), cfg.seed,
                       cfg.workers, cfg.system_config())
    text = report.to_csv()
    _write(text, cfg.out)
    # the table goes to stderr so stdout stays pure CSV
    _summary(report, stream or sys.stderr)
    return text


def cmd_trace(cfg: RunConfig) -> str:
    """Per-iteration diagnostics of one trial of the first scenario and variant at ``snr_min``."""
    scenario = cfg.scenario_list()[0]
    sys_cfg = scenario.config(cfg.system_config()).with_snr_db(cfg.snr_min)
    H, _, _, s, y = (a[0] for a in draw_trials(sys_cfg, scenario, cfg.seed, [cfg.trial]))
    if scenario.variant == "genie-data":
        result = run_detector(sys_cfg, y, H, s_known=s, trace=True)
    elif scenario.variant == "genie-compute":
        raise ConfigError("genie-compute runs no iterations; trace another variant")
    else:
        result = run_detector(sys_cfg, y, H, trace=True)
    lines = ["iteration,mean_var_d,mean_var_s,mu_s"]
    lines += [f"{i},{vd:.5e},{vs:.5e},{mu:.5e}" for i, vd, vs, mu in result.trace]
    text = "\n".join(lines) + "\n"
    _write(text, cfg.out)
    return text


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="flat key = value config file")
    common.add_argument("--seed", type=int, help="master seed (non-negative)")
    common.add_argument("--snr-min", type=float, help="first SNR point in dB")
    common.add_argument("--snr-max", type=float, help="last SNR point in dB")
    common.add_argument("--snr-step", type=float, help="SNR step in dB")
    common.add_argument("--workers", type=int, help="worker processes")
    common.add_argument("--out", metavar="PATH", help="CSV output path (stdout if omitted)")
    common.add_argument("--variant", action="append", metavar="NAME",
                        help=f"one of {', '.join(VARIANTS)}; repeatable or comma-separated")
    common.add_argument("--scenario", action="append", metavar="NxK",
                        help="antennas x users; repeatable or comma-separated")
    common.add_argument("--min-trials", type=int)
    common.add_argument("--max-trials", type=int)
    common.add_argument("--min-errors", type=int, help="bit errors to collect per point")

    parser = argparse.ArgumentParser(prog="iccgabp", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("simulate", parents=[common], help="run a sweep and write CSV")
    rep = sub.add_parser("reproduce", parents=[common], help="run a built-in figure preset")
    rep.add_argument("figure", choices=sorted(PRESETS))
    tr = sub.add_parser("trace", parents=[common], help="per-iteration diagnostics of one trial")
    tr.add_argument("--trial", type=int, help="trial index within the seed's stream")
    sub.add_parser("show-config", parents=[common], help="print the effective config")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # argparse exits with 2 on bad flags
    try:
        cfg = resolve_config(args)
    except ConfigError as exc:
        print(f"iccgabp: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        if args.command == "show-config":
            sys.stdout.write(cfg.to_text())
        elif args.command == "trace":
            cmd_trace(cfg)
        else:
            cmd_simulate(cfg)
    except ConfigError as exc:
        print(f"iccgabp: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - any failure mid-run maps to one exit code
        print(f"iccgabp: runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
