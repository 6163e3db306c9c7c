############################################
# Author: Jason Liao
# Date: 2025-03-14
# Description: Command-line entry point - design, evaluate and validate
#              wideband phase profiles for a circular reflecting surface
############################################

import argparse
import math
import sys
import warnings

import pandas as pd

from risbeam.config.config import ORACLE_THRESHOLDS, PROFILES
from risbeam.config.scenario import ConfigManager
from risbeam.core import evaluation, oracle
from risbeam.core.channel import beampattern, frequency_grid
from risbeam.core.spm_design import run_design
from risbeam.errors import ConfigError, RisBeamError
from risbeam.utils.io_utils import OutputManager
from risbeam.utils.print_utils import print_, print_table, set_quiet
from risbeam.utils.string_utils import parse_float_list, parse_sweep_spec

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_VALIDATION_FAILED = 2

PROFILE_CHOICES = ("narrowband", "wideband")


class CliParser(argparse.ArgumentParser):
    """ArgumentParser that reports usage errors through print_ and exits with status 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print_(f"Usage error: {message}", "RED")
        sys.exit(EXIT_ERROR)


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=str(ConfigManager.template_path()),
                        help="YAML scenario file (default: bundled example)")
    common.add_argument("--out", default="out", help="Output directory")
    common.add_argument("--profile", choices=sorted(PROFILES), help="Override the aperture radius")
    common.add_argument("--threads", type=int, default=1, help="Worker count for parallel maps")
    common.add_argument("--quiet", action="store_true", help="Only print errors and results")

    parser = CliParser(prog="risbeam", description="Wideband beamforming for circular reflecting surfaces")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=CliParser)

    sub.add_parser("design", parents=[common], help="Design narrowband and wideband phase profiles")

    p = sub.add_parser("beampattern", parents=[common], help="Exact beampattern of the designed profiles")
    p.add_argument("--profiles", default=",".join(PROFILE_CHOICES),
                   help="Comma-separated profiles to evaluate (narrowband,wideband)")
    p.add_argument("--n-freq", type=int, help="Number of frequencies (default: n_freq_samples)")
    p.add_argument("--sweep", help="Flatness sweep, e.g. radius_m=1,1.5,2, bandwidth_hz=2e9,4e9,6e9 "
                                   "or band_guard=0,0.35")

    p = sub.add_parser("rate", parents=[common], help="Multicarrier spectral efficiency")
    p.add_argument("--l-dt", help="Sweep target distances, e.g. 1,2.5,5")
    p.add_argument("--gamma-c", help="Sweep focal-axis tilts in degrees, e.g. 0,15,30")

    sub.add_parser("ambiguity", parents=[common], help="LFM spectra and zero-Doppler ambiguity")

    p = sub.add_parser("validate", parents=[common], help="Run the brute-force oracle checks")
    p.add_argument("--threshold", action="append", default=[], metavar="NAME=VALUE",
                   help=f"Override a check threshold ({', '.join(ORACLE_THRESHOLDS)})")
    return parser


def cmd_design(args, scenario, outputs):
    design = run_design(scenario, n_jobs=args.threads)
    grid = design.grid
    for profile in (design.narrowband, design.wideband):
        frame = pd.DataFrame({"x_m": grid.x, "y_m": grid.y, "phase_rad": profile.phases})
        outputs.write_csv(f"{profile.kind}_profile.csv", frame)
    outputs.write_csv("amplitude.csv", design.amplitude.to_frame())
    outputs.write_csv("inst_freq.csv", design.inst_freq.to_frame())
    outputs.write_csv("phase.csv", design.phase.to_frame())

    b = design.bounds
    print_(f"{grid.count} elements, l in [{b.l_min:.6f}, {b.l_max:.6f}] m", "GREEN")
    return EXIT_OK


def cmd_beampattern(args, scenario, outputs):
    if args.sweep:
        parameter, values = parse_sweep_spec(args.sweep)
        frame = evaluation.flatness_sweep(scenario, parameter, values, n_jobs=args.threads)
        outputs.write_csv(f"flatness_{parameter}.csv", frame)
        print_table(frame.to_dict("records"), title="Flatness sweep")
        return EXIT_OK

    kinds = [k.strip() for k in args.profiles.split(",") if k.strip()]
    unknown = [k for k in kinds if k not in PROFILE_CHOICES]
    if unknown or not kinds:
        raise ConfigError(f"Unknown profile(s) {unknown}. Valid profiles: {', '.join(PROFILE_CHOICES)}")

    design = run_design(scenario, n_jobs=args.threads)
    freqs = frequency_grid(scenario, args.n_freq)
    rows = []
    for kind in kinds:
        profile = getattr(design, kind)
        bp = beampattern(design.grid, profile, freqs, n_jobs=args.threads)
        outputs.write_csv(f"beampattern_{kind}.csv", bp.to_frame())
        rows.append({"profile": kind, "peak_db": f"{bp.gain_db.max():.2f}",
                     "spread_db": f"{evaluation.gain_spread_db(bp, freqs[0], freqs[-1]):.2f}"})
    print_table(rows, title="In-band gain")
    return EXIT_OK


def cmd_rate(args, scenario, outputs):
    if args.l_dt or args.gamma_c:
        l_dt = parse_float_list(args.l_dt, key="l_dt_m") if args.l_dt else [scenario.l_dt_m]
        gamma_c = (parse_float_list(args.gamma_c, key="gamma_c_deg") if args.gamma_c
                   else [math.degrees(scenario.gamma_c_rad)])
        frame = evaluation.rate_sweep(scenario, l_dt, gamma_c, n_jobs=args.threads)
        outputs.write_csv("rate_sweep.csv", frame)
        print_table(frame.to_dict("records"), title="Rate sweep (bit/s/Hz)")
        return EXIT_OK

    design = run_design(scenario, n_jobs=args.threads)
    report = evaluation.rate_report(design.grid, design.narrowband, design.wideband, n_jobs=args.threads)
    outputs.write_json("rate_report.json", report)
    print_table([report.summary()], title="Spectral efficiency (bit/s/Hz)")
    return EXIT_OK


def cmd_ambiguity(args, scenario, outputs):
    design = run_design(scenario, n_jobs=args.threads)
    spectra, curves, reports = evaluation.sensing_comparison(
        scenario, design.grid, [design.narrowband, design.wideband], n_jobs=args.threads
    )
    outputs.write_csv("spectra.csv", spectra)
    outputs.write_csv("ambiguity_curves.csv", curves)
    outputs.write_json("ambiguity_report.json", {name: r.summary() for name, r in reports.items()})
    print_table([{"signal": name, **r.summary()} for name, r in reports.items()], title="Ambiguity mainlobe")
    return EXIT_OK


def cmd_validate(args, scenario, outputs):
    thresholds = {}
    for item in args.threshold:
        name, values = parse_sweep_spec(item)
        if name not in ORACLE_THRESHOLDS or len(values) != 1:
            raise ConfigError(f"Invalid threshold '{item}'. Valid names: {', '.join(ORACLE_THRESHOLDS)}", key=name)
        thresholds[name] = values[0]

    report = oracle.run_all(scenario, thresholds, n_jobs=args.threads)
    outputs.write_json("validation_report.json", report)
    print_table(report.rows(), title="Validation")
    if report.passed:
        print_("All checks passed.", "GREEN")
        return EXIT_OK
    print_("Validation failed.", "RED")
    return EXIT_VALIDATION_FAILED


COMMANDS = {
    "design": cmd_design,
    "beampattern": cmd_beampattern,
    "rate": cmd_rate,
    "ambiguity": cmd_ambiguity,
    "validate": cmd_validate,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    set_quiet(args.quiet)

    try:
        if args.threads < 1:
            raise ConfigError("--threads must be at least 1", key="threads")
        scenario = ConfigManager(args.config, profile=args.profile).scenario
        outputs = OutputManager(args.out, args.command, scenario.snapshot())

        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            code = COMMANDS[args.command](args, scenario, outputs)
        for w in caught:
            print_(f"Warning: {w.message}", "YELLOW")

        outputs.finalize()
        return code
    except RisBeamError as e:
        print_(f"Error: {e}", "RED")
        return EXIT_ERROR
    except OSError as e:
        print_(f"Cannot write outputs: {e}", "RED")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
