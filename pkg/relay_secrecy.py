#!/usr/bin/env python3
"""
Relay Secrecy Solver - Main Entry Point

Joint public/secret power allocation and relay beamforming for a
decode-and-forward relay network with eavesdroppers.
"""

import argparse
import sys
from dataclasses import replace

import numpy as np

from modules.allocator import MonotonicityError, SweepAxis, allocate, sweep
from modules.cone import KernelError
from modules.config import Config
from modules.exports import save_sweep_csv, save_trace_json, sweep_csv, trace_document
from modules.logger import get_logger, setup_logging
from modules.oracle import run_oracle_check
from modules.rates import check_constraints, constraint_slacks
from modules.reports import format_oracle_check, format_solution, format_sweep
from modules.scenario import EveCsi, ScenarioError, load_scenario_file

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_PUBLIC_INFEASIBLE = 2


def _shared_options() -> argparse.ArgumentParser:
    """Flags every subcommand accepts. They override the scenario document."""
    parent = argparse.ArgumentParser(add_help=False)

    parent.add_argument('--config', type=str, default=Config.default_config_path,
                        help='Scenario JSON document (default: RELAY_SECRECY_CONFIG or the bundled scenario)')

    # Scenario overrides
    parent.add_argument('--total-power-db', type=float,
                        help='Total power P_T in dB relative to N0')
    parent.add_argument('--public-rate', type=float,
                        help='Public rate R0 in bits per channel use')
    parent.add_argument('--power-steps', type=int,
                        help='Number of power split steps M')
    parent.add_argument('--seed', type=int,
                        help='Seed for randomized rounding, Monte-Carlo and oracle trials')
    parent.add_argument('--eve-decode-public', action='store_true',
                        help='Eavesdroppers must also decode the public message')
    parent.add_argument('--statistical-csi', action='store_true',
                        help='Use eavesdropper channel variances instead of instantaneous gains')
    parent.add_argument('--eves', type=int,
                        help='Keep only the first K eavesdroppers')
    parent.add_argument('--noise-power', type=float,
                        help='Noise power N0 (P_T stays in dB relative to it)')
    parent.add_argument('--verify-monotone', action='store_true',
                        help='Solve every power step and check the secrecy rate is monotone')
    parent.add_argument('--include-m-equals-m', action='store_true',
                        help='Also try giving the whole budget to the secret message')

    # Logging control
    parent.add_argument('--log-level', type=str, default=Config.log_level,
                        choices=['DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL'],
                        help='Logging level (default: INFO)')
    parent.add_argument('--log-file', type=str,
                        help='Write logs to file (in addition to console)')
    parent.add_argument('--quiet', '-q', action='store_true',
                        help='Minimal output (errors only)')
    return parent


def build_parser() -> argparse.ArgumentParser:
    parent = _shared_options()
    parser = argparse.ArgumentParser(
        description='Relay secrecy solver - secrecy-rate maximizing DF relay beamforming',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog='''
Examples:
  # Solve the bundled scenario
  python relay_secrecy.py solve

  # Secrecy rate without a public message, compared against R0 = 0.2
  python relay_secrecy.py solve --public-rate 0.2 --compare-no-public

  # Secrecy rate vs total power, 0..12 dB, three eavesdroppers
  python relay_secrecy.py sweep --axis power_db --from 0 --to 12 --points 13 --out outputs/pt.csv

  # Secrecy rate vs public rate under statistical CSI
  python relay_secrecy.py sweep --axis public_rate --from 0 --to 1 --points 11 --statistical-csi

  # Compare the solvers with brute-force oracles
  python relay_secrecy.py oracle-check --trials 5 --seed 1
        '''
    )
    sub = parser.add_subparsers(dest='command', required=True)

    solve = sub.add_parser('solve', parents=[parent], help='Solve one allocation')
    solve.add_argument('--trace', type=str,
                       help='Write the search trace, rates and slacks to this JSON file')
    solve.add_argument('--compare-no-public', action='store_true',
                       help="Also report R_s' (the secrecy rate with R0 = 0)")

    sw = sub.add_parser('sweep', parents=[parent], help='Sweep total power or public rate')
    sw.add_argument('--axis', type=str, default=SweepAxis.TOTAL_POWER_DB.value,
                    choices=[a.value for a in SweepAxis],
                    help='Swept parameter (default: power_db)')
    sw.add_argument('--from', dest='start', type=float, required=True,
                    help='First grid value')
    sw.add_argument('--to', dest='stop', type=float, required=True,
                    help='Last grid value')
    sw.add_argument('--points', type=int, default=13,
                    help='Number of grid points (default: 13)')
    sw.add_argument('--out', type=str,
                    help='CSV output path (default: print CSV to stdout)')
    sw.add_argument('--jobs', type=int, default=Config.max_workers,
                    help='Worker processes (default: CPU count or RELAY_SECRECY_JOBS)')

    oc = sub.add_parser('oracle-check', parents=[parent], help='Compare solvers with brute-force oracles')
    oc.add_argument('--trials', type=int, default=5,
                    help='Number of trials (default: 5)')
    oc.add_argument('--tolerance', type=float,
                    help=f'Override both deviation tolerances '
                         f'(default: {Config.oracle_secret_tol} bits, {Config.oracle_public_tol} power)')
    oc.add_argument('--power-points', type=int, default=200,
                    help='Grid oracle steps over the secret source power (default: 200)')
    oc.add_argument('--phase-points', type=int, default=360,
                    help='Grid oracle phase samples per beam direction (default: 360)')
    return parser


def load_inputs(args):
    """Scenario and solve settings with command-line overrides applied."""
    sc, cfg = load_scenario_file(args.config)

    if args.eves is not None:
        sc = sc.with_eves(args.eves)
    if args.statistical_csi:
        sc = sc.with_csi(EveCsi.STATISTICAL)
    if args.noise_power is not None:
        sc = sc.with_noise_power(args.noise_power)

    overrides = {'power_reference': sc.noise_power}
    if args.total_power_db is not None:
        overrides['total_power_db'] = args.total_power_db
    if args.public_rate is not None:
        overrides['public_rate'] = args.public_rate
    if args.power_steps is not None:
        overrides['power_steps'] = args.power_steps
    if args.seed is not None:
        overrides['rng_seed'] = args.seed
    if args.eve_decode_public:
        overrides['eve_must_decode_public'] = True
    if args.verify_monotone:
        overrides['verify_monotone'] = True
    if args.include_m_equals_m:
        overrides['include_m_equals_m'] = True
    return sc, replace(cfg, **overrides)


def cmd_solve(args) -> int:
    sc, cfg = load_inputs(args)
    logger.info(
        f"Solving N={sc.n_relays}, J={sc.n_eves}, {sc.eve_csi.value} CSI, "
        f"P_T={cfg.total_power_db:g} dB, R0={cfg.public_rate:g}"
    )
    solution = allocate(sc, cfg)
    slacks = constraint_slacks(
        sc, cfg, solution.public.Ps0, solution.secret.Ps1, solution.public.phi, solution.secret.psi
    )

    no_public = None
    if args.compare_no_public:
        no_public = (
            solution.secrecy_rate if cfg.public_rate == 0.0
            else allocate(sc, cfg.with_public_rate(0.0)).secrecy_rate
        )

    if not args.quiet:
        print(format_solution(solution, slacks, no_public, cfg.public_rate))

    if args.trace:
        path = save_trace_json(trace_document(sc, cfg, solution, slacks), args.trace)
        logger.info(f"Trace written to {path}")

    if solution.solved and check_constraints(sc, cfg, solution):
        logger.warning("Solution violates constraints beyond tolerance, see slacks above")
    return EXIT_OK if solution.solved else EXIT_PUBLIC_INFEASIBLE


def cmd_sweep(args) -> int:
    if args.points < 1:
        raise ValueError(f"--points must be >= 1, got {args.points}")
    if args.stop < args.start:
        raise ValueError(f"--to ({args.stop}) must not be below --from ({args.start})")
    sc, cfg = load_inputs(args)
    grid = [float(v) for v in np.linspace(args.start, args.stop, args.points)]

    rows = sweep(sc, cfg, args.axis, grid, jobs=args.jobs, show_progress=not args.quiet)

    if args.out:
        path = save_sweep_csv(rows, args.out)
        logger.info(f"Sweep written to {path}")
        if not args.quiet:
            print(format_sweep(rows))
    else:
        sys.stdout.write(sweep_csv(rows))

    failed = [row for row in rows if row.error]
    if failed:
        logger.error(f"{len(failed)} of {len(rows)} sweep points failed")
        return EXIT_ERROR
    return EXIT_OK


def cmd_oracle_check(args) -> int:
    if args.trials < 0:
        raise ValueError(f"--trials must be >= 0, got {args.trials}")
    sc, cfg = load_inputs(args)
    if args.trials == 0:
        logger.warning("No oracle trials requested, nothing was checked")
        return EXIT_OK

    secret_tol = Config.oracle_secret_tol if args.tolerance is None else args.tolerance
    public_tol = Config.oracle_public_tol if args.tolerance is None else args.tolerance
    trials = run_oracle_check(
        sc,
        cfg,
        args.trials,
        cfg.rng_seed,
        secret_tol=secret_tol,
        public_tol=public_tol,
        grid={'power_points': args.power_points, 'phase_points': args.phase_points},
        show_progress=not args.quiet,
    )
    if not args.quiet:
        print(format_oracle_check(trials))

    worst_secret = max(t.secret_dev for t in trials)
    worst_public = max(t.public_dev for t in trials)
    logger.info(f"Max deviation: secret {worst_secret:.3e} bits, public {worst_public:.3e}")
    if all(t.passed for t in trials):
        return EXIT_OK
    logger.error("Oracle deviation above tolerance")
    return EXIT_ERROR


COMMANDS = {
    'solve': cmd_solve,
    'sweep': cmd_sweep,
    'oracle-check': cmd_oracle_check,
}


def main(argv=None) -> int:
    """Main entry point"""
    args = build_parser().parse_args(argv)

    # Setup logging first
    setup_logging(level=args.log_level, log_file=args.log_file, quiet=args.quiet)

    issues = Config.validate()
    if issues:
        for issue in issues:
            logger.error(f"Configuration: {issue}")
        return EXIT_ERROR

    try:
        return COMMANDS[args.command](args)
    except ScenarioError as e:
        logger.error(f"Invalid scenario: {e}")
    except OSError as e:
        logger.error(f"Cannot access file: {e}")
    except (KernelError, MonotonicityError) as e:
        logger.error(f"Solver failure: {e}")
    except ValueError as e:
        logger.error(f"{e}")
    return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
