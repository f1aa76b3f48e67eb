#!/usr/bin/env python3
import argparse
import asyncio
import os
import sys

# Add the src directory to the Python path
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from commands import EXIT_USAGE, HANDLERS, ConfigError, build_run_config, write_output
from config import set_debug_mode, setup_logging
from solvers.errors import RegimeError


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--debug", action="store_true", help="Enable debug logging")
    common.add_argument("--config", help="JSON config file (schema_version 1)")

    model = common.add_argument_group("model")
    model.add_argument("--delta1", type=float, help="Splitting of qubit 1")
    model.add_argument("--delta2", type=float, help="Splitting of qubit 2")
    model.add_argument("--g1", type=float, help="Coupling of qubit 1")
    model.add_argument("--g2", type=float, help="Coupling of qubit 2")

    solver = common.add_argument_group("solver")
    solver.add_argument("--emin", type=float, help="Lower end of the energy window")
    solver.add_argument("--emax", type=float, help="Upper end of the energy window (default 5)")
    solver.add_argument("--grid-step", dest="grid_step", type=float, help="Scan grid spacing")
    solver.add_argument("--nmax", type=int, help="Truncation of the coefficient chains")
    solver.add_argument("--oracle-n", dest="oracle_n", type=int, help="Oracle photon cutoff")
    solver.add_argument(
        "--parity", choices=["even", "odd", "both"], help="Parity sectors (default: both)"
    )
    solver.add_argument(
        "--precision",
        choices=["auto", "double", "extended"],
        help="Arithmetic for the G-functions (default: auto)",
    )

    sweep = common.add_argument_group("sweep and scan")
    sweep.add_argument("--g-from", dest="g_from", type=float, help="First g = g1 + g2")
    sweep.add_argument("--g-to", dest="g_to", type=float, help="Last g = g1 + g2")
    sweep.add_argument("--g-steps", dest="g_steps", type=int, help="Number of sweep steps")
    sweep.add_argument("--samples", type=int, help="G-scan sample count (default 2000)")
    sweep.add_argument("--workers", type=int, help="Worker processes for sweeps")

    out = common.add_argument_group("output")
    out.add_argument("--out", choices=["csv", "json"], help="Payload format (default: csv)")
    out.add_argument("--output", help="Write the payload to this file instead of stdout")
    return common


# Parse command line arguments
def parse_args(argv=None):
    parser = argparse.ArgumentParser(description="Two-qubit Rabi model spectral solver")
    common = _common_options()
    subparsers = parser.add_subparsers(dest="command", required=True)
    subparsers.add_parser("spectrum", parents=[common], help="Certified level list")
    subparsers.add_parser("gscan", parents=[common], help="G-function samples for plotting")
    subparsers.add_parser("sweep", parents=[common], help="Levels as a function of g")
    subparsers.add_parser("verify", parents=[common], help="Compare with exact diagonalization")
    subparsers.add_parser("darkstate", parents=[common], help="Dark-state conditions at E=1")
    return parser.parse_args(argv)


# Setup logger
logger = setup_logging("rabi2q_main")


async def main_async(args):
    """Async main function."""
    if args.debug:
        set_debug_mode(True)
        logger.debug("Debug mode enabled")

    try:
        run = build_run_config(vars(args))
    except ConfigError as e:
        logger.error(f"Invalid configuration: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE

    try:
        output = await HANDLERS[run.command](run)
    except RegimeError as e:
        logger.error(f"{run.command}: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as e:
        logger.error(f"Unhandled exception in {run.command}: {e}", exc_info=True)
        return 1

    write_output(output.text, run.output_path)
    return output.exit_code


def main(argv=None):
    """Main entry point."""
    args = parse_args(argv)

    try:
        return asyncio.run(main_async(args))
    except KeyboardInterrupt:
        logger.info("Process interrupted by user")
        return 130  # Standard exit code for SIGINT
    except Exception as e:
        logger.critical(f"Critical error in main: {e}", exc_info=True)
        return 1


if __name__ == "__main__":
    sys.exit(main())
