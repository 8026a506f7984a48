import sys
import logging
import argparse

import config
from check_runner import run_check, run_oracle
from display_data import display_report
from errors import ConfigError, DomainError, InvalidArgumentError, NumericalError, ProfileError, SingularInputError
from eta_invariant import eta_invariant, lform_report, transgression_report
from read_config import read_config
from table_writer import emit_tables

COMMANDS = {
    "check": run_check,
    "lform": lform_report,
    "transgression": transgression_report,
    "eta": eta_invariant,
    "oracle": run_oracle,
}

# Commands whose tables are always written; check and oracle write report.json only with -o.
WRITES_TABLES = ("lform", "transgression", "eta")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="equichar",
        description="Equivariant characteristic forms, transgressions and eta invariants of 4-dimensional SKR profiles")
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("config", help="JSON run configuration")
    parser.add_argument("-o", "--output", dest="output", default=None, help="output directory")
    return parser


# The main entry point of the script.
# Step 1: Parse the command line and read the configuration
# Step 2: Run the requested command
# Step 3: Display the report and write the output files
# Returns the process exit code: 0 success, 1 numerical failure, 2 configuration error.
def main(argv=None):
    logging.basicConfig(level=logging.INFO, format=config.LOG_FORMAT)
    args = build_parser().parse_args(argv)

    # Step 1:
    try:
        config.thread_count()
        cfg = read_config(args.config)
    except ConfigError as e:
        logging.error(f"Configuration error: {e}")
        return config.EXIT_CONFIG_ERROR
    if args.output is not None:
        cfg = cfg.with_output(args.output)

    try:
        # Step 2:
        logging.info(f"Running {args.command} on {args.config}")
        report = COMMANDS[args.command](cfg)

        # Step 3:
        display_report(report)
        if args.command in WRITES_TABLES or args.output is not None:
            emit_tables(report, cfg.output_directory)
    except InvalidArgumentError as e:
        logging.error(f"Invalid argument in {args.command}: {e}")
        return config.EXIT_CONFIG_ERROR
    except (DomainError, ProfileError, SingularInputError, NumericalError) as e:
        logging.error(f"{args.command} failed: {e}")
        return config.EXIT_NUMERICAL_FAILURE

    if not report.passed:
        failed = [check.name for check in report.checks if not check.passed]
        logging.error(f"Failed checks: {', '.join(failed)}")
        return config.EXIT_NUMERICAL_FAILURE
    return config.EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
