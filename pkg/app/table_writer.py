import os
import json
import logging

import config
from errors import NumericalError
from eta_invariant import LFORM_COLUMNS

# Writes the CSV tables and the JSON report of a run.
# Outputs are deterministic: LF line endings, '.' decimal point, 17 significant digits, sorted JSON keys.


def setup_output_directory(directory):
    try:
        os.makedirs(directory, exist_ok=True)
    except OSError as e:
        raise NumericalError(f"Cannot create output directory {directory}: {e}")
    if not os.access(directory, os.W_OK):
        raise NumericalError(f"Output directory {directory} is not writable")


def write_csv(df, path):
    try:
        df.to_csv(path, index=False, float_format=config.FLOAT_FORMAT, lineterminator="\n", na_rep="nan")
    except OSError as e:
        raise NumericalError(f"Cannot write {path}: {e}")
    logging.info(f"Wrote {len(df)} rows to {path}")


def write_report(report, path):
    text = json.dumps(report.to_dict(), sort_keys=True, indent=2, allow_nan=False) + "\n"
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
    except OSError as e:
        raise NumericalError(f"Cannot write {path}: {e}")
    logging.info(f"Wrote report to {path}")


# Parameters:
# - report (Report): result of one command
# - directory (str): target directory, created when missing
# Step 1: Make sure the directory exists and is writable.
# Step 2: Write lform.csv and transgression.csv when the report carries those tables.
# Step 3: Write report.json.
def emit_tables(report, directory):
    # Step 1
    setup_output_directory(directory)
    written = []

    # Step 2
    if report.lform is not None:
        path = os.path.join(directory, config.LFORM_FILE)
        write_csv(report.lform[LFORM_COLUMNS], path)
        written.append(path)
    if report.transgression is not None:
        path = os.path.join(directory, config.TRANSGRESSION_FILE)
        write_csv(report.transgression, path)
        written.append(path)

    # Step 3
    path = os.path.join(directory, config.REPORT_FILE)
    write_report(report, path)
    written.append(path)
    return written
