import json
import os

import pytest

from errors import NumericalError
from eta_invariant import eta_invariant, lform_report
from table_writer import emit_tables, setup_output_directory

# Tests for the CSV and JSON outputs.


# Test the L-form table header, line endings and reducible vanishing
def test_lform_csv_format(reducible_config, tmp_path):
    written = emit_tables(lform_report(reducible_config), str(tmp_path / "out"))
    assert [os.path.basename(p) for p in written] == ["lform.csv", "report.json"]
    raw = (tmp_path / "out" / "lform.csv").read_bytes()
    assert b"\r" not in raw
    lines = raw.decode("utf-8").splitlines()
    assert lines[0] == "tau,alpha,beta,gamma,delta,L4"
    assert all(abs(float(line.split(",")[-1])) < 1e-12 for line in lines[1:])


# Test two runs with identical configuration give byte-identical outputs
def test_outputs_deterministic(reducible_config, tmp_path):
    first, second = tmp_path / "first", tmp_path / "second"
    emit_tables(eta_invariant(reducible_config), str(first))
    emit_tables(eta_invariant(reducible_config), str(second))
    for name in ("lform.csv", "transgression.csv", "report.json"):
        assert (first / name).read_bytes() == (second / name).read_bytes()
    header = (first / "transgression.csv").read_text(encoding="utf-8").splitlines()[0]
    assert header == "t,integrand_e123"


# Test the JSON report has sorted keys and carries the eta estimate
def test_report_json(reducible_config, tmp_path):
    emit_tables(eta_invariant(reducible_config), str(tmp_path))
    text = (tmp_path / "report.json").read_text(encoding="utf-8")
    data = json.loads(text)
    assert list(data) == sorted(data)
    assert data["eta"]["value"] == pytest.approx(0.0, abs=1e-12)
    assert text.endswith("\n")


# Test an output directory that cannot be created is reported
def test_unwritable_directory(mocker):
    mocker.patch("os.makedirs", side_effect=PermissionError("read-only"))
    with pytest.raises(NumericalError):
        setup_output_directory("/no/such/place")


# Test a directory without write access is reported
def test_directory_without_write_access(mocker, tmp_path):
    mocker.patch("os.access", return_value=False)
    with pytest.raises(NumericalError):
        setup_output_directory(str(tmp_path))
