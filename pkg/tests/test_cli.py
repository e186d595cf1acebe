"""Command-line surface: formats, exit codes, metadata conventions."""

import io
import json
import subprocess
import sys

import pytest

from mirrorpair.cli import COMMANDS, build_parser, run


def _run(*argv):
    out = io.StringIO()
    code = run(list(argv), stream=out)
    return code, out.getvalue()


def test_command_roster():
    assert COMMANDS == (
        "i-function",
        "tau-d",
        "mirror-map",
        "quantum-period",
        "regularized-period",
        "proper-potential",
        "classical-period",
        "verify",
        "identities",
    )
    parser = build_parser()
    assert parser.prog == "mirrorpair"


@pytest.mark.parametrize(
    "argv",
    [
        ("i-function", "--geometry", "p2_cubic", "--order", "3"),
        ("tau-d", "--geometry", "p3_quartic"),
        ("mirror-map", "--geometry", "blp3_k3", "--order", "4"),
        ("quantum-period", "--geometry", "p2_cubic", "--order", "6"),
        ("regularized-period", "--geometry", "p2_cubic", "--order", "6"),
        ("proper-potential", "--geometry", "p2_cubic", "--order", "6"),
        ("classical-period", "--geometry", "p3_quartic", "--order", "8"),
        ("identities", "--seed", "1", "--cases", "2"),
    ],
)
def test_subcommands_run_clean(argv):
    code, text = _run(*argv)
    assert code == 0
    assert text.strip()


# ---------------------------------------------------------------------------
# formats


def test_json_format_structure():
    code, text = _run("mirror-map", "--geometry", "p2_cubic", "--order", "4",
                      "--format", "json")
    assert code == 0
    doc = json.loads(text)
    assert set(doc) == {"metadata", "records"}
    md = doc["metadata"]
    assert md["geometry"] == "p2_cubic"
    assert md["value_format"] == "exact rationals as p/q strings"
    assert "product_rule" in md and "pushforward" in md["product_rule"]
    assert "contact_one_convention" in md
    rows = {(r["series"], r["selector"]): r["value"] for r in doc["records"]}
    assert rows[("mirror_exponent", "y^1")] == "2"
    assert rows[("mirror_exponent", "y^3")] == "560/3"


def test_json_records_carry_structured_fields():
    _, text = _run("i-function", "--geometry", "p2_cubic", "--order", "2",
                   "--format", "json")
    doc = json.loads(text)
    first = doc["records"][0]
    for key in ("series", "selector", "value", "beta", "contact", "z", "log", "class"):
        assert key in first
    # every value parses back to an exact rational
    from fractions import Fraction

    for r in doc["records"]:
        Fraction(r["value"])


def test_csv_format():
    code, text = _run("proper-potential", "--geometry", "p2_cubic", "--order", "9",
                      "--format", "csv")
    assert code == 0
    lines = text.splitlines()
    comments = [ln for ln in lines if ln.startswith("# ")]
    assert any(ln.startswith("# geometry: p2_cubic") for ln in comments)
    header_at = next(i for i, ln in enumerate(lines) if not ln.startswith("#"))
    assert lines[header_at].startswith("series,selector,value")
    body = "\n".join(lines[header_at:])
    assert "t^3 x^-2,2" in body
    assert "t^9 x^-8,32" in body


def test_pretty_format_has_metadata_preamble():
    _, text = _run("quantum-period", "--geometry", "p2_cubic", "--order", "6")
    assert text.startswith("geometry: p2_cubic")
    assert "z_window:" in text
    assert "t^3" in text


# ---------------------------------------------------------------------------
# command content spot checks


def test_i_function_z_window_flag():
    code, text = _run("i-function", "--geometry", "p2_cubic", "--order", "2",
                      "--z-min", "-4", "--z-max", "1", "--format", "json")
    assert code == 0
    assert json.loads(text)["metadata"]["z_window"] == "[-4, 1]"


def test_tau_d_reports_zero_for_projective_pairs():
    code, text = _run("tau-d", "--geometry", "p2_cubic")
    assert code == 0
    assert "zero" in text


def test_mirror_map_emits_inverse_coordinates():
    _, text = _run("mirror-map", "--geometry", "p2_cubic", "--order", "4",
                   "--format", "json")
    rows = {(r["series"], r["selector"]): r["value"] for r in json.loads(text)["records"]}
    assert rows[("inverse_coordinate", "y: q^2")] == "-6"
    assert rows[("inverse_coordinate", "y: q^3")] == "9"
    assert rows[("composed_exponent", "q^2")] == "3"


def test_proper_potential_per_beta_rows():
    _, text = _run("proper-potential", "--geometry", "blp3_k3", "--order", "4",
                   "--format", "json")
    doc = json.loads(text)
    kinds = {r["series"] for r in doc["records"]}
    assert "proper_potential_term" in kinds  # multi-variable: per-class rows


def test_regularized_matches_quantum_times_factorial():
    import math
    from fractions import Fraction

    _, qtext = _run("quantum-period", "--geometry", "p3_quartic", "--order", "8",
                    "--format", "json")
    _, rtext = _run("regularized-period", "--geometry", "p3_quartic", "--order", "8",
                    "--format", "json")
    q = {r["t_deg"]: Fraction(r["value"]) for r in json.loads(qtext)["records"]}
    r = {r["t_deg"]: Fraction(r["value"]) for r in json.loads(rtext)["records"]}
    for d, v in q.items():
        assert r[d] == v * math.factorial(d)


def test_identities_deterministic_under_seed():
    a = _run("identities", "--seed", "11", "--cases", "3")
    b = _run("identities", "--seed", "11", "--cases", "3")
    assert a == b
    c = _run("identities", "--seed", "12", "--cases", "3")
    assert c[0] == 0  # different draws, still passing


# ---------------------------------------------------------------------------
# verify


def test_verify_passes_on_catalog():
    code, text = _run("verify", "--geometry", "p2_cubic", "--order", "6")
    assert code == 0
    assert "result: pass" in text
    assert "period_theorem        pass" in text


def test_verify_negative_control():
    code, text = _run("verify", "--geometry", "p2_cubic", "--order", "6",
                      "--negative-control")
    assert code == 0
    assert "pass (mismatch caught at t^3)" in text
    assert "MISMATCH" in text


def test_verify_skips_period_check_without_data():
    code, text = _run("verify", "--geometry", "blp3_k3", "--order", "4")
    assert code == 0
    assert "skipped" in text
    assert "euler_scaling" in text


def test_verify_negative_control_needs_period_data(capsys):
    code = run(["verify", "--geometry", "blp3_k3", "--order", "4",
                "--negative-control"], stream=io.StringIO())
    assert code == 2


# ---------------------------------------------------------------------------
# error handling


def test_unknown_geometry(capsys):
    code = run(["tau-d", "--geometry", "p9_nonic"], stream=io.StringIO())
    assert code == 2
    assert "error:" in capsys.readouterr().err


def test_order_must_be_at_least_two(capsys):
    code = run(["quantum-period", "--geometry", "p2_cubic", "--order", "1"],
               stream=io.StringIO())
    assert code == 2


def test_quantum_period_without_data(capsys):
    code = run(["quantum-period", "--geometry", "blp3_k3", "--order", "4"],
               stream=io.StringIO())
    assert code == 2
    assert "x_point" in capsys.readouterr().err


def test_missing_subcommand_and_bad_flag():
    with pytest.raises(SystemExit):
        build_parser().parse_args([])
    assert run([], stream=io.StringIO()) == 2
    assert run(["i-function", "--no-such-flag"], stream=io.StringIO()) == 2


def test_table_flag_reads_a_file(tmp_path):
    table = tmp_path / "points.tsv"
    table.write_text("x_point 1 1 pt 1\nx_point 2 4 pt 1/8\nx_point 3 7 pt 1/216\n")
    code, text = _run("quantum-period", "--geometry", "p2_cubic", "--order", "9",
                      "--table", str(table), "--format", "json")
    assert code == 0
    doc = json.loads(text)
    values = {r["t_deg"]: r["value"] for r in doc["records"]}
    assert values[9] == "1/216"


def test_table_flag_enables_quantum_side(tmp_path):
    # blp3_k3 has no builtin x_point source; attaching one must light it up,
    # exactly as the MissingDataError message promises.
    table = tmp_path / "points.tsv"
    table.write_text("x_point 0,2 0 pt 5\nx_point 0,3 1 pt 7\n")
    code, text = _run("quantum-period", "--geometry", "blp3_k3", "--order", "3",
                      "--table", str(table), "--format", "json")
    assert code == 0
    doc = json.loads(text)
    values = {r["t_deg"]: r["value"] for r in doc["records"]}
    assert values == {0: "1", 2: "5", 3: "7"}


def test_table_flag_rejects_wrong_class_shape(tmp_path, capsys):
    table = tmp_path / "points.tsv"
    table.write_text("x_point 1 0 pt 5\n")
    code = run(["quantum-period", "--geometry", "blp3_k3", "--order", "3",
                "--table", str(table)], stream=io.StringIO())
    assert code == 2
    assert "components" in capsys.readouterr().err


def test_geometry_flag_reads_a_config_file(tmp_path, capsys):
    from conftest import SYNTHETIC_NEGATIVE

    cfg = tmp_path / "pair.ini"
    cfg.write_text(SYNTHETIC_NEGATIVE)
    code, text = _run("tau-d", "--geometry", str(cfg))
    assert code == 0
    assert "2" in text


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "mirrorpair.cli", "tau-d", "--geometry", "p2_cubic"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert "zero" in proc.stdout
