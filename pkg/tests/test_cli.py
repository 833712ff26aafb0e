import json
import math
import sys
from pathlib import Path

import numpy as np
import pytest
from click.testing import CliRunner

from hosi.cli import (
    SpecParseError,
    compare_rows,
    main,
    parse_function_spec,
    parse_subset_selector,
    read_rows,
)
from hosi.core import VarSubset

EVALUATORS = Path(__file__).parent / "evaluators"


def run_cli(*args):
    return CliRunner().invoke(main, [str(a) for a in args], catch_exceptions=False)


class TestFunctionSpecGrammar:
    def test_rect_is_oracle_capable(self):
        parsed = parse_function_spec("rect:eps=0.1,0.2")
        assert parsed.dim == 2
        assert parsed.oracle_capable
        assert parsed.function((0.05, 0.1)) == 1.0

    def test_rect_with_offset(self):
        parsed = parse_function_spec("rect:eps=0.2,0.2,offset=0.5,0.0")
        assert parsed.function((0.6, 0.1)) == 1.0
        assert parsed.function((0.4, 0.1)) == 0.0

    def test_gfunction(self):
        parsed = parse_function_spec("gfunction:a=0,1,9")
        assert parsed.dim == 3
        assert parsed.oracle_capable

    def test_product_factors(self):
        parsed = parse_function_spec("product:linear(mu=1,tau=0.5),cosine(1,0.3)")
        assert parsed.dim == 2
        assert parsed.oracle_capable

    def test_additive_with_mu(self):
        parsed = parse_function_spec("additive:mu=0.7,linear(0,0.5),table(1,-1)")
        assert parsed.dim == 2
        assert parsed.function((0.5, 0.2)) == pytest.approx(0.7 + 0.0 + 1.0)

    def test_extern_requires_dim(self):
        with pytest.raises(SpecParseError, match="--dim"):
            parse_function_spec("extern:./model.sh")

    def test_extern_not_oracle_capable(self):
        parsed = parse_function_spec(f"extern:{sys.executable} {EVALUATORS / 'first_coord.py'}", dim=2)
        assert not parsed.oracle_capable
        parsed.function.close()

    def test_grid_file(self, tmp_path):
        path = tmp_path / "grid.json"
        path.write_text(json.dumps({"values": [[1.0, -1.0], [-1.0, 1.0]]}))
        parsed = parse_function_spec(f"grid:{path}")
        assert parsed.dim == 2
        assert parsed.oracle_capable
        assert parsed.function((0.1, 0.9)) == -1.0

    def test_unknown_family_position(self):
        with pytest.raises(SpecParseError, match="position 0"):
            parse_function_spec("blob:a=1")

    def test_malformed_factor_reports_position(self):
        with pytest.raises(SpecParseError, match="position"):
            parse_function_spec("product:linear(mu=1,tau=0.5),bogus!!")

    def test_dimension_comes_from_args(self):
        assert parse_function_spec("rect:eps=0.1,0.2,0.3,0.4").dim == 4


class TestSubsetSelector:
    def test_named_selectors(self):
        assert [str(u) for u in parse_subset_selector("singletons", 3)] == ["{1}", "{2}", "{3}"]
        assert len(parse_subset_selector("all", 3)) == 8
        assert len(parse_subset_selector("pairs", 4)) == 6

    def test_explicit_list(self):
        subs = parse_subset_selector("{1,3};{2}", 3)
        assert [str(u) for u in subs] == ["{1,3}", "{2}"]

    def test_all_capped(self):
        with pytest.raises(ValueError):
            parse_subset_selector("all", 25)


class TestCompareRows:
    def test_z_rules(self):
        est = [
            {"subset": "{1}", "value": 1.0, "std_error": 0.1},
            {"subset": "{2}", "value": 0.0, "std_error": 0.0},
        ]
        rows, bad = compare_rows(est, {"{1}": 1.2, "{2}": 0.0}, z_max=4.0)
        assert rows[0]["z"] == pytest.approx(-2.0)
        assert rows[1]["z"] == 0.0
        assert bad == 0

    def test_exceeding_z_flags_failure(self):
        est = [{"subset": "{1}", "value": 1.0, "std_error": 0.1}]
        rows, bad = compare_rows(est, {"{1}": 2.0}, z_max=4.0)
        assert bad == 1

    def test_zero_se_mismatch_is_infinite(self):
        est = [{"subset": "{1}", "value": 0.0, "std_error": 0.0}]
        rows, bad = compare_rows(est, {"{1}": 1e-9}, z_max=4.0)
        assert math.isinf(rows[0]["z"])
        assert bad == 1


class TestCliCommands:
    def test_estimate_csv(self, tmp_path):
        out = tmp_path / "est.csv"
        res = run_cli(
            "estimate", "--function", "rect:eps=0.25,0.5", "--family", "moment",
            "--p", "2", "--subsets", "all", "--n", "2000", "--seed", "1", "--out", out,
        )
        assert res.exit_code == 0
        config, rows = read_rows(str(out))
        assert config["seed"] == 1 and config["dim"] == 2
        assert [r["subset"] for r in rows] == ["{}", "{1}", "{2}", "{1,2}"]

    def test_oracle_requires_capability(self, tmp_path):
        res = CliRunner().invoke(
            main,
            ["oracle", "--function", f"extern:{sys.executable} x.py", "--dim", "2"],
        )
        assert res.exit_code != 0
        assert "estimate" in res.output  # suggests the estimate command

    def test_oracle_values(self, tmp_path):
        out = tmp_path / "oracle.csv"
        res = run_cli(
            "oracle", "--function", "rect:eps=0.1,0.2", "--p", "3", "--subsets", "{1}", "--out", out,
        )
        assert res.exit_code == 0
        _, rows = read_rows(str(out))
        assert rows[0]["value"] == pytest.approx(7.92e-4, rel=1e-9)
        assert rows[0]["estimator"] == "oracle"

    def test_compare_passes_at_standard_z(self, tmp_path):
        out = tmp_path / "cmp.csv"
        res = run_cli(
            "compare", "--function", "gfunction:a=0,1", "--family", "moment", "--p", "2",
            "--subsets", "singletons", "--n", "20000", "--seed", "2", "--out", out,
        )
        assert res.exit_code == 0
        _, rows = read_rows(str(out))
        assert all(abs(r["z"]) <= 4.0 for r in rows)

    def test_compare_fails_with_tiny_zmax(self, tmp_path):
        out = tmp_path / "cmp.csv"
        res = CliRunner().invoke(
            main,
            [
                "compare", "--function", "gfunction:a=0,1", "--family", "moment", "--p", "2",
                "--subsets", "singletons", "--n", "5000", "--seed", "3",
                "--z-max", "1e-8", "--out", str(out),
            ],
        )
        assert res.exit_code == 1

    def test_walsh_family_runs(self, tmp_path):
        out = tmp_path / "w.csv"
        res = run_cli(
            "estimate", "--function", "product:table(1,-1,0.5,2)", "--family", "walsh",
            "--base", "2", "--p", "4", "--subsets", "{1}", "--n", "4000", "--out", out,
        )
        assert res.exit_code == 0
        _, rows = read_rows(str(out))
        assert rows[0]["family"] == "walsh(2)"

    def test_invalid_config_messages(self):
        res = CliRunner().invoke(
            main,
            ["estimate", "--function", "rect:eps=0.1", "--family", "fourier", "--estimator", "centered"],
        )
        assert res.exit_code != 0
        assert "estimator" in res.output

    def test_total_effect_via_cli(self, tmp_path):
        out = tmp_path / "t.csv"
        res = run_cli(
            "estimate", "--function", "gfunction:a=0,1", "--family", "moment",
            "--estimator", "total", "--subsets", "{2}", "--n", "5000", "--out", out,
        )
        assert res.exit_code == 0
        _, rows = read_rows(str(out))
        assert rows[0]["estimator"] == "classical_total"


class TestOutputContracts:
    def test_byte_identical_reruns(self, tmp_path):
        args = [
            "estimate", "--function", "rect:eps=0.1,0.2", "--p", "3", "--subsets", "all",
            "--n", "3000", "--seed", "7",
        ]
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert run_cli(*args, "--out", a).exit_code == 0
        assert run_cli(*args, "--out", b).exit_code == 0
        assert a.read_bytes() == b.read_bytes()

    def test_csv_json_numeric_identity(self, tmp_path):
        base = [
            "estimate", "--function", "gfunction:a=0,9", "--p", "2", "--subsets", "all",
            "--n", "2000", "--seed", "5",
        ]
        csv_path, json_path = tmp_path / "o.csv", tmp_path / "o.json"
        run_cli(*base, "--format", "csv", "--out", csv_path)
        run_cli(*base, "--format", "json", "--out", json_path)
        _, csv_rows = read_rows(str(csv_path))
        _, json_rows = read_rows(str(json_path))
        assert len(csv_rows) == len(json_rows)
        for a, b in zip(csv_rows, json_rows):
            assert a["value"] == b["value"]  # exact: shortest round-trip reprs
            assert a["std_error"] == b["std_error"]

    def test_header_records_full_config(self, tmp_path):
        out = tmp_path / "h.csv"
        run_cli(
            "estimate", "--function", "rect:eps=0.5,0.5", "--p", "2", "--subsets", "{1}",
            "--n", "2000", "--seed", "99", "--out", out,
        )
        first = out.read_text().splitlines()[0]
        assert first.startswith("# config: ")
        config = json.loads(first[len("# config: ") :])
        assert config["seed"] == 99
        assert config["function"] == "rect:eps=0.5,0.5"
        assert config["n"] == 2000


class TestTransform:
    def test_oracle_roundtrip_to_components(self, tmp_path):
        from hosi.oracles import rectangle_indices

        cum_path = tmp_path / "cum.csv"
        run_cli(
            "oracle", "--function", "rect:eps=0.1,0.2,0.3", "--p", "4", "--subsets", "all",
            "--out", cum_path,
        )
        comp_path = tmp_path / "comp.csv"
        res = run_cli("transform", "--in", cum_path, "--out", comp_path)
        assert res.exit_code == 0
        _, rows = read_rows(str(comp_path))
        for row in rows:
            u = VarSubset.parse(row["subset"], 3)
            expected = rectangle_indices((0.1, 0.2, 0.3), u, 4, "moment").component
            assert row["value"] == pytest.approx(expected, abs=1e-12)
            assert row["estimator"] == "oracle+moebius"

    def test_propagated_errors(self, tmp_path):
        est_path = tmp_path / "est.csv"
        run_cli(
            "estimate", "--function", "gfunction:a=0,1", "--p", "2", "--subsets", "all",
            "--n", "4000", "--seed", "1", "--out", est_path,
        )
        out_path = tmp_path / "comp.csv"
        run_cli("transform", "--in", est_path, "--out", out_path)
        _, est_rows = read_rows(str(est_path))
        _, comp_rows = read_rows(str(out_path))
        ses = {r["subset"]: r["std_error"] for r in est_rows}
        pair = next(r for r in comp_rows if r["subset"] == "{1,2}")
        expected = math.sqrt(sum(ses[s] ** 2 for s in ("{}", "{1}", "{2}", "{1,2}")))
        assert pair["std_error"] == pytest.approx(expected)

    def test_missing_subsets_fail(self, tmp_path):
        est_path = tmp_path / "est.csv"
        run_cli(
            "estimate", "--function", "gfunction:a=0,1", "--p", "2", "--subsets", "{1,2}",
            "--n", "2000", "--out", est_path,
        )
        res = CliRunner().invoke(main, ["transform", "--in", str(est_path)])
        assert res.exit_code != 0
