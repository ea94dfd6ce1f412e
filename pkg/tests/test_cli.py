import json
import os

import pytest

from cbtool import __version__
from cbtool.__main__ import EXIT_FAILED
from cbtool.__main__ import EXIT_INVALID
from cbtool.__main__ import EXIT_OK
from cbtool.__main__ import EXIT_UNSUPPORTED
from cbtool.__main__ import main
from cbtool.bundle import factorize_map
from cbtool.bundle import is_subchain_bundle
from cbtool.bundle import validate_chain_bundle_map
from cbtool.chains import BoundaryCondition
from cbtool.chains import build_gamma
from cbtool.chains import extract_chains
from cbtool.chains import InclusionsOnly
from cbtool.config import BOUND_ENV
from cbtool.document import load_file
from cbtool.document import Workspace

DATA = os.path.join(os.path.dirname(__file__), "data")


def data(name):
    return os.path.join(DATA, name)


def golden(name):
    with open(os.path.join(DATA, "golden", name), encoding="utf-8") as f:
        return f.read()


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture(autouse=True)
def no_bound_env(monkeypatch):
    monkeypatch.delenv(BOUND_ENV, raising=False)


def test_help(capsys):
    code, out, _ = run(capsys, "--help")
    assert code == EXIT_OK
    assert "usage: cbtool" in out
    assert "factorize" in out


def test_version(capsys):
    code, out, _ = run(capsys, "--version")
    assert code == EXIT_OK
    assert out.strip() == __version__


def test_no_command(capsys):
    code, _, err = run(capsys)
    assert code == EXIT_INVALID
    assert "usage" in err


def test_parser_errors(capsys):
    assert run(capsys, "--frobnicate")[0] == EXIT_INVALID
    assert run(capsys, "check")[0] == EXIT_INVALID
    assert run(capsys, "--format", "xml", "check", data("map_f.json"))[0] == EXIT_INVALID


def test_check_valid_map(capsys):
    code, out, _ = run(capsys, "check", data("map_f.json"))
    assert code == EXIT_OK
    assert "diagrammatic" in out
    assert out.rstrip().endswith("valid")


def test_check_tampered_map(capsys):
    code, out, _ = run(capsys, "check", data("map_f_tampered.json"))
    assert code == EXIT_FAILED
    assert "square: level (2, 1), k = 1" in out


def test_check_machine_output(capsys):
    code, out, _ = run(capsys, "--format", "machine", "check", data("map_f_tampered.json"))
    assert code == EXIT_FAILED
    doc = json.loads(out)
    assert doc["kind"] == "report"
    assert doc["valid"] is False
    assert doc["violations"][0] == {"rule": "square", "witness": [2, 1, 1]}


def test_check_category_and_workspace(capsys):
    assert run(capsys, "check", data("category_zero_arrow.json"))[0] == EXIT_OK
    assert run(capsys, "check", data("workspace.json"))[0] == EXIT_OK
    assert run(capsys, "check", data("workspace_cycle.json"))[0] == EXIT_INVALID


def test_check_bad_documents(capsys):
    assert run(capsys, "check", data("malformed.json"))[0] == EXIT_INVALID
    assert run(capsys, "check", data("does_not_exist.json"))[0] == EXIT_INVALID


def test_subchain(capsys):
    code, out, _ = run(capsys, "subchain", data("bundle_6_4_16.json"), data("bundle_3_2_8.json"))
    assert code == EXIT_OK
    assert out.startswith("subchain")

    code, out, _ = run(capsys, "subchain", data("bundle_9_4_16.json"), data("bundle_3_2_8.json"))
    assert code == EXIT_FAILED
    assert out.strip() == "level (9ℤ, 4ℤ): 4/9 not in family 2/3·k"

    code, _, _ = run(
        capsys, "--strict-corestriction", "subchain", data("bundle_6_4_16.json"), data("bundle_3_2_8.json")
    )
    assert code == EXIT_FAILED


def test_subchain_machine_output(capsys):
    code, out, _ = run(capsys, "--format", "machine", "subchain", data("bundle_6_4_16.json"), data("bundle_3_2_8.json"))
    assert code == EXIT_OK
    doc = json.loads(out)
    assert doc["holds"] is True
    assert doc["witness"]["vertex_maps"] == [1, 1, 1, 0]


def test_factorize(capsys):
    code, out, _ = run(capsys, "factorize", data("map_g.json"))
    assert code == EXIT_OK
    assert out.splitlines()[0] == "middle: 12ℤ ⇛ 8ℤ ⇛ 2ℤ ⇛ 0"

    code, out, _ = run(capsys, "--format", "machine", "factorize", data("map_g.json"))
    assert json.loads(out)["middle"]["levels"] == [12, 8, 2, 0]


def test_factorize_refusals(capsys):
    assert run(capsys, "factorize", data("map_f_not_full.json"))[0] == EXIT_UNSUPPORTED
    assert run(capsys, "factorize", data("bundle_3_2_5.json"))[0] == EXIT_INVALID


def test_chains(capsys):
    code, out, _ = run(capsys, "chains", data("bundle_inclusion_runs.json"))
    assert code == EXIT_OK
    assert out.splitlines() == ["18ℤ → 9ℤ → 3ℤ → 0", "8ℤ → 4ℤ → 2ℤ → 0", "5ℤ → 0"]

    code, out, _ = run(capsys, "chains", data("bundle_inclusion_runs.json"), data("selector_explicit.json"))
    assert code == EXIT_OK
    assert len(out.splitlines()) == 5

    code, out, _ = run(capsys, "--format", "machine", "chains", data("bundle_inclusion_runs.json"))
    doc = json.loads(out)
    assert doc["kind"] == "chains"
    assert [c["vertices"] for c in doc["chains"]] == [[18, 9, 3, 0], [8, 4, 2, 0], [5, 0]]


def test_ambiguous_chains(capsys, tmp_path):
    with open(data("category_zero_arrow.json")) as f:
        category = json.load(f)
    category["inclusions"] = ["from_zero", "zero_a"]
    path = tmp_path / "ambiguous.json"
    path.write_text(
        json.dumps({"kind": "bundle", "backend": {"name": "presented", "category": category}, "levels": ["a", "a"]})
    )
    code, out, _ = run(capsys, "chains", str(path))
    assert code == EXIT_FAILED
    assert "2 inclusions" in out


def test_product_refused(capsys):
    assert run(capsys, "product", data("bundle_3_2_5.json"), data("bundle_6_4_1.json"))[0] == EXIT_UNSUPPORTED


def test_complexes(capsys):
    code, out, _ = run(capsys, "complexes", data("bundle_s3_a3.json"))
    assert code == EXIT_OK
    assert len(out.splitlines()) == 1

    code, out, _ = run(capsys, "complexes", data("bundle_s3_s3_a3.json"))
    assert code == EXIT_OK
    assert len(out.splitlines()) == 10

    assert run(capsys, "complexes", data("bundle_3_2_5.json"))[0] == EXIT_UNSUPPORTED


def test_bound_precedence(capsys, monkeypatch):
    assert run(capsys, "--bound", "5", "complexes", data("bundle_s3_s3_a3.json"))[0] == EXIT_UNSUPPORTED

    monkeypatch.setenv(BOUND_ENV, "5")
    assert run(capsys, "complexes", data("bundle_s3_s3_a3.json"))[0] == EXIT_UNSUPPORTED
    assert run(capsys, "--bound", "10", "complexes", data("bundle_s3_s3_a3.json"))[0] == EXIT_OK


def test_bound_from_config(capsys, tmp_path):
    config = tmp_path / "cbtool.yaml"
    config.write_text("bound: 5\n")
    assert run(capsys, "-c", str(config), "complexes", data("bundle_s3_s3_a3.json"))[0] == EXIT_UNSUPPORTED


def test_ambient_order_from_config(capsys, tmp_path):
    config = tmp_path / "cbtool.yaml"
    config.write_text("ambient_order: 5\n")
    assert run(capsys, "-c", str(config), "complexes", data("bundle_s3_a3.json"))[0] == EXIT_UNSUPPORTED


def test_config_errors(capsys, tmp_path):
    assert run(capsys, "-c", str(tmp_path / "absent.yaml"), "check", data("map_f.json"))[0] == EXIT_INVALID

    config = tmp_path / "cbtool.yaml"
    config.write_text("bound: 0\n")
    assert run(capsys, "-c", str(config), "check", data("map_f.json"))[0] == EXIT_INVALID


def test_gamma(capsys):
    code, out, _ = run(capsys, "gamma", data("bundle_inclusion_runs.json"))
    assert code == EXIT_OK
    assert "C0: 18ℤ → 9ℤ → 3ℤ → 0" in out
    assert "C0 → C1: 4/3ℤ@[0, 1, 2]" in out

    code, out, _ = run(capsys, "gamma", data("bundle_s3_a3.json"), "--selector", "boundary")
    assert code == EXIT_OK
    assert "C0 → C0: 30 chain maps" in out


def test_gamma_candidate_bound(capsys, tmp_path):
    config = tmp_path / "cbtool.yaml"
    config.write_text("candidate_bound: 5\n")
    code = run(capsys, "-c", str(config), "gamma", data("bundle_s3_a3.json"), "--selector", "boundary")[0]
    assert code == EXIT_UNSUPPORTED


def test_check_other_documents(capsys, caplog):
    assert run(capsys, "check", data("bundle_3_2_5.json"))[0] == EXIT_OK
    assert run(capsys, "check", data("bundle_s3_s3_a3.json"))[0] == EXIT_OK

    assert run(capsys, "check", data("selector_explicit.json"))[0] == EXIT_INVALID
    assert "cannot be checked" in caplog.text


@pytest.mark.parametrize(
    "argv,expected",
    [
        (["check", "map_f.json"], "check_map_f.txt"),
        (["--format", "machine", "check", "map_f.json"], "check_map_f.json"),
        (["subchain", "bundle_6_4_16.json", "bundle_3_2_8.json"], "subchain_6_4_16_in_3_2_8.txt"),
        (["subchain", "bundle_9_4_16.json", "bundle_3_2_8.json"], "subchain_9_4_16_in_3_2_8.txt"),
        (["--format", "machine", "subchain", "bundle_9_4_16.json", "bundle_3_2_8.json"], "subchain_9_4_16_in_3_2_8.json"),
        (["factorize", "map_g.json"], "factorize_map_g.txt"),
        (["chains", "bundle_inclusion_runs.json"], "chains_inclusion_runs.txt"),
        (["--format", "machine", "chains", "bundle_inclusion_runs.json"], "chains_inclusion_runs.json"),
    ],
)
def test_golden_output(capsys, argv, expected):
    args = [data(a) if a.endswith(".json") else a for a in argv]
    out = run(capsys, *args)[1]
    assert out == golden(expected)


def machine(capsys, *argv):
    out = run(capsys, "--format", "machine", *argv)[1]
    return Workspace().load(json.loads(out))


def test_machine_output_round_trips(capsys):
    F = load_file(data("map_f_tampered.json"))
    assert machine(capsys, "check", data("map_f_tampered.json")) == validate_chain_bundle_map(F)

    for small, big in (("bundle_6_4_16.json", "bundle_3_2_8.json"), ("bundle_9_4_16.json", "bundle_3_2_8.json")):
        verdict = is_subchain_bundle(load_file(data(small)), load_file(data(big)))
        assert machine(capsys, "subchain", data(small), data(big)) == verdict

    assert machine(capsys, "factorize", data("map_g.json")) == factorize_map(load_file(data("map_g.json")))

    runs = load_file(data("bundle_inclusion_runs.json"))
    assert machine(capsys, "chains", data("bundle_inclusion_runs.json")) == extract_chains(runs, InclusionsOnly())
    assert machine(capsys, "gamma", data("bundle_inclusion_runs.json")) == build_gamma([runs], InclusionsOnly())

    groups = load_file(data("bundle_s3_a3.json"))
    again = machine(capsys, "gamma", data("bundle_s3_a3.json"), "--selector", "boundary")
    assert again == build_gamma([groups], BoundaryCondition())
