import json
import math

import pytest

from api.density import compute_density
from core.errors import InputError
from main import main


def _run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_density_exact(capsys):
    code, out, _ = _run(capsys, "density", "--rank", "2", "--q", "2", "--n", "2", "--x", "0,0", "--method", "dp")
    assert code == 0
    record = json.loads(out)
    assert record["exact"] is True
    assert record["exact_value"] == "1/14"
    assert record["lambda"] == [0, 0]
    assert record["density"] == pytest.approx(1 / 14)
    assert math.isfinite(record["estimate_log"])
    assert record["ratio"] > 0


def test_density_parity_zero(capsys):
    code, out, _ = _run(capsys, "density", "--rank", "1", "--n", "3", "--x", "2")
    assert code == 0
    record = json.loads(out)
    assert record["density"] == 0.0
    assert record["log_density"] is None


def test_density_with_estimate(capsys):
    code, out, _ = _run(capsys, "density", "--n", "30", "--x", "5,5")
    assert code == 0
    record = json.loads(out)
    assert record["method"] == "dp"
    assert record["ratio"] > 0


def test_density_weighted(capsys):
    code, out, _ = _run(capsys, "density", "--c1", "1/3", "--n", "1", "--x", "1,0")
    assert code == 0
    record = json.loads(out)
    assert record["c1"] == "1/3"
    assert record["exact_value"] == "1/21"


def test_density_to_file(capsys, tmp_path):
    target = tmp_path / "density.json"
    code, out, _ = _run(capsys, "density", "--n", "1", "--x", "1,0", "--out", str(target))
    assert code == 0
    assert out == ""
    assert json.loads(target.read_text(encoding="utf-8"))["exact_value"] == "1/14"


@pytest.mark.parametrize("argv", [
    ("density", "--rank", "2", "--x", "1,2,3"),
    ("density", "--x", "-1,0"),
    ("density", "--q", "1"),
    ("density", "--rank", "abc"),
    ("verify", "no-such-suite"),
    ("phase", "--delta", "0.6,0.6"),
])
def test_invalid_input_exits_with_two(capsys, argv):
    code, _, _ = _run(capsys, *argv)
    assert code == 2


def test_error_document_on_stderr(capsys):
    code, _, err = _run(capsys, "phase", "--delta", "0.6,0.6")
    assert code == 2
    assert '"error_type": "domain_error"' in err
    assert '"status": "error"' in err


def test_phase(capsys):
    code, out, _ = _run(capsys, "phase", "--delta", f"{3 / 14},{3 / 14}")
    assert code == 0
    record = json.loads(out)
    assert record["solution"]["phi"] == pytest.approx(-0.14291, abs=1e-5)


def test_empty_sweep_prints_header_only(capsys):
    code, out, _ = _run(capsys, "sweep", "rank2-interior", "--nmax", "1")
    assert code == 0
    assert out.splitlines() == ["n,x1,x2,|x|,d,log_p_oracle,log_estimate,ratio,regime"]


def test_sweep_csv(capsys):
    code, out, err = _run(capsys, "sweep", "rank1", "--rank", "1", "--nmax", "6")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "n,x1,|x|,d,log_p_oracle,log_estimate,ratio,regime"
    assert lines[-1].startswith("summary,")
    assert "c_min=" in lines[-1]
    assert '"region": "rank1"' in err


def test_table(capsys):
    code, out, err = _run(capsys, "table")
    assert code == 0
    document = json.loads(out)
    assert document["passed"] is True
    assert document["table"]["entries"]["origin"] == {"1,0": "1/2", "0,1": "1/2"}
    assert document["table"]["entries"]["wall-1"]["-1,0"] == "1/14"
    assert "suite table: PASS" in err


def test_verify_suite(capsys):
    code, out, _ = _run(capsys, "verify", "aperiodicity", "--nmax", "10")
    assert code == 0
    assert json.loads(out)["suite"] == "aperiodicity"


def test_estimate_where_newton_used_to_stall(capsys):
    code, out, _ = _run(capsys, "density", "--n", "75", "--x", "7,0", "--method", "estimate")
    assert code == 0
    record = json.loads(out)
    assert math.isfinite(record["estimate_log"])


def test_dispatcher(a2, a3):
    assert compute_density(a2, 3, (1, 1)).method == "dp"
    exact = compute_density(a2, 3, (1, 1), method="dp").log_value
    assert exact == pytest.approx(math.log(15 / (98 * 42)))
    assert compute_density(a2, 3, (1, 1), method="fourier").log_value == pytest.approx(exact, abs=1e-6)
    assert compute_density(a3, 0, (0, 0, 0)).method == "fourier"
    assert compute_density(a2, 30, (10, 10), method="estimate").method == "estimate"
    with pytest.raises(InputError):
        compute_density(a2, 3, (1, 1), method="nope")
