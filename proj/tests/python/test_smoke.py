import json
import math
import os
import subprocess

import pytest

import rdslab


def test_version():
    assert rdslab.__version__ == "0.1.0"


def test_partial_sum_and_evaluate():
    seq = rdslab.FrequencySequence.explicit([2.0, 3.0, 4.0])
    path = rdslab.SamplePath.constant(seq, 1)
    assert rdslab.partial_sum(path, 1.0, 10.0) == pytest.approx(13 / 12, rel=1e-15)
    mixed = path.forced({1: -1})
    assert rdslab.partial_sum(mixed, 1.0, 10.0) == pytest.approx(1 / 12, rel=1e-14)

    nat = rdslab.FrequencySequence.naturals()
    cert = rdslab.tail_certificate(nat, 0.75, 1000.0, 0.05)
    v = rdslab.evaluate(rdslab.SamplePath.random(nat, 4, 0), 1.25, cert)
    assert v.certificate == "probabilistic"
    assert v.error_radius == pytest.approx(cert.sup_bound / math.sqrt(1000.0), rel=1e-12)
    with pytest.raises(ValueError):
        rdslab.evaluate(rdslab.SamplePath.random(nat, 4, 0), 0.7, cert)


def test_scan_counts_one_zero():
    seq = rdslab.FrequencySequence.explicit([2.0, 3.0, 4.0])
    path = rdslab.SamplePath.constant(seq, 1).forced({1: -1})
    report = rdslab.scan(path, 0.1, 3.0, cutoff=1000.0)
    assert report["sign_changes"] == 1
    lo, hi = report["sign_change_brackets"][0]
    assert lo <= 1.2931740756 <= hi


def test_no_zero_certification():
    nat = rdslab.FrequencySequence.naturals()
    assert rdslab.certify_no_zeros(rdslab.SamplePath.constant(nat, 1), 0.6, cutoff=1e4)["no_zero_certified"]


def test_bounds():
    assert rdslab.hoeffding_bound([1.0, 1.0], 2.0) == pytest.approx(math.exp(-1))
    num, log2_den = rdslab.exact_tail([1.0, 1.0], 2.0)
    assert num / 2**log2_den == 0.25
    lo, hi = rdslab.wilson_interval(0, 100)
    assert lo == 0.0 and hi == pytest.approx(0.0370, abs=1e-4)
    with pytest.raises(RuntimeError):
        rdslab.exact_tail([1.0] * 25, 1.0)


def test_limits():
    assert rdslab.ks_statistic([0.0]) == pytest.approx(0.5)
    two = rdslab.FrequencySequence.explicit([2.0])
    assert rdslab.char_function(two, 1.0, 0.7, 10.0) == pytest.approx(math.cos(0.7))
    values = rdslab.clt_sample(rdslab.FrequencySequence.explicit([3.0]), 1, 20, 0.8, 10.0)
    assert set(values) <= {-1.0, 1.0}
    assert rdslab.variance_profile(rdslab.FrequencySequence.naturals(), 1.0)["y"] == pytest.approx(math.e)


def test_run_experiment():
    doc = rdslab.run("no-zeros", seq="explicit", seq_values=[2, 3], sigma_lo=0.1, exhaustive=True)
    assert doc["schema"] == "rds-report/1"
    assert doc["payload"]["certified"]["fraction"] == 1.0
    a = rdslab.run("inequalities", n=6, instances=4, workers=1)
    b = rdslab.run("inequalities", n=6, instances=4, workers=2)
    assert a["payload"] == b["payload"]
    assert a["config_hash"] == b["config_hash"]
    with pytest.raises(ValueError):
        rdslab.run("clt", trials=0)


@pytest.mark.skipif("RDS_CLI" not in os.environ, reason="command-line tool path not given")
def test_cli_matches_module(tmp_path):
    cli = os.environ["RDS_CLI"]
    done = subprocess.run([cli, "inequalities", "--n", "6", "--instances", "4", "--out", str(tmp_path), "--quiet"])
    assert done.returncode == 0
    written = [p for p in tmp_path.iterdir() if p.suffix == ".json"]
    assert len(written) == 1
    doc = json.loads(written[0].read_text())
    assert doc["payload"] == rdslab.run("inequalities", n=6, instances=4)["payload"]
    assert subprocess.run([cli, "inequalities", "--n", "30", "--out", str(tmp_path)],
                          capture_output=True).returncode == 2
