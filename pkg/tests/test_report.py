import csv
import json
import math

import pytest

from voiceroute.pipeline import write_artifact
from voiceroute.report import compute_summary, emit_plot_data
from voiceroute.router import Mode

from synthetic import synth, table1_artifacts


def test_counts_modes():
    arts = [synth(0, Mode.ONLINE, True, True), synth(1, Mode.ONLINE, False, False), synth(2, Mode.OFFLINE, False, True)]
    s = compute_summary(arts)
    assert (s.online_count, s.offline_count, s.total_samples) == (2, 1, 3)
    assert s.routed_pct == 100.0


def test_asr_percentage():
    arts = [synth(i, Mode.ONLINE, i == 0, False) for i in range(4)]
    assert compute_summary(arts).asr_correct_pct == 25.0


def test_empty_has_no_division_by_zero():
    s = compute_summary([])
    assert s.total_samples == 0 and s.routed_pct is None and s.asr_correct_pct is None
    assert s.avg_cpu_pct is None and s.no_repair_correct_online_pct is None


def test_table1_counts():
    s = compute_summary(table1_artifacts())
    assert (s.online_count, s.offline_count) == (43, 37)
    assert (s.asr_correct_count, s.no_repair_correct_count, s.end_to_end_no_repair_count) == (50, 38, 23)
    assert s.no_repair_correct_online_pct == pytest.approx(100 * 31 / 43)
    assert s.no_repair_correct_offline_pct == pytest.approx(100 * 7 / 37)


def test_averages_use_raw_metrics():
    arts = [synth(0, Mode.OFFLINE, True, True, cpu=10, temp=40, lat=100), synth(1, Mode.ONLINE, True, True, cpu=30, temp=44, lat=50)]
    s = compute_summary(arts)
    assert s.avg_cpu_pct == 20 and s.avg_temp_c == 42 and s.avg_latency_ms == 75
    assert s.avg_cpu_pct_perturbed == 60 and s.avg_temp_c_perturbed == 52


def test_failed_probes_excluded_from_latency_average():
    a = synth(0, Mode.OFFLINE, True, True, lat=math.inf)
    b = synth(1, Mode.ONLINE, True, True, lat=40)
    s = compute_summary([a, b])
    assert s.avg_latency_ms == 40 and s.probe_failures == 1


def rescan(directory):
    """Independent summary oracle: read the JSON files directly."""
    rows = [json.loads(p.read_text()) for p in sorted(directory.glob("*.json"))]
    n = len(rows)
    online = [r for r in rows if r["decision"]["mode"] == "Online"]
    offline = [r for r in rows if r["decision"]["mode"] == "Offline"]
    lat = [r["metrics"]["raw"]["latency_ms"] for r in rows if r["metrics"]["raw"]["latency_ms"] is not None]
    return {
        "total_samples": n,
        "online_count": len(online),
        "offline_count": len(offline),
        "asr_correct_pct": 100 * sum(r["transcript"]["asr_correct"] for r in rows) / n,
        "no_repair_correct_pct": 100 * sum(r["no_repair_correct"] for r in rows) / n,
        "no_repair_correct_online_pct": 100 * sum(r["no_repair_correct"] for r in online) / len(online),
        "no_repair_correct_offline_pct": 100 * sum(r["no_repair_correct"] for r in offline) / len(offline),
        "end_to_end_no_repair_pct": 100
        * sum(r["transcript"]["asr_correct"] and r["no_repair_correct"] for r in rows)
        / n,
        "avg_cpu_pct": sum(r["metrics"]["raw"]["cpu_pct"] for r in rows) / n,
        "avg_temp_c": sum(r["metrics"]["raw"]["temp_c"] for r in rows) / n,
        "avg_latency_ms": sum(lat) / len(lat),
    }


def test_summary_matches_file_rescan(tmp_path):
    arts = table1_artifacts()
    for a in arts:
        write_artifact(a, tmp_path)
    s = compute_summary(arts).to_dict()
    for key, value in rescan(tmp_path).items():
        assert s[key] == pytest.approx(value), key


def test_plot_csvs(tmp_path):
    arts = [synth(i, Mode.ONLINE, True, True, cpu=10 + i, temp=40 + i, lat=50 + i) for i in range(3)]
    paths = emit_plot_data(arts, tmp_path)
    assert sorted(p.name for p in paths) == ["latency.csv", "temperature.csv", "workload.csv"]
    with open(tmp_path / "workload.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["sample_index", "value"]
    assert [(int(i), float(v)) for i, v in rows[1:]] == [(0, 10.0), (1, 11.0), (2, 12.0)]
    with open(tmp_path / "temperature.csv") as fh:
        assert [float(r[1]) for r in list(csv.reader(fh))[1:]] == [a.raw_metrics.temp_c for a in arts]


def test_plot_empty(tmp_path):
    emit_plot_data([], tmp_path)
    for name in ("latency.csv", "temperature.csv", "workload.csv"):
        assert (tmp_path / name).read_text() == "sample_index,value\n"


def test_plot_failed_probe_blank(tmp_path):
    emit_plot_data([synth(0, Mode.OFFLINE, True, True, lat=math.inf)], tmp_path)
    assert (tmp_path / "latency.csv").read_text().splitlines()[1] == "0,"
