import io

from hsti_indexer.config import Settings
from hsti_indexer.bench import run_bench
from utils.log_analyzer import analyze_report, checksum_mismatches, load_report, summarize_report
from utils.tools import format_duration, result_checksum


def write_report(tmp_path, objects):
    report = io.StringIO()
    run_bench(objects, Settings(k=[2, 4], cluster_size=[2], queries=3, grid_g=4), "unit", report)
    path = tmp_path / "report.jsonl"
    path.write_text(report.getvalue())
    return path


def test_load_and_summarize(tmp_path, make_objects):
    path = write_report(tmp_path, make_objects(600))
    df = load_report(str(path))
    assert len(df) == 2 * 3 * 2
    assert set(df["method"]) == {"hsti", "fullscan"}

    means, ratios = summarize_report(df)
    assert len(means) == 4
    assert len(ratios) == 2
    assert (ratios["visited_rows_ratio"] <= 1).all()
    assert checksum_mismatches(df) == 0


def test_analyze_report_writes_summary(tmp_path, make_objects):
    path = write_report(tmp_path, make_objects(600))
    output = analyze_report(str(path))
    assert "BENCH REPORT ANALYSIS" in output
    assert "Checksum mismatches:                   0" in output
    assert (tmp_path / "report.jsonl.summary.log").read_text() == output


def test_analyze_missing_report(tmp_path):
    output = analyze_report(str(tmp_path / "missing.jsonl"), summary_path=str(tmp_path / "summary.log"))
    assert "Report file not found" in output


def test_result_checksum_depends_on_order_and_values():
    a = result_checksum([(1, 1.0), (2, 2.0)])
    assert a == result_checksum([(1, 1.0), (2, 2.0)])
    assert a != result_checksum([(2, 2.0), (1, 1.0)])
    assert a != result_checksum([(1, 1.0), (2, 2.0000001)])
    assert len(a) == 8


def test_format_duration():
    assert format_duration(3661) == "1 hour, 1 minute, 1 second"
    assert format_duration(7325) == "2 hours, 2 minutes, 5 seconds"
