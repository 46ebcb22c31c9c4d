import json
import os

import pandas as pd

METRICS = ["wall_ms", "visited_rows", "visited_leaves", "max_region_rows"]


def load_report(report_path):
    """Flatten a JSON-lines bench report into one row per (query, method)."""
    records = []
    with open(report_path) as f:
        for line in f:
            if not line.strip():
                continue
            try:
                records.append(json.loads(line))
            except json.JSONDecodeError:
                print(f"[WARNING] Skipping invalid JSON line: {line.strip()[:80]}")
    if not records:
        return pd.DataFrame(columns=["cluster_size", "k", "query_id", "method", *METRICS, "checksum"])
    return pd.json_normalize(records, record_path="methods", meta=["dataset", "n", "cluster_size", "k", "query_id"])


def summarize_report(df):
    """Mean metrics per (cluster_size, k, method) and the hsti / fullscan ratios."""
    means = df.groupby(["cluster_size", "k", "method"])[METRICS].mean().reset_index()
    pivot = means.pivot_table(index=["cluster_size", "k"], columns="method", values=["visited_rows", "wall_ms"])
    ratios = pd.DataFrame(index=pivot.index)
    if ("visited_rows", "hsti") in pivot and ("visited_rows", "fullscan") in pivot:
        ratios["visited_rows_ratio"] = pivot[("visited_rows", "hsti")] / pivot[("visited_rows", "fullscan")]
        ratios["wall_ms_ratio"] = pivot[("wall_ms", "hsti")] / pivot[("wall_ms", "fullscan")]
    return means, ratios.reset_index()


def checksum_mismatches(df):
    per_query = df.pivot(index=["cluster_size", "k", "query_id"], columns="method", values="checksum")
    if "hsti" not in per_query or "fullscan" not in per_query:
        return 0
    return int((per_query["hsti"] != per_query["fullscan"]).sum())


def analyze_report(report_path, summary_path=None):
    """
    Prints a summary of a bench report and writes the same text next to it.
    """
    summary_path = summary_path or f"{report_path}.summary.log"
    output_lines = []
    output_lines.append(
        "\n========================================================\n                BENCH REPORT ANALYSIS\n========================================================\n"
    )

    if not os.path.exists(report_path):
        output_lines.append(f"Report file not found: {report_path}\n")
    else:
        df = load_report(report_path)
        if df.empty:
            output_lines.append("Report holds no runs.\n")
        else:
            means, ratios = summarize_report(df)
            output_lines.append(f"Dataset(s):                            {', '.join(sorted(df['dataset'].unique()))}\n")
            output_lines.append(f"Queries per method:                    {len(df) // df['method'].nunique()}\n")
            output_lines.append(f"Checksum mismatches:                   {checksum_mismatches(df)}\n")

            output_lines.append(
                "\n--------------------------------------------------------\n                MEAN METRICS\n--------------------------------------------------------\n"
            )
            output_lines.append(means.to_string(index=False, float_format=lambda v: f"{v:.3f}") + "\n")

            if not ratios.empty and "visited_rows_ratio" in ratios:
                output_lines.append(
                    "\n--------------------------------------------------------\n                HSTI / FULLSCAN\n--------------------------------------------------------\n"
                )
                output_lines.append(ratios.to_string(index=False, float_format=lambda v: f"{v:.4f}") + "\n")

            hottest = means[means["method"] == "hsti"].groupby("cluster_size")["max_region_rows"].mean()
            if len(hottest) > 1:
                output_lines.append(
                    "\n--------------------------------------------------------\n                HOTTEST REGION ROWS (HSTI)\n--------------------------------------------------------\n"
                )
                for cluster_size, rows in hottest.items():
                    output_lines.append(f"cluster_size={cluster_size:<4}: {rows:.1f}\n")

    output_lines.append("========================================================\n")
    output = "".join(output_lines)
    print(output)

    os.makedirs(os.path.dirname(summary_path) or ".", exist_ok=True)
    with open(summary_path, "w") as f:
        f.write(output)
    return output
