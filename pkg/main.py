import argparse
import json
import os
import sys
import time

import pandas as pd
from dotenv import load_dotenv

from hsti_indexer.bench import build, gen_data, ingest, run_bench
from hsti_indexer.config import Settings, load_settings
from hsti_indexer.errors import ChecksumMismatchError, HSTIError
from hsti_indexer.geo_core import QuerySpec, TimeInterval
from hsti_indexer.query_engine import knn_search
from utils.log_analyzer import analyze_report
from utils.tools import create_folder, format_duration, reset_log, write_log_entry

EXIT_OK = 0
EXIT_CHECKSUM = 1
EXIT_USAGE = 2
EXIT_IO = 3

SETTING_FLAGS = ["k", "cluster_size", "interval_width", "xi", "depth_l", "grid_g", "seed", "queries", "spatial_region"]


def add_setting_flags(parser):
    parser.add_argument("--config", help="Flat key=value file; flags override its values.")
    parser.add_argument("--k", help="Comma separated k values (default 100).")
    parser.add_argument("--cluster-size", help="Comma separated cluster sizes (default 4).")
    parser.add_argument("--interval-width", type=float, help="Query interval width in time units (default 200).")
    parser.add_argument("--xi", type=int, help="Z-Octree split threshold (default 200).")
    parser.add_argument("--depth-l", type=int, help="Deepest Z-Octree level L (default 16).")
    parser.add_argument("--grid-g", type=int, help="META grid depth g, 4^g cells (default 6).")
    parser.add_argument("--seed", type=int, help="Seed for query generation (default 42).")
    parser.add_argument("--queries", type=int, help="Queries per sweep point (default 100).")
    parser.add_argument(
        "--spatial-region", type=float, help="Recorded in the report for reference; kNN queries do not use it."
    )


def settings_from_args(args) -> Settings:
    overrides = {name: getattr(args, name, None) for name in SETTING_FLAGS}
    return load_settings(
        config_path=getattr(args, "config", None),
        overrides=overrides,
        full_sweep=getattr(args, "full_sweep", False),
    )


def build_parser():
    parser = argparse.ArgumentParser(description="Two-layer spatio-temporal kNN index: data, builds and benchmarks.")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen-data", help="Write a synthetic oid,x,y,t dataset.")
    gen.add_argument("--n", type=int, required=True, help="Number of records.")
    gen.add_argument("--distribution", choices=["uniform", "clustered"], default="uniform")
    gen.add_argument("--clusters", type=int, default=5, help="Cluster count for the clustered distribution.")
    gen.add_argument("--sigma", type=float, default=250.0, help="Spread of each cluster in world units.")
    gen.add_argument("--seed", type=int, default=42)
    gen.add_argument("--out", help="Output CSV (default DATA_PATH/synthetic_<distribution>_<n>.csv).")

    check = sub.add_parser("ingest-check", help="Parse and normalize a dataset, reporting rejected rows.")
    check.add_argument("dataset")
    check.add_argument("--out", help="Write the normalized dataset to this CSV.")

    bench = sub.add_parser("bench", help="Run the hsti versus fullscan sweep.")
    bench.add_argument("dataset")
    bench.add_argument("--report", help="JSON-lines report path (default DATA_PATH/bench_report.jsonl).")
    bench.add_argument("--full-sweep", action="store_true", help="k = 10..500 and cluster sizes 2, 4, 6, 8.")
    bench.add_argument("--no-mbr", action="store_true", help="Disable MBR pruning of leaves.")
    add_setting_flags(bench)

    query = sub.add_parser("query", help="Run one kNN query and print the result list as JSON.")
    query.add_argument("dataset")
    query.add_argument("--x", type=float, required=True)
    query.add_argument("--y", type=float, required=True)
    query.add_argument("--t-start", type=float, required=True)
    query.add_argument("--t-end", type=float, required=True)
    query.add_argument("--no-mbr", action="store_true")
    query.add_argument("--literal", action="store_true", help="Run the search loop without the completion sweep.")
    add_setting_flags(query)

    summarize = sub.add_parser("summarize", help="Summarize a bench report.")
    summarize.add_argument("report")
    return parser


def cmd_gen_data(args, data_path):
    out = args.out or os.path.join(data_path, f"synthetic_{args.distribution}_{args.n}.csv")
    print(f">>> Generating {args.n} {args.distribution} records (seed {args.seed})...")
    gen_data(out, args.n, args.distribution, seed=args.seed, clusters=args.clusters, sigma=args.sigma)
    print(f"[SUCCESS] Dataset written to {os.path.relpath(out, start=os.getcwd())}")
    return EXIT_OK


def cmd_ingest_check(args, detailed_log_path):
    print(f">>> Ingesting {args.dataset}...")
    result = ingest(args.dataset, detailed_log_path=detailed_log_path)
    print(f"   >> Rows accepted: {result.rows}")
    print(f"   >> Rows rejected: {result.rejected_count}")
    if args.out:
        create_folder(os.path.dirname(args.out) or ".", is_full=True)
        df = pd.DataFrame([(o.oid, o.x, o.y, o.t) for o in result.objects], columns=["oid", "x", "y", "t"])
        df.to_csv(args.out, index=False)
        print(f"   >> Normalized copy: {os.path.relpath(args.out, start=os.getcwd())}")
    print("[SUCCESS] Ingest check completed")
    return EXIT_OK


def cmd_bench(args, detailed_log_path):
    settings = settings_from_args(args)
    report_path = args.report or os.path.join(settings.data_path, "bench_report.jsonl")
    create_folder(os.path.dirname(report_path) or ".", is_full=True)

    print(f">>> Ingesting {args.dataset}...")
    dataset = ingest(args.dataset, detailed_log_path=detailed_log_path)
    print(f"   >> {dataset.rows} objects, {dataset.rejected_count} rejected rows")

    start_time = time.time()
    with open(report_path, "w") as report:
        run_bench(
            dataset.objects,
            settings,
            os.path.basename(args.dataset),
            report,
            detailed_log_path=detailed_log_path,
            use_mbr=not args.no_mbr,
        )
    print(f"[SUCCESS] Bench completed in {format_duration(time.time() - start_time)}")
    print(f"   >> Report: {os.path.relpath(report_path, start=os.getcwd())}")
    analyze_report(report_path)
    return EXIT_OK


def cmd_query(args, detailed_log_path):
    settings = settings_from_args(args)
    dataset = ingest(args.dataset, detailed_log_path=detailed_log_path)
    cluster, metrics = build(dataset.objects, settings.cluster_size[0], settings)
    q = QuerySpec(args.x, args.y, TimeInterval(args.t_start, args.t_end), settings.k[0])
    result = knn_search(cluster, q, use_mbr=not args.no_mbr, mode="literal" if args.literal else "best_first")
    payload = {
        "query": {"x": q.x_q, "y": q.y_q, "t_start": q.interval.t_start, "t_end": q.interval.t_end, "k": q.k},
        "cluster_size": metrics.cluster_size,
        "results": result.to_records(),
        "stats": result.stats.to_dict(),
    }
    print(json.dumps(payload, indent=2))
    return EXIT_OK


def log_failure(detailed_log_path, stage, status, error):
    if os.path.isdir(os.path.dirname(detailed_log_path)):
        write_log_entry(detailed_log_path, stage, status, message=str(error))


def main(argv=None):
    load_dotenv()
    args = build_parser().parse_args(argv)
    data_path = os.getenv("DATA_PATH") or "data"
    detailed_log_path = os.path.join(data_path, "hsti_detailed_log.jsonl")

    try:
        if args.command == "summarize":
            analyze_report(args.report)
            return EXIT_OK
        reset_log(detailed_log_path)
        if args.command == "gen-data":
            return cmd_gen_data(args, data_path)
        if args.command == "ingest-check":
            return cmd_ingest_check(args, detailed_log_path)
        if args.command == "bench":
            return cmd_bench(args, detailed_log_path)
        return cmd_query(args, detailed_log_path)

    except ChecksumMismatchError as e:
        print(f"[ERROR] Checksum mismatch: {e}")
        print(f"   See {os.path.relpath(detailed_log_path, start=os.getcwd())} for the diagnostic entry.")
        return EXIT_CHECKSUM
    except OSError as e:
        print(f"[ERROR] I/O failure: {e}")
        log_failure(detailed_log_path, args.command, "IO_ERROR", e)
        return EXIT_IO
    except (HSTIError, ValueError) as e:
        print(f"[ERROR] {e}")
        log_failure(detailed_log_path, args.command, "FAILED", e)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
