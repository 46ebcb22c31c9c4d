import datetime
import json
import os
import zlib
from collections.abc import Iterable


def create_folder(*args: str, is_full=False):
    if is_full:
        os.makedirs(*args, exist_ok=True)
    else:
        os.makedirs(os.path.join(*args), exist_ok=True)


def result_checksum(pairs: Iterable[tuple[int, float]]) -> str:
    """CRC32 over the (oid, distance) sequence of a result list, as 8 hex digits."""
    payload = ";".join(f"{oid}:{distance!r}" for oid, distance in pairs)
    return f"{zlib.crc32(payload.encode()):08x}"


def write_log_entry(detailed_log_path, stage, status, **fields):
    """Append one event to the JSON-lines detailed log; a None path disables logging."""
    if not detailed_log_path:
        return
    log_entry = {
        "timestamp": datetime.datetime.now().isoformat(),
        "stage": stage,
        "status": status,
        **fields,
    }
    with open(detailed_log_path, "a") as f:
        f.write(json.dumps(log_entry) + "\n")


def reset_log(detailed_log_path):
    os.makedirs(os.path.dirname(detailed_log_path) or ".", exist_ok=True)
    with open(detailed_log_path, "w") as f:
        f.write("")  # Clear content from previous runs


def format_duration(execution_seconds: float) -> str:
    hours = int(execution_seconds // 3600)
    minutes = int((execution_seconds % 3600) // 60)
    seconds = int(execution_seconds % 60)
    hours_str = f"{hours} hour" if hours == 1 else f"{hours} hours"
    minutes_str = f"{minutes} minute" if minutes == 1 else f"{minutes} minutes"
    seconds_str = f"{seconds} second" if seconds == 1 else f"{seconds} seconds"
    return f"{hours_str}, {minutes_str}, {seconds_str}"
