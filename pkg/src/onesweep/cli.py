"""Command-line surface: generate datasets, sort files, verify, benchmark.

Key files are headerless raw little-endian arrays of fixed-width records;
the record width comes from flags, never from the file.  Key-value files
interleave one key then one value per record (the value has the key's
width).  Exit codes: 0 ok, 1 verification or data error, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
import time

import numpy as np

from .baseline import oracle_stable_sort, rts_sort
from .binning import onesweep_sort
from .executor import Executor, ledger_as_row
from .keycodec import KEY_TYPES, key_spec, radix_plan
from .keygen import KeyGenSpec, generate_keys

ALGOS = ("onesweep", "rts", "oracle")

ENV_WORKERS = "ONESWEEP_WORKERS"

BENCH_COLUMNS = [
    "algo",
    "key_type",
    "n",
    "q",
    "d",
    "workers",
    "trial",
    "seconds",
    "keys_per_sec",
    "element_reads",
    "element_writes",
    "counter_ops",
    "copy_ops",
    "element_ops",
    "traffic_ratio",
]


class CliError(Exception):
    """Data or I/O failure that maps to exit code 1."""


def _raw_dtype(bits: int) -> np.dtype:
    return np.dtype("<u4") if bits == 32 else np.dtype("<u8")


def _resolve_workers(flag: int | None) -> int:
    if flag is not None:
        return flag
    env = os.environ.get(ENV_WORKERS)
    if env:
        try:
            return int(env)
        except ValueError as exc:
            raise CliError(f"bad {ENV_WORKERS} value {env!r}") from exc
    return os.cpu_count() or 1


def _resolve_key_type(key_type: str | None, bits: int | None, parser) -> str:
    if key_type is None:
        key_type = f"u{bits or 32}"
    if key_type not in KEY_TYPES:
        parser.error(f"unknown key type {key_type!r}; expected one of {sorted(KEY_TYPES)}")
    if bits is not None and KEY_TYPES[key_type].bits != bits:
        parser.error(f"--bits {bits} conflicts with --key-type {key_type}")
    return key_type


def _read_records(path: str, bits: int, with_values: bool):
    """Read a raw key (or interleaved key-value) file; returns unsigned arrays."""
    try:
        data = np.fromfile(path, dtype=_raw_dtype(bits))
        size_bytes = os.path.getsize(path)
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc}") from exc
    width = bits // 8
    record = width * (2 if with_values else 1)
    if size_bytes % record:
        raise CliError(
            f"malformed file {path}: {size_bytes} bytes is not a multiple of the "
            f"{record}-byte record width"
        )
    if with_values:
        return data[0::2].copy(), data[1::2].copy()
    return data, None


def _write_records(path: str, keys: np.ndarray, values: np.ndarray | None) -> None:
    try:
        if values is None:
            keys.tofile(path)
        else:
            interleaved = np.empty(keys.size * 2, dtype=keys.dtype)
            interleaved[0::2] = keys
            interleaved[1::2] = values
            interleaved.tofile(path)
    except OSError as exc:
        raise CliError(f"cannot write {path}: {exc}") from exc


def _run_algo(algo: str, keys, values, cfg, executor):
    if algo == "onesweep":
        return onesweep_sort(keys, values, cfg=cfg, executor=executor)
    if algo == "rts":
        return rts_sort(keys, values, cfg=cfg, executor=executor)
    return oracle_stable_sort(keys, values)


def cmd_gen(args) -> int:
    spec = KeyGenSpec(q=args.q, seed=args.seed, n=args.n, key_bits=args.bits)
    keys = generate_keys(spec).astype(_raw_dtype(args.bits))
    _write_records(args.out, keys, None)
    return 0


def cmd_sort(args, parser) -> int:
    key_type = _resolve_key_type(args.key_type, args.bits, parser)
    spec = KEY_TYPES[key_type]
    raw_keys, raw_values = _read_records(args.in_path, spec.bits, args.values)
    typed = raw_keys.view(spec.dtype)
    cfg = radix_plan(spec.bits, args.d, tile_size=args.tile, strip_size=args.strip)
    executor = Executor(workers=_resolve_workers(args.workers))
    result = _run_algo(args.algo, typed, raw_values, cfg, executor)
    if raw_values is None:
        sorted_keys, sorted_values = result, None
    else:
        sorted_keys, sorted_values = result
    _write_records(args.out, np.ascontiguousarray(sorted_keys).view(raw_keys.dtype), sorted_values)
    return 0


def cmd_verify(args, parser) -> int:
    key_type = _resolve_key_type(args.key_type, args.bits, parser)
    spec = KEY_TYPES[key_type]
    in_keys, in_values = _read_records(args.in_path, spec.bits, args.values)
    got_keys, got_values = _read_records(args.sorted_path, spec.bits, args.values)
    if got_keys.size != in_keys.size:
        raise CliError(
            f"element count mismatch: input has {in_keys.size}, "
            f"sorted file has {got_keys.size}"
        )
    expected = oracle_stable_sort(in_keys.view(spec.dtype), in_values)
    if in_values is None:
        want_keys, want_values = expected, None
    else:
        want_keys, want_values = expected
    want_bits = np.ascontiguousarray(want_keys).view(in_keys.dtype)

    key_diff = np.nonzero(want_bits != got_keys)[0]
    if key_diff.size:
        i = int(key_diff[0])
        print(
            f"key mismatch at index {i}: expected {want_bits[i]:#x}, "
            f"got {got_keys[i]:#x}",
            file=sys.stderr,
        )
        return 1
    if want_values is not None:
        val_diff = np.nonzero(want_values != got_values)[0]
        if val_diff.size:
            i = int(val_diff[0])
            print(
                f"value mismatch at index {i} (stability violation): expected "
                f"{int(want_values[i])}, got {int(got_values[i])}",
                file=sys.stderr,
            )
            return 1
    print(f"ok: {in_keys.size} records")
    return 0


def _parse_sizes(text: str, rng: np.random.Generator) -> list[int]:
    parts = text.split(":")
    if len(parts) not in (2, 3):
        raise CliError(f"bad --sizes {text!r}; expected LO:HI[:COUNT] log2 bounds")
    lo, hi = float(parts[0]), float(parts[1])
    count = int(parts[2]) if len(parts) == 3 else 8
    if hi < lo or count < 1:
        raise CliError(f"bad --sizes {text!r}")
    return sorted(int(round(2.0 ** x)) for x in rng.uniform(lo, hi, size=count))


def _parse_int_list(text: str, flag: str) -> list[int]:
    try:
        return [int(tok) for tok in text.split(",") if tok]
    except ValueError as exc:
        raise CliError(f"bad {flag} value {text!r}") from exc


def cmd_bench(args, parser) -> int:
    key_type = _resolve_key_type(args.key_type, None, parser)
    spec = KEY_TYPES[key_type]
    workers = _resolve_workers(args.workers)
    rng = np.random.default_rng(args.seed)
    sizes = _parse_sizes(args.sizes, rng)
    q_list = _parse_int_list(args.q, "--q")
    d_list = _parse_int_list(args.d, "--d")
    algos = [a for a in args.algos.split(",") if a]
    for algo in algos:
        if algo not in ALGOS:
            parser.error(f"unknown algo {algo!r}; expected from {ALGOS}")

    try:
        out = open(args.csv, "w", newline="") if args.csv else sys.stdout
    except OSError as exc:
        raise CliError(f"cannot write {args.csv}: {exc}") from exc
    writer = csv.DictWriter(out, fieldnames=BENCH_COLUMNS)
    writer.writeheader()

    try:
        for n in sizes:
            for q in q_list:
                keys = generate_keys(
                    KeyGenSpec(q=q, seed=int(rng.integers(2**63)), n=n, key_bits=spec.bits)
                ).view(spec.dtype)
                for d in d_list:
                    cfg = radix_plan(spec.bits, d, tile_size=args.tile)
                    for algo in algos:
                        # trial 0 is the discarded warmup
                        for trial in range(args.trials + 1):
                            try:
                                row = _bench_one(
                                    algo, key_type, keys, n, q, d, workers, cfg
                                )
                            except Exception as exc:  # keep sweeping
                                print(
                                    f"bench failure: algo={algo} n={n} q={q} d={d}: {exc}",
                                    file=sys.stderr,
                                )
                                break
                            if trial == 0:
                                continue
                            row["trial"] = trial
                            writer.writerow(row)
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def _bench_one(algo, key_type, keys, n, q, d, workers, cfg) -> dict:
    executor = Executor(workers=workers)
    start = time.perf_counter()
    _run_algo(algo, keys, None, cfg, executor)
    elapsed = time.perf_counter() - start
    ledger = ledger_as_row(executor.ledger_snapshot())
    ledger.pop("fast_path_tiles", None)
    single_pass_ops = (2 * cfg.passes + 1) * n
    return {
        "algo": algo,
        "key_type": key_type,
        "n": n,
        "q": q,
        "d": d,
        "workers": workers,
        "trial": 0,
        "seconds": f"{elapsed:.6f}",
        "keys_per_sec": f"{n / elapsed:.1f}" if elapsed > 0 else "inf",
        **ledger,
        "traffic_ratio": (
            f"{ledger['element_ops'] / single_pass_ops:.4f}" if n else "0.0000"
        ),
    }


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="onesweep",
        description="Single-pass LSD radix sort: dataset generation, sorting, "
        "verification, and benchmarks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate an entropy-banded key file")
    gen.add_argument("--n", type=int, required=True, help="number of keys")
    gen.add_argument("--q", type=int, default=1, help="uniform words ANDed per key")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--bits", type=int, choices=(32, 64), default=32)
    gen.add_argument("--out", required=True)

    srt = sub.add_parser("sort", help="sort a raw key file")
    srt.add_argument("--in", dest="in_path", required=True)
    srt.add_argument("--out", required=True)
    srt.add_argument("--bits", type=int, choices=(32, 64))
    srt.add_argument("--key-type", choices=sorted(KEY_TYPES))
    srt.add_argument("--algo", choices=ALGOS, default="onesweep")
    srt.add_argument("--d", type=int, default=8, help="digit bits")
    srt.add_argument("--tile", type=int, default=4096)
    srt.add_argument("--strip", type=int, default=1 << 28)
    srt.add_argument("--workers", type=int)
    srt.add_argument("--values", action="store_true", help="key-value records")

    ver = sub.add_parser("verify", help="check a sorted file against the oracle")
    ver.add_argument("--in", dest="in_path", required=True)
    ver.add_argument("--sorted", dest="sorted_path", required=True)
    ver.add_argument("--bits", type=int, choices=(32, 64))
    ver.add_argument("--key-type", choices=sorted(KEY_TYPES))
    ver.add_argument("--values", action="store_true")

    ben = sub.add_parser("bench", help="run a benchmark sweep, emit CSV")
    ben.add_argument("--sizes", default="12:24:8", help="log2 range LO:HI[:COUNT]")
    ben.add_argument("--q", default="1,2,3,4,8,16")
    ben.add_argument("--d", default="8")
    ben.add_argument("--algos", default="onesweep,rts")
    ben.add_argument("--trials", type=int, default=3)
    ben.add_argument("--csv", help="output path (default stdout)")
    ben.add_argument("--key-type", choices=sorted(KEY_TYPES), default="u32")
    ben.add_argument("--tile", type=int, default=4096)
    ben.add_argument("--workers", type=int)
    ben.add_argument("--seed", type=int, default=0)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "gen":
            return cmd_gen(args)
        if args.command == "sort":
            return cmd_sort(args, parser)
        if args.command == "verify":
            return cmd_verify(args, parser)
        return cmd_bench(args, parser)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
