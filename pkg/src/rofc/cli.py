"""``rofc`` command line: enroll, auth, synth, eval.

Exit codes: 0 success/accepted, 1 rejected, 2 usage error, 3 data or
format error, 4 internal error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import secrets
import sys
import traceback

import numpy as np

from . import evaluation, protocol
from .ecc import Codec
from .errors import DatasetError, DimensionError, FormatError, LengthError
from .quantizer import QuantizerConfig
from .store import RecordStore

EXIT_OK = 0
EXIT_REJECTED = 1
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_INTERNAL = 4


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


def _secrets_from_master(master: bytes, k: int):
    """Projection seed and key bits, both derived from one master secret."""
    seed = hashlib.sha256(b"rofc/cli/device-seed" + master).digest()
    key_bytes = hashlib.shake_256(b"rofc/cli/key" + master).digest((k + 7) // 8)
    key = np.unpackbits(np.frombuffer(key_bytes, dtype=np.uint8))[:k]
    return seed, key


def _read_feature(path, dim):
    try:
        ds = evaluation.load_dataset(path)
    except (DatasetError, OSError) as exc:
        raise DataError(f"{path}: {exc}") from exc
    if ds.num_subjects != 1 or ds.sample_counts()[0] != 1:
        raise DataError(f"{path}: expected exactly one sample row")
    if ds.dim != dim:
        raise DataError(f"{path}: row 2: feature has {ds.dim} values, expected {dim}")
    return ds.subjects[0][1][0]


def _open_store(path):
    try:
        return RecordStore.open(path)
    except (FormatError, OSError) as exc:
        raise DataError(f"{path}: {exc}") from exc


def cmd_enroll(args) -> int:
    if args.dim < 2 or args.dim % 2:
        raise UsageError("--dim must be a positive even integer")
    try:
        cfg = QuantizerConfig(args.bits_per_component, args.range_halfwidth)
        codec = Codec.fit(args.codec, cfg.output_length(args.dim))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if args.seed_hex is not None:
        try:
            master = bytes.fromhex(args.seed_hex)
        except ValueError:
            raise UsageError("--seed-hex must be hexadecimal") from None
        if not master:
            raise UsageError("--seed-hex must not be empty")
    else:
        master = secrets.token_bytes(32)

    feature = _read_feature(args.feature_file, args.dim)
    seed, key = _secrets_from_master(master, codec.k)
    device, server = protocol.enroll(args.user, feature, seed, key, codec, cfg)

    dev_store = _open_store(args.device_store)
    srv_store = _open_store(args.server_store)
    dev_store.put_device(device)
    srv_store.put_server(server)
    dev_store.save(args.device_store)
    srv_store.save(args.server_store)

    print(
        f"enrolled user={args.user} codec={codec} k={codec.k} "
        f"truncation_len={server.truncation_len} version={server.version}"
    )
    if args.unsafe_debug:
        print(f"DEBUG master={master.hex()} seed={seed.hex()} key={''.join(map(str, key))}")
    return EXIT_OK


def cmd_auth(args) -> int:
    dev_store = _open_store(args.device_store)
    srv_store = _open_store(args.server_store)
    dev = dev_store.device(args.user)
    srv = srv_store.server(args.user)
    if dev is None or srv is None:
        where = "device store" if dev is None else "server store"
        raise DataError(f"user {args.user!r} not found in {where}")
    try:
        ds = evaluation.load_dataset(args.feature_file)
    except (DatasetError, OSError) as exc:
        raise DataError(f"{args.feature_file}: {exc}") from exc
    if ds.num_subjects != 1 or ds.sample_counts()[0] != 1:
        raise DataError(f"{args.feature_file}: expected exactly one sample row")
    decision = protocol.authenticate(ds.subjects[0][1][0], dev, srv)
    if decision.accepted:
        print(f"accepted user={args.user} corrected_bits={decision.corrected_bits}")
        return EXIT_OK
    print(f"rejected user={args.user} reason={decision.failure_reason}")
    return EXIT_REJECTED


def cmd_synth(args) -> int:
    if args.dim < 2 or args.dim % 2:
        raise UsageError("--dim must be a positive even integer")
    if args.subjects < 1 or args.samples < 1:
        raise UsageError("--subjects and --samples must be positive")
    if not args.sigma > 0:
        raise UsageError("--sigma must be positive")
    seed = args.seed
    if seed is None:
        seed = secrets.randbits(63)
        print(f"seed={seed}")
    ds = evaluation.gen_synthetic(args.subjects, args.samples, args.dim, args.sigma, seed)
    evaluation.save_dataset(ds, args.out)
    print(f"wrote {sum(ds.sample_counts())} rows to {args.out}")
    return EXIT_OK


def _parse_m_list(text):
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError("--m-list must be comma-separated integers") from None
    if not values or any(m < 1 or m % 2 == 0 for m in values):
        raise UsageError("--m-list values must be odd positive integers")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise UsageError("--m-list must be strictly increasing")
    return values


def cmd_eval(args) -> int:
    m_values = _parse_m_list(args.m_list)
    seed = args.seed
    if seed is None:
        seed = secrets.randbits(63)
        print(f"seed={seed}")
    try:
        cfg = QuantizerConfig(args.bits_per_component, args.range_halfwidth)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    try:
        ds = evaluation.load_dataset(args.dataset)
    except (DatasetError, OSError) as exc:
        raise DataError(f"{args.dataset}: {exc}") from exc

    summaries = {}
    modes = ["baseline", "protected"] if args.mode == "both" else [args.mode]
    for mode in modes:
        try:
            if mode == "baseline":
                curve = evaluation.baseline_rates(ds)
            else:
                curve = evaluation.protected_rates(ds, m_values, args.codec_base, cfg, seed)
        except (DatasetError, DimensionError, LengthError) as exc:
            raise DataError(str(exc)) from exc
        curve.to_csv(f"{args.out_prefix}_{mode}.csv")
        summary = {"mode": mode, **evaluation.curve_summary(curve)}
        evaluation.write_summary(summary, f"{args.out_prefix}_{mode}.json")
        summaries[mode] = summary
        print(json.dumps(summary))
    if args.mode == "both":
        eb, ep = summaries["baseline"]["eer"], summaries["protected"]["eer"]
        delta = None if eb is None or ep is None else abs(ep - eb)
        print(json.dumps({"parity_delta": delta}))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rofc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def quantizer_flags(p):
        p.add_argument("--bits-per-component", type=int, default=1)
        p.add_argument("--range-halfwidth", type=float, default=0.5)

    p = sub.add_parser("enroll", help="enroll one feature vector")
    p.add_argument("--user", required=True)
    p.add_argument("--feature-file", required=True)
    p.add_argument("--device-store", required=True)
    p.add_argument("--server-store", required=True)
    p.add_argument("--codec", default="ham74+rep3")
    p.add_argument("--dim", type=int, default=200)
    p.add_argument("--seed-hex", help="derive K_M and K from this value (reproducible runs)")
    p.add_argument("--unsafe-debug", action="store_true", help="print secrets")
    quantizer_flags(p)
    p.set_defaults(func=cmd_enroll)

    p = sub.add_parser("auth", help="authenticate one feature vector")
    p.add_argument("--user", required=True)
    p.add_argument("--feature-file", required=True)
    p.add_argument("--device-store", required=True)
    p.add_argument("--server-store", required=True)
    p.set_defaults(func=cmd_auth)

    p = sub.add_parser("synth", help="write a synthetic dataset CSV")
    p.add_argument("--subjects", type=int, required=True)
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--dim", type=int, default=200)
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("eval", help="FAR/FRR/EER curves for a dataset")
    p.add_argument("--dataset", required=True)
    p.add_argument("--mode", choices=["baseline", "protected", "both"], default="both")
    p.add_argument("--m-list", default="1,3,5,7")
    p.add_argument("--codec-base", choices=["ham74", "rep"], default="ham74")
    p.add_argument("--out-prefix", required=True)
    p.add_argument("--seed", type=int)
    quantizer_flags(p)
    p.set_defaults(func=cmd_eval)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"rofc {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"rofc {args.command}: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception:
        traceback.print_exc()
        return EXIT_INTERNAL
