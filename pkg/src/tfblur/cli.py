"""Command-line front end.

Subcommands: spectrogram | blur | specblur | augment | gen | verify.
Exit codes: 0 success, 1 verification/validation failure, 2 usage or input
error. All outputs land under the requested --out location; batch writes are
atomic (temp file + rename).
"""

import argparse
import concurrent.futures
import glob
import json
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import augment as aug
from . import verify as verify_mod
from .errors import TfblurError
from .features import (log_mel, mel_filterbank, normalize_01, save_feature,
                       spec_blur, spectrogram)
from .gabor import Lattice, make_window, stft
from .kernels import delta_kernel, gaussian_kernel
from .operators import BlurSpec, blur
from .signal_io import Signal, gen_signal, pad_to_length, read_wav, write_wav

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2


def _add_lattice_flags(parser, win_length=1024, hop=256, channels=1024):
    parser.add_argument("--window", default="hann", choices=["hann", "gaussian"])
    parser.add_argument("--win-length", type=int, default=win_length)
    parser.add_argument("--hop", type=int, default=hop)
    parser.add_argument("--channels", type=int, default=channels)


def _add_mel_flags(parser):
    parser.add_argument("--n-mels", type=int, default=256)
    parser.add_argument("--fmin", type=float, default=0.0)
    parser.add_argument("--fmax", type=float, default=None)
    parser.add_argument("--no-mel", action="store_true",
                        help="export the plain power spectrogram")


def _add_kernel_flags(parser):
    parser.add_argument("--kernel", default="gaussian",
                        choices=["gaussian", "delta"])
    parser.add_argument("--sigma-t", type=float, default=2.0,
                        help="kernel spread along time frames")
    parser.add_argument("--sigma-f", type=float, default=4.0,
                        help="kernel spread along frequency channels")
    parser.add_argument("--truncation", type=float, default=4.0)


def _build_kernel(args):
    if args.kernel == "delta":
        return delta_kernel()
    return gaussian_kernel(args.sigma_t, args.sigma_f, args.truncation)


def _logmel_of(signal, args):
    lattice = Lattice(len(signal), args.hop, args.channels, args.win_length,
                      mode="zeropad")
    window = make_window(args.window, args.win_length)
    power = spectrogram(stft(signal, window, lattice))
    if args.no_mel:
        return power
    fmax = args.fmax if args.fmax is not None else signal.sample_rate / 2.0
    fb = mel_filterbank(signal.sample_rate, args.channels, args.n_mels,
                        args.fmin, fmax)
    return log_mel(power, fb)


def _export(spec, basepath, formats, normalize):
    if normalize:
        spec = normalize_01(spec)
    written = []
    for fmt in formats:
        written += save_feature(spec, basepath, fmt=fmt)
    return written


def cmd_spectrogram(args) -> int:
    signal = read_wav(args.input)
    feat = _logmel_of(signal, args)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    base = out_dir / Path(args.input).stem
    written = _export(feat, base, args.format, args.normalize)
    for path in written:
        print(path)
    return EXIT_OK


def _circular_blur_lattice(length, hop, channels):
    """Smallest circular-valid length >= length for this hop/channel pair."""
    step = np.lcm(hop, channels)
    padded = max(int(np.ceil(length / step)) * step, channels)
    return padded


def cmd_blur(args) -> int:
    signal = read_wav(args.input)
    orig_len = len(signal)
    padded_len = _circular_blur_lattice(orig_len, args.hop, args.channels)
    padded = pad_to_length(signal, padded_len)
    lattice = Lattice(padded_len, args.hop, args.channels, args.win_length,
                      mode="circular")
    window = make_window(args.window, args.win_length)
    spec = BlurSpec(window, _build_kernel(args), lattice,
                    synthesis=args.synthesis, conv_mode=args.conv_mode,
                    renormalize_energy=args.renormalize)
    blurred = blur(padded, spec)
    front = (padded_len - orig_len) // 2
    out_samples = blurred.samples[front:front + orig_len]
    out_signal = Signal(np.real(out_samples), signal.sample_rate)
    write_wav(out_signal, args.out)
    print(args.out)
    if args.side_by_side:
        out_dir = Path(args.out).parent
        stem = Path(args.out).stem
        for tag, sig in (("pre", signal), ("post", out_signal)):
            feat = _logmel_of(sig, args)
            save_feature(feat, out_dir / f"{stem}_{tag}", fmt="pgm")
            print(out_dir / f"{stem}_{tag}.pgm")
    return EXIT_OK


def cmd_specblur(args) -> int:
    signal = read_wav(args.input)
    feat = _logmel_of(signal, args)
    blurred = spec_blur(feat, _build_kernel(args), mode="circular")
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    base = out_dir / f"{Path(args.input).stem}_specblur"
    written = _export(blurred, base, args.format, args.normalize)
    for path in written:
        print(path)
    return EXIT_OK


def cmd_gen(args) -> int:
    params = {}
    if args.kind == "sinusoid":
        params["frequency"] = args.frequency
    elif args.kind == "chirp":
        params["f0"] = args.f0
        params["f1"] = args.f1
    elif args.kind == "impulse":
        params["position"] = args.position
    elif args.kind == "gaussian_pulse":
        if args.frequency:
            params["frequency"] = args.frequency
    signal = gen_signal(args.kind, sample_rate=args.sr, length=args.length,
                        seed=args.seed, **params)
    write_wav(signal, args.out)
    print(args.out)
    return EXIT_OK


def _check_item_id(item_id):
    parts = Path(item_id).parts
    if Path(item_id).is_absolute() or ".." in parts or not parts:
        raise ValueError(f"item id {item_id!r} must be a relative path "
                         "without '..'")
    return item_id


def _resolve_items(args):
    """Yield (item_id, path) pairs from --manifest lines or glob inputs.

    Manifest lines are either a relative path (doubling as the item id,
    resolved against the manifest's directory) or `item_id<TAB>path`.
    """
    items = []
    if args.manifest:
        root = Path(args.manifest).resolve().parent
        for line in Path(args.manifest).read_text().splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "\t" in line:
                item_id, path = line.split("\t", 1)
                if not Path(path).is_absolute():
                    path = str(root / path)
            else:
                item_id, path = line, str(root / line)
            items.append((_check_item_id(item_id), path))
    for pattern in args.inputs:
        matches = sorted(glob.glob(pattern))
        if not matches and not any(ch in pattern for ch in "*?["):
            matches = [pattern]
        for path in matches:
            items.append((_check_item_id(Path(path).stem), path))
    ids = [item_id for item_id, _ in items]
    if len(set(ids)) != len(ids):
        dupes = sorted({i for i in ids if ids.count(i) > 1})
        raise ValueError(f"duplicate item ids: {dupes}")
    if not items:
        raise ValueError("no input items")
    return items


def _augment_one(item_id, path, config, out_dir):
    signal = read_wav(path)
    feat = aug.run_pipeline(signal, config, item_id)
    base = Path(out_dir) / item_id
    base.parent.mkdir(parents=True, exist_ok=True)
    data = feat.values.astype("<f4").tobytes(order="C")
    sidecar = json.dumps({"shape": list(feat.shape), "scale": feat.scale,
                          "dtype": "<f4", "order": "C", "meta": feat.meta,
                          "item_id": item_id}, indent=1, sort_keys=True)
    for suffix, payload, mode in ((".f32", data, "wb"),
                                  (".json", sidecar, "w")):
        fd, tmp = tempfile.mkstemp(dir=base.parent, prefix=base.name)
        try:
            with os.fdopen(fd, mode) as handle:
                handle.write(payload)
            os.replace(tmp, base.with_suffix(suffix))
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
    return item_id


def cmd_augment(args) -> int:
    config = aug.load_config(args.config)
    items = _resolve_items(args)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    failures = []
    workers = args.workers or os.cpu_count() or 1
    if workers == 1:
        for item_id, path in items:
            try:
                _augment_one(item_id, path, config, out_dir)
            except Exception as exc:  # per-item isolation
                failures.append((item_id, str(exc)))
    else:
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
            futures = {pool.submit(_augment_one, item_id, path, config, out_dir):
                       item_id for item_id, path in items}
            for future in concurrent.futures.as_completed(futures):
                try:
                    future.result()
                except Exception as exc:
                    failures.append((futures[future], str(exc)))
    print(f"{len(items) - len(failures)}/{len(items)} items written to {out_dir}")
    if failures:
        for item_id, message in sorted(failures):
            print(f"error: {item_id}: {message}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def cmd_verify(args) -> int:
    results = verify_mod.run_suites(args.suite or None, seed=args.seed,
                                    tolerance_override=args.tol)
    report = verify_mod.format_report(results)
    if args.report:
        Path(args.report).parent.mkdir(parents=True, exist_ok=True)
        Path(args.report).write_text(report + "\n")
    print(report)
    if all(r.passed for r in results):
        return EXIT_OK
    failing = [r.suite for r in results if not r.passed]
    print(f"failing suites: {', '.join(failing)}", file=sys.stderr)
    return EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tfblur",
        description="Time-frequency blurring operators, features, "
                    "augmentation, and numerical verification.")
    parser.add_argument("--seed", type=int, default=0, help="global seed")
    sub = parser.add_subparsers(dest="command", required=True)

    def allow_seed(subparser):
        # accept --seed after the subcommand too; SUPPRESS keeps the root
        # parser's value when the subcommand does not restate it
        subparser.add_argument("--seed", type=int, default=argparse.SUPPRESS,
                               help="seed (same as the global --seed)")

    p = sub.add_parser("spectrogram", help="export (log-mel) spectrogram features")
    p.add_argument("input")
    p.add_argument("--out", required=True)
    _add_lattice_flags(p)
    _add_mel_flags(p)
    p.add_argument("--normalize", action="store_true")
    p.add_argument("--format", nargs="+", default=["raw"],
                   choices=["raw", "csv", "pgm"])
    allow_seed(p)
    p.set_defaults(func=cmd_spectrogram)

    p = sub.add_parser("blur", help="apply a time-frequency blurring operator")
    p.add_argument("input")
    p.add_argument("--out", required=True)
    _add_lattice_flags(p, win_length=1000, hop=250, channels=1000)
    _add_kernel_flags(p)
    _add_mel_flags(p)
    p.add_argument("--synthesis", default="dual", choices=["dual", "tight"])
    p.add_argument("--conv-mode", default="zeropad-time",
                   choices=["circular", "zeropad-time"])
    p.add_argument("--renormalize", action="store_true",
                   help="rescale output to the input l2 norm")
    p.add_argument("--side-by-side", action="store_true",
                   help="also write pre/post log-mel PGM images")
    allow_seed(p)
    p.set_defaults(func=cmd_blur)

    p = sub.add_parser("specblur", help="blur the (log-mel) spectrogram")
    p.add_argument("input")
    p.add_argument("--out", required=True)
    _add_lattice_flags(p)
    _add_mel_flags(p)
    _add_kernel_flags(p)
    p.add_argument("--normalize", action="store_true")
    p.add_argument("--format", nargs="+", default=["raw"],
                   choices=["raw", "csv", "pgm"])
    allow_seed(p)
    p.set_defaults(func=cmd_specblur)

    p = sub.add_parser("augment", help="run the augmentation pipeline over a batch")
    p.add_argument("inputs", nargs="*", help="WAV paths or globs")
    p.add_argument("--manifest", help="listing file of item ids (relative paths)")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--workers", type=int, default=0,
                   help="0 = one per CPU core")
    allow_seed(p)
    p.set_defaults(func=cmd_augment)

    p = sub.add_parser("gen", help="generate a deterministic test signal")
    p.add_argument("kind", choices=["sinusoid", "chirp", "white_noise",
                                    "impulse", "gaussian_pulse"])
    p.add_argument("--out", required=True)
    p.add_argument("--sr", type=int, default=16000)
    p.add_argument("--length", type=int, default=16000)
    p.add_argument("--frequency", type=float, default=440.0)
    p.add_argument("--f0", type=float, default=300.0)
    p.add_argument("--f1", type=float, default=3000.0)
    p.add_argument("--position", type=int, default=0)
    allow_seed(p)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("verify", help="run the numerical verification suites")
    p.add_argument("--suite", action="append",
                   choices=sorted(verify_mod.SUITES))
    p.add_argument("--tol", type=float, default=None,
                   help="override every suite tolerance")
    p.add_argument("--report", help="also write the report to this path")
    allow_seed(p)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (TfblurError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
