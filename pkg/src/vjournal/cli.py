"""Command-line interface.

Exit status: 0 success, 1 validation error, 2 I/O error.
"""

from __future__ import annotations

import argparse
import datetime as dt
import json
import logging
import sys
from pathlib import Path

from . import analytics
from .config import RunConfig, load_config
from .corpus import Corpus, ingest_records
from .errors import ValidationError, VJournalError
from .newsletter import (
    Profile,
    ProfileStore,
    generate_daily,
    generate_weekly,
    mark_run,
    write_outputs,
)
from .pipeline import build, load_snapshots, save_snapshots
from .readstats import ReadLog, ingest_reads

log = logging.getLogger("vjournal")

EXIT_OK, EXIT_INVALID, EXIT_IO = 0, 1, 2


def _date(value: str) -> dt.date:
    try:
        return dt.date.fromisoformat(value[:10])
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a YYYY-MM-DD date: {value!r}") from None


def _config(args) -> RunConfig:
    return load_config(
        {
            "corpus_dir": args.corpus_dir,
            "profiles_dir": args.profiles_dir,
            "out_dir": args.out_dir,
            "theta_conc": args.theta_conc,
            "theta_ref": args.theta_ref,
            "s_max": args.s_max,
            "list_cap": args.list_cap,
            "seed_order": args.seed_order,
        }
    )


def _report(label: str, report) -> None:
    print(f"{label}: {report.added} added, {len(report.rejected)} rejected", file=sys.stderr)
    for lineno, reason in report.rejected:
        print(f"  {label} line {lineno}: {reason}", file=sys.stderr)


def cmd_ingest(args, cfg: RunConfig) -> int:
    if not args.records and not args.reads:
        raise ValidationError("nothing to ingest: pass --records and/or --reads")
    as_of = args.as_of or cfg.today()
    corpus = Corpus.load(cfg.corpus_dir)
    if args.records:
        report = ingest_records(corpus, args.records, as_of)
        corpus.save(cfg.corpus_dir)
        _report("records", report)
    if args.reads:
        reads = ReadLog.load(cfg.corpus_dir)
        report = ingest_reads(reads, args.reads, corpus)
        reads.save(cfg.corpus_dir)
        _report("reads", report)
    return EXIT_OK


def cmd_build(args, cfg: RunConfig) -> int:
    corpus = Corpus.load(cfg.corpus_dir)
    reads = ReadLog.load(cfg.corpus_dir)
    result = build(corpus, reads, cfg.settings)
    written = save_snapshots(result, cfg.corpus_dir)
    if args.audit:
        Path(args.audit).write_text("".join(row.to_line() + "\n" for row in result.audit), encoding="utf-8")
        written.append(Path(args.audit))
    resolved = sum(1 for row in result.audit if row.resolution.record_id)
    print(
        f"build: {len(corpus)} records, {len(result.concordance.links)} new concordance links, "
        f"{len(result.concordance.ambiguous)} ambiguous, {resolved}/{len(result.audit)} references resolved",
        file=sys.stderr,
    )
    for path in written:
        print(path)
    return EXIT_OK


def cmd_run(args, cfg: RunConfig) -> int:
    now = args.now or cfg.today()
    snaps = load_snapshots(cfg.corpus_dir)
    store = ProfileStore(cfg.profiles_dir)
    ids = store.ids() if args.all else [args.profile]
    for pid in ids:
        profile = store.load(pid)
        if args.weekly:
            doc = generate_weekly(profile, snaps, now, cfg.settings)
        else:
            doc = generate_daily(profile, snaps.corpus, snaps.idx, now, cfg.settings)
        paths = write_outputs(doc, cfg.out_dir)
        if args.weekly:
            store.save(mark_run(profile, now))
        kind = "weekly" if args.weekly else "daily"
        print(f"{pid}\t{kind}\t{doc.public_token}\t" + "\t".join(str(p) for p in paths))
    return EXIT_OK


def cmd_analyze(args, cfg: RunConfig) -> int:
    if args.top_n < 1:
        raise ValidationError("--top-n must be >= 1")
    snaps = load_snapshots(cfg.corpus_dir)
    stats = analytics.reads_cites_by_eprint_status(snaps.corpus, snaps.graph, snaps.coread)
    top = analytics.eprint_fraction_top_cited(snaps.corpus, snaps.graph, args.top_n)
    stats.n_top, stats.fraction_eprinted = top.n_top, top.fraction_eprinted
    text = stats.to_json()
    if args.json:
        Path(args.json).write_text(text, encoding="utf-8")
    if args.csv:
        rows = analytics.group_rows(snaps.corpus, snaps.graph, snaps.coread)
        Path(args.csv).write_text(analytics.rows_csv(rows), encoding="utf-8")
    sys.stdout.write(text)
    return EXIT_OK


def cmd_profile(args, cfg: RunConfig) -> int:
    obj = json.loads(Path(args.file).read_text(encoding="utf-8"))
    profile = ProfileStore(cfg.profiles_dir).save(Profile.from_json(obj))
    print(ProfileStore(cfg.profiles_dir).path(profile.profile_id))
    return EXIT_OK


def cmd_serve(args, cfg: RunConfig) -> int:
    from .server import serve_newsletters

    serve_newsletters(args.host, args.port, cfg.out_dir)
    return EXIT_OK


def cmd_synth(args, cfg: RunConfig) -> int:
    from .synthetic import generate

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    sc = generate(n_records=args.records, n_refs=args.refs, seed=args.seed)
    print(sc.write_records(out / "records.jsonl"))
    print(sc.write_reads(out / "reads.csv"))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="vjournal", description=__doc__.splitlines()[0])
    p.add_argument("--corpus-dir", help="store and snapshot directory (env VJOURNAL_CORPUS_DIR)")
    p.add_argument("--profiles-dir", help="profile documents (env VJOURNAL_PROFILES_DIR)")
    p.add_argument("--out-dir", help="rendered outputs (env VJOURNAL_OUT_DIR)")
    p.add_argument("--theta-conc", type=float)
    p.add_argument("--theta-ref", type=float)
    p.add_argument("--s-max", type=int)
    p.add_argument("--list-cap", type=int)
    p.add_argument("--seed-order", choices=("reads", "recency"))
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("ingest", help="load records and/or reads into the store")
    s.add_argument("--records")
    s.add_argument("--reads")
    s.add_argument("--as-of", type=_date, help="date_added for records that lack one")
    s.set_defaults(func=cmd_ingest)

    s = sub.add_parser("build", help="link, index, resolve references, aggregate")
    s.add_argument("--audit", help="write the reference resolution audit here")
    s.set_defaults(func=cmd_build)

    s = sub.add_parser("run", help="generate newsletters or daily alerts")
    mode = s.add_mutually_exclusive_group(required=True)
    mode.add_argument("--weekly", action="store_true")
    mode.add_argument("--daily", action="store_true")
    who = s.add_mutually_exclusive_group(required=True)
    who.add_argument("--profile")
    who.add_argument("--all", action="store_true")
    s.add_argument("--now", type=_date)
    s.set_defaults(func=cmd_run)

    s = sub.add_parser("analyze", help="e-print share of top-cited works, cites/reads by e-print status")
    s.add_argument("--top-n", type=int, default=100)
    s.add_argument("--json", help="also write the stats document here")
    s.add_argument("--csv", help="write per-work (cites, reads, eprinted) rows here")
    s.set_defaults(func=cmd_analyze)

    s = sub.add_parser("profile", help="validate and store a profile JSON document")
    s.add_argument("file")
    s.set_defaults(func=cmd_profile)

    s = sub.add_parser("serve", help="serve public newsletter links")
    s.add_argument("--host", default="127.0.0.1")
    s.add_argument("--port", type=int, default=8080)
    s.set_defaults(func=cmd_serve)

    s = sub.add_parser("synth", help="write a synthetic record file and reads log")
    s.add_argument("--out", required=True)
    s.add_argument("--records", type=int, default=300)
    s.add_argument("--refs", type=int, default=900)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_synth)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = _config(args)
        return args.func(args, cfg)
    except (VJournalError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
