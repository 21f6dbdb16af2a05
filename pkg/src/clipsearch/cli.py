"""Command-line pipeline driver: ingest -> split -> caption -> search/serve.

Exit codes: 0 success, 2 usage or input error, 1 internal error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import captioning, ingest, scenes, search, service
from .errors import ClipSearchError
from .video import FrameDirectorySource


def _split_csv(value: str) -> list[str]:
    return [part.strip() for part in value.split(",") if part.strip()]


def cmd_ingest(args) -> int:
    manifest = ingest.load_manifest(args.manifest)
    records = ingest.filter_sample(manifest, _split_csv(args.categories), args.per_category)
    report = ingest.check_availability(records, ingest.FileSystemFetcher())

    kept = {r.video_id for r in records}
    filtered = ingest.Manifest(
        videos=records,
        sentences=[s for s in manifest.sentences if s.video_id in kept],
        category_names=manifest.category_names,
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "manifest.json").write_text(ingest.serialize_manifest(filtered), encoding="utf-8")
    (out / "availability.json").write_text(
        json.dumps(report, ensure_ascii=False, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    print(f"kept {len(records)} videos across {len(_split_csv(args.categories))} categories")
    for video_id in sorted(report):
        print(f"  {video_id}: {report[video_id]}")
    return 0


def _video_frame_dirs(root: Path) -> list[Path]:
    if any(p.suffix == ".ppm" for p in root.iterdir()):
        return [root]
    return sorted(d for d in root.iterdir() if d.is_dir() and any(p.suffix == ".ppm" for p in d.iterdir()))


def cmd_split(args) -> int:
    root = Path(args.frames_dir)
    if not root.is_dir():
        raise ClipSearchError(f"not a directory: {root}")
    video_dirs = _video_frame_dirs(root)
    if not video_dirs:
        raise ClipSearchError(f"no frame directories under {root}")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for video_dir in video_dirs:
        source = FrameDirectorySource(video_dir)
        boundaries = scenes.detect_scenes(source, args.threshold, args.bins)
        scenes.save_boundaries(boundaries, out / f"{video_dir.name}.json")
        if args.clips_out:
            scenes.materialize_clips(video_dir, boundaries, args.clips_out, video_dir.name)
        print(f"{video_dir.name}: {len(boundaries)} scene(s)")
    return 0


def _build_captioner(args):
    if args.backend == "mock":
        return captioning.ColorPhraseCaptioner()
    if args.backend == "dataset":
        if not args.manifest:
            raise ClipSearchError("--backend dataset requires --manifest")
        return captioning.DatasetCaptioner.from_manifest(ingest.load_manifest(args.manifest))
    if args.backend == "remote":
        if not args.remote_url:
            raise ClipSearchError("--backend remote requires --remote-url")
        return captioning.RemoteCaptioner(args.remote_url)
    raise ClipSearchError(f"unknown captioner backend {args.backend!r}")


def cmd_caption(args) -> int:
    clips_root = Path(args.clips)
    if not clips_root.is_dir():
        raise ClipSearchError(f"not a directory: {clips_root}")
    clip_dirs = sorted(
        d for d in clips_root.iterdir() if d.is_dir() and any(p.suffix == ".ppm" for p in d.iterdir())
    )
    if not clip_dirs:
        raise ClipSearchError(f"no clip directories under {clips_root}")

    captioner = _build_captioner(args)
    tasks = [
        captioning.ClipTask(
            clip_path=d.name,
            source=FrameDirectorySource(d),
            meta=captioning.ClipMetadata(video_id=scenes.video_id_of_clip(d.name), clip_path=d.name),
        )
        for d in clip_dirs
    ]
    result = captioning.caption_corpus(
        tasks, captioning.ColorStatsExtractor(), captioner, stride=args.stride
    )
    search.save_index(result.index, args.out)
    print(f"captioned {len(result.index)} clip(s) -> {args.out}")
    for clip_path, why in sorted(result.failures.items()):
        print(f"warning: {clip_path}: {why}", file=sys.stderr)
    return 0


def cmd_search(args) -> int:
    index = search.load_index(args.index)
    results = search.rank(args.query, index, k=args.k)
    if args.json:
        sys.stdout.buffer.write(service.serialize_results(results) + b"\n")
        return 0
    if not results:
        print("no results (index is empty)")
        return 0
    width = max(len(r.clip_path) for r in results)
    for r in results:
        print(f"{r.score:0.4f}  {r.clip_path:<{width}}  {r.caption}")
    return 0


def cmd_serve(args) -> int:
    config = service.ServiceConfig(
        index_path=args.index,
        media_root=args.media_root,
        host=args.host,
        port=args.port,
        k_default=args.k,
        tls_cert=args.tls_cert,
        tls_key=args.tls_key,
        stt_backend=args.stt_backend,
        stt_url=args.stt_url,
        mock_transcript=args.mock_transcript,
        static_root=args.static_root,
    )
    service.run_server(config)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="clipsearch",
        description="Split videos into scenes, caption the clips, and search them by voice or text.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log at INFO level")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="filter a dataset manifest and probe clip availability")
    p.add_argument("--manifest", required=True, help="manifest JSON path")
    p.add_argument("--categories", required=True, help="comma-separated category names")
    p.add_argument("--per-category", type=int, default=100, help="videos to keep per category")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("split", help="detect scene boundaries in frame directories")
    p.add_argument("--frames-dir", required=True, help="frame dir, or dir of per-video frame dirs")
    p.add_argument("--threshold", type=float, default=scenes.DEFAULT_THRESHOLD)
    p.add_argument("--bins", type=int, default=scenes.DEFAULT_BINS_PER_CHANNEL)
    p.add_argument("--clips-out", help="also materialize per-scene clip directories here")
    p.add_argument("--out", required=True, help="directory for boundary JSON files")
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("caption", help="caption clip directories into an index file")
    p.add_argument("--clips", required=True, help="directory of clip frame directories")
    p.add_argument("--backend", choices=("mock", "dataset", "remote"), default="mock")
    p.add_argument("--manifest", help="manifest path (dataset backend)")
    p.add_argument("--remote-url", help="captioning service URL (remote backend)")
    p.add_argument("--stride", type=int, default=captioning.DEFAULT_STRIDE)
    p.add_argument("--out", required=True, help="index JSON output path")
    p.set_defaults(func=cmd_caption)

    p = sub.add_parser("search", help="rank indexed clips against a text query")
    p.add_argument("--index", required=True, help="index JSON path")
    p.add_argument("--query", required=True)
    p.add_argument("-k", type=int, default=search.DEFAULT_TOP_K)
    p.add_argument("--json", action="store_true", help="emit the API's JSON payload")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("serve", help="run the search/transcribe/media HTTP service")
    p.add_argument("--index", required=True)
    p.add_argument("--media-root", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("-k", type=int, default=search.DEFAULT_TOP_K, help="default top-k")
    p.add_argument("--tls-cert")
    p.add_argument("--tls-key")
    p.add_argument("--stt-backend", choices=("mock", "remote"), default="mock")
    p.add_argument("--stt-url")
    p.add_argument("--mock-transcript", default="")
    p.add_argument("--static-root", help="directory of web UI assets to serve at /")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except (ClipSearchError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
