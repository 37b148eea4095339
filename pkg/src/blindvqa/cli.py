"""Thin-client CLI: every subcommand calls the HTTP service.

By default the service app runs in-process over an ASGI transport, so no
server has to be started; pass --server URL to talk to a remote instance.
Exit codes: 0 success, 1 processing error, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

import httpx


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--server", default=None,
                        help="base URL of a running service; default runs in-process")
    parser.add_argument("--embeddings", required=True,
                        help="fixtures:PATH or runtime:BUNDLE_DIR")
    parser.add_argument("--prompts", default=None, help="tab-separated prompt-pair file")
    parser.add_argument("--niqe-model", default=None, help="pristine model file")
    parser.add_argument("--aggregation", default="sigmoid-add",
                        choices=["sigmoid-add", "sigmoid-mul", "linear-add", "direct-add"])
    parser.add_argument("--semantic-scale", type=float, default=1.0)
    parser.add_argument("--per-video-stats", action="store_true",
                        help="normalize spatial scores over per-video means instead of "
                             "pooled frame scores")
    parser.add_argument("--workers", type=int, default=1)


def _config(args) -> dict:
    return {
        "embeddings": args.embeddings,
        "prompts_file": args.prompts,
        "niqe_model_file": args.niqe_model,
        "aggregation": args.aggregation,
        "semantic_scale": args.semantic_scale,
        "pool_frame_scores": not args.per_video_stats,
        "workers": args.workers,
    }


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="blindvqa",
                                     description="zero-shot video quality scoring")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("score", help="score one or more videos")
    _add_common(p)
    p.add_argument("--video", action="append", required=True, dest="videos",
                   help="video path; repeatable")
    p.add_argument("--stats", default=None,
                   help="fixed-stats file; required when scoring a single video")
    p.add_argument("--out", default=None, help="write scores as JSON")

    p = sub.add_parser("bench", help="run a manifest benchmark (two-pass stats)")
    _add_common(p)
    p.add_argument("--manifest", required=True)
    p.add_argument("--stats", default=None, help="use fixed stats instead of two-pass")
    p.add_argument("--plcc-fit", default="none", choices=["none", "logistic4"])
    p.add_argument("--out", default=None, help="write the report as JSON")
    p.add_argument("--csv", default=None, help="also write per-video rows as CSV")
    p.add_argument("--svg", default=None, help="also write a score-vs-MOS scatter SVG")

    p = sub.add_parser("fit-niqe", help="fit a pristine model from an image directory")
    p.add_argument("--server", default=None)
    p.add_argument("--corpus", required=True, help="directory of pristine images")
    p.add_argument("--out", required=True)
    p.add_argument("--min-images", type=int, default=10)

    p = sub.add_parser("export-stats", help="score a corpus and export its stats file")
    _add_common(p)
    p.add_argument("--video", action="append", required=True, dest="videos")
    p.add_argument("--out", required=True)

    p = sub.add_parser("curvature-dump", help="dump per-triplet curvature series")
    p.add_argument("--server", default=None)
    p.add_argument("--video", required=True)
    p.add_argument("--out", default=None,
                   help="write whitespace-separated values; default stdout")

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)

    return parser


def _client(server: str | None) -> httpx.Client:
    if server:
        return httpx.Client(base_url=server, timeout=600.0)
    # in-process mode: starlette's client drives the ASGI app synchronously,
    # which plain httpx cannot do with this httpx version
    from starlette.testclient import TestClient

    from .service import create_app

    return TestClient(create_app(), raise_server_exceptions=False)


def _post(client: httpx.Client, path: str, payload: dict) -> dict:
    resp = client.post(path, json=payload)
    if resp.status_code != 200:
        try:
            detail = resp.json().get("detail", resp.text)
        except ValueError:
            detail = resp.text
        raise RuntimeError(f"{path} failed ({resp.status_code}): {detail}")
    return resp.json()


def _write_json(path: str | None, payload: dict) -> None:
    text = json.dumps(payload, indent=2)
    if path:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _run(args) -> int:
    if args.command == "serve":
        import uvicorn

        from .service import create_app

        uvicorn.run(create_app(), host=args.host, port=args.port)
        return 0

    with _client(args.server) as client:
        if args.command == "score":
            body = _post(client, "/score", {
                "videos": args.videos, "config": _config(args), "stats_file": args.stats,
            })
            _write_json(args.out, body)
            if args.out:
                for row in body["scores"]:
                    print(f"{row['video_id']}\tq_unified={row['q_unified']:.6f}")
            return 0

        if args.command == "bench":
            body = _post(client, "/bench", {
                "manifest": args.manifest, "config": _config(args),
                "stats_file": args.stats, "plcc_fit": args.plcc_fit,
            })
            report = body["report"]
            _write_json(args.out, report)
            if args.csv:
                with open(args.csv, "w", newline="") as fh:
                    writer = csv.writer(fh)
                    writer.writerow(["video_id", "mos", "q_a", "q_s", "q_t", "q_unified",
                                     "raw_niqe", "raw_tpqi", "flags"])
                    for r in report["rows"]:
                        writer.writerow([r["video_id"], r["mos"], r["q_a"], r["q_s"],
                                         r["q_t"], r["q_unified"], r["raw_niqe"],
                                         r["raw_tpqi"], ";".join(r["flags"])])
            if args.svg:
                from .bench import write_scatter_svg

                write_scatter_svg(
                    args.svg,
                    [r["q_unified"] for r in report["rows"]],
                    [r["mos"] for r in report["rows"]],
                    title=f"{report['dataset']}: SRCC={report['srcc']:.3f}",
                )
            print(f"{report['dataset']}: srcc={report['srcc']:.4f} "
                  f"plcc={report['plcc']:.4f} n={report['scored_count']}")
            return 0

        if args.command == "fit-niqe":
            body = _post(client, "/fit-niqe", {
                "corpus_dir": args.corpus, "out": args.out, "min_images": args.min_images,
            })
            print(f"model written to {body['out']} ({body['images_used']} images)")
            return 0

        if args.command == "export-stats":
            body = _post(client, "/export-stats", {
                "videos": args.videos, "config": _config(args), "out": args.out,
            })
            print(f"stats written to {body['out']}")
            return 0

        if args.command == "curvature-dump":
            body = _post(client, "/curvature", {"video": args.video})
            lines = [
                "lgn " + " ".join(f"{v:.8g}" for v in body["lgn"]),
                "v1 " + " ".join(f"{v:.8g}" for v in body["v1"]),
                f"raw_tpqi {body['raw_tpqi']:.8g}",
            ]
            text = "\n".join(lines)
            if args.out:
                with open(args.out, "w") as fh:
                    fh.write(text + "\n")
            else:
                print(text)
            return 0

    raise AssertionError(f"unhandled command {args.command}")


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _run(args)
    except (RuntimeError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
