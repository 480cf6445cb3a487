"""Command line front end: embed-export --manifest ... --images ... --out DIR."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .encoders import DEFAULT_MODEL
from .errors import ExporterError
from .export import ExportJob, export


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="embed-export",
        description="Encode a corpus manifest into image/text/aspect embedding sidecars.",
    )
    parser.add_argument("--manifest", required=True, help="corpus manifest TSV")
    parser.add_argument("--images", required=True, help="directory holding the image files")
    parser.add_argument("--out", required=True, help="output directory for the sidecars")
    parser.add_argument(
        "--model",
        default=DEFAULT_MODEL,
        help="encoder id: builtin:palette-v1 or clip:<checkpoint-or-path>",
    )
    parser.add_argument("--device", default="cpu", help="inference device for model backends")
    parser.add_argument("--batch-size", type=int, default=16)
    parser.add_argument(
        "--dim", type=int, default=64, help="embedding width for the builtin encoder"
    )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    out = Path(args.out)
    try:
        job = ExportJob(
            manifest=Path(args.manifest),
            images_dir=Path(args.images),
            out_image=out / "emb_image.jsonl",
            out_text=out / "emb_text.jsonl",
            out_aspect=out / "emb_aspect.jsonl",
            out_meta=out / "meta.json",
            model_id=args.model,
            device=args.device,
            batch_size=args.batch_size,
            dim=args.dim,
        )
        out.mkdir(parents=True, exist_ok=True)
        counts = export(job)
    except (ExporterError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(
        "wrote {image} image / {text} text / {aspect} aspect records to {out}".format(
            out=out, **counts
        )
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
