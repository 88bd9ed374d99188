"""vidcurate-sidecar: serve the scorer protocol or convert media to FSER."""

from __future__ import annotations

import argparse
import logging
import sys

from .config import ConfigError, SidecarConfig, load_config
from .convert import ConvertError, media_to_fser
from .models import ModelError
from .serve import Server

log = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vidcurate-sidecar")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("serve", help="speak the scorer protocol on stdin/stdout")
    p.add_argument("--config", help="sidecar config file (defaults apply if omitted)")

    p = sub.add_parser("convert", help="convert a video or image directory to FSER")
    p.add_argument("input", help="video file or directory of numbered images")
    p.add_argument("output", help="output .fser path")
    p.add_argument("--width", type=int, default=64)
    p.add_argument("--height", type=int, default=64)
    p.add_argument("--fps", type=float, default=8.0, help="target fps after resampling")
    p.add_argument("--src-fps", type=float,
                   help="source fps (required for image dirs, overrides video metadata)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(levelname)s sidecar: %(message)s",
                        stream=sys.stderr)
    if args.command == "serve":
        try:
            config = load_config(args.config) if args.config else SidecarConfig()
            server = Server(config)
        except (ConfigError, ModelError) as exc:
            # handshake error message per protocol, then nonzero exit
            sys.stdout.write('{"type": "capabilities", "error": "%s"}\n'
                             % str(exc).replace('"', "'"))
            sys.stdout.flush()
            log.error("%s", exc)
            return 1
        return server.run()
    if args.command == "convert":
        try:
            count = media_to_fser(
                args.input, args.output,
                width=args.width, height=args.height, fps=args.fps,
                src_fps=args.src_fps,
            )
        except ConvertError as exc:
            log.error("%s", exc)
            return 2
        log.info("wrote %d frames to %s", count, args.output)
        return 0
    return 1


if __name__ == "__main__":
    sys.exit(main())
