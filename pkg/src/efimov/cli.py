"""``efimov <mode> --config FILE [--out PATH] [--threads N] [--strict]``."""
from __future__ import annotations

import argparse
import logging
import os
import sys
from typing import Optional, Sequence

from . import __version__
from .config import MODES, parse_config
from .errors import ConfigError, EfimovError
from .output import emit, write_output
from .runner import run

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUN = 3
EXIT_IO = 4

log = logging.getLogger("efimov")


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="efimov", description="Efimov trimer spectra in vacuum "
                                "and in a medium, Born-Oppenheimer trimer counts.")
    p.add_argument("mode", choices=MODES)
    p.add_argument("--config", help="run configuration file (optional for constants)")
    p.add_argument("--out", help="output path, '-' for stdout (default <mode>.<format>)")
    p.add_argument("--threads", type=int, default=None,
                   help="worker threads (default $EFIMOV_THREADS or 1)")
    p.add_argument("--strict", action="store_true", help="reject unknown config keys")
    p.add_argument("--version", action="version", version=f"efimov {__version__}")
    return p


def _threads(arg: Optional[int]) -> int:
    if arg is not None:
        n = arg
    else:
        env = os.environ.get("EFIMOV_THREADS", "").strip()
        if not env:
            return 1
        try:
            n = int(env)
        except ValueError:
            raise ConfigError(f"EFIMOV_THREADS must be an integer, got {env!r}") from None
    if n < 1:
        raise ConfigError(f"thread count must be >= 1, got {n}", key="threads")
    return n


def main(argv: Optional[Sequence[str]] = None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO, format="efimov: %(message)s")
    args = _parser().parse_args(argv)
    try:
        threads = _threads(args.threads)
        if args.config is None:
            if args.mode != "constants":
                raise ConfigError(f"mode {args.mode} needs --config")
            text = ""
        else:
            try:
                with open(args.config, encoding="utf-8") as fh:
                    text = fh.read()
            except OSError as exc:
                log.error("cannot read config: %s", exc)
                return EXIT_IO
        spec = parse_config(text, strict=args.strict, mode=args.mode)
    except ConfigError as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG

    log.info("running %s with %d thread(s)", spec.mode, threads)
    try:
        rs = run(spec, threads=threads)
    except ConfigError as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG
    except EfimovError as exc:
        log.error("run failed: %s", exc)
        return EXIT_RUN
    log.info("%d rows in %.2f s", len(rs.rows), rs.wall_time)

    path = args.out or spec.out_path or f"{spec.mode}.{spec.out_format}"
    try:
        write_output(emit(rs, spec.out_format, spec.axis_transform), path)
    except OSError as exc:
        log.error("cannot write output: %s", exc)
        return EXIT_IO
    if path != "-":
        log.info("wrote %s", path)
    if spec.mode == "constants":
        for name, value in rs.rows:
            log.info("%s = %.12g", name, value)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
