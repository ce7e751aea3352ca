"""Thin command-line client for the experiment service.

Every subcommand talks HTTP to the service API. With ``--server`` the
requests go to a running instance; without it the service app is mounted on
an in-process transport, so the CLI works standalone with identical
semantics. Exit codes: 0 success, 1 configuration or transport problems,
2 runtime divergence.
"""

from __future__ import annotations

import argparse
import asyncio
import sys
from pathlib import Path

import httpx


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with code 2 on usage errors; 2 is reserved for
    # divergence here, so usage problems are remapped to exit 1.
    def error(self, message: str) -> None:  # type: ignore[override]
        raise _UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="subspacenet", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: _Parser) -> None:
        p.add_argument("config", help="experiment configuration file")
        p.add_argument("--server", help="base URL of a running service (default: in-process)")

    p_run = sub.add_parser("run", help="run the configured experiment and write its files")
    add_common(p_run)
    p_run.add_argument("--seed", type=int, help="override the master seed")
    p_run.add_argument("--out", help="output directory (default: config output.directory)")

    p_val = sub.add_parser("validate", help="check a configuration without running anything")
    add_common(p_val)

    p_dump = sub.add_parser("dump-scenario", help="write the generated scenario snapshot")
    add_common(p_dump)
    p_dump.add_argument("--seed", type=int, help="override the master seed")
    p_dump.add_argument("--out", help="output directory (default: config output.directory)")

    p_serve = sub.add_parser("serve", help="start the HTTP service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)
    return parser


async def _post(server: str | None, path: str, payload: dict) -> httpx.Response:
    if server:
        client = httpx.AsyncClient(base_url=server, timeout=None)
    else:
        from .service.app import create_app

        client = httpx.AsyncClient(
            transport=httpx.ASGITransport(app=create_app()),
            base_url="http://subspacenet.internal",
            timeout=None,
        )
    async with client:
        return await client.post(path, json=payload)


def _post_sync(server: str | None, path: str, payload: dict) -> httpx.Response:
    return asyncio.run(_post(server, path, payload))


def _read_config(path: str) -> str:
    return Path(path).read_text()


def _fail_detail(response: httpx.Response) -> str:
    try:
        return str(response.json().get("detail", response.text))
    except ValueError:
        return response.text


def _write_files(directory: str, files: dict[str, str]) -> list[Path]:
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name in sorted(files):
        target = out / name
        target.write_text(files[name])
        written.append(target)
    return written


def _cmd_validate(args: argparse.Namespace) -> int:
    payload = {"config_text": _read_config(args.config)}
    response = _post_sync(args.server, "/experiments/validate", payload)
    response.raise_for_status()
    body = response.json()
    if body["valid"]:
        print("ok")
        return 0
    for err in body["errors"]:
        print(err, file=sys.stderr)
    return 1


def _cmd_run(args: argparse.Namespace) -> int:
    payload = {"config_text": _read_config(args.config), "seed": args.seed}
    response = _post_sync(args.server, "/experiments/run", payload)
    if response.status_code == 422:
        print(_fail_detail(response), file=sys.stderr)
        return 1
    response.raise_for_status()
    body = response.json()
    directory = args.out or body["output_directory"]
    written = _write_files(directory, body["files"])
    for path in written:
        print(path)
    if body["status"] == "diverged":
        info = body["divergence"]
        print(
            f"diverged: algorithm={info['algorithm']} run={info['run_index']} "
            f"iteration={info['iteration']} node={info['node']}",
            file=sys.stderr,
        )
        return 2
    return 0


def _cmd_dump(args: argparse.Namespace) -> int:
    payload = {"config_text": _read_config(args.config), "seed": args.seed}
    response = _post_sync(args.server, "/scenarios/dump", payload)
    if response.status_code == 422:
        print(_fail_detail(response), file=sys.stderr)
        return 1
    response.raise_for_status()
    body = response.json()
    directory = args.out or body["output_directory"]
    written = _write_files(directory, {body["filename"]: body["content"]})
    print(written[0])
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service.app import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port)
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        if args.command == "validate":
            return _cmd_validate(args)
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "dump-scenario":
            return _cmd_dump(args)
        return _cmd_serve(args)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except httpx.HTTPError as exc:
        print(f"error: service request failed: {exc}", file=sys.stderr)
        return 1


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
