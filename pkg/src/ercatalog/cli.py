"""Command line entry points: serve, dump, restore, demo-fixture."""
from __future__ import annotations

import argparse
import sys

from . import storage
from .errors import ServiceError
from .registry import ClientContext, Registry
from .service import Config, Service, serve_forever


def _config(args) -> Config:
    if args.config:
        return Config.from_file(args.config)
    return Config()


def _cmd_serve(args):
    serve_forever(Service(_config(args)))
    return 0


def _cmd_dump(args):
    cfg = _config(args)
    registry = Registry(cfg.data_dir)
    store = registry.get(args.catalog)
    txn = store.begin("read")
    dump = storage.export_catalog(txn)
    store.commit(txn)
    storage.write_dump(dump, args.out)
    print(f"catalog {store.id} dumped to {args.out}")
    return 0


def _cmd_restore(args):
    cfg = _config(args)
    registry = Registry(cfg.data_dir)
    dump = storage.read_dump(getattr(args, "in"))
    store = registry.create_catalog(ClientContext(identity=args.owner))
    txn = store.begin("write")
    try:
        storage.import_catalog(txn, dump)
        store.commit(txn)
    except BaseException:
        store.abort(txn)
        registry.delete_catalog(ClientContext(identity=args.owner), store.id)
        raise
    print(f"restored as catalog {store.id}")
    return 0


def _cmd_demo_fixture(args):
    from .demo import load_demo
    cfg = _config(args)
    registry = Registry(cfg.data_dir)
    store = load_demo(registry, ClientContext(identity=args.owner))
    print(f"demo fixture loaded as catalog {store.id}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="ercatalog",
        description="entity-relationship catalog service over HTTP")
    parser.add_argument("--config", help="path to a JSON config file")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("serve", help="run the HTTP service")

    p = sub.add_parser("dump", help="export one catalog to a directory")
    p.add_argument("--catalog", required=True, help="catalog id")
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("restore", help="import a dump as a new catalog")
    p.add_argument("--in", required=True, help="dump directory")
    p.add_argument("--owner", default="admin", help="owner identity for the new catalog")

    p = sub.add_parser("demo-fixture", help="load the demo model and seed rows")
    p.add_argument("--owner", default="admin", help="owner identity for the new catalog")

    args = parser.parse_args(argv)
    handler = {
        "serve": _cmd_serve,
        "dump": _cmd_dump,
        "restore": _cmd_restore,
        "demo-fixture": _cmd_demo_fixture,
    }[args.command]
    try:
        return handler(args)
    except ServiceError as e:
        print(f"error: {e.message}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
