"""Batch driver: load a dataset, replay a command script (the same
vocabulary as the service event log), run seeded discovery with auto-accept
policies, and write the Turtle export, the stats CSV, and the session log.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from typing import Any, Mapping

from . import dataset, owl, stats
from .discovery import DiscoveryConfig
from .errors import TaxbenchError
from .session import COMMAND_OPS, Session
from .wsom import TrainConfig


class ScriptError(TaxbenchError):
    """A script command failed; carries the failing command index."""

    def __init__(self, index: int, op: str, cause: Exception):
        super().__init__(f"command {index} ({op}): {cause}")
        self.index = index


def _load_script(path: str) -> dict[str, Any]:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if isinstance(doc, list):  # a bare command list is accepted
        doc = {"commands": doc}
    if not isinstance(doc.get("commands"), list):
        raise TaxbenchError("script must contain a 'commands' list")
    return doc


def _discovery_config(raw: Mapping[str, Any], default_seed: int | None) -> DiscoveryConfig:
    config = DiscoveryConfig.from_doc(raw)
    if default_seed is not None and "seed" not in raw.get("train", {}):
        config = replace(config, train=replace(config.train, seed=default_seed))
    return config


def _apply_policy(session: Session, job_result: list[dict[str, Any]], policy: Any) -> list[str]:
    """accept_all / reject_all / {"accept_top_k": k}; proposals arrive sorted
    by extension size already."""
    if policy in (None, "none"):
        return []
    if policy == "accept_all":
        keep = len(job_result)
    elif policy == "reject_all":
        keep = 0
    elif isinstance(policy, Mapping) and "accept_top_k" in policy:
        keep = int(policy["accept_top_k"])
    else:
        raise TaxbenchError(f"unknown discovery policy: {policy!r}")
    created = []
    for i, doc in enumerate(job_result):
        decision = "accept" if i < keep else "reject"
        cid = session.resolve(doc["id"], decision)
        if cid is not None:
            created.append(cid)
    return created


def run_script(
    data_path: str,
    script: Mapping[str, Any],
    data_format: str = "csv",
    seed: int | None = None,
) -> Session:
    """Execute every command in order on a fresh session."""
    options = dataset.LoadOptions(columns=script.get("columns"))
    table = dataset.load_table(data_path, data_format, options)
    session = Session(table)
    for index, command in enumerate(script["commands"]):
        op = command.get("op", "?")
        try:
            if op == "discover":
                config = _discovery_config(command.get("config", {}), seed)
                job = session.run_discovery_sync(command["concept"], config)
                _apply_policy(session, job.result or [], command.get("policy"))
            elif op in COMMAND_OPS:
                session.apply_command(command)
            else:
                raise TaxbenchError(f"unknown op {op!r}")
        except ScriptError:
            raise
        except Exception as exc:
            raise ScriptError(index, op, exc) from exc
    return session


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="taxbench")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    run_p = sub.add_parser("run", help="execute a command script against a dataset")
    run_p.add_argument("--data", required=True, help="CSV/TSV dataset path")
    run_p.add_argument("--script", required=True, help="JSON command script path")
    run_p.add_argument("--out-owl", help="write the Turtle export here")
    run_p.add_argument("--out-stats", help="write the stats CSV here")
    run_p.add_argument("--out-log", help="write the session event log (JSON) here")
    run_p.add_argument("--seed", type=int, help="default seed for discover commands")
    run_p.add_argument("--format", default="csv", choices=["csv", "tsv"], help="dataset format")

    serve_p = sub.add_parser("serve", help="start the HTTP session API")
    serve_p.add_argument("--host", default="127.0.0.1")
    serve_p.add_argument("--port", type=int, default=8000)

    args = parser.parse_args(argv)

    if args.subcommand == "serve":
        import uvicorn

        from .service import create_app

        uvicorn.run(create_app(), host=args.host, port=args.port)
        return 0

    try:
        script = _load_script(args.script)
        session = run_script(args.data, script, data_format=args.format, seed=args.seed)
    except ScriptError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (TaxbenchError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    export_opts = script.get("export", {})
    if args.out_owl:
        options = owl.ExportOptions(
            base_iri=export_opts.get("base_iri", "http://example.org/taxonomy"),
            include_individuals=export_opts.get("include_individuals", True),
            ontology_label=export_opts.get("ontology_label"),
        )
        document = owl.export_turtle(session.taxonomy, session.table, options)
        with open(args.out_owl, "w", encoding="utf-8") as fh:
            fh.write(document)
    if args.out_stats:
        bundle = stats.compute_stats(owl.skeleton_from_taxonomy(session.taxonomy))
        with open(args.out_stats, "w", encoding="utf-8") as fh:
            fh.write(bundle.to_csv())
    if args.out_log:
        with open(args.out_log, "w", encoding="utf-8") as fh:
            json.dump({"events": session.event_log}, fh, indent=2, default=str)
            fh.write("\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
