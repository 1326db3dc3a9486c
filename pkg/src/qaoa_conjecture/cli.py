"""Command-line driver: generate -> simulate -> conjecture -> analyze.

Every stage reads only the files written by the previous one, all inside
the output directory::

    graphs/<graph_id>.txt, manifest.json      generate (+ generate_errors.json)
    table.csv, errors.json                    simulate
    conjectures.jsonl                         conjecture
    analysis.json, analysis.txt               analyze

Exit codes: 0 success, 1 validation error, 2 per-instance failures,
3 non-universal fingerprint groups found.
"""
import argparse
import json
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import analysis_summary, format_report, universality, violation_cluster, write_summary
from .config import dump_config, load_config
from .conjecture import generate as generate_conjectures
from .conjecture import read_conjectures, write_conjectures
from .errors import QaoaConjectureError
from .graphs import generate as generate_graph
from .graphs import read_edge_list, write_edge_list
from .invariants import invariant_vector
from .maxcut import maxcut_bruteforce
from .qaoa import Simulator
from .table import KnowledgeTable, build_row, instance_id_for, load, save

log = logging.getLogger("qaoa_conjecture")

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_INSTANCE_FAILURES = 2
EXIT_EXCEPTIONS = 3

MANIFEST = "manifest.json"
TABLE = "table.csv"
ERRORS = "errors.json"
GENERATE_ERRORS = "generate_errors.json"
CONJECTURES = "conjectures.jsonl"
ANALYSIS_JSON = "analysis.json"
ANALYSIS_TXT = "analysis.txt"


def _write_json(obj, path):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def graph_seed(seed, spec_index, i):
    """64-bit seed for graph ``i`` of model spec ``spec_index``."""
    words = np.random.SeedSequence([seed, spec_index, i]).generate_state(2, dtype=np.uint32)
    return (int(words[0]) << 32) | int(words[1])


# ---------------------------------------------------------------- stages


def cmd_generate(cfg, out):
    """Draw every configured graph; returns the failures (normally none)."""
    out = Path(out)
    (out / "graphs").mkdir(parents=True, exist_ok=True)
    entries, failures = [], []
    for s, spec in enumerate(cfg.models):
        sizes = spec.sizes() if spec.kind != "file" else [0]
        for i in range(spec.count):
            n = sizes[i % len(sizes)]
            seed = graph_seed(cfg.seed, s, i)
            graph_id = f"{spec.kind}-{s:02d}-{i:04d}"
            model = spec.model_for(n)
            try:
                g = generate_graph(model, n, seed)
            except QaoaConjectureError as exc:
                failures.append({"instance_id": graph_id, "stage": "generate",
                                 "error": type(exc).__name__, "message": str(exc)})
                continue
            rel = f"graphs/{graph_id}.txt"
            write_edge_list(g, out / rel)
            entries.append({"instance_id": graph_id, "model": spec.kind,
                            "params": dict(model.params), "n": g.n, "seed": seed, "path": rel})
    _write_json({"seed": cfg.seed, "graphs": entries}, out / MANIFEST)
    if failures:
        _write_json(failures, out / GENERATE_ERRORS)
    log.info("generated %d graphs (%d failures)", len(entries), len(failures))
    return failures


def _simulate_entry(entry, base, depths, settings):
    graph_id = entry["instance_id"]
    rows, errors = [], []
    try:
        g = read_edge_list(base / entry["path"])
        inv = invariant_vector(g)
        mc = maxcut_bruteforce(g).value
        sim = Simulator(g)
    except Exception as exc:  # recorded, the run continues
        for p in depths:
            errors.append({"instance_id": instance_id_for(graph_id, p), "stage": "simulate",
                           "error": type(exc).__name__, "message": str(exc)})
        return rows, errors
    for p in depths:
        try:
            rows.append(build_row(g, p, entry["seed"], settings, graph_id=graph_id,
                                  model_kind=entry["model"], simulator=sim, maxcut=mc,
                                  invariants=inv))
        except Exception as exc:
            errors.append({"instance_id": instance_id_for(graph_id, p), "stage": "simulate",
                           "error": type(exc).__name__, "message": str(exc)})
    return rows, errors


def cmd_simulate(manifest_path, depths, settings, out, threads=1):
    """Optimize every (graph, depth); rows sorted by graph then depth. Returns the failures."""
    manifest_path = Path(manifest_path)
    with open(manifest_path) as fh:
        manifest = json.load(fh)
    base = manifest_path.parent
    depths = sorted(set(depths))
    entries = sorted(manifest["graphs"], key=lambda e: e["instance_id"])
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        results = list(pool.map(lambda e: _simulate_entry(e, base, depths, settings), entries))
    rows = [r for rs, _ in results for r in rs]
    errors = sorted((e for _, es in results for e in es), key=lambda e: e["instance_id"])
    table = KnowledgeTable(rows).sorted()
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    save(table, out / TABLE)
    _write_json(errors, out / ERRORS)
    log.info("simulated %d rows (%d failures)", len(table), len(errors))
    return errors


def cmd_conjecture(table_path, engine, out):
    table = load(table_path)
    conjs = generate_conjectures(table, engine)
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    write_conjectures(conjs, out / CONJECTURES)
    log.info("wrote %d conjectures", len(conjs))
    return conjs


def cmd_analyze(table_path, conjectures_path, analysis, out):
    """Universality per invariant set plus violation clusters; returns the exit code."""
    table = load(table_path)
    conjs = read_conjectures(conjectures_path) if conjectures_path is not None else []
    reports = {name: universality(table, tuple(cols), analysis.epsilon, analysis.within_model)
               for name, cols in analysis.invariant_sets.items()}
    clusters = [violation_cluster(c, table) for c in conjs if c.violations]
    summary = analysis_summary(reports, clusters)
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    write_summary(summary, out / ANALYSIS_JSON)
    (out / ANALYSIS_TXT).write_text(format_report(reports, clusters))
    return EXIT_EXCEPTIONS if summary["exceptions"] else EXIT_OK


# ---------------------------------------------------------------- argument parsing


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML run configuration (defaults if omitted)")
    common.add_argument("--out", help="output directory (overrides the config)")
    common.add_argument("--threads", type=int, default=1, help="simulation worker threads")
    common.add_argument("--seed", type=int, help="master seed (overrides the config)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="qaoa-conjecture",
                                     description="QAOA parameter conjecturing pipeline")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    cfg = sub.add_parser("config", help="configuration helpers")
    cfg_sub = cfg.add_subparsers(dest="action", required=True)
    init = cfg_sub.add_parser("init", help="print the default configuration")
    init.add_argument("path", nargs="?", help="write here instead of stdout")

    sub.add_parser("generate", parents=[common], help="draw graphs and write the manifest")
    sim = sub.add_parser("simulate", parents=[common], help="optimize QAOA on every graph")
    sim.add_argument("--manifest", help="manifest to read (default: <out>/manifest.json)")
    con = sub.add_parser("conjecture", parents=[common], help="conjecture over the table")
    con.add_argument("--table", help="table to read (default: <out>/table.csv)")
    ana = sub.add_parser("analyze", parents=[common], help="universality and violation reports")
    ana.add_argument("--table", help="table to read (default: <out>/table.csv)")
    ana.add_argument("--conjectures", help="conjectures to read (default: <out>/conjectures.jsonl)")
    sub.add_parser("run", parents=[common], help="all four stages in order")
    return parser


def _resolve(args):
    cfg = load_config(args.config)
    if args.seed is not None:
        if not 0 <= args.seed < 2 ** 64:
            raise QaoaConjectureError("--seed must be an unsigned 64-bit integer")
        cfg.seed = args.seed
    if args.threads < 1:
        raise QaoaConjectureError("--threads must be at least 1")
    out = Path(args.out if args.out is not None else cfg.output)
    return cfg, out


def _dispatch(args):
    if args.command == "config":
        text = dump_config(load_config(None))
        if args.path:
            Path(args.path).write_text(text)
        else:
            sys.stdout.write(text)
        return EXIT_OK

    cfg, out = _resolve(args)
    if args.command == "generate":
        return EXIT_INSTANCE_FAILURES if cmd_generate(cfg, out) else EXIT_OK
    if args.command == "simulate":
        manifest = args.manifest or out / MANIFEST
        failures = cmd_simulate(manifest, cfg.depths, cfg.optimizer, out, args.threads)
        return EXIT_INSTANCE_FAILURES if failures else EXIT_OK
    if args.command == "conjecture":
        cmd_conjecture(args.table or out / TABLE, cfg.engine, out)
        return EXIT_OK
    if args.command == "analyze":
        conj = args.conjectures or out / CONJECTURES
        conj = conj if Path(conj).exists() else None
        return cmd_analyze(args.table or out / TABLE, conj, cfg.analysis, out)
    # run
    gen_fail = cmd_generate(cfg, out)
    sim_fail = cmd_simulate(out / MANIFEST, cfg.depths, cfg.optimizer, out, args.threads)
    cmd_conjecture(out / TABLE, cfg.engine, out)
    code = cmd_analyze(out / TABLE, out / CONJECTURES, cfg.analysis, out)
    return EXIT_INSTANCE_FAILURES if gen_fail or sim_fail else code


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return _dispatch(args)
    except (QaoaConjectureError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
