"""Command line front end.

Three subcommands: `decompose` prints Iwasawa and eigenframe decompositions
of the input matrices, `control-sets` runs the reachability pipeline on the
requested spaces, and `verify` checks the structure theorems on matched
clouds. Runs are deterministic for a fixed configuration; output files are
byte-identical across runs except for the timestamp in the meta header.

Long-running service mode is a non-goal; every invocation is a single batch
run that writes its artifacts and exits.
"""

import argparse
import datetime
import json
import os
import sys

import numpy as np

from . import __version__
from .checks import (
    verify_conjugacy_CSw,
    verify_counting,
    verify_fiber_unions,
    verify_nu_decomposition,
    verify_pi_compatibility,
    verify_right_translation,
    verify_transitivity_fixed_points,
)
from .errors import FlagdynError, NumericalRankError
from .matdecomp import group_element, iwasawa_decompose, regular_split_decompose
from .presets import PRESETS
from .reach import (
    build_matched_graphs,
    build_reach_graph,
    find_control_sets,
    label_control_sets,
    order_control_sets,
)
from .signedperm import enumerate_Mstar
from .spaces import project_cloud, sample_space

THEOREM_TAGS = (
    "counting",
    "fiber-unions",
    "conjugacy",
    "nu-decomposition",
    "transitivity",
    "right-translation",
    "pi-compatibility",
)


def _meta():
    return {
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "tool": "flagdyn",
        "version": __version__,
    }


def _write_json(path, payload):
    with open(path, "w") as fh:
        json.dump(payload, fh, sort_keys=True, indent=1)
        fh.write("\n")


def build_config(args):
    """Merge defaults, preset, config file, and explicit flags, in that order."""
    cfg = {
        "n": None,
        "space": "ALL",
        "preset": None,
        "generators": None,
        "cloud_count": None,
        "seed": 7,
        "epsilon": None,
        "word_depth": None,
        "output_dir": ".",
        "theorems": list(THEOREM_TAGS),
        "trials": None,
        "neighbor_cap": 1,
        "min_core_size": 1,
    }
    if args.preset:
        if args.preset not in PRESETS:
            raise FlagdynError("unknown preset %r" % (args.preset,))
        preset = PRESETS[args.preset]
        cfg.update(
            preset=args.preset,
            n=preset["n"],
            word_depth=preset["word_depth"],
            seed=preset["seed"],
            neighbor_cap=preset.get("neighbor_cap", 1),
            min_core_size=preset.get("min_core_size", 1),
        )
    if args.config:
        with open(args.config) as fh:
            file_cfg = json.load(fh)
        unknown = set(file_cfg) - set(cfg)
        if unknown:
            raise FlagdynError("unknown config keys: %s" % sorted(unknown))
        cfg.update(file_cfg)
    for key in ("n", "space", "generators", "cloud_count", "seed", "epsilon",
                "word_depth", "output_dir", "trials"):
        value = getattr(args, key.replace("-", "_"), None)
        if value is not None:
            cfg[key] = value
    theorems = getattr(args, "theorems", None)
    if theorems:
        tags = [t.strip() for t in theorems.split(",") if t.strip()]
        bad = set(tags) - set(THEOREM_TAGS)
        if bad:
            raise FlagdynError("unknown theorem tags: %s" % sorted(bad))
        cfg["theorems"] = tags
    return cfg


def resolve_generators(cfg):
    if cfg.get("preset"):
        gens = PRESETS[cfg["preset"]]["generators"]()
    elif cfg.get("generators"):
        with open(cfg["generators"]) as fh:
            raw = json.load(fh)
        gens = [group_element(m) for m in raw]
    else:
        raise FlagdynError("either --preset or --generators is required")
    n = gens[0].shape[0]
    if cfg.get("n") is not None and cfg["n"] != n:
        raise FlagdynError("--n %s does not match generator size %d" % (cfg["n"], n))
    cfg["n"] = n
    if any(g.shape[0] != n for g in gens):
        raise FlagdynError("generators have mixed sizes")
    return gens


def _cloud_count(cfg, space_tag):
    if cfg.get("cloud_count"):
        return int(cfg["cloud_count"])
    if cfg.get("preset"):
        return PRESETS[cfg["preset"]]["cloud_count"][space_tag]
    return {2: 720, 3: 20000, 4: 20000}[cfg["n"]] * (2 if space_tag == "K" and cfg["n"] == 2 else 1)


def _spaces_for(cfg):
    if cfg["space"] != "ALL":
        if cfg["space"] not in ("K", "FLAG", "PROJ"):
            raise FlagdynError("unknown space %r" % (cfg["space"],))
        return [cfg["space"]]
    return ["PROJ", "K"] if cfg["n"] == 2 else ["FLAG", "K"]


def analyze_space(gens, cfg, space_tag):
    """Sample, build the reach graph, and extract labeled ordered control sets."""
    cloud = sample_space(space_tag, cfg["n"], _cloud_count(cfg, space_tag), cfg["seed"])
    graph = build_reach_graph(
        gens, cloud, epsilon=cfg.get("epsilon"), word_depth=cfg.get("word_depth"),
        neighbor_cap=cfg.get("neighbor_cap", 1),
    )
    records = find_control_sets(graph, min_core_size=cfg.get("min_core_size", 1))
    order_control_sets(records, graph)
    label_control_sets(records, graph)
    return graph, records


def analyze_matched(gens, cfg):
    """Matched K and flag analyses over one index-aligned cloud."""
    k_cloud = sample_space("K", cfg["n"], _cloud_count(cfg, "K"), cfg["seed"])
    flag_cloud = project_cloud(k_cloud, "FLAG", dedupe=True)
    k_graph, f_graph = build_matched_graphs(
        gens,
        k_cloud,
        flag_cloud,
        epsilon_k=cfg.get("epsilon"),
        epsilon_flag=cfg.get("epsilon"),
        word_depth=cfg.get("word_depth"),
        neighbor_cap=cfg.get("neighbor_cap", 1),
    )
    out = {}
    for tag, graph in (("K", k_graph), ("FLAG", f_graph)):
        records = find_control_sets(graph, min_core_size=cfg.get("min_core_size", 1))
        order_control_sets(records, graph)
        label_control_sets(records, graph)
        out[tag] = (graph, records)
    return out


def _record_payload(record):
    return {
        "record_id": record.record_id,
        "space": record.space_tag,
        "invariant": bool(record.invariant),
        "order_rank": int(record.order_rank),
        "labels": [lab.serialize() for lab in record.labels],
        "core_size": int(len(record.core_indices)),
        "member_size": int(len(record.member_indices)),
        "core_indices": [int(i) for i in record.core_indices],
        "member_indices": [int(i) for i in record.member_indices],
    }


def write_space_outputs(outdir, space_tag, graph, records):
    cloud = graph.cloud
    _write_json(
        os.path.join(outdir, "points_%s.json" % space_tag),
        {
            "meta": _meta(),
            "space": space_tag,
            "n": cloud.n,
            "seed": cloud.seed,
            "count": cloud.count,
            "points": np.round(cloud.points, 12).tolist(),
        },
    )
    rows, cols = graph.edge_arrays()
    with open(os.path.join(outdir, "graph_%s.jsonl" % space_tag), "w") as fh:
        fh.write(json.dumps({"meta": _meta()}, sort_keys=True) + "\n")
        header = {
            "edge_count": int(len(rows)),
            "epsilon": float(graph.epsilon),
            "space": space_tag,
            "word_depth": int(graph.word_depth),
        }
        fh.write(json.dumps(header, sort_keys=True) + "\n")
        for r, c in zip(rows.tolist(), cols.tolist()):
            fh.write(json.dumps({"dst": int(c), "src": int(r)}, sort_keys=True) + "\n")
    _write_json(
        os.path.join(outdir, "control_sets_%s.json" % space_tag),
        {
            "meta": _meta(),
            "space": space_tag,
            "epsilon": float(graph.epsilon),
            "word_depth": int(graph.word_depth),
            "control_sets": [_record_payload(r) for r in records],
        },
    )


def _summary_line(space_tag, records):
    inv = sum(1 for r in records if r.invariant)
    return "%s: %d (%d invariant)" % (space_tag, len(records), inv)


def cmd_decompose(args):
    cfg = build_config(args)
    gens = resolve_generators(cfg)
    entries = []
    for g in gens:
        triple = iwasawa_decompose(g)
        entry = {
            "matrix": np.round(g, 12).tolist(),
            "iwasawa": {
                "k": np.round(triple.k, 12).tolist(),
                "a": np.round(triple.a, 12).tolist(),
                "n": np.round(triple.nfac, 12).tolist(),
            },
        }
        try:
            split = regular_split_decompose(g)
            entry["regular_split"] = {
                "conjugator": np.round(split.conjugator, 12).tolist(),
                "logs": np.round(split.logs, 12).tolist(),
            }
        except FlagdynError as exc:
            entry["regular_split"] = {"error": type(exc).__name__}
        entries.append(entry)
    os.makedirs(cfg["output_dir"], exist_ok=True)
    _write_json(
        os.path.join(cfg["output_dir"], "decompose.json"),
        {"meta": _meta(), "elements": entries},
    )
    regular = sum(1 for e in entries if "logs" in e["regular_split"])
    print("decomposed %d elements (%d regular)" % (len(entries), regular))
    return 0


def cmd_control_sets(args):
    cfg = build_config(args)
    gens = resolve_generators(cfg)
    os.makedirs(cfg["output_dir"], exist_ok=True)
    lines = []
    for space_tag in _spaces_for(cfg):
        graph, records = analyze_space(gens, cfg, space_tag)
        write_space_outputs(cfg["output_dir"], space_tag, graph, records)
        lines.append(_summary_line(space_tag, records))
    print("; ".join(lines))
    return 0


def cmd_verify(args):
    cfg = build_config(args)
    gens = resolve_generators(cfg)
    os.makedirs(cfg["output_dir"], exist_ok=True)
    n = cfg["n"]
    matched = analyze_matched(gens, cfg)
    k_graph, k_records = matched["K"]
    f_graph, f_records = matched["FLAG"]
    for tag, (graph, records) in matched.items():
        write_space_outputs(cfg["output_dir"], tag, graph, records)
    reports = []
    for tag in cfg["theorems"]:
        if tag == "counting":
            reports.append(verify_counting(k_records, f_records, k_graph, n))
        elif tag == "fiber-unions":
            reports.append(
                verify_fiber_unions(k_records, f_records, k_graph, f_graph, n)
            )
        elif tag == "conjugacy":
            reports.append(verify_conjugacy_CSw(k_records, f_records, k_graph, f_graph, n))
        elif tag == "nu-decomposition":
            for u in enumerate_Mstar(n):
                reports.append(verify_nu_decomposition(u, seed=cfg["seed"]))
        elif tag == "transitivity":
            trials = cfg.get("trials") or (50 if n == 2 else 20)
            reports.append(
                verify_transitivity_fixed_points(
                    k_records, k_graph, gens, trials=trials, seed=cfg["seed"]
                )
            )
        elif tag == "right-translation":
            reports.append(verify_right_translation(k_records, k_graph, n))
        elif tag == "pi-compatibility":
            reports.append(verify_pi_compatibility(k_records, f_records, k_graph, f_graph))
    _write_json(
        os.path.join(cfg["output_dir"], "verify.json"),
        {"meta": _meta(), "reports": [r.serialize() for r in reports]},
    )
    for tag, (graph, records) in matched.items():
        print(_summary_line(tag, records))
    failed = [r for r in reports if not r.passed]
    for report in reports:
        print(
            "%-18s %s  (%s vs %s)"
            % (report.theorem_tag, "PASS" if report.passed else "FAIL",
               report.lhs, report.rhs)
        )
    return 1 if failed else 0


def _add_common(sub):
    sub.add_argument("--n", type=int, default=None)
    sub.add_argument("--space", default=None, choices=["K", "FLAG", "PROJ", "ALL"])
    sub.add_argument("--preset", default=None)
    sub.add_argument("--generators", default=None, metavar="FILE")
    sub.add_argument("--cloud-count", dest="cloud_count", type=int, default=None)
    sub.add_argument("--seed", type=int, default=None)
    sub.add_argument("--epsilon", type=float, default=None)
    sub.add_argument("--word-depth", dest="word_depth", type=int, default=None)
    sub.add_argument("--output-dir", dest="output_dir", default=None)
    sub.add_argument("--config", default=None, metavar="FILE")


def make_parser():
    parser = argparse.ArgumentParser(
        prog="flagdyn",
        description="control sets of matrix semigroups on SO(n) and flags",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p_dec = sub.add_parser("decompose", help="Iwasawa and eigenframe decompositions")
    _add_common(p_dec)
    p_dec.set_defaults(func=cmd_decompose)
    p_cs = sub.add_parser("control-sets", help="compute control sets on the spaces")
    _add_common(p_cs)
    p_cs.set_defaults(func=cmd_control_sets)
    p_ver = sub.add_parser("verify", help="check the structure theorems")
    _add_common(p_ver)
    p_ver.add_argument("--theorems", default=None,
                       help="comma separated subset of: %s" % ", ".join(THEOREM_TAGS))
    p_ver.add_argument("--trials", type=int, default=None)
    p_ver.set_defaults(func=cmd_verify)
    return parser


def main(argv=None):
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NumericalRankError as exc:
        print("numerical rank failure: %s" % exc, file=sys.stderr)
        return 3
    except (FlagdynError, OSError, json.JSONDecodeError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
