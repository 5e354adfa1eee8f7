"""Command-line pipeline: ingest -> normalize -> trim -> fit -> evaluate.

One binary, one stage per subcommand, pipeable through file artifacts.
Every stage is deterministic given (inputs, flags, seed), writes its
artifacts atomically, and records a manifest JSON with input hashes.
"""

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .em import FitConfig, fit
from .errors import (
    AhpiError,
    ConfigError,
    EmptyOutputError,
    FileFormatError,
    InfeasibleTargetError,
    InvalidArgumentError,
    NumericalFailureError,
    UndefinedResultError,
)
from .evaluate import (
    balanced_accuracy,
    calibration_report,
    kendall_tau,
    predict_defendant_propensity,
    temporal_split,
)
from .fileio import (
    EXIT_BAD_FORMAT,
    EXIT_CONFIG,
    EXIT_EMPTY_OUTPUT,
    EXIT_INFEASIBLE,
    EXIT_MISSING_FILE,
    EXIT_NUMERICAL,
    EXIT_OK,
    atomic_write_text,
    expand_rows,
    ingest,
    load_model,
    load_parse_config,
    load_ranking,
    read_canonical_map,
    read_interaction_rows,
    read_name_counts,
    records_to_rows,
    rows_to_records,
    save_model,
    write_canonical_map,
    write_interaction_rows,
    write_manifest,
)
from .evaluate import ExternalRanking
from .model import EntityId, InteractionRecord, InteractionType, Winner, reindex_records
from .names import DEFAULT_PARSE_CONFIG, agglomerate, apply_replacements
from .network import InteractionNetwork, trim_to_q
from .synth import SynthConfig, generate_with_truth, litigation_config, q_sweep

_SUBCOMMAND_KEYS = {
    "normalize": {"input", "output", "threshold_c", "parser_config"},
    "ingest": {"input", "output", "canonical_map", "strict"},
    "trim": {"input", "output", "q_factor"},
    "fit": {"input", "output", "max_iters", "seed"},
    "predict": {"model", "input", "output", "strict"},
    "evaluate": {
        "input",
        "out_dir",
        "model",
        "train_fraction",
        "bins",
        "bootstrap",
        "seed",
        "max_iters",
    },
    "compare-rankings": {
        "model",
        "input",
        "rankings",
        "canonical_map",
        "out_dir",
        "bootstrap",
        "seed",
    },
    "synth": {
        "output",
        "truth_out",
        "n",
        "k",
        "seed",
        "type_weights",
        "eps",
        "q",
        "type_names",
        "scores_file",
        "activity_skew",
    },
    "sweep-q": {
        "out_dir",
        "n",
        "k",
        "seed",
        "q_targets",
        "replicates",
        "max_iters",
        "activity_skew",
    },
}


@dataclass(frozen=True)
class RunConfig:
    """Validated subcommand invocation: name plus its option mapping."""

    subcommand: str
    options: dict

    def __post_init__(self):
        allowed = _SUBCOMMAND_KEYS.get(self.subcommand)
        if allowed is None:
            raise ConfigError(f"unknown subcommand {self.subcommand!r}")
        unknown = set(self.options) - allowed
        if unknown:
            raise ConfigError(f"unknown option(s) for {self.subcommand}: {sorted(unknown)}")
        opts = self.options
        if opts.get("train_fraction") is not None and not (0.0 < opts["train_fraction"] < 1.0):
            raise ConfigError("--train-fraction must lie in (0, 1)")
        for key in ("bins", "bootstrap", "max_iters", "replicates", "n", "k"):
            if opts.get(key) is not None and opts[key] < 1:
                raise ConfigError(f"--{key.replace('_', '-')} must be at least 1")
        if opts.get("threshold_c") is not None and opts["threshold_c"] <= 0:
            raise ConfigError("--threshold-c must be positive")
        if opts.get("q_factor") is not None and opts["q_factor"] <= 0:
            raise ConfigError("--q-factor must be positive")


def _parse_float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.split(","))
    except ValueError as exc:
        raise ConfigError(f"expected a comma-separated number list, got {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ahpi",
        description="Rank competing entities from asymmetric pairwise win/loss records.",
    )
    parser.add_argument("--version", action="version", version=f"ahpi {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("normalize", help="cluster raw name strings into canonical forms")
    p.add_argument("--input", required=True, help="count<TAB>string file")
    p.add_argument("--output", required=True, help="raw<TAB>canonical map to write")
    p.add_argument("--threshold-c", type=float, default=2.7, help="clustering threshold")
    p.add_argument("--parser-config", default=None, help="key=value table overrides")

    p = sub.add_parser("ingest", help="validate and expand an interaction file")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--canonical-map", default=None)
    p.add_argument("--strict", action="store_true")

    p = sub.add_parser("trim", help="extract the dense core meeting a Q-factor")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--q-factor", type=float, required=True)

    p = sub.add_parser("fit", help="fit scores, privileges, and valences")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True, help="model file to write")
    p.add_argument("--max-iters", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0, help="recorded in the manifest")

    p = sub.add_parser("predict", help="defendant win propensities for new cases")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--strict", action="store_true")

    p = sub.add_parser("evaluate", help="temporal-split calibration and accuracy report")
    p.add_argument("--input", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--model", default=None, help="skip fitting and evaluate this model")
    p.add_argument("--train-fraction", type=float, default=0.8)
    p.add_argument("--bins", type=int, default=6)
    p.add_argument("--bootstrap", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-iters", type=int, default=10000)

    p = sub.add_parser("compare-rankings", help="benchmark external rankings on test cases")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True, help="test interaction file")
    p.add_argument("--rankings", nargs="+", required=True, help="rank<TAB>firm files")
    p.add_argument("--canonical-map", default=None)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--bootstrap", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("synth", help="generate a synthetic dataset with known truth")
    p.add_argument("--output", required=True)
    p.add_argument("--truth-out", default=None, help="ground-truth sidecar JSON")
    p.add_argument("--n", type=int, required=True, help="number of interactions")
    p.add_argument("--k", type=int, required=True, help="number of entities")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--type-weights", default=None, help="comma-separated, sums to 1")
    p.add_argument("--eps", default=None, help="comma-separated per-type privileges")
    p.add_argument("--q", default=None, help="comma-separated per-type valences")
    p.add_argument("--type-names", default=None, help="comma-separated names")
    p.add_argument("--scores-file", default=None, help="one score per line, overrides sampling")
    p.add_argument(
        "--activity-skew",
        type=float,
        default=0.0,
        help="entity participation heavy-tail exponent (0 = uniform pairs)",
    )

    p = sub.add_parser("sweep-q", help="recovery accuracy across density targets")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--q-targets", default="10,20,30", help="comma-separated, ascending")
    p.add_argument("--replicates", type=int, default=1)
    p.add_argument("--max-iters", type=int, default=10000)
    p.add_argument(
        "--activity-skew",
        type=float,
        default=1.0,
        help="entity participation heavy-tail exponent; sweeps need skew > 0",
    )

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    options = {k: v for k, v in vars(args).items() if k != "subcommand"}
    try:
        config = RunConfig(subcommand=args.subcommand, options=options)
        return run_pipeline(config)
    except FileNotFoundError as exc:
        print(f"ahpi: error: {exc}", file=sys.stderr)
        return EXIT_MISSING_FILE
    except EmptyOutputError as exc:
        print(f"ahpi: error: {exc}", file=sys.stderr)
        return EXIT_EMPTY_OUTPUT
    except FileFormatError as exc:
        print(f"ahpi: error: {exc}", file=sys.stderr)
        return EXIT_BAD_FORMAT
    except InfeasibleTargetError as exc:
        print(f"ahpi: error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except NumericalFailureError as exc:
        print(f"ahpi: error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ConfigError, InvalidArgumentError) as exc:
        print(f"ahpi: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except AhpiError as exc:
        print(f"ahpi: error: {exc}", file=sys.stderr)
        return 1


def run_pipeline(config: RunConfig) -> int:
    handler = {
        "normalize": _cmd_normalize,
        "ingest": _cmd_ingest,
        "trim": _cmd_trim,
        "fit": _cmd_fit,
        "predict": _cmd_predict,
        "evaluate": _cmd_evaluate,
        "compare-rankings": _cmd_compare_rankings,
        "synth": _cmd_synth,
        "sweep-q": _cmd_sweep_q,
    }[config.subcommand]
    return handler(dict(config.options))


def _manifest_config(opts: dict) -> dict:
    return {k: v for k, v in opts.items() if not isinstance(v, (list, dict)) or v}


def _cmd_normalize(opts: dict) -> int:
    counts = read_name_counts(opts["input"])
    parse_config = (
        load_parse_config(opts["parser_config"])
        if opts.get("parser_config")
        else DEFAULT_PARSE_CONFIG
    )
    fixed = {raw: apply_replacements(raw, parse_config) for raw in counts}
    fixed_counts: dict[str, int] = {}
    for raw, n in counts.items():
        fixed_counts[fixed[raw]] = fixed_counts.get(fixed[raw], 0) + n
    assignment = agglomerate(fixed_counts, opts["threshold_c"])
    mapping = {raw: assignment.apply(fixed[raw]) for raw in counts}
    write_canonical_map(opts["output"], mapping)
    inputs = {"counts": opts["input"]}
    if opts.get("parser_config"):
        inputs["parser_config"] = opts["parser_config"]
    write_manifest(
        str(opts["output"]) + ".manifest.json",
        "normalize",
        _manifest_config(opts),
        inputs,
        [opts["output"]],
    )
    print(json.dumps({"strings": len(counts), "clusters": len(assignment.clusters)}))
    return EXIT_OK


def _cmd_ingest(opts: dict) -> int:
    canonical = read_canonical_map(opts["canonical_map"]) if opts.get("canonical_map") else None
    records, _entities, _types, diagnostics = ingest(
        opts["input"], canonical, strict=bool(opts.get("strict"))
    )
    rows, row_diags = read_interaction_rows(opts["input"])
    expanded, _ = expand_rows(rows, canonical)
    write_interaction_rows(opts["output"], expanded)
    for diag in diagnostics:
        print(f"ahpi: ingest: {diag}", file=sys.stderr)
    inputs = {"interactions": opts["input"]}
    if opts.get("canonical_map"):
        inputs["canonical_map"] = opts["canonical_map"]
    write_manifest(
        str(opts["output"]) + ".manifest.json",
        "ingest",
        _manifest_config(opts),
        inputs,
        [opts["output"]],
    )
    print(json.dumps({"rows_in": len(rows), "interactions_out": len(expanded), "skipped": len(diagnostics)}))
    return EXIT_OK


def _cmd_trim(opts: dict) -> int:
    rows, diagnostics = read_interaction_rows(opts["input"])
    expanded, more = expand_rows(rows)
    diagnostics.extend(more)
    if not expanded:
        raise EmptyOutputError("no valid interactions to trim", path=opts["input"])
    records, _entities, _types = rows_to_records(expanded)
    net = InteractionNetwork(records)
    trimmed, report = trim_to_q(net, opts["q_factor"])
    index_by_obj = {id(rec): i for i, rec in enumerate(records)}
    surviving_rows = [expanded[index_by_obj[id(rec)]] for rec in trimmed.interactions]
    write_interaction_rows(opts["output"], surviving_rows)
    write_manifest(
        str(opts["output"]) + ".manifest.json",
        "trim",
        _manifest_config(opts),
        {"interactions": opts["input"]},
        [opts["output"]],
    )
    print(json.dumps(report.to_json_dict()))
    return EXIT_OK


def _fit_records(path, max_iters: int):
    records, entities, types, diagnostics = ingest(path)
    for diag in diagnostics:
        print(f"ahpi: fit: {diag}", file=sys.stderr)
    params, trace = fit(records, FitConfig(max_iters=max_iters))
    return records, entities, types, params, trace


def _cmd_fit(opts: dict) -> int:
    _records, entities, types, params, trace = _fit_records(opts["input"], opts["max_iters"])
    if not trace.converged:
        print("ahpi: fit: warning: not converged within --max-iters", file=sys.stderr)
    save_model(opts["output"], params, entities, types)
    write_manifest(
        str(opts["output"]) + ".manifest.json",
        "fit",
        _manifest_config(opts),
        {"interactions": opts["input"]},
        [opts["output"]],
        seed=opts.get("seed"),
    )
    print(
        json.dumps(
            {
                "entities": len(entities),
                "types": len(types),
                "iterations": trace.iterations,
                "converged": trace.converged,
                "symmetry_flipped": trace.symmetry_flipped,
                "log_posterior": trace.log_posteriors[-1],
            }
        )
    )
    return EXIT_OK


def _records_into_model_space(
    records,
    entities: list[EntityId],
    types: list[InteractionType],
) -> tuple[list[InteractionRecord], int]:
    """Rebuild records against a fitted model's entity/type tables.

    Records naming unknown firms or types are excluded (counted), matching
    the protocol of scoring only cases with fitted parameters on both
    sides.
    """
    entity_by_label = {e.label: e for e in entities}
    type_by_name = {t.name: t for t in types}
    kept: list[InteractionRecord] = []
    excluded = 0
    for r in records:
        pla = entity_by_label.get(r.plaintiff.label)
        dfd = entity_by_label.get(r.defendant.label)
        typ = type_by_name.get(r.itype.name)
        if pla is None or dfd is None or typ is None:
            excluded += 1
            continue
        kept.append(
            InteractionRecord(
                plaintiff=pla, defendant=dfd, itype=typ, winner=r.winner, timestamp=r.timestamp
            )
        )
    return kept, excluded


def _cmd_predict(opts: dict) -> int:
    params, entities, types = load_model(opts["model"])
    rows, diagnostics = read_interaction_rows(opts["input"])
    expanded, more = expand_rows(rows)
    diagnostics.extend(more)
    entity_by_label = {e.label: e for e in entities}
    type_by_name = {t.name: t for t in types}
    lines = [
        "case_id,date,plaintiff_firm,defendant_firm,case_type,outcome,defendant_propensity,predicted_winner"
    ]
    scored = excluded = 0
    for row in expanded:
        pla = entity_by_label.get(row.plaintiff_firm)
        dfd = entity_by_label.get(row.defendant_firm)
        typ = type_by_name.get(row.case_type)
        if pla is None or dfd is None or typ is None:
            excluded += 1
            continue
        rec = InteractionRecord(
            plaintiff=pla, defendant=dfd, itype=typ, winner=Winner(row.outcome), timestamp=row.date
        )
        prop = predict_defendant_propensity(rec, params)
        lines.append(
            ",".join(
                (
                    _csv_field(row.case_id),
                    row.date.isoformat(),
                    _csv_field(row.plaintiff_firm),
                    _csv_field(row.defendant_firm),
                    _csv_field(row.case_type),
                    row.outcome,
                    f"{prop:.12g}",
                    "D" if prop >= 0.5 else "P",
                )
            )
        )
        scored += 1
    if opts.get("strict") and (diagnostics or excluded):
        raise FileFormatError(
            f"{len(diagnostics)} invalid row(s) and {excluded} unscorable row(s)",
            path=opts["input"],
        )
    if scored == 0:
        raise EmptyOutputError("no scorable rows", path=opts["input"])
    atomic_write_text(opts["output"], "\n".join(lines) + "\n")
    if excluded:
        print(f"ahpi: predict: excluded {excluded} row(s) without fitted parameters", file=sys.stderr)
    write_manifest(
        str(opts["output"]) + ".manifest.json",
        "predict",
        _manifest_config(opts),
        {"model": opts["model"], "interactions": opts["input"]},
        [opts["output"]],
    )
    print(json.dumps({"scored": scored, "excluded": excluded}))
    return EXIT_OK


def _csv_field(text: str) -> str:
    if any(ch in text for ch in ",\"\n"):
        return '"' + text.replace('"', '""') + '"'
    return text


def _cmd_evaluate(opts: dict) -> int:
    out_dir = Path(opts["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    records, _entities, _types, diagnostics = ingest(opts["input"])
    for diag in diagnostics:
        print(f"ahpi: evaluate: {diag}", file=sys.stderr)
    train, test = temporal_split(records, opts["train_fraction"])
    if not test:
        raise EmptyOutputError("temporal split left no test records", path=opts["input"])

    outputs = []
    if opts.get("model"):
        params, entities, types = load_model(opts["model"])
        fit_summary = None
    else:
        train_dense, entities, types = reindex_records(train)
        params, trace = fit(train_dense, FitConfig(max_iters=opts["max_iters"]))
        if not trace.converged:
            print("ahpi: evaluate: warning: fit not converged", file=sys.stderr)
        model_path = out_dir / "model.txt"
        save_model(model_path, params, entities, types)
        outputs.append(model_path)
        fit_summary = {
            "iterations": trace.iterations,
            "converged": trace.converged,
            "symmetry_flipped": trace.symmetry_flipped,
        }
    test_mapped, excluded = _records_into_model_space(test, entities, types)
    if not test_mapped:
        raise EmptyOutputError("no scorable test records", path=opts["input"])

    report = calibration_report(
        test_mapped,
        params,
        n_bins=opts["bins"],
        n_bootstrap=opts["bootstrap"],
        seed=opts["seed"],
        n_excluded=excluded,
    )
    accuracy, accuracy_sd = balanced_accuracy(
        test_mapped, params, n_bootstrap=opts["bootstrap"], seed=opts["seed"]
    )

    calibration_csv = out_dir / "calibration.csv"
    lines = ["bin,lower,upper,n_cases,mean_predicted,empirical_winrate,bootstrap_sd"]
    for i, b in enumerate(report.bins, start=1):
        lines.append(
            f"{i},{b.lower:.12g},{b.upper:.12g},{b.n_cases},"
            f"{b.mean_predicted:.12g},{b.empirical_defendant_winrate:.12g},{b.bootstrap_sd:.12g}"
        )
    atomic_write_text(calibration_csv, "\n".join(lines) + "\n")
    outputs.append(calibration_csv)

    from .plots import save_calibration_figure

    figure_path = out_dir / "calibration.png"
    save_calibration_figure(report, figure_path)
    outputs.append(figure_path)

    summary = {
        "n_train": len(train),
        "n_test": len(test),
        "n_test_scored": len(test_mapped),
        "n_test_excluded": excluded,
        "baseline_winrate": report.baseline_winrate,
        "balanced_accuracy": accuracy,
        "balanced_accuracy_sd": accuracy_sd,
        "fit": fit_summary,
    }
    summary_path = out_dir / "summary.json"
    atomic_write_text(summary_path, json.dumps(summary, indent=2) + "\n")
    outputs.append(summary_path)

    inputs = {"interactions": opts["input"]}
    if opts.get("model"):
        inputs["model"] = opts["model"]
    write_manifest(
        out_dir / "manifest.json",
        "evaluate",
        _manifest_config(opts),
        inputs,
        outputs,
        seed=opts.get("seed"),
    )
    print(json.dumps(summary))
    return EXIT_OK


def _cmd_compare_rankings(opts: dict) -> int:
    out_dir = Path(opts["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    params, entities, types = load_model(opts["model"])
    canonical = read_canonical_map(opts["canonical_map"]) if opts.get("canonical_map") else None
    records, _e, _t, diagnostics = ingest(opts["input"], canonical)
    for diag in diagnostics:
        print(f"ahpi: compare-rankings: {diag}", file=sys.stderr)
    test_mapped, excluded = _records_into_model_space(records, entities, types)
    if not test_mapped:
        raise EmptyOutputError("no scorable test records", path=opts["input"])

    order = np.argsort(-params.scores, kind="stable")
    model_order = [entities[i].label for i in order]
    label_by_lower = {e.label.lower(): e.label for e in entities}

    results = []
    accuracy, accuracy_sd = balanced_accuracy(
        test_mapped, params, n_bootstrap=opts["bootstrap"], seed=opts["seed"]
    )
    results.append(
        {
            "scoring": "fitted-scores",
            "n_ranked": len(entities),
            "overlap_with_model": len(entities),
            "kendall_tau_vs_model": 1.0,
            "n_scored_cases": len(test_mapped),
            "balanced_accuracy": accuracy,
            "balanced_accuracy_sd": accuracy_sd,
        }
    )
    for path in opts["rankings"]:
        ranking = load_ranking(path, canonical_map=canonical)
        remapped = tuple(
            (label_by_lower.get(label, label), rank) for label, rank in ranking.entries
        )
        ranking = ExternalRanking(name=ranking.name, entries=remapped)
        overlap = sum(1 for label, _ in ranking.entries if label in set(model_order))
        try:
            tau = kendall_tau(model_order, ranking.ordered_labels)
        except UndefinedResultError:
            tau = float("nan")
        try:
            acc, acc_sd = balanced_accuracy(
                test_mapped, ranking, n_bootstrap=opts["bootstrap"], seed=opts["seed"]
            )
        except InvalidArgumentError:
            acc, acc_sd = float("nan"), float("nan")
        results.append(
            {
                "scoring": ranking.name,
                "n_ranked": len(ranking.entries),
                "overlap_with_model": overlap,
                "kendall_tau_vs_model": tau,
                "n_scored_cases": None,
                "balanced_accuracy": acc,
                "balanced_accuracy_sd": acc_sd,
            }
        )

    csv_path = out_dir / "comparison.csv"
    lines = [
        "scoring,n_ranked,overlap_with_model,kendall_tau_vs_model,n_scored_cases,balanced_accuracy,balanced_accuracy_sd"
    ]
    for row in results:
        lines.append(
            ",".join(
                "" if row[key] is None else (f"{row[key]:.12g}" if isinstance(row[key], float) else _csv_field(str(row[key])))
                for key in (
                    "scoring",
                    "n_ranked",
                    "overlap_with_model",
                    "kendall_tau_vs_model",
                    "n_scored_cases",
                    "balanced_accuracy",
                    "balanced_accuracy_sd",
                )
            )
        )
    atomic_write_text(csv_path, "\n".join(lines) + "\n")

    from .plots import save_accuracy_figure

    figure_path = out_dir / "accuracy.png"
    save_accuracy_figure(
        [
            (row["scoring"], row["balanced_accuracy"], row["balanced_accuracy_sd"])
            for row in results
            if not np.isnan(row["balanced_accuracy"])
        ],
        figure_path,
    )
    summary_path = out_dir / "summary.json"
    atomic_write_text(summary_path, json.dumps(results, indent=2) + "\n")

    inputs = {"model": opts["model"], "interactions": opts["input"]}
    for i, path in enumerate(opts["rankings"]):
        inputs[f"ranking_{i}"] = path
    if opts.get("canonical_map"):
        inputs["canonical_map"] = opts["canonical_map"]
    write_manifest(
        out_dir / "manifest.json",
        "compare-rankings",
        {k: v for k, v in opts.items() if k != "rankings"},
        inputs,
        [csv_path, figure_path, summary_path],
        seed=opts.get("seed"),
    )
    print(json.dumps(results))
    return EXIT_OK


def _synth_config_from_opts(opts: dict) -> SynthConfig:
    from dataclasses import replace

    if opts.get("type_weights") or opts.get("eps") or opts.get("q"):
        for key in ("type_weights", "eps", "q"):
            if not opts.get(key):
                raise ConfigError("--type-weights, --eps, and --q must be given together")
        weights = _parse_float_list(opts["type_weights"])
        eps = _parse_float_list(opts["eps"])
        q = _parse_float_list(opts["q"])
        names = tuple(opts["type_names"].split(",")) if opts.get("type_names") else ()
        scores = None
        if opts.get("scores_file"):
            scores = np.loadtxt(opts["scores_file"], ndmin=1)
        config = SynthConfig(
            n_interactions=opts["n"],
            n_entities=opts["k"],
            type_weights=weights,
            true_eps=eps,
            true_q=q,
            rng_seed=opts["seed"],
            true_scores=scores,
            type_names=names,
        )
    else:
        config = litigation_config(opts["n"], opts["k"], opts["seed"])
        if opts.get("scores_file"):
            config = replace(config, true_scores=np.loadtxt(opts["scores_file"], ndmin=1))
    if opts.get("activity_skew"):
        config = replace(config, activity_exponent=opts["activity_skew"])
    return config


def _cmd_synth(opts: dict) -> int:
    config = _synth_config_from_opts(opts)
    data = generate_with_truth(config)
    rows = records_to_rows(data.records, [f"synth-{i:06d}" for i in range(len(data.records))])
    write_interaction_rows(opts["output"], rows)
    outputs = [opts["output"]]
    if opts.get("truth_out"):
        truth = {
            "seed": config.rng_seed,
            "type_names": [t.name for t in data.types],
            "type_weights": list(config.type_weights),
            "privileges": list(data.truth.privileges),
            "valences": list(data.truth.valences),
            "scores": {e.label: float(data.truth.scores[e.id]) for e in data.entities},
        }
        atomic_write_text(opts["truth_out"], json.dumps(truth, indent=2) + "\n")
        outputs.append(opts["truth_out"])
    inputs = {}
    if opts.get("scores_file"):
        inputs["scores"] = opts["scores_file"]
    write_manifest(
        str(opts["output"]) + ".manifest.json",
        "synth",
        _manifest_config(opts),
        inputs,
        outputs,
        seed=opts["seed"],
    )
    print(json.dumps({"interactions": len(data.records), "entities": len(data.entities)}))
    return EXIT_OK


def _cmd_sweep_q(opts: dict) -> int:
    out_dir = Path(opts["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    targets = sorted(_parse_float_list(opts["q_targets"]))
    config = litigation_config(opts["n"], opts["k"], opts["seed"])
    if opts.get("activity_skew"):
        from dataclasses import replace

        config = replace(config, activity_exponent=opts["activity_skew"])
    rows = q_sweep(
        config,
        targets,
        FitConfig(max_iters=opts["max_iters"]),
        replicates=opts["replicates"],
    )
    type_names = config.type_names
    header = ["q_target", "replicate", "feasible", "q_achieved", "n", "k", "kendall_tau"]
    header += [f"eps_err_{n.replace(' ', '_')}" for n in type_names]
    header += [f"q_err_{n.replace(' ', '_')}" for n in type_names]
    lines = [",".join(header)]
    for row in rows:
        cells = [f"{row.q_target:.12g}", str(row.replicate), str(int(row.feasible))]
        if row.feasible:
            cells += [
                f"{row.q_achieved:.12g}",
                str(row.n_interactions),
                str(row.k_entities),
                f"{row.kendall_tau:.12g}",
            ]
            cells += [f"{e:.12g}" for e in row.eps_errors]
            cells += [f"{e:.12g}" for e in row.q_errors]
        else:
            cells += [""] * (len(header) - 3)
        lines.append(",".join(cells))
    csv_path = out_dir / "sweep.csv"
    atomic_write_text(csv_path, "\n".join(lines) + "\n")

    from .plots import save_sweep_figure

    figure_path = out_dir / "sweep.png"
    save_sweep_figure(rows, figure_path)
    write_manifest(
        out_dir / "manifest.json",
        "sweep-q",
        _manifest_config(opts),
        {},
        [csv_path, figure_path],
        seed=opts["seed"],
    )
    print(json.dumps({"targets": targets, "rows": len(rows)}))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
