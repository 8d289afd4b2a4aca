"""Command-line entry point: train, explain, ablate, benchmark, compare, plot.

Exit codes: 1 usage error, 2 data error, 3 training/explainer failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .datasets import DataError, augment_noisy, make_planted, prepare_data, resolve_table
from .encoding import FeatureMapSpec, QubitCapError
from .hqml import ModelType, array_fingerprint, load_model, save_model, score_accuracy, train_hqml
from .learners import AMPLITUDE_KINDS, LearnerKind

log = logging.getLogger("hqml_explain")

EXIT_USAGE, EXIT_DATA, EXIT_TRAIN = 1, 2, 3

DEFAULTS = {
    "data": "iris",
    "target": None,
    "model": None,
    "model_type": "amplitude",
    "noise": 2,
    "redundant": 2,
    "seed": 0,
    "seeds": None,
    "repeats": 5,
    "adaptive": False,
    "interaction_pi": False,
    "test_fraction": 0.3,
    "max_qubits": 16,
    "out": ".",
    "threads": 1,
    "datasets": "iris,wine",
    "models": None,
    "model_file": None,
    "no_chart": False,
    "external": None,
    "reports": None,
    "title": None,
}
# Keys that cannot change any result; left out of the provenance record.
# The model file is identified by its content hash instead of its path.
_NOT_RECORDED = {"out", "threads", "config", "command", "no_chart", "_explicit", "model_file"}


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _shared(p: argparse.ArgumentParser, *names):
    opts = {
        "data": lambda: p.add_argument("--data", default=None, help="bundled dataset name (iris, wine) or CSV path"),
        "target": lambda: p.add_argument("--target", default=None, help="target column name for CSV input"),
        "model": lambda: p.add_argument("--model", default=None, help="learner kind, e.g. DecisionTree or QDT"),
        "model_type": lambda: p.add_argument("--model-type", dest="model_type", default=None,
                                             choices=[m.value for m in ModelType]),
        "noise": lambda: p.add_argument("--noise", type=int, default=None, help="synthetic noise columns"),
        "redundant": lambda: p.add_argument("--redundant", type=int, default=None, help="synthetic redundant columns"),
        "seed": lambda: p.add_argument("--seed", type=int, default=None),
        "seeds": lambda: p.add_argument("--seeds", default=None, help="comma-separated seed list"),
        "repeats": lambda: p.add_argument("--repeats", type=int, default=None, help="permutation repeats K"),
        "adaptive": lambda: p.add_argument("--adaptive", action="store_true", default=None),
        "interaction_pi": lambda: p.add_argument("--interaction-pi", dest="interaction_pi",
                                                 action="store_true", default=None),
        "test_fraction": lambda: p.add_argument("--test-fraction", dest="test_fraction", type=float, default=None),
        "max_qubits": lambda: p.add_argument("--max-qubits", dest="max_qubits", type=int, default=None),
        "out": lambda: p.add_argument("--out", default=None, help="output directory"),
        "threads": lambda: p.add_argument("--threads", type=int, default=None),
        "datasets": lambda: p.add_argument("--datasets", default=None, help="comma-separated dataset names/paths"),
        "models": lambda: p.add_argument("--models", default=None, help="comma-separated learner kinds"),
        "model_file": lambda: p.add_argument("--model-file", dest="model_file", default=None),
        "no_chart": lambda: p.add_argument("--no-chart", dest="no_chart", action="store_true", default=None),
        "external": lambda: p.add_argument("--external", default=None,
                                           help="JSON file of externally computed scores"),
    }
    p.add_argument("--config", default=None, help="JSON file of option values; flags override it")
    for n in names:
        opts[n]()


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hqml-explain", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("train", help="train a hybrid model and report test accuracy")
    _shared(p, "data", "target", "model", "model_type", "noise", "redundant", "seed",
            "test_fraction", "max_qubits", "out", "threads")
    p = sub.add_parser("explain", help="explain a trained model on its training split")
    _shared(p, "model_file", "data", "target", "noise", "redundant", "seed", "test_fraction",
            "repeats", "adaptive", "interaction_pi", "out", "threads", "no_chart")
    p = sub.add_parser("ablate", help="explainer configuration ablation grid")
    _shared(p, "datasets", "target", "noise", "redundant", "seed", "seeds", "repeats",
            "test_fraction", "out", "threads", "no_chart")
    p = sub.add_parser("benchmark", help="classical vs amplitude-encoded learners")
    _shared(p, "datasets", "target", "models", "noise", "redundant", "seed", "seeds",
            "test_fraction", "max_qubits", "out", "threads", "no_chart")
    p = sub.add_parser("compare", help="compare explainers against tree importances")
    _shared(p, "data", "target", "noise", "redundant", "seed", "seeds", "repeats",
            "test_fraction", "external", "out", "threads")
    p = sub.add_parser("plot", help="render report JSON files as charts")
    p.add_argument("reports", nargs="+", help="report JSON files")
    p.add_argument("--title", default=None)
    _shared(p, "out")
    return parser


def resolve_config(args: argparse.Namespace) -> dict:
    cfg = dict(DEFAULTS)
    if getattr(args, "config", None):
        try:
            file_cfg = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise CliError(EXIT_USAGE, f"cannot read config file {args.config}: {exc}")
        unknown = set(file_cfg) - set(DEFAULTS)
        if unknown:
            raise CliError(EXIT_USAGE, f"unknown config keys: {sorted(unknown)}")
        cfg.update(file_cfg)
    explicit = set(cfg) - set(DEFAULTS) | {k for k in DEFAULTS if cfg[k] != DEFAULTS[k]}
    for k, v in vars(args).items():
        if v is not None and k in DEFAULTS:
            cfg[k] = v
            explicit.add(k)
    cfg["_explicit"] = explicit
    cfg["command"] = args.command
    if cfg["threads"] < 1:
        raise CliError(EXIT_USAGE, "--threads must be >= 1")
    return cfg


def recorded(cfg: dict) -> dict:
    return {k: v for k, v in cfg.items() if k not in _NOT_RECORDED}


def _seed_list(cfg) -> list[int]:
    if cfg["seeds"] is None:
        return [int(cfg["seed"])]
    raw = cfg["seeds"]
    if isinstance(raw, list):
        return [int(s) for s in raw]
    try:
        return [int(s) for s in str(raw).split(",") if s.strip()]
    except ValueError:
        raise CliError(EXIT_USAGE, f"invalid seed list {raw!r}")


def _kind(name: str) -> LearnerKind:
    try:
        return LearnerKind.parse(name)
    except ValueError as exc:
        raise CliError(EXIT_USAGE, str(exc))


def _write_json(path: Path, payload: dict):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=1) + "\n")


def _load_table(spec: str, target):
    if spec.startswith("planted"):
        # planted[:seed]: synthetic 3 informative + 5 noise threshold task
        seed = int(spec.split(":", 1)[1]) if ":" in spec else 0
        return make_planted(200, 3, 5, "threshold", seed)
    return resolve_table(spec, target)


def _prepared(cfg, seed=None):
    seed = int(cfg["seed"] if seed is None else seed)
    table = _load_table(cfg["data"], cfg["target"])
    table = augment_noisy(table, int(cfg["noise"]), int(cfg["redundant"]), seed)
    return prepare_data(table, float(cfg["test_fraction"]), seed)


def cmd_train(cfg) -> int:
    model_type = ModelType(cfg["model_type"])
    default_kind = "KNNPrecomputed" if model_type is ModelType.KERNEL else "DecisionTree"
    kind = _kind(cfg["model"] or default_kind)
    if model_type is ModelType.AMPLITUDE and kind not in AMPLITUDE_KINDS:
        raise CliError(EXIT_USAGE, f"{kind.value} cannot be used with amplitude models; "
                       f"valid kinds: {', '.join(k.value for k in AMPLITUDE_KINDS)}")
    if model_type is ModelType.KERNEL and kind is not LearnerKind.KNN_PRECOMPUTED:
        raise CliError(EXIT_USAGE, "kernel models use KNNPrecomputed")
    cfg["model"] = kind.value
    try:
        d = _prepared(cfg)
        fmap = FeatureMapSpec(n_qubits=d.n_features, max_amplitude_qubits=int(cfg["max_qubits"]))
        if model_type is ModelType.AMPLITUDE:
            fmap.check_amplitude_cap()
    except (DataError, QubitCapError) as exc:
        raise CliError(EXIT_DATA, str(exc))
    try:
        model = train_hqml(d.X_train, d.y_train, kind, model_type, fmap, seed=int(cfg["seed"]),
                           feature_labels=d.feature_labels)
        acc = score_accuracy(model, d.X_test, d.y_test)
    except Exception as exc:  # noqa: BLE001
        raise CliError(EXIT_TRAIN, f"training failed: {exc}")
    model.metadata = {
        "tool_version": __version__,
        "resolved_config": recorded(cfg),
        "seed": int(cfg["seed"]),
        "train_fingerprint": array_fingerprint(d.X_train),
        "class_labels": [str(c) for c in d.class_labels],
        "provenance": d.provenance,
        "test_accuracy": acc,
    }
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    save_model(model, out / "model.json")
    print(f"Accuracy for {kind.value}: {acc:.4f}")
    print(f"model written to {out / 'model.json'}")
    return 0


def cmd_explain(cfg) -> int:
    from .qmedley import ExplainerConfig, explain
    from .viz import ChartSpec, render_bar_chart, render_text_chart

    model_path = Path(cfg["model_file"] or Path(cfg["out"]) / "model.json")
    if not model_path.is_file():
        raise CliError(EXIT_DATA, f"model file not found: {model_path}")
    try:
        model = load_model(model_path)
    except (ValueError, KeyError, json.JSONDecodeError) as exc:
        raise CliError(EXIT_DATA, f"cannot load model {model_path}: {exc}")
    train_cfg = model.metadata.get("resolved_config", {})
    # Data preparation follows the training run unless overridden on the command line.
    for k in ("data", "target", "noise", "redundant", "test_fraction"):
        if k not in cfg["_explicit"] and k in train_cfg:
            cfg[k] = train_cfg[k]
    data_seed = model.metadata.get("seed", cfg["seed"])
    if "seed" not in cfg["_explicit"]:
        cfg["seed"] = data_seed
    cfg["data_seed"] = data_seed
    try:
        d = _prepared(cfg, data_seed)
    except DataError as exc:
        raise CliError(EXIT_DATA, str(exc))
    expected = model.metadata.get("train_fingerprint")
    if expected and expected != array_fingerprint(d.X_train):
        raise CliError(EXIT_DATA, "reference data does not match the model's training split")
    ecfg = ExplainerConfig(repeats_K=int(cfg["repeats"]), seed=int(cfg["seed"]),
                           adaptive_weighting=bool(cfg["adaptive"]),
                           interaction_pi=bool(cfg["interaction_pi"]), threads=int(cfg["threads"]))
    try:
        report = explain(model, d.X_train, d.y_train, ecfg)
    except Exception as exc:  # noqa: BLE001
        raise CliError(EXIT_TRAIN, f"explainer failed: {exc}")
    cfg["model_sha256"] = hashlib.sha256(model_path.read_bytes()).hexdigest()
    report.extra = {"tool_version": __version__, "resolved_config": recorded(cfg),
                    "seed": int(cfg["seed"])}
    out = Path(cfg["out"])
    _write_json(out / "report.json", report.to_dict())
    text = render_text_chart(report)
    print(f"Baseline accuracy on reference data: {report.baseline_accuracy:.4f}")
    print(text, end="")
    if not cfg["no_chart"]:
        from .figures import importance_figure

        title = f"{model.descriptor} Scores"
        (out / "chart.svg").write_text(render_bar_chart(report, ChartSpec(title=title)))
        (out / "chart.txt").write_text(text)
        importance_figure([report], out / "chart.png", title=title)
    return 0


def _tables(cfg) -> dict:
    names = cfg["datasets"] if isinstance(cfg["datasets"], list) else \
        [s.strip() for s in str(cfg["datasets"]).split(",") if s.strip()]
    if not names:
        raise CliError(EXIT_USAGE, "no datasets given")
    tables = {}
    for name in names:
        try:
            tables[Path(name).stem if name.endswith(".csv") else name] = _load_table(name, cfg["target"])
        except DataError as exc:
            raise CliError(EXIT_DATA, str(exc))
    return tables


def _emit(result, cfg, stem: str, figure=None) -> int:
    from .evaluation import format_table

    result.config = {**recorded(cfg), **result.config}
    out = Path(cfg["out"])
    payload = result.to_dict()
    payload["seed"] = int(cfg["seed"])
    _write_json(out / f"{stem}.json", payload)
    (out / f"{stem}.csv").write_text(result.to_csv())
    if figure is not None and not cfg.get("no_chart"):
        figure(result, out / f"{stem}.png")
    print(format_table(result))
    print(f"[{result.runtime_s:.1f}s] wrote {out / (stem + '.json')} and {out / (stem + '.csv')}")
    n_fail = len(result.failed)
    if n_fail:
        print(f"{n_fail} of {len(result.records)} cells recorded failures", file=sys.stderr)
    return EXIT_TRAIN if n_fail and n_fail == len(result.records) else 0


def cmd_ablate(cfg) -> int:
    from .evaluation import run_ablation
    from .figures import ablation_figure

    result = run_ablation(_tables(cfg), _seed_list(cfg), n_noise=int(cfg["noise"]),
                          n_redundant=int(cfg["redundant"]), repeats=int(cfg["repeats"]),
                          test_fraction=float(cfg["test_fraction"]), threads=int(cfg["threads"]))
    return _emit(result, cfg, "ablation", ablation_figure)


def cmd_benchmark(cfg) -> int:
    from .evaluation import run_benchmark
    from .figures import benchmark_figure

    if cfg["models"]:
        raw = cfg["models"] if isinstance(cfg["models"], list) else str(cfg["models"]).split(",")
        kinds = [_kind(m) for m in raw if m.strip()]
    else:
        kinds = list(AMPLITUDE_KINDS)
    result = run_benchmark(_tables(cfg), kinds, _seed_list(cfg), n_noise=int(cfg["noise"]),
                           n_redundant=int(cfg["redundant"]), test_fraction=float(cfg["test_fraction"]),
                           max_qubits=int(cfg["max_qubits"]))
    return _emit(result, cfg, "benchmark", benchmark_figure)


def cmd_compare(cfg) -> int:
    from .evaluation import load_external_scores, run_explainer_comparison

    external = None
    if cfg["external"]:
        path = cfg["external"]
        if not Path(path).is_file():
            raise CliError(EXIT_DATA, f"external scores file not found: {path}")
        external = {"external": lambda model, seed, labels: load_external_scores(path, labels)}
    try:
        table = _load_table(cfg["data"], cfg["target"])
    except DataError as exc:
        raise CliError(EXIT_DATA, str(exc))
    try:
        result = run_explainer_comparison(
            table, _seed_list(cfg), n_noise=int(cfg["noise"]), n_redundant=int(cfg["redundant"]),
            repeats=int(cfg["repeats"]), test_fraction=float(cfg["test_fraction"]),
            external=external, dataset_name=str(cfg["data"]))
    except ValueError as exc:
        raise CliError(EXIT_DATA, str(exc))
    return _emit(result, cfg, "comparison")


def cmd_plot(cfg, report_paths) -> int:
    from .figures import importance_figure
    from .qmedley import ImportanceReport
    from .viz import ChartSpec, render_bar_chart, render_multipanel, render_text_chart

    reports = []
    for p in report_paths:
        try:
            reports.append(ImportanceReport.from_dict(json.loads(Path(p).read_text())))
        except (OSError, KeyError, json.JSONDecodeError) as exc:
            raise CliError(EXIT_DATA, f"cannot read report {p}: {exc}")
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    title = cfg.get("title") or ""
    if len(reports) == 1:
        svg = render_bar_chart(reports[0], ChartSpec(title=title))
    else:
        svg = render_multipanel(reports, ChartSpec(title=title))
    (out / "chart.svg").write_text(svg)
    text = "\n".join(f"{r.model_descriptor}\n{render_text_chart(r)}" for r in reports)
    (out / "chart.txt").write_text(text)
    importance_figure(reports, out / "chart.png", title=title or None)
    print(text, end="")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve_config(args)
        if args.command == "plot":
            cfg["title"] = args.title
            code = cmd_plot(cfg, args.reports)
        else:
            handler = {"train": cmd_train, "explain": cmd_explain, "ablate": cmd_ablate,
                       "benchmark": cmd_benchmark, "compare": cmd_compare}[args.command]
            code = handler(cfg)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return code


if __name__ == "__main__":
    sys.exit(main())
