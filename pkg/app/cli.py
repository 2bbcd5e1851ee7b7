"""
Seirkit Command Line

    python -m app simulate --model doc.json --method sellke --replicas 10000 --seed 42
    python -m app analyze  --model doc.json --which r0,escape,final-size
    python -m app validate --model doc.json --suite wald --theta 1
    python -m app serve

Summaries go to standard output as JSON, logs to standard error. Every run
writes manifest.json next to its outputs, listing each output file with its
sha256.

Exit codes: 0 success, 1 a validation suite failed, 2 invalid document or
flags, 3 any other toolkit error.
"""
import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from pydantic import ValidationError

from . import commands
from .catalogue import model_catalogue
from .config import configure_logging, get_output_dir, get_settings
from .deterministic import epidemic_start, integrate
from .errors import SeirkitError
from .export import (
    file_digest, to_jsonable, write_json, write_outcomes_jsonl, write_path_csv, write_pmf_csv,
    write_trajectory_csv,
)
from .final_size import FinalSizePMF
from .models import AnalyzeRequest, ModelDocument, RunManifest
from .replicas import simulate_one

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_FAILED, EXIT_USAGE, EXIT_ERROR = 0, 1, 2, 3


class SeirkitParser(argparse.ArgumentParser):

    def __init__(self):
        super().__init__(prog="seirkit", description="Stochastic SEIR epidemic toolkit")
        self.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING or ERROR")
        sub = self.add_subparsers(dest="command", required=True, parser_class=argparse.ArgumentParser)

        simulate = sub.add_parser("simulate", help="run replicas and write outcomes.jsonl")
        self._document_flags(simulate)
        simulate.add_argument("--method", choices=["markov", "agent", "sellke"], default="sellke")
        simulate.add_argument("--replicas", type=int, default=100)
        simulate.add_argument("--seed", type=int, default=0)
        simulate.add_argument("--horizon", type=float, default=None, help="time horizon (markov only)")
        simulate.add_argument("--threads", type=int, default=None)
        simulate.add_argument("--trajectories", type=int, default=0,
                              help="also write trajectory CSVs for the first K replicas")

        analyze = sub.add_parser("analyze", help="evaluate analytic quantities")
        self._document_flags(analyze)
        analyze.add_argument("--which", default="r0",
                             help=f"comma-separated list from: {', '.join(commands.ANALYZERS)}")
        analyze.add_argument("--horizon", type=float, default=None,
                             help="also write the deterministic path to path.csv")
        analyze.add_argument("--step", type=float, default=None)
        analyze.add_argument("--init-fraction", type=float, default=None)

        validate = sub.add_parser("validate", help="run a validation suite")
        self._document_flags(validate)
        validate.add_argument("--suite", required=True,
                              choices=["wald", "sellke-vs-agent", "mc-vs-exact", "lln", "clt",
                                       "ou-variance", "ldp-slope", "duration"])
        validate.add_argument("--replicas", type=int, default=1000)
        validate.add_argument("--seed", type=int, default=0)
        validate.add_argument("--theta", type=float, default=1.0)
        validate.add_argument("--horizon", type=float, default=None)
        validate.add_argument("--init-fraction", type=float, default=None)
        validate.add_argument("--sampler", choices=["shortcut", "sellke", "agent"], default="shortcut",
                              help="final-size draws for wald and mc-vs-exact")
        validate.add_argument("--threads", type=int, default=None)

        sub.add_parser("serve", help="run the HTTP API")

    @staticmethod
    def _document_flags(parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--model", required=True, type=Path, help="JSON model document")
        parser.add_argument("--out", default=None, help="output directory (default: settings.output_dir)")


def load_document(path: Path) -> ModelDocument:
    return ModelDocument.model_validate_json(Path(path).read_text(encoding="utf-8"))


def _emit(payload) -> None:
    sys.stdout.write(json.dumps(to_jsonable(payload), sort_keys=True) + "\n")


def _finish(out: Path, command: str, doc: ModelDocument, outputs: List[Path], arguments: Dict,
            seed: Optional[int] = None, replicas: Optional[int] = None) -> RunManifest:
    manifest = RunManifest(
        command=command,
        input_digest=doc.digest(),
        master_seed=seed,
        replica_count=replicas,
        arguments=arguments,
        outputs={p.name: file_digest(p) for p in outputs},
        version=get_settings().app_version,
    )
    write_json(manifest.model_dump(), out / "manifest.json")
    return manifest


# =============================================================================
# Commands
# =============================================================================

def cmd_simulate(args, doc: ModelDocument, out: Path) -> int:
    job, outcomes, summary = commands.simulate(
        doc, args.method, args.replicas, args.seed, args.horizon, args.threads)
    outputs = [write_outcomes_jsonl(outcomes, out / "outcomes.jsonl", master_seed=args.seed)]
    for index in range(min(args.trajectories, args.replicas)):
        trajectory, _ = simulate_one(job, index, record=True)
        outputs.append(write_trajectory_csv(trajectory, out / f"trajectory_{index:05d}.csv"))
    _finish(out, "simulate", doc, outputs,
            {"method": args.method, "horizon": args.horizon, "trajectories": args.trajectories},
            seed=args.seed, replicas=args.replicas)
    _emit(summary.model_dump())
    return EXIT_OK


def cmd_analyze(args, doc: ModelDocument, out: Path) -> int:
    which = [w.strip() for w in args.which.split(",") if w.strip()]
    try:
        AnalyzeRequest(document=doc, which=which)
    except ValidationError as exc:
        raise _UsageError(f"--which: {exc.errors()[0]['msg']}") from exc
    report = commands.analyze(doc, which)
    outputs = [write_json(report, out / "report.json")]
    for key in ("exact_pmf", "chain_binomial"):
        if key in report:
            entry = report[key]
            pmf = FinalSizePMF(n=entry["n"], probs=tuple(entry["probs"]), precision=entry["precision"])
            outputs.append(write_pmf_csv(pmf, out / f"{key.replace('_', '-')}.csv"))
    if args.horizon is not None:
        model = model_catalogue(doc.model, doc.params)
        path = integrate(model, epidemic_start(model, args.init_fraction), args.horizon, args.step)
        outputs.append(write_path_csv(path, out / "path.csv"))
    _finish(out, "analyze", doc, outputs,
            {"which": which, "horizon": args.horizon, "step": args.step,
             "init_fraction": args.init_fraction})
    _emit(report)
    return EXIT_OK


def cmd_validate(args, doc: ModelDocument, out: Path) -> int:
    report = commands.validate(doc, args.suite, args.replicas, args.seed, theta=args.theta,
                               horizon=args.horizon, init_fraction=args.init_fraction,
                               parallelism=args.threads, sampler=args.sampler)
    outputs = [write_json(report.model_dump(), out / "report.json")]
    _finish(out, "validate", doc, outputs,
            {"suite": args.suite, "theta": args.theta, "horizon": args.horizon,
             "init_fraction": args.init_fraction, "sampler": args.sampler},
            seed=args.seed, replicas=args.replicas)
    _emit(report.model_dump())
    return EXIT_OK if report.passed else EXIT_FAILED


def cmd_serve(args) -> int:
    import uvicorn

    settings = get_settings()
    uvicorn.run("app.main:app", host=settings.host, port=settings.port, reload=settings.debug)
    return EXIT_OK


class _UsageError(Exception):
    pass


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = SeirkitParser().parse_args(argv)
    configure_logging(args.log_level)
    if args.command == "serve":
        return cmd_serve(args)

    try:
        doc = load_document(args.model)
    except OSError as exc:
        sys.stderr.write(f"seirkit: cannot read {args.model}: {exc}\n")
        return EXIT_USAGE
    except ValidationError as exc:
        sys.stderr.write(f"seirkit: invalid model document {args.model}:\n{exc}\n")
        return EXIT_USAGE

    handler = {"simulate": cmd_simulate, "analyze": cmd_analyze, "validate": cmd_validate}[args.command]
    try:
        return handler(args, doc, get_output_dir(args.out))
    except _UsageError as exc:
        sys.stderr.write(f"seirkit: {exc}\n")
        return EXIT_USAGE
    except SeirkitError as exc:
        logger.error("%s failed: %s", args.command, exc)
        sys.stderr.write(f"seirkit: {exc}\n")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
