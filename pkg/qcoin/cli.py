"""
Command-line front end: ``qcoin toss | cheat | analyze | verify``.

Primary output goes to stdout and is a pure function of the resolved
configuration, so repeating a command with the same seed reproduces it byte
for byte. Logs go to stderr.

Exit codes: 0 success, 2 invalid configuration, 3 verification failure.
"""

import logging
import os
from typing import Optional

import typer
from pydantic import ValidationError

from runlog import RunLogAPI

from . import setup_logging
from .adversary import Strategy, StrategyKind, run_experiment
from .bell_core import PauliLabel, swap_residual
from .config import DEFAULT_CONFIG_PATH, SEED_ENV_VAR, Config, RunConfig
from .errors import ConfigError, StrategyMismatchError
from .protocol import NoiseModel, SessionConfig, run_honest
from .reporting import analysis_rows, render_checks, render_experiment, render_rows, render_toss
from .utils import session_rng
from .verification import faulty_residual, run_verification

logger = logging.getLogger(__name__)

EXIT_INVALID_CONFIG = 2
EXIT_VERIFICATION_FAILED = 3

app = typer.Typer(
    help="Coin tossing by entanglement swapping: honest runs, attacks, analysis.",
    no_args_is_help=True,
    add_completion=False,
)


def _fail(message: str) -> None:
    typer.echo(f"error: {message}", err=True)
    raise typer.Exit(code=EXIT_INVALID_CONFIG)


def _emit(text: str, out: Optional[str]) -> None:
    typer.echo(text, nl=False)
    if out:
        directory = os.path.dirname(out)
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(out, "w") as f:
            f.write(text)


def _base_config(ctx: typer.Context) -> Config:
    return ctx.obj if isinstance(ctx.obj, Config) else Config()


def _resolve(ctx: typer.Context, command: str, **overrides) -> RunConfig:
    try:
        return RunConfig.build(command, _base_config(ctx), **overrides)
    except ValidationError as e:
        _fail(f"invalid {command} configuration: {e.errors()[0]['msg']} ({e.errors()[0]['loc']})")


def _open_runlog(db: Optional[str], base: Config):
    path = db or base.db_path
    if not path:
        return None
    return RunLogAPI(db_path=path)


@app.callback()
def main_callback(
    ctx: typer.Context,
    config: Optional[str] = typer.Option(
        None, "--config", help=f"YAML defaults (default: {DEFAULT_CONFIG_PATH} if present)"
    ),
    log_level: Optional[str] = typer.Option(None, "--log-level", help="DEBUG, INFO, WARNING, ERROR"),
):
    """Load defaults and configure logging before any command runs."""
    if config is not None and not os.path.exists(config):
        _fail(f"config file not found: {config}")
    try:
        base = Config.from_yaml(config or DEFAULT_CONFIG_PATH)
        setup_logging(log_level or base.log_level, base.log_dir)
    except (ConfigError, TypeError, ValueError) as e:
        _fail(str(e))
    ctx.obj = base


@app.command()
def toss(
    ctx: typer.Context,
    n_pairs: Optional[int] = typer.Option(None, "--n-pairs", help="Pairs per party"),
    seed: Optional[int] = typer.Option(None, "--seed", envvar=SEED_ENV_VAR, help="Master seed"),
    gamma: Optional[float] = typer.Option(None, "--gamma", help="Per-measurement success probability"),
    fmt: Optional[str] = typer.Option(None, "--format", help="text, json or csv"),
    out: Optional[str] = typer.Option(None, "--out", help="Write the transcript as JSON lines"),
    db: Optional[str] = typer.Option(None, "--db", help="Record the session in this SQLite file"),
):
    """Run one honest session and print the coin and verdict."""
    cfg = _resolve(ctx, "toss", n_pairs=n_pairs, seed=seed, gamma=gamma, format=fmt, out=out)
    noise = NoiseModel(gamma=cfg.gamma) if cfg.gamma is not None else None
    session = SessionConfig(n_pairs=cfg.n_pairs, seed=cfg.seed, noise=noise)
    transcript = run_honest(session, session_rng(cfg.seed))

    typer.echo(render_toss(transcript, cfg.format), nl=False)
    if cfg.out:
        transcript.write_jsonl(cfg.out)
        logger.info(f"Transcript written to {cfg.out}")

    runlog = _open_runlog(db, _base_config(ctx))
    if runlog is not None:
        runlog.record_session(
            {
                "n_pairs": cfg.n_pairs,
                "seed": cfg.seed,
                "gamma": cfg.gamma,
                "strategy": "honest",
                "verdict": transcript.verdict.value,
                "coin": transcript.coin,
                "alice_coin": transcript.alice_coin,
                "bob_coin": transcript.bob_coin,
            },
            transcript.to_records(),
        )


def _strategy(kind: str, flip: Optional[str], desired: Optional[int]) -> Strategy:
    try:
        strategy_kind = StrategyKind(kind)
    except ValueError:
        raise StrategyMismatchError(f"Unknown strategy {kind!r}; use reflect or fake-seq") from None
    if strategy_kind is StrategyKind.REFLECT:
        if desired is not None:
            raise StrategyMismatchError("The reflection attack's coin is chosen with --flip, not --desired")
        return Strategy.reflect(PauliLabel.from_name(flip or "I"))
    if strategy_kind is StrategyKind.FAKE_SEQUENCE:
        if flip is not None:
            raise StrategyMismatchError("--flip only applies to Bob's reflection attack")
        return Strategy.fake_sequence(1 if desired is None else desired)
    raise StrategyMismatchError("cheat needs a cheating strategy, not honest")


@app.command()
def cheat(
    ctx: typer.Context,
    strategy: str = typer.Option(..., "--strategy", help="reflect (Bob) or fake-seq (Alice)"),
    n_pairs: Optional[int] = typer.Option(None, "--n-pairs", help="Pairs per party"),
    trials: Optional[int] = typer.Option(None, "--trials", help="Monte Carlo trials"),
    seed: Optional[int] = typer.Option(None, "--seed", envvar=SEED_ENV_VAR, help="Master seed"),
    flip: Optional[str] = typer.Option(None, "--flip", help="Pauli Bob applies: I, X, Y or Z"),
    desired: Optional[int] = typer.Option(None, "--desired", help="Coin Alice wants (fake-seq)"),
    gamma: Optional[float] = typer.Option(None, "--gamma", help="Per-measurement success probability"),
    fmt: Optional[str] = typer.Option(None, "--format", help="text, json or csv"),
    out: Optional[str] = typer.Option(None, "--out", help="Also write the report here"),
    workers: Optional[int] = typer.Option(None, "--workers", help="Process-pool workers"),
    db: Optional[str] = typer.Option(None, "--db", help="Record the report in this SQLite file"),
):
    """Run many trials of an attack and compare against the analytical models."""
    try:
        chosen = _strategy(strategy, flip, desired)
    except (StrategyMismatchError, ValueError) as e:
        _fail(str(e))
    cfg = _resolve(
        ctx,
        "cheat",
        strategy=chosen.descriptor,
        n_pairs=n_pairs,
        trials=trials,
        seed=seed,
        gamma=gamma,
        format=fmt,
        out=out,
        workers=workers,
    )
    report = run_experiment(chosen, cfg.n_pairs, cfg.trials, cfg.seed, cfg.gamma, cfg.workers)
    _emit(render_experiment(report, cfg.format), cfg.out)

    runlog = _open_runlog(db, _base_config(ctx))
    if runlog is not None:
        runlog.record_experiment(report.model_dump())


@app.command()
def analyze(
    ctx: typer.Context,
    n_pairs: Optional[int] = typer.Option(None, "--n-pairs", help="Tabulate N = 1..n-pairs"),
    p_threshold: Optional[float] = typer.Option(None, "--p-threshold", help="Target P for min_gamma"),
    fmt: Optional[str] = typer.Option(None, "--format", help="text, json or csv"),
    out: Optional[str] = typer.Option(None, "--out", help="Also write the table here"),
):
    """Tabulate pass probabilities under every model, with min_gamma."""
    cfg = _resolve(ctx, "analyze", n_pairs=n_pairs, p_threshold=p_threshold, format=fmt, out=out)
    rows = analysis_rows(cfg.n_pairs, cfg.p_threshold)
    _emit(render_rows(rows, cfg.format), cfg.out)


@app.command()
def verify(
    ctx: typer.Context,
    seed: Optional[int] = typer.Option(None, "--seed", envvar=SEED_ENV_VAR, help="Master seed"),
    trials: Optional[int] = typer.Option(None, "--trials", help="Samples per sampled check"),
    fmt: Optional[str] = typer.Option(None, "--format", help="text, json or csv"),
    out: Optional[str] = typer.Option(None, "--out", help="Also write the results here"),
    inject_fault: bool = typer.Option(False, "--inject-fault", hidden=True),
):
    """Check the symbolic engine against the state-vector simulator."""
    base = _base_config(ctx)
    cfg = _resolve(
        ctx,
        "verify",
        n_pairs=4,
        seed=seed,
        trials=trials if trials is not None else base.sampling_trials,
        format=fmt,
        out=out,
    )
    rule = faulty_residual if inject_fault else swap_residual
    results = run_verification(cfg.seed, base.lemma_sequences, cfg.trials, base.tv_tolerance, rule)
    _emit(render_checks(results, cfg.format), cfg.out)
    if not all(r.passed for r in results):
        raise typer.Exit(code=EXIT_VERIFICATION_FAILED)


def main() -> None:
    app()


if __name__ == "__main__":
    main()
