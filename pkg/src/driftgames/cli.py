"""Command-line entry point: simulate, bounds, sweep, oracle, check.

Exit status: 0 ok, 1 failed verdict or check, 2 invalid configuration,
3 adversary abort.
"""

from __future__ import annotations

import argparse
import sys
import warnings
from pathlib import Path

from .bounds import theorem_bounds
from .config import ConfigError, GameConfig, Side
from .engine import AdversaryAbort
from .harness import SIMULATE_COLUMNS, N_CAP, N_RULES, SweepSpec, fmt, simulate, sweep, to_csv
from .oracle import OracleConfig, dpp_minimax
from .strategies import ADVERSARIES, PLAYERS

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_ABORT = 0, 1, 2, 3

BOUNDS_COLUMNS = (
    "variant", "side", "gamma", "T", "theta", "a", "b", "mainTerm",
    "leadingLimit", "errorExponent", "beta", "tau", "nRequirement",
)

# defaults applied after the config file and flags are merged
DEFAULTS = {
    "variant": "v3", "T": "64", "N": None, "gamma": "0", "theta": "0.6", "seed": "0",
    "player": "potential", "adversary": "combinatorial", "out": None, "reps": "1",
    "jobs": "1", "nrule": None, "ncap": str(N_CAP), "resolution": "16", "delta": "0",
    "R": "0", "retries": "64",
}


def read_config_file(path: str) -> dict[str, str]:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in DEFAULTS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        values[key] = value
    return values


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value file; flags override its values")
    common.add_argument("--variant", choices=("v1", "v2", "v3", "v4"))
    common.add_argument("--T", dest="T", help="horizon (comma-separated list for sweep)")
    common.add_argument("--N", dest="N", help="chip count (sweep: fixes the explicit N rule)")
    common.add_argument("--gamma", help="gamma (comma-separated list for sweep)")
    common.add_argument("--theta")
    common.add_argument("--seed")
    common.add_argument("--player", choices=PLAYERS)
    common.add_argument("--adversary", choices=ADVERSARIES)
    common.add_argument("--out", help="CSV output path (default stdout)")
    common.add_argument("--reps")
    common.add_argument("--jobs")
    common.add_argument("--nrule", choices=N_RULES, help="sweep chip-count rule")
    common.add_argument("--ncap", help="cap for the theorem N rule")
    common.add_argument("--resolution", help="oracle simplex grid resolution")
    common.add_argument("--delta", help="oracle drift (V1)")
    common.add_argument("--R", dest="R", help="oracle loss threshold (V3)")
    common.add_argument("--retries", help="adversary retry budget")

    parser = argparse.ArgumentParser(prog="driftgames", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("simulate", parents=[common], help="play one game, emit one CSV row")
    sub.add_parser("bounds", parents=[common], help="print both theorem bounds")
    sub.add_parser("sweep", parents=[common], help="T-sweep with convergence verdict")
    sub.add_parser("oracle", parents=[common], help="certified minimax interval for tiny games")
    sub.add_parser("check", parents=[common], help="run the built-in invariant checks")
    return parser


def _merged(args: argparse.Namespace) -> dict[str, str | None]:
    values = dict(DEFAULTS)
    if args.config:
        values.update(read_config_file(args.config))
    for key in DEFAULTS:
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag
    return values


def _num(values, key, kind):
    raw = values[key]
    try:
        return kind(raw)
    except (TypeError, ValueError):
        raise ConfigError(f"invalid {key}: {raw!r}") from None


def _list(values, key, kind) -> list:
    raw = values[key] or ""
    try:
        return [kind(x) for x in raw.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"invalid {key} list: {raw!r}") from None


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _game_config(values) -> GameConfig:
    if values["N"] is None:
        raise ConfigError("simulate needs --N")
    return GameConfig(
        values["variant"], _num(values, "T", int), _num(values, "N", int),
        _num(values, "gamma", float), _num(values, "theta", float), _num(values, "seed", int),
        _num(values, "retries", int),
    )


def cmd_simulate(values) -> int:
    config = _game_config(values)
    row, _ = simulate(config, values["player"], values["adversary"])
    _emit(to_csv([row], SIMULATE_COLUMNS), values["out"])
    return EXIT_OK


def cmd_bounds(values) -> int:
    rows = []
    T, gamma, theta = _num(values, "T", int), _num(values, "gamma", float), _num(values, "theta", float)
    for side in Side:
        r = theorem_bounds(values["variant"], side, gamma, T, theta)
        rows.append({
            "variant": r.variant, "side": side.value, "gamma": r.gamma, "T": r.T, "theta": r.theta,
            "a": r.a, "b": r.b, "mainTerm": r.main_term, "leadingLimit": r.leading_limit,
            "errorExponent": r.error_exponent, "beta": r.beta, "tau": r.tau,
            "nRequirement": "" if r.n_requirement is None else r.n_requirement,
        })
    _emit(to_csv(rows, BOUNDS_COLUMNS), values["out"])
    return EXIT_OK


def cmd_sweep(values) -> int:
    rule = values["nrule"] or ("explicit" if values["N"] is not None else "theorem")
    spec = SweepSpec(
        variant=values["variant"],
        gammas=tuple(_list(values, "gamma", float)),
        Ts=tuple(_list(values, "T", int)),
        theta=_num(values, "theta", float),
        reps=_num(values, "reps", int),
        n_rule=rule,
        N=_num(values, "N", int) if values["N"] is not None else None,
        n_cap=_num(values, "ncap", int),
        seed=_num(values, "seed", int),
        player=values["player"],
        adversary=values["adversary"],
        retry_budget=_num(values, "retries", int),
    )
    jobs = _num(values, "jobs", int)
    if jobs < 1:
        raise ConfigError("jobs must be >= 1")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        result = sweep(spec, jobs=jobs)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    _emit(result.csv(), values["out"])
    print(result.summary(), file=sys.stderr)
    return EXIT_OK if result.passed else EXIT_FAIL


def cmd_oracle(values) -> int:
    cfg = OracleConfig(
        variant=values["variant"], T=_num(values, "T", int), N=_num(values, "N", int) if values["N"] else 1,
        resolution=_num(values, "resolution", int), delta=_num(values, "delta", float),
        R=_num(values, "R", float),
    )
    r = dpp_minimax(cfg)
    _emit(f"lower={fmt(r.lower)} upper={fmt(r.upper)} width={fmt(r.width)} "
          f"resolution={r.resolution} states={r.states}\n", values["out"])
    return EXIT_OK


def cmd_check(values) -> int:
    from .checks import run_checks

    results = run_checks()
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
    return EXIT_OK if all(ok for _, ok, _ in results) else EXIT_FAIL


COMMANDS = {
    "simulate": cmd_simulate, "bounds": cmd_bounds, "sweep": cmd_sweep,
    "oracle": cmd_oracle, "check": cmd_check,
}


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    try:
        return COMMANDS[args.command](_merged(args))
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except AdversaryAbort as exc:
        print(f"adversary abort: {exc}", file=sys.stderr)
        return EXIT_ABORT


if __name__ == "__main__":
    sys.exit(main())
