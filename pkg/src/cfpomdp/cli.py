"""Command-line interface.

Verdict commands exit 0 for equivalent, 1 for not equivalent, and 2 on
usage or input errors.  All output is deterministic given the inputs (and
the seed, for `simulate`).
"""

from __future__ import annotations

import functools
import sys
from pathlib import Path

import click

from .core import (
    DeterministicPolicy,
    History,
    Pomdp,
    StochasticPolicy,
    validate as validate_pomdp,
)
from .determinize import determinize as determinize_env
from .determinize import minimize as minimize_env
from .envfile import load_env, save_env
from .envpolicy import count_env_policies, enumerate_support
from .equivalence import (
    CollectionQuery,
    CollectionWitness,
    ConditionalWitness,
    check_cf_equiv,
    check_equiv,
    collection_prob,
)
from .errors import CfpomdpError, EnvFileError, InputError, ValidationError
from .learning import (
    PureLearningSpec,
    evaluate,
    load_weights,
    save_weights,
    transfer,
    verify_universality,
)
from .simulate import simulate as run_simulation


def _fail(message: str) -> "SystemExit":
    click.echo(f"error: {message}", err=True)
    return SystemExit(2)


def handle_input_errors(f):
    @functools.wraps(f)
    def wrapper(*args, **kwargs):
        try:
            return f(*args, **kwargs)
        except ValidationError as exc:
            raise _fail("validation failed: " + "; ".join(exc.violations))
        except CfpomdpError as exc:
            raise _fail(str(exc))

    return wrapper


def _load(path: str) -> Pomdp:
    return load_env(path)


def _policy_from_spec(spec: str, env: Pomdp, m: int) -> DeterministicPolicy:
    """A policy argument is an action id (constant policy), an inline
    ``history -> action`` table with ',' between entries, or ``@file`` with
    one such entry per line."""
    spec = spec.strip()
    if spec.startswith("@"):
        lines = Path(spec[1:]).read_text().splitlines()
        entries = [ln.split("#", 1)[0].strip() for ln in lines]
        entries = [ln for ln in entries if ln]
    elif "->" in spec:
        entries = [part.strip() for part in spec.split(",") if part.strip()]
    else:
        if spec not in env.action_index:
            raise InputError(f"unknown action {spec!r} for constant policy")
        return DeterministicPolicy.constant(env, m, spec)
    decisions = []
    for entry in entries:
        if "->" not in entry:
            raise InputError(f"policy entry needs 'history -> action': {entry!r}")
        head, action = entry.rsplit("->", 1)
        decisions.append((History.parse(head.strip()), action.strip()))
    return DeterministicPolicy(tuple(decisions))


def _policy_to_text(pi: StochasticPolicy | DeterministicPolicy) -> str:
    if isinstance(pi, StochasticPolicy):
        entries = [(h, d.entries[0][0]) for h, d in pi.decisions if d.is_point()]
        if len(entries) != len(pi.decisions):
            return "; ".join(f"{h} -> {d}" for h, d in pi.decisions)
    else:
        entries = list(pi.decisions)
    actions = {a for _, a in entries}
    if len(actions) == 1:
        return next(iter(actions))
    return ", ".join(f"{h} -> {a}" for h, a in entries)


def _print_witness(witness: ConditionalWitness | CollectionWitness) -> None:
    click.echo("witness:")
    if isinstance(witness, ConditionalWitness):
        click.echo(
            f"{witness.h_long} | {witness.h_short} | "
            f"{_policy_to_text(witness.policy)} | "
            f"{witness.value_left} | {witness.value_right}"
        )
    else:
        for h, pi in witness.query.pairs:
            click.echo(
                f"{h} | {_policy_to_text(pi)} | "
                f"{witness.value_left} | {witness.value_right}"
            )


@click.group()
def main():
    """Exact equivalence, counterfactual equivalence, determinization, and
    pure learning processes for finite reward-free POMDPs."""


@main.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@handle_input_errors
def validate(file):
    """Check every environment invariant; report violations."""
    try:
        p = load_env(file, validate_result=False)
    except EnvFileError as exc:
        raise _fail(str(exc))
    violations = validate_pomdp(p)
    if not violations:
        click.echo("ok")
        return
    for violation in violations:
        click.echo(f"violation: {violation}")
    raise SystemExit(1)


@main.command()
@click.argument("file1", type=click.Path(exists=True, dir_okay=False))
@click.argument("file2", type=click.Path(exists=True, dir_okay=False))
@click.option("--m", "m", type=int, required=True, help="Horizon (turn count).")
@handle_input_errors
def equiv(file1, file2, m):
    """Decide whether two environments look identical to a single agent for
    the first M turns."""
    verdict = check_equiv(_load(file1), _load(file2), m)
    if verdict.equivalent:
        click.echo("equivalent")
        return
    click.echo("not equivalent")
    _print_witness(verdict.witness)
    raise SystemExit(1)


@main.command(name="cf-equiv")
@click.argument("file1", type=click.Path(exists=True, dir_okay=False))
@click.argument("file2", type=click.Path(exists=True, dir_okay=False))
@click.option("--m", "m", type=int, required=True, help="Horizon (turn count).")
@click.option("--witness", is_flag=True, help="Print a differing collection query.")
@handle_input_errors
def cf_equiv(file1, file2, m, witness):
    """Decide whether two environments look identical to any number of
    agents sharing the same resolution for the first M turns."""
    verdict = check_cf_equiv(_load(file1), _load(file2), m)
    if verdict.equivalent:
        click.echo("equivalent")
        return
    click.echo("not equivalent")
    if witness:
        _print_witness(verdict.witness)
    raise SystemExit(1)


@main.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--m", "m", type=int, required=True, help="Horizon (turn count).")
@click.option("-o", "out", type=click.Path(dir_okay=False), required=True)
@click.option("--minimize", "do_minimize", is_flag=True,
              help="Quotient the result by its behavior partition.")
@handle_input_errors
def determinize(file, m, out, do_minimize):
    """Construct a deterministic environment counterfactually equivalent to
    FILE at horizon M and write it to OUT."""
    result = determinize_env(_load(file), m)
    if do_minimize:
        result = minimize_env(result, m)
    save_env(out, result)
    click.echo(
        f"wrote {out} ({len(result.states)} states, "
        f"{len(result.init.support)} initial)"
    )


@main.command(name="env-policies")
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--m", "m", type=int, required=True, help="Horizon (turn count).")
@click.option("--count-only", is_flag=True,
              help="Print the unreduced census instead of the support.")
@click.option("--convention", type=click.Choice(["full", "transition-only"]),
              default="transition-only", show_default=True,
              help="Unreduced census convention (with --count-only).")
@handle_input_errors
def env_policies(file, m, count_only, convention):
    """List the positive-probability resolutions of FILE's randomness, or
    count all unreduced ones."""
    p = _load(file)
    if count_only:
        click.echo(str(count_env_policies(p, m, convention)))
        return
    support = enumerate_support(p, m)
    click.echo(f"support: {len(support)}")
    for i, (ep, prob) in enumerate(support):
        click.echo(f"policy {i} | {ep.describe()} | prob {prob}")


@main.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--history", "history_text", required=True,
              help='History, e.g. "o0 a0 s00".')
@handle_input_errors
def posterior(file, history_text):
    """Posterior over the initial state given a history."""
    from .trajectory import initial_posterior

    p = _load(file)
    post = initial_posterior(p, History.parse(history_text))
    for s in p.states:
        click.echo(f"{s} {post[s]}")


@main.command(name="collection-prob")
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--m", "m", type=int, required=True, help="Horizon (turn count).")
@click.option("--pair", "pairs", multiple=True, required=True,
              help='"HISTORY ; POLICY"; POLICY is an action id, an inline table, or @file.')
@handle_input_errors
def collection_prob_cmd(file, m, pairs):
    """Joint probability that agents sharing one resolution each see their
    paired history."""
    p = _load(file)
    parsed = []
    for pair in pairs:
        if ";" not in pair:
            raise InputError(f"pair needs 'HISTORY ; POLICY', got {pair!r}")
        hist_text, policy_text = pair.split(";", 1)
        h = History.parse(hist_text.strip())
        pi = _policy_from_spec(policy_text.strip(), p, m)
        parsed.append((h, pi.as_stochastic()))
    value = collection_prob(p, CollectionQuery(tuple(parsed)), m)
    click.echo(str(value))


@main.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--m", "m", type=int, required=True, help="Horizon (turn count).")
@click.option("--weights", "weights_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="Weight vector file: one 'state p/q' line per initial state.")
@click.option("--history", "history_text", required=True)
@handle_input_errors
def learn(file, m, weights_path, history_text):
    """Evaluate a pure learning process on one history."""
    p = _load(file)
    spec = PureLearningSpec.of(p, load_weights(weights_path), m)
    click.echo(str(evaluate(spec, History.parse(history_text))))


@main.command(name="learn-transfer")
@click.argument("src", type=click.Path(exists=True, dir_okay=False))
@click.argument("tgt", type=click.Path(exists=True, dir_okay=False))
@click.option("--m", "m", type=int, required=True, help="Horizon (turn count).")
@click.option("--weights", "weights_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("-o", "out", type=click.Path(dir_okay=False), required=True)
@click.option("--verify", is_flag=True,
              help="Check the transferred process agrees on every reachable history.")
@handle_input_errors
def learn_transfer(src, tgt, m, weights_path, out, verify):
    """Transfer a pure learning process from SRC to the counterfactually
    equivalent deterministic environment TGT; write the new weights to OUT."""
    source = _load(src)
    target = _load(tgt)
    spec = PureLearningSpec.of(source, load_weights(weights_path), m)
    moved = transfer(spec, target, m)
    save_weights(out, moved.weights)
    click.echo(f"wrote {out} ({len(moved.weights)} weights)")
    if verify:
        ok, differing = verify_universality(spec, target, m)
        if ok:
            click.echo("universality: verified")
        else:
            click.echo(f"universality: differs at {differing}")
            raise SystemExit(1)


@main.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--m", "m", type=int, required=True, help="Horizon (turn count).")
@click.option("--agents", "agents", type=int, required=True)
@click.option("--policy", "policies", multiple=True, required=True,
              help="One per agent: action id, inline table, or @file.")
@click.option("--episodes", "episodes", type=int, required=True)
@click.option("--seed", "seed", type=int, required=True)
@handle_input_errors
def simulate(file, m, agents, policies, episodes, seed):
    """Monte Carlo cross-check: sample shared resolutions and compare joint
    frequencies with their exact probabilities."""
    p = _load(file)
    if agents < 1:
        raise InputError(f"agents must be >= 1, got {agents}")
    if len(policies) != agents:
        raise InputError(f"need {agents} --policy options, got {len(policies)}")
    parsed = [_policy_from_spec(spec, p, m) for spec in policies]
    result = run_simulation(p, m, parsed, episodes, seed)
    click.echo(f"episodes {result.episodes} seed {result.seed} agents {agents}")
    for joint, count, exact in result.outcomes:
        joint_text = " ; ".join(str(h) for h in joint)
        click.echo(
            f"{joint_text} | count {count} | freq {count}/{result.episodes} | exact {exact}"
        )


if __name__ == "__main__":
    main()
