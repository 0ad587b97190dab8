"""Line-oriented text format for environments.

    # comment
    states: <id> <id> ...
    actions: <id> ...
    observations: <id> ...
    init: <state> <rat> [| <state> <rat> ...]
    obs: <state> -> <observation> <rat> [| ...]          (one line per state)
    trans: <state> <action> -> <state> <rat> [| ...]     (one line per (state, action))

Rationals are written ``p/q`` (or a bare integer); decimals are rejected so
that files stay exact.  Parsing validates by default and round-trips with
`serialize_env`.
"""

from __future__ import annotations

from pathlib import Path

from .core import FiniteDist, Pomdp, Rat, parse_rational, validate
from .errors import EnvFileError, InputError, ValidationError


def _parse_dist(body: str, lineno: int) -> list[tuple[str, Rat]]:
    entries = []
    for part in body.split("|"):
        tokens = part.split()
        if len(tokens) != 2:
            raise EnvFileError(lineno, f"expected '<id> <rational>', got {part.strip()!r}")
        try:
            value = parse_rational(tokens[1])
        except InputError as exc:
            raise EnvFileError(lineno, str(exc)) from None
        entries.append((tokens[0], value))
    return entries


def parse_env(text: str, validate_result: bool = True) -> Pomdp:
    """Parse an environment; raise `EnvFileError` (with a line number) on
    syntax problems and `ValidationError` on invariant violations unless
    `validate_result` is off."""
    states: list[str] | None = None
    actions: list[str] | None = None
    observations: list[str] | None = None
    init: list[tuple[str, Rat]] | None = None
    trans: dict[tuple[str, str], list[tuple[str, Rat]]] = {}
    obs: dict[str, list[tuple[str, Rat]]] = {}

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if ":" not in line:
            raise EnvFileError(lineno, f"expected '<keyword>: ...', got {raw.strip()!r}")
        keyword, body = line.split(":", 1)
        keyword = keyword.strip()
        body = body.strip()
        if keyword in ("states", "actions", "observations"):
            ids = body.split()
            if not ids:
                raise EnvFileError(lineno, f"empty {keyword} declaration")
            if keyword == "states":
                if states is not None:
                    raise EnvFileError(lineno, "duplicate states declaration")
                states = ids
            elif keyword == "actions":
                if actions is not None:
                    raise EnvFileError(lineno, "duplicate actions declaration")
                actions = ids
            else:
                if observations is not None:
                    raise EnvFileError(lineno, "duplicate observations declaration")
                observations = ids
        elif keyword == "init":
            if init is not None:
                raise EnvFileError(lineno, "duplicate init declaration")
            init = _parse_dist(body, lineno)
        elif keyword == "obs":
            if "->" not in body:
                raise EnvFileError(lineno, "obs line needs '->'")
            head, dist_body = body.split("->", 1)
            head_tokens = head.split()
            if len(head_tokens) != 1:
                raise EnvFileError(lineno, f"obs line needs one state before '->', got {head.strip()!r}")
            if head_tokens[0] in obs:
                raise EnvFileError(lineno, f"duplicate obs row for {head_tokens[0]}")
            obs[head_tokens[0]] = _parse_dist(dist_body, lineno)
        elif keyword == "trans":
            if "->" not in body:
                raise EnvFileError(lineno, "trans line needs '->'")
            head, dist_body = body.split("->", 1)
            head_tokens = head.split()
            if len(head_tokens) != 2:
                raise EnvFileError(
                    lineno, f"trans line needs state and action before '->', got {head.strip()!r}"
                )
            key = (head_tokens[0], head_tokens[1])
            if key in trans:
                raise EnvFileError(lineno, f"duplicate trans row for ({key[0]}, {key[1]})")
            trans[key] = _parse_dist(dist_body, lineno)
        else:
            raise EnvFileError(lineno, f"unknown keyword {keyword!r}")

    for name, value in (("states", states), ("actions", actions),
                        ("observations", observations), ("init", init)):
        if value is None:
            raise EnvFileError(0, f"missing {name} declaration")

    try:
        p = Pomdp.build(
            states,
            actions,
            observations,
            FiniteDist.of(init),
            {k: FiniteDist.of(v) for k, v in trans.items()},
            {k: FiniteDist.of(v) for k, v in obs.items()},
        )
    except InputError as exc:
        raise EnvFileError(0, str(exc)) from None
    if validate_result:
        violations = validate(p)
        if violations:
            raise ValidationError(violations)
    return p


def serialize_env(p: Pomdp) -> str:
    """Canonical text form; `parse_env(serialize_env(p))` equals `p`."""

    def dist(d: FiniteDist) -> str:
        return " | ".join(f"{k} {v}" for k, v in d.entries)

    lines = [
        "states: " + " ".join(p.states),
        "actions: " + " ".join(p.actions),
        "observations: " + " ".join(p.observations),
        "init: " + dist(p.init),
    ]
    for s, d in p.obs:
        lines.append(f"obs: {s} -> {dist(d)}")
    for (s, a), d in p.trans:
        lines.append(f"trans: {s} {a} -> {dist(d)}")
    return "\n".join(lines) + "\n"


def load_env(path: str | Path, validate_result: bool = True) -> Pomdp:
    return parse_env(Path(path).read_text(), validate_result=validate_result)


def save_env(path: str | Path, p: Pomdp) -> None:
    Path(path).write_text(serialize_env(p))
