"""Python access to the MAESTRO curriculum engine."""

from ._maestro import (
    ConfigError,
    ParameterError,
    ParseError,
    UsageError,
    canonical_level_text,
    evaluate,
    exact_game_value,
    gae,
    generate_level,
    heldout_level_names,
    heldout_level_text,
    independent_argmax,
    joint_argmax,
    level_hash,
    play_match,
    plot,
    run_table1,
    solve_zero_sum,
    table1,
    train,
)

__all__ = [
    "ConfigError",
    "ParameterError",
    "ParseError",
    "UsageError",
    "canonical_level_text",
    "evaluate",
    "exact_game_value",
    "gae",
    "generate_level",
    "heldout_level_names",
    "heldout_level_text",
    "independent_argmax",
    "joint_argmax",
    "level_hash",
    "play_match",
    "plot",
    "run_table1",
    "solve_zero_sum",
    "table1",
    "train",
]
