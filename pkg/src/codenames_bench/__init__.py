"""Codenames benchmark harness: rules engine, agents and tournament runner."""

from .game import Board, Clue, EndReason, GameResult, GameState, Identity, Mode, Team

__version__ = "0.1.0"

__all__ = [
    "Board", "Clue", "EndReason", "GameResult", "GameState", "Identity", "Mode", "Team",
]
