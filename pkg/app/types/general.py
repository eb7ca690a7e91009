try:
    from enum import StrEnum
except ImportError:  # Python < 3.11
    from enum import Enum

    class StrEnum(str, Enum):
        def __str__(self) -> str:
            return str.__str__(self)

        def __format__(self, format_spec: str) -> str:
            return str.__format__(str(self), format_spec)

        @staticmethod
        def _generate_next_value_(name, start, count, last_values):
            return name.lower()

from typing import TypeAlias

# Position-index displacement, |delta| <= max_step.
Action: TypeAlias = int


class Player(StrEnum):
    RECEIVER = "R"
    JAMMER = "J"

    @property
    def opponent(self) -> "Player":
        return Player.JAMMER if self is Player.RECEIVER else Player.RECEIVER


class GameVariant(StrEnum):
    SEQUENTIAL = "g1"
    SIMULTANEOUS = "g2"
    BLIND = "g3"


class AgentKind(StrEnum):
    TABULAR = "tabular"
    DEEP = "deep"
    GREEDY = "greedy"
    MIXED = "mixed"
    RANDOM = "random"
    STATIC_OPTIMAL = "static-optimal"


class RewardMode(StrEnum):
    NORMALIZED = "normalized"
    SPECTRAL_EFFICIENCY = "spectral_efficiency"


JAMMER_ONLY_AGENTS = frozenset({AgentKind.GREEDY, AgentKind.MIXED})
