"""Built-in game scenarios for Equiscope."""

from .hostility import (
    AggregationRegistry,
    Encounter,
    HostilityGameParams,
    build_game,
    encounter_tensor,
    register_aggregation,
    resolve_encounter,
    typed_probability,
)
from .synthetic import SizeProfile, generate_synthetic

__all__ = [
    "AggregationRegistry",
    "Encounter",
    "HostilityGameParams",
    "SizeProfile",
    "build_game",
    "encounter_tensor",
    "generate_synthetic",
    "register_aggregation",
    "resolve_encounter",
    "typed_probability",
]
