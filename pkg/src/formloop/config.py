"""Project configuration: classifier choice, linker knobs, sampling strategy."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from .classify import ClassifierKind
from .errors import ConfigError
from .linker import LinkConfig

CLASSIFIER_KINDS = ("gold_replay", "rule_based", "remote")
UNCERTAINTY_STRATEGIES = ("mean_entropy", "min_margin")

#: Sentinel for "explicitly unbounded" in merged(); a plain None means "keep".
UNBOUNDED = object()

_KNOWN_KEYS = {
    "classifier",
    "endpoint",
    "vertical_weight",
    "max_link_distance_ratio",
    "uncertainty",
}


@dataclass(frozen=True)
class ProjectConfig:
    classifier: str = "rule_based"
    endpoint: str | None = None
    link: LinkConfig = field(default_factory=LinkConfig)
    uncertainty: str = "mean_entropy"

    def __post_init__(self):
        if self.classifier not in CLASSIFIER_KINDS:
            raise ConfigError(f"unknown classifier {self.classifier!r}")
        if self.classifier == "remote" and not self.endpoint:
            raise ConfigError("remote classifier requires an endpoint")
        if self.uncertainty not in UNCERTAINTY_STRATEGIES:
            raise ConfigError(f"unknown uncertainty strategy {self.uncertainty!r}")

    def classifier_kind(self, gold=None) -> ClassifierKind:
        """Build the configured ClassifierKind; gold_replay needs its gold set."""
        if self.classifier == "remote":
            return ClassifierKind.remote(self.endpoint)
        if self.classifier == "gold_replay":
            return ClassifierKind.gold_replay(gold)
        return ClassifierKind.rule_based()

    def to_dict(self) -> dict:
        return {
            "classifier": self.classifier,
            "endpoint": self.endpoint,
            "vertical_weight": self.link.vertical_weight,
            "max_link_distance_ratio": self.link.max_link_distance_ratio,
            "uncertainty": self.uncertainty,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "ProjectConfig":
        unknown = set(data) - _KNOWN_KEYS
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        try:
            link = LinkConfig(
                vertical_weight=float(data.get("vertical_weight", 1.0)),
                max_link_distance_ratio=(
                    None
                    if data.get("max_link_distance_ratio", 0.5) is None
                    else float(data.get("max_link_distance_ratio", 0.5))
                ),
            )
        except ValueError as err:
            raise ConfigError(str(err)) from err
        return cls(
            classifier=data.get("classifier", "rule_based"),
            endpoint=data.get("endpoint"),
            link=link,
            uncertainty=data.get("uncertainty", "mean_entropy"),
        )

    def merged(self, **overrides) -> "ProjectConfig":
        """New config with non-None overrides applied on top."""
        data = self.to_dict()
        for key, value in overrides.items():
            if key not in _KNOWN_KEYS:
                raise ConfigError(f"unknown config key {key!r}")
            if value is UNBOUNDED:
                data[key] = None
            elif value is not None:
                data[key] = value
        return ProjectConfig.from_dict(data)
