"""A loaded model triple (tokenizer, flow decoder, block-AR generator)."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from ..core.schedule import GranularitySchedule
from ..core.series import DomainError
from ..models.flow import VelocityNetwork, load_decoder
from ..models.tokenizer import TokenizerEncoder, load_tokenizer
from ..models.var import VarTransformer, load_var


@dataclass
class ModelBundle:
    tokenizer: TokenizerEncoder
    decoder: VelocityNetwork
    var: VarTransformer

    def __post_init__(self):
        s1 = self.tokenizer.config.schedule
        for other in (self.decoder.config.schedule, self.var.config.schedule):
            if other.to_dict() != s1.to_dict():
                raise DomainError("model bundle has inconsistent granularity schedules")

    @property
    def schedule(self) -> GranularitySchedule:
        return self.tokenizer.config.schedule

    @property
    def series_length(self) -> int:
        return self.tokenizer.config.series_length

    @property
    def n_classes(self) -> int:
        return self.var.config.n_classes

    @classmethod
    def load(cls, directory: str | Path) -> "ModelBundle":
        directory = Path(directory)
        return cls(
            tokenizer=load_tokenizer(directory / "tokenizer.ckpt"),
            decoder=load_decoder(directory / "decoder.ckpt"),
            var=load_var(directory / "var.ckpt"),
        )

    def save(self, directory: str | Path) -> None:
        from ..models.flow import save_decoder
        from ..models.tokenizer import save_tokenizer
        from ..models.var import save_var

        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        save_tokenizer(directory / "tokenizer.ckpt", self.tokenizer)
        save_decoder(directory / "decoder.ckpt", self.decoder)
        save_var(directory / "var.ckpt", self.var)
