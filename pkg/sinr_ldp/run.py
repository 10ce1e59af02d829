"""Based on https://github.com/kevinzakka/nanorl/blob/main/nanorl/infra/experiment.py"""

import logging
import pathlib
import time
from dataclasses import dataclass, replace

import wandb

from sinr_ldp.config.experiment import ExperimentConfig
from sinr_ldp.config.utils import to_dict
from sinr_ldp.experiments import run_experiment
from sinr_ldp.types import RateReportDict

logger = logging.getLogger(__name__)


@dataclass
class Run:
    run_name: str
    seed: int
    data_dir: pathlib.Path

    config: ExperimentConfig

    def __post_init__(self) -> None:
        self._wandb_enabled = False
        self._timestamp = str(int(time.time()))
        # the command-line seed always wins over the file
        self.config = replace(self.config, seed_root=self.seed)

    def _get_data_dir(self) -> pathlib.Path:
        return self.data_dir

    def enable_wandb(self, **wandb_kwargs) -> None:
        self._wandb_enabled = True
        self._get_data_dir().mkdir(parents=True, exist_ok=True)
        run_id = f"{self._timestamp}_{self.run_name}_{self.seed}"
        wandb.init(
            dir=str(self._get_data_dir()),
            id=run_id,
            name=self.run_name,
            config=to_dict(self.config),
            **wandb_kwargs,
        )

    def start(self) -> dict[str, RateReportDict]:
        data_dir = self._get_data_dir()
        logger.info("running %s with seed %d into %s", self.run_name, self.seed, data_dir)
        try:
            return run_experiment(self.config, data_dir, track=self._wandb_enabled)
        finally:
            if self._wandb_enabled:
                wandb.finish()
