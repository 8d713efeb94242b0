from pathlib import Path
from typing import Dict
from dflow.python import (
    OP,
    OPIO,
    OPIOSign,
    Artifact
)
from geodl.constants import run_tag_fmt, report_json_name
from geodl.tools.experiment import run_experiment
from geodl.utils.config import ExperimentConfig
from geodl.utils.files import dump_json
from geodl.utils.path import set_directory


class RunIncremental(OP):

    """`RunIncremental` trains the base task and every increment of one (mode, seed) pair
    and scores it with the average accuracy and forgetting rate.
    """

    @classmethod
    def get_input_sign(cls):
        return OPIOSign(
            {
                "exp_config": Dict,
                "mode": str,
                "seed": int
            }
        )

    @classmethod
    def get_output_sign(cls):
        return OPIOSign(
            {
                "run_tag": str,
                "report": Dict,
                "report_file": Artifact(Path)
            }
        )

    @OP.exec_sign_check
    def execute(
        self,
        op_in: OPIO,
    ) -> OPIO:

        r"""Execute the OP.

        Parameters
        ----------
        op_in : dict
            Input dict with components:

            - `exp_config`: (`Dict`) Flat experiment configuration, see `geodl.utils.config.ExperimentConfig`.
            - `mode`: (`str`) Distillation mode, one of `none`, `lwf`, `cosine`, `geodl`.
            - `seed`: (`int`) Run seed.

        Returns
        -------
            Output dict with components:

            - `run_tag`: (`str`) Name of the run, `{mode}-{seed:04d}`.
            - `report`: (`Dict`) The experiment report as a dict.
            - `report_file`: (`Artifact(Path)`) The report dumped as JSON in the `run_tag` directory.
        """
        cfg = ExperimentConfig.from_dict(op_in["exp_config"])
        run_tag = run_tag_fmt.format(mode=op_in["mode"], seed=op_in["seed"])
        report = run_experiment(cfg, op_in["mode"], op_in["seed"]).to_dict()
        task_path = Path(run_tag).absolute()
        with set_directory(task_path):
            dump_json(report_json_name, report)
        return OPIO({
            "run_tag": run_tag,
            "report": report,
            "report_file": task_path.joinpath(report_json_name)
        })
