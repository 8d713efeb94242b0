import os
from contextlib import contextmanager
from pathlib import Path
from typing import Union


@contextmanager
def set_directory(path: Union[str, Path]):
    """Work inside `path`, created if missing, and return to the caller's directory on exit.

    Examples
    --------
    >>> with set_directory("results/geodl-0003"):
    ...    dump_json("report.json", report)
    """
    cwd = Path().absolute()
    path = Path(path)
    path.mkdir(exist_ok=True, parents=True)
    try:
        os.chdir(path)
        yield path.absolute()
    finally:
        os.chdir(cwd)
