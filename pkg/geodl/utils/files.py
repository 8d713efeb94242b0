import json
from pathlib import Path
from typing import Dict, Union
import numpy as np
from geodl.constants import matrix_fmt


def read_txt(
        fname: Union[str, Path]
    ) -> str:
    with open(fname, "r", encoding="utf-8") as fn:
        fcont = fn.read()
    return fcont


def write_txt(
        fname: Union[str, Path],
        fcont: str
    ):
    with open(fname, "w", encoding="utf-8") as fn:
        fn.write(fcont)


def load_json(
        fname: Union[str, Path]
    ) -> Dict:
    with open(fname, "r", encoding="utf-8") as fn:
        jdata = json.load(fn)
    return jdata


def dump_json(
        fname: Union[str, Path],
        fcont: Dict,
        indent: int = 4
    ):
    with open(fname, "w", encoding="utf-8") as fn:
        json.dump(fcont, fn, indent=indent, sort_keys=True)


def load_matrix(
        fname: Union[str, Path]
    ) -> np.ndarray:
    """Read a matrix fixture.

    The first line holds ``rows cols``, every following line one row of
    space-separated decimals.
    """
    lines = [ll for ll in read_txt(fname).splitlines() if ll.strip()]
    if not lines:
        raise ValueError(f"empty matrix file {fname}")
    rows, cols = (int(tok) for tok in lines[0].split())
    data = np.array(
        [[float(tok) for tok in ll.split()] for ll in lines[1:]],
        dtype=float
    )
    if data.shape != (rows, cols):
        raise ValueError(
            f"matrix file {fname} declares {rows}x{cols}, found {data.shape}")
    return data


def save_matrix(
        fname: Union[str, Path],
        matrix: np.ndarray
    ):
    matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
    rows, cols = matrix.shape
    body = "\n".join(
        " ".join(matrix_fmt % val for val in row) for row in matrix)
    write_txt(fname, f"{rows} {cols}\n{body}\n")
